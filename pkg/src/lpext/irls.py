"""Iteratively reweighted least squares for the minimal L^p extension.

Each step replaces the weight ``exp(-phi)`` by

    omega = (|F|^2 + eps)^{(p-2)/2} exp(-phi)

built from the current iterate and solves the weighted L^2 extension problem
for that density.  A minimiser of the p-energy is a fixed point of this map,
and because ``u -> u^{p/2}`` is concave for p < 2 every step decreases the
smoothed energy at fixed eps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError
from .function_space import HoloFunction
from .l2_solver import make_l2_problem, solve_l2
from .lp_solver import LpProblem, default_starts, objective, solve_lp_direct

__all__ = [
    "IrlsSchedule",
    "IrlsStep",
    "FixedPointCertificate",
    "reweight",
    "reweighted_density",
    "irls_solve",
    "reweighted_l2_minimizer",
    "fixed_point_residual",
    "difference_orthogonality",
    "norm_transfer_residual",
    "descent_check",
]


@dataclass(frozen=True)
class IrlsSchedule:
    """eps_m = max(eps_min, eps0 * factor^-m); eps_min defaults to the problem's eps."""

    eps0: float = 1e-2
    factor: float = 4.0
    eps_min: float | None = None
    max_iter: int = 200
    tol: float = 1e-8


@dataclass(frozen=True)
class IrlsStep:
    iteration: int
    eps: float
    objective_before: float
    objective: float
    iterate_diff: float
    orthogonality: float


@dataclass
class FixedPointCertificate:
    iterate_difference: float
    cross_check_distance: float
    cross_check_relative: float
    identity_residual: float
    converged: bool
    iterations: int


def reweighted_density(values, p, base_density, eps):
    """omega from the iterate's node values ``values``."""
    if p == 2:
        return np.asarray(base_density, dtype=float) * 1.0
    return (np.abs(values) ** 2 + eps) ** ((p - 2) / 2) * base_density


def reweight(F: HoloFunction, p, base_density, eps, nodes):
    """Density (|F|^2 + eps)^{(p-2)/2} exp(-phi) at ``nodes``; ``base_density`` is exp(-phi)."""
    if eps <= 0 and p < 2:
        raise ValueError("eps must be positive")
    return reweighted_density(F(nodes), p, base_density, eps)


def _l2_step(c, prob: LpProblem, eps):
    omega = reweighted_density(prob.V @ c, prob.p, prob.base_density, eps)
    return solve_l2(make_l2_problem(prob.feasible, omega, prob.quad, V=prob.V))


def reweighted_l2_minimizer(F: HoloFunction, prob: LpProblem, eps=None):
    """Minimal L^2 extension for the density built from F (and its report)."""
    return _l2_step(F.coeffs, prob, prob.eps if eps is None else eps)


def irls_solve(prob: LpProblem, F0: HoloFunction | None = None,
               schedule: IrlsSchedule = IrlsSchedule(), reference: HoloFunction | None = None,
               cross_check=True, seed=0, starts=4):
    """Run IRLS; return ``(F, certificate, trace)``.

    When the iterate stops moving before eps has reached its floor, eps
    jumps straight to the floor: a stationary iterate at a coarse eps gains
    nothing from the intermediate levels.  The certificate compares against
    ``reference`` (a direct-solver minimiser, computed here when omitted and
    ``cross_check`` is set).
    """
    eps_min = prob.eps if schedule.eps_min is None else schedule.eps_min
    base = make_l2_problem(prob.feasible, prob.base_density, prob.quad, V=prob.V)
    trace = []
    if prob.p == 2:
        # the reweighting is the identity: a single inner solve is the answer
        F, rep = solve_l2(base)
        c = F0.coeffs if F0 is not None else F.coeffs
        trace.append(IrlsStep(0, eps_min, objective(c, prob, eps_min),
                              objective(F.coeffs, prob, eps_min),
                              float(np.linalg.norm(F.coeffs - c)), rep.orthogonality))
        converged = True
    else:
        c = np.array(solve_l2(base)[0].coeffs if F0 is None else F0.coeffs)
        eps = max(eps_min, schedule.eps0)
        converged = False
        for m in range(schedule.max_iter):
            F, rep = _l2_step(c, prob, eps)
            diff = float(np.linalg.norm(F.coeffs - c))
            trace.append(IrlsStep(m, eps, objective(c, prob, eps),
                                  objective(F.coeffs, prob, eps), diff, rep.orthogonality))
            small = diff <= schedule.tol * (1 + np.linalg.norm(c))
            c = np.array(F.coeffs)
            if small and eps <= eps_min:
                converged = True
                break
            eps = eps_min if small else max(eps_min, eps / schedule.factor)
        if not converged:
            raise ConvergenceError(
                f"IRLS did not converge in {schedule.max_iter} iterations", trace)
    iters = len(trace)

    if reference is None and cross_check:
        reference, _ = solve_lp_direct(prob, default_starts(prob, starts, seed))
    if reference is not None:
        dist = float(np.linalg.norm(F.coeffs - reference.coeffs))
        rel = dist / (1 + float(np.linalg.norm(reference.coeffs)))
        ident = difference_orthogonality(reference, F, prob)
    else:
        dist = rel = ident = float("nan")
    cert = FixedPointCertificate(trace[-1].iterate_diff, dist, rel, ident, converged, iters)
    return F, cert, trace


def fixed_point_residual(F: HoloFunction, prob: LpProblem, eps=None) -> float:
    """|F - F_2| / (1 + |F|), F_2 the minimal L^2 extension for the density built from F."""
    F2, _ = reweighted_l2_minimizer(F, prob, eps)
    return float(np.linalg.norm(F.coeffs - F2.coeffs) / (1 + np.linalg.norm(F.coeffs)))


def difference_orthogonality(F_p: HoloFunction, F_2: HoloFunction, prob: LpProblem, eps=None):
    """<F_p - F_2, h>_omega with h = F_p - F_2, relative to |F_p|^2_omega.

    omega is the density built from F_p.  Both functions share the data on S,
    so h is an admissible variation and the quantity vanishes when they agree.
    """
    eps = prob.eps if eps is None else eps
    omega = reweighted_density(prob.V @ F_p.coeffs, prob.p, prob.base_density, eps)
    mu = prob.quad.weights * omega
    gp = prob.V @ F_p.coeffs
    h = gp - prob.V @ F_2.coeffs
    num = abs(np.dot(mu, np.conj(h) * h))
    den = float(np.dot(mu, np.abs(gp) ** 2))
    return float(num / den) if den > 0 else float(num)


def norm_transfer_residual(F: HoloFunction, prob: LpProblem, eps=None) -> float:
    """|sum w |F|^2 omega - sum w |F|^p exp(-phi)| relative to the latter."""
    eps = prob.eps if eps is None else eps
    g = prob.V @ F.coeffs
    omega = reweighted_density(g, prob.p, prob.base_density, eps)
    lhs = float(np.dot(prob.quad.weights * omega, np.abs(g) ** 2))
    rhs = float(np.dot(prob.mu, np.abs(g) ** prob.p))
    if rhs == 0:
        return abs(lhs)
    return abs(lhs - rhs) / rhs


def descent_check(trace, tol=1e-12) -> bool:
    """True iff the smoothed energy never increases within a constant-eps run.

    Checks each step against its own starting energy and consecutive steps
    sharing an eps; ``tol`` is relative to max(1, |J|).
    """
    for row in trace:
        before = getattr(row, "objective_before", None)
        if before is not None and row.objective > before + tol * max(1.0, abs(before)):
            return False
    for a, b in zip(trace, trace[1:]):
        if a.eps == b.eps and b.objective > a.objective + tol * max(1.0, abs(a.objective)):
            return False
    return True

"""Direct minimisation of the smoothed weighted p-energy.

The energy ``J_eps(c) = sum_q w_q (|g(z_q)|^2 + eps)^{p/2} exp(-phi(z_q))``
is minimised over the feasible set by gradient descent in the free
coordinates, with Barzilai-Borwein initial steps, Armijo backtracking and a
decreasing eps schedule.  This is the reference solver the IRLS iteration is
checked against, so it shares nothing with it beyond the problem data.

Complex gradients follow the real convention: for ``c = x + i y`` the
returned vector is ``dJ/dx + i dJ/dy = 2 dJ/d(conj c)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, ConvergenceError
from .function_space import FeasibleSet, HoloFunction, vandermonde
from .geometry import QuadratureRule
from .l2_solver import make_l2_problem, solve_l2

log = logging.getLogger(__name__)

__all__ = [
    "LpProblem",
    "DescentOptions",
    "StartResult",
    "MinimizerCertificate",
    "ProbeReport",
    "make_lp_problem",
    "objective",
    "objective_and_gradient",
    "eps_stages",
    "default_starts",
    "solve_lp_direct",
    "variational_residual_p",
    "uniqueness_probe",
]

EPS_LADDER = (1e-2, 1e-4, 1e-6, 1e-8)


@dataclass(frozen=True, eq=False)
class LpProblem:
    """Everything needed to evaluate the p-energy on the feasible set.

    ``base_density`` is ``exp(-phi)`` at the quadrature nodes.  ``eps`` is the
    final smoothing level shared with the IRLS solver.
    """

    p: float
    feasible: FeasibleSet
    quad: QuadratureRule
    base_density: np.ndarray
    eps: float = 1e-8
    V: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if not (0 < self.p <= 2):
            raise ConfigurationError(f"p must lie in (0, 2], got {self.p}")
        if self.eps < 0:
            raise ConfigurationError("smoothing eps must be >= 0")
        if self.V is None:
            object.__setattr__(self, "V", vandermonde(self.feasible.basis, self.quad.nodes))
        object.__setattr__(self, "base_density", np.asarray(self.base_density, dtype=float))

    @property
    def mu(self):
        return self.quad.weights * self.base_density

    @property
    def basis(self):
        return self.feasible.basis

    def function(self, c):
        return HoloFunction(self.feasible.basis, c)

    def with_p(self, p):
        return LpProblem(p, self.feasible, self.quad, self.base_density, self.eps, self.V)


def make_lp_problem(p, feasible, quad, base_density, eps=1e-8):
    return LpProblem(p, feasible, quad, base_density, eps)


def objective(c, prob: LpProblem, eps=None) -> float:
    eps = prob.eps if eps is None else eps
    g = prob.V @ np.asarray(c, dtype=complex)
    return float(np.dot(prob.mu, (np.abs(g) ** 2 + eps) ** (prob.p / 2)))


def objective_and_gradient(c, prob: LpProblem, eps=None, project=True):
    """Smoothed energy and its gradient with respect to the coefficients.

    With ``project=True`` the gradient is projected onto the free subspace
    (the constrained part of the feasible set cannot move).
    """
    eps = prob.eps if eps is None else eps
    p = prob.p
    g = prob.V @ np.asarray(c, dtype=complex)
    s = np.abs(g) ** 2 + eps
    J = float(np.dot(prob.mu, s ** (p / 2)))
    kern = prob.mu * s ** (p / 2 - 1)
    grad = p * (prob.V.conj().T @ (kern * g))
    if project:
        Z = prob.feasible.null
        grad = Z @ (Z.conj().T @ grad)
    return J, grad


@dataclass(frozen=True)
class DescentOptions:
    max_iter: int = 10_000
    armijo: float = 1e-4
    backtrack: float = 0.5
    step_min: float = 1e-8
    step_max: float = 1e2
    # normalised stationarity target per stage; the last stage uses final_tol
    stage_tol: float = 1e-6
    final_tol: float = 1e-9


@dataclass
class StartResult:
    index: int
    coeffs: np.ndarray
    objective: float
    residual: float
    iterations: int
    stalled: bool
    trace: list


@dataclass
class MinimizerCertificate:
    objective: float
    residual: float
    dispersion: float
    flagged: bool
    selected: int
    starts: list


@dataclass
class ProbeReport:
    p: float
    trials: int
    dispersion: float
    clusters: list  # dicts: representative coeffs, objective, members

    @property
    def count(self):
        return len(self.clusters)


def eps_stages(eps):
    """Continuation ladder ending at ``eps``."""
    return [e for e in EPS_LADDER if e > eps] + [eps]


class _FreeEnergy:
    """J_eps restricted to the free coordinates y, with stationarity measure."""

    def __init__(self, prob: LpProblem, eps):
        fs = prob.feasible
        self.p = prob.p
        self.eps = eps
        self.mu = prob.mu
        self.g0 = prob.V @ fs.particular
        self.VZ = prob.V @ fs.null
        self.abs2_h = np.abs(self.VZ) ** 2

    def __call__(self, y):
        g = self.g0 + self.VZ @ y
        return float(np.dot(self.mu, (np.abs(g) ** 2 + self.eps) ** (self.p / 2)))

    def decrease(self, y, dy):
        """J(y + dy) - J(y), evaluated per node so it stays accurate near a minimum."""
        g = self.g0 + self.VZ @ y
        dg = self.VZ @ dy
        s = np.abs(g) ** 2 + self.eps
        ds = np.real(dg * np.conj(2 * g + dg))
        return float(np.dot(self.mu * s ** (self.p / 2),
                            np.expm1(0.5 * self.p * np.log1p(ds / s))))

    def full(self, y):
        g = self.g0 + self.VZ @ y
        s = np.abs(g) ** 2 + self.eps
        J = float(np.dot(self.mu, s ** (self.p / 2)))
        kern = self.mu * s ** (self.p / 2 - 1)
        grad = self.p * (self.VZ.conj().T @ (kern * g))
        # |<F, h_j>| / (|F| |h_j|) in the reweighted inner product
        nF = np.sqrt(np.dot(kern, np.abs(g) ** 2))
        nh = np.sqrt(kern @ self.abs2_h)
        with np.errstate(divide="ignore", invalid="ignore"):
            res = np.where(nh * nF > 0, np.abs(grad) / (self.p * nF * nh), 0.0)
        return J, grad, float(res.max(initial=0.0))


def _descend(energy: _FreeEnergy, y, opts: DescentOptions, tol, trace, stage):
    J, grad, res = energy.full(y)
    step = 1.0
    y_prev = grad_prev = None
    for it in range(opts.max_iter + 1):
        if res <= tol:
            return y, J, res, it, False
        if it == opts.max_iter:
            break
        if y_prev is not None:
            s = y - y_prev
            r = grad - grad_prev
            sr = float(np.real(np.vdot(s, r)))
            if sr > 0:
                step = float(np.real(np.vdot(s, s))) / sr
        step = min(max(step, opts.step_min), opts.step_max)
        slope = float(np.real(np.vdot(grad, grad)))
        t = step
        while True:
            dJ = energy.decrease(y, -t * grad)
            if dJ <= -opts.armijo * t * slope:
                break
            t *= opts.backtrack
            if t < 1e-30:
                # no representable decrease left: stationary to machine precision
                return y, J, res, it, True
        if dJ >= 0:
            return y, J, res, it, True
        y_new = y - t * grad
        y_prev, grad_prev = y, grad
        y = y_new
        J, grad, res = energy.full(y)
        trace.append({"stage": stage, "eps": energy.eps, "objective": J, "step": t,
                      "residual": res})
    raise ConvergenceError(
        f"direct descent did not reach tolerance {tol:g} within {opts.max_iter} "
        f"iterations at eps={energy.eps:g} (residual {res:.3e})", trace)


def _run_start(prob: LpProblem, index, c_start, opts):
    fs = prob.feasible
    y = fs.coords(c_start)
    trace = []
    stages = eps_stages(prob.eps)
    stalled = False
    it_total = 0
    J = res = 0.0
    for si, eps in enumerate(stages):
        energy = _FreeEnergy(prob, eps)
        tol = opts.final_tol if si == len(stages) - 1 else opts.stage_tol
        if fs.free_dim == 0:
            J, _, res = energy.full(y)
            continue
        y, J, res, it, stalled = _descend(energy, y, opts, tol, trace, si)
        it_total += it
    return StartResult(index, fs.point(y), J, res, it_total, stalled, trace)


def _lex_key(c):
    return tuple(x for z in np.round(c, 12) for x in (z.real, z.imag))


def solve_lp_direct(prob: LpProblem, starts, opts: DescentOptions = DescentOptions(),
                    dispersion_tol=1e-6):
    """Minimise the smoothed p-energy from every start; keep the best.

    Starts must be feasible coefficient vectors.  Equal objectives (relative
    1e-9) are broken by the lexicographically smallest coefficient vector.
    For p = 2 the problem is a plain least-squares one and is delegated to
    the L^2 solver.
    """
    starts = [np.asarray(s, dtype=complex) for s in starts]
    if not starts:
        raise ValueError("at least one start is required")
    if prob.p == 2:
        F, rep = solve_l2(make_l2_problem(prob.feasible, prob.base_density, prob.quad, V=prob.V))
        J = objective(F.coeffs, prob)
        res = [StartResult(0, F.coeffs, J, rep.orthogonality, 0, False, [])]
        return F, MinimizerCertificate(J, rep.orthogonality, 0.0, False, 0, res)

    results = [_run_start(prob, i, c, opts) for i, c in enumerate(starts)]
    best = min(r.objective for r in results)
    ties = [r for r in results if r.objective <= best + 1e-9 * max(abs(best), 1e-300)]
    chosen = min(ties, key=lambda r: _lex_key(r.coeffs))
    coeffs = np.array([r.coeffs for r in results])
    dispersion = 0.0
    if len(results) > 1:
        d = np.linalg.norm(coeffs[:, None, :] - coeffs[None, :, :], axis=-1)
        dispersion = float(d.max())
    flagged = prob.p >= 1 and dispersion > dispersion_tol
    if flagged:
        log.warning("p=%g: starts disagree (dispersion %.3e) in a convex regime",
                    prob.p, dispersion)
    cert = MinimizerCertificate(chosen.objective, chosen.residual, dispersion, flagged,
                                chosen.index, results)
    return prob.function(chosen.coeffs), cert


def _rng(seed, counter):
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 0, counter]))


def default_starts(prob: LpProblem, count: int, seed: int):
    """Particular solution plus ``count - 1`` Gaussian free-part perturbations.

    The perturbation scale is half the norm of the particular solution's free
    part, or the norm of the particular solution when that part is zero.
    Start ``i`` draws from an independent counter-based stream of ``seed``.
    """
    fs = prob.feasible
    c0 = fs.particular
    starts = [c0.copy()]
    free_part = np.linalg.norm(fs.null.conj().T @ c0) if fs.free_dim else 0.0
    scale = 0.5 * free_part if free_part > 0 else np.linalg.norm(c0)
    if scale == 0:
        scale = 1.0
    for i in range(1, count):
        rng = _rng(seed, i)
        y = (rng.standard_normal(fs.free_dim) + 1j * rng.standard_normal(fs.free_dim))
        y *= scale / np.sqrt(2 * max(fs.free_dim, 1))
        starts.append(fs.point(y) if fs.free_dim else c0.copy())
    return starts


def variational_residual_p(F: HoloFunction, prob: LpProblem, eps=None) -> float:
    """Discrete first-order condition of the p-energy.

    max_h |sum w (|F|^2+eps)^{p/2-1} conj(F) h exp(-phi)| / (|F| |h|), norms
    taken in the same reweighted inner product, h over the free directions.
    """
    eps = prob.eps if eps is None else eps
    fs = prob.feasible
    if fs.free_dim == 0:
        return 0.0
    energy = _FreeEnergy(prob, eps)
    return energy.full(fs.coords(F.coeffs))[2]


def _cluster(coeffs, objectives, radius):
    clusters = []
    for i, c in enumerate(coeffs):
        for cl in clusters:
            if np.linalg.norm(c - cl["coeffs"]) <= radius:
                cl["members"].append(i)
                if objectives[i] < cl["objective"]:
                    cl["objective"] = objectives[i]
                    cl["coeffs"] = c
                break
        else:
            clusters.append({"coeffs": c, "objective": objectives[i], "members": [i]})
    return sorted(clusters, key=lambda cl: cl["objective"])


def uniqueness_probe(prob: LpProblem, trials: int, seed: int,
                     opts: DescentOptions = DescentOptions(), radius=1e-4) -> ProbeReport:
    """Descend from ``trials`` seeded starts and group the limits.

    Limits further apart than ``radius`` in coefficient norm form separate
    clusters.  This records evidence about uniqueness for p < 1; it asserts
    nothing.
    """
    if not (0 < prob.p < 1):
        raise ValueError("the uniqueness probe is meant for 0 < p < 1")
    starts = default_starts(prob, trials, seed)
    results = [_run_start(prob, i, c, opts) for i, c in enumerate(starts)]
    coeffs = [r.coeffs for r in results]
    objs = [r.objective for r in results]
    arr = np.array(coeffs)
    dispersion = 0.0
    if len(arr) > 1:
        dispersion = float(np.linalg.norm(arr[:, None] - arr[None, :], axis=-1).max())
    return ProbeReport(prob.p, trials, dispersion, _cluster(coeffs, objs, radius))

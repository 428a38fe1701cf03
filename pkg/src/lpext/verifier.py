"""Machine-checkable residuals for every relation the solvers rely on.

``run_ledger`` executes a fixed list of checks on one instance and returns a
:class:`CheckLedger`.  A check passes iff its residual is finite and at most
its tolerance; checks whose inputs could not be produced are ``skipped``,
never passed.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ConfigurationError, LpExtError
from .function_space import HoloFunction, gram, restrict, vandermonde
from .geometry import (DomainSpec, QuadratureRule, SubmanifoldKind, domain_volume,
                       exact_moment)
from .irls import (IrlsSchedule, descent_check, difference_orthogonality,
                   fixed_point_residual, irls_solve, norm_transfer_residual,
                   reweighted_l2_minimizer)
from .lp_solver import (DescentOptions, LpProblem, default_starts, objective_and_gradient,
                        solve_lp_direct, variational_residual_p)

__all__ = [
    "SHIPPED_CHECKS",
    "DEFAULT_TOLERANCES",
    "CheckResult",
    "CheckLedger",
    "quadrature_exactness",
    "gram_consistency",
    "gradient_check",
    "majorization_residual",
    "bernoulli_residual",
    "check_holder",
    "check_restriction_identity",
    "check_feasibility",
    "run_ledger",
]

# name -> (relation checked, default tolerance), in execution order
SHIPPED_CHECKS = {
    "quadrature_exactness": ("moments of z^a conj(z)^b match closed forms", 1e-10),
    "gram_consistency": ("quadrature |g|^2 energy equals c^H G c", 1e-12),
    "gradient_check": ("analytic gradient matches central differences", 1e-6),
    "majorization": ("|F+th|^p <= |F|^p + p|F|^(p-2) Re(t conj(F) h) + (p/2)|t|^2 |F|^(p-2) |h|^2",
                     1e-12),
    "bernoulli_inequality": ("(1+x)^a <= 1 + a x on [-1, 100] for 0<a<1", 1e-12),
    "direct_solve": ("direct minimiser found; starts agree when p >= 1", 1e-6),
    "irls_solve": ("IRLS limit equals the direct minimiser", 1e-4),
    "lp_variational": ("sum |F|^(p-2) conj(F) h e^-phi = 0 for h vanishing on S", 1e-5),
    "l2_orthogonality": ("reweighted L2 minimiser is orthogonal to h vanishing on S", 1e-10),
    "difference_orthogonality": ("<F_p - F_2, F_p - F_2> = 0 in the reweighted product", 1e-6),
    "fixed_point": ("F_p equals the reweighted L2 minimiser built from F_p", 1e-4),
    "norm_transfer": ("int |F|^2 e^-phi~ = int |F|^p e^-phi", 1e-4),
    "holder": ("int|g|^p e^-phi <= (int|g|^2 e^-phi~)^(p/2) (int|F|^p e^-phi)^(1-p/2)", 1e-8),
    "holder_equality": ("equality in the Holder chain for g = F_p", 1e-10),
    "restriction_identity": ("int_S |f|^2 e^-phi~ = int_S |f|^p e^-phi", 1e-3),
    "feasibility": ("solver outputs restrict to the data on S", 1e-10),
    "irls_descent": ("IRLS never increases the smoothed energy at fixed eps", 0.0),
}

DEFAULT_TOLERANCES = {k: v[1] for k, v in SHIPPED_CHECKS.items()}

N_HOLDER_SAMPLES = 20
N_GRADIENT_POINTS = 20
N_MAJORIZATION = 50


@dataclass
class CheckResult:
    name: str
    relation: str
    residual: float
    tolerance: float
    status: str  # "pass" | "fail" | "skipped"
    detail: str = ""


@dataclass
class CheckLedger:
    fingerprint: dict
    checks: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c.status != "fail" for c in self.checks)

    @property
    def failures(self):
        return [c for c in self.checks if c.status == "fail"]

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self):
        return {"fingerprint": self.fingerprint, "checks": [asdict(c) for c in self.checks]}

    @classmethod
    def from_dict(cls, d):
        return cls(dict(d["fingerprint"]), [CheckResult(**c) for c in d["checks"]])

    def summary(self):
        lines = []
        for c in self.checks:
            res = "-" if c.status == "skipped" else f"{c.residual:.3e}"
            lines.append(f"{c.status.upper():8s} {c.name:26s} residual={res:>10s} "
                         f"tol={c.tolerance:.1e}  {c.detail}".rstrip())
        return "\n".join(lines)


def _rng(seed, stream):
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 1, stream]))


def _random_coeffs(rng, size):
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2)


def quadrature_exactness(domain: DomainSpec, quad: QuadratureRule) -> float:
    """Worst relative moment error over z^a conj(z)^b with |a| + |b| <= degree.

    Vanishing moments are measured against vol * radius^(|a|+|b|).
    """
    n, d = domain.n, quad.degree
    z = quad.nodes
    idx = [a for a in np.ndindex(*(d + 1,) * n) if sum(a) <= d]
    za = vandermonde(idx, z)
    zb = za.conj()
    vol = domain_volume(domain)
    R = domain.radius
    pos = {a: i for i, a in enumerate(idx)}
    worst = 0.0
    wz = quad.weights[:, None] * za
    for a in idx:
        budget = d - sum(a)
        bs = [b for b in idx if sum(b) <= budget]
        vals = wz[:, pos[a]] @ zb[:, [pos[b] for b in bs]]
        for b, v in zip(bs, vals):
            exact = exact_moment(domain, a, b)
            scale = abs(exact) if exact else vol * R ** (sum(a) + sum(b))
            worst = max(worst, abs(v - exact) / scale)
    return worst


def gram_consistency(prob: LpProblem, rng, samples=20) -> float:
    """Relative gap between sum w |g|^2 e^-phi and c^H G c over random g."""
    G = gram(prob.basis, prob.base_density, prob.quad, V=prob.V)
    worst = 0.0
    for _ in range(samples):
        c = _random_coeffs(rng, len(prob.basis))
        direct = float(np.dot(prob.mu, np.abs(prob.V @ c) ** 2))
        quad_form = G.quadratic(c)
        worst = max(worst, abs(direct - quad_form) / max(abs(quad_form), 1e-300))
    return worst


def gradient_check(prob: LpProblem, rng, points=20, eps_values=(1e-2, 1e-6), step=1e-5):
    """Worst relative error of the free gradient against central differences."""
    fs = prob.feasible
    if fs.free_dim == 0:
        return 0.0
    worst = 0.0
    for eps in eps_values:
        for _ in range(points):
            c = fs.point(_random_coeffs(rng, fs.free_dim))
            _, grad = objective_and_gradient(c, prob, eps)
            g_free = fs.null.conj().T @ grad
            fd = np.empty(fs.free_dim, dtype=complex)
            for j in range(fs.free_dim):
                e = fs.null[:, j]
                parts = []
                for direction in (e, 1j * e):
                    jp, _ = objective_and_gradient(c + step * direction, prob, eps)
                    jm, _ = objective_and_gradient(c - step * direction, prob, eps)
                    parts.append((jp - jm) / (2 * step))
                fd[j] = parts[0] + 1j * parts[1]
            worst = max(worst, np.linalg.norm(fd - g_free) / max(np.linalg.norm(g_free), 1e-300))
    return float(worst)


def majorization_residual(F_vals, h_vals, t, p) -> float:
    """Worst violation of the pointwise quadratic majorant of |F + t h|^p.

    Measured relative to max(1, size of the majorant's terms) so roundoff in
    large terms near small |F| does not count as a violation.
    """
    F_vals = np.asarray(F_vals)
    h_vals = np.asarray(h_vals)
    a2 = np.abs(F_vals) ** 2
    k = a2 ** (p / 2 - 1)
    lhs = np.abs(F_vals + t * h_vals) ** p
    lin = p * k * np.real(t * np.conj(F_vals) * h_vals)
    quad = 0.5 * p * abs(t) ** 2 * k * np.abs(h_vals) ** 2
    rhs = a2 ** (p / 2) + lin + quad
    scale = np.maximum(1.0, a2 ** (p / 2) + np.abs(lin) + quad)
    return float(np.max((lhs - rhs) / scale, initial=0.0))


def _majorization(prob: LpProblem, rng, trials=N_MAJORIZATION):
    worst = 0.0
    for _ in range(trials):
        F = prob.V @ _random_coeffs(rng, len(prob.basis))
        h = prob.V @ _random_coeffs(rng, len(prob.basis))
        t = complex(*(rng.standard_normal(2) * 2))
        worst = max(worst, majorization_residual(F, h, t, prob.p))
    return worst


def bernoulli_residual(alphas=np.arange(1, 10) / 10, points=10_000) -> float:
    x = np.linspace(-1.0, 100.0, points)
    return float(max(np.max((1 + x) ** a - 1 - a * x) for a in alphas))


def _tilde_weight(F_vals, p, eps):
    # |F|^(p-2) with |F|^2 floored at eps: exact wherever |F|^2 >= eps
    return np.maximum(np.abs(F_vals) ** 2, eps) ** ((p - 2) / 2)


def check_holder(F: HoloFunction, g: HoloFunction, prob: LpProblem, eps=None, signed=False):
    """Holder chain residual relative to its own scale.

    max(0, int|g|^p e^-phi - (int|g|^2 e^-phi~)^(p/2) (int|F|^p e^-phi)^(1-p/2)),
    divided by max of the two sides.  ``signed=True`` returns |lhs - rhs|
    instead (the equality case g = F).
    """
    eps = prob.eps if eps is None else eps
    p = prob.p
    Fv = prob.V @ F.coeffs
    gv = prob.V @ g.coeffs
    mu = prob.mu
    lhs = float(np.dot(mu, np.abs(gv) ** p))
    l2 = float(np.dot(mu * _tilde_weight(Fv, p, eps), np.abs(gv) ** 2))
    mp = float(np.dot(mu, np.abs(Fv) ** p))
    rhs = l2 ** (p / 2) * mp ** (1 - p / 2)
    scale = max(lhs, rhs)
    if scale == 0:
        return 0.0
    gap = abs(lhs - rhs) if signed else max(0.0, lhs - rhs)
    return gap / scale


def check_restriction_identity(f_vals, F_vals, p, base_density, weights, eps=1e-8) -> float:
    """|sum_S w |F|^(p-2) |f|^2 e^-phi - sum_S w |f|^p e^-phi| relative to the latter.

    The data f and the candidate F are given by their values at the S nodes;
    the theorem's geometric factor on S is taken to be 1.
    """
    f_vals = np.asarray(f_vals)
    mu = np.asarray(weights) * np.asarray(base_density)
    lhs = float(np.dot(mu * _tilde_weight(F_vals, p, eps), np.abs(f_vals) ** 2))
    rhs = float(np.dot(mu, np.abs(f_vals) ** p))
    if rhs == 0:
        return abs(lhs)
    return abs(lhs - rhs) / rhs


def check_feasibility(F: HoloFunction, sub, data) -> float:
    """Largest deviation of F|_S from the data (coefficients or point values)."""
    r = restrict(F, sub)
    if sub.kind is SubmanifoldKind.POINT_SET:
        return float(np.max(np.abs(r - np.asarray(data)), initial=0.0))
    pos = {a: i for i, a in enumerate(r.basis)}
    dev = 0.0
    for a, v in zip(data.basis, data.coeffs):
        dev = max(dev, abs((r.coeffs[pos[a]] if a in pos else 0) - v))
    for a, v in zip(r.basis, r.coeffs):
        if a not in set(data.basis):
            dev = max(dev, abs(v))
    return float(dev)


class _Ledger:
    def __init__(self, ledger, tolerances):
        self.ledger = ledger
        self.tol = tolerances

    def record(self, name, residual, detail=""):
        tol = self.tol[name]
        ok = residual is not None and math.isfinite(residual) and residual <= tol
        self.ledger.checks.append(CheckResult(name, SHIPPED_CHECKS[name][0],
                                              float(residual), tol,
                                              "pass" if ok else "fail", detail))

    def skip(self, name, why):
        self.ledger.checks.append(CheckResult(name, SHIPPED_CHECKS[name][0], float("nan"),
                                              self.tol[name], "skipped", why))

    def fail(self, name, why):
        self.ledger.checks.append(CheckResult(name, SHIPPED_CHECKS[name][0], float("inf"),
                                              self.tol[name], "fail", why))


def resolve_tolerances(overrides):
    tol = dict(DEFAULT_TOLERANCES)
    overrides = dict(overrides or {})
    if "default" in overrides:
        default = overrides.pop("default")
        tol = {k: default for k in tol}
    unknown = set(overrides) - set(tol)
    if unknown:
        raise ConfigurationError(f"unknown tolerance keys: {sorted(unknown)}")
    tol.update(overrides)
    return tol


def run_ledger(instance, direct_solver=None, irls_solver=None, keep=None) -> CheckLedger:
    """Run every shipped check on a built instance, in the shipped order.

    ``direct_solver(prob, starts)`` and ``irls_solver(prob, reference)`` can be
    swapped out (tests inject broken solvers to make sure failures surface).
    If ``keep`` is a dict it receives the solver outputs.
    """
    cfg = instance.config
    prob = instance.problem
    tol = resolve_tolerances(cfg.tolerances)
    fingerprint = {"hash": cfg.fingerprint(), "name": cfg.name,
                   "domain": f"{cfg.domain.kind.value}(n={cfg.domain.n}, r={cfg.domain.radius})",
                   "submanifold": cfg.submanifold.kind.value, "codim": cfg.submanifold.codim,
                   "p": cfg.p, "degree": cfg.degree, "order": cfg.order, "eps": cfg.eps,
                   "seed": cfg.seed, "tolerances": dict(sorted(tol.items()))}
    ledger = CheckLedger(fingerprint)
    L = _Ledger(ledger, tol)
    seed = cfg.seed
    direct_solver = direct_solver or (
        lambda pr, st: solve_lp_direct(pr, st, DescentOptions(max_iter=cfg.max_iter)))
    schedule = IrlsSchedule(eps0=cfg.irls_eps0, factor=cfg.irls_factor,
                            max_iter=cfg.irls_max_iter)
    irls_solver = irls_solver or (
        lambda pr, ref: irls_solve(pr, schedule=schedule, reference=ref, cross_check=False))
    keep = {} if keep is None else keep

    L.record("quadrature_exactness", quadrature_exactness(cfg.domain, instance.quad))
    L.record("gram_consistency", gram_consistency(prob, _rng(seed, 1)))
    if prob.p < 2:
        L.record("gradient_check", gradient_check(prob, _rng(seed, 2), N_GRADIENT_POINTS))
    else:
        L.record("gradient_check", gradient_check(prob, _rng(seed, 2), N_GRADIENT_POINTS, (0.0,)))
    L.record("majorization", _majorization(prob, _rng(seed, 3)))
    L.record("bernoulli_inequality", bernoulli_residual())

    F_d = F_i = trace = None
    try:
        F_d, cert = direct_solver(prob, default_starts(prob, cfg.starts, seed))
        keep["direct"], keep["direct_certificate"] = F_d, cert
        disp = cert.dispersion if prob.p >= 1 else 0.0
        L.record("direct_solve", disp,
                 f"objective={cert.objective:.17g} dispersion={cert.dispersion:.3e}")
    except LpExtError as exc:
        L.fail("direct_solve", f"{type(exc).__name__}: {exc}")

    try:
        F_i, icert, trace = irls_solver(prob, F_d)
        keep["irls"], keep["irls_certificate"], keep["irls_trace"] = F_i, icert, trace
        if F_d is None:
            L.skip("irls_solve", "direct solver failed")
        else:
            rel = float(np.linalg.norm(F_i.coeffs - F_d.coeffs)
                        / (1 + np.linalg.norm(F_d.coeffs)))
            L.record("irls_solve", rel, f"iterations={len(trace)}")
    except LpExtError as exc:
        L.fail("irls_solve", f"{type(exc).__name__}: {exc}")

    if F_d is None:
        for name in ("lp_variational", "l2_orthogonality"):
            L.skip(name, "direct solver failed")
    else:
        L.record("lp_variational", variational_residual_p(F_d, prob))
        F2, rep = reweighted_l2_minimizer(F_d, prob)
        L.record("l2_orthogonality", rep.orthogonality)

    if F_d is None or F_i is None:
        L.skip("difference_orthogonality", "needs both solver outputs")
    else:
        L.record("difference_orthogonality", difference_orthogonality(F_d, F_i, prob))

    if F_d is None:
        for name in ("fixed_point", "norm_transfer", "holder", "holder_equality",
                     "restriction_identity"):
            L.skip(name, "direct solver failed")
    else:
        L.record("fixed_point", fixed_point_residual(F_d, prob))
        L.record("norm_transfer", norm_transfer_residual(F_d, prob))
        rng = _rng(seed, 4)
        worst = max(check_holder(F_d, prob.function(_random_coeffs(rng, len(prob.basis))), prob)
                    for _ in range(N_HOLDER_SAMPLES))
        L.record("holder", worst, f"{N_HOLDER_SAMPLES} random g")
        L.record("holder_equality", check_holder(F_d, F_d, prob, signed=True))
        sq = instance.sub_quad
        L.record("restriction_identity", check_restriction_identity(
            instance.data_on_s(), F_d(sq.nodes), prob.p,
            np.exp(-cfg.weight.phi(sq.nodes)), sq.weights, prob.eps))

    outputs = [F for F in (F_d, F_i) if F is not None]
    if outputs:
        L.record("feasibility", max(check_feasibility(F, cfg.submanifold, instance.feasible.data)
                                    for F in outputs))
    else:
        L.skip("feasibility", "no solver output")

    if trace is None:
        L.skip("irls_descent", "IRLS failed")
    else:
        L.record("irls_descent", 0.0 if descent_check(trace) else 1.0)
    return ledger

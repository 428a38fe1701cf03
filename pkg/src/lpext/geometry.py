"""Model domains, submanifolds, quadratic psh weights and quadrature rules.

All integrals over a domain in C^n are turned into finite sums

    int_Omega u dV  ~  sum_q weights[q] * u(nodes[q])

where ``nodes`` is an ``(N, n)`` complex array and ``dV`` is Lebesgue
measure on R^{2n}.  Rules are built in polar form: every coordinate is
written ``z_j = r_j exp(i theta_j)``, the angles get an equispaced
trapezoidal rule and the moduli a Gauss rule.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .errors import ConfigurationError

__all__ = [
    "DomainKind",
    "DomainSpec",
    "SubmanifoldKind",
    "SubmanifoldSpec",
    "WeightSpec",
    "QuadratureRule",
    "build_domain_quadrature",
    "build_submanifold_quadrature",
    "eval_weight",
    "sigma",
    "domain_volume",
    "exact_moment",
]


class DomainKind(enum.Enum):
    DISC = "disc"
    POLYDISC = "polydisc"
    BALL = "ball"


class SubmanifoldKind(enum.Enum):
    COORDINATE_SUBSPACE = "subspace"
    POINT_SET = "points"


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class DomainSpec:
    """Disc (n = 1), polydisc or ball of the given radius, centred at 0."""

    kind: DomainKind
    n: int = 1
    radius: float = 1.0

    def __post_init__(self):
        if not isinstance(self.kind, DomainKind):
            try:
                object.__setattr__(self, "kind", DomainKind(self.kind))
            except ValueError:
                raise ConfigurationError(f"unknown domain kind {self.kind!r}") from None
        if int(self.n) != self.n or self.n < 1:
            raise ConfigurationError(f"domain dimension must be a positive integer, got {self.n}")
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise ConfigurationError(f"domain radius must be positive, got {self.radius}")
        if self.kind is DomainKind.DISC and self.n != 1:
            raise ConfigurationError("a disc domain requires n = 1")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "radius", float(self.radius))

    def contains(self, points, strict=True):
        """Boolean mask of points lying in the (open) domain."""
        z = np.atleast_2d(np.asarray(points, dtype=complex))
        r = self.radius
        if self.kind is DomainKind.BALL:
            m = np.sum(np.abs(z) ** 2, axis=1)
            return m < r * r if strict else m <= r * r
        m = np.max(np.abs(z), axis=1)
        return m < r if strict else m <= r

    def slice(self, dim):
        """The domain cut out on the first ``dim`` coordinates (``dim >= 1``)."""
        if self.kind is DomainKind.BALL:
            return DomainSpec(DomainKind.BALL, dim, self.radius)
        if dim == 1:
            return DomainSpec(DomainKind.DISC, 1, self.radius)
        return DomainSpec(DomainKind.POLYDISC, dim, self.radius)


@dataclass(frozen=True)
class SubmanifoldSpec:
    """Either ``{z_{n-k+1} = ... = z_n = 0}`` or a finite set of points.

    For a point set ``points`` is an ``(m, n)`` complex array; the values
    prescribed at the points live with the extension data, not here.
    """

    kind: SubmanifoldKind
    codim: int
    points: np.ndarray = field(default=None, compare=False)

    def __post_init__(self):
        if not isinstance(self.kind, SubmanifoldKind):
            try:
                object.__setattr__(self, "kind", SubmanifoldKind(self.kind))
            except ValueError:
                raise ConfigurationError(f"unknown submanifold kind {self.kind!r}") from None
        if self.kind is SubmanifoldKind.POINT_SET:
            if self.points is None or len(self.points) == 0:
                raise ConfigurationError("a point set needs at least one point")
            pts = np.asarray(self.points, dtype=complex)
            if pts.ndim == 1:
                pts = pts[:, None]
            object.__setattr__(self, "points", _frozen(pts, complex))
            object.__setattr__(self, "codim", pts.shape[1])
        if int(self.codim) != self.codim or self.codim < 1:
            raise ConfigurationError(f"codimension must be a positive integer, got {self.codim}")

    @classmethod
    def subspace(cls, codim):
        return cls(SubmanifoldKind.COORDINATE_SUBSPACE, codim)

    @classmethod
    def point_set(cls, points):
        return cls(SubmanifoldKind.POINT_SET, 0, points)

    def __eq__(self, other):
        if not isinstance(other, SubmanifoldSpec):
            return NotImplemented
        if self.kind is not other.kind or self.codim != other.codim:
            return False
        if self.kind is SubmanifoldKind.POINT_SET:
            return np.array_equal(self.points, other.points)
        return True

    __hash__ = None

    def validate(self, domain: DomainSpec):
        if self.codim > domain.n:
            raise ConfigurationError(f"codimension {self.codim} exceeds dimension {domain.n}")
        if self.kind is SubmanifoldKind.POINT_SET:
            pts = self.points
            if pts.shape[1] != domain.n:
                raise ConfigurationError(
                    f"points have {pts.shape[1]} coordinates, domain has {domain.n}")
            if not np.all(domain.contains(pts)):
                raise ConfigurationError("all points must lie strictly inside the domain")
            if len(pts) > 1:
                d = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
                d[np.diag_indices(len(pts))] = np.inf
                if d.min() < 1e-6 * domain.radius:
                    raise ConfigurationError("points closer than 1e-6 * radius")


@dataclass(frozen=True)
class WeightSpec:
    """phi(z) = alpha |z|^2 + sum_j beta_j |z_j|^2 + c.

    Nonnegative coefficients keep phi smooth and plurisubharmonic.
    """

    alpha: float = 0.0
    beta: tuple = ()
    c: float = 0.0

    def __post_init__(self):
        beta = tuple(float(b) for b in self.beta)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "c", float(self.c))
        if self.alpha < 0 or any(b < 0 for b in beta):
            raise ConfigurationError("weight coefficients alpha, beta must be >= 0")
        if not all(math.isfinite(v) for v in (self.alpha, self.c, *beta)):
            raise ConfigurationError("weight coefficients must be finite")

    def phi(self, points):
        z = np.atleast_2d(np.asarray(points, dtype=complex))
        a2 = np.abs(z) ** 2
        val = self.alpha * a2.sum(axis=1) + self.c
        if self.beta:
            if len(self.beta) != z.shape[1]:
                raise ConfigurationError(
                    f"beta has {len(self.beta)} entries for points in C^{z.shape[1]}")
            val = val + a2 @ np.asarray(self.beta)
        return val


def eval_weight(w: WeightSpec, points) -> np.ndarray:
    """exp(-phi) at each point."""
    return np.exp(-w.phi(points))


def sigma(k: int) -> float:
    """Volume of the unit ball in C^k, pi^k / k!."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return math.pi ** k / math.factorial(k)


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    degree: int

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=complex)
        if nodes.ndim == 1:
            nodes = nodes[:, None]
        object.__setattr__(self, "nodes", _frozen(nodes, complex))
        object.__setattr__(self, "weights", _frozen(self.weights, float))

    @property
    def size(self):
        return len(self.weights)

    def integrate(self, values):
        return np.dot(self.weights, values)


def _angles(order):
    # 2*(2*order)+1 equispaced angles: exact for e^{i k theta}, |k| <= 2*order
    m = 4 * order + 1
    return 2 * np.pi * np.arange(m) / m, np.full(m, 2 * np.pi / m)


def _disc_factor(order, radius):
    """Polar rule on one disc: Gauss-Legendre in r (Jacobian r) x trapezoid."""
    x, w = special.roots_legendre(order + 1)
    r = 0.5 * radius * (x + 1)
    wr = 0.5 * radius * w * r
    th, wt = _angles(order)
    z = (r[:, None] * np.exp(1j * th)[None, :]).ravel()
    wz = (wr[:, None] * wt[None, :]).ravel()
    return z, wz


def _tensor(factors):
    zs = [f[0] for f in factors]
    ws = [f[1] for f in factors]
    grids = np.meshgrid(*zs, indexing="ij")
    wgrid = np.ones(1)
    for w in ws:
        wgrid = np.multiply.outer(wgrid, w)
    nodes = np.stack([g.ravel() for g in grids], axis=1)
    return nodes, wgrid.ravel()


def _simplex_rule(n, order):
    """Collapsed Gauss-Jacobi rule on {s >= 0, sum s <= 1} in R^n.

    s_1 = u_1, s_j = (1-u_1)...(1-u_{j-1}) u_j; the Jacobian factor
    (1-u_j)^{n-j} is absorbed into a Gauss-Jacobi weight.
    """
    us, ws = [], []
    for j in range(1, n + 1):
        a = n - j
        x, w = special.roots_jacobi(order + 1, a, 0)
        us.append(0.5 * (x + 1))
        ws.append(w * 0.5 ** (a + 1))
    grids = np.meshgrid(*us, indexing="ij")
    wgrid = np.ones(1)
    for w in ws:
        wgrid = np.multiply.outer(wgrid, w)
    u = np.stack([g.ravel() for g in grids], axis=1)
    s = np.empty_like(u)
    rest = np.ones(len(u))
    for j in range(n):
        s[:, j] = rest * u[:, j]
        rest = rest * (1 - u[:, j])
    return s, wgrid.ravel()


def _ball_rule(n, order, radius):
    # dV = prod_j r_j dr_j dtheta_j = 2^{-n} prod_j ds_j dtheta_j with s_j = r_j^2
    s, ws = _simplex_rule(n, order)
    s = s * radius ** 2
    ws = ws * radius ** (2 * n) / 2 ** n
    th, wt = _angles(order)
    ang = [(np.exp(1j * th), wt)] * n
    phase, wphase = _tensor(ang)
    nodes = (np.sqrt(s)[:, None, :] * phase[None, :, :]).reshape(-1, n)
    weights = np.multiply.outer(ws, wphase).ravel()
    return nodes, weights


def build_domain_quadrature(domain: DomainSpec, order: int) -> QuadratureRule:
    """Tensor-product polar rule exact for z^a conj(z)^b, |a| + |b| <= 2*order."""
    if int(order) != order or order < 1:
        raise ConfigurationError(f"quadrature order must be a positive integer, got {order}")
    order = int(order)
    if domain.kind is DomainKind.BALL:
        nodes, weights = _ball_rule(domain.n, order, domain.radius)
    elif domain.kind in (DomainKind.DISC, DomainKind.POLYDISC):
        nodes, weights = _tensor([_disc_factor(order, domain.radius)] * domain.n)
    else:  # pragma: no cover - enum is closed
        raise ConfigurationError(f"unsupported domain {domain}")
    return QuadratureRule(nodes, weights, 2 * order)


def build_submanifold_quadrature(domain: DomainSpec, sub: SubmanifoldSpec,
                                 order: int) -> QuadratureRule:
    """Rule on S, with nodes embedded back in C^n.

    A coordinate subspace of codimension k is the model domain of dimension
    n - k; for k = n it is the origin with unit mass.  A point set carries
    the counting measure (degree -1: not a volume rule).
    """
    sub.validate(domain)
    n = domain.n
    if sub.kind is SubmanifoldKind.POINT_SET:
        return QuadratureRule(sub.points, np.ones(len(sub.points)), -1)
    dim = n - sub.codim
    if dim == 0:
        return QuadratureRule(np.zeros((1, n), dtype=complex), np.ones(1), 2 * int(order))
    low = build_domain_quadrature(domain.slice(dim), order)
    nodes = np.zeros((low.size, n), dtype=complex)
    nodes[:, :dim] = low.nodes
    return QuadratureRule(nodes, low.weights, low.degree)


def domain_volume(domain: DomainSpec) -> float:
    r2 = domain.radius ** 2
    if domain.kind is DomainKind.BALL:
        return sigma(domain.n) * r2 ** domain.n
    return (math.pi * r2) ** domain.n


def exact_moment(domain: DomainSpec, a, b) -> float:
    """Closed form of int_Omega z^a conj(z)^b dV."""
    a = tuple(int(x) for x in a)
    b = tuple(int(x) for x in b)
    if a != b:
        return 0.0
    r2 = domain.radius ** 2
    if domain.kind is DomainKind.BALL:
        n = domain.n
        num = math.prod(math.factorial(x) for x in a)
        return math.pi ** n * num / math.factorial(sum(a) + n) * r2 ** (sum(a) + n)
    return math.prod(math.pi * r2 ** (x + 1) / (x + 1) for x in a)

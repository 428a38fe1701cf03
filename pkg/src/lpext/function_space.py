"""Truncated monomial model of the weighted Bergman spaces.

A candidate extension is a polynomial ``g(z) = sum_a c_a z^a`` over all
multi-indices with ``|a| <= D``, stored as a coefficient vector aligned to
a graded-lex basis.  The extension constraint ``g|_S = f`` is affine in the
coefficients, so the feasible set is parametrised as ``c = c0 + Z y`` with
``Z`` an orthonormal basis of the directions vanishing on S.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import DegenerateRuleError, NoExtensionError
from .geometry import QuadratureRule, SubmanifoldKind, SubmanifoldSpec

__all__ = [
    "graded_lex",
    "build_basis",
    "BasisSplit",
    "HoloFunction",
    "GramOperator",
    "FeasibleSet",
    "vandermonde",
    "evaluate",
    "restrict",
    "gram",
    "p_norm_p",
    "feasible_set",
]


def graded_lex(n, D):
    """All multi-indices of length n and total degree <= D, graded-lex order."""
    idx = [a for a in itertools.product(range(D + 1), repeat=n) if sum(a) <= D]
    # total degree first, then z_1 before z_2 before ... within a degree
    return tuple(sorted(idx, key=lambda a: (sum(a), tuple(-x for x in a))))


@dataclass(frozen=True)
class BasisSplit:
    """Which basis monomials are fixed by the data on S and which are free.

    For a point set there is no index split; ``constraint_matrix`` holds the
    evaluation functionals (one row per point) instead.
    """

    constrained: tuple
    free: tuple
    constraint_matrix: np.ndarray | None = None


def build_basis(n: int, D: int, sub: SubmanifoldSpec):
    if D < 0:
        raise ValueError("degree cap D must be >= 0")
    basis = graded_lex(n, D)
    if sub.kind is SubmanifoldKind.POINT_SET:
        A = vandermonde(basis, sub.points)
        A.setflags(write=False)
        return basis, BasisSplit((), (), A)
    k = sub.codim
    constrained = tuple(i for i, a in enumerate(basis) if not any(a[n - k:]))
    free = tuple(i for i, a in enumerate(basis) if any(a[n - k:]))
    return basis, BasisSplit(constrained, free)


def vandermonde(basis, points) -> np.ndarray:
    """Matrix ``V[q, i] = z_q ** basis[i]``, built from per-variable power tables."""
    z = np.asarray(points, dtype=complex)
    if z.ndim == 1:
        z = z[:, None]
    npts, n = z.shape
    basis = list(basis)
    if n == 0 or not basis:
        return np.ones((npts, len(basis)), dtype=complex)
    D = max(sum(a) for a in basis)
    V = np.ones((npts, len(basis)), dtype=complex)
    for j in range(n):
        powers = np.ones((npts, D + 1), dtype=complex)
        for m in range(1, D + 1):
            powers[:, m] = powers[:, m - 1] * z[:, j]
        V *= powers[:, [a[j] for a in basis]]
    return V


@dataclass(frozen=True)
class HoloFunction:
    """Polynomial in ``n`` complex variables on a fixed monomial basis."""

    basis: tuple
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.shape != (len(self.basis),):
            raise ValueError(f"{len(c)} coefficients for a basis of size {len(self.basis)}")
        c.setflags(write=False)
        object.__setattr__(self, "basis", tuple(tuple(a) for a in self.basis))
        object.__setattr__(self, "coeffs", c)

    @property
    def n(self):
        return len(self.basis[0]) if self.basis else 0

    def __call__(self, points):
        return evaluate(self, points)

    def __eq__(self, other):
        if not isinstance(other, HoloFunction):
            return NotImplemented
        return self.basis == other.basis and np.array_equal(self.coeffs, other.coeffs)

    __hash__ = None

    def with_coeffs(self, coeffs):
        return HoloFunction(self.basis, coeffs)

    @classmethod
    def from_terms(cls, basis, terms):
        """Build from ``{multi_index: coefficient}``; missing indices are zero."""
        pos = {a: i for i, a in enumerate(basis)}
        c = np.zeros(len(basis), dtype=complex)
        for a, v in terms.items():
            a = tuple(a) if not isinstance(a, int) else (a,)
            if a not in pos:
                raise NoExtensionError(f"monomial {a} is outside the truncated basis")
            c[pos[a]] = v
        return cls(basis, c)


def evaluate(g: HoloFunction, points) -> np.ndarray:
    z = np.asarray(points, dtype=complex)
    if z.ndim == 1:
        z = z[:, None] if g.n == 1 else z[None, :]
    return vandermonde(g.basis, z) @ g.coeffs


def restrict(g: HoloFunction, sub: SubmanifoldSpec):
    """g|_S: a polynomial in the first n - k variables, or values at the points."""
    if sub.kind is SubmanifoldKind.POINT_SET:
        return evaluate(g, sub.points)
    n, k = g.n, sub.codim
    keep = [i for i, a in enumerate(g.basis) if not any(a[n - k:])]
    return HoloFunction([g.basis[i][: n - k] for i in keep], g.coeffs[keep])


@dataclass(frozen=True)
class GramOperator:
    """``matrix[a, b] = sum_q w_q density_q conj(m_a(z_q)) m_b(z_q)``.

    With this convention ``c^H G c`` is the weighted squared norm of the
    polynomial with coefficients ``c``.
    """

    matrix: np.ndarray

    def quadratic(self, c):
        c = np.asarray(c)
        return float(np.real(np.vdot(c, self.matrix @ c)))

    def inner(self, c, d):
        """<c, d> = sum w density conj(g_c) g_d."""
        return np.vdot(c, self.matrix @ d)

    def factor(self):
        try:
            return sla.cho_factor(self.matrix, lower=True)
        except np.linalg.LinAlgError:
            raise DegenerateRuleError(
                "Gram matrix is not positive definite: node set does not determine "
                "polynomials of this degree") from None


def gram(basis, density, quad: QuadratureRule, V=None) -> GramOperator:
    if V is None:
        V = vandermonde(basis, quad.nodes)
    mu = quad.weights * np.broadcast_to(np.asarray(density, dtype=float), quad.weights.shape)
    G = V.conj().T @ (mu[:, None] * V)
    G = 0.5 * (G + G.conj().T)
    return GramOperator(G)


def p_norm_p(g: HoloFunction, p: float, density, quad: QuadratureRule) -> float:
    """Unrooted weighted p-energy, sum_q w_q |g(z_q)|^p density_q."""
    if p <= 0:
        raise ValueError("p must be positive")
    vals = np.abs(evaluate(g, quad.nodes)) ** p
    return float(np.dot(quad.weights * np.broadcast_to(density, quad.weights.shape), vals))


@dataclass(frozen=True)
class FeasibleSet:
    """Affine set ``{c0 + Z y}`` of coefficient vectors with ``g|_S = f``.

    ``Z`` has orthonormal columns; for a coordinate subspace they are unit
    vectors on the free indices and ``c0`` is exactly the data, so
    feasibility holds bit-for-bit.
    """

    basis: tuple
    split: BasisSplit
    particular: np.ndarray
    null: np.ndarray
    kind: SubmanifoldKind
    data: object

    @property
    def free_dim(self):
        return self.null.shape[1]

    def point(self, y):
        if self.free_dim == 0:
            return self.particular.copy()
        return self.particular + self.null @ y

    def coords(self, c):
        return self.null.conj().T @ (np.asarray(c) - self.particular)

    def free_functions(self):
        """Columns of Z as polynomials: a basis of the admissible variations h."""
        return [HoloFunction(self.basis, self.null[:, j]) for j in range(self.free_dim)]


def _subspace_particular(basis, n, k, f: HoloFunction):
    pos = {a: i for i, a in enumerate(basis)}
    c0 = np.zeros(len(basis), dtype=complex)
    for a, v in zip(f.basis, f.coeffs):
        full = tuple(a) + (0,) * k
        if full not in pos:
            if v != 0:
                raise NoExtensionError(
                    f"data monomial {a} has degree above the truncation cap")
            continue
        c0[pos[full]] = v
    return c0


def constraint_nullspace(A, b, rtol=1e-12):
    """Minimal-norm solution of ``A c = b`` and an orthonormal basis of ker A.

    Uses a column-pivoted QR of ``A^H``; raises NoExtensionError when the
    system is inconsistent.
    """
    A = np.asarray(A, dtype=complex)
    b = np.asarray(b, dtype=complex)
    m, N = A.shape
    Q, R, P = sla.qr(A.conj().T, pivoting=True, mode="full")
    diag = np.abs(np.diag(R))
    r = int(np.sum(diag > rtol * max(diag.max(initial=0.0), 1e-300))) if diag.size else 0
    # A[P] = R^H Q^H, so the first r pivoted rows determine c0 = Q[:, :r] u
    if r:
        u = sla.solve_triangular(R[:r, :r].conj().T, b[P][:r], lower=True)
        c0 = Q[:, :r] @ u
    else:
        c0 = np.zeros(N, dtype=complex)
    scale = max(np.linalg.norm(b), 1.0)
    if np.linalg.norm(A @ c0 - b) > 1e-9 * scale:
        raise NoExtensionError("point data cannot be interpolated in the truncated space")
    return c0, Q[:, r:].copy()


def feasible_set(basis, split: BasisSplit, sub: SubmanifoldSpec, data, method="index"):
    """Parametrise E(f) = {g : g|_S = f} in the truncated space.

    ``data`` is a polynomial in the first n - k variables (subspace) or the
    list of prescribed values (point set).  ``method="qr"`` forces the
    generic QR nullspace route even for a coordinate subspace.
    """
    n = len(basis[0])
    N = len(basis)
    if sub.kind is SubmanifoldKind.POINT_SET:
        values = np.asarray(data, dtype=complex).ravel()
        if len(values) != len(sub.points):
            raise NoExtensionError(f"{len(values)} values for {len(sub.points)} points")
        c0, Z = constraint_nullspace(split.constraint_matrix, values)
        return FeasibleSet(basis, split, c0, Z, sub.kind, values)
    f = data
    if f.n != n - sub.codim:
        raise NoExtensionError(f"data lives in C^{f.n}, S has dimension {n - sub.codim}")
    c0 = _subspace_particular(basis, n, sub.codim, f)
    if method == "qr":
        A = np.zeros((len(split.constrained), N), dtype=complex)
        A[np.arange(len(split.constrained)), list(split.constrained)] = 1.0
        c0q, Z = constraint_nullspace(A, A @ c0)
        return FeasibleSet(basis, split, c0q, Z, sub.kind, f)
    Z = np.zeros((N, len(split.free)), dtype=complex)
    Z[list(split.free), np.arange(len(split.free))] = 1.0
    return FeasibleSet(basis, split, c0, Z, sub.kind, f)

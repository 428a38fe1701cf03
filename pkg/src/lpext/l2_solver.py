"""Minimal weighted L^2 extension for an arbitrary node density.

Minimises ``c^H G c`` over the affine feasible set ``c = c0 + Z y``.  The
density is any positive array on the quadrature nodes, so the same routine
serves the plain weight ``exp(-phi)`` and every reweighted IRLS step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import DegenerateRuleError
from .function_space import FeasibleSet, GramOperator, HoloFunction, feasible_set, gram
from .geometry import SubmanifoldSpec

__all__ = ["L2Problem", "L2Report", "make_l2_problem", "solve_l2", "orthogonality_residual"]

EIG_THRESHOLD = 1e-12


@dataclass(frozen=True)
class L2Problem:
    feasible: FeasibleSet
    gram: GramOperator


@dataclass(frozen=True)
class L2Report:
    objective: float
    orthogonality: float
    regularized: bool
    method: str


def make_l2_problem(feasible: FeasibleSet, density, quad, V=None) -> L2Problem:
    return L2Problem(feasible, gram(feasible.basis, density, quad, V=V))


def _solve_hermitian(H, rhs):
    """Cholesky solve; thresholded eigen pseudo-solve if H is not numerically PD."""
    try:
        return sla.cho_solve(sla.cho_factor(H, lower=True), rhs), False
    except (np.linalg.LinAlgError, ValueError):
        pass
    lam, U = np.linalg.eigh(H)
    if not np.all(np.isfinite(lam)) or lam[-1] <= 0:
        raise DegenerateRuleError("free-block Gram matrix is singular")
    keep = lam > EIG_THRESHOLD * lam[-1]
    y = U[:, keep] @ ((U[:, keep].conj().T @ rhs) / lam[keep])
    return y, True


def solve_l2(prob: L2Problem, method: str = "normal"):
    """Return the minimal extension and a report.

    ``method="normal"`` solves ``G_FF c_F = -G_FC c_C`` on the free index
    block; ``"nullspace"`` rebuilds the feasible set through the QR nullspace
    of the constraint matrix and solves the reduced system there.  Both give
    the same minimiser up to roundoff.
    """
    fs = prob.feasible
    G = prob.gram.matrix
    if method == "nullspace" and fs.split.constraint_matrix is None:
        k = len(fs.basis[0]) - fs.data.n
        fs = feasible_set(fs.basis, fs.split, SubmanifoldSpec.subspace(k), fs.data, method="qr")
    elif method not in ("normal", "nullspace"):
        raise ValueError(f"unknown method {method!r}")

    regularized = False
    if fs.free_dim == 0:
        c = fs.particular.copy()
    elif fs.split.constraint_matrix is None and method == "normal":
        F = list(fs.split.free)
        c = fs.particular.copy()
        cF, regularized = _solve_hermitian(G[np.ix_(F, F)], -(G[F, :] @ fs.particular))
        c[F] = cF
    else:
        Z = fs.null
        H = Z.conj().T @ G @ Z
        H = 0.5 * (H + H.conj().T)
        y, regularized = _solve_hermitian(H, -(Z.conj().T @ (G @ fs.particular)))
        c = fs.point(y)

    F = HoloFunction(fs.basis, c)
    report = L2Report(prob.gram.quadratic(c), orthogonality_residual(F, prob), regularized, method)
    return F, report


def orthogonality_residual(F: HoloFunction, prob: L2Problem) -> float:
    """max_h |<F, h>| / (|F| |h|) over the free directions h, in the Gram inner product."""
    Z = prob.feasible.null
    if Z.shape[1] == 0:
        return 0.0
    G = prob.gram.matrix
    c = F.coeffs
    GZ = G @ Z
    num = np.abs(c.conj() @ GZ)
    nF = np.sqrt(max(prob.gram.quadratic(c), 0.0))
    nh = np.sqrt(np.maximum(np.real(np.einsum("ij,ij->j", Z.conj(), GZ)), 0.0))
    if nF == 0:
        return 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(nh > 0, num / (nF * nh), 0.0)
    return float(r.max())

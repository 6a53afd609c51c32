"""Small dense linear algebra helpers.

LU factorization is delegated to LAPACK (``getrf`` via :mod:`scipy.linalg`),
which is partial-pivoting LU without refinement.  On top of it this module
adds the singularity policy used throughout the package (a pivot smaller than
``pivot_tol * max|A|`` means singular), a determinant sign, the SR1 update and
finite-difference checks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import warnings

import numpy as np
import scipy.linalg as sla

from .errors import SingularMatrix

PIVOT_TOL = 1e-12


@dataclass(frozen=True)
class LuFactors:
    """Packed LU factorization ``P A = L U``.

    Attributes
    ----------
    packed : ndarray
        LAPACK packed factors (unit lower triangle below the diagonal,
        upper triangle on and above it).
    pivots : ndarray
        LAPACK row interchange vector (0-based).
    parity : int
        Sign of the row permutation, ``+1`` or ``-1``.
    singular : bool
        True when some pivot is below the pivot tolerance.
    """

    packed: np.ndarray
    pivots: np.ndarray
    parity: int
    singular: bool

    @property
    def lower(self) -> np.ndarray:
        n = self.packed.shape[0]
        return np.tril(self.packed, -1) + np.eye(n)

    @property
    def upper(self) -> np.ndarray:
        return np.triu(self.packed)

    @property
    def permutation(self) -> np.ndarray:
        """Row order such that ``A[permutation] == L @ U``."""
        n = self.packed.shape[0]
        perm = np.arange(n)
        for i, p in enumerate(self.pivots):
            perm[[i, p]] = perm[[p, i]]
        return perm

    def solve(self, b: np.ndarray) -> np.ndarray:
        if self.singular:
            raise SingularMatrix("matrix is singular to pivot tolerance")
        return sla.lu_solve((self.packed, self.pivots), b, check_finite=False)


def _as_square(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def lu_factor(A, pivot_tol: float = PIVOT_TOL) -> LuFactors:
    """Factor ``A`` with partial pivoting and flag tiny pivots.

    Parameters
    ----------
    A : array_like
        Square matrix with finite entries.
    pivot_tol : float
        Relative pivot threshold; pivots below ``pivot_tol * max|A|`` mark
        the matrix as singular.
    """
    A = _as_square(A)
    n = A.shape[0]
    if n == 0:
        return LuFactors(np.zeros((0, 0)), np.zeros(0, dtype=int), 1, False)
    scale = float(np.max(np.abs(A)))
    if scale == 0.0:
        return LuFactors(A.copy(), np.arange(n), 1, True)
    with warnings.catch_warnings():
        # exact zero pivots are reported through ``singular`` instead
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        packed, piv = sla.lu_factor(A, check_finite=False)
    parity = -1 if int(np.count_nonzero(piv != np.arange(n))) % 2 else 1
    singular = bool(np.min(np.abs(np.diag(packed))) < pivot_tol * scale)
    return LuFactors(packed, piv, parity, singular)


def lu_solve(A, b, pivot_tol: float = PIVOT_TOL) -> np.ndarray:
    """Solve ``A x = b``.

    Raises
    ------
    SingularMatrix
        If any pivot magnitude is below ``pivot_tol * max|A|``.

    Examples
    --------
    >>> lu_solve([[2.0, 2.0], [2.0, 0.0]], [1.0, -1.0])
    array([-0.5,  1. ])
    """
    return lu_factor(A, pivot_tol).solve(np.asarray(b, dtype=float))


def det_sign(A, pivot_tol: float = PIVOT_TOL) -> int:
    """Sign of ``det(A)``; 0 when the factorization hits a tiny pivot."""
    fac = lu_factor(A, pivot_tol)
    if fac.singular:
        return 0
    if fac.packed.shape[0] == 0:
        return 1
    return int(fac.parity * np.prod(np.sign(np.diag(fac.packed))))


def sr1_update(H, step, grad_diff) -> np.ndarray:
    """Symmetric rank-one update of a Hessian approximation.

    The update is skipped when ``|(y - H s)^T s| < 1e-8 ||s|| ||y - H s||``.
    """
    H = np.asarray(H, dtype=float)
    s = np.asarray(step, dtype=float)
    y = np.asarray(grad_diff, dtype=float)
    if not (H.shape[0] == H.shape[1] == s.size == y.size):
        raise ValueError("sr1_update: inconsistent dimensions")
    r = y - H @ s
    denom = float(r @ s)
    rn = float(np.linalg.norm(r))
    if rn == 0.0 or abs(denom) < 1e-8 * float(np.linalg.norm(s)) * rn:
        return H
    return H + np.outer(r, r) / denom


def fd_gradient(fun: Callable[[np.ndarray], float], x, rel_step: float = 1e-6) -> np.ndarray:
    """Central-difference gradient with step ``rel_step * (1 + |x_i|)``."""
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        h = rel_step * (1.0 + abs(x[i]))
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (fun(xp) - fun(xm)) / (2.0 * h)
    return g


def fd_jacobian(fun: Callable[[np.ndarray], np.ndarray], x, rel_step: float = 1e-5) -> np.ndarray:
    """Central-difference Jacobian of a vector function, symmetrized when square.

    Used for Hessians obtained from an analytic gradient.
    """
    x = np.asarray(x, dtype=float)
    cols = []
    for i in range(x.size):
        h = rel_step * (1.0 + abs(x[i]))
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        cols.append((np.asarray(fun(xp)) - np.asarray(fun(xm))) / (2.0 * h))
    J = np.column_stack(cols) if cols else np.zeros((0, 0))
    if J.shape[0] == J.shape[1]:
        J = 0.5 * (J + J.T)
    return J


def _max_rel_error(approx: np.ndarray, exact: np.ndarray) -> float:
    denom = np.maximum(np.maximum(np.abs(exact), np.abs(approx)), 1.0)
    if approx.size == 0:
        return 0.0
    return float(np.max(np.abs(approx - exact) / denom))


def fd_gradient_check(model, x) -> float:
    """Largest per-coordinate relative gradient error against central differences.

    The relative error uses a unit floor in the denominator so that nearly
    vanishing components do not dominate.
    """
    x = np.asarray(x, dtype=float)
    approx = fd_gradient(model.value, x)
    return _max_rel_error(approx, np.asarray(model.gradient(x), dtype=float))


def fd_hessian_check(model, x) -> float:
    """Relative error between ``model.hessian`` and a difference of gradients."""
    x = np.asarray(x, dtype=float)
    approx = fd_jacobian(model.gradient, x)
    return _max_rel_error(approx, np.asarray(model.hessian(x), dtype=float))

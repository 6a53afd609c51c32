"""Tangent prediction along a fixed activation structure.

On a structure with active indices ``A`` and signs ``s`` the critical set is
locally the zero set of ``(alpha1 * grad_A f + (1 - alpha1) * s)``.  Its
tangent in the active coordinates is

    v1 = (1 + |g_a|)^2 * (Hess_A)^{-1} s,

obtained from the kernel vector ``(v1, 1, -1)`` of the Jacobian with respect
to ``(x_A, alpha1, alpha2)``.  Orientation is tracked through the sign of the
determinant of that Jacobian augmented by the kernel vector, which reduces to
``-sign(det Hess_A)`` for the ``+v1`` representative.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SingularHessian, SingularMatrix, ZeroDeterminant, ZeroDirection
from .kkt import EPS_ZERO, ActiveSet, active_set, embed
from .linalg import PIVOT_TOL, det_sign, lu_factor


@dataclass
class TangentInfo:
    """Predictor direction on one activation structure.

    ``v1_full`` is the embedding of ``v1_reduced``; the oriented direction
    actually followed is :attr:`direction` (``orientation * v1_full``).
    The kernel representative uses the scaling ``gamma = 1``.
    """

    v1_reduced: np.ndarray
    v1_full: np.ndarray
    structure: ActiveSet
    anchor_magnitude: float
    hessian_sign: int
    orientation: int = 1
    v2: float = 1.0
    v3: float = -1.0
    kernel_residual: float = 0.0
    scaling_note: str = "gamma = 1"

    @property
    def direction(self) -> np.ndarray:
        return self.orientation * self.v1_full

    @property
    def kernel_vector(self) -> np.ndarray:
        return np.concatenate([self.v1_reduced, [self.v2, self.v3]])


@dataclass
class StepControl:
    """Step lengths along an oriented direction.

    ``h = tau / ||v||``; ``h_bar <= h`` is the largest step that keeps every
    active sign, and ``deactivation_candidates`` lists coordinates that reach
    zero exactly at ``h_bar``.
    """

    tau: float
    h: float
    h_bar: float
    deactivation_candidates: tuple[int, ...] = field(default_factory=tuple)

    @property
    def clipped(self) -> bool:
        return self.h_bar < self.h


def reduced_hessian(H: np.ndarray, structure: ActiveSet) -> np.ndarray:
    idx = structure.index_array
    return np.asarray(H, dtype=float)[np.ix_(idx, idx)]


def kernel_matrix(G: np.ndarray, g_reduced: np.ndarray, s: np.ndarray, alpha1: float) -> np.ndarray:
    """Jacobian ``[[alpha1*G, g_A, s], [0, 1, 1]]`` of the reduced KKT map."""
    k = G.shape[0]
    top = np.column_stack([alpha1 * G, g_reduced, s])
    bottom = np.concatenate([np.zeros(k), [1.0, 1.0]])
    return np.vstack([top, bottom])


def augmented_jacobian(G, g_reduced, s, alpha1: float, vbar) -> np.ndarray:
    """Kernel matrix with the kernel vector appended as last row."""
    return np.vstack([kernel_matrix(G, g_reduced, s, alpha1), np.asarray(vbar, dtype=float)])


def tangent_direction(model, x0, structure: ActiveSet | None = None, grad=None, hess=None,
                      eps_zero: float = EPS_ZERO, pivot_tol: float = PIVOT_TOL) -> TangentInfo:
    """Compute the unoriented tangent at ``x0`` on ``structure``.

    Parameters
    ----------
    structure : ActiveSet, optional
        Activation structure to move on; defaults to ``active_set(x0)``.
        It may contain coordinates that are still zero at ``x0`` (the first
        step after an activation).
    grad, hess : ndarray, optional
        Precomputed ``grad f(x0)`` and Hessian (full ``n x n``).

    Raises
    ------
    SingularHessian
        If the Hessian restricted to the structure is singular.
    """
    x0 = np.asarray(x0, dtype=float)
    if structure is None:
        structure = active_set(x0, eps_zero)
    if structure.n_active == 0:
        raise ValueError("tangent needs a nonempty activation structure")
    g = model.gradient(x0) if grad is None else np.asarray(grad, dtype=float)
    H = model.hessian(x0) if hess is None else np.asarray(hess, dtype=float)
    G = reduced_hessian(H, structure)
    s = structure.sign_vector
    lam = abs(float(g[structure.indices[0]]))
    fac = lu_factor(G, pivot_tol)
    if fac.singular:
        raise SingularHessian(f"reduced Hessian on {structure} is singular")
    sign = int(fac.parity * np.prod(np.sign(np.diag(fac.packed))))
    v1 = (1.0 + lam) ** 2 * fac.solve(s)
    alpha1 = 1.0 / (1.0 + lam)
    K = kernel_matrix(G, g[structure.index_array], s, alpha1)
    vbar = np.concatenate([v1, [1.0, -1.0]])
    resid = float(np.linalg.norm(K @ vbar)) / max(1.0, float(np.linalg.norm(vbar)))
    return TangentInfo(v1, embed(v1, structure), structure, lam, sign, 1, kernel_residual=resid)


def orientation_sign(reduced_hess, reference_orientation: int, pivot_tol: float = PIVOT_TOL) -> int:
    """Factor ``sigma`` such that ``sigma * v1`` keeps ``sign(det J_a)`` fixed.

    ``sign(det J_a(sigma * v))`` equals ``-sigma * sign(det Hess_A)``, so
    ``sigma = -reference * sign(det Hess_A)``.

    Raises
    ------
    ZeroDeterminant
        If the reduced Hessian is singular to pivot tolerance.
    """
    if reference_orientation not in (-1, 1):
        raise ValueError("reference orientation must be +1 or -1")
    sgn = det_sign(np.atleast_2d(reduced_hess), pivot_tol)
    if sgn == 0:
        raise ZeroDeterminant("cannot orient: reduced Hessian is singular")
    return -reference_orientation * sgn


def reference_from_direction(sigma: int, hessian_sign: int) -> int:
    """Orientation reference implied by following ``sigma * v1``."""
    if hessian_sign == 0:
        raise ZeroDeterminant("cannot orient: reduced Hessian is singular")
    return -sigma * hessian_sign


def step_size(v1_full, tau: float) -> StepControl:
    """Constant parameter-space step ``h = tau / ||v1||``."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    nrm = float(np.linalg.norm(v1_full))
    if nrm == 0.0 or not np.isfinite(nrm):
        raise ZeroDirection("predictor direction has zero or non-finite norm")
    h = tau / nrm
    return StepControl(tau, h, h)


def clip_step(x0, direction, h: float, eps_zero: float = EPS_ZERO, tau: float | None = None) -> StepControl:
    """Shorten the step so that no nonzero coordinate changes sign.

    Coordinates that are already zero (just activated) are ignored; the
    indices that land within ``eps_zero`` of zero at the clipped length are
    returned as deactivation candidates.
    """
    x0 = np.asarray(x0, dtype=float)
    v = np.asarray(direction, dtype=float)
    moving = (np.abs(x0) > eps_zero) & (x0 * v < 0)
    h_bar = float(h)
    if np.any(moving):
        with np.errstate(over="ignore"):
            ratios = -x0[moving] / v[moving]
        h_bar = min(h_bar, float(np.min(ratios)))
    cands: tuple[int, ...] = ()
    if h_bar < h:
        land = x0 + h_bar * v
        cands = tuple(int(j) for j in np.flatnonzero(moving & (np.abs(land) <= eps_zero)))
        if not cands:  # ratio underflow; take the argmin
            ratios = np.where(moving, -x0 / np.where(v == 0, 1.0, v), np.inf)
            cands = (int(np.argmin(ratios)),)
    return StepControl(float(h if tau is None else tau), float(h), h_bar, cands)


def predicted_point(x0, direction, control: StepControl) -> np.ndarray:
    """``x0 + h_bar * v`` with deactivation candidates set exactly to zero."""
    xp = np.asarray(x0, dtype=float) + control.h_bar * np.asarray(direction, dtype=float)
    if control.deactivation_candidates:
        xp[list(control.deactivation_candidates)] = 0.0
    return xp

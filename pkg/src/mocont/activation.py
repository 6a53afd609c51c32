"""Kink handling: which coordinates to switch on or off at a critical point
where the activation structure may change.

At a kink ``x*`` every subset ``L`` of the potentially active indices defines
a candidate structure ``A(x*) ∪ L``.  On it, with signs ``s = -sgn(g)``, the
tangent is ``v = (1 + |g_a|)^2 (Hess_{A∪L})^{-1} s``.  A signed candidate
``w = sigma * v`` can only continue the critical set if

(a) every newly activated coordinate moves against its gradient sign (or
    does not move), and
(b) every tie that stays inactive falls behind:
    ``sgn(g_j) * Hess_j w <= -sigma * (1 + |g_a|)^2``.

These are necessary conditions only; the corrector decides in the end.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import TooManyPotentiallyActive
from .kkt import EPS_ZERO, ActiveSet, active_set
from .linalg import PIVOT_TOL, lu_factor

DIR_TOL = 1e-8
B_SLACK = 1e-8


@dataclass
class ActivationCandidate:
    """One signed direction leaving a kink.

    Attributes
    ----------
    subset : tuple of int
        Potentially active indices switched on by this candidate.
    structure : ActiveSet
        Activation structure followed afterwards.
    sigma : int
        Sign applied to the tangent representative.
    direction : ndarray or None
        ``sigma * v1`` in full space; None when the Hessian on the
        structure is singular (``skipped_singular``).
    """

    subset: tuple[int, ...]
    structure: ActiveSet
    sigma: int
    direction: np.ndarray | None
    v1_reduced: np.ndarray | None = None
    anchor_magnitude: float = 0.0
    hessian_sign: int = 0
    passes_a: bool = False
    passes_b: bool = False
    skipped_singular: bool = False
    excluded_as_arrival: bool = False
    notes: list = field(default_factory=list)

    @property
    def admissible(self) -> bool:
        return (self.direction is not None and self.passes_a and self.passes_b
                and not self.excluded_as_arrival)

    @property
    def unit_direction(self) -> np.ndarray:
        return self.direction / np.linalg.norm(self.direction)

    @property
    def reference_orientation(self) -> int:
        """Orientation reference to use while following this candidate."""
        return -self.sigma * self.hessian_sign

    def __repr__(self) -> str:
        return (f"ActivationCandidate(subset={self.subset}, sigma={self.sigma:+d}, "
                f"structure={self.structure}, a={self.passes_a}, b={self.passes_b})")


def _subsets(items, include_empty=True):
    items = tuple(items)
    for mask in range(0 if include_empty else 1, 1 << len(items)):
        yield tuple(items[i] for i in range(len(items)) if mask >> i & 1)


def _directions(H, structure: ActiveSet, ga: float, subset, pivot_tol,
                max_cond: float | None = None) -> list[ActivationCandidate]:
    idx = structure.index_array
    G = H[np.ix_(idx, idx)]
    fac = lu_factor(G, pivot_tol)
    if fac.singular:
        return [ActivationCandidate(subset, structure, 0, None, skipped_singular=True)]
    v1 = (1.0 + ga) ** 2 * fac.solve(structure.sign_vector)
    if max_cond is not None:
        # ||G|| ||G^{-1} s|| / ||s|| bounds the condition number from below
        est = np.linalg.norm(G, np.inf) * np.linalg.norm(v1, np.inf) / (1.0 + ga) ** 2
        if not np.isfinite(est) or est > max_cond:
            return [ActivationCandidate(subset, structure, 0, None, skipped_singular=True)]
    hsign = int(fac.parity * np.prod(np.sign(np.diag(fac.packed))))
    full = np.zeros(structure.n)
    full[idx] = v1
    return [ActivationCandidate(subset, structure, sigma, sigma * full, v1, ga, hsign)
            for sigma in (1, -1)]


def _anchor(g, aset: ActiveSet, subset=()) -> float:
    if aset.n_active:
        return float(abs(g[aset.indices[0]]))
    if subset:
        return float(abs(g[subset[0]]))
    return float(np.max(np.abs(g)))


def enumerate_candidates(model, x_star, Ap, grad=None, hess=None, aset: ActiveSet | None = None,
                         p_max: int = 12, eps_zero: float = EPS_ZERO,
                         pivot_tol: float = PIVOT_TOL) -> list[ActivationCandidate]:
    """All signed tangent candidates for subsets of ``Ap``.

    Subsets are visited in bitmask order (empty set first), and ``+v`` comes
    before ``-v`` for each subset.  At ``x = 0`` the empty subset has no
    tangent and is skipped.

    Raises
    ------
    TooManyPotentiallyActive
        If ``len(Ap) > p_max``.
    """
    Ap = tuple(sorted(int(j) for j in Ap))
    if len(Ap) > p_max:
        raise TooManyPotentiallyActive(f"{len(Ap)} potentially active indices exceed p_max={p_max}")
    x_star = np.asarray(x_star, dtype=float)
    g = model.gradient(x_star) if grad is None else np.asarray(grad, dtype=float)
    H = model.hessian(x_star) if hess is None else np.asarray(hess, dtype=float)
    if aset is None:
        aset = active_set(x_star, eps_zero)
    out = []
    for subset in _subsets(Ap, include_empty=aset.n_active > 0):
        structure = aset.union((j, -int(np.sign(g[j])) or 1) for j in subset)
        out.extend(_directions(H, structure, _anchor(g, aset, subset), subset, pivot_tol))
    return out


def filter_candidates(model, x_star, candidates, Ap=None, grad=None, hess=None,
                      arrival: tuple[ActiveSet, np.ndarray] | None = None,
                      dir_tol: float = DIR_TOL, b_slack: float = B_SLACK) -> list[ActivationCandidate]:
    """Apply the necessary conditions (a) and (b) and drop the arrival direction.

    Parameters
    ----------
    Ap : sequence of int, optional
        Potentially active set at ``x_star``; defaults to the union of the
        candidate subsets.
    arrival : (ActiveSet, ndarray), optional
        Structure and last step with which the kink was reached.  A
        candidate on the same structure pointing backwards (negative inner
        product with the step) is marked ``excluded_as_arrival``.

    Returns
    -------
    list of ActivationCandidate
        The admissible candidates in enumeration order.  The flags of every
        input candidate are updated in place.
    """
    x_star = np.asarray(x_star, dtype=float)
    g = model.gradient(x_star) if grad is None else np.asarray(grad, dtype=float)
    H = model.hessian(x_star) if hess is None else np.asarray(hess, dtype=float)
    if Ap is None:
        Ap = sorted({j for c in candidates for j in c.subset})
    Ap = tuple(Ap)
    keep = []
    for c in candidates:
        if c.direction is None:
            continue
        w = c.direction
        wn = float(np.linalg.norm(w))
        c.passes_a = all(abs(w[j]) <= dir_tol * wn or np.sign(w[j]) == -np.sign(g[j]) for j in c.subset)
        bound = (1.0 + c.anchor_magnitude) ** 2
        rest = [j for j in Ap if j not in c.subset]
        c.passes_b = all(np.sign(g[j]) * float(H[j] @ w) <= -c.sigma * bound + b_slack * bound for j in rest)
        if arrival is not None:
            a_struct, a_step = arrival
            c.excluded_as_arrival = bool(c.structure == a_struct and float(w @ a_step) < 0.0)
        if c.admissible:
            keep.append(c)
    return keep


def gradient_zero_candidates(model, x_star, grad=None, hess=None, aset: ActiveSet | None = None,
                             p_max: int = 12, eps_zero: float = EPS_ZERO, dir_tol: float = DIR_TOL,
                             b_slack: float = B_SLACK, pivot_tol: float = PIVOT_TOL,
                             max_cond: float = 1e8) -> list[ActivationCandidate]:
    """Candidates at a point with vanishing gradient.

    Every subset of the inactive indices is combined with every sign
    pattern.  Screening uses second-order information: along ``w`` the
    gradient behaves like ``t * Hess w``, so

    * activated coordinates must move in their hypothesized sign direction;
    * on the structure, ``sgn((Hess w)_i) == -s_i`` (the gradient grows
      against the coordinate signs, as criticality requires);
    * inactive indices satisfy ``|Hess_j w| <= (1 + |g_a|)^2``.

    The second-order screening is meaningless when the Hessian on a
    structure is nearly singular (for example on a continuum of
    minimizers), so structures whose estimated condition number exceeds
    ``max_cond`` are recorded as ``skipped_singular``.

    ``passes_a`` holds the first condition, ``passes_b`` the other two.

    Raises
    ------
    TooManyPotentiallyActive
        If more than ``p_max`` coordinates are inactive.
    """
    x_star = np.asarray(x_star, dtype=float)
    g = model.gradient(x_star) if grad is None else np.asarray(grad, dtype=float)
    H = model.hessian(x_star) if hess is None else np.asarray(hess, dtype=float)
    if aset is None:
        aset = active_set(x_star, eps_zero)
    zero = aset.inactive
    if len(zero) > p_max:
        raise TooManyPotentiallyActive(f"{len(zero)} inactive indices exceed p_max={p_max}")
    ga = float(abs(g[aset.indices[0]])) if aset.n_active else 0.0
    bound = (1.0 + ga) ** 2
    out = []
    for subset in _subsets(zero, include_empty=aset.n_active > 0):
        for pattern in itertools.product((1, -1), repeat=len(subset)):
            structure = aset.union(zip(subset, pattern))
            for c in _directions(H, structure, ga, subset, pivot_tol, max_cond):
                out.append(c)
                if c.direction is None:
                    continue
                w = c.direction
                wn = float(np.linalg.norm(w))
                hyp = dict(zip(subset, pattern))
                c.passes_a = all(abs(w[j]) <= dir_tol * wn or np.sign(w[j]) == hyp[j] for j in subset)
                Hw = H @ w
                tol = b_slack * bound
                consistent = all(np.sign(Hw[i]) == -s for i, s in zip(structure.indices, structure.signs))
                rest = [j for j in zero if j not in subset]
                bounded = all(abs(Hw[j]) <= bound + tol for j in rest)
                c.passes_b = consistent and bounded
    return out


@dataclass
class DeactivationDecision:
    """Outcome of a step that was clipped or ended on a zero coordinate.

    ``kind`` is ``"continue"`` (move on with ``structure``), ``"kink"``
    (coordinates in ``zeroed`` reached zero; dispatch the activation logic)
    or ``"retry"`` (the corrector failed on the reduced structure; shorten
    the step and keep the old structure).
    """

    kind: str
    structure: ActiveSet
    zeroed: tuple[int, ...] = ()


def decide_deactivation(result, structure: ActiveSet, eps_zero: float = EPS_ZERO) -> DeactivationDecision:
    """Classify a corrector result obtained on ``structure``."""
    if not result.converged:
        return DeactivationDecision("retry", structure)
    x = np.asarray(result.x_c)
    zeroed = tuple(j for j in structure.indices if abs(x[j]) <= eps_zero)
    if zeroed:
        return DeactivationDecision("kink", structure.without(zeroed), zeroed)
    return DeactivationDecision("continue", structure)

"""Optimality conditions for ``min (f(x), ||x||_1)``.

A point ``x != 0`` is Pareto critical when every active gradient component
opposes the sign of its coordinate and has the same magnitude ``|g_a|``, while
every inactive component is bounded by ``|g_a|``.  ``x = 0`` is always
critical.  This module also provides the multipliers, the set of inactive
indices that tie ``|g_a|`` and the maps between full and active coordinates.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, EmptyActiveSet, TooManyInactive

EPS_ZERO = 1e-9
EPS_PA = 1e-6


@dataclass(frozen=True)
class ActiveSet:
    """Sorted active indices with their signs (0-based indices).

    Two active sets compare equal when indices, signs and dimension agree,
    which is what the driver uses to decide whether branches overlap.
    """

    indices: tuple[int, ...]
    signs: tuple[int, ...]
    n: int

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        sg = tuple(int(s) for s in self.signs)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "signs", sg)
        if len(idx) != len(sg):
            raise DimensionMismatch("indices and signs differ in length")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError("active indices must be strictly increasing")
        if idx and (idx[0] < 0 or idx[-1] >= self.n):
            raise ValueError("active index out of range")
        if any(s not in (-1, 1) for s in sg):
            raise ValueError("signs must be +1 or -1")

    @classmethod
    def from_pairs(cls, pairs, n: int) -> "ActiveSet":
        pairs = sorted((int(i), int(s)) for i, s in pairs)
        return cls(tuple(i for i, _ in pairs), tuple(s for _, s in pairs), n)

    @property
    def n_active(self) -> int:
        return len(self.indices)

    @property
    def n_zero(self) -> int:
        return self.n - len(self.indices)

    @property
    def inactive(self) -> tuple[int, ...]:
        act = set(self.indices)
        return tuple(j for j in range(self.n) if j not in act)

    @property
    def sign_vector(self) -> np.ndarray:
        """Signs ``s`` restricted to the active coordinates."""
        return np.asarray(self.signs, dtype=float)

    @property
    def index_array(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=int)

    def without(self, drop) -> "ActiveSet":
        drop = set(int(j) for j in drop)
        return ActiveSet.from_pairs([(i, s) for i, s in zip(self.indices, self.signs) if i not in drop], self.n)

    def union(self, pairs) -> "ActiveSet":
        merged = dict(zip(self.indices, self.signs))
        merged.update({int(i): int(s) for i, s in pairs})
        return ActiveSet.from_pairs(merged.items(), self.n)

    def __len__(self) -> int:
        return len(self.indices)

    def __str__(self) -> str:
        parts = [f"{'+' if s > 0 else '-'}{i + 1}" for i, s in zip(self.indices, self.signs)]
        return "{" + ",".join(parts) + "}"


@dataclass
class CriticalPoint:
    """A point of the Pareto critical set together with its KKT data."""

    x: np.ndarray
    alpha1: float
    alpha2: float
    f_value: float
    l1_value: float
    active: ActiveSet
    kkt_residual: float
    gradient: np.ndarray | None = field(default=None, repr=False)

    @property
    def objectives(self) -> tuple[float, float]:
        return (self.f_value, self.l1_value)


def active_set(x, eps_zero: float = EPS_ZERO) -> ActiveSet:
    """Indices with ``|x_j| > eps_zero`` and their signs.

    >>> str(active_set([2.0, 0.0, -3.0, 0.0]))
    '{+1,-3}'
    """
    x = np.asarray(x, dtype=float)
    idx = np.flatnonzero(np.abs(x) > eps_zero)
    return ActiveSet(tuple(idx), tuple(np.sign(x[idx]).astype(int)), x.size)


def l1_subdifferential_extremes(aset: ActiveSet, max_zero: int = 20) -> np.ndarray:
    """Vertices of the ``l1`` subdifferential, one per row (``2**n0`` rows)."""
    if aset.n_zero > max_zero:
        raise TooManyInactive(f"{aset.n_zero} inactive indices exceed the limit {max_zero}")
    inactive = aset.inactive
    base = np.zeros(aset.n)
    base[list(aset.indices)] = aset.signs
    rows = []
    for pattern in itertools.product((1.0, -1.0), repeat=len(inactive)):
        v = base.copy()
        v[list(inactive)] = pattern
        rows.append(v)
    return np.array(rows).reshape(-1, aset.n)


def _anchor_magnitude(grad: np.ndarray, aset: ActiveSet) -> float:
    if aset.n_active:
        return float(abs(grad[aset.indices[0]]))
    return float(np.max(np.abs(grad))) if grad.size else 0.0


def criticality_residual(x, grad, eps_zero: float = EPS_ZERO, eps_pa: float = EPS_PA) -> float:
    """Aggregate violation of the optimality conditions (0 for critical points)."""
    x = np.asarray(x, dtype=float)
    g = np.asarray(grad, dtype=float)
    aset = active_set(x, eps_zero)
    if aset.n_active == 0:
        return 0.0
    act = aset.index_array
    ga = abs(g[act[0]])
    gact = g[act]
    mags = np.abs(gact)
    nonzero = mags > eps_pa * (1.0 + ga)
    sign_term = np.abs(np.sign(gact) + aset.sign_vector) * mags
    res = float(np.max(np.where(nonzero, sign_term, 0.0)))
    res = max(res, float(np.max(np.abs(mags - ga))))
    inact = np.asarray(aset.inactive, dtype=int)
    if inact.size:
        res = max(res, float(np.max(np.maximum(0.0, np.abs(g[inact]) - ga))))
    return res


def is_pareto_critical(x, grad, tol: float = 1e-6, eps_zero: float = EPS_ZERO,
                       eps_pa: float = EPS_PA) -> tuple[bool, float]:
    """Test the optimality conditions and report the aggregated residual.

    Returns
    -------
    (bool, float)
        Whether the residual is at most ``tol``, and the residual itself.
    """
    res = criticality_residual(x, grad, eps_zero, eps_pa)
    return res <= tol, res


def kkt_multipliers(grad, aset: ActiveSet) -> tuple[float, float]:
    """Weights ``(alpha1, alpha2)`` of ``f`` and ``||.||_1`` at a critical point."""
    if aset.n_active == 0:
        raise EmptyActiveSet("multipliers need an active index")
    ga = abs(float(np.asarray(grad)[aset.indices[0]]))
    alpha1 = 1.0 / (1.0 + ga)
    return alpha1, 1.0 - alpha1


def potentially_active_set(x, grad, aset: ActiveSet | None = None, eps_pa: float = EPS_PA,
                           eps_zero: float = EPS_ZERO) -> tuple[int, ...]:
    """Inactive indices whose gradient magnitude ties ``|g_a|``.

    At ``x = 0`` (empty active set) the reference magnitude is the largest
    gradient component, i.e. the indices that may be activated first.
    """
    x = np.asarray(x, dtype=float)
    g = np.asarray(grad, dtype=float)
    if aset is None:
        aset = active_set(x, eps_zero)
    if aset.n_active == 0 and np.any(np.abs(x) > eps_zero):
        raise EmptyActiveSet("x is nonzero but the supplied active set is empty")
    ga = _anchor_magnitude(g, aset)
    inact = np.asarray(aset.inactive, dtype=int)
    if inact.size == 0:
        return ()
    hit = np.abs(np.abs(g[inact]) - ga) <= eps_pa * (1.0 + ga)
    return tuple(int(j) for j in inact[hit])


def embed(reduced, aset: ActiveSet) -> np.ndarray:
    """Place active-coordinate values into ``R^n`` with zeros elsewhere."""
    reduced = np.asarray(reduced, dtype=float)
    if reduced.shape != (aset.n_active,):
        raise DimensionMismatch(f"expected {aset.n_active} reduced entries, got {reduced.shape}")
    x = np.zeros(aset.n)
    x[list(aset.indices)] = reduced
    return x


def restrict(x, aset: ActiveSet) -> np.ndarray:
    """Active coordinates of ``x``."""
    x = np.asarray(x, dtype=float)
    if x.shape != (aset.n,):
        raise DimensionMismatch(f"expected a vector of length {aset.n}, got {x.shape}")
    return x[list(aset.indices)]


def make_critical_point(model, x, grad=None, eps_zero: float = EPS_ZERO,
                        eps_pa: float = EPS_PA) -> CriticalPoint:
    """Bundle ``x`` with objective values, multipliers and residual.

    At ``x = 0`` the reported ``alpha1`` is ``1/(1 + max|g|)``, the largest
    weight on ``f`` for which the origin satisfies the weighted condition.
    """
    x = np.asarray(x, dtype=float).copy()
    x[np.abs(x) <= eps_zero] = 0.0
    g = model.gradient(x) if grad is None else np.asarray(grad, dtype=float)
    aset = active_set(x, eps_zero)
    ga = _anchor_magnitude(g, aset)
    alpha1 = 1.0 / (1.0 + ga)
    return CriticalPoint(
        x=x, alpha1=alpha1, alpha2=1.0 - alpha1, f_value=float(model.value(x)),
        l1_value=float(np.sum(np.abs(x))), active=aset,
        kkt_residual=criticality_residual(x, g, eps_zero, eps_pa), gradient=g,
    )

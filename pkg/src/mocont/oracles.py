"""Independent reference solutions used to validate the continuation.

Three oracles live here:

* :func:`lasso_homotopy` tracks the exact piecewise-linear Lasso path for
  ``||Ax - b||^2 + lam ||x||_1``;
* :func:`grid_pareto_critical` classifies the nodes of a regular grid for
  problems with at most three variables;
* :func:`weighted_sum_solve` minimizes ``f + lam ||x||_1`` with a proximal
  gradient method or with an adaptive-moment subgradient method.

:func:`lp_pareto_critical` is a linear-programming test of
``0 in conv(grad f, d||x||_1)`` that does not use the sign/magnitude
characterization of :mod:`mocont.kkt`.  The front metrics at the bottom
(Hausdorff distance, coverage) work in objective space.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .errors import BudgetExceeded, DegenerateBreakpoint
from .kkt import EPS_PA, criticality_residual

log = logging.getLogger(__name__)

TIE_TOL = 1e-12
GRID_BUDGET = 10_000_000


# ---------------------------------------------------------------------------
# Lasso homotopy
# ---------------------------------------------------------------------------
@dataclass
class HomotopyPath:
    """Exact Lasso path for ``||Ax - b||^2 + lam ||x||_1``.

    Attributes
    ----------
    breakpoints : ndarray
        Decreasing ``lam`` values, from ``2 ||A^T b||_inf`` down to the
        final value (0 unless the path was stopped early).
    solutions : ndarray
        ``x(lam)`` at each breakpoint, one row per breakpoint.  The path is
        affine in ``lam`` between consecutive rows.
    active_history : list of tuple
        Active indices on each segment (``len(breakpoints) - 1`` entries).
    ties : list of dict
        Breakpoints at which several events coincided within ``1e-12``.
        They were resolved by index order.
    """

    A: np.ndarray
    b: np.ndarray
    breakpoints: np.ndarray
    solutions: np.ndarray
    active_history: list
    ties: list = field(default_factory=list)

    def x_at(self, lam: float) -> np.ndarray:
        """Solution at ``lam`` (linear interpolation between breakpoints)."""
        lam = float(lam)
        bp = self.breakpoints
        if lam >= bp[0]:
            return self.solutions[0].copy()
        if lam <= bp[-1]:
            return self.solutions[-1].copy()
        i = int(np.searchsorted(-bp, -lam, side="right")) - 1
        t = (bp[i] - lam) / (bp[i] - bp[i + 1])
        return (1.0 - t) * self.solutions[i] + t * self.solutions[i + 1]

    def kkt_violation(self, lam: float, x=None) -> float:
        """Soft-threshold optimality residual at ``lam``."""
        x = self.x_at(lam) if x is None else np.asarray(x, dtype=float)
        c = 2.0 * self.A.T @ (self.b - self.A @ x)
        act = x != 0
        res = np.where(act, np.abs(c - lam * np.sign(x)), np.maximum(np.abs(c) - lam, 0.0))
        return float(np.max(res)) if res.size else 0.0

    def sample(self, per_segment: int = 20) -> tuple[np.ndarray, np.ndarray]:
        """``(lams, X)`` sampled uniformly on every segment."""
        lams = [self.breakpoints[0]]
        for i in range(len(self.breakpoints) - 1):
            seg = np.linspace(self.breakpoints[i], self.breakpoints[i + 1], per_segment + 1)[1:]
            lams.extend(seg)
        lams = np.asarray(lams)
        return lams, np.array([self.x_at(l) for l in lams])

    def objectives(self, per_segment: int = 20, scale: float = 1.0) -> np.ndarray:
        """``(scale * ||Ax - b||^2, ||x||_1)`` along the sampled path."""
        _, X = self.sample(per_segment)
        R = X @ self.A.T - self.b
        return np.column_stack([scale * np.sum(R * R, axis=1), np.sum(np.abs(X), axis=1)])


def lasso_homotopy(A, b, lam_min: float = 0.0, strict: bool = False, max_events: int | None = None) -> HomotopyPath:
    """Track the Lasso path of ``||Ax - b||^2 + lam ||x||_1``.

    The optimality conditions read ``c = 2 A^T (b - A x)`` with
    ``c_j = lam sgn(x_j)`` on the active set and ``|c_j| <= lam`` elsewhere.
    Between events the active solution moves along ``-(2 A_E^T A_E)^{-1} s``
    per unit of ``lam``.  Events are a variable joining (``|c_j|`` reaches
    ``lam``) or leaving (``x_j`` reaches zero).

    Parameters
    ----------
    A, b : array_like
        Design matrix and data.
    lam_min : float
        Stop when the path reaches this value.
    strict : bool
        Raise :class:`DegenerateBreakpoint` on coinciding events instead of
        resolving them by index order.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).ravel()
    m, n = A.shape
    if b.size != m:
        raise ValueError("A and b have inconsistent row counts")
    if not np.any(A):
        raise ValueError("all columns of A are zero")
    max_events = max_events or 50 * (n + 1)
    x = np.zeros(n)
    c = 2.0 * A.T @ b
    lam = float(np.max(np.abs(c))) if n else 0.0
    bps, sols, hist, ties = [lam], [x.copy()], [], []
    if lam <= lam_min:
        return HomotopyPath(A, b, np.array(bps), np.array(sols), hist, ties)
    scale = max(lam, 1.0)
    E = [int(j) for j in np.flatnonzero(np.abs(np.abs(c) - lam) <= TIE_TOL * scale)]
    if len(E) > 1:
        ties.append({"lam": lam, "events": [("join", j) for j in E]})
        if strict:
            raise DegenerateBreakpoint(f"{len(E)} variables enter together at lam={lam:.6g}")
    s = np.sign(c)
    for _ in range(max_events):
        if lam <= lam_min:
            break
        Ea = np.asarray(E, dtype=int)
        AE = A[:, Ea]
        M = 2.0 * AE.T @ AE
        w = np.linalg.lstsq(M, s[Ea], rcond=None)[0]
        a = 2.0 * A.T @ (AE @ w)  # dc/d(delta) = -a
        events = [(lam - lam_min, "end", -1)]
        inactive = np.setdiff1d(np.arange(n), Ea)
        for j in inactive:
            for sgn in (1.0, -1.0):
                den = 1.0 - sgn * a[j]
                if den > 1e-14:
                    d = (lam - sgn * c[j]) / den
                    if d > TIE_TOL * scale:
                        events.append((d, "join", int(j)))
        for pos, j in enumerate(Ea):
            if w[pos] * s[j] < 0:
                d = -x[j] / w[pos]
                if d > TIE_TOL * scale:
                    events.append((d, "drop", int(j)))
        events.sort(key=lambda e: (e[0], e[2]))
        delta = events[0][0]
        hits = [e for e in events if e[0] - delta <= TIE_TOL * scale]
        x[Ea] += delta * w
        c = c - delta * a
        lam = lam - delta
        hist.append(tuple(E))
        bps.append(lam)
        sols.append(x.copy())
        if len(hits) > 1:
            record = {"lam": lam, "events": [(k, j) for _, k, j in hits]}
            ties.append(record)
            if strict:
                raise DegenerateBreakpoint(f"coinciding events at lam={lam:.6g}: {record['events']}")
            log.info("degenerate breakpoint at lam=%.6g resolved by index order", lam)
        for _, kind, j in hits:
            if kind == "join":
                E.append(j)
                s[j] = np.sign(c[j])
            elif kind == "drop":
                E.remove(j)
                x[j] = 0.0
        E.sort()
        if not E and lam > lam_min:
            # every variable dropped at once; restart from the largest correlation
            j = int(np.argmax(np.abs(c)))
            E = [j]
            s[j] = np.sign(c[j])
    return HomotopyPath(A, b, np.array(bps), np.array(sols), hist, ties)


# ---------------------------------------------------------------------------
# grid oracle
# ---------------------------------------------------------------------------
@dataclass
class GridResult:
    """Outcome of :func:`grid_pareto_critical`."""

    nodes: np.ndarray
    critical: np.ndarray
    residuals: np.ndarray
    tolerance: np.ndarray
    objectives: np.ndarray
    front: np.ndarray

    @property
    def critical_points(self) -> np.ndarray:
        return self.nodes[self.critical]


def _residuals_batch(X, G, eps_zero):
    """Vectorized :func:`mocont.kkt.criticality_residual` for many points."""
    N, n = X.shape
    act = np.abs(X) > eps_zero
    has = act.any(axis=1)
    first = np.argmax(act, axis=1)
    ga = np.abs(G[np.arange(N), first])
    mags = np.abs(G)
    sgnx = np.sign(X)
    nonzero = mags > EPS_PA * (1.0 + ga)[:, None]
    sign_term = np.where(act & nonzero, np.abs(np.sign(G) + sgnx) * mags, 0.0)
    mag_term = np.where(act, np.abs(mags - ga[:, None]), 0.0)
    inact_term = np.where(~act, np.maximum(mags - ga[:, None], 0.0), 0.0)
    res = np.max(np.maximum(np.maximum(sign_term, mag_term), inact_term), axis=1)
    return np.where(has, res, 0.0)


def _cell_variation(G, shape):
    """Bound on the residual change within one grid cell of each node.

    For every gradient component the largest change to a neighbouring
    node is summed over the axes; the residual compares two components,
    so the bound is the largest such sum (twice the half-cell change).
    """
    n = len(shape)
    Gg = G.reshape(*shape, -1)
    total = np.zeros(Gg.shape)
    for k in range(n):
        if shape[k] < 2:
            continue
        d = np.abs(np.diff(Gg, axis=k))
        lo = [slice(None)] * (n + 1)
        hi = [slice(None)] * (n + 1)
        lo[k], hi[k] = slice(0, -1), slice(1, None)
        var = np.zeros(Gg.shape)
        var[tuple(lo)] = d
        var[tuple(hi)] = np.maximum(var[tuple(hi)], d)
        total += var
    return np.max(total, axis=-1).ravel()


def grid_pareto_critical(model, box, resolution: float, tol: float | None = None,
                         budget: int = GRID_BUDGET) -> GridResult:
    """Classify the nodes of a regular grid on ``box``.

    A node is snapped to zero in every coordinate with
    ``|x_j| <= resolution / 2`` (the grid cell containing zero) and is
    called critical when its criticality residual is at most its
    tolerance.  By default the tolerance of a node is the gradient change
    to its grid neighbours, summed over the axes: a node within one cell
    of a critical point cannot have a larger residual, to first order.

    Parameters
    ----------
    box : sequence of (lo, hi)
        One interval per variable (``n <= 3``).
    resolution : float
        Grid spacing.
    tol : float, optional
        Fixed tolerance for all nodes instead of the local one.
    """
    box = np.asarray(box, dtype=float).reshape(-1, 2)
    n = box.shape[0]
    if n != model.dim:
        raise ValueError("box dimension does not match the model")
    if n > 3:
        raise ValueError("the grid oracle is meant for n <= 3")
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    counts = [int(np.floor((hi - lo) / resolution + 1e-9)) + 1 for lo, hi in box]
    total = int(np.prod(counts))
    if total > budget:
        raise BudgetExceeded(f"{total} grid nodes exceed the budget {budget}")
    axes = [lo + resolution * np.arange(k) for (lo, _), k in zip(box, counts)]
    X = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    X[np.abs(X) <= 0.5 * resolution] = 0.0
    G = model.gradient_batch(X)
    res = _residuals_batch(X, G, 0.0)
    tols = np.full(total, float(tol)) if tol is not None else _cell_variation(G, counts)
    objs = np.column_stack([model.value_batch(X), np.sum(np.abs(X), axis=1)])
    from .driver import nondominance_filter
    front = objs[np.sort(nondominance_filter(objs))]
    return GridResult(X, res <= tols, res, tols, objs, front)


# ---------------------------------------------------------------------------
# LP criticality test
# ---------------------------------------------------------------------------
def lp_pareto_critical(x, grad, tol: float = 1e-9, eps_zero: float = 0.0) -> tuple[bool, float]:
    """Decide ``0 in conv({grad f} u d||x||_1)`` by linear programming.

    Variables are the weight ``alpha`` of ``grad f``, the scaled
    subgradient ``eta = (1 - alpha) xi`` and a slack ``t``.  The LP
    minimizes ``t`` subject to ``|alpha g + eta| <= t`` componentwise,
    ``eta_j = (1 - alpha) sgn(x_j)`` on the support and
    ``|eta_j| <= 1 - alpha`` off it.

    Returns
    -------
    (bool, float)
        ``t <= tol`` and the optimal ``t``.
    """
    x = np.asarray(x, dtype=float)
    g = np.asarray(grad, dtype=float)
    n = x.size
    act = np.abs(x) > eps_zero
    # variables: [alpha, eta_1..eta_n, t]
    nv = n + 2
    cost = np.zeros(nv)
    cost[-1] = 1.0
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for j in range(n):
        row = np.zeros(nv)
        row[0], row[1 + j], row[-1] = g[j], 1.0, -1.0
        A_ub.append(row)
        b_ub.append(0.0)
        row = np.zeros(nv)
        row[0], row[1 + j], row[-1] = -g[j], -1.0, -1.0
        A_ub.append(row)
        b_ub.append(0.0)
        if act[j]:
            row = np.zeros(nv)
            sj = np.sign(x[j])
            row[0], row[1 + j] = sj, 1.0  # eta_j + sj alpha = sj
            A_eq.append(row)
            b_eq.append(sj)
        else:
            for sgn in (1.0, -1.0):
                row = np.zeros(nv)
                row[0], row[1 + j] = 1.0, sgn  # sgn eta_j + alpha <= 1
                A_ub.append(row)
                b_ub.append(1.0)
    bounds = [(0.0, 1.0)] + [(None, None)] * n + [(0.0, None)]
    res = linprog(cost, A_ub=np.array(A_ub), b_ub=np.array(b_ub),
                  A_eq=np.array(A_eq) if A_eq else None, b_eq=np.array(b_eq) if b_eq else None,
                  bounds=bounds, method="highs")
    if res.status != 0:
        raise RuntimeError(f"linprog failed: {res.message}")
    t = float(res.fun)
    return t <= tol, t


# ---------------------------------------------------------------------------
# weighted sum
# ---------------------------------------------------------------------------
@dataclass
class WeightedSumResult:
    x: np.ndarray
    f_value: float
    l1_value: float
    lam: float
    iterations: int
    method: str

    @property
    def objectives(self) -> tuple[float, float]:
        return (self.f_value, self.l1_value)


def soft_threshold(v, thresh):
    v = np.asarray(v, dtype=float)
    return np.sign(v) * np.maximum(np.abs(v) - thresh, 0.0)


def _prox_grad(model, lam, x, iters, tol):
    # FISTA with backtracking and function-value restart
    y = x.copy()
    t = 1.0
    L = 1.0
    F_old = model.value(x) + lam * np.abs(x).sum()
    it = 0
    for it in range(1, iters + 1):
        fy, gy = model.value(y), model.gradient(y)
        while True:
            xn = soft_threshold(y - gy / L, lam / L)
            d = xn - y
            if model.value(xn) <= fy + gy @ d + 0.5 * L * (d @ d) + 1e-14 * abs(fy):
                break
            L *= 2.0
            if L > 1e20:
                return x, it
        F_new = model.value(xn) + lam * np.abs(xn).sum()
        if F_new > F_old:
            # restart the momentum from the last iterate
            y, t = x.copy(), 1.0
            continue
        tn = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        y = xn + ((t - 1.0) / tn) * (xn - x)
        step = float(np.linalg.norm(xn - x))
        x, t, F_old = xn, tn, F_new
        L = max(L * 0.9, 1e-12)
        if step <= tol * (1.0 + float(np.linalg.norm(x))):
            break
    return x, it


def _adaptive_moment(model, lam, x, iters, lr, beta1=0.9, beta2=0.999, eps=1e-8):
    m = np.zeros_like(x)
    v = np.zeros_like(x)
    for k in range(1, iters + 1):
        g = model.gradient(x) + lam * np.sign(x)
        m = beta1 * m + (1.0 - beta1) * g
        v = beta2 * v + (1.0 - beta2) * g * g
        mh = m / (1.0 - beta1 ** k)
        vh = v / (1.0 - beta2 ** k)
        x = x - lr * mh / (np.sqrt(vh) + eps)
    return x, iters


def weighted_sum_solve(model, lam: float, x_init, method: str = "prox_grad", iters: int = 5000,
                       lr: float = 1e-3, tol: float = 1e-12) -> WeightedSumResult:
    """Minimize ``f(x) + lam ||x||_1`` from ``x_init``.

    ``prox_grad`` is an accelerated proximal gradient method (gradient step
    on ``f``, soft-threshold by ``lam * step``).  ``adaptive_moment``
    applies bias-corrected first/second moment estimates to the subgradient
    ``grad f + lam sgn(x)``; its iterates rarely hit zero exactly.
    Non-convergence is not an error; inspect the returned values.
    """
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    x = np.array(x_init, dtype=float)
    if method == "prox_grad":
        x, it = _prox_grad(model, float(lam), x, iters, tol)
    elif method == "adaptive_moment":
        x, it = _adaptive_moment(model, float(lam), x, iters, lr)
    else:
        raise ValueError(f"unknown method {method!r}")
    return WeightedSumResult(x, model.value(x), float(np.abs(x).sum()), float(lam), it, method)


def weighted_sum_sweep(model, lams, starts: int = 10, seed: int = 0, method: str = "prox_grad",
                       iters: int = 5000, init_scale: float = 1.0, lr: float = 1e-3) -> list[WeightedSumResult]:
    """Solve for every ``lam`` from ``starts`` seeded random initial points."""
    rng = np.random.default_rng(seed)
    out = []
    for lam in lams:
        for _ in range(starts):
            x0 = init_scale * rng.uniform(-1.0, 1.0, size=model.dim)
            out.append(weighted_sum_solve(model, lam, x0, method, iters, lr=lr))
    return out


# ---------------------------------------------------------------------------
# front metrics
# ---------------------------------------------------------------------------
def normalization(*fronts) -> tuple[np.ndarray, np.ndarray]:
    """Shift and scale mapping the joint bounding box of ``fronts`` to [0, 1]^2."""
    F = np.vstack([np.asarray(f, dtype=float).reshape(-1, 2) for f in fronts])
    lo = F.min(axis=0)
    span = F.max(axis=0) - lo
    span[span <= 0] = 1.0
    return lo, span


def _point_to_polyline(P, Q):
    """Distance of every row of ``P`` to the polyline through the rows of ``Q``."""
    P = np.asarray(P, dtype=float).reshape(-1, 2)
    Q = np.asarray(Q, dtype=float).reshape(-1, 2)
    if Q.shape[0] == 1:
        return np.linalg.norm(P - Q[0], axis=1)
    A, B = Q[:-1], Q[1:]
    AB = B - A
    L2 = np.sum(AB * AB, axis=1)
    L2[L2 == 0] = 1.0
    t = np.clip(((P[:, None, :] - A[None]) * AB[None]).sum(-1) / L2[None], 0.0, 1.0)
    proj = A[None] + t[..., None] * AB[None]
    return np.min(np.linalg.norm(P[:, None, :] - proj, axis=2), axis=1)


def _point_to_set(P, Q):
    P = np.asarray(P, dtype=float).reshape(-1, 2)
    Q = np.asarray(Q, dtype=float).reshape(-1, 2)
    out = np.empty(P.shape[0])
    for s in range(0, P.shape[0], 2048):
        out[s:s + 2048] = np.min(np.linalg.norm(P[s:s + 2048, None, :] - Q[None], axis=2), axis=1)
    return out


def hausdorff(front_a, front_b, polyline: bool = False, normalize: bool = False) -> float:
    """Symmetric Hausdorff distance between two objective-space point sets.

    With ``polyline=True`` each set is read as a curve through its points
    sorted by the second objective, so sparse and dense samplings of the
    same front compare as close.  ``normalize`` maps the joint bounding box
    to the unit square first.
    """
    A = np.asarray(front_a, dtype=float).reshape(-1, 2)
    B = np.asarray(front_b, dtype=float).reshape(-1, 2)
    if A.shape[0] == 0 or B.shape[0] == 0:
        return 0.0 if A.shape[0] == B.shape[0] else np.inf
    if normalize:
        lo, span = normalization(A, B)
        A, B = (A - lo) / span, (B - lo) / span
    if polyline:
        A = A[np.lexsort((A[:, 0], A[:, 1]))]
        B = B[np.lexsort((B[:, 0], B[:, 1]))]
        return float(max(_point_to_polyline(A, B).max(), _point_to_polyline(B, A).max()))
    return float(max(_point_to_set(A, B).max(), _point_to_set(B, A).max()))


def coverage(front, reference, radius: float, normalize_by=None) -> float:
    """Fraction of ``front`` points with a ``reference`` point within ``radius``.

    ``normalize_by`` (an ``(N, 2)`` array, usually ``front`` itself) fixes
    the min/max box used to scale both sets before measuring distances.
    """
    F = np.asarray(front, dtype=float).reshape(-1, 2)
    R = np.asarray(reference, dtype=float).reshape(-1, 2)
    if F.shape[0] == 0:
        return 1.0
    if R.shape[0] == 0:
        return 0.0
    if normalize_by is not None:
        lo, span = normalization(normalize_by)
        F, R = (F - lo) / span, (R - lo) / span
    return float(np.mean(_point_to_set(F, R) <= radius))


def uncovered_fraction(front, reference, radius: float = 0.05, normalize_by="front") -> float:
    """``1 - coverage``, normalized by the box of ``front`` by default."""
    norm = np.asarray(front) if isinstance(normalize_by, str) and normalize_by == "front" else normalize_by
    return 1.0 - coverage(front, reference, radius, norm)


def grid_residual(model, x, eps_zero: float = 0.0) -> float:
    """Criticality residual of a single point (convenience for grid checks)."""
    return criticality_residual(x, model.gradient(x), eps_zero)

"""Predictor-corrector continuation of the whole critical set.

The driver starts at the origin (or a supplied critical point), follows each
activation structure with tangent predictions and corrector projections,
dispatches the activation logic at kinks, queues every admissible branch and
optionally restarts on new components found with an epsilon-constraint
solve.  Branches are processed in waves: all queued seeds of a wave run
independently (optionally on a thread pool) against a snapshot of earlier
waves, so the result does not depend on the number of threads.
"""

from __future__ import annotations

import dataclasses
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .activation import ActivationCandidate, enumerate_candidates, filter_candidates, gradient_zero_candidates
from .corrector import CorrectorOptions, CorrectorSpec, correct, retreat
from .errors import NotConverged, SingularHessian, SingularMatrix, TooManyPotentiallyActive, ZeroDirection
from .kkt import ActiveSet, CriticalPoint, active_set, is_pareto_critical, make_critical_point, potentially_active_set
from .linalg import sr1_update
from .predictor import clip_step, orientation_sign, predicted_point, reference_from_direction, step_size, tangent_direction

log = logging.getLogger(__name__)

TERMINATIONS = ("component_end", "minimizer_reached", "singular_hessian", "step_limit", "merged",
                "corrector_failed")


@dataclass
class ContinuationConfig:
    """Settings of a continuation run.

    ``hessian_mode`` of None keeps the model's own mode; ``"sr1"`` makes
    every branch carry a symmetric rank-one approximation seeded by one
    finite-difference Hessian at the branch start.
    """

    tau: float = 0.1
    eps_zero: float = 1e-9
    eps_pa: float = 1e-6
    kkt_tol: float = 1e-6
    grad_zero_tol: float = 1e-7
    max_steps: int = 2000
    max_branches: int = 256
    p_max: int = 12
    greedy: bool = False
    hessian_mode: str | None = None
    corrector: CorrectorOptions = field(default_factory=CorrectorOptions)
    restarts: int = 0
    restart_starts: int = 5
    restart_margin: float | None = None
    restart_strategy: str = "epsilon_constraint"
    restart_iters: int = 3000
    restart_growth: float = 4.0
    restart_expansions: int = 4
    merge_radius: float = 0.5
    min_progress: float = 1e-3
    seed: int = 0
    threads: int | None = None

    def __post_init__(self):
        if isinstance(self.corrector, dict):
            self.corrector = CorrectorOptions(**self.corrector)
        self.validate()

    def validate(self) -> None:
        for name in ("tau", "eps_zero", "eps_pa", "kkt_tol", "grad_zero_tol", "merge_radius"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")
        if self.hessian_mode not in (None, "analytic", "finite_difference", "sr1"):
            raise ValueError(f"unknown hessian mode {self.hessian_mode!r}")
        if self.restart_strategy not in ("epsilon_constraint", "weighted_sum"):
            raise ValueError(f"unknown restart strategy {self.restart_strategy!r}")
        if self.restarts < 0:
            raise ValueError("restarts must be non-negative")
        if self.restart_growth < 1.0 or self.restart_expansions < 0:
            raise ValueError("restart_growth must be >= 1 and restart_expansions >= 0")

    @property
    def margin(self) -> float:
        return 0.1 * self.tau if self.restart_margin is None else self.restart_margin

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ContinuationConfig":
        data = dict(data)
        data["corrector"] = CorrectorOptions(**data.get("corrector", {}))
        return cls(**data)


# ---------------------------------------------------------------------------
# curvature providers
# ---------------------------------------------------------------------------
class ExactCurvature:
    """Hessian straight from the model (analytic or finite differences)."""

    def __init__(self, model):
        self.model = model

    def __call__(self, x, g=None):
        return self.model.hessian(x)

    def copy(self):
        return self


class SR1Curvature:
    """Per-branch SR1 approximation updated at every point it is queried at."""

    def __init__(self, H0, x0=None, g0=None):
        self.H = np.array(H0, dtype=float)
        self.x = None if x0 is None else np.array(x0, dtype=float)
        self.g = None if g0 is None else np.array(g0, dtype=float)

    def __call__(self, x, g):
        x = np.asarray(x, dtype=float)
        g = np.asarray(g, dtype=float)
        if self.x is not None:
            s = x - self.x
            if np.any(s != 0.0):
                self.H = sr1_update(self.H, s, g - self.g)
        self.x, self.g = x.copy(), g.copy()
        return self.H

    def copy(self):
        return SR1Curvature(self.H, self.x, self.g)


def _curvature_for(model, mode, x0):
    if mode == "sr1":
        fd = model.with_hessian_mode("finite_difference")
        return SR1Curvature(fd.hessian(x0), x0, model.gradient(x0))
    if mode is not None and mode != model.hessian_mode:
        return ExactCurvature(model.with_hessian_mode(mode))
    return ExactCurvature(model)


# ---------------------------------------------------------------------------
# records
# ---------------------------------------------------------------------------
@dataclass
class Branch:
    """Points followed from one start direction until a termination event."""

    branch_id: int
    component: int
    parent: int | None
    points: list = field(default_factory=list)
    structures: list = field(default_factory=list)
    termination: str | None = None
    message: str = ""
    slopes: list = field(default_factory=list)
    kinks: list = field(default_factory=list)

    @property
    def x(self) -> np.ndarray:
        return np.array([p.x for p in self.points])

    @property
    def objectives(self) -> np.ndarray:
        return np.array([[p.f_value, p.l1_value] for p in self.points]).reshape(-1, 2)


@dataclass
class _Seed:
    start: CriticalPoint
    structure: ActiveSet
    direction: np.ndarray | None
    reference: int | None
    component: int
    parent: int | None
    curvature: object
    arrival: tuple | None = None
    last_step: np.ndarray | None = None


@dataclass
class ArchivePoint:
    branch_id: int
    step: int
    point: CriticalPoint


@dataclass
class FrontArchive:
    """All branches of a run, the deduplicated point list and its front."""

    branches: list
    points: list
    front: list
    components: list
    config: ContinuationConfig
    elapsed: float = 0.0
    restart_log: list = field(default_factory=list)

    def objectives(self, which: str = "points") -> np.ndarray:
        seq = self.points if which == "points" else self.front
        return np.array([[p.point.f_value, p.point.l1_value] for p in seq]).reshape(-1, 2)

    def terminations(self) -> dict:
        return {b.branch_id: b.termination for b in self.branches}


# ---------------------------------------------------------------------------
# non-dominance
# ---------------------------------------------------------------------------
def nondominance_filter(objectives) -> np.ndarray:
    """Indices of the Pareto-optimal rows of an ``(N, 2)`` array.

    Rows are sorted by the first objective (ties by the second) and a row is
    kept when its second objective is strictly below everything kept before.
    Exact duplicates therefore survive once.
    """
    F = np.asarray(objectives, dtype=float).reshape(-1, 2)
    if F.shape[0] == 0:
        return np.zeros(0, dtype=int)
    order = np.lexsort((F[:, 1], F[:, 0]))
    keep = []
    best = np.inf
    for i in order:
        if F[i, 1] < best:
            keep.append(i)
            best = F[i, 1]
    return np.asarray(keep, dtype=int)


# ---------------------------------------------------------------------------
# main loop
# ---------------------------------------------------------------------------
class _Runner:
    def __init__(self, model, config: ContinuationConfig):
        self.model = model
        self.cfg = config
        self.copts = dataclasses.replace(config.corrector, kkt_tol=min(config.corrector.kkt_tol, config.kkt_tol),
                                         eps_zero=config.eps_zero, eps_pa=config.eps_pa,
                                         grad_zero_tol=min(config.corrector.grad_zero_tol, config.grad_zero_tol))

    # -- helpers ----------------------------------------------------------
    def critical_point(self, x, g=None) -> CriticalPoint:
        return make_critical_point(self.model, x, g, self.cfg.eps_zero, self.cfg.eps_pa)

    def _correct(self, x_p, structure, x0, curv):
        """Corrector with the retreat fallback; returns a result or None."""
        lam = self.copts.retreat_lambda
        xp = np.asarray(x_p, dtype=float)
        for attempt in range(self.copts.retreat_max + 1):
            trial = curv.copy() if isinstance(curv, SR1Curvature) else curv
            try:
                res = correct(self.model, CorrectorSpec(xp, structure, x0), self.copts, hessian=trial)
            except NotConverged:
                res = None
            except (SingularMatrix, np.linalg.LinAlgError, FloatingPointError):
                res = None
            if res is not None:
                if isinstance(curv, SR1Curvature):
                    curv.H, curv.x, curv.g = trial.H, trial.x, trial.g
                return res
            xp = retreat(x0, xp, lam)
            xp[list(structure.inactive)] = 0.0
        return None

    def _dispatch(self, cp: CriticalPoint, H, arrival):
        """Admissible candidates at a kink (or at a zero-gradient point)."""
        cfg = self.cfg
        g = cp.gradient
        if float(np.max(np.abs(g))) <= cfg.grad_zero_tol:
            cands = gradient_zero_candidates(self.model, cp.x, g, H, cp.active, cfg.p_max, cfg.eps_zero)
            out = []
            for c in cands:
                if c.direction is None or not (c.passes_a and c.passes_b):
                    continue
                if arrival is not None:
                    c.excluded_as_arrival = bool(c.structure == arrival[0] and float(c.direction @ arrival[1]) < 0)
                if c.admissible:
                    out.append(c)
            return out, True
        Ap = potentially_active_set(cp.x, g, cp.active, cfg.eps_pa, cfg.eps_zero)
        cands = enumerate_candidates(self.model, cp.x, Ap, g, H, cp.active, cfg.p_max, cfg.eps_zero)
        return filter_candidates(self.model, cp.x, cands, Ap, g, H, arrival=arrival), False

    def _seeds_from(self, cp, cands, component, parent, curv, arrival):
        return [_Seed(cp, c.structure, c.direction, c.reference_orientation, component, parent,
                      curv.copy(), arrival) for c in cands]

    # -- branch --------------------------------------------------------------
    def run_branch(self, seed: _Seed, branch_id: int, snapshot: list) -> tuple[Branch, list]:
        cfg = self.cfg
        tau = cfg.tau
        br = Branch(branch_id, seed.component, seed.parent)
        br.points.append(seed.start)
        br.structures.append((seed.structure, 0))
        children: list[_Seed] = []
        curv = seed.curvature
        cp = seed.start
        x0 = cp.x
        S = seed.structure
        pending = seed.direction
        ref = seed.reference
        last_step = seed.last_step
        others = [(b, b.x) for b in snapshot if len(b.points)]
        for _ in range(cfg.max_steps):
            g0 = cp.gradient
            H0 = curv(x0, g0)
            if pending is not None:
                d = pending
                pending = None
            else:
                try:
                    tan = tangent_direction(self.model, x0, S, g0, H0, cfg.eps_zero)
                except SingularHessian as exc:
                    br.termination, br.message = "singular_hessian", str(exc)
                    return br, children
                if ref is None:
                    sigma = 1 if last_step is None or float(tan.v1_full @ last_step) >= 0 else -1
                    ref = reference_from_direction(sigma, tan.hessian_sign)
                else:
                    sigma = -ref * tan.hessian_sign
                d = sigma * tan.v1_full
            br.slopes.append(float(g0 @ d))
            try:
                ctrl = step_size(d, tau)
            except ZeroDirection as exc:
                br.termination, br.message = "component_end", str(exc)
                return br, children
            ctrl = clip_step(x0, d, ctrl.h, cfg.eps_zero, tau)
            S_try = S.without(ctrl.deactivation_candidates) if ctrl.deactivation_candidates else S
            res = None
            if S_try.n_active:
                res = self._correct(predicted_point(x0, d, ctrl), S_try, x0, curv)
            if res is None and ctrl.deactivation_candidates:
                S_try = S
                res = self._correct(x0 + 0.5 * ctrl.h_bar * d, S, x0, curv)
            if res is None:
                br.termination, br.message = "corrector_failed", "corrector and retreats failed"
                return br, children
            new = self.critical_point(res.x_c)
            step_vec = new.x - x0
            if float(np.linalg.norm(step_vec)) < cfg.min_progress * tau and new.active == cp.active:
                Ap_old = potentially_active_set(x0, g0, cp.active, cfg.eps_pa, cfg.eps_zero)
                Ap_new = potentially_active_set(new.x, new.gradient, new.active, cfg.eps_pa, cfg.eps_zero)
                if Ap_old == Ap_new:
                    br.termination, br.message = "component_end", "no progress along the chosen direction"
                    return br, children
            if new.kkt_residual > cfg.kkt_tol:
                br.termination, br.message = "corrector_failed", f"residual {new.kkt_residual:.2e}"
                return br, children
            br.points.append(new)
            cp, x0, last_step = new, new.x, step_vec
            # merge with an earlier branch on the same structure
            for other, X in others:
                if other.branch_id == br.parent and len(br.points) <= 2:
                    continue
                dist = np.linalg.norm(X - x0, axis=1)
                close = np.flatnonzero(dist < cfg.merge_radius * tau)
                if any(other.points[i].active == new.active for i in close):
                    br.termination, br.message = "merged", f"merged into branch {other.branch_id}"
                    return br, children
            A = new.active
            g = new.gradient
            grad_zero = float(np.max(np.abs(g))) <= cfg.grad_zero_tol
            Ap = () if grad_zero else potentially_active_set(x0, g, A, cfg.eps_pa, cfg.eps_zero)
            if grad_zero or Ap or A != S_try:
                H = curv(x0, g)
                try:
                    adm, at_min = self._dispatch(new, H, (S_try, step_vec))
                except TooManyPotentiallyActive as exc:
                    br.termination = "minimizer_reached" if grad_zero else "component_end"
                    br.message = str(exc)
                    return br, children
                br.kinks.append({"index": len(br.points) - 1, "Ap": list(Ap), "gradient_zero": at_min,
                                 "admissible": [(c.subset, c.sigma) for c in adm]})
                if not adm:
                    br.termination = "minimizer_reached" if grad_zero else "component_end"
                    br.message = "no admissible direction"
                    return br, children
                if cfg.greedy:
                    adm = adm[:1]
                first, rest = adm[0], adm[1:]
                children.extend(self._seeds_from(new, rest, br.component, br.branch_id, curv,
                                                 (S_try, step_vec)))
                S, pending, ref = first.structure, first.direction, first.reference_orientation
                br.structures.append((S, len(br.points) - 1))
            elif S_try != S:
                S, ref = S_try, None
                br.structures.append((S, len(br.points) - 1))
        br.termination = "step_limit"
        return br, children

    # -- starts ---------------------------------------------------------------
    def seeds_from_point(self, x_start, component) -> tuple[CriticalPoint, list]:
        cfg = self.cfg
        cp = self.critical_point(np.asarray(x_start, dtype=float))
        if cp.active.n_active and cp.kkt_residual > cfg.kkt_tol:
            raise ValueError(f"start point is not critical (residual {cp.kkt_residual:.2e})")
        curv = _curvature_for(self.model, cfg.hessian_mode, cp.x)
        H = curv(cp.x, cp.gradient)
        g = cp.gradient
        grad_zero = float(np.max(np.abs(g))) <= cfg.grad_zero_tol
        Ap = () if grad_zero else potentially_active_set(cp.x, g, cp.active, cfg.eps_pa, cfg.eps_zero)
        if cp.active.n_active == 0 or grad_zero or Ap:
            try:
                adm, _ = self._dispatch(cp, H, None)
            except TooManyPotentiallyActive as exc:
                log.info("no start direction: %s", exc)
                return cp, []
            if cfg.greedy:
                adm = adm[:1]
            return cp, self._seeds_from(cp, adm, component, None, curv, None)
        try:
            tan = tangent_direction(self.model, cp.x, cp.active, g, H, cfg.eps_zero)
        except SingularHessian:
            return cp, []
        seeds = []
        for sigma in (1, -1):
            seeds.append(_Seed(cp, cp.active, sigma * tan.v1_full,
                               reference_from_direction(sigma, tan.hessian_sign), component, None,
                               curv.copy()))
        return cp, seeds

    def run_component(self, seeds, branches, next_id):
        wave = seeds
        threads = self.cfg.threads or int(os.environ.get("MOCONT_THREADS", "1") or 1)
        while wave:
            budget = self.cfg.max_branches - len(branches)
            if budget <= 0:
                log.warning("branch budget exhausted; %d seeds dropped", len(wave))
                break
            wave = wave[:budget]
            ids = list(range(next_id, next_id + len(wave)))
            next_id += len(wave)
            snapshot = list(branches)
            if threads > 1 and len(wave) > 1:
                with ThreadPoolExecutor(max_workers=min(threads, len(wave))) as pool:
                    results = list(pool.map(lambda a: self.run_branch(a[0], a[1], snapshot), zip(wave, ids)))
            else:
                results = [self.run_branch(s, i, snapshot) for s, i in zip(wave, ids)]
            wave = []
            for br, kids in results:
                branches.append(br)
                wave.extend(kids)
        return next_id


def _archive_points(branches, radius) -> list:
    kept: list[ArchivePoint] = []
    X = []
    owners = []
    for br in sorted(branches, key=lambda b: b.branch_id):
        for step, p in enumerate(br.points):
            if X:
                dist = np.linalg.norm(np.asarray(X) - p.x, axis=1)
                clash = [owners[i] for i in np.flatnonzero(dist < radius)]
                if any(o != br.branch_id for o in clash):
                    continue
            kept.append(ArchivePoint(br.branch_id, step, p))
            X.append(p.x)
            owners.append(br.branch_id)
    return kept


def run(model, config: ContinuationConfig | None = None, x_start=None) -> FrontArchive:
    """Compute the critical set reachable from ``x_start`` (default: origin).

    Returns
    -------
    FrontArchive
        Branches with their termination reasons, the deduplicated point
        list (points closer than ``merge_radius * tau`` to a point of an
        earlier branch are dropped) and its non-dominated subset.
    """
    cfg = config or ContinuationConfig()
    t0 = time.perf_counter()
    runner = _Runner(model, cfg)
    x_start = np.zeros(model.dim) if x_start is None else np.asarray(x_start, dtype=float)
    branches: list[Branch] = []
    components = []
    restart_log = []
    start_cp, seeds = runner.seeds_from_point(x_start, 0)
    next_id = 0
    if not seeds:
        br = Branch(0, 0, None, [start_cp], [(start_cp.active, 0)], "component_end", "no admissible start direction")
        branches.append(br)
        next_id = 1
    next_id = runner.run_component(seeds, branches, next_id)
    components.append(0)
    rng = np.random.default_rng(cfg.seed)
    for r in range(cfg.restarts):
        found = None
        for direction in ("lower_f", "lower_l1"):
            comp_pts = [p for b in branches if b.component == components[-1] for p in b.points]
            all_pts = [p for b in branches for p in b.points]
            found = find_new_component(model, all_pts, cfg, direction, rng, component_points=comp_pts)
            restart_log.append({"restart": r, "direction": direction, "found": found is not None})
            if found is not None:
                break
        if found is None:
            break
        comp = len(components)
        _, seeds = runner.seeds_from_point(found.x, comp)
        if not seeds:
            branches.append(Branch(next_id, comp, None, [found], [(found.active, 0)], "component_end",
                                   "no admissible direction at restart point"))
            next_id += 1
        next_id = runner.run_component(seeds, branches, next_id)
        components.append(comp)
    points = _archive_points(branches, cfg.merge_radius * cfg.tau)
    F = np.array([[p.point.f_value, p.point.l1_value] for p in points]).reshape(-1, 2)
    front = [points[i] for i in sorted(nondominance_filter(F))]
    return FrontArchive(branches, points, front, components, cfg, time.perf_counter() - t0, restart_log)


def start_from_zero(model, config: ContinuationConfig | None = None) -> list[ActivationCandidate]:
    """Admissible first directions at the origin.

    Normally the single index with the largest ``|grad f(0)_j|`` is switched
    on with sign ``-sgn(grad f(0)_j)``; ties are resolved by the kink
    enumeration and a vanishing gradient by the zero-gradient rule.
    """
    cfg = config or ContinuationConfig()
    runner = _Runner(model, cfg)
    cp = runner.critical_point(np.zeros(model.dim))
    H = _curvature_for(model, cfg.hessian_mode, cp.x)(cp.x, cp.gradient)
    adm, _ = runner._dispatch(cp, H, None)
    return adm


# ---------------------------------------------------------------------------
# restarts
# ---------------------------------------------------------------------------
def project_l1_ball(v, radius: float) -> np.ndarray:
    """Euclidean projection onto ``{x : ||x||_1 <= radius}`` (sort-based)."""
    v = np.asarray(v, dtype=float)
    if radius <= 0:
        return np.zeros_like(v)
    a = np.abs(v)
    if a.sum() <= radius:
        return v.copy()
    u = np.sort(a)[::-1]
    css = np.cumsum(u)
    k = np.arange(1, u.size + 1)
    hits = np.nonzero(u * k > css - radius)[0]
    rho = hits[-1] if hits.size else 0  # radius below round-off of the largest entry
    theta = (css[rho] - radius) / (rho + 1.0)
    return np.sign(v) * np.maximum(a - theta, 0.0)


def epsilon_constraint_solve(model, eps: float, x_init, iters: int = 3000, tol: float = 1e-12) -> np.ndarray:
    """Projected gradient for ``min f(x) s.t. ||x||_1 <= eps`` with backtracking."""
    x = project_l1_ball(x_init, eps)
    fx, g = model.value(x), model.gradient(x)
    step = 1.0
    for _ in range(iters):
        while True:
            xn = project_l1_ball(x - step * g, eps)
            dx = xn - x
            fn = model.value(xn)
            if fn <= fx + g @ dx + 0.5 / step * (dx @ dx) + 1e-15 * abs(fx):
                break
            step *= 0.5
            if step < 1e-16:
                return x
        x, fx = xn, fn
        g = model.gradient(x)
        if float(np.linalg.norm(dx)) <= tol * (1.0 + float(np.linalg.norm(x))):
            break
        step *= 2.0
    return x


def _dominated(obj, others, tol=1e-12) -> bool:
    if len(others) == 0:
        return False
    F = np.asarray(others)
    return bool(np.any((F[:, 0] <= obj[0] + tol) & (F[:, 1] <= obj[1] + tol)))


def find_new_component(model, archive_points, config: ContinuationConfig, direction: str = "lower_f",
                       rng=None, component_points=None) -> CriticalPoint | None:
    """Look for a critical point that is not dominated by the archive.

    ``lower_f`` bounds the l1-norm just above the archive's lowest-``f``
    point; ``lower_l1`` bounds it just below the current component's
    smallest l1-norm.  The gap starts at ``config.margin`` and is widened
    by ``restart_growth`` up to ``restart_expansions`` times while nothing
    is found (near a saddle, small gaps cannot leave its basin).  Returns
    None when nothing qualifies.
    """
    rng = np.random.default_rng(config.seed) if rng is None else rng
    margin = config.margin
    for _ in range(config.restart_expansions + 1):
        found = _search_component(model, archive_points, config, direction, rng, component_points, margin)
        if found is not None:
            return found
        margin *= config.restart_growth
    return None


def _search_component(model, archive_points, config, direction, rng, component_points,
                      margin: float) -> CriticalPoint | None:
    """One search at a fixed gap.  Each start is minimized under the bound,
    polished by the corrector and accepted only if it is critical,
    non-dominated and not already in the archive."""
    cfg = config
    pts = list(archive_points)
    if not pts:
        raise ValueError("archive is empty")
    comp = list(component_points) if component_points else pts
    if direction == "lower_f":
        end = min(pts, key=lambda p: (p.f_value, p.l1_value))
        eps = end.l1_value + margin
    elif direction == "lower_l1":
        end = min(comp, key=lambda p: (p.l1_value, p.f_value))
        eps = end.l1_value - margin
        if eps <= 0:
            return None
    else:
        raise ValueError(f"unknown direction {direction!r}")
    objs = [(p.f_value, p.l1_value) for p in pts]
    X = np.array([p.x for p in pts])
    runner = _Runner(model, cfg)
    best = None
    for _ in range(cfg.restart_starts):
        z = rng.standard_normal(model.dim)
        z *= eps * rng.uniform(0.5, 1.0) / max(np.sum(np.abs(z)), 1e-300)
        if cfg.restart_strategy == "weighted_sum":
            from .oracles import weighted_sum_solve
            lam = max(end.alpha2 / end.alpha1, 0.0) * 0.9
            x = weighted_sum_solve(model, lam, z, "prox_grad", cfg.restart_iters).x
        else:
            x = epsilon_constraint_solve(model, eps, z, cfg.restart_iters)
        aset = active_set(x, cfg.eps_zero)
        if aset.n_active == 0:
            continue
        curv = _curvature_for(model, cfg.hessian_mode if cfg.hessian_mode != "sr1" else None, x)
        res = runner._correct(x, aset, x, curv)
        if res is None:
            continue
        cp = runner.critical_point(res.x_c)
        ok, _ = is_pareto_critical(cp.x, cp.gradient, cfg.kkt_tol, cfg.eps_zero, cfg.eps_pa)
        if not ok or cp.active.n_active == 0:
            continue
        if _dominated(cp.objectives, objs):
            continue
        if np.min(np.linalg.norm(X - cp.x, axis=1)) < cfg.merge_radius * cfg.tau:
            continue
        if best is None or cp.objectives < best.objectives:
            best = cp
    return best

"""Acceptance checks, one per criterion.

Each ``criterion_N`` returns ``(passed, detail)``; the pytest wrappers print
a single ``PASS``/``FAIL`` line and then assert.  Wall-clock limits are part
of the check.  Run ``python tests/test_acceptance.py`` for the summary
without pytest, or ``pytest tests/test_acceptance.py -s`` to see the lines
inline (they are also written to the terminal when output is captured).
"""

from __future__ import annotations

import sys
import time

import numpy as np
import pytest

from mocont.activation import enumerate_candidates, filter_candidates
from mocont.cli import build_problem
from mocont.corrector import CorrectorSpec, correct
from mocont.driver import ContinuationConfig, run
from mocont.kkt import ActiveSet, is_pareto_critical, potentially_active_set
from mocont.linalg import fd_gradient_check
from mocont.oracles import (_point_to_polyline, grid_pareto_critical, hausdorff, lasso_homotopy,
                            lp_pareto_critical, uncovered_fraction, weighted_sum_solve,
                            weighted_sum_sweep)
from mocont.problems import make_paper_problem, random_lasso_instance


def _timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def _unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


# ---------------------------------------------------------------------------
# 1. optimality test vs linear program
# ---------------------------------------------------------------------------
BOXES = {"example1": 2, "example2": 3, "example3": 3, "toy4_1": 3, "split": 3}


def _sample_points(name, rng, count=500):
    """Random sparse points, continuation points and slightly perturbed ones."""
    m = make_paper_problem(name)
    n = m.dim
    rand = rng.uniform(-3, 3, size=(count // 2, n)) * (rng.random((count // 2, n)) > 0.4)
    arch = run(m, ContinuationConfig(tau=0.05, max_steps=400))
    path = np.array([p.point.x for p in arch.points])
    on = path[rng.integers(0, len(path), count // 4)]
    near = path[rng.integers(0, len(path), count - count // 2 - count // 4)].copy()
    near += 1e-3 * rng.standard_normal(near.shape) * (near != 0)
    return m, np.vstack([rand, on, near])


def criterion_1():
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    total = dis = crit = 0
    for name in BOXES:
        m, X = _sample_points(name, rng)
        for x in X:
            g = m.gradient(x)
            a = is_pareto_critical(x, g, tol=1e-6, eps_zero=0.0)[0]
            b = lp_pareto_critical(x, g, tol=1e-6)[0]
            total += 1
            crit += a
            dis += a != b
    el = time.perf_counter() - t0
    return dis == 0 and total >= 2500 and el < 10, (f"{dis} disagreements in {total} points "
                                                    f"({crit} critical), {el:.1f}s")


# ---------------------------------------------------------------------------
# 2, 3. kink examples
# ---------------------------------------------------------------------------
X_STAR = np.array([1.0, 0.0, 0.0])


def _kink(name):
    m = make_paper_problem(name)
    g = m.gradient(X_STAR)
    Ap = potentially_active_set(X_STAR, g)
    cands = enumerate_candidates(m, X_STAR, Ap, g)
    adm = filter_candidates(m, X_STAR, cands, Ap, g)
    return m, Ap, cands, adm


def _label(c):
    """Name a candidate as +-v^k with k the bitmask of its subset (v^3 = both)."""
    k = sum(1 << (j - 1) for j in c.subset)
    return f"{'+' if c.sigma > 0 else '-'}v{k}"


def criterion_2():
    (m, Ap, cands, adm), el = _timed(lambda: _kink("example2"))
    expected = {0: [1, 0, 0], 1: [1, 1, 0], 2: [1, 0, 1], 3: [1, 1, 1]}
    err = max(float(np.max(np.abs(c.unit_direction - _unit(expected[sum(1 << (j - 1) for j in c.subset)]))))
              for c in cands if c.sigma == 1)
    labels = sorted(_label(c) for c in adm)
    ok = Ap == (1, 2) and err <= 1e-8 and labels == ["+v3", "-v0"] and el < 1.0
    return ok, f"A_p={{{', '.join(str(j + 1) for j in Ap)}}}, direction error {err:.1e}, admissible {labels}, {el:.2f}s"


def criterion_3():
    t0 = time.perf_counter()
    m, Ap, cands, adm = _kink("example3")
    labels = sorted(_label(c) for c in adm)
    set_ok = labels == sorted(["-v0", "+v1", "+v2"])
    # probe +v1: predict one step along it and correct on its structure
    (v1,) = [c for c in cands if c.subset == (1,) and c.sigma == 1]
    tau = 0.1
    xp = X_STAR + tau * v1.unit_direction
    res = correct(m, CorrectorSpec(xp, v1.structure, X_STAR), raise_on_failure=False)
    probe_ok = res.converged and float(np.linalg.norm(res.x_c - X_STAR)) <= 1e-6
    # the continuation itself leaves x* along -v2 (x1 up, x3 down)
    arch = run(m, ContinuationConfig(tau=tau, max_steps=40))
    br = arch.branches[0]
    (S, idx), = [(s, i) for s, i in br.structures if s.n_active == 2]
    step = br.points[idx + 1].x - br.points[idx].x
    (v2,) = [c for c in cands if c.subset == (2,) and c.sigma == 1]
    follow_ok = S == ActiveSet((0, 2), (1, -1), 3) and float(_unit(step) @ -v2.unit_direction) > 0.99
    el = time.perf_counter() - t0
    ok = set_ok and probe_ok and follow_ok and el < 5
    return ok, (f"admissible {labels} (expected ['+v1', '+v2', '-v0']); probe along +v1 returns to x*: "
                f"{probe_ok} (dist {np.linalg.norm(res.x_c - X_STAR):.1e}); continues along -v2: {follow_ok}; "
                f"{el:.2f}s")


# ---------------------------------------------------------------------------
# 4. toy structure-change points
# ---------------------------------------------------------------------------
TOY_POINTS = np.array([[0, 0, 0.375], [0, 0.25, 83 / 151], [0, 0.25, 0.81],
                       [0, 0, 1.07], [0, 0, 1.93], [0, 0.25, 2.014]])


def criterion_4():
    tau = 0.05
    arch, el = _timed(lambda: run(make_paper_problem("toy4_1"), ContinuationConfig(tau=tau)))
    X = np.array([p.x for b in arch.branches for p in b.points])
    d = [float(np.min(np.linalg.norm(X - p, axis=1))) for p in TOY_POINTS]
    ok = max(d) <= 2 * tau and el < 60
    return ok, f"max distance {max(d):.3f} (limit {2 * tau}), per point {np.round(d, 3).tolist()}, {el:.2f}s"


# ---------------------------------------------------------------------------
# 5. turning points
# ---------------------------------------------------------------------------
def criterion_5():
    arch, el = _timed(lambda: run(make_paper_problem("example1"), ContinuationConfig(tau=0.05)))
    br = max(arch.branches, key=lambda b: len(b.points))
    steps = np.diff(br.x, axis=0)
    inner = np.einsum("ij,ij->i", steps[1:], steps[:-1])
    s = np.sign(np.asarray(br.slopes))
    s = s[s != 0]
    changes = int(np.sum(s[1:] != s[:-1]))
    ok = bool(np.all(inner > 0)) and changes == 2 and el < 30
    return ok, f"min step inner product {inner.min():.2e}, derivative sign changes {changes}, {el:.2f}s"


# ---------------------------------------------------------------------------
# 6. split example
# ---------------------------------------------------------------------------
def criterion_6():
    tau = 0.05
    arch, el = _timed(lambda: run(make_paper_problem("split"), ContinuationConfig(tau=tau)))
    br0 = arch.branches[0]
    split = np.array([0.5, 0.0, 0.0])
    kinks = [k for k in br0.kinks if np.linalg.norm(br0.points[k["index"]].x - split) <= 2 * tau]
    n_adm = max((len(k["admissible"]) for k in kinks), default=0)
    start = max((k["index"] for k in kinks), default=0)
    parts = [br0.objectives[start:]] + [b.objectives for b in arch.branches[1:]]
    dist = max(hausdorff(parts[i], parts[j], polyline=True)
               for i in range(len(parts)) for j in range(i + 1, len(parts)))
    ok = n_adm >= 2 and len(arch.branches) == 3 and dist <= 1e-2 and el < 60
    # the {+1,+2,-3} part ends at l1 = 2.5 + 2 (sqrt(1.5) - 1), the others at 2.5 + sqrt(2) - 1
    gap = 2 * (np.sqrt(1.5) - 1) - (np.sqrt(2) - 1)
    return ok, (f"{n_adm} admissible directions at the split, {len(arch.branches)} branches, "
                f"image Hausdorff {dist:.2e} (analytic end-point gap {gap:.2e}), {el:.2f}s")


# ---------------------------------------------------------------------------
# 7. Lasso homotopy agreement
# ---------------------------------------------------------------------------
def criterion_7():
    tau = 0.05
    t0 = time.perf_counter()
    worst = worst_pts = 0.0
    for seed in range(20):
        n = 2 + seed % 7
        prob = random_lasso_instance(seed, m=20, n=n)
        arch = run(prob, ContinuationConfig(tau=tau))
        ref = lasso_homotopy(prob.A, prob.b).objectives(per_segment=200, scale=prob.scale)
        # both fronts are curves; the point-set value mostly measures the step spacing
        worst = max(worst, hausdorff(arch.objectives("front"), ref, polyline=True))
        worst_pts = max(worst_pts, hausdorff(arch.objectives("front"), ref))
    el = time.perf_counter() - t0
    return worst <= 2 * tau and el < 60, (f"worst curve Hausdorff {worst:.3e} over 20 instances (limit {2 * tau}; "
                                          f"point-set {worst_pts:.3e}), {el:.1f}s")


# ---------------------------------------------------------------------------
# 8. grid oracle
# ---------------------------------------------------------------------------
def _grid_agreement(name, box, res, tau):
    m = make_paper_problem(name)
    arch = run(m, ContinuationConfig(tau=tau))
    grid = grid_pareto_critical(m, box, res)
    G = grid.critical_points
    X = np.array([p.x for b in arch.branches for p in b.points])
    # continuation -> grid: Chebyshev distance of at most one cell
    cheb = max(float(np.min(np.max(np.abs(G - x), axis=1))) for x in X) if len(G) else np.inf
    # grid -> continuation, for nodes inside the visited region
    lo, hi = X.min(axis=0) - res, X.max(axis=0) + res
    inside = G[np.all((G >= lo) & (G <= hi), axis=1)]
    far = 0.0
    segs = [b.x for b in arch.branches]
    for g in inside:
        d = min(_segment_distance(g, S) for S in segs)
        far = max(far, d)
    return cheb, far, len(G), len(inside)


def _segment_distance(p, S):
    if len(S) == 1:
        return float(np.linalg.norm(S[0] - p))
    A, B = S[:-1], S[1:]
    AB = B - A
    L2 = np.maximum(np.sum(AB * AB, axis=1), 1e-300)
    t = np.clip(np.sum((p - A) * AB, axis=1) / L2, 0.0, 1.0)
    return float(np.min(np.linalg.norm(A + t[:, None] * AB - p, axis=1)))


def criterion_8():
    tau = 0.05
    t0 = time.perf_counter()
    r1 = _grid_agreement("example1", [(-2, 1), (-1, 2.5)], 1e-2, tau)
    r2 = _grid_agreement("example2", [(-0.5, 2.5), (-0.5, 1.5), (-0.5, 1.5)], 0.05, tau)
    el = time.perf_counter() - t0
    ok = r1[0] <= 1e-2 + 1e-12 and r2[0] <= 0.05 + 1e-12 and r1[1] <= 2 * tau and r2[1] <= 2 * tau and el < 120
    return ok, (f"example1: cell distance {r1[0]:.3f}, node distance {r1[1]:.3f} ({r1[3]} nodes); "
                f"example2: cell distance {r2[0]:.3f}, node distance {r2[1]:.3f} ({r2[3]} nodes); {el:.1f}s")


# ---------------------------------------------------------------------------
# 9. weighted-sum gap
# ---------------------------------------------------------------------------
def criterion_9():
    t0 = time.perf_counter()
    m = make_paper_problem("toy4_1")
    arch = run(m, ContinuationConfig(tau=0.05))
    lam_max = float(np.max(np.abs(m.gradient(np.zeros(3)))))
    sols = weighted_sum_sweep(m, lam_max * np.logspace(-3, 0, 50), starts=10, seed=0, iters=2000)
    W = np.array([s.objectives for s in sols])
    frac = uncovered_fraction(arch.objectives("front"), W, radius=0.05)
    el = time.perf_counter() - t0
    return frac >= 0.2 and el < 120, f"uncovered fraction {frac:.2f} (threshold 0.20), {len(W)} solves, {el:.1f}s"


# ---------------------------------------------------------------------------
# 10. polynomial scale test
# ---------------------------------------------------------------------------
def criterion_10():
    t0 = time.perf_counter()
    m = make_paper_problem("polynomial", n=1000, seed=7)
    cfg = dict(tau=0.25, max_steps=20000)
    a = run(m, ContinuationConfig(**cfg))
    b = run(make_paper_problem("polynomial", n=1000, seed=7), ContinuationConfig(hessian_mode="sr1", **cfg))
    worst = max(p.point.kkt_residual for arch in (a, b) for p in arch.points)
    dist = hausdorff(a.objectives("front"), b.objectives("front"), polyline=True)
    el = time.perf_counter() - t0
    ok = worst <= 1e-6 and dist <= 1e-2 and el < 600
    return ok, (f"max kkt residual {worst:.1e}, analytic vs SR1 front Hausdorff {dist:.2e}, "
                f"{len(a.points)}/{len(b.points)} points, {el:.0f}s")


# ---------------------------------------------------------------------------
# 11. SINDy
# ---------------------------------------------------------------------------
def _lower_hull_gap(F):
    """Largest vertical gap of the points above their lower convex hull (normalized)."""
    lo, span = F.min(axis=0), np.ptp(F, axis=0)
    span[span == 0] = 1.0
    P = (F - lo) / span
    P = P[np.lexsort((P[:, 0], P[:, 1]))]
    hull = []
    for p in P:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (p[0] - x1) - (x2 - x1) * (p[1] - y1) >= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    H = np.array(hull)
    return float(np.max(P[:, 0] - np.interp(P[:, 1], H[:, 1], H[:, 0])))


def criterion_11():
    t0 = time.perf_counter()
    m = build_problem("sindy", {"steps": 2000, "noise": 1e-3, "seed": 0})
    arch = run(m, ContinuationConfig(tau=0.1, eps_pa=1e-9, max_steps=5000, max_branches=64))
    F = arch.objectives("front")
    F = F[np.argsort(F[:, 1])]
    monotone = bool(np.all(np.diff(F[:, 0]) < 0))
    gap = _lower_hull_gap(F)
    lam_max = float(np.max(np.abs(m.gradient(np.zeros(m.dim)))))
    W = np.array([weighted_sum_solve(m, lam, np.zeros(m.dim), iters=20000).objectives
                  for lam in lam_max * np.logspace(-3, 0, 20)])
    dist = float(np.max(_point_to_polyline(W, F)))
    el = time.perf_counter() - t0
    ok = monotone and gap <= 1e-6 and dist <= 1e-3 and el < 300
    return ok, (f"monotone {monotone}, hull gap {gap:.1e}, weighted-sum distance {dist:.1e} "
                f"({len(F)} front points), {el:.0f}s")


# ---------------------------------------------------------------------------
# 12. MLP
# ---------------------------------------------------------------------------
def criterion_12():
    t0 = time.perf_counter()
    m = build_problem("mlp", {"seed": 0})
    rng = np.random.default_rng(0)
    grad_err = max(fd_gradient_check(m, rng.standard_normal(m.dim)) for _ in range(5))
    arch = run(m, ContinuationConfig(tau=0.1, restarts=3, max_steps=3000))
    worst = max(p.point.kkt_residual for p in arch.points)
    el = time.perf_counter() - t0
    ok = m.dim == 25 and len(arch.components) >= 2 and worst <= 1e-5 and grad_err < 1e-4 and el < 900
    return ok, (f"|W|={m.dim}, {len(arch.components)} components, max kkt residual {worst:.1e}, "
                f"gradient check {grad_err:.1e}, {el:.0f}s")


CRITERIA = {i: globals()[f"criterion_{i}"] for i in range(1, 13)}
SLOW = {10, 11, 12}


def _report(i, ok, detail, stream=None):
    line = f"{'PASS' if ok else 'FAIL'} criterion {i:2d}: {detail}"
    print(line, file=stream or sys.stdout, flush=True)
    return line


@pytest.mark.parametrize("i", [pytest.param(i, marks=pytest.mark.slow) if i in SLOW else i for i in CRITERIA])
def test_criterion(i, capsys):
    ok, detail = CRITERIA[i]()
    with capsys.disabled():
        _report(i, ok, detail, sys.stdout)
    assert ok, detail


if __name__ == "__main__":
    wanted = [int(a) for a in sys.argv[1:]] or list(CRITERIA)
    results = [CRITERIA[i]() for i in wanted]
    for i, (ok, detail) in zip(wanted, results):
        _report(i, ok, detail)
    sys.exit(0 if all(ok for ok, _ in results) else 1)

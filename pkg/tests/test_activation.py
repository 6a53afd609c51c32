import numpy as np
import pytest

from mocont.activation import (decide_deactivation, enumerate_candidates, filter_candidates,
                               gradient_zero_candidates)
from mocont.corrector import CorrectorResult
from mocont.errors import TooManyPotentiallyActive
from mocont.kkt import ActiveSet, potentially_active_set
from mocont.problems import Quadratic, make_paper_problem

X_STAR = np.array([1.0, 0.0, 0.0])


def _unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


def _candidates(name):
    m = make_paper_problem(name)
    Ap = potentially_active_set(X_STAR, m.gradient(X_STAR))
    cands = enumerate_candidates(m, X_STAR, Ap)
    return m, Ap, cands, filter_candidates(m, X_STAR, cands, Ap)


def test_example2_directions_match_after_normalization():
    _, Ap, cands, _ = _candidates("example2")
    assert Ap == (1, 2)
    expected = {(): [1, 0, 0], (1,): [1, 1, 0], (2,): [1, 0, 1], (1, 2): [1, 1, 1]}
    for c in cands:
        if c.sigma == 1:
            np.testing.assert_allclose(c.unit_direction, _unit(expected[c.subset]), atol=1e-8)


def test_example2_admissible_pair():
    _, _, _, adm = _candidates("example2")
    assert [(c.subset, c.sigma) for c in adm] == [((), -1), ((1, 2), 1)]


def test_example3_joint_activation_direction():
    _, _, cands, adm = _candidates("example3")
    (v2,) = [c for c in cands if c.subset == (2,) and c.sigma == 1]
    np.testing.assert_allclose(v2.direction, [-4.5, 0.0, 9.0], atol=1e-12)
    # -v^2 survives the screening; it is the branch the continuation follows
    assert ((2,), -1) in [(c.subset, c.sigma) for c in adm]


def test_arrival_direction_excluded():
    m, Ap, cands, _ = _candidates("example2")
    arrival = (ActiveSet((0,), (1,), 3), np.array([1.0, 0.0, 0.0]))
    adm = filter_candidates(m, X_STAR, cands, Ap, arrival=arrival)
    assert [(c.subset, c.sigma) for c in adm] == [((1, 2), 1)]


def test_too_many_potentially_active():
    m = make_paper_problem("example2")
    with pytest.raises(TooManyPotentiallyActive):
        enumerate_candidates(m, X_STAR, (1, 2), p_max=1)


def test_gradient_zero_screening_on_quadratic():
    # f = (x - c)^T Q (x - c) with minimizer c = (1, 0); the gradient vanishes there
    Q = np.array([[2.0, 0.5], [0.5, 1.0]])
    c = np.array([1.0, 0.0])
    m = Quadratic(c, Q)
    x = c.copy()
    assert np.allclose(m.gradient(x), 0.0)
    cands = gradient_zero_candidates(m, x)
    good = [k for k in cands if k.passes_a and k.passes_b]
    assert good
    for k in good:
        # moving from the minimizer along w must lower the l1 norm
        w = k.direction
        assert np.sign(w[0]) == -1
    # inactive coordinate 2 with either sign is enumerated
    assert {k.structure for k in cands} >= {ActiveSet((0,), (1,), 2), ActiveSet((0, 1), (1, 1), 2),
                                             ActiveSet((0, 1), (1, -1), 2)}


def test_gradient_zero_identity_quadratic_leaves_along_one_segment():
    # near c = (1, 0) the critical set of ||x - c||^2 is {(t, 0)}: both sign
    # patterns of the inactive index are enumerated and both are rejected
    m = Quadratic([1.0, 0.0])
    cands = gradient_zero_candidates(m, np.array([1.0, 0.0]))
    assert len({k.structure for k in cands}) == 3
    good = [k for k in cands if k.passes_a and k.passes_b]
    assert [(k.structure, k.sigma) for k in good] == [(ActiveSet((0,), (1,), 2), -1)]


def test_decide_deactivation():
    S = ActiveSet((0, 1), (1, 1), 3)
    ok = CorrectorResult(np.array([0.5, 0.0, 0.0]), True, 3, 0.0, 0.0)
    d = decide_deactivation(ok, S)
    assert d.kind == "kink" and d.zeroed == (1,) and d.structure == ActiveSet((0,), (1,), 3)
    ok.x_c = np.array([0.5, 0.2, 0.0])
    assert decide_deactivation(ok, S).kind == "continue"
    bad = CorrectorResult(np.array([0.5, 0.2, 0.0]), False, 100, 1.0, 1.0)
    assert decide_deactivation(bad, S).kind == "retry"

import numpy as np
import pytest

from mocont.corrector import (CorrectorOptions, CorrectorSpec, _regularized_gradient, correct,
                              retreat)
from mocont.errors import NotConverged
from mocont.kkt import ActiveSet, criticality_residual
from mocont.problems import make_paper_problem

ONE = ActiveSet((0,), (1,), 3)


@pytest.fixture
def example2():
    return make_paper_problem("example2")


def test_projects_back_to_kink(example2):
    r = correct(example2, CorrectorSpec(np.array([1.2, 0.0, 0.0]), ONE))
    assert r.converged
    np.testing.assert_allclose(r.x_c, [1.0, 0.0, 0.0], atol=1e-9)


def test_critical_start_is_a_fixed_point(example2):
    x = np.array([0.9, 0.0, 0.0])
    r = correct(example2, CorrectorSpec(x, ONE))
    assert r.converged
    np.testing.assert_allclose(r.x_c, x, atol=1e-10)
    assert r.criticality_residual < 1e-9


def test_full_structure_lands_on_critical_segment(example2):
    S = ActiveSet((0, 1, 2), (1, 1, 1), 3)
    r = correct(example2, CorrectorSpec(np.array([1.2, 0.1, 0.1]), S))
    assert r.converged
    x = r.x_c
    # the critical set on this structure is the segment (1,0,0) + t (1,1,1)
    np.testing.assert_allclose(x - x[0] + 1.0, [1.0, 0.0, 0.0], atol=1e-8)
    assert criticality_residual(x, example2.gradient(x)) < 1e-8


def test_stationary_start_exits_immediately():
    m = make_paper_problem("example2")
    r = correct(m, CorrectorSpec(np.array([2.0, 1.0, 1.0]), ActiveSet((0, 1, 2), (1, 1, 1), 3)))
    assert r.converged and r.iterations <= 1
    np.testing.assert_allclose(r.x_c, [2.0, 1.0, 1.0])


def test_failure_raises_or_reports(example2):
    opts = CorrectorOptions(max_iter=1, retreat_max=0)
    spec = CorrectorSpec(np.array([1.9, 0.3, 0.0]), ActiveSet((0, 1), (1, 1), 3))
    r = correct(example2, spec, opts, raise_on_failure=False)
    assert not r.converged and "maximum iterations" in r.message
    with pytest.raises(NotConverged):
        correct(example2, spec, opts)


def test_retreat():
    np.testing.assert_allclose(retreat([0.0, 0.0], [2.0, 4.0]), [1.0, 2.0])
    np.testing.assert_allclose(retreat([0.0], [2.0], 1.0), [0.0])
    with pytest.raises(ValueError):
        retreat([0.0], [1.0], 0.0)


def test_regularized_gradient():
    out = _regularized_gradient(np.array([-3.0, 0.0, 1e-12]), np.array([1.0, 1.0, -1.0]))
    np.testing.assert_allclose(out, [-3.0, -3.0, 3.0])
    np.testing.assert_allclose(_regularized_gradient(np.zeros(2), np.array([1.0, -1.0])), [-1.0, 1.0])

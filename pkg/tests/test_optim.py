import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gapinn.optim import AdamState, NumericError, adam_step, minibatch_indices


def test_zero_gradient():
    st0 = AdamState.zeros(3, 1e-3)
    p = np.array([1.0, 2.0, 3.0])
    st1, p1 = adam_step(st0, p, np.zeros(3))
    assert st1.t == 1 and np.array_equal(p1, p)


def test_first_and_second_step_size():
    st0 = AdamState.zeros(1, 1e-3)
    st1, p1 = adam_step(st0, np.zeros(1), np.ones(1))
    assert p1[0] == pytest.approx(-0.001 / (1 + 1e-8), rel=1e-12)
    _, p2 = adam_step(st1, p1, np.ones(1))
    assert abs(p2[0] - p1[0]) == pytest.approx(0.001, rel=1e-6)


def test_non_finite_names_index():
    with pytest.raises(NumericError, match="index 2"):
        adam_step(AdamState.zeros(3, 1e-3), np.zeros(3), np.array([0.0, 1.0, np.nan]))


def test_shape_mismatch_and_bad_lr():
    with pytest.raises(ValueError):
        adam_step(AdamState.zeros(2, 1e-3), np.zeros(3), np.zeros(3))
    with pytest.raises(ValueError):
        AdamState.zeros(2, 0.0)


def test_converges_on_square():
    st0, th = AdamState.zeros(1, 1e-3), np.ones(1)
    for k in range(2000):
        st0, th = adam_step(st0, th, 2 * th)
        if abs(th[0]) < 0.1:
            break
    assert abs(th[0]) < 0.1


@given(st.lists(st.floats(-100, 100), min_size=1, max_size=8))
def test_first_step_descends(g):
    g = np.array(g)
    st0 = AdamState.zeros(len(g), 1e-3)
    st1, p = adam_step(st0, np.zeros(len(g)), g)
    assert np.dot(p, g) <= 0
    assert np.all(st1.v >= 0) and st1.t == 1


def test_minibatch_examples():
    np.testing.assert_array_equal(minibatch_indices(3, 256, 0, 0), [0, 1, 2])
    idx = minibatch_indices(1000, 256, 0, 5)
    assert len(idx) == 256 == len(set(idx.tolist()))
    assert np.array_equal(idx, minibatch_indices(1000, 256, 0, 5))
    assert not np.array_equal(idx, minibatch_indices(1000, 256, 0, 6))
    with pytest.raises(ValueError):
        minibatch_indices(0, 4, 0, 0)
    with pytest.raises(ValueError):
        minibatch_indices(4, 0, 0, 0)

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gapinn import autodiff as ad
from gapinn.autodiff import Dual2Scalar, GradTape, StateError

from .helpers import central_fd

reals = st.floats(-2.0, 2.0, allow_nan=False)


def test_lift_seeded_examples():
    assert [d.astuple() for d in ad.lift_seeded([0.3, 0.7], 0)] == [(0.3, 1.0, 0.0), (0.7, 0.0, 0.0)]
    assert [d.astuple() for d in ad.lift_seeded([5.0], 0)] == [(5.0, 1.0, 0.0)]
    assert [d.astuple() for d in ad.lift_seeded([1, 2, 3], 2)] == [(1, 0, 0), (2, 0, 0), (3, 1, 0)]


def test_lift_seeded_out_of_range():
    with pytest.raises(IndexError):
        ad.lift_seeded([1.0, 2.0], 2)
    with pytest.raises(IndexError):
        ad.lift_seeded([1.0], -1)


def test_dual_tanh_examples():
    assert ad.dual_tanh(Dual2Scalar(0.0, 1.0, 0.0)).astuple() == (0.0, 1.0, 0.0)
    out = ad.dual_tanh(Dual2Scalar(1.0, 1.0, 0.0))
    np.testing.assert_allclose(out.astuple(), (0.761594, 0.419974, -0.639700), atol=1e-6)
    c = ad.dual_tanh(Dual2Scalar.constant(0.4))
    assert c.astuple() == (np.tanh(0.4), 0.0, 0.0)


def test_dual_tanh_matches_fd_oracle():
    # independent check of the frozen values above
    h = 1e-4
    d1 = (np.tanh(1 + h) - np.tanh(1 - h)) / (2 * h)
    d2 = (np.tanh(1 + h) - 2 * np.tanh(1) + np.tanh(1 - h)) / h ** 2
    out = ad.dual_tanh(Dual2Scalar(1.0, 1.0, 0.0))
    assert abs(out.d1 - d1) < 1e-7 and abs(out.d2 - d2) < 1e-6


def test_product_rule_invariant():
    a, b = Dual2Scalar(1.5, 0.3, -0.7), Dual2Scalar(-2.0, 1.1, 0.4)
    p = a * b
    assert p.d2 == pytest.approx(a.d2 * b.val + 2 * a.d1 * b.d1 + a.val * b.d2)


def _fd_check(fn, x, tol1=1e-7, tol2=1e-5):
    out = fn(Dual2Scalar(x, 1.0, 0.0))
    h1, h2 = 1e-5, 1e-4
    d1 = (fn(x + h1) - fn(x - h1)) / (2 * h1)
    d2 = (fn(x + h2) - 2 * fn(x) + fn(x - h2)) / h2 ** 2
    assert out.val == pytest.approx(fn(x), rel=1e-14, abs=1e-14)
    assert abs(out.d1 - d1) <= tol1 * max(1.0, abs(d1))
    assert abs(out.d2 - d2) <= tol2 * max(1.0, abs(d2))


PRIMITIVES = {
    "add": lambda a: a + 0.7 + a,
    "mul": lambda a: a * (a + 1.3) * 0.5,
    "div": lambda a: (a + 0.1) / (a * a + 1.0),
    "tanh": ad.tanh,
    "sin": ad.sin,
    "cos": ad.cos,
    "exp": ad.exp,
    "square": lambda a: a.square() if isinstance(a, Dual2Scalar) else a * a,
    "affine": lambda a: ad.dual_affine([0.3, -1.2], [a, a * a], 0.25),
    "sigmoid": lambda a: ad.dual_sigmoid(a) if isinstance(a, Dual2Scalar) else 1 / (1 + np.exp(-a)),
}


@pytest.mark.parametrize("name", sorted(PRIMITIVES))
@given(x=reals)
def test_primitive_derivatives_match_fd(name, x):
    _fd_check(PRIMITIVES[name], x)


def test_primitives_at_100_random_points():
    rng = np.random.default_rng(0)
    for name, fn in PRIMITIVES.items():
        for x in rng.uniform(-2, 2, 100):
            _fd_check(fn, float(x))


def test_reverse_gradient_examples():
    t = GradTape()
    w = t.param([3.0])
    t.set_output(t.sum(w * w))
    np.testing.assert_array_equal(ad.reverse_gradient(t), [6.0])

    t = GradTape()
    w = t.param([2.0, 5.0])
    t.set_output(w[0] * w[1])
    np.testing.assert_array_equal(t.gradient(), [5.0, 2.0])


def test_gradient_without_output_is_state_error():
    t = GradTape()
    t.param([1.0])
    with pytest.raises(StateError):
        t.gradient()


def _composed(t, w):
    a = t.tanh(w * 0.7) + t.sin(w)
    b = t.exp(w * -0.3) / (w * w + 1.0)
    return t.sum(t.cos(a) * b) + t.mean(a * a)


@given(st.lists(reals, min_size=1, max_size=6))
def test_reverse_gradient_matches_fd(vals):
    theta = np.array(vals)

    def f(th):
        t = GradTape()
        return float(_composed(t, t.param(th)).value)

    t = GradTape()
    out = _composed(t, t.param(theta))
    t.set_output(out)
    g = t.gradient()
    fd = central_fd(f, theta)
    assert np.all(np.abs(g - fd) <= 1e-6 * np.maximum(1.0, np.abs(fd)))


def test_tape_replay_bit_identical():
    rng = np.random.default_rng(3)
    theta = rng.normal(size=5)
    grads = []
    for _ in range(2):
        t = GradTape()
        t.set_output(_composed(t, t.param(theta)))
        grads.append(t.gradient())
    assert grads[0].tobytes() == grads[1].tobytes()


def test_dual_payload_gradient_matches_fd():
    # gradient through affine + activation on a stacked Dual2 payload
    rng = np.random.default_rng(1)
    x = rng.uniform(-1, 1, (7, 2))
    W0 = rng.normal(size=(2, 3))
    b0 = rng.normal(size=3)

    def loss(Wf, tape=None):
        t = tape or GradTape()
        W = t.param(Wf) if tape is not None else t.const(Wf)
        h = t.dual_activation(t.affine(t.lift(x, (0, 1)), t.slice_reshape(W, 0, 6, (2, 3)),
                                       t.slice_reshape(W, 6, 9, (3,))), "tanh")
        d2 = t.part(h, "d2")
        d1 = t.part(h, "d1")
        v = t.part(h, "val")
        return t.sum(d2 * d2) + t.sum(d1 * v) + t.mean(v)

    theta = np.concatenate([W0.ravel(), b0])
    t = GradTape()
    t.set_output(loss(theta, t))
    g = t.gradient()
    fd = central_fd(lambda th: float(loss(th).value), theta)
    np.testing.assert_allclose(g, fd, rtol=1e-6, atol=1e-8)


def test_set_output_rejects_non_scalar():
    t = GradTape()
    w = t.param([1.0, 2.0])
    with pytest.raises(ValueError):
        t.set_output(w)

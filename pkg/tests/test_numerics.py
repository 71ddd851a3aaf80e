import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from rsman.numerics import (
    GradCheckReport,
    Param,
    affine,
    affine_backward,
    grad_check,
    logsumexp,
    logsumexp_backward,
    sigmoid,
    sigmoid_backward,
    softmax,
    softmax_backward,
)

finite_floats = st.floats(min_value=-50, max_value=50, allow_nan=False)


def central_diff(f, x, i, h=1e-5):
    """Independent finite-difference oracle used throughout this module."""
    x = np.array(x, dtype=np.float64)
    xp, xm = x.copy(), x.copy()
    xp.flat[i] += h
    xm.flat[i] -= h
    return (f(xp) - f(xm)) / (2 * h)


# ----------------------------------------------------------------- affine

def test_affine_identity():
    x = np.array([1.5, -2.0, 3.0])
    out = affine(x, np.eye(3), np.zeros(3))
    np.testing.assert_array_equal(out, x)


def test_affine_zero_input():
    W = np.arange(6.0).reshape(2, 3)
    b = np.array([7.0, -1.0])
    np.testing.assert_array_equal(affine(np.zeros(3), W, b), b)


def test_affine_shape_mismatch():
    with pytest.raises(ValueError):
        affine(np.zeros(4), np.eye(3), np.zeros(3))
    with pytest.raises(ValueError):
        affine_backward(np.zeros(4), np.zeros(3), np.eye(3))


def test_affine_gradients_match_central_differences(rng):
    W = rng.normal(size=(3, 2))
    b = rng.normal(size=3)
    x = rng.normal(size=2)
    u = rng.normal(size=3)  # upstream of a scalar loss u . affine(x, W, b)
    dx, dW, db = affine_backward(u, x, W)

    def loss_wrt(pack):
        def f(v):
            xx, WW, bb = x, W, b
            if pack == "x":
                xx = v
            elif pack == "W":
                WW = v.reshape(3, 2)
            else:
                bb = v
            return float(u @ affine(xx, WW, bb))
        return f

    for name, val, grad in (("x", x, dx), ("W", W, dW), ("b", b, db)):
        f = loss_wrt(name)
        for i in range(val.size):
            num = central_diff(f, val, i)
            assert abs(num - grad.flat[i]) / max(1.0, abs(num)) < 1e-6


# ---------------------------------------------------------------- softmax

@pytest.mark.parametrize("c", [0.0, -3.0, 17.5])
def test_softmax_symmetry(c):
    out = softmax(np.array([c, c, c]))
    np.testing.assert_allclose(out, [1 / 3, 1 / 3, 1 / 3], rtol=0, atol=1e-15)


def test_softmax_single_element():
    np.testing.assert_array_equal(softmax(np.array([42.0])), [1.0])


def test_softmax_known_values():
    # softmax(0, ln 3) = (1, 3) / 4
    out = softmax(np.array([0.0, math.log(3.0)]))
    np.testing.assert_allclose(out, [0.25, 0.75], rtol=0, atol=1e-15)


def test_softmax_empty_and_nonfinite():
    with pytest.raises(ValueError):
        softmax(np.array([]))
    with pytest.raises(ValueError):
        softmax(np.array([1.0, np.inf]))


@settings(max_examples=200)
@given(arrays(np.float64, st.integers(1, 8), elements=finite_floats))
def test_softmax_properties(x):
    out = softmax(x)
    assert np.all(out >= 0.0) and np.all(out <= 1.0)
    assert abs(out.sum() - 1.0) <= 1e-12
    shifted = softmax(x + 3.71)
    np.testing.assert_allclose(shifted, out, rtol=0, atol=1e-12)


def test_softmax_backward_matches_central_differences(rng):
    x = rng.normal(size=5)
    u = rng.normal(size=5)
    out = softmax(x)
    ds = softmax_backward(u, out)
    f = lambda v: float(u @ softmax(v))
    for i in range(5):
        assert abs(central_diff(f, x, i) - ds[i]) < 1e-8


# ---------------------------------------------------------------- sigmoid

def test_sigmoid_values():
    assert sigmoid(0.0) == 0.5
    assert abs(sigmoid(1.0) - 0.7310585786300049) < 1e-15


@pytest.mark.parametrize("z", [0.3, -2.5, 7.0])
def test_sigmoid_symmetry(z):
    assert abs(sigmoid(-z) - (1.0 - sigmoid(z))) < 1e-15


def test_sigmoid_extreme_inputs_do_not_overflow():
    assert sigmoid(1000.0) == 1.0  # saturated but finite
    assert sigmoid(-1000.0) == 0.0
    arr = sigmoid(np.array([-800.0, 0.0, 800.0]))
    assert np.all(np.isfinite(arr))


def test_sigmoid_backward(rng):
    z = rng.normal(size=4)
    out = sigmoid(z)
    dz = sigmoid_backward(np.ones(4), out)
    f = lambda v: float(sigmoid(v).sum())
    for i in range(4):
        assert abs(central_diff(f, z, i) - dz[i]) < 1e-8


# -------------------------------------------------------------- logsumexp

def test_logsumexp_single():
    assert logsumexp(np.array([3.25])) == 3.25


def test_logsumexp_pair_closed_form():
    v = -1.7
    assert abs(logsumexp(np.array([v, v])) - (v + math.log(2))) < 1e-14


def test_logsumexp_large_values_stable():
    out = logsumexp(np.array([1000.0, 1000.0]))
    assert abs(out - (1000.0 + math.log(2))) < 1e-12


def test_logsumexp_empty():
    with pytest.raises(ValueError):
        logsumexp(np.array([]))


@settings(max_examples=200)
@given(arrays(np.float64, st.integers(1, 8), elements=finite_floats))
def test_logsumexp_bounds(x):
    out = logsumexp(x)
    assert out >= x.max() - 1e-12
    assert out <= x.max() + math.log(len(x)) + 1e-12


def test_logsumexp_backward(rng):
    x = rng.normal(size=6)
    out = logsumexp(x)
    dx = logsumexp_backward(1.0, x, out)
    np.testing.assert_allclose(dx, softmax(x), atol=1e-12)
    f = lambda v: logsumexp(v)
    for i in range(6):
        assert abs(central_diff(f, x, i) - dx[i]) < 1e-8


# -------------------------------------------------------------- grad_check

def test_param_shape_guard():
    with pytest.raises(ValueError):
        Param(np.zeros((2, 2)), grad=np.zeros(3))


def test_param_zero_grad():
    p = Param(np.ones((2, 2)))
    p.grad += 5.0
    p.zero_grad()
    assert np.all(p.grad == 0.0)


def test_grad_check_constant_function():
    params = {"p": Param(np.array([1.0, -2.0]))}

    def f():
        params["p"].zero_grad()
        return 3.0

    report = grad_check(f, params, step=1e-5, tolerance=1e-8)
    assert isinstance(report, GradCheckReport)
    assert report.max_error == 0.0
    assert report.passed


def test_grad_check_quadratic_closed_form(rng):
    params = {"p": Param(rng.normal(size=(3, 2)))}

    def f():
        p = params["p"]
        p.zero_grad()
        p.grad += p.value  # d(0.5 ||p||^2) = p
        return 0.5 * float((p.value**2).sum())

    report = grad_check(f, params, step=1e-5, tolerance=1e-8)
    assert report.passed, report.summary()


def test_grad_check_detects_wrong_gradient():
    params = {"p": Param(np.array([1.0, 2.0]))}

    def f():
        p = params["p"]
        p.zero_grad()
        p.grad += 2.0 * p.value  # wrong: claims d(0.5||p||^2) = 2p
        return 0.5 * float((p.value**2).sum())

    report = grad_check(f, params, step=1e-5, tolerance=1e-4)
    assert not report.passed
    assert report.worst_param == "p"


def test_grad_check_restores_values_and_grads(rng):
    p = Param(rng.normal(size=4))
    params = {"p": p}

    def f():
        p.zero_grad()
        p.grad += p.value
        return 0.5 * float((p.value**2).sum())

    before = p.value.copy()
    f()
    analytic = p.grad.copy()
    grad_check(f, params)
    np.testing.assert_array_equal(p.value, before)
    np.testing.assert_array_equal(p.grad, analytic)


def test_grad_check_rejects_nonfinite_loss():
    params = {"p": Param(np.zeros(1))}
    with pytest.raises(ValueError):
        grad_check(lambda: float("nan"), params)

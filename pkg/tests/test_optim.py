import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from popsyn import RmsProp
from popsyn.errors import ShapeMismatchError


def test_two_steps_match_hand_computation():
    """Constant gradient 1.0 from a zero start, default hyperparameters.

    step 1: acc = 0.1,  p -= lr / (sqrt(0.10) + eps)
    step 2: acc = 0.19, p -= lr / (sqrt(0.19) + eps)
    """
    lr, eps = 0.001, 1e-8
    p = np.zeros(1)
    opt = RmsProp(learning_rate=lr)
    opt.step([p], [np.ones(1)])
    expect1 = -lr / (math.sqrt(0.1) + eps)
    assert p[0] == pytest.approx(expect1, abs=1e-15)
    opt.step([p], [np.ones(1)])
    expect2 = expect1 - lr / (math.sqrt(0.19) + eps)
    assert p[0] == pytest.approx(expect2, abs=1e-15)


def test_grads_zeroed_after_step():
    p = np.ones((3, 2))
    g = np.full((3, 2), 0.5)
    RmsProp().step([p], [g])
    assert np.all(g == 0.0)


def test_zero_gradient_leaves_params_unchanged():
    p = np.full(4, 2.5)
    opt = RmsProp()
    opt.step([p], [np.zeros(4)])
    assert np.array_equal(p, np.full(4, 2.5))


def test_updates_multiple_arrays_independently():
    w = np.zeros((2, 2))
    b = np.zeros(2)
    opt = RmsProp(learning_rate=0.01)
    opt.step([w, b], [np.ones((2, 2)), np.zeros(2)])
    assert np.all(w < 0.0)
    assert np.array_equal(b, np.zeros(2))


def test_shape_mismatch_rejected():
    opt = RmsProp()
    opt.step([np.zeros(3)], [np.zeros(3)])
    with pytest.raises(ShapeMismatchError):
        opt.step([np.zeros(4)], [np.zeros(4)])


@pytest.mark.parametrize("kwargs", [
    {"learning_rate": 0.0},
    {"learning_rate": -1.0},
    {"decay": 0.0},
    {"decay": 1.0},
    {"eps": 0.0},
])
def test_invalid_hyperparameters_rejected(kwargs):
    with pytest.raises(ValueError):
        RmsProp(**kwargs)


@given(st.floats(min_value=1e-3, max_value=1e3),
       st.sampled_from([-1.0, 1.0]))
def test_first_step_size_independent_of_gradient_scale(magnitude, sign):
    # acc = 0.1 g^2, so the first update is -lr * sign(g) / sqrt(0.1) + O(eps)
    g = sign * magnitude
    p = np.zeros(1)
    RmsProp(learning_rate=0.001).step([p], [np.array([g])])
    assert p[0] == pytest.approx(-0.001 * sign / math.sqrt(0.1), rel=1e-4)

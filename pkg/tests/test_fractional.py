import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mfodbo.core import SearchSpace, UsageError
from mfodbo.fractional import HistoryBuffer, fo_roll_update, gl_coefficients

WIDE = SearchSpace.uniform(1, -100, 100)


def gamma_weights(delta, m):
    # weights[k-1] = |(-1)^k Gamma(delta+1) / (Gamma(k+1) Gamma(delta-k+1))|, via the reflection formula
    out = []
    for k in range(1, m + 1):
        if delta == 1.0:
            out.append(1.0 if k == 1 else 0.0)
            continue
        # Gamma(delta-k+1) is finite and non-zero for non-integer delta
        g = math.gamma(delta + 1) / (math.gamma(k + 1) * math.gamma(delta - k + 1))
        out.append(abs(g))
    return np.array(out)


def test_delta_one_is_first_difference():
    assert gl_coefficients(1.0, 4).weights.tolist() == [1.0, 0.0, 0.0, 0.0]


def test_default_weights():
    np.testing.assert_allclose(gl_coefficients(0.1, 4).weights, [0.1, 0.045, 0.0285, 0.0206625], atol=1e-12)
    assert gl_coefficients(0.1, 4).weights.sum() == pytest.approx(0.1941625, abs=1e-12)


def test_half_order_two_terms():
    np.testing.assert_allclose(gl_coefficients(0.5, 2).weights, [0.5, 0.125], atol=1e-15)


@pytest.mark.parametrize("delta", [round(0.1 * k, 1) for k in range(1, 11)])
def test_weights_match_gamma_evaluation(delta):
    for m in (1, 5, 12, 20):
        np.testing.assert_allclose(gl_coefficients(delta, m).weights, gamma_weights(delta, m), rtol=1e-12, atol=1e-12)


@given(st.floats(1e-3, 1.0), st.integers(1, 40))
def test_weights_non_negative(delta, m):
    w = gl_coefficients(delta, m).weights
    assert np.all(w >= 0) and w[0] == delta


@pytest.mark.parametrize("delta", [0.0, -0.2, 1.5])
def test_delta_out_of_range(delta):
    with pytest.raises(UsageError):
        gl_coefficients(delta, 4)


def test_memory_depth_validation():
    with pytest.raises(UsageError):
        gl_coefficients(0.5, 0)


def test_fo_roll_single_memory_term():
    c = gl_coefficients(0.1, 4)
    hist = np.array([[1.0], [0.0], [0.0], [0.0]])
    out = fo_roll_update(hist, np.array([0.0]), np.array([1.0]), c, 1.0, 0.1, 0.3, WIDE)
    assert out[0] == pytest.approx(0.1, abs=1e-15)


def test_fo_roll_full_example():
    c = gl_coefficients(0.1, 4)
    hist = np.array([[2.0], [1.0], [1.0], [1.0]])
    out = fo_roll_update(hist, np.array([1.0]), np.array([5.0]), c, 1.0, 0.1, 0.3, WIDE)
    assert out[0] == pytest.approx(1.2941625, abs=1e-12)


@given(st.lists(st.floats(-50, 50), min_size=8, max_size=8), st.sampled_from([1.0, -1.0]))
def test_fo_roll_unit_order_equals_classic(vals, alpha):
    from mfodbo import _backend

    hist = np.array(vals[:4]).reshape(4, 1).repeat(2, axis=1)
    xprev, worst = np.array(vals[4:6]), np.array(vals[6:8])
    space = SearchSpace.uniform(2, -100, 100)
    fo = fo_roll_update(hist, xprev, worst, gl_coefficients(1.0, 4), alpha, 0.1, 0.3, space)
    classic = _backend.kernels.roll(np.ascontiguousarray(hist[0]), xprev, worst, alpha * 0.1, 0.3, space.lower, space.upper)
    assert np.array_equal(fo, classic)


def test_fo_roll_shape_check():
    with pytest.raises(UsageError):
        fo_roll_update(np.zeros((2, 1)), np.zeros(1), np.zeros(1), gl_coefficients(0.1, 4), 1, 0.1, 0.3, WIDE)


def test_history_buffer_warmup_and_push():
    h = HistoryBuffer(np.array([[1.0, 2.0], [3.0, 4.0]]), 4)
    assert h.data.shape == (2, 4, 2)
    assert np.all(h[0] == [1.0, 2.0])
    h.push(0, np.array([9.0, 9.0]))
    assert h.current(0).tolist() == [9.0, 9.0]
    assert h.previous(0).tolist() == [1.0, 2.0]
    assert h[1].tolist() == [[3.0, 4.0]] * 4
    for k in range(5):
        h.push(0, np.full(2, float(k)))
    assert h[0][:, 0].tolist() == [4.0, 3.0, 2.0, 1.0]

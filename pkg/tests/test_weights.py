import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tmdecomp.weights import (PAPER_S1A, WeightSpec, build_weights, default_s1a,
                              positions_from_periods, uniform_weights, v)


def independent_beta(spec):
    """Plain-Python summation of the unscaled profile."""
    T = spec.T
    s1 = set(spec.s1a) | {T - t + 2 for t in spec.s1a}
    total = 0.0
    for t in range(1, T + 1):
        if t < T / 2 + 1:
            w = spec.amplitude * math.exp(-(t - 1) / spec.decay_scale) + spec.offset
        else:
            w = spec.amplitude * math.exp(-(T - t + 1) / spec.decay_scale) + spec.offset
        if t in s1:
            w += spec.rho
        total += w * w
    return math.sqrt(T / total)


def test_v_values():
    spec = WeightSpec(2016)
    assert v(1, spec) == 5.0
    assert v(201, spec) == pytest.approx(4 * math.exp(-1) + 1, rel=1e-15)
    assert v(201, spec) == pytest.approx(2.4715, abs=5e-5)


def test_v_mirror_and_monotone():
    spec = WeightSpec(2016)
    t = np.arange(2, 2017)
    np.testing.assert_allclose(v(t, spec), v(2016 - t + 2, spec), rtol=1e-15)
    lower = v(np.linspace(1, 1009, 500), spec)
    assert np.all(np.diff(lower) <= 0)
    with pytest.raises(ValueError):
        v(0.5, spec)
    with pytest.raises(ValueError):
        v(2017, spec)


def test_paper_beta():
    w = build_weights(WeightSpec(2016))
    assert w.spec.s1a == PAPER_S1A
    assert w.beta == pytest.approx(0.4832, abs=5e-5)
    assert w.beta == pytest.approx(independent_beta(w.spec), rel=1e-12)
    assert np.sum(w.c ** 2) == pytest.approx(2016, rel=1e-9)


def test_flat_profile_gives_unit_weights():
    w = build_weights(WeightSpec(64, s1a=(), amplitude=0.0, offset=1.0))
    assert w.beta == 1.0
    assert w.is_uniform


def test_penalized_positions_stand_out():
    w = build_weights(WeightSpec(2016))
    for t in w.spec.s1:
        assert w.c[t - 1] > w.c[t - 2]
        assert w.c[t - 1] > w.c[t]


def test_uniform_weights():
    w = uniform_weights(4)
    np.testing.assert_array_equal(w.c, [1, 1, 1, 1])
    assert np.sum(w.c ** 2) == 4


def test_invalid_positions():
    with pytest.raises(ValueError):
        WeightSpec(2016, s1a=(1,))
    with pytest.raises(ValueError):
        WeightSpec(2016, s1a=(1010,))
    with pytest.raises(ValueError):
        WeightSpec(2016, rho=0)


def test_positions_from_periods():
    assert positions_from_periods([24, 12, 6, 3, 1.5, 1], 2016, 300) == PAPER_S1A
    with pytest.raises(ValueError):
        positions_from_periods([5.0], 2016, 300)  # 2016*300/18000 + 1 = 34.6
    assert default_s1a(4032, 300) == (15, 29, 57, 113, 225, 337)


def test_empty_s1a_profile_is_monotone_symmetric():
    w = build_weights(WeightSpec(300, s1a=()))
    half = w.c[:151]
    assert np.all(np.diff(half) <= 0)
    assert w.is_symmetric()


@settings(max_examples=60, deadline=None)
@given(T=st.integers(4, 3000), rho=st.floats(0.1, 10), decay=st.floats(1, 500),
       amp=st.floats(0, 10), offset=st.floats(0.1, 5), data=st.data())
def test_weight_invariants(T, rho, decay, amp, offset, data):
    hi = T // 2 + 1
    s1a = tuple(data.draw(st.sets(st.integers(2, hi), max_size=6)))
    spec = WeightSpec(T, s1a=s1a, rho=rho, decay_scale=decay, amplitude=amp, offset=offset)
    w = build_weights(spec)
    assert np.all(w.c > 0)
    assert np.sum(w.c ** 2) == pytest.approx(T, rel=1e-9)
    assert w.is_symmetric()
    assert w.beta == pytest.approx(independent_beta(spec), rel=1e-9)

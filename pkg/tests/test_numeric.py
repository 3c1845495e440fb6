"""Tests for compensated summation and double-double angle reduction."""

from __future__ import annotations

import math
from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from blochclock.numeric import (
    neumaier_sum,
    reduce_two_pi,
    reduce_two_pi_array,
    two_prod,
    two_sum,
)

FINITE = st.floats(
    allow_nan=False, allow_infinity=False, min_value=-1e150, max_value=1e150
)
# two_prod is exact only while neither the product nor its rounding error
# underflows, which is the regime double-double reduction actually uses.
NORMAL = st.one_of(
    st.just(0.0),
    st.floats(min_value=1e-100, max_value=1e100),
    st.floats(min_value=-1e100, max_value=-1e-100),
)


def _mp_reduce(x: float) -> float:
    """Arbitrary-precision reduction of x into (-pi, pi]."""
    with mp.workdps(60):
        r = mp.fmod(mp.mpf(x), 2 * mp.pi)
        if r > mp.pi:
            r -= 2 * mp.pi
        elif r <= -mp.pi:
            r += 2 * mp.pi
        return float(r)


@given(FINITE, FINITE)
def test_two_sum_is_exact(a: float, b: float) -> None:
    s, err = two_sum(a, b)
    assert Fraction(s) + Fraction(err) == Fraction(a) + Fraction(b)


@given(NORMAL, NORMAL)
def test_two_prod_is_exact(a: float, b: float) -> None:
    p, err = two_prod(a, b)
    assert Fraction(p) + Fraction(err) == Fraction(a) * Fraction(b)


@pytest.mark.parametrize("magnitude", [1e0, 1e3, 1e6, 1e9, 1e12, 1e15, 1e18])
def test_reduce_two_pi_matches_mpmath(magnitude: float) -> None:
    rng = np.random.default_rng(17)
    xs = rng.uniform(-magnitude, magnitude, size=200)
    for x in xs:
        got = reduce_two_pi(float(x))
        want = _mp_reduce(float(x))
        assert abs(got - want) <= 1.5e-9, (x, got, want)
        assert -math.pi <= got <= math.pi


def test_reduce_two_pi_small_angles_pass_through() -> None:
    for x in (-3.0, -1e-8, 0.0, 1e-300, 2.5):
        assert reduce_two_pi(x) == x


def test_reduce_two_pi_near_multiples() -> None:
    # Reducing k * fl(2 pi) must expose the representation error of fl(2 pi),
    # not snap to zero.
    for k in (1, 7, 1000):
        x = k * (2.0 * math.pi)
        got = reduce_two_pi(x)
        want = _mp_reduce(x)
        assert got == pytest.approx(want, abs=1e-12)


@given(st.floats(allow_nan=False, allow_infinity=False, min_value=-1e18, max_value=1e18))
def test_reduce_two_pi_range(x: float) -> None:
    got = reduce_two_pi(x)
    assert -math.pi <= got <= math.pi


def test_reduce_two_pi_array_matches_scalar() -> None:
    rng = np.random.default_rng(3)
    xs = np.concatenate(
        [rng.uniform(-s, s, size=50) for s in (1.0, 1e6, 1e12, 1e18)]
    )
    got = reduce_two_pi_array(xs)
    want = np.array([reduce_two_pi(float(x)) for x in xs])
    assert got.shape == xs.shape
    np.testing.assert_array_equal(got, want)


def test_neumaier_sum_classic_cancellation() -> None:
    assert neumaier_sum([1e16, 1.0, -1e16]) == 1.0
    assert neumaier_sum([1.0, 1e100, 1.0, -1e100]) == 2.0


def test_neumaier_sum_empty_and_single() -> None:
    assert neumaier_sum([]) == 0.0
    assert neumaier_sum([3.5]) == 3.5


@given(st.lists(st.floats(allow_nan=False, allow_infinity=False,
                          min_value=-1e20, max_value=1e20), max_size=200))
def test_neumaier_sum_tracks_fsum(values: list[float]) -> None:
    got = neumaier_sum(values)
    want = math.fsum(values)
    scale = sum(abs(v) for v in values)
    assert abs(got - want) <= 4.0 * math.ulp(1.0) * max(scale, 1e-300)

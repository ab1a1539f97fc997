#!/usr/bin/env python3
"""
Tests for fuzzy numbers, level sets and the sample-based trapezoid builder
"""

import sys
import os

# Add current directory to path
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fuzzy_core import (
    DomainError,
    FuzzyNumber,
    Interval,
    InvalidParameterError,
    Shape,
    level_bounds,
    level_set,
    make_crisp,
    make_trapezoidal,
    make_triangular,
    support,
    trapezoid_from_samples,
)

finite = st.floats(min_value=-50, max_value=50, allow_nan=False)
spread = st.floats(min_value=0, max_value=20, allow_nan=False)


def test_triangular_level_sets():
    A = make_triangular(6, 2, 3)
    assert level_set(A, 0.0).as_tuple() == (4.0, 9.0)
    assert level_set(A, 1.0).as_tuple() == (6.0, 6.0)
    assert level_set(A, 0.5).as_tuple() == (5.0, 7.5)
    assert support(A) == Interval(4.0, 9.0)
    assert A.center == 6.0


def test_trapezoidal_and_crisp():
    B = make_trapezoidal(1, 3, 0.5, 2)
    assert level_set(B, 1.0).as_tuple() == (1.0, 3.0)
    assert support(B).as_tuple() == (0.5, 5.0)
    assert B.center == 2.0

    C = make_crisp(4)
    assert C.shape is Shape.CRISP
    assert support(C).is_point
    assert level_set(C, 0.3).as_tuple() == (4.0, 4.0)


def test_constructor_errors():
    with pytest.raises(InvalidParameterError):
        make_triangular(0, -1, 1)
    with pytest.raises(InvalidParameterError):
        make_trapezoidal(3, 1, 0, 0)
    with pytest.raises(InvalidParameterError):
        make_triangular(float("nan"), 1, 1)
    with pytest.raises(InvalidParameterError):
        FuzzyNumber(Shape.TRIANGULAR, 1.0, 2.0, 1.0, 1.0)
    with pytest.raises(InvalidParameterError):
        FuzzyNumber(Shape.CRISP, 1.0, 1.0, 0.5, 0.0)
    with pytest.raises(InvalidParameterError):
        Interval(2.0, 1.0)


def test_level_out_of_range():
    A = make_triangular(2, 4, 1)
    with pytest.raises(DomainError) as exc:
        level_set(A, 1.5)
    assert exc.value.point == 1.5
    with pytest.raises(DomainError):
        level_bounds(A, np.array([0.0, -0.1]))


def test_level_bounds_vectorised():
    A = make_triangular(2, 4, 1)
    gammas = np.linspace(0, 1, 5)
    lo, hi = level_bounds(A, gammas)
    for g, l, h in zip(gammas, lo, hi):
        assert level_set(A, g).as_tuple() == pytest.approx((l, h))


def test_scaled_spreads():
    A = make_triangular(6, 2, 3).scaled_spreads(0.5)
    assert (A.core_lo, A.alpha, A.beta_spread) == (6.0, 1.0, 1.5)
    assert make_crisp(2).scaled_spreads(3) == make_crisp(2)
    with pytest.raises(InvalidParameterError):
        A.scaled_spreads(-1)


def test_trapezoid_from_samples():
    B = trapezoid_from_samples([1, 2, 3, 4, 5], 0.25, 0.75)
    assert (B.core_lo, B.core_hi) == (2.0, 4.0)
    assert support(B).as_tuple() == (1.0, 5.0)

    flat = trapezoid_from_samples([3.0, 3.0, 3.0], 0.1, 0.9)
    assert support(flat).is_point
    assert (flat.alpha, flat.beta_spread) == (0.0, 0.0)


@pytest.mark.parametrize("data, lo_q, hi_q", [
    ([], 0.25, 0.75),
    ([1.0, float("inf")], 0.25, 0.75),
    ([1.0, 2.0], 0.8, 0.2),
    ([1.0, 2.0], -0.1, 0.5),
])
def test_trapezoid_from_samples_rejects(data, lo_q, hi_q):
    with pytest.raises(InvalidParameterError):
        trapezoid_from_samples(data, lo_q, hi_q)


@settings(max_examples=60, deadline=None)
@given(a=finite, width=spread, alpha=spread, beta=spread,
       g1=st.floats(0, 1), g2=st.floats(0, 1))
def test_level_sets_are_nested(a, width, alpha, beta, g1, g2):
    A = make_trapezoidal(a, a + width, alpha, beta)
    lo, hi = sorted((g1, g2))
    assert level_set(A, lo).contains(level_set(A, hi))
    assert support(A).contains(level_set(A, hi))


@settings(max_examples=40, deadline=None)
@given(data=st.lists(finite, min_size=1, max_size=30))
def test_samples_trapezoid_covers_data(data):
    B = trapezoid_from_samples(data, 0.2, 0.8)
    hull = support(B)
    assert hull.lo == pytest.approx(min(data), abs=1e-9)
    assert hull.hi == pytest.approx(max(data), abs=1e-9)
    assert min(data) <= B.core_lo <= B.core_hi <= max(data)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))

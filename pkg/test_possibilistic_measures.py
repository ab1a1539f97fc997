#!/usr/bin/env python3
"""
Tests for weighting functions, quadrature and the possibilistic indicators
"""

import sys
import os
import math
import warnings
from fractions import Fraction

# Add current directory to path
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fuzzy_core import DomainError, InvalidParameterError, PreconditionError, make_crisp, make_trapezoidal, make_triangular
from possibilistic_measures import (
    QuadratureConfig,
    custom_weight,
    expected_utility_E1,
    expected_utility_E2,
    expected_value,
    gauss_legendre_unit,
    make_power_weight,
    quadrature_from_env,
    uniform_weight,
    variance_1,
    variance_1_raw,
    variance_2,
)

F2T = make_power_weight(1)


def triangular_oracle(a, alpha, beta):
    """(E_f, Var1, Var2) under f(t) = 2t, in exact arithmetic"""
    a, alpha, beta = Fraction(a), Fraction(alpha), Fraction(beta)
    return (a + (beta - alpha) / 6,
            (alpha ** 2 + beta ** 2 + alpha * beta) / 18,
            (alpha ** 2 + beta ** 2) / 36)


@pytest.mark.parametrize("params, expected", [
    ((6, 2, 3), (Fraction(37, 6), Fraction(19, 18), Fraction(13, 36))),
    ((2, 4, 1), (Fraction(3, 2), Fraction(7, 6), Fraction(17, 36))),
])
def test_triangular_indicators(params, expected):
    assert triangular_oracle(*params) == expected
    A = make_triangular(*params)
    e, v1, v2 = (float(x) for x in expected)

    assert expected_value(F2T, A, method="closed_form") == pytest.approx(e, abs=1e-12)
    assert variance_1(F2T, A, method="closed_form") == pytest.approx(v1, abs=1e-12)
    assert variance_2(F2T, A, method="closed_form") == pytest.approx(v2, abs=1e-12)

    assert expected_value(F2T, A, method="quadrature") == pytest.approx(e, abs=1e-9)
    assert variance_1(F2T, A, method="quadrature") == pytest.approx(v1, abs=1e-9)
    assert variance_2(F2T, A, method="quadrature") == pytest.approx(v2, abs=1e-9)


def test_e1_of_square():
    A = make_triangular(2, 4, 1)
    assert expected_utility_E1(F2T, lambda x: x ** 2, A) == pytest.approx(41 / 12, abs=1e-12)


def test_power_weight_moments():
    f = make_power_weight(3)
    assert f.moment(0) == 1.0
    assert f.moment(2) == pytest.approx(4 / 6)
    assert F2T.level_moment(1) == pytest.approx(1 / 3)
    assert F2T.level_moment(2) == pytest.approx(1 / 6)
    assert F2T.is_triangular_weight()
    assert not uniform_weight().is_triangular_weight()
    assert uniform_weight().moment(1) == 0.5


def test_builtin_weights_construct_without_warnings():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        for n in (0, 1, 2.5, 7):
            assert make_power_weight(n).moment(0) == 1.0
        assert uniform_weight().moment(0) == 1.0


def test_custom_weight_validation():
    f = custom_weight(lambda t: 2 * t)
    A = make_triangular(6, 2, 3)
    assert expected_value(f, A) == pytest.approx(37 / 6, abs=1e-9)
    with pytest.raises(PreconditionError):
        expected_value(f, A, method="closed_form")
    with pytest.raises(InvalidParameterError):
        custom_weight(lambda t: t)
    with pytest.raises(InvalidParameterError):
        custom_weight(lambda t: 2 - 2 * t)
    with pytest.raises(InvalidParameterError):
        make_power_weight(-1)


def test_unknown_method():
    with pytest.raises(InvalidParameterError):
        expected_value(F2T, make_triangular(1, 1, 1), method="simpson")


def test_gauss_legendre_unit():
    nodes, weights = gauss_legendre_unit(8)
    assert weights.sum() == pytest.approx(1.0)
    assert np.all((nodes > 0) & (nodes < 1))
    assert float(np.dot(weights, nodes ** 5)) == pytest.approx(1 / 6)


def test_quadrature_from_env(monkeypatch):
    monkeypatch.setenv("POSSI_QUAD_NODES", "16")
    monkeypatch.delenv("POSSI_QUAD_INNER_NODES", raising=False)
    q = quadrature_from_env(outer_nodes=40, inner_nodes=12)
    assert (q.outer_nodes, q.inner_nodes) == (16, 12)

    monkeypatch.setenv("POSSI_QUAD_NODES", "lots")
    with pytest.raises(InvalidParameterError):
        quadrature_from_env()
    monkeypatch.setenv("POSSI_QUAD_NODES", "1")
    with pytest.raises(InvalidParameterError):
        quadrature_from_env()


def test_quadrature_config_validation():
    with pytest.raises(InvalidParameterError):
        QuadratureConfig(outer_nodes=2.5)
    with pytest.raises(InvalidParameterError):
        QuadratureConfig(degenerate_eps=0.0)


def test_scalar_functions_are_accepted():
    A = make_triangular(6, 2, 3)
    vectorised = expected_utility_E1(F2T, np.log, A)
    scalar = expected_utility_E1(F2T, math.log, A)
    assert scalar == pytest.approx(vectorised, abs=1e-14)
    assert expected_utility_E2(F2T, math.log, A) == pytest.approx(expected_utility_E2(F2T, np.log, A), abs=1e-14)


def test_domain_errors_report_the_point():
    A = make_triangular(2, 4, 1)
    with pytest.raises(DomainError) as exc:
        expected_utility_E1(F2T, np.log, A)
    assert exc.value.point < 0
    with pytest.raises(DomainError):
        expected_utility_E2(F2T, math.log, A)


def test_crisp_number():
    C = make_crisp(3.0)
    assert expected_utility_E1(F2T, np.exp, C) == pytest.approx(math.exp(3.0))
    assert expected_utility_E2(F2T, np.exp, C) == pytest.approx(math.exp(3.0))
    assert variance_1(F2T, C) == 0.0
    assert variance_2(F2T, C, method="quadrature") == pytest.approx(0.0, abs=1e-12)


def test_e2_is_normalised():
    A = make_trapezoidal(1, 2, 1, 3)
    assert expected_utility_E2(F2T, lambda x: np.full_like(x, 5.0), A) == pytest.approx(5.0)
    assert expected_utility_E2(F2T, lambda x: x, A) == pytest.approx(expected_value(F2T, A))


@settings(max_examples=40, deadline=None)
@given(a=st.floats(-10, 10), width=st.floats(0, 3), alpha=st.floats(0, 5), beta=st.floats(0, 5),
       n=st.sampled_from([0, 1, 2, 3]))
def test_closed_form_matches_quadrature(a, width, alpha, beta, n):
    A = make_trapezoidal(a, a + width, alpha, beta)
    f = make_power_weight(n)
    for fn in (expected_value, variance_1_raw):
        assert fn(f, A, method="closed_form") == pytest.approx(fn(f, A, method="quadrature"), rel=1e-9, abs=1e-9)
    assert variance_2(f, A, method="closed_form") == pytest.approx(variance_2(f, A, method="quadrature"),
                                                                   rel=1e-9, abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(a=st.floats(0, 10), alpha=st.floats(0, 5), beta=st.floats(0, 5))
def test_variance_ordering(a, alpha, beta):
    A = make_triangular(a, alpha, beta)
    # Var1 - Var2 = (alpha + beta)^2 / 36 under f(t) = 2t
    assert variance_1(F2T, A) - variance_2(F2T, A) == pytest.approx((alpha + beta) ** 2 / 36, abs=1e-9)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))

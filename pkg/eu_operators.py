# -*- coding: utf-8 -*-

"""
Expected utility operators T(A, g).

An operator is a functional over (fuzzy number, continuous function) pairs with
four axioms: T(A, id) = E_f(A), T(A, const a) = a, linearity in g, and
monotonicity in g. T1 and T2 are built from the E1 / E2 expected utilities,
Mix(c, T, S) = c T + (1 - c) S is again an operator for any real c, and is
strictly increasing when c lies in [0, 1].
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Optional, Sequence

import numpy as np

from fuzzy_core import FuzzyNumber, InvalidParameterError, support
from possibilistic_measures import (
    QuadratureConfig,
    WeightingFunction,
    expected_utility_E1,
    expected_utility_E2,
    expected_value,
    quadrature_from_env,
    variance_1_raw,
    variance_2_raw,
)
from utility_functions import UtilityFunction, compose_affine

logger = logging.getLogger(__name__)

ScalarFunction = Callable[[np.ndarray], np.ndarray]
MONOTONICITY_GRID = 512


class OperatorKind(str, Enum):
    T1 = "t1"
    T2 = "t2"
    MIX = "mix"


@dataclass(frozen=True)
class EUOperator:
    kind: OperatorKind
    weighting: WeightingFunction
    quadrature: QuadratureConfig = field(default_factory=quadrature_from_env)
    c: float = 1.0
    left: Optional["EUOperator"] = None
    right: Optional["EUOperator"] = None

    @property
    def strictly_increasing(self) -> bool:
        if self.kind is not OperatorKind.MIX:
            return True
        return 0.0 <= self.c <= 1.0 and self.left.strictly_increasing and self.right.strictly_increasing

    @property
    def label(self) -> str:
        if self.kind is OperatorKind.MIX:
            return f"mix({self.c:g},{self.left.label},{self.right.label})"
        return self.kind.value


def t1(f: WeightingFunction, quadrature: Optional[QuadratureConfig] = None) -> EUOperator:
    return EUOperator(OperatorKind.T1, f, quadrature or quadrature_from_env())


def t2(f: WeightingFunction, quadrature: Optional[QuadratureConfig] = None) -> EUOperator:
    return EUOperator(OperatorKind.T2, f, quadrature or quadrature_from_env())


def convex_combination(c: float, T: EUOperator, S: EUOperator) -> EUOperator:
    """U = c T + (1 - c) S; monotone (strictly increasing flag set) only for c in [0, 1]"""
    if T.weighting != S.weighting:
        raise InvalidParameterError("a convex combination needs both operators to share the weighting function")
    c = float(c)
    if not 0.0 <= c <= 1.0:
        logger.debug("mixture weight c=%g outside [0, 1]; operator is not monotone", c)
    return EUOperator(OperatorKind.MIX, T.weighting, T.quadrature, c=c, left=T, right=S)


def evaluate(T: EUOperator, A: FuzzyNumber, g: ScalarFunction) -> float:
    """T(A, g)"""
    if T.kind is OperatorKind.T1:
        return expected_utility_E1(T.weighting, g, A, T.quadrature)
    if T.kind is OperatorKind.T2:
        return expected_utility_E2(T.weighting, g, A, T.quadrature)
    return T.c * evaluate(T.left, A, g) + (1.0 - T.c) * evaluate(T.right, A, g)


def operator_mean(T: EUOperator, A: FuzzyNumber, method: str = "auto") -> float:
    """E_f(A) for the operator's weighting function"""
    return expected_value(T.weighting, A, T.quadrature, method)


def t_variance_raw(T: EUOperator, A: FuzzyNumber, method: str = "auto") -> float:
    if method == "quadrature":
        e = operator_mean(T, A, method)
        return evaluate(T, A, lambda x: (x - e) ** 2)
    if T.kind is OperatorKind.T1:
        return variance_1_raw(T.weighting, A, T.quadrature, method)
    if T.kind is OperatorKind.T2:
        return variance_2_raw(T.weighting, A, T.quadrature, method)
    return T.c * t_variance_raw(T.left, A, method) + (1.0 - T.c) * t_variance_raw(T.right, A, method)


def t_variance(T: EUOperator, A: FuzzyNumber, method: str = "auto") -> float:
    """Var_T(A) = T(A, (x - E_f(A))^2), clamped at 0"""
    raw = t_variance_raw(T, A, method)
    if raw < 0:
        logger.debug("Var_T for %s dipped to %.3e, clamped at 0", T.label, raw)
        return 0.0
    return raw


def second_order_approx(T: EUOperator, A: FuzzyNumber, u) -> float:
    """
    u(E_f(A)) + 1/2 u''(E_f(A)) Var_T(A).

    `u` is anything with `value` and `d2` (a UtilityFunction or an AffineComposite).
    """
    e = operator_mean(T, A)
    return float(u.value(e)) + 0.5 * float(u.d2(e)) * t_variance(T, A)


def t_covariance(T: EUOperator, A: FuzzyNumber, u: ScalarFunction, v: ScalarFunction) -> float:
    """T(A, u v) - T(A, u) T(A, v)"""
    product = evaluate(T, A, lambda x: np.asarray(u(x), dtype=float) * np.asarray(v(x), dtype=float))
    return product - evaluate(T, A, u) * evaluate(T, A, v)


def centred_covariance(T: EUOperator, A: FuzzyNumber, u: ScalarFunction, v: ScalarFunction) -> float:
    """T(A, (u - T(A, u)) (v - T(A, v))), the other side of the covariance identity"""
    mu, mv = evaluate(T, A, u), evaluate(T, A, v)
    return evaluate(T, A, lambda x: (np.asarray(u(x), dtype=float) - mu) * (np.asarray(v(x), dtype=float) - mv))


# ---------- Axiom checks ----------
@dataclass
class AxiomReport:
    operator: str
    tol: float
    identity: float = 0.0
    constants: float = 0.0
    linearity: float = 0.0
    monotonicity: float = 0.0
    monotone_pairs: int = 0
    strictly_increasing: bool = True

    @property
    def passed(self) -> bool:
        return max(self.identity, self.constants, self.linearity, self.monotonicity) <= self.tol

    def as_dict(self) -> dict:
        return {
            "operator": self.operator,
            "identity": self.identity,
            "constants": self.constants,
            "linearity": self.linearity,
            "monotonicity": self.monotonicity,
            "monotone_pairs": self.monotone_pairs,
            "strictly_increasing": self.strictly_increasing,
            "passed": self.passed,
        }


_CONSTANTS = (-3.0, 0.0, 2.5, 7.0)
_COEFFICIENTS = ((2.0, -3.0), (0.5, 1.25), (-1.0, 0.0))


def check_axioms(T: EUOperator, A: FuzzyNumber, probes: Sequence[ScalarFunction], tol: float = 1e-8) -> AxiomReport:
    """
    Spot-check the operator axioms on a fuzzy number.

    Monotonicity is checked on every ordered probe pair with g <= h on a
    512-point grid over the support hull, plus the pairs (g, g + (x - E_f)^2)
    which are ordered by construction.
    """
    report = AxiomReport(operator=T.label, tol=tol, strictly_increasing=T.strictly_increasing)
    e = operator_mean(T, A)
    report.identity = abs(evaluate(T, A, lambda x: x) - e)
    report.constants = max(abs(evaluate(T, A, lambda x, a=a: np.full_like(np.asarray(x, dtype=float), a)) - a)
                           for a in _CONSTANTS)

    values = [evaluate(T, A, g) for g in probes]
    linearity = 0.0
    for i, g in enumerate(probes):
        for j, h in enumerate(probes):
            for a, b in _COEFFICIENTS:
                combined = evaluate(T, A, lambda x, g=g, h=h, a=a, b=b: a * np.asarray(g(x)) + b * np.asarray(h(x)))
                linearity = max(linearity, abs(combined - (a * values[i] + b * values[j])))
    report.linearity = linearity

    hull = support(A)
    grid = np.linspace(hull.lo, hull.hi, MONOTONICITY_GRID)
    pairs: List[tuple] = []
    sampled = [np.broadcast_to(np.asarray(g(grid), dtype=float), grid.shape) for g in probes]
    for i in range(len(probes)):
        for j in range(len(probes)):
            if i != j and np.all(sampled[i] <= sampled[j]):
                pairs.append((values[i], values[j]))
        bumped = evaluate(T, A, lambda x, g=probes[i]: np.asarray(g(x), dtype=float) + (x - e) ** 2)
        pairs.append((values[i], bumped))
    report.monotone_pairs = len(pairs)
    report.monotonicity = max((max(0.0, lo - hi) for lo, hi in pairs), default=0.0)
    return report


# ---------- D-operator check ----------
@dataclass(frozen=True)
class DerivativeCheck:
    finite_difference: float
    operator_value: float

    @property
    def rel_error(self) -> float:
        scale = max(abs(self.finite_difference), abs(self.operator_value), 1e-300)
        return abs(self.finite_difference - self.operator_value) / scale


def d_operator_check(T: EUOperator, A: FuzzyNumber, u: UtilityFunction, w0: float, P0: float,
                     beta: float, step: float = 1e-4) -> DerivativeCheck:
    """
    Compare d/dbeta T(A, u(w0 - beta P0 - (1 - beta) x)) by central differences
    against T(A, u'(...) (x - P0)); `step` is relative to max(1, |beta|).
    """
    h = step * max(1.0, abs(beta))

    def total(b):
        return evaluate(T, A, compose_affine(u, w0 - b * P0, -(1.0 - b)))

    fd = (total(beta + h) - total(beta - h)) / (2.0 * h)
    analytic = evaluate(T, A, lambda x: (x - P0) * u.d1(w0 - beta * P0 - (1.0 - beta) * x))
    return DerivativeCheck(fd, analytic)


def is_d_operator_consistent(T: EUOperator, A: FuzzyNumber, u: UtilityFunction, w0: float, P0: float,
                             beta: float, step: float = 1e-4, rtol: float = 1e-6) -> bool:
    return d_operator_check(T, A, u, w0, P0, beta, step).rel_error <= rtol

# -*- coding: utf-8 -*-

"""
The possibilistic coinsurance problem.

An agent with wealth w0 and utility u faces a loss modelled by the fuzzy number
A. Insuring a fraction beta of the loss costs the premium beta * P0 with
P0 = (1 + loading) * E_f(A), leaving the wealth

    g(x, beta) = w0 - beta * P0 - (1 - beta) * x

and the total utility H(beta) = T(A, u(g(., beta))). H is concave for monotone
operators, so the optimal rate solves H'(beta) = 0. This module solves that
condition exactly (bracket + bisection) and through the second-order
approximations built on E_f(A), Var_T(A) and the Arrow-Pratt index at
w = w0 - P0.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

from eu_operators import EUOperator, evaluate, operator_mean, t_covariance, t_variance_raw
from fuzzy_core import (
    DomainError,
    FuzzyNumber,
    Interval,
    InvalidParameterError,
    PossibilisticError,
    PreconditionError,
    Shape,
    support,
)
from utility_functions import UtilityFunction, UtilityKind, arrow_pratt, compose_affine, more_risk_averse

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 200
DEFAULT_STEP = 1.0
MAX_EXPANSIONS = 64
BISECT_XTOL = 1e-14


class BracketError(PossibilisticError):
    """The exact solver could not bracket a root of H'"""

    def __init__(self, message: str, bracket: Optional[Tuple[float, float]] = None):
        super().__init__(message)
        self.bracket = bracket


class ConvergenceError(PossibilisticError):
    """The exact solver ran out of iterations"""


# ---------- Problem ----------
@dataclass(frozen=True)
class CoinsuranceProblem:
    w0: float
    loading: float
    risk: FuzzyNumber
    utility: UtilityFunction
    operator: EUOperator

    def __post_init__(self):
        if not math.isfinite(self.w0):
            raise InvalidParameterError(f"initial wealth must be finite, got {self.w0}")
        if not (math.isfinite(self.loading) and self.loading >= 0):
            raise InvalidParameterError(f"loading factor must be >= 0, got {self.loading}")

    @property
    def weighting(self):
        return self.operator.weighting

    @cached_property
    def expected_loss(self) -> float:
        """E_f(A)"""
        return operator_mean(self.operator, self.risk)

    @cached_property
    def variance_raw(self) -> float:
        return t_variance_raw(self.operator, self.risk)

    @property
    def variance(self) -> float:
        """Var_T(A), clamped at 0"""
        return max(self.variance_raw, 0.0)

    @property
    def full_premium(self) -> float:
        """P0 = (1 + loading) E_f(A)"""
        return (1.0 + self.loading) * self.expected_loss

    @property
    def wealth(self) -> float:
        """w = w0 - P0"""
        return self.w0 - self.full_premium

    def with_loading(self, loading: float) -> "CoinsuranceProblem":
        return replace(self, loading=float(loading))

    def with_operator(self, operator: EUOperator) -> "CoinsuranceProblem":
        return replace(self, operator=operator)

    def with_utility(self, utility: UtilityFunction) -> "CoinsuranceProblem":
        return replace(self, utility=utility)

    def with_risk(self, risk: FuzzyNumber) -> "CoinsuranceProblem":
        return replace(self, risk=risk)


def is_admissible(prob: CoinsuranceProblem) -> List[str]:
    """Violations of the exact-solver assumptions (empty list when admissible)"""
    violations = []
    hull = support(prob.risk)
    if hull.lo < 0:
        violations.append(f"support of the risk must lie in [0, inf), got {hull.as_tuple()}")
    if hull.is_point:
        violations.append("support of the risk reduces to a single point")
    if not prob.operator.strictly_increasing:
        violations.append(f"operator {prob.operator.label} is not monotone (mixture weight outside [0, 1])")
    if not prob.utility.in_domain(prob.wealth):
        violations.append(f"wealth w = w0 - P0 = {prob.wealth!r} is outside the utility domain")
    return violations


def _indicators(prob: CoinsuranceProblem, method: str):
    if method == "auto":
        return prob.expected_loss, prob.variance
    e = operator_mean(prob.operator, prob.risk, method)
    return e, max(t_variance_raw(prob.operator, prob.risk, method), 0.0)


# ---------- Objective ----------
def premium(prob: CoinsuranceProblem, beta: float) -> float:
    """P(beta) = beta * P0"""
    return beta * prob.full_premium


def terminal_wealth(prob: CoinsuranceProblem, x, beta: float):
    """g(x, beta) = w0 - beta P0 - (1 - beta) x"""
    return prob.w0 - beta * prob.full_premium - (1.0 - beta) * np.asarray(x, dtype=float)


def _check_rate(prob: CoinsuranceProblem, beta: float):
    hull = support(prob.risk)
    for x in (hull.lo, hull.hi):
        wealth = float(terminal_wealth(prob, x, beta))
        if not prob.utility.in_domain(wealth):
            raise DomainError(
                f"at rate {beta!r} the loss x={x!r} leaves wealth {wealth!r} outside the "
                f"{prob.utility.label} utility domain",
                point=x,
            )


def feasible_rates(prob: CoinsuranceProblem) -> Tuple[float, float]:
    """Open range of rates for which g(x, beta) stays in the utility domain on the whole support hull"""
    hull = support(prob.risk)
    dom = prob.utility.domain
    lo, hi = -math.inf, math.inf
    for x in (hull.lo, hull.hi):
        # g = (w0 - x) + slope * beta
        base, slope = prob.w0 - x, x - prob.full_premium
        for bound, above in ((dom.lo, True), (dom.hi, False)):
            if not math.isfinite(bound):
                continue
            if slope == 0:
                if (base > bound) != above or base == bound:
                    raise DomainError(f"loss x={x!r} leaves wealth {base!r} outside the utility domain", point=x)
                continue
            edge = (bound - base) / slope
            # above: base + slope * beta > bound
            if (slope > 0) == above:
                lo = max(lo, edge)
            else:
                hi = min(hi, edge)
    if not lo < hi:
        raise DomainError(f"no rate keeps the wealth inside the utility domain (range {lo!r}..{hi!r})")
    return lo, hi


def total_utility(prob: CoinsuranceProblem, beta: float) -> float:
    """H(beta) = T(A, u(g(x, beta)))"""
    _check_rate(prob, beta)
    return evaluate(prob.operator, prob.risk, compose_affine(prob.utility, prob.w0 - beta * prob.full_premium,
                                                             -(1.0 - beta)))


def dH(prob: CoinsuranceProblem, beta: float) -> float:
    """H'(beta) = T(A, (x - P0) u'(g(x, beta)))"""
    _check_rate(prob, beta)
    P0 = prob.full_premium
    return evaluate(prob.operator, prob.risk,
                    lambda x: (x - P0) * prob.utility.d1(terminal_wealth(prob, x, beta)))


def d2H(prob: CoinsuranceProblem, beta: float) -> float:
    """H''(beta) = T(A, u''(g(x, beta)) (x - P0)^2)"""
    _check_rate(prob, beta)
    P0 = prob.full_premium
    return evaluate(prob.operator, prob.risk,
                    lambda x: prob.utility.d2(terminal_wealth(prob, x, beta)) * (x - P0) ** 2)


# ---------- Approximations ----------
def approx_rate(prob: CoinsuranceProblem, method: str = "auto") -> float:
    """beta* ~ 1 - (loading / r_u(w)) E_f / (Var_T + loading^2 E_f^2)"""
    lam = prob.loading
    if lam == 0:
        return 1.0
    e, var = _indicators(prob, method)
    r = arrow_pratt(prob.utility, prob.wealth)
    denom = var + lam * lam * e * e
    if denom == 0:
        raise PreconditionError("the approximation is undefined for a zero expected loss")
    return 1.0 - (lam / r) * e / denom


def theorem_rate(prob: CoinsuranceProblem, method: str = "auto") -> float:
    """The same approximation written with u'(w) / u''(w) instead of the Arrow-Pratt index"""
    lam = prob.loading
    if lam == 0:
        return 1.0
    e, var = _indicators(prob, method)
    w = prob.wealth
    return 1.0 + prob.utility.d1(w) / prob.utility.d2(w) * lam * e / (var + lam * lam * e * e)


def approx_total_utility(prob: CoinsuranceProblem, method: str = "auto") -> float:
    """Second-order approximation of H at the optimal rate"""
    lam = prob.loading
    w = prob.wealth
    if lam == 0:
        return float(prob.utility.value(w))
    e, var = _indicators(prob, method)
    r = arrow_pratt(prob.utility, w)
    denom = var + lam * lam * e * e
    shifted = w + (lam * lam * e * e / denom) / r
    correction = lam * lam / (2.0 * r * r) * e * e * var / (denom * denom)
    return float(prob.utility.value(shifted)) + correction * float(prob.utility.d2(shifted))


def combine_rates(beta_T: float, beta_S: float, c: float) -> float:
    """Optimal rate of c T + (1 - c) S from the rates of T and S (harmonic combination of retentions)"""
    if beta_T > 1 or beta_S > 1:
        raise PreconditionError(f"rates must not exceed 1, got {beta_T}, {beta_S}")
    if beta_T == 1 or beta_S == 1:
        return 1.0
    denom = c / (1.0 - beta_T) + (1.0 - c) / (1.0 - beta_S)
    if denom == 0:
        raise PreconditionError(f"mixture weight {c} makes the combined retention undefined")
    return 1.0 - 1.0 / denom


# ---------- Triangular risk, f(t) = 2t ----------
class RateVariant(str, Enum):
    T1 = "t1"
    T2 = "t2"
    HALF_MIX = "half_mix"


def _triangular_2t(prob: CoinsuranceProblem):
    if prob.risk.shape is not Shape.TRIANGULAR:
        raise PreconditionError(f"closed forms need a triangular risk, got {prob.risk.shape.value}")
    if not prob.weighting.is_triangular_weight():
        raise PreconditionError(f"closed forms need the weighting f(t) = 2t, got {prob.weighting.label}")
    A = prob.risk
    return A.core_lo, A.alpha, A.beta_spread


def triangular_indicators(a: float, alpha: float, beta: float):
    """(E_f, Var1, Var2) of the triangular number (a, alpha, beta) under f(t) = 2t"""
    return (a + (beta - alpha) / 6.0,
            (alpha * alpha + beta * beta + alpha * beta) / 18.0,
            (alpha * alpha + beta * beta) / 36.0)


def closed_form_rate(prob: CoinsuranceProblem, which) -> float:
    """
    Approximate optimal rate for a triangular risk and f(t) = 2t, for T1, T2 or
    the half mixture (T1 + T2) / 2, whatever operator the problem carries.
    """
    which = RateVariant(which)
    a, alpha, beta = _triangular_2t(prob)
    lam = prob.loading
    if lam == 0:
        return 1.0
    e, var1, var2 = triangular_indicators(a, alpha, beta)
    r = arrow_pratt(prob.utility, prob.w0 - (1.0 + lam) * e)
    if which is RateVariant.T1:
        return 1.0 - (lam / r) * e / (var1 + lam * lam * e * e)
    if which is RateVariant.T2:
        return 1.0 - (lam / r) * e / (var2 + lam * lam * e * e)
    mixed = ((alpha + beta) ** 2 + 2.0 * (alpha * alpha + beta * beta)) / 36.0
    return 1.0 - (2.0 * lam / r) * e / (mixed + 2.0 * lam * lam * e * e)


def rate_gap_T1_T2(prob: CoinsuranceProblem) -> float:
    """Predicted 1/(1 - beta1) - 1/(1 - beta2) = (alpha + beta)^2 r_u(w) / (36 loading E_f)"""
    a, alpha, beta = _triangular_2t(prob)
    lam = prob.loading
    if not lam > 0:
        raise PreconditionError("the T1/T2 rate gap needs a positive loading factor")
    e = triangular_indicators(a, alpha, beta)[0]
    if not e > 0:
        raise PreconditionError(f"the T1/T2 rate gap needs a positive expected loss, got {e}")
    r = arrow_pratt(prob.utility, prob.w0 - (1.0 + lam) * e)
    gap = (alpha + beta) ** 2 * r / (36.0 * lam * e)
    if alpha + beta > 0:
        b1 = closed_form_rate(prob, RateVariant.T1)
        b2 = closed_form_rate(prob, RateVariant.T2)
        if not b1 > b2:
            raise PossibilisticError(f"expected the T1 rate {b1!r} to exceed the T2 rate {b2!r}")
    return gap


# ---------- Positivity ----------
def cara_positivity_sufficient(prob: CoinsuranceProblem) -> bool:
    """loading > 1 / E_f(A) guarantees a positive approximate rate under u(x) = -exp(-x)"""
    if prob.utility.kind is not UtilityKind.CARA:
        raise PreconditionError(f"the CARA positivity test needs CARA utility, got {prob.utility.label}")
    e = prob.expected_loss
    if not e > 0:
        raise PreconditionError(f"the CARA positivity test needs a positive expected loss, got {e}")
    sufficient = prob.loading > 1.0 / e
    if sufficient:
        rate = approx_rate(prob)
        if not rate > 0:
            raise PossibilisticError(f"loading {prob.loading} > 1/E_f but the approximate rate is {rate!r}")
    return sufficient


def cara_rate_curve(prob: CoinsuranceProblem, loadings: Sequence[float]) -> np.ndarray:
    """Approximate rate 1 - l E_f / (Var_T + l^2 E_f^2) over an array of loadings l (CARA utility)"""
    if prob.utility.kind is not UtilityKind.CARA:
        raise PreconditionError(f"the CARA rate curve needs CARA utility, got {prob.utility.label}")
    lam = np.asarray(loadings, dtype=float)
    e, var = prob.expected_loss, prob.variance
    with np.errstate(divide="ignore", invalid="ignore"):
        rates = 1.0 - lam * e / (var + lam * lam * e * e)
    return np.where(lam == 0, 1.0, rates)


def necessary_positivity_bound(prob: CoinsuranceProblem) -> float:
    """
    Upper bound on the loading for a positive optimal rate:

        T(A, (x - E_f) [u'(w0 - x) - T(A, u'(w0 - x))]) / (E_f T(A, u'(w0 - x)))

    computed through the covariance identity as cov_T(x, u'(w0 - x)) / (E_f T(A, u'(w0 - x))).
    """
    if not prob.loading > 0:
        raise PreconditionError("the positivity bound needs a positive loading factor")
    if not prob.operator.strictly_increasing:
        raise PreconditionError(f"the positivity bound needs a strictly increasing operator, got {prob.operator.label}")
    e = prob.expected_loss
    if not e > 0:
        raise PreconditionError(f"the positivity bound needs a positive expected loss, got {e}")
    hull = support(prob.risk)
    prob.utility.check_domain(np.array([prob.w0 - hull.hi, prob.w0 - hull.lo]))

    def marginal(x):
        return prob.utility.d1(prob.w0 - np.asarray(x, dtype=float))

    T, A = prob.operator, prob.risk
    return t_covariance(T, A, lambda x: x, marginal) / (e * evaluate(T, A, marginal))


# ---------- Comparing agents ----------
class Ordering(str, Enum):
    FIRST_HIGHER = "first_higher"
    SECOND_HIGHER = "second_higher"
    EQUAL = "equal"


@dataclass(frozen=True)
class AgentComparison:
    rate_first: float
    rate_second: float
    first_more_risk_averse: bool
    second_more_risk_averse: bool
    ordering: Ordering
    interval: Interval

    @property
    def consistent(self) -> bool:
        """A more risk-averse agent never gets the lower rate"""
        if self.first_more_risk_averse and self.ordering is Ordering.SECOND_HIGHER:
            return False
        if self.second_more_risk_averse and self.ordering is Ordering.FIRST_HIGHER:
            return False
        return True


def _comparison_interval(prob1: CoinsuranceProblem, prob2: CoinsuranceProblem) -> Interval:
    hull = support(prob1.risk)
    w = prob1.wealth
    lo, hi = min(w, prob1.w0 - hull.hi), max(w, prob1.w0 - hull.lo)
    for u in (prob1.utility, prob2.utility):
        dom = u.domain
        # open domains: keep a relative margin off the edges
        if lo <= dom.lo:
            lo = dom.lo + 1e-9 * max(1.0, abs(dom.lo))
        if hi >= dom.hi:
            hi = dom.hi - 1e-9 * max(1.0, abs(dom.hi))
    if lo > w or hi < w:
        lo = hi = w
    return Interval(lo, hi)


def compare_agents(prob1: CoinsuranceProblem, prob2: CoinsuranceProblem, grid: int = 101) -> AgentComparison:
    """Approximate rates of two agents facing the same contract, and the risk-aversion ordering"""
    for name in ("w0", "loading", "risk", "operator"):
        if getattr(prob1, name) != getattr(prob2, name):
            raise PreconditionError(f"agents must share everything but the utility; {name} differs")
    rate1, rate2 = approx_rate(prob1), approx_rate(prob2)
    interval = _comparison_interval(prob1, prob2)
    first = more_risk_averse(prob1.utility, prob2.utility, interval, grid)
    second = more_risk_averse(prob2.utility, prob1.utility, interval, grid)
    tol = 1e-12 * max(1.0, abs(rate1), abs(rate2))
    if abs(rate1 - rate2) <= tol:
        ordering = Ordering.EQUAL
    else:
        ordering = Ordering.FIRST_HIGHER if rate1 > rate2 else Ordering.SECOND_HIGHER
    return AgentComparison(rate1, rate2, first, second, ordering, interval)


# ---------- Reports ----------
@dataclass
class SolveDiagnostics:
    iterations: int = 0
    bracket: Optional[Tuple[float, float]] = None
    residual: Optional[float] = None
    var_raw: float = 0.0
    domain_warnings: List[str] = field(default_factory=list)
    rate_warnings: List[str] = field(default_factory=list)


@dataclass
class SolveReport:
    beta_exact: Optional[float]
    beta_approx: float
    H_at_beta_exact: Optional[float]
    H_approx_total: Optional[float]
    premium_P0: float
    E_f: float
    Var_T: float
    w: float
    diagnostics: SolveDiagnostics = field(default_factory=SolveDiagnostics)

    @property
    def warnings(self) -> List[str]:
        return self.diagnostics.domain_warnings + self.diagnostics.rate_warnings


def _rate_warning(label: str, beta: float) -> Optional[str]:
    if not (0.0 < beta <= 1.0):
        logger.warning("%s rate %.6g is outside (0, 1]", label, beta)
        return f"{label} rate outside (0,1]"
    return None


def approximate_report(prob: CoinsuranceProblem) -> SolveReport:
    """Every approximation for the problem, without running the exact solver"""
    diagnostics = SolveDiagnostics(var_raw=prob.variance_raw)
    beta_approx = approx_rate(prob)
    try:
        h_approx = approx_total_utility(prob)
    except DomainError as e:
        h_approx = None
        diagnostics.domain_warnings.append(f"approximate total utility unavailable: {e}")
    note = _rate_warning("approximate", beta_approx)
    if note:
        diagnostics.rate_warnings.append(note)
    return SolveReport(
        beta_exact=None,
        beta_approx=beta_approx,
        H_at_beta_exact=None,
        H_approx_total=h_approx,
        premium_P0=prob.full_premium,
        E_f=prob.expected_loss,
        Var_T=prob.variance,
        w=prob.wealth,
        diagnostics=diagnostics,
    )


def _expand_bracket(prob: CoinsuranceProblem, step: float) -> Tuple[float, float, int]:
    """Walk left from beta = 1 by doubling steps until H' turns positive"""
    left_limit, _ = feasible_rates(prob)
    margin = 1e-9 * max(1.0, abs(left_limit)) if math.isfinite(left_limit) else 0.0
    right = 1.0
    for k in range(MAX_EXPANSIONS):
        candidate = 1.0 - (2.0 ** k) * step
        at_boundary = candidate <= left_limit
        if at_boundary:
            candidate = left_limit + margin
        slope = dH(prob, candidate)
        logger.debug("bracket expansion %d: H'(%.6g) = %.6g", k, candidate, slope)
        if slope >= 0:
            return candidate, right, k + 1
        right = candidate
        if at_boundary:
            raise BracketError(
                f"utility domain ends at rate {left_limit!r} before H' changes sign",
                bracket=(candidate, 1.0),
            )
    raise ConvergenceError(f"no sign change of H' after {MAX_EXPANSIONS} bracket expansions")


def solve_exact(prob: CoinsuranceProblem, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                step: float = DEFAULT_STEP) -> SolveReport:
    """
    Optimal coinsurance rate from the first-order condition H'(beta) = 0.

    Returns a SolveReport that also carries every approximation, so the exact
    and approximate answers can be read side by side.
    """
    violations = is_admissible(prob)
    if violations:
        raise PreconditionError("; ".join(violations))
    hull = support(prob.risk)
    if prob.loading > 0 and prob.full_premium >= hull.hi:
        # every loss sits below the premium: H decreases in beta
        raise PreconditionError(
            f"premium P0={prob.full_premium!r} is at least the largest loss {hull.hi!r}, "
            "so H has no finite maximiser"
        )

    report = approximate_report(prob)
    diagnostics = report.diagnostics

    if prob.loading == 0:
        beta = 1.0
        diagnostics.bracket = (1.0, 1.0)
    else:
        slope_at_one = dH(prob, 1.0)
        if not slope_at_one < 0:
            raise ConvergenceError(f"H'(1) = {slope_at_one!r} should be negative for a positive loading")
        lo, hi, expansions = _expand_bracket(prob, step)
        diagnostics.bracket = (lo, hi)
        if dH(prob, lo) == 0:
            beta, bisections = lo, 0
        else:
            sol = optimize.root_scalar(lambda b: dH(prob, b), bracket=[lo, hi], method="bisect",
                                       xtol=BISECT_XTOL, maxiter=max_iter)
            if not sol.converged:
                raise ConvergenceError(f"bisection did not converge in {max_iter} iterations: {sol.flag}")
            beta, bisections = float(sol.root), sol.iterations
        diagnostics.iterations = expansions + bisections
        if not beta < 1.0:
            raise ConvergenceError(f"positive loading must give a rate below 1, got {beta!r}")

    residual = abs(dH(prob, beta))
    diagnostics.residual = residual
    if residual > tol:
        raise ConvergenceError(f"|H'({beta!r})| = {residual!r} exceeds the tolerance {tol!r}")

    report.beta_exact = beta
    report.H_at_beta_exact = total_utility(prob, beta)
    note = _rate_warning("exact", beta)
    if note:
        diagnostics.rate_warnings.append(note)
    logger.debug("solved %s: beta*=%.12g after %d iterations (residual %.3e)",
                 prob.operator.label, beta, diagnostics.iterations, residual)
    return report

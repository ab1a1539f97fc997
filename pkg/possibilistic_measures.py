# -*- coding: utf-8 -*-

"""
Weighting functions and the weighted possibilistic indicators.

E1 averages u over the two endpoints of each level set, E2 averages u over the
whole level set; both are then weighted by f(gamma). With u the identity both
give the possibilistic expected value E_f, and with u = (x - E_f)^2 they give
the two possibilistic variances Var1 / Var2.

Integrals are Gauss-Legendre quadratures. Shapes shipped in fuzzy_core have
level sets that are affine in s = 1 - gamma, so for power weights the indicators
are polynomial in the moments of s and are computed exactly ("closed form").
"""

import logging
import math
import os
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from fuzzy_core import DomainError, FuzzyNumber, InvalidParameterError, PreconditionError, level_bounds

logger = logging.getLogger(__name__)

DEFAULT_OUTER_NODES = 64
DEFAULT_INNER_NODES = 32
DEFAULT_DEGENERATE_EPS = 1e-12
WEIGHT_INTEGRAL_TOL = 1e-12

ScalarFunction = Callable[[np.ndarray], np.ndarray]


# ---------- Weighting functions ----------
class WeightKind(str, Enum):
    POWER = "power"
    UNIFORM = "uniform"
    CUSTOM = "custom"


@dataclass(frozen=True)
class WeightingFunction:
    kind: WeightKind
    exponent: float = 0.0
    fn: Optional[Callable] = field(default=None, compare=True, repr=False)

    def __post_init__(self):
        if self.kind is WeightKind.POWER and not (self.exponent >= 0 and math.isfinite(self.exponent)):
            raise InvalidParameterError(f"power weight exponent must be >= 0, got {self.exponent}")
        if self.kind is WeightKind.CUSTOM and self.fn is None:
            raise InvalidParameterError("a custom weighting function needs a callable")
        _validate_weight(self)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind is WeightKind.UNIFORM:
            return np.ones_like(t)
        if self.kind is WeightKind.POWER:
            return (self.exponent + 1.0) * np.power(t, self.exponent)
        return np.broadcast_to(np.asarray(self.fn(t), dtype=float), t.shape)

    @property
    def has_exact_moments(self) -> bool:
        return self.kind in (WeightKind.POWER, WeightKind.UNIFORM)

    @property
    def label(self) -> str:
        if self.kind is WeightKind.POWER:
            return f"power({self.exponent:g})"
        return self.kind.value

    def moment(self, k: int) -> float:
        """Exact integral of t^k f(t) over [0, 1]"""
        if not self.has_exact_moments:
            raise PreconditionError("exact moments are only available for power and uniform weights")
        n = self.exponent if self.kind is WeightKind.POWER else 0.0
        return (n + 1.0) / (n + k + 1.0)

    def level_moment(self, k: int) -> float:
        """Exact integral of (1 - t)^k f(t) over [0, 1]"""
        return sum(math.comb(k, i) * (-1) ** i * self.moment(i) for i in range(k + 1))

    def is_triangular_weight(self) -> bool:
        """True for f(t) = 2t"""
        return self.kind is WeightKind.POWER and self.exponent == 1.0


def _validate_weight(f: WeightingFunction):
    grid = np.linspace(0.0, 1.0, 1001)
    values = f(grid)
    if not np.all(np.isfinite(values)) or np.any(values < 0):
        raise InvalidParameterError("weighting function must be finite and non-negative on [0, 1]")
    if np.any(np.diff(values) < -1e-12):
        raise InvalidParameterError("weighting function must be nondecreasing on [0, 1]")
    if f.has_exact_moments:
        return
    total, _ = integrate.quad(lambda t: float(f(t)), 0.0, 1.0, epsabs=1e-14, epsrel=1e-14, limit=200)
    if abs(total - 1.0) > WEIGHT_INTEGRAL_TOL:
        raise InvalidParameterError(f"weighting function must integrate to 1 on [0, 1], got {total!r}")


def make_power_weight(n: float) -> WeightingFunction:
    """f(t) = (n + 1) t^n"""
    return WeightingFunction(WeightKind.POWER, float(n))


def uniform_weight() -> WeightingFunction:
    return WeightingFunction(WeightKind.UNIFORM)


def custom_weight(fn: Callable) -> WeightingFunction:
    return WeightingFunction(WeightKind.CUSTOM, fn=fn)


# ---------- Quadrature ----------
@dataclass(frozen=True)
class QuadratureConfig:
    outer_nodes: int = DEFAULT_OUTER_NODES
    inner_nodes: int = DEFAULT_INNER_NODES
    degenerate_eps: float = DEFAULT_DEGENERATE_EPS

    def __post_init__(self):
        if int(self.outer_nodes) != self.outer_nodes or int(self.inner_nodes) != self.inner_nodes:
            raise InvalidParameterError("quadrature node counts must be integers")
        if self.outer_nodes < 2 or self.inner_nodes < 2:
            raise InvalidParameterError(
                f"quadrature needs at least 2 nodes, got outer={self.outer_nodes}, inner={self.inner_nodes}"
            )
        if not self.degenerate_eps > 0:
            raise InvalidParameterError(f"degenerate_eps must be positive, got {self.degenerate_eps}")


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name, "").strip()
    if not raw:
        return default
    try:
        return int(raw)
    except ValueError:
        raise InvalidParameterError(f"{name} must be an integer, got {raw!r}") from None


def quadrature_from_env(outer_nodes: int = DEFAULT_OUTER_NODES, inner_nodes: int = DEFAULT_INNER_NODES) -> QuadratureConfig:
    """Quadrature with the given node counts, overridden by POSSI_QUAD_NODES / POSSI_QUAD_INNER_NODES"""
    return QuadratureConfig(
        outer_nodes=_env_int("POSSI_QUAD_NODES", outer_nodes),
        inner_nodes=_env_int("POSSI_QUAD_INNER_NODES", inner_nodes),
    )


@lru_cache(maxsize=32)
def gauss_legendre_unit(n: int):
    """Gauss-Legendre nodes and weights mapped to [0, 1] (weights sum to 1)"""
    x, w = np.polynomial.legendre.leggauss(n)
    nodes = 0.5 * (x + 1.0)
    weights = 0.5 * w
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def apply_function(u: ScalarFunction, x: np.ndarray) -> np.ndarray:
    """
    Evaluate a scalar function on an array of points.

    Accepts vectorised callables as well as plain float -> float ones; any
    non-finite output is reported as a DomainError at the first offending point.
    """
    x = np.asarray(x, dtype=float)
    try:
        with np.errstate(all="ignore"):
            values = np.asarray(u(x), dtype=float)
    except DomainError:
        raise
    except (TypeError, ValueError):
        values = np.asarray([_call_scalar(u, float(p)) for p in x.ravel()], dtype=float).reshape(x.shape)
    if values.shape != x.shape:
        values = np.broadcast_to(values, x.shape)
    finite = np.isfinite(values)
    if not finite.all():
        bad = float(x[~finite].ravel()[0])
        raise DomainError(f"function is undefined or not finite at x={bad!r}", point=bad)
    return values


def _call_scalar(u: ScalarFunction, p: float) -> float:
    try:
        return float(u(p))
    except DomainError:
        raise
    except (ValueError, ArithmeticError) as e:
        raise DomainError(f"function evaluation failed at x={p!r}: {e}", point=p) from e


# ---------- Expected utilities ----------
def _outer(f: WeightingFunction, q: QuadratureConfig):
    nodes, weights = gauss_legendre_unit(q.outer_nodes)
    return nodes, weights * f(nodes)


def expected_utility_E1(f: WeightingFunction, u: ScalarFunction, A: FuzzyNumber,
                        q: Optional[QuadratureConfig] = None) -> float:
    """1/2 * integral of [u(a1) + u(a2)] f"""
    q = q or QuadratureConfig()
    gammas, wf = _outer(f, q)
    lo, hi = level_bounds(A, gammas)
    return float(0.5 * np.dot(wf, apply_function(u, lo) + apply_function(u, hi)))


def level_means(u: ScalarFunction, lo: np.ndarray, hi: np.ndarray, q: QuadratureConfig) -> np.ndarray:
    """Mean of u over each interval [lo_i, hi_i]; degenerate intervals collapse to the midpoint"""
    xi, v = gauss_legendre_unit(q.inner_nodes)
    width = hi - lo
    points = lo[:, None] + width[:, None] * xi[None, :]
    means = apply_function(u, points) @ v
    degenerate = width < q.degenerate_eps * (1.0 + np.abs(lo))
    if degenerate.any():
        means = np.where(degenerate, apply_function(u, 0.5 * (lo + hi)), means)
    return means


def expected_utility_E2(f: WeightingFunction, u: ScalarFunction, A: FuzzyNumber,
                        q: Optional[QuadratureConfig] = None) -> float:
    """Integral of [mean of u over the level set] f (unit leading coefficient)"""
    q = q or QuadratureConfig()
    gammas, wf = _outer(f, q)
    lo, hi = level_bounds(A, gammas)
    return float(np.dot(wf, level_means(u, lo, hi, q)))


# ---------- Indicators ----------
def _resolve_method(f: WeightingFunction, method: str) -> bool:
    """True when the closed-form path should be used"""
    if method not in ("auto", "closed_form", "quadrature"):
        raise InvalidParameterError(f"unknown method {method!r}")
    if method == "closed_form" and not f.has_exact_moments:
        raise PreconditionError("closed forms need a power or uniform weighting function")
    return method == "closed_form" or (method == "auto" and f.has_exact_moments)


def expected_value(f: WeightingFunction, A: FuzzyNumber, q: Optional[QuadratureConfig] = None,
                   method: str = "auto") -> float:
    """E_f(A) = 1/2 * integral of [a1 + a2] f"""
    if _resolve_method(f, method):
        s1 = f.level_moment(1)
        return (A.core_lo + A.core_hi) / 2.0 + 0.5 * (A.beta_spread - A.alpha) * s1
    return expected_utility_E1(f, lambda x: x, A, q)


def _clamped(raw: float, name: str) -> float:
    if raw < 0:
        logger.debug("%s dipped to %.3e, clamped at 0", name, raw)
        return 0.0
    return raw


def variance_1_raw(f: WeightingFunction, A: FuzzyNumber, q: Optional[QuadratureConfig] = None,
                   method: str = "auto") -> float:
    e = expected_value(f, A, q, method)
    if _resolve_method(f, method):
        s1, s2 = f.level_moment(1), f.level_moment(2)
        d1, d2 = A.core_lo - e, A.core_hi - e
        alpha, beta = A.alpha, A.beta_spread
        return 0.5 * ((d1 * d1 + d2 * d2) + 2.0 * s1 * (d2 * beta - d1 * alpha) + s2 * (alpha ** 2 + beta ** 2))
    return expected_utility_E1(f, lambda x: (x - e) ** 2, A, q)


def variance_1(f: WeightingFunction, A: FuzzyNumber, q: Optional[QuadratureConfig] = None,
               method: str = "auto") -> float:
    """Var1: endpoint variance around E_f, clamped at 0"""
    return _clamped(variance_1_raw(f, A, q, method), "Var1")


def variance_2_raw(f: WeightingFunction, A: FuzzyNumber, q: Optional[QuadratureConfig] = None,
                   method: str = "auto") -> float:
    e = expected_value(f, A, q, method)
    if _resolve_method(f, method):
        # level mean of (x - e)^2 = (mid - e)^2 + width^2 / 12, both affine in s = 1 - gamma
        s1, s2 = f.level_moment(1), f.level_moment(2)
        m = 0.5 * (A.core_lo + A.core_hi) - e
        h = 0.5 * (A.beta_spread - A.alpha)
        c = A.core_hi - A.core_lo
        k = A.alpha + A.beta_spread
        centre = m * m + 2.0 * m * h * s1 + h * h * s2
        spread = (c * c + 2.0 * c * k * s1 + k * k * s2) / 12.0
        return centre + spread
    return expected_utility_E2(f, lambda x: (x - e) ** 2, A, q)


def variance_2(f: WeightingFunction, A: FuzzyNumber, q: Optional[QuadratureConfig] = None,
               method: str = "auto") -> float:
    """Var2: level-mean variance around E_f, clamped at 0"""
    return _clamped(variance_2_raw(f, A, q, method), "Var2")

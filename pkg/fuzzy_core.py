# -*- coding: utf-8 -*-

"""
Fuzzy numbers represented by their gamma-level sets.

Every shape shipped here has closed-form level sets:

    [A]^gamma = [core_lo - (1 - gamma) * alpha, core_hi + (1 - gamma) * beta_spread]

Triangular numbers have core_lo == core_hi, crisp numbers have zero spreads.
The exception hierarchy used across the package also lives here.
"""

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Optional, Union

import numpy as np

ArrayLike = Union[float, np.ndarray]


# ---------- Errors ----------
class PossibilisticError(Exception):
    """Base class for every error raised by the package"""


class InvalidParameterError(PossibilisticError, ValueError):
    """Bad constructor input (negative spread, empty sample, bad quantiles...)"""


class DomainError(PossibilisticError, ValueError):
    """A value fell outside the domain of a function or of an operation"""

    def __init__(self, message: str, point: Optional[float] = None):
        super().__init__(message)
        self.point = point


class PreconditionError(PossibilisticError, ValueError):
    """An operation was called on inputs it is not defined for"""


# ---------- Domain types ----------
class Shape(str, Enum):
    TRIANGULAR = "triangular"
    TRAPEZOIDAL = "trapezoidal"
    CRISP = "crisp"


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if math.isnan(self.lo) or math.isnan(self.hi):
            raise InvalidParameterError("interval bounds must not be NaN")
        if self.lo > self.hi:
            raise InvalidParameterError(f"interval lower bound {self.lo} exceeds upper bound {self.hi}")

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def as_tuple(self):
        return (self.lo, self.hi)


@dataclass(frozen=True)
class FuzzyNumber:
    shape: Shape
    core_lo: float
    core_hi: float
    alpha: float = 0.0
    beta_spread: float = 0.0

    def __post_init__(self):
        for name in ("core_lo", "core_hi", "alpha", "beta_spread"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InvalidParameterError(f"{name} must be finite, got {value}")
        if self.alpha < 0 or self.beta_spread < 0:
            raise InvalidParameterError(
                f"spreads must be non-negative, got alpha={self.alpha}, beta_spread={self.beta_spread}"
            )
        if self.core_lo > self.core_hi:
            raise InvalidParameterError(f"core_lo {self.core_lo} exceeds core_hi {self.core_hi}")
        if self.shape is Shape.TRIANGULAR and self.core_lo != self.core_hi:
            raise InvalidParameterError("a triangular number has a single-point core")
        if self.shape is Shape.CRISP and (
            self.core_lo != self.core_hi or self.alpha != 0 or self.beta_spread != 0
        ):
            raise InvalidParameterError("a crisp number has a single-point core and zero spreads")

    @property
    def center(self) -> float:
        """Midpoint of the core (the peak for triangular and crisp numbers)"""
        return 0.5 * (self.core_lo + self.core_hi)

    def lower(self, gamma: ArrayLike) -> ArrayLike:
        """a1(gamma), vectorised over numpy arrays"""
        return self.core_lo - (1.0 - gamma) * self.alpha

    def upper(self, gamma: ArrayLike) -> ArrayLike:
        """a2(gamma), vectorised over numpy arrays"""
        return self.core_hi + (1.0 - gamma) * self.beta_spread

    def scaled_spreads(self, t: float) -> "FuzzyNumber":
        """Same core, spreads multiplied by t >= 0"""
        if t < 0:
            raise InvalidParameterError(f"spread scale must be non-negative, got {t}")
        if self.shape is Shape.CRISP:
            return self
        return replace(self, alpha=self.alpha * t, beta_spread=self.beta_spread * t)

    def describe(self) -> str:
        if self.shape is Shape.CRISP:
            return f"crisp({self.core_lo:g})"
        if self.shape is Shape.TRIANGULAR:
            return f"triangular({self.core_lo:g}, {self.alpha:g}, {self.beta_spread:g})"
        return f"trapezoidal({self.core_lo:g}, {self.core_hi:g}, {self.alpha:g}, {self.beta_spread:g})"


# ---------- Constructors ----------
def make_triangular(a: float, alpha: float, beta_spread: float) -> FuzzyNumber:
    """Triangular number (a, alpha, beta_spread): peak a, support (a - alpha, a + beta_spread)"""
    return FuzzyNumber(Shape.TRIANGULAR, float(a), float(a), float(alpha), float(beta_spread))


def make_trapezoidal(core_lo: float, core_hi: float, alpha: float, beta_spread: float) -> FuzzyNumber:
    return FuzzyNumber(Shape.TRAPEZOIDAL, float(core_lo), float(core_hi), float(alpha), float(beta_spread))


def make_crisp(a: float) -> FuzzyNumber:
    return FuzzyNumber(Shape.CRISP, float(a), float(a))


def trapezoid_from_samples(data: Iterable[float], lo_q: float, hi_q: float) -> FuzzyNumber:
    """
    Build a trapezoidal number from a sample.

    Core is [quantile(lo_q), quantile(hi_q)] with linear interpolation between
    adjacent order statistics, support is [min, max].
    """
    values = np.asarray(list(data), dtype=float)
    if values.size == 0:
        raise InvalidParameterError("cannot build a fuzzy number from an empty sample")
    if not np.all(np.isfinite(values)):
        raise InvalidParameterError("sample contains non-finite values")
    if not (0.0 <= lo_q < hi_q <= 1.0):
        raise InvalidParameterError(f"quantiles must satisfy 0 <= lo_q < hi_q <= 1, got {lo_q}, {hi_q}")

    core_lo, core_hi = np.quantile(values, [lo_q, hi_q], method="linear")
    smallest, largest = float(values.min()), float(values.max())
    # clip guards the ulp-level overshoot of the interpolation on constant samples
    core_lo = float(min(max(core_lo, smallest), largest))
    core_hi = float(min(max(core_hi, core_lo), largest))
    return make_trapezoidal(core_lo, core_hi, core_lo - smallest, largest - core_hi)


# ---------- Evaluation ----------
def _check_gamma(gamma: float):
    if not (0.0 <= gamma <= 1.0):
        raise DomainError(f"level gamma must lie in [0, 1], got {gamma}", point=gamma)


def level_set(A: FuzzyNumber, gamma: float) -> Interval:
    """[a1(gamma), a2(gamma)]"""
    _check_gamma(gamma)
    return Interval(float(A.lower(gamma)), float(A.upper(gamma)))


def level_bounds(A: FuzzyNumber, gammas: np.ndarray):
    """Vectorised level sets: arrays (a1(gammas), a2(gammas))"""
    gammas = np.asarray(gammas, dtype=float)
    if gammas.size and (gammas.min() < 0.0 or gammas.max() > 1.0):
        bad = gammas[(gammas < 0.0) | (gammas > 1.0)][0]
        raise DomainError(f"level gamma must lie in [0, 1], got {bad}", point=float(bad))
    return A.lower(gammas), A.upper(gammas)


def support(A: FuzzyNumber) -> Interval:
    """Closed hull (a1(0), a2(0)) of the support; `.is_point` flags a degenerate support"""
    return level_set(A, 0.0)

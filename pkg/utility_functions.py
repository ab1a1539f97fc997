# -*- coding: utf-8 -*-

"""
Risk-averse utility families with analytic derivatives.

Every family satisfies u' > 0 and u'' < 0 on its declared (open) domain;
evaluating outside the domain raises DomainError instead of clamping.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

import numpy as np

from fuzzy_core import DomainError, Interval, InvalidParameterError

ArrayLike = Union[float, np.ndarray]


class UtilityKind(str, Enum):
    HARA = "hara"
    CRRA = "crra"
    LOG = "log"
    CARA = "cara"
    QUADRATIC = "quadratic"


@dataclass(frozen=True)
class UtilityFunction:
    kind: UtilityKind
    zeta: float = 1.0
    eta: float = 0.0
    gamma_p: float = 1.0
    c: float = 0.0
    b: float = math.inf

    def __post_init__(self):
        if self.kind is UtilityKind.HARA:
            if self.gamma_p == 0 or self.gamma_p == 1:
                raise InvalidParameterError(f"HARA needs gamma_p not in {{0, 1}}, got {self.gamma_p}")
            if not self.zeta * (1.0 - self.gamma_p) / self.gamma_p > 0:
                raise InvalidParameterError(
                    "HARA needs zeta * (1 - gamma_p) / gamma_p > 0 for u' > 0 and u'' < 0"
                )
        elif self.kind is UtilityKind.CRRA:
            if not self.gamma_p >= 1:
                raise InvalidParameterError(f"CRRA is supported for gamma_p >= 1, got {self.gamma_p}")
        elif self.kind is UtilityKind.QUADRATIC:
            if not self.c > 0:
                raise InvalidParameterError(f"quadratic utility needs c > 0, got {self.c}")
            if self.b > 1.0 / self.c:
                raise InvalidParameterError(f"quadratic utility domain bound b must be <= 1/c = {1.0 / self.c}")

    # ---------- domain ----------
    @property
    def domain(self) -> Interval:
        """Open interval of validity (bounds may be infinite)"""
        if self.kind is UtilityKind.HARA:
            edge = -self.eta * self.gamma_p
            return Interval(edge, math.inf) if self.gamma_p > 0 else Interval(-math.inf, edge)
        if self.kind in (UtilityKind.CRRA, UtilityKind.LOG):
            return Interval(0.0, math.inf)
        if self.kind is UtilityKind.QUADRATIC:
            return Interval(-math.inf, self.b)
        return Interval(-math.inf, math.inf)

    def in_domain(self, w: ArrayLike) -> np.ndarray:
        d = self.domain
        w = np.asarray(w, dtype=float)
        return (w > d.lo) & (w < d.hi)

    def check_domain(self, w: ArrayLike):
        inside = self.in_domain(w)
        if not np.all(inside):
            bad = float(np.asarray(w, dtype=float)[~inside].ravel()[0])
            raise DomainError(f"wealth {bad!r} is outside the domain of {self.label} utility {self.domain.as_tuple()}",
                              point=bad)

    @property
    def is_log(self) -> bool:
        return self.kind is UtilityKind.LOG or (self.kind is UtilityKind.CRRA and self.gamma_p == 1)

    @property
    def label(self) -> str:
        if self.kind is UtilityKind.HARA:
            return f"hara({self.zeta:g}, {self.eta:g}, {self.gamma_p:g})"
        if self.kind is UtilityKind.CRRA:
            return f"crra({self.gamma_p:g})"
        if self.kind is UtilityKind.QUADRATIC:
            return f"quadratic({self.c:g})"
        return self.kind.value

    # ---------- evaluators ----------
    def _hara_base(self, w):
        return self.eta + w / self.gamma_p

    def value(self, w: ArrayLike) -> ArrayLike:
        self.check_domain(w)
        w = np.asarray(w, dtype=float)
        if self.kind is UtilityKind.HARA:
            out = self.zeta * np.power(self._hara_base(w), 1.0 - self.gamma_p)
        elif self.is_log:
            out = np.log(w)
        elif self.kind is UtilityKind.CRRA:
            out = np.power(w, 1.0 - self.gamma_p) / (1.0 - self.gamma_p)
        elif self.kind is UtilityKind.CARA:
            out = -np.exp(-w)
        else:
            out = w - 0.5 * self.c * w * w
        return out if out.ndim else float(out)

    def d1(self, w: ArrayLike) -> ArrayLike:
        self.check_domain(w)
        w = np.asarray(w, dtype=float)
        if self.kind is UtilityKind.HARA:
            out = self.zeta * (1.0 - self.gamma_p) / self.gamma_p * np.power(self._hara_base(w), -self.gamma_p)
        elif self.kind in (UtilityKind.CRRA, UtilityKind.LOG):
            out = np.power(w, -self.gamma_p if self.kind is UtilityKind.CRRA else -1.0)
        elif self.kind is UtilityKind.CARA:
            out = np.exp(-w)
        else:
            out = 1.0 - self.c * w
        return out if out.ndim else float(out)

    def d2(self, w: ArrayLike) -> ArrayLike:
        self.check_domain(w)
        w = np.asarray(w, dtype=float)
        if self.kind is UtilityKind.HARA:
            out = -self.zeta * (1.0 - self.gamma_p) / self.gamma_p * np.power(self._hara_base(w), -self.gamma_p - 1.0)
        elif self.kind is UtilityKind.CRRA:
            out = -self.gamma_p * np.power(w, -self.gamma_p - 1.0)
        elif self.kind is UtilityKind.LOG:
            out = -1.0 / (w * w)
        elif self.kind is UtilityKind.CARA:
            out = -np.exp(-w)
        else:
            out = np.full_like(w, -self.c)
        return out if out.ndim else float(out)

    def __call__(self, w: ArrayLike) -> ArrayLike:
        return self.value(w)


# ---------- Constructors ----------
def hara(zeta: float, eta: float, gamma_p: float) -> UtilityFunction:
    """u(w) = zeta * (eta + w / gamma_p)^(1 - gamma_p) for eta + w / gamma_p > 0"""
    return UtilityFunction(UtilityKind.HARA, zeta=float(zeta), eta=float(eta), gamma_p=float(gamma_p))


def crra(gamma_p: float) -> UtilityFunction:
    """w^(1 - gamma_p) / (1 - gamma_p) for gamma_p > 1, ln(w) for gamma_p == 1"""
    return UtilityFunction(UtilityKind.CRRA, gamma_p=float(gamma_p))


def log_utility() -> UtilityFunction:
    return UtilityFunction(UtilityKind.LOG)


def cara() -> UtilityFunction:
    """u(x) = -exp(-x)"""
    return UtilityFunction(UtilityKind.CARA)


def quadratic(c: float, b: Optional[float] = None) -> UtilityFunction:
    """u(x) = x - (c/2) x^2 on x < b (b defaults to 1/c, where u' vanishes)"""
    c = float(c)
    if not c > 0:
        raise InvalidParameterError(f"quadratic utility needs c > 0, got {c}")
    return UtilityFunction(UtilityKind.QUADRATIC, c=c, b=1.0 / c if b is None else float(b))


# ---------- Risk aversion ----------
def arrow_pratt(u: UtilityFunction, w: float) -> float:
    """r_u(w) = -u''(w) / u'(w)"""
    u.check_domain(w)
    if u.kind is UtilityKind.HARA:
        return 1.0 / (u.eta + w / u.gamma_p)
    if u.kind is UtilityKind.CRRA:
        return u.gamma_p / w
    if u.kind is UtilityKind.LOG:
        return 1.0 / w
    if u.kind is UtilityKind.CARA:
        return 1.0
    return u.c / (1.0 - u.c * w)


def more_risk_averse(u1: UtilityFunction, u2: UtilityFunction, interval: Interval, grid: int = 101) -> bool:
    """True iff r_u1 >= r_u2 at every point of an evenly spaced grid over the interval"""
    if grid < 1:
        raise InvalidParameterError(f"grid needs at least one point, got {grid}")
    points = np.linspace(interval.lo, interval.hi, grid) if grid > 1 else np.array([interval.lo])
    u1.check_domain(points)
    u2.check_domain(points)
    return all(arrow_pratt(u1, float(w)) >= arrow_pratt(u2, float(w)) for w in points)


# ---------- Affine compositions ----------
@dataclass(frozen=True)
class AffineComposite:
    """
    x -> u(shift + scale * x), with chain-rule derivatives.

    The coinsurance wealth map g(x, beta) = w0 - beta * P0 - (1 - beta) x is of
    this form, so h(x, beta) = u(g(x, beta)) and its x-derivatives come from here.
    """
    utility: UtilityFunction
    shift: float
    scale: float

    def _arg(self, x):
        return self.shift + self.scale * np.asarray(x, dtype=float)

    def value(self, x: ArrayLike) -> ArrayLike:
        return self.utility.value(self._arg(x))

    def d1(self, x: ArrayLike) -> ArrayLike:
        return self.scale * self.utility.d1(self._arg(x))

    def d2(self, x: ArrayLike) -> ArrayLike:
        return self.scale * self.scale * self.utility.d2(self._arg(x))

    def in_domain(self, x: ArrayLike) -> np.ndarray:
        return self.utility.in_domain(self._arg(x))

    def __call__(self, x: ArrayLike) -> ArrayLike:
        return self.value(x)


def compose_affine(u: UtilityFunction, shift: float, scale: float) -> AffineComposite:
    return AffineComposite(u, float(shift), float(scale))

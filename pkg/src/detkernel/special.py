"""Gamma-function toolkit with sign tracking.

Magnitudes are carried as natural logarithms with a separate sign so that
long products of Gamma values never overflow before the final
materialization.  The reciprocal Gamma function is entire and is the
building block for every pole-free coefficient formula.

Internally the C library ``lgamma``/``gamma`` are used for positive
arguments and an exact-reduction reflection formula for the rest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Union

from .errors import PoleError

__all__ = [
    "POLE_TOLERANCE",
    "SignedLogValue",
    "Germ",
    "gamma_germ",
    "is_gamma_pole",
    "log_gamma_signed",
    "pochhammer",
    "reciprocal_gamma",
    "reciprocal_gamma_germ",
    "signed_log_product",
]

POLE_TOLERANCE = 1e-9
_DIRECT_POCHHAMMER_MAX = 64
_LOG_PI = math.log(math.pi)

Number = Union[float, complex]


@dataclass(frozen=True)
class SignedLogValue:
    """A real number stored as ``sign * exp(log_magnitude)``.

    ``sign == 0`` encodes an exact zero; ``log_magnitude`` is then ``-inf``
    and carries no information.
    """

    log_magnitude: float
    sign: int

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError(f"sign must be -1, 0 or +1, got {self.sign!r}")

    @classmethod
    def zero(cls) -> "SignedLogValue":
        return cls(-math.inf, 0)

    @classmethod
    def from_value(cls, x: float) -> "SignedLogValue":
        x = float(x)
        if x == 0.0:
            return cls.zero()
        return cls(math.log(abs(x)), 1 if x > 0 else -1)

    @property
    def value(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.log_magnitude)

    def __float__(self) -> float:
        return self.value

    def __mul__(self, other: "SignedLogValue") -> "SignedLogValue":
        if not isinstance(other, SignedLogValue):
            return NotImplemented
        if self.sign == 0 or other.sign == 0:
            return SignedLogValue.zero()
        return SignedLogValue(self.log_magnitude + other.log_magnitude,
                              self.sign * other.sign)

    def __truediv__(self, other: "SignedLogValue") -> "SignedLogValue":
        if not isinstance(other, SignedLogValue):
            return NotImplemented
        if other.sign == 0:
            raise ZeroDivisionError("division by an exact zero")
        if self.sign == 0:
            return SignedLogValue.zero()
        return SignedLogValue(self.log_magnitude - other.log_magnitude,
                              self.sign * other.sign)

    def reciprocal(self) -> "SignedLogValue":
        return SignedLogValue(0.0, 1) / self


def signed_log_product(factors: Iterable[SignedLogValue]) -> SignedLogValue:
    """Product of signed-log factors, summing logs with ``math.fsum``."""
    logs = []
    sign = 1
    for f in factors:
        if f.sign == 0:
            return SignedLogValue.zero()
        sign *= f.sign
        logs.append(f.log_magnitude)
    return SignedLogValue(math.fsum(logs), sign)


def is_gamma_pole(x: float) -> bool:
    """True iff ``x`` is within ``POLE_TOLERANCE`` of a non-positive integer."""
    r = round(x)
    return r <= 0 and abs(x - r) <= POLE_TOLERANCE


def _sinpi_signed(x: float) -> tuple[float, int]:
    """Return ``(log|sin(pi x)|, sign)`` with exact argument reduction."""
    r = round(x)
    frac = x - r  # exact in binary floating point
    s = math.sin(math.pi * frac)
    if r % 2:
        s = -s
    if s == 0.0:
        return -math.inf, 0
    return math.log(abs(s)), (1 if s > 0 else -1)


def _log_gamma_core(x: float) -> tuple[float, int]:
    # assumes x is not a pole
    if x >= 0.5:
        return math.lgamma(x), 1
    # Gamma(x) = pi / (sin(pi x) Gamma(1 - x))
    ls, ss = _sinpi_signed(x)
    return _LOG_PI - ls - math.lgamma(1.0 - x), ss


def log_gamma_signed(x: float) -> SignedLogValue:
    """Logarithm of ``|Gamma(x)|`` together with the sign of ``Gamma(x)``.

    Parameters
    ----------
    x : float
        Finite argument, not a non-positive integer.

    Returns
    -------
    SignedLogValue

    Raises
    ------
    PoleError
        If ``x`` is a pole of Gamma.
    """
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"non-finite argument {x!r}")
    if is_gamma_pole(x):
        raise PoleError(round(x))
    lm, sg = _log_gamma_core(x)
    return SignedLogValue(lm, sg)


def reciprocal_gamma(x: float) -> float:
    """Entire function ``1/Gamma(x)``; exactly zero at the poles of Gamma."""
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"non-finite argument {x!r}")
    if is_gamma_pole(x):
        return 0.0
    if 0.5 <= x < 171.0:
        return 1.0 / math.gamma(x)
    if x >= 171.0:
        return math.exp(-math.lgamma(x))
    # 1/Gamma(x) = sin(pi x) Gamma(1 - x) / pi
    ls, ss = _sinpi_signed(x)
    if 1.0 - x < 171.0:
        r = math.exp(ls) * math.gamma(1.0 - x) / math.pi
    else:
        lr = ls + math.lgamma(1.0 - x) - _LOG_PI
        r = math.exp(lr) if lr < 709.0 else math.inf  # beyond double range
    return ss * r


def pochhammer(a: float, k: int) -> float:
    """Rising factorial ``(a)_k = Gamma(a + k) / Gamma(a)`` for integer ``k``.

    Negative ``k`` gives ``1 / ((a - 1)(a - 2)...(a + k))``.

    Raises
    ------
    PoleError
        If a factor in the negative-``k`` product is zero.
    """
    k = int(k)
    a = float(a)
    if k == 0:
        return 1.0
    direct = abs(k) <= _DIRECT_POCHHAMMER_MAX or is_gamma_pole(a) or is_gamma_pole(a + k)
    if direct:
        if k > 0:
            out = 1.0
            for i in range(k):
                out *= a + i
            return out
        out = 1.0
        for i in range(1, -k + 1):
            f = a - i
            if f == 0.0:
                raise PoleError(round(a - i), f"(a)_{k} divides by zero at a={a}")
            out *= f
        return 1.0 / out
    num = log_gamma_signed(a + k)
    den = log_gamma_signed(a)
    return (num / den).value


@dataclass(frozen=True)
class Germ:
    """Leading Laurent term ``coefficient * eps**order`` as ``eps -> 0``.

    ``coefficient == 0`` encodes a function that vanishes identically along
    the approach direction.
    """

    coefficient: Number
    order: int = 0

    @property
    def is_zero(self) -> bool:
        return self.coefficient == 0

    def __mul__(self, other: "Germ") -> "Germ":
        if self.is_zero or other.is_zero:
            return Germ(0.0, 0)
        return Germ(self.coefficient * other.coefficient, self.order + other.order)

    def scale(self, c: Number) -> "Germ":
        return Germ(self.coefficient * c, self.order) if c != 0 else Germ(0.0, 0)

    def limit(self) -> Number:
        """Value as ``eps -> 0``; raises ``PoleError`` if it diverges."""
        if self.is_zero or self.order > 0:
            return 0.0
        if self.order < 0:
            raise PoleError(0, f"germ diverges like eps^{self.order}")
        return self.coefficient


def _pole_index(x0: float) -> int | None:
    return -round(x0) if is_gamma_pole(x0) else None


def gamma_germ(x0: float, d: Number) -> Germ:
    """Germ of ``Gamma(x0 + d*eps)``.

    At a pole ``-k`` the leading term is ``(-1)**k / (k! d eps)``.
    """
    k = _pole_index(x0)
    if k is None:
        lg = log_gamma_signed(x0)
        return Germ(lg.value, 0)
    if d == 0:
        raise PoleError(-k, "Gamma evaluated exactly at a pole")
    return Germ((-1) ** k / (math.factorial(k) * d), -1)


def reciprocal_gamma_germ(x0: float, d: Number) -> Germ:
    """Germ of ``1/Gamma(x0 + d*eps)``; vanishes identically if ``d == 0`` at a pole."""
    k = _pole_index(x0)
    if k is None:
        return Germ(reciprocal_gamma(x0), 0)
    if d == 0:
        return Germ(0.0, 0)
    return Germ((-1) ** k * math.factorial(k) * d, 1)

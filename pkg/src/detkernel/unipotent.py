"""Coefficients near the integer points ``sigma = -n + alpha``, ``tau = 0``.

Blow-up coordinates ``sigma = -n + alpha + s eps``, ``tau = t eps`` resolve
the direction-dependent limits.  Along a generic direction every U-family
coefficient behaves like

    eps^k * t^j s^(n-alpha-j) / (s+t)^(n-alpha) * R_m(s, t, eps)

where ``j = #{m_i < 0}`` and ``k = alpha - #{0 <= m_i <= alpha-1}``.  The
signatures with ``k = 0`` form the blocks ``Z_theta`` (``theta = j``); all
others are the tail and vanish in the limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import special as sps

from .errors import InvalidSignature, NonConstantResidue, PoleLine
from .plancherel import Calibration, coefficient, coefficient_germ, default_calibration
from .kernels import SpectralParameter
from .signatures import GroupFamily, Signature, enumerate_signatures

__all__ = [
    "BlowupPoint",
    "SignatureClass",
    "blowup_coefficient",
    "blowup_limit",
    "classify_O_unipotent",
    "classify_signature",
    "coefficient_orders",
    "extrapolated_limit",
    "o_unipotent_limit",
    "slope",
    "unipotent_report",
    "xi_coefficient",
]

GENERIC_DIRECTIONS = ((1.0, 1.0), (1.0, 2.0))
EPS_LADDER = (1e-2, 1e-3, 1e-4)
CONSTANCY_TOL = {"exact": 1e-8, "richardson": 1e-5}


@dataclass(frozen=True)
class BlowupPoint:
    """Point ``(s, t, eps)``; ``(s u, t u, eps/u)`` describes the same parameters."""

    alpha: int
    s: complex
    t: complex
    eps: complex

    def __post_init__(self):
        if self.s == 0 and self.t == 0:
            raise ValueError("(s, t) must not both vanish")
        if int(self.alpha) != self.alpha or self.alpha < 1:
            raise ValueError("alpha must be a positive integer")

    def parameters(self, n: int) -> tuple[complex, complex]:
        return (-n + self.alpha + self.s * self.eps, self.t * self.eps)

    def rescaled(self, u: complex) -> "BlowupPoint":
        return BlowupPoint(self.alpha, self.s * u, self.t * u, self.eps / u)


@dataclass(frozen=True)
class SignatureClass:
    """``kind`` is ``"Z"`` (with ``theta``) or ``"Tail"``."""

    kind: str
    theta: int | None = None

    def __str__(self) -> str:
        return f"Z{self.theta}" if self.kind == "Z" else "Tail"


def _check_alpha_u(alpha: int, n: int) -> None:
    if not 1 <= alpha <= n - 1:
        raise ValueError(f"alpha must lie in [1, {n - 1}] for U({n})")


def _unitary(sig: Signature) -> None:
    if sig.family.kind != "U":
        raise InvalidSignature("a U-family signature is required")


def classify_signature(alpha: int, sig: Signature) -> SignatureClass:
    """``Z_theta`` if the parts ``alpha-1, ..., 0`` sit at positions ``n-alpha-theta+1 .. n-theta``."""
    _unitary(sig)
    n = sig.rank
    _check_alpha_u(alpha, n)
    theta = sum(1 for m in sig.parts if m < 0)
    lo = n - alpha - theta
    if lo >= 0 and sig.parts[lo:n - theta] == tuple(range(alpha - 1, -1, -1)):
        return SignatureClass("Z", theta)
    return SignatureClass("Tail")


def coefficient_orders(alpha: int, sig: Signature) -> tuple[int, int]:
    """Exponents ``(k, j)`` of ``eps`` and ``t`` in the blow-up factorization.

    Counted from the Gamma factors: the prefactor has ``n - alpha`` simple
    poles, ``1/Gamma(alpha - m_i + s eps)`` vanishes for ``m_i >= alpha`` and
    ``1/Gamma(m_i + 1 + t eps)`` vanishes for ``m_i <= -1``.
    """
    _unitary(sig)
    n = sig.rank
    _check_alpha_u(alpha, n)
    s_zeros = sum(1 for m in sig.parts if m >= alpha)
    t_zeros = sum(1 for m in sig.parts if m <= -1)
    return s_zeros + t_zeros - (n - alpha), t_zeros


def _complex_coefficient(sigma: complex, tau: complex, sig: Signature, kappa: float) -> complex:
    n = sig.rank
    parts = sig.parts
    out = kappa * (-1) ** (n * (n - 1) // 2) * 2.0 ** (-(sigma + tau) * n)
    out *= np.prod([sps.gamma(sigma + tau + j) for j in range(1, n + 1)])
    out *= (-1) ** (sum(parts) % 2) * math.prod(parts[a] - parts[b] for a in range(n) for b in range(a + 1, n))
    out *= np.prod([sps.rgamma(sigma - m + n) * sps.rgamma(tau + m + 1) for m in parts])
    return complex(out)


def _check_pole_line(s: complex, t: complex) -> None:
    if abs(s + t) < 1e-6 * max(abs(s), abs(t)):
        raise PoleLine("s + t = 0 is the pole line of the blow-up")


def blowup_coefficient(bp: BlowupPoint, n: int, sig: Signature,
                       calibration: Calibration | None = None):
    """U-family coefficient at the parameters of a blow-up point."""
    _unitary(sig)
    _check_pole_line(bp.s, bp.t)
    sigma, tau = bp.parameters(n)
    kappa = (calibration or default_calibration()).kappa(GroupFamily("U", n))
    if np.isreal(sigma) and np.isreal(tau):
        p = SpectralParameter.unitary(n, float(np.real(sigma)), float(np.real(tau)))
        return coefficient(p, sig, calibration)
    return _complex_coefficient(sigma, tau, sig, kappa)


def blowup_limit(alpha: int, sig: Signature, s: complex, t: complex,
                 calibration: Calibration | None = None) -> complex:
    """Exact ``eps -> 0`` limit along ``(s, t)`` from Laurent leading terms."""
    _unitary(sig)
    _check_pole_line(s, t)
    n = sig.rank
    germ = coefficient_germ(sig.family, (-n + alpha, 0.0), (s, t), sig, calibration)
    return germ.limit()


def _neville_at_zero(xs: Sequence[float], ys: Sequence[complex]) -> complex:
    """Polynomial interpolation through ``(xs, ys)`` evaluated at zero."""
    p = list(ys)
    m = len(xs)
    for k in range(1, m):
        for i in range(m - k):
            p[i] = (xs[i + k] * p[i] - xs[i] * p[i + 1]) / (xs[i + k] - xs[i])
    return p[0]


def extrapolated_limit(alpha: int, sig: Signature, s: float, t: float,
                       ladder: Sequence[float] = EPS_LADDER,
                       calibration: Calibration | None = None) -> complex:
    """Richardson (polynomial) extrapolation of the coefficient to ``eps = 0``."""
    n = sig.rank
    vals = [blowup_coefficient(BlowupPoint(alpha, s, t, e), n, sig, calibration) for e in ladder]
    return _neville_at_zero(list(ladder), vals)


def _universal_factor(n: int, alpha: int, j: int, s: complex, t: complex) -> complex:
    return t ** j * s ** (n - alpha - j) / (s + t) ** (n - alpha)


def xi_coefficient(alpha: int, j: int, sig: Signature,
                   calibration: Calibration | None = None, method: str = "exact",
                   tol: float | None = None) -> float:
    """Residual factor ``R_m`` of a ``Z_j`` signature; zero outside ``Z_j``.

    ``R_m = lim coefficient * (s+t)^(n-alpha) / (t^j s^(n-alpha-j))`` at the
    two generic directions ``(1, 1)`` and ``(1, 2)``; they must agree.

    Parameters
    ----------
    method : {"exact", "richardson"}
        Laurent leading terms, or extrapolation over the ``eps`` ladder.
    tol : float, optional
        Relative agreement required between directions; ``1e-8`` for the
        exact limit and ``1e-5`` for the extrapolated one by default.

    Raises
    ------
    NonConstantResidue
        If the two directions disagree beyond ``tol``.
    """
    if method not in CONSTANCY_TOL:
        raise ValueError(f"unknown method {method!r}")
    tol = CONSTANCY_TOL[method] if tol is None else tol
    cls = classify_signature(alpha, sig)
    if cls.kind != "Z" or cls.theta != j:
        return 0.0
    n = sig.rank
    vals = []
    for s, t in GENERIC_DIRECTIONS:
        if method == "exact":
            lim = blowup_limit(alpha, sig, s, t, calibration)
        else:
            lim = extrapolated_limit(alpha, sig, s, t, calibration=calibration)
        vals.append(complex(lim) / _universal_factor(n, alpha, j, s, t))
    a, b = vals
    if abs(a - b) > tol * max(abs(a), abs(b)):
        raise NonConstantResidue(f"{sig}: R differs between directions ({a} vs {b})")
    return float(np.real(a))


def slope(alpha: int, sig: Signature, s: float = 1.0, t: float = 2.0,
          eps: tuple[float, float] = (1e-4, 1e-6), calibration: Calibration | None = None) -> float:
    """Empirical exponent ``d log|c| / d log eps`` between two ``eps`` values."""
    n = sig.rank
    c1, c2 = (abs(blowup_coefficient(BlowupPoint(alpha, s, t, e), n, sig, calibration)) for e in eps)
    return math.log(c1 / c2) / math.log(eps[0] / eps[1])


def classify_O_unipotent(alpha: int, sig: Signature, n: int | None = None) -> bool:
    """True iff the trailing ``alpha`` parts are ``alpha-1, ..., 1, 0``."""
    if sig.family.kind != "O":
        raise InvalidSignature("an O-family signature is required")
    n = sig.rank if n is None else n
    if not 1 <= alpha <= n:
        raise ValueError(f"alpha must lie in [1, {n}]")
    return sig.parts[n - alpha:] == tuple(range(alpha - 1, -1, -1))


def o_unipotent_limit(alpha: int, sig: Signature, calibration: Calibration | None = None) -> float:
    """Limit of the O-family coefficient as ``lam -> -n + alpha``."""
    n = sig.rank
    germ = coefficient_germ(sig.family, (float(-n + alpha),), (1.0,), sig, calibration)
    return float(np.real(germ.limit()))


def unipotent_report(n: int, alpha: int, bound: int = 6,
                     calibration: Calibration | None = None) -> dict:
    """Per-signature class, orders and ``R`` values with per-block sign summary."""
    fam = GroupFamily("U", n)
    rows = []
    blocks: dict[str, set[int]] = {}
    for sig in enumerate_signatures(fam, bound):
        cls = classify_signature(alpha, sig)
        k, j = coefficient_orders(alpha, sig)
        row = {"parts": list(sig.parts), "class": str(cls), "k": k, "j": j}
        if cls.kind == "Z":
            xi = xi_coefficient(alpha, cls.theta, sig, calibration)
            row["xi"] = xi
            blocks.setdefault(str(cls), set()).add(int(np.sign(xi)))
        rows.append(row)
    summary = {name: {"signs": sorted(signs), "sign_constant": len(signs) == 1}
               for name, signs in sorted(blocks.items())}
    return {"family": "U", "rank": n, "alpha": alpha, "bound": bound,
            "signatures": rows, "blocks": summary}

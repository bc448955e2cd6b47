"""Closed-form character-expansion coefficients of the determinant kernels.

Pole-free forms (``kappa`` is the calibration constant of the family):

U(n)::

    c_m = kappa (-1)^{n(n-1)/2} 2^{-(s+t)n} prod_{j=1}^n Gamma(s+t+j)
          * (-1)^{sum m} prod_{a<b}(m_a - m_b)
          / prod_j Gamma(s - m_j + n) Gamma(t + m_j + 1)

O(2n)::

    c_l = kappa (-1)^{n(n-1)/2} 2^{-2n lam + 1} prod_{k=1}^n Gamma(2 lam + 2k - 1)
          * (-1)^{sum l} prod_{a<b}(l_a^2 - l_b^2)
          / prod_j Gamma(-l_j + lam + n) Gamma(l_j + lam + n)

Sp(n)::

    c_l = kappa 2^{-2n lam} prod_{k=1}^n Gamma(2 lam + 2k)
          * prod_a (2 l_a) prod_{a<b}(l_a^2 - l_b^2) (-1)^{sum l}
          / prod_j Gamma(lam + n + 1 - l_j) Gamma(lam + n + 1 + l_j)

Every coefficient equals the projection ``<ell, chi_sig>`` with respect to
normalized Haar measure (SO(2n) for the O family).  The reciprocal Gamma
factors are entire; only the Gamma prefactor can be singular.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .characters import TorusPoint, character, separable_projection
from .errors import (
    AnalyticEmpiricalMismatch,
    CalibrationError,
    MixedFamily,
    PoleError,
    PrefactorPole,
)
from .kernels import SpectralParameter
from .signatures import (
    GroupFamily,
    Signature,
    dimension_unitary,
    enumerate_signatures,
    trivial_signature,
)
from .special import (
    Germ,
    SignedLogValue,
    gamma_germ,
    is_gamma_pole,
    log_gamma_signed,
    reciprocal_gamma_germ,
    signed_log_product,
)

__all__ = [
    "Calibration",
    "HarmonicExpansion",
    "PositivityVerdict",
    "berezin_wallach_classify",
    "calibrate",
    "classify_positivity",
    "coefficient",
    "coefficient_germ",
    "coefficient_signed",
    "default_calibration",
    "inner_product",
    "positivity_map",
    "printed_coefficient",
    "reconstruct_kernel",
    "sobolev_norm_sq",
    "sobolev_order",
    "sobolev_ratio_spread",
]

LN2 = math.log(2.0)

PRINTED_FORMULAS = {
    "U": "(-1)^{n(n-1)/2} sin^n(pi s) 2^{-(s+t)n} pi^{-n} prod_j Gamma(s+t+j) "
         "prod_{a<b}(m_a-m_b) prod_j Gamma(-s+m_j-n+1)/Gamma(t+m_j+1)",
    "O": "(-1)^{n(n-1)/2} 2^{2n lam+1} pi^{-n} sin^n(pi lam) prod_k Gamma(2lam+2k-1) "
         "prod_{a<b}(l_a^2-l_b^2) prod_j Gamma(l_j-lam-n+1)/Gamma(l_j+lam+n)",
    "Sp": "pi^{-n} 2^{-2n lam} sin^n(pi lam) prod_k Gamma(2lam+2k) prod_a (2 l_a) "
          "prod_{a<b}(l_a^2-l_b^2) prod_j Gamma(l_j-lam-n)/Gamma(l_j+lam+1+n)",
}


# ---------------------------------------------------------------------------
# calibration constants

@dataclass(frozen=True)
class Calibration:
    """Per-family, per-rank constants ``kappa = sign * 2**exponent``."""

    constants: Mapping[tuple[str, int], float]
    source: str = "<memory>"
    calibrated: bool = True

    def kappa(self, family: GroupFamily) -> float:
        try:
            return self.constants[(family.kind, family.rank)]
        except KeyError:
            raise CalibrationError(
                f"no calibration constant for {family}; run `detkernel calibrate "
                f"--max-rank {family.rank}` and pass the resulting file"
            ) from None

    @classmethod
    def unit(cls) -> "Calibration":
        """Uncalibrated constants: ``kappa = 1`` for every family and rank."""
        return _UnitCalibration({}, source="<uncalibrated>", calibrated=False)

    @classmethod
    def from_json(cls, obj: dict, source: str = "<json>") -> "Calibration":
        consts = {}
        for kind, per_rank in obj["constants"].items():
            for rank, entry in per_rank.items():
                consts[(kind, int(rank))] = float(entry["kappa"])
        return cls(consts, source=source)

    @classmethod
    def from_file(cls, path: str | Path) -> "Calibration":
        path = Path(path)
        return cls.from_json(json.loads(path.read_text()), source=str(path))


class _UnitCalibration(Calibration):
    def kappa(self, family: GroupFamily) -> float:
        return 1.0


_DEFAULT: Calibration | None = None


def default_calibration() -> Calibration:
    """Constants committed with the package (``data/calibration.json``)."""
    global _DEFAULT
    if _DEFAULT is None:
        text = resources.files("detkernel").joinpath("data/calibration.json").read_text()
        _DEFAULT = Calibration.from_json(json.loads(text), source="detkernel/data/calibration.json")
    return _DEFAULT


def _kappa(family: GroupFamily, calibration: Calibration | None) -> float:
    return (calibration or default_calibration()).kappa(family)


# ---------------------------------------------------------------------------
# closed forms

def _slv(x: float) -> SignedLogValue:
    return SignedLogValue.from_value(x)


def _rgamma_slv(x: float) -> SignedLogValue:
    if is_gamma_pole(x):
        return SignedLogValue.zero()
    return log_gamma_signed(x).reciprocal()


def _gamma_slv(x: float) -> SignedLogValue:
    if is_gamma_pole(x):
        raise PrefactorPole(round(x), f"prefactor Gamma({x!r}) is singular")
    return log_gamma_signed(x)


def _prefactor_args(p: SpectralParameter) -> list[float]:
    n = p.rank
    if p.family.kind == "U":
        return [p.sigma + p.tau + j for j in range(1, n + 1)]
    if p.family.kind == "O":
        return [2 * p.lam + 2 * k - 1 for k in range(1, n + 1)]
    return [2 * p.lam + 2 * k for k in range(1, n + 1)]


def _prefactor_power_of_two(p: SpectralParameter) -> float:
    n = p.rank
    if p.family.kind == "U":
        return -(p.sigma + p.tau) * n
    if p.family.kind == "O":
        return -2 * n * p.lam + 1
    return -2 * n * p.lam


def _prefactor_sign(family: GroupFamily) -> int:
    n = family.rank
    return 1 if family.kind == "Sp" else (-1) ** (n * (n - 1) // 2)


def _prefactor(p: SpectralParameter) -> SignedLogValue:
    """Parameter-dependent prefactor (without kappa); raises ``PrefactorPole``."""
    factors = [_gamma_slv(x) for x in _prefactor_args(p)]
    factors.append(SignedLogValue(_prefactor_power_of_two(p) * LN2, _prefactor_sign(p.family)))
    return signed_log_product(factors)


def _vandermonde_factor(family: GroupFamily, parts: Sequence[int]) -> int:
    """Exact integer ``(-1)^{sum} prod_{a<b}(...)`` (times ``prod 2 l`` for Sp)."""
    n = len(parts)
    if family.kind == "U":
        v = math.prod(parts[a] - parts[b] for a in range(n) for b in range(a + 1, n))
    else:
        v = math.prod(parts[a] ** 2 - parts[b] ** 2 for a in range(n) for b in range(a + 1, n))
    if family.kind == "Sp":
        v *= math.prod(2 * l for l in parts)
    return v * (-1) ** (sum(parts) % 2)


def _denominator_args(p: SpectralParameter, parts: Sequence[int]) -> list[float]:
    n = p.rank
    if p.family.kind == "U":
        return [a for m in parts for a in (p.sigma - m + n, p.tau + m + 1)]
    if p.family.kind == "O":
        return [a for l in parts for a in (-l + p.lam + n, l + p.lam + n)]
    return [a for l in parts for a in (p.lam + n + 1 - l, p.lam + n + 1 + l)]


def _reduced(p: SpectralParameter, sig: Signature) -> SignedLogValue:
    """Signature-dependent entire factor (vanishes where a 1/Gamma does)."""
    v = _vandermonde_factor(p.family, sig.parts)
    factors = [SignedLogValue(math.log(abs(v)), 1 if v > 0 else -1)]
    factors += [_rgamma_slv(x) for x in _denominator_args(p, sig.parts)]
    return signed_log_product(factors)


def _check(p: SpectralParameter, sig: Signature) -> None:
    if p.family != sig.family:
        raise MixedFamily(f"parameter family {p.family} vs signature family {sig.family}")


def coefficient_signed(p: SpectralParameter, sig: Signature,
                       calibration: Calibration | None = None) -> SignedLogValue:
    """Calibrated coefficient as a signed logarithm.

    Raises
    ------
    PrefactorPole
        When the Gamma prefactor is singular; the two-variable limit is then
        direction dependent (see :mod:`detkernel.unipotent`).
    """
    _check(p, sig)
    kappa = _kappa(p.family, calibration)
    return signed_log_product([_slv(kappa), _prefactor(p), _reduced(p, sig)])


def coefficient(p: SpectralParameter, sig: Signature,
                calibration: Calibration | None = None) -> float:
    """Calibrated closed-form coefficient of ``chi_sig`` in the expansion of ``ell``."""
    return coefficient_signed(p, sig, calibration).value


def printed_coefficient(p: SpectralParameter, sig: Signature) -> float:
    """Uncalibrated sine-times-Gamma form as printed, for cross-checks.

    Only meaningful at generic parameters; the O-family power of two is kept
    with its printed ``+2 n lam`` sign, and the Sp-family Gamma arguments use
    ``n`` for the index printed as ``k``.
    """
    _check(p, sig)
    n = p.rank
    parts = sig.parts
    if p.family.kind == "U":
        s, t = p.sigma, p.tau
        out = (-1) ** (n * (n - 1) // 2) * math.sin(math.pi * s) ** n * 2.0 ** (-(s + t) * n) / math.pi ** n
        out *= math.prod(math.gamma(s + t + j) for j in range(1, n + 1))
        out *= math.prod(parts[a] - parts[b] for a in range(n) for b in range(a + 1, n))
        out *= math.prod(math.gamma(-s + m - n + 1) / math.gamma(t + m + 1) for m in parts)
        return out
    lam = p.lam
    vdm = math.prod(parts[a] ** 2 - parts[b] ** 2 for a in range(n) for b in range(a + 1, n))
    if p.family.kind == "O":
        out = (-1) ** (n * (n - 1) // 2) * 2.0 ** (2 * n * lam + 1) * math.sin(math.pi * lam) ** n / math.pi ** n
        out *= math.prod(math.gamma(2 * lam + 2 * k - 1) for k in range(1, n + 1))
        out *= vdm * math.prod(math.gamma(l - lam - n + 1) / math.gamma(l + lam + n) for l in parts)
        return out
    out = 2.0 ** (-2 * n * lam) * math.sin(math.pi * lam) ** n / math.pi ** n
    out *= math.prod(math.gamma(2 * lam + 2 * k) for k in range(1, n + 1))
    out *= math.prod(2 * l for l in parts) * vdm
    out *= math.prod(math.gamma(l - lam - n) / math.gamma(l + lam + 1 + n) for l in parts)
    return out


# ---------------------------------------------------------------------------
# limits at integer parameters

def coefficient_germ(family: GroupFamily, base: Sequence[float], direction: Sequence[complex],
                     sig: Signature, calibration: Calibration | None = None) -> Germ:
    """Leading term of the coefficient along ``base + eps * direction``.

    ``base`` and ``direction`` are ``(sigma, tau)`` pairs for U and
    one-element sequences ``(lam,)`` for O and Sp.  Exact Laurent leading
    terms of the Gamma factors are multiplied; the smooth power of two is
    evaluated at the base point.
    """
    if sig.family != family:
        raise MixedFamily(f"{family} vs {sig.family}")
    n = family.rank
    kappa = _kappa(family, calibration)
    if family.kind == "U":
        (s0, t0), (ds, dt) = base, direction
        p0 = SpectralParameter.unitary(n, s0, t0)
        d_pref = ds + dt
        d_den = [d for _ in sig.parts for d in (ds, dt)]
    else:
        (l0,), (dl,) = base, direction
        p0 = SpectralParameter(family, lam=l0)
        d_pref = 2 * dl
        d_den = [dl] * (2 * n)
    g = Germ(kappa * _prefactor_sign(family) * 2.0 ** _prefactor_power_of_two(p0)
             * _vandermonde_factor(family, sig.parts), 0)
    for x in _prefactor_args(p0):
        g = g * gamma_germ(x, d_pref)
    for x, d in zip(_denominator_args(p0, sig.parts), d_den):
        g = g * reciprocal_gamma_germ(x, d)
    return g


# ---------------------------------------------------------------------------
# expansions

def reconstruct_kernel(p: SpectralParameter, t: TorusPoint, bound: int,
                       calibration: Calibration | None = None):
    """Partial sum ``sum_{|sig| <= bound} w_sig c_sig chi_sig(t)``.

    ``w_sig = 1`` except for the O family with ``l_n > 0``, where
    ``w_sig = 2``: the merged character then has squared norm ``1/2``.
    """
    total = 0.0
    for sig in enumerate_signatures(p.family, bound):
        c = coefficient(p, sig, calibration)
        if c == 0.0:
            continue
        w = 2.0 if (p.family.kind == "O" and sig.parts[-1] > 0) else 1.0
        total = total + w * c * character(sig, t)
    return total


@dataclass
class HarmonicExpansion:
    """Finite character expansion ``sum_sig q_sig chi_sig``."""

    family: GroupFamily
    terms: dict[Signature, complex] = field(default_factory=dict)

    def __post_init__(self):
        for sig in self.terms:
            if sig.family != self.family:
                raise MixedFamily(f"term {sig} does not belong to {self.family}")
        self.terms = {s: complex(v) for s, v in self.terms.items()}

    @classmethod
    def single(cls, sig: Signature, value: complex = 1.0) -> "HarmonicExpansion":
        return cls(sig.family, {sig: complex(value)})

    def to_json(self) -> dict:
        return {
            "family": self.family.kind,
            "rank": self.family.rank,
            "terms": [{"parts": list(s.parts), "re": v.real, "im": v.imag}
                      for s, v in self.terms.items()],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "HarmonicExpansion":
        fam = GroupFamily(obj["family"], int(obj["rank"]))
        terms = {}
        for t in obj["terms"]:
            terms[Signature(fam, tuple(t["parts"]))] = complex(t.get("re", 0.0), t.get("im", 0.0))
        return cls(fam, terms)


def inner_product(q: HarmonicExpansion, r: HarmonicExpansion, p: SpectralParameter,
                  calibration: Calibration | None = None) -> complex:
    """Kernel form ``sum_sig c_sig / dim(sig) * q_sig * conj(r_sig)`` (U family)."""
    if not (q.family == r.family == p.family):
        raise MixedFamily("expansions and parameter must share one family")
    if p.family.kind != "U":
        raise MixedFamily("the kernel inner product needs U-family dimensions")
    total = 0j
    for sig, qv in q.terms.items():
        rv = r.terms.get(sig)
        if rv is None:
            continue
        total += coefficient(p, sig, calibration) / dimension_unitary(sig) * qv * np.conj(rv)
    return complex(total)


def sobolev_norm_sq(q: HarmonicExpansion, s: float) -> float:
    """``sum_sig |q_sig|^2 prod_j (1 + |m_j|)^s``."""
    return float(sum(abs(v) ** 2 * math.prod((1.0 + abs(m)) ** s for m in sig.parts)
                     for sig, v in q.terms.items()))


def sobolev_order(sigma: float, tau: float, n: int) -> float:
    """Sobolev exponent matching the kernel norm: ``-sigma - tau - n``.

    ``c_m / dim(m)`` decays like ``prod_j |m_j|^(-sigma - tau - n)``; see
    :func:`sobolev_ratio_spread` for the empirical check.
    """
    return -sigma - tau - n


def sobolev_ratio_spread(p: SpectralParameter, s: float, bound: int,
                         calibration: Calibration | None = None) -> float:
    """``max/min`` of ``|c/dim| / prod (1+|m_j|)^s`` over signatures up to ``bound``."""
    ratios = []
    for sig in enumerate_signatures(p.family, bound):
        c = coefficient(p, sig, calibration)
        w = math.prod((1.0 + abs(m)) ** s for m in sig.parts)
        ratios.append(abs(c) / dimension_unitary(sig) / w)
    ratios = np.array(ratios)
    return float(ratios.max() / ratios.min())


# ---------------------------------------------------------------------------
# positivity

CLASSES = ("PositiveDefinite", "NegativeDefinite", "Indefinite",
           "DegenerateNonnegative", "DegenerateNonpositive")


@dataclass(frozen=True)
class PositivityVerdict:
    """Sign pattern of the coefficients up to a bound.

    ``PositiveDefinite``/``NegativeDefinite``: all coefficients nonzero with
    one sign.  ``Degenerate*``: one sign among the nonzero coefficients and
    at least one exact zero.  ``Indefinite`` always carries a witness
    ``(positive signature, negative signature)``.
    """

    classification: str
    witness: tuple[Signature, Signature] | None = None
    zeros: int = 0
    count: int = 0

    def __post_init__(self):
        if self.classification not in CLASSES:
            raise ValueError(f"unknown classification {self.classification!r}")
        if self.classification == "Indefinite" and self.witness is None:
            raise ValueError("Indefinite verdicts need a witness")

    @property
    def sign_constant(self) -> bool:
        return self.classification != "Indefinite"

    def to_json(self) -> dict:
        out = {"classification": self.classification, "zeros": self.zeros, "count": self.count}
        if self.witness:
            out["witness"] = [list(self.witness[0].parts), list(self.witness[1].parts)]
        return out


def _default_bound(family: GroupFamily) -> int:
    return 8 if family.rank <= 2 else 5


def _verdict_from_signs(signs: Iterable[tuple[Signature, int]]) -> PositivityVerdict:
    pos = neg = None
    zeros = count = 0
    for sig, s in signs:
        count += 1
        if s > 0 and pos is None:
            pos = sig
        elif s < 0 and neg is None:
            neg = sig
        elif s == 0:
            zeros += 1
    if pos is not None and neg is not None:
        return PositivityVerdict("Indefinite", (pos, neg), zeros, count)
    if neg is None:
        cls = "DegenerateNonnegative" if zeros else "PositiveDefinite"
    else:
        cls = "DegenerateNonpositive" if zeros else "NegativeDefinite"
    return PositivityVerdict(cls, None, zeros, count)


def _coefficient_sign(p: SpectralParameter, sig: Signature, pref_sign: int, kappa: float) -> int:
    return int(np.sign(kappa)) * pref_sign * _reduced(p, sig).sign


def _is_integer(x: float) -> bool:
    return abs(x - round(x)) <= 1e-9


def u_definite_analytic(sigma: float, tau: float, n: int) -> bool:
    """Sign-constancy rule for non-integer ``sigma, tau``: ``floor(-sigma-n) == floor(tau)``."""
    return math.floor(-sigma - n) == math.floor(tau)


def classify_positivity(p: SpectralParameter, bound: int | None = None,
                        calibration: Calibration | None = None,
                        cross_check: bool = True) -> PositivityVerdict:
    """Classify the coefficient signs over all signatures up to ``bound``.

    When the Gamma prefactor is singular the signs of the signature-dependent
    factor are used, which fixes the pattern up to one global sign.

    Raises
    ------
    AnalyticEmpiricalMismatch
        If the sign pattern contradicts the analytic rule: for U with
        non-integer parameters, sign-constancy iff
        ``floor(-sigma-n) == floor(tau)``; for O, sign-constancy on
        ``-n < lam < -n+1``; for Sp, on ``-n-1 < lam < -n``.
    """
    bound = _default_bound(p.family) if bound is None else bound
    kappa = _kappa(p.family, calibration)
    try:
        pref_sign = _prefactor(p).sign
    except PrefactorPole:
        pref_sign = 1
    sigs = enumerate_signatures(p.family, bound)
    verdict = _verdict_from_signs((s, _coefficient_sign(p, s, pref_sign, kappa)) for s in sigs)
    if cross_check:
        _cross_check(p, verdict)
    return verdict


def _cross_check(p: SpectralParameter, verdict: PositivityVerdict) -> None:
    n = p.rank
    if p.family.kind == "U":
        if _is_integer(p.sigma) or _is_integer(p.tau):
            return
        expected = u_definite_analytic(p.sigma, p.tau, n)
        if expected != verdict.sign_constant:
            raise AnalyticEmpiricalMismatch(
                f"{p}: analytic rule says sign-constant={expected}, coefficients give {verdict.classification}"
            )
        return
    lo, hi = (-n, -n + 1) if p.family.kind == "O" else (-n - 1, -n)
    if lo < p.lam < hi and not verdict.sign_constant:
        raise AnalyticEmpiricalMismatch(f"{p}: expected sign-constant coefficients on ({lo}, {hi})")


def berezin_wallach_analytic(sigma: float, n: int) -> str:
    if _is_integer(sigma) and -n + 1 <= round(sigma) <= 0:
        return "DegenerateNonnegative"
    if sigma < -n + 1:
        return "Definite"
    return "Indefinite"


def berezin_wallach_classify(sigma: float, n: int, bound: int | None = None,
                             calibration: Calibration | None = None,
                             cross_check: bool = True) -> str:
    """Classify the ``tau = 0`` kernel as ``Definite``, ``DegenerateNonnegative`` or ``Indefinite``.

    The analytic rule is: definite for ``sigma < -n+1``, degenerate
    nonnegative for ``sigma in {-n+1, ..., 0}``, indefinite otherwise.  The
    empirical check takes the limit ``sigma' -> sigma`` at ``tau = 0``
    exactly, so the ``m_n < 0`` coefficients vanish identically.
    """
    expected = berezin_wallach_analytic(sigma, n)
    if not cross_check:
        return expected
    bound = _default_bound(GroupFamily("U", n)) if bound is None else bound
    fam = GroupFamily("U", n)
    signs = []
    zeros_in_support = 0
    for sig in enumerate_signatures(fam, bound):
        g = coefficient_germ(fam, (sigma, 0.0), (1.0, 0.0), sig, calibration)
        try:
            v = g.limit()
        except PoleError as exc:
            raise AnalyticEmpiricalMismatch(f"coefficient of {sig} diverges at sigma={sigma}") from exc
        s = int(np.sign(np.real(v)))
        signs.append(s)
        if s == 0 and sig.parts[-1] >= 0:
            zeros_in_support += 1
    nonzero = {s for s in signs if s != 0}
    if len(nonzero) > 1:
        empirical = "Indefinite"
    elif nonzero == {1}:
        empirical = "DegenerateNonnegative" if zeros_in_support else "Definite"
    else:
        empirical = "Indefinite"  # negative or empty support cannot be nonnegative
    if empirical != expected:
        raise AnalyticEmpiricalMismatch(
            f"sigma={sigma}, n={n}: analytic rule gives {expected}, coefficients give {empirical}"
        )
    return expected


def positivity_map(family: GroupFamily, sigmas: Sequence[float], taus: Sequence[float] | None = None,
                   bound: int | None = None, calibration: Calibration | None = None) -> list[dict]:
    """Verdicts over a parameter grid (``taus`` only for the U family)."""
    cells = []
    if family.kind == "U":
        for s in sigmas:
            for t in taus:
                p = SpectralParameter.unitary(family.rank, s, t)
                v = classify_positivity(p, bound, calibration)
                cell = {"sigma": float(s), "tau": float(t), **v.to_json()}
                if not (_is_integer(s) or _is_integer(t)):
                    cell["analytic_sign_constant"] = u_definite_analytic(s, t, family.rank)
                cells.append(cell)
    else:
        for lam in sigmas:
            p = SpectralParameter(family, lam=float(lam))
            v = classify_positivity(p, bound, calibration)
            cells.append({"lambda": float(lam), **v.to_json()})
    return cells


# ---------------------------------------------------------------------------
# calibration procedure

CALIBRATION_POINTS = {
    "U": [(0.25, 0.25), (-0.3, 0.7)],
    "O": [(-0.3,), (0.2,)],
    "Sp": [(-0.3,), (0.2,)],
}


def calibration_signatures(family: GroupFamily, count: int = 10) -> list[Signature]:
    """The ``count`` signatures closest to the trivial one (L1 distance, then lex)."""
    rho = trivial_signature(family).parts
    sigs = enumerate_signatures(family, family.rank + 4)
    sigs.sort(key=lambda s: (sum(abs(a - b) for a, b in zip(s.parts, rho)), [-x for x in s.parts]))
    return sigs[:count]


def oracle_projection(p: SpectralParameter, sig: Signature) -> complex:
    """Adaptive-quadrature value of ``<ell, chi_sig>`` (product-kernel factorization)."""
    if p.family.kind == "U":
        shift = p.sigma - p.tau
        return separable_projection(sig, p.sigma + p.tau,
                                    lambda x: np.exp(0.5j * shift * (x - np.pi)))
    return separable_projection(sig, 2.0 * p.lam)


def _params(family: GroupFamily, point: Sequence[float]) -> SpectralParameter:
    if family.kind == "U":
        return SpectralParameter.unitary(family.rank, *point)
    return SpectralParameter(family, lam=point[0])


def calibrate(max_rank: int = 2, families: Sequence[str] = ("U", "O", "Sp"),
              count: int = 10, spread_tol: float = 1e-7, max_abs_exponent: int = 3) -> dict:
    """Fit ``kappa = oracle / closed_form`` for each family and rank.

    Returns the JSON-ready calibration document.  Each constant is asserted
    parameter- and signature-independent (spread ``<= spread_tol``) and equal
    to ``+-2**a`` with ``|a| <= max_abs_exponent``.

    Raises
    ------
    CalibrationError
    """
    unit = Calibration.unit()
    constants: dict[str, dict[str, dict]] = {}
    for kind in families:
        constants[kind] = {}
        for n in range(1, max_rank + 1):
            fam = GroupFamily(kind, n)
            ratios = []
            for point in CALIBRATION_POINTS[kind]:
                p = _params(fam, point)
                for sig in calibration_signatures(fam, count):
                    closed = coefficient(p, sig, unit)
                    ratios.append(oracle_projection(p, sig).real / closed)
            ratios = np.array(ratios)
            spread = float(ratios.max() - ratios.min())
            fitted = float(np.median(ratios))
            exponent = int(round(math.log2(abs(fitted))))
            sign = 1 if fitted > 0 else -1
            snapped = sign * 2.0 ** exponent
            if spread > spread_tol or abs(fitted - snapped) > spread_tol or abs(exponent) > max_abs_exponent:
                raise CalibrationError(
                    f"{fam}: kappa={fitted!r} spread={spread:.3g} is not a clean +-2^a"
                )
            constants[kind][str(n)] = {
                "kappa": snapped, "sign": sign, "exponent": exponent,
                "fitted": fitted, "spread": spread, "samples": int(ratios.size),
            }
    return {
        "format": 1,
        "convention": "coefficient = <ell, chi> under normalized Haar measure; "
                      "O family on SO(2n) with mass one, merged characters",
        "fit_points": {k: [list(v) for v in CALIBRATION_POINTS[k]] for k in families},
        "signatures_per_point": count,
        "constants": constants,
        "printed_formulas": {k: PRINTED_FORMULAS[k] for k in families},
    }

"""Characters on the maximal torus and Weyl-integration quadrature.

Characters are ratios of alternants,

* U(n):  ``det[exp(i m_j psi_k)] / det[exp(i (n-j) psi_k)]``,
* O(2n): ``det[cos(l_j phi_k)] / det[cos((n-j) phi_k)]`` (merged label),
* Sp(n): ``det[sin(l_j psi_k)] / det[sin((n+1-j) psi_k)]``,

so the trivial signature has character identically 1.  Integrals of
central functions reduce to the torus with the densities

* U(n):  ``|Delta|^2 / ((2 pi)^n n!)``,
* O(2n): ``det[cos((k-1) phi_m)]^2 / (2 pi^n n!)`` (SO(2n) of mass one),
* Sp(n): ``|det[sin(k psi_m)]|^2 / (pi^n n!)``,

over ``[0, 2 pi)^n``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .errors import DegenerateTorusPoint, InvalidSignature, MixedFamily
from .signatures import GroupFamily, Signature, trivial_signature

__all__ = [
    "TorusPoint",
    "QuadratureGrid",
    "character",
    "character_pm",
    "weyl_integrate",
    "project_harmonic",
    "gram_matrix",
    "sine_power_integral",
    "separable_projection",
]

TWO_PI = 2.0 * np.pi
DEGENERACY_RATIO = 1e-12


@dataclass(frozen=True, eq=False)
class TorusPoint:
    """Eigenangles of a torus element, or a batch of them.

    Parameters
    ----------
    family : GroupFamily
    angles : array_like, shape (..., n)
        Wrapped into ``[0, 2 pi)``.
    component : int
        Sign of the determinant for the O family (``-1`` means off SO(2n)).
    """

    family: GroupFamily
    angles: np.ndarray
    component: int = 1

    def __post_init__(self):
        a = np.mod(np.asarray(self.angles, dtype=float), TWO_PI)
        if a.ndim == 0 or a.shape[-1] != self.family.rank:
            raise ValueError(f"{self.family} needs {self.family.rank} angles, got shape {a.shape}")
        object.__setattr__(self, "angles", a)

    @property
    def batch_shape(self) -> tuple[int, ...]:
        return self.angles.shape[:-1]

    @property
    def separation(self) -> np.ndarray:
        """Smallest circular distance between distinct angles.

        For O and Sp the angles ``psi`` and ``-psi`` are identified, so the
        distance to negated partners and to the fixed points 0, pi is also
        taken into account where relevant.
        """
        a = self.angles
        n = a.shape[-1]
        d = np.full(self.batch_shape, np.inf)

        def circ(x):
            x = np.mod(x, TWO_PI)
            return np.minimum(x, TWO_PI - x)

        for j in range(n):
            for k in range(j + 1, n):
                d = np.minimum(d, circ(a[..., j] - a[..., k]))
                if self.family.kind != "U":
                    d = np.minimum(d, circ(a[..., j] + a[..., k]))
        if self.family.kind == "Sp":
            for j in range(n):
                d = np.minimum(d, circ(2.0 * a[..., j]))
        return d


def _alternant(kind: str, parts: Sequence[int], angles: np.ndarray, odd: bool = False) -> np.ndarray:
    """Batched ``det[f(parts_j * angles_k)]`` with ``f`` by family."""
    arg = angles[..., :, None] * np.asarray(parts, dtype=float)[None, :]
    if kind == "U":
        mat = np.exp(1j * arg)
    elif kind == "O" and not odd:
        mat = np.cos(arg)
    else:
        mat = np.sin(arg)
    return np.linalg.det(mat)


def _hadamard_bound(kind: str, parts: Sequence[int], angles: np.ndarray) -> np.ndarray:
    arg = angles[..., :, None] * np.asarray(parts, dtype=float)[None, :]
    if kind == "U":
        sq = np.ones_like(arg)
    elif kind == "O":
        sq = np.cos(arg) ** 2
    else:
        sq = np.sin(arg) ** 2
    return np.prod(np.sqrt(sq.sum(axis=-1)), axis=-1)


def _check_family(sig: Signature, t: TorusPoint) -> None:
    if sig.family != t.family:
        raise MixedFamily(f"signature family {sig.family} does not match torus family {t.family}")


def _denominator(t: TorusPoint) -> np.ndarray:
    rho = trivial_signature(t.family).parts
    den = _alternant(t.family.kind, rho, t.angles)
    bound = _hadamard_bound(t.family.kind, rho, t.angles)
    if np.any(np.abs(den) < DEGENERACY_RATIO * bound):
        raise DegenerateTorusPoint(
            "character denominator vanishes at this torus point; perturb it "
            "or use dimension_unitary at the identity"
        )
    return den


def _real_output(values: np.ndarray):
    out = np.real(values)
    return out if out.ndim else float(out)


def character(sig: Signature, t: TorusPoint):
    """Irreducible (merged for O) character evaluated on the torus.

    For O the merged ratio ``det cos(l psi) / det cos(rho psi)`` is the
    O(2n) character when ``l_n = 0`` and half of it when ``l_n > 0``.

    Returns a complex value for the U family and a real value for O and Sp;
    arrays for batched torus points.

    Raises
    ------
    DegenerateTorusPoint
        If the Weyl denominator nearly vanishes.
    """
    _check_family(sig, t)
    den = _denominator(t)
    num = _alternant(sig.family.kind, sig.parts, t.angles)
    val = num / den
    if sig.family.kind == "U":
        return val if np.ndim(val) else complex(val)
    return _real_output(val)


def character_pm(sig: Signature, t: TorusPoint, eps: int) -> float:
    """Twin O-family functions ``(det cos + eps det sin) / (2 det cos(rho))``.

    Defined for ``l_n > 0``; the two twins add up to ``character(sig, t)``.
    The irreducible SO(2n) characters themselves are
    ``(det cos + eps i^n det sin) / det cos(rho)``; the merged ratio is
    therefore half the O(2n) character when ``l_n > 0``.
    """
    _check_family(sig, t)
    if sig.family.kind != "O":
        raise InvalidSignature("character_pm is defined for the O family only")
    if sig.parts[-1] == 0:
        raise InvalidSignature("character_pm needs l_n > 0")
    if eps not in (1, -1):
        raise ValueError("eps must be +1 or -1")
    den = _denominator(t)
    c = _alternant("O", sig.parts, t.angles)
    s = _alternant("O", sig.parts, t.angles, odd=True)
    return _real_output((c + eps * s) / (2.0 * den))


@dataclass(frozen=True)
class QuadratureGrid:
    """Uniform tensor grid on ``[0, 2 pi)^n`` for trapezoidal Weyl integration.

    Nodes are ``2 pi (i + offset/2) / N``; the half-step offset keeps every
    node away from the kernel singularity at angle zero.
    """

    points_per_dimension: int
    family: GroupFamily
    offset: bool = True

    def __post_init__(self):
        if self.points_per_dimension < 1:
            raise ValueError("points_per_dimension must be positive")

    def nodes_1d(self) -> np.ndarray:
        N = self.points_per_dimension
        return TWO_PI * (np.arange(N) + (0.5 if self.offset else 0.0)) / N

    def torus_points(self) -> TorusPoint:
        n = self.family.rank
        axes = np.meshgrid(*([self.nodes_1d()] * n), indexing="ij")
        pts = np.stack([a.ravel() for a in axes], axis=-1)
        return TorusPoint(self.family, pts)

    def coarsened(self) -> "QuadratureGrid":
        if self.points_per_dimension % 2:
            raise ValueError("Richardson extrapolation needs an even node count")
        return QuadratureGrid(self.points_per_dimension // 2, self.family, self.offset)


def _weyl_prefactor(family: GroupFamily) -> float:
    """Density constant so that weight = prefactor * |den|^2 * (2 pi / N)^n."""
    n = family.rank
    if family.kind == "U":
        return 1.0 / ((TWO_PI ** n) * math.factorial(n))
    if family.kind == "O":
        return 1.0 / (2.0 * np.pi ** n * math.factorial(n))
    return 1.0 / (np.pi ** n * math.factorial(n))


def _node_weights(grid: QuadratureGrid, t: TorusPoint) -> tuple[np.ndarray, float]:
    """Return the Weyl denominator at the nodes and the scalar node weight."""
    rho = trivial_signature(grid.family).parts
    den = _alternant(grid.family.kind, rho, t.angles)
    h = (TWO_PI / grid.points_per_dimension) ** grid.family.rank
    return den, _weyl_prefactor(grid.family) * h


def _richardson(fine: complex, coarse: complex, exponent: float) -> complex:
    r = 2.0 ** (1.0 + exponent)
    return (r * fine - coarse) / (r - 1.0)


def weyl_integrate(
    f: Callable[[TorusPoint], np.ndarray],
    grid: QuadratureGrid,
    singularity_exponent: float | None = None,
) -> complex:
    """Integrate a central function against normalized Haar measure.

    Parameters
    ----------
    f : callable
        Receives a batched :class:`TorusPoint` and returns one value per node.
    grid : QuadratureGrid
    singularity_exponent : float, optional
        If given, the integrand is assumed to behave like ``|psi|^p`` near
        the diagonal singularities and one Richardson step
        ``(2^(1+p) I_N - I_{N/2}) / (2^(1+p) - 1)`` is applied.

    Returns
    -------
    complex
    """
    def trap(g: QuadratureGrid) -> complex:
        t = g.torus_points()
        den, w = _node_weights(g, t)
        vals = np.asarray(f(t)) * (np.abs(den) ** 2)
        return complex(np.sum(vals) * w)

    fine = trap(grid)
    if singularity_exponent is None:
        return fine
    return _richardson(fine, trap(grid.coarsened()), singularity_exponent)


def project_harmonic(
    f: Callable[[TorusPoint], np.ndarray],
    sig: Signature,
    grid: QuadratureGrid,
    singularity_exponent: float | None = None,
) -> complex:
    """Fourier coefficient ``<f, chi_sig>`` by torus quadrature.

    Computed as ``f * conj(numerator) * denominator`` so that nodes on
    the Weyl walls never produce ``0/0``.
    """
    if sig.family != grid.family:
        raise MixedFamily(f"{sig.family} vs grid family {grid.family}")

    def trap(g: QuadratureGrid) -> complex:
        t = g.torus_points()
        den, w = _node_weights(g, t)
        num = _alternant(g.family.kind, sig.parts, t.angles)
        vals = np.asarray(f(t)) * np.conj(num) * den
        return complex(np.sum(vals) * w)

    fine = trap(grid)
    if singularity_exponent is None:
        return fine
    return _richardson(fine, trap(grid.coarsened()), singularity_exponent)


def gram_matrix(sigs: Sequence[Signature], grid: QuadratureGrid) -> np.ndarray:
    """Matrix of inner products ``<chi_a, chi_b>`` on the given grid."""
    if any(s.family != grid.family for s in sigs):
        raise MixedFamily("all signatures must match the grid family")
    t = grid.torus_points()
    _, w = _node_weights(grid, t)
    nums = np.stack([_alternant(grid.family.kind, s.parts, t.angles) for s in sigs])
    return (nums @ nums.conj().T) * w


def sine_power_integral(g: Callable[[float], float], p: float) -> float:
    """``int_0^{2 pi} |sin(x/2)|^p g(x) dx`` for smooth real ``g`` and ``p > -1``.

    The endpoint singularities are handled by QUADPACK's algebraic weights
    after writing ``sin(x/2) = (x/2) sinc(x / 2pi)`` near each end.
    """
    if p <= -1.0:
        raise ValueError("the integral diverges for p <= -1")
    kw = dict(weight="alg", limit=400, epsabs=1e-15, epsrel=1e-13)
    with warnings.catch_warnings():
        # the tolerances sit at the roundoff floor on purpose
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        left = integrate.quad(lambda x: (np.sinc(x / TWO_PI) / 2.0) ** p * g(x),
                              0.0, np.pi, wvar=(p, 0.0), **kw)[0]
        right = integrate.quad(lambda x: (np.sinc((TWO_PI - x) / TWO_PI) / 2.0) ** p * g(x),
                               np.pi, TWO_PI, wvar=(0.0, p), **kw)[0]
    return left + right


def separable_projection(
    sig: Signature,
    exponent: float,
    phase: Callable[[float], complex] | None = None,
) -> complex:
    """Adaptive oracle for ``<prod_k w(psi_k), chi_sig>``.

    Here ``w(x) = |sin(x/2)|^exponent * phase(x)``.  For a product
    integrand the n-fold Weyl integral factors into an ``n x n``
    determinant of one-dimensional integrals, each done adaptively.
    """
    kind = sig.family.kind
    n = sig.rank
    rho = trivial_signature(sig.family).parts
    mat = np.empty((n, n), dtype=complex)
    for a, la in enumerate(sig.parts):
        for b, rb in enumerate(rho):
            if kind == "U":
                def base(x, la=la, rb=rb):
                    return np.exp(1j * (rb - la) * x)
            elif kind == "O":
                def base(x, la=la, rb=rb):
                    return np.cos(la * x) * np.cos(rb * x)
            else:
                def base(x, la=la, rb=rb):
                    return np.sin(la * x) * np.sin(rb * x)

            def g(x, base=base):
                v = base(x)
                return v * phase(x) if phase is not None else v

            re = sine_power_integral(lambda x: np.real(g(x)), exponent)
            im = sine_power_integral(lambda x: np.imag(g(x)), exponent) if (kind == "U" or phase is not None) else 0.0
            mat[a, b] = re + 1j * im
    det = np.linalg.det(mat)
    if kind == "U":
        return complex(det / TWO_PI ** n)
    if kind == "O":
        return complex(det / (2.0 * np.pi ** n))
    return complex(det / np.pi ** n)

"""Determinant kernels, the linear-fractional action and covariance checks.

The compact groups are realized as matrices:

* U(n): ``n x n`` unitary;
* O(2n): ``2n x 2n`` real orthogonal;
* Sp(n): ``2n x 2n`` complex images ``[[A, B], [-conj(B), conj(A)]]`` of
  quaternionic matrices ``A + B j``.  The quaternionic determinant is
  ``det_C ** (1/2)``.

The noncompact partners U(n,n), O(2n,2n), Sp(n,n) act by
``h -> (alpha + h gamma)^{-1} (beta + h delta)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import expm

from .characters import TorusPoint
from .errors import (
    IllConditionedDenominator,
    MixedFamily,
    NonUnitaryInput,
    SingularKernelPoint,
)
from .signatures import GroupFamily

__all__ = [
    "SpectralParameter",
    "BlockMobiusElement",
    "ell",
    "kernel_L",
    "eigenangles",
    "mobius_apply",
    "covariance_residual",
    "jacobian_residual_1d",
    "random_unitary",
    "random_special_orthogonal",
    "random_symplectic",
    "random_compact",
    "random_pseudo_unitary",
    "quaternion_image",
]

UNITARITY_TOL = 1e-10
CONDITION_LIMIT = 1e12
_ZERO_ANGLE = 1e-12
TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class SpectralParameter:
    """Kernel parameters: ``(sigma, tau)`` for U, ``lam`` for O and Sp."""

    family: GroupFamily
    sigma: float | None = None
    tau: float | None = None
    lam: float | None = None

    def __post_init__(self):
        if self.family.kind == "U":
            if self.sigma is None or self.tau is None or self.lam is not None:
                raise ValueError("U-family parameters are (sigma, tau)")
        elif self.lam is None or self.sigma is not None or self.tau is not None:
            raise ValueError(f"{self.family.kind}-family parameter is lam")

    @classmethod
    def unitary(cls, n: int, sigma: float, tau: float) -> "SpectralParameter":
        return cls(GroupFamily("U", n), sigma=float(sigma), tau=float(tau))

    @classmethod
    def orthogonal(cls, n: int, lam: float) -> "SpectralParameter":
        return cls(GroupFamily("O", n), lam=float(lam))

    @classmethod
    def symplectic(cls, n: int, lam: float) -> "SpectralParameter":
        return cls(GroupFamily("Sp", n), lam=float(lam))

    @property
    def rank(self) -> int:
        return self.family.rank

    @property
    def expansion_valid(self) -> bool:
        """Whether the character expansion converges (in L^2 sense)."""
        if self.family.kind == "U":
            return self.sigma + self.tau < 1.0
        return self.lam < 0.5

    @property
    def power(self) -> float:
        """Exponent ``p`` of ``|sin(psi/2)|^p`` in the kernel."""
        if self.family.kind == "U":
            return self.sigma + self.tau
        return 2.0 * self.lam

    def as_dict(self) -> dict:
        if self.family.kind == "U":
            return {"sigma": self.sigma, "tau": self.tau}
        return {"lambda": self.lam}

    def __str__(self) -> str:
        inner = ", ".join(f"{k}={v!r}" for k, v in self.as_dict().items())
        return f"{self.family}[{inner}]"


def ell(p: SpectralParameter, t: TorusPoint):
    """Central kernel function on the torus.

    U(n): ``exp(i (sigma - tau) sum(psi_k - pi) / 2) prod sin(psi_k/2)^(sigma+tau)``
    with ``psi_k`` in ``[0, 2 pi)``.  O(2n), Sp(n): ``prod |sin(psi_j/2)|^(2 lam)``,
    and zero off SO(2n).

    Raises
    ------
    SingularKernelPoint
        At angle zero when the exponent is not positive.
    """
    if p.family != t.family:
        raise MixedFamily(f"{p.family} vs {t.family}")
    if p.family.kind == "O" and t.component < 0:
        return np.zeros(t.batch_shape) if t.batch_shape else 0.0
    psi = t.angles
    s = np.abs(np.sin(psi / 2.0))
    q = p.power
    zero = s == 0.0
    if np.any(zero) and q <= 0:
        raise SingularKernelPoint(f"kernel is singular at angle 0 for exponent {q}")
    with np.errstate(divide="ignore"):
        mag = np.prod(np.where(zero, 0.0, s ** q), axis=-1)
    if p.family.kind != "U":
        return mag if np.ndim(mag) else float(mag)
    phase = np.exp(0.5j * (p.sigma - p.tau) * np.sum(psi - np.pi, axis=-1))
    val = phase * mag
    return val if np.ndim(val) else complex(val)


def quaternion_image(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Complex ``2n x 2n`` image of the quaternionic matrix ``a + b j``."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    return np.block([[a, b], [-b.conj(), a.conj()]])


def _symplectic_form(m: int) -> np.ndarray:
    k = m // 2
    z = np.zeros((k, k))
    i = np.eye(k)
    return np.block([[z, i], [-i, z]])


def _is_quaternionic(mat: np.ndarray, tol: float) -> bool:
    J = _symplectic_form(mat.shape[0])
    return np.max(np.abs(J @ mat.conj() - mat @ J)) <= tol * max(1.0, np.max(np.abs(mat)))


def _compact_size(family: GroupFamily) -> int:
    return family.rank if family.kind == "U" else 2 * family.rank


def _check_compact(family: GroupFamily, g: np.ndarray, name: str, tol: float = UNITARITY_TOL) -> np.ndarray:
    g = np.asarray(g)
    m = _compact_size(family)
    if g.shape != (m, m):
        raise NonUnitaryInput(f"{name} must be {m}x{m} for {family}, got {g.shape}")
    dev = np.max(np.abs(g @ g.conj().T - np.eye(m)))
    if dev > tol:
        raise NonUnitaryInput(f"{name} deviates from unitarity by {dev:.3g}")
    if family.kind == "O" and np.max(np.abs(np.imag(g))) > tol:
        raise NonUnitaryInput(f"{name} must be real for the O family")
    if family.kind == "Sp" and not _is_quaternionic(g, tol):
        raise NonUnitaryInput(f"{name} is not the image of a quaternionic matrix")
    return g


def eigenangles(family: GroupFamily, z: np.ndarray) -> TorusPoint:
    """Torus representative of a compact group element.

    U: eigenvalue arguments in ``[0, 2 pi)``, ascending.  O and Sp: one
    angle in ``[0, pi]`` per conjugate eigenvalue pair, ascending; for O the
    determinant sign is stored as the component.
    """
    w = np.linalg.eigvals(z)
    ang = np.angle(w)
    if family.kind == "U":
        ang = np.mod(ang, TWO_PI)
        ang[np.minimum(ang, TWO_PI - ang) < _ZERO_ANGLE] = 0.0
        return TorusPoint(family, np.sort(ang))
    comp = 1
    if family.kind == "O":
        comp = 1 if np.linalg.det(np.real(z)) > 0 else -1
    a = np.sort(np.abs(ang))
    a[a < _ZERO_ANGLE] = 0.0
    return TorusPoint(family, a[::2], component=comp)


def kernel_L(p: SpectralParameter, g: np.ndarray, h: np.ndarray):
    """Two-point kernel ``L(g, h) = ell(g h^{-1})``."""
    g = _check_compact(p.family, g, "g")
    h = _check_compact(p.family, h, "h")
    z = g @ h.conj().T
    return ell(p, eigenangles(p.family, z))


@dataclass(frozen=True, eq=False)
class BlockMobiusElement:
    """Element ``[[alpha, beta], [gamma, delta]]`` of the noncompact block group.

    Blocks are ``n x n`` complex for U, ``2n x 2n`` real for O and
    ``2n x 2n`` quaternionic images for Sp.
    """

    family: GroupFamily
    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    delta: np.ndarray

    def __post_init__(self):
        m = _compact_size(self.family)
        for name in ("alpha", "beta", "gamma", "delta"):
            blk = np.asarray(getattr(self, name))
            if blk.shape != (m, m):
                raise ValueError(f"block {name} must be {m}x{m}, got {blk.shape}")
            object.__setattr__(self, name, blk)
        dev = self.pseudo_unitarity_defect()
        if dev > 1e-10 * max(1.0, np.max(np.abs(self.matrix)) ** 2):
            raise NonUnitaryInput(f"element violates pseudo-unitarity by {dev:.3g}")
        if self.family.kind == "O" and np.max(np.abs(np.imag(self.matrix))) > 0:
            raise NonUnitaryInput("O-family element must be real")
        if self.family.kind == "Sp":
            for name in ("alpha", "beta", "gamma", "delta"):
                if not _is_quaternionic(getattr(self, name), 1e-10):
                    raise NonUnitaryInput(f"block {name} is not quaternionic")

    @property
    def matrix(self) -> np.ndarray:
        return np.block([[self.alpha, self.beta], [self.gamma, self.delta]])

    def pseudo_unitarity_defect(self) -> float:
        m = _compact_size(self.family)
        J = np.diag(np.r_[np.ones(m), -np.ones(m)])
        g = self.matrix
        return float(np.max(np.abs(g @ J @ g.conj().T - J)))

    @classmethod
    def from_matrix(cls, family: GroupFamily, g: np.ndarray) -> "BlockMobiusElement":
        m = _compact_size(family)
        return cls(family, g[:m, :m], g[:m, m:], g[m:, :m], g[m:, m:])

    @classmethod
    def identity(cls, family: GroupFamily) -> "BlockMobiusElement":
        m = _compact_size(family)
        dt = float if family.kind == "O" else complex
        return cls.from_matrix(family, np.eye(2 * m, dtype=dt))

    def __matmul__(self, other: "BlockMobiusElement") -> "BlockMobiusElement":
        if other.family != self.family:
            raise MixedFamily("cannot compose elements of different families")
        return BlockMobiusElement.from_matrix(self.family, self.matrix @ other.matrix)

    def denominator(self, h: np.ndarray) -> np.ndarray:
        return self.alpha + h @ self.gamma


def mobius_apply(g: BlockMobiusElement, h: np.ndarray) -> np.ndarray:
    """Right action ``h^[g] = (alpha + h gamma)^{-1} (beta + h delta)``.

    Satisfies ``(h^[g1])^[g2] = h^[g1 g2]``.
    """
    h = np.asarray(h)
    a = g.denominator(h)
    cond = np.linalg.cond(a)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise IllConditionedDenominator(f"alpha + h gamma has condition number {cond:.3g}")
    return np.linalg.solve(a, g.beta + h @ g.delta)


def _det_factor(p: SpectralParameter, g: BlockMobiusElement, h: np.ndarray) -> float:
    """Multiplier ``|det(alpha + h gamma)|^(-power)`` of the covariance law."""
    d = abs(np.linalg.det(g.denominator(h)))
    if p.family.kind == "U":
        return d ** (-(p.sigma + p.tau))
    return d ** (-p.lam)


def covariance_residual(p: SpectralParameter, g: BlockMobiusElement,
                        u: np.ndarray, v: np.ndarray) -> float:
    """Relative defect of ``L(u^g, v^g) = L(u, v) |det A_u|^-q |det A_v|^-q``.

    ``A_h = alpha + h gamma``; ``q = 2 sigma`` for U (with ``sigma = tau``),
    ``q = lam`` for O, and ``q = lam`` with the complex determinant of the
    quaternionic image for Sp.  For U with ``sigma != tau`` only absolute
    values are compared, since the phase depends on a branch choice.
    """
    if g.family != p.family:
        raise MixedFamily(f"{g.family} vs {p.family}")
    lhs = kernel_L(p, mobius_apply(g, u), mobius_apply(g, v))
    base = kernel_L(p, u, v)
    rhs = base * _det_factor(p, g, u) * _det_factor(p, g, v)
    if p.family.kind == "U" and p.sigma != p.tau:
        lhs, rhs, base = abs(lhs), abs(rhs), abs(base)
    scale = abs(rhs)
    if scale == 0.0:
        return float(abs(lhs))
    return float(abs(lhs - rhs) / scale)


def jacobian_residual_1d(g: BlockMobiusElement, testfn: Callable[[np.ndarray], np.ndarray],
                         nodes: int = 4096) -> float:
    """Change-of-variables check for U(1,1) acting on the circle.

    Compares ``int f(h) dmu`` with ``int f(h^[g]) |alpha + h gamma|^-2 dmu``
    using the trapezoidal rule on ``nodes`` equispaced points.
    """
    if g.family != GroupFamily("U", 1):
        raise MixedFamily("jacobian_residual_1d needs an element of U(1,1)")
    phi = TWO_PI * (np.arange(nodes) + 0.5) / nodes
    h = np.exp(1j * phi)
    a, b, c, d = (complex(x[0, 0]) for x in (g.alpha, g.beta, g.gamma, g.delta))
    den = a + h * c
    hg = (b + h * d) / den
    lhs = np.mean(testfn(h))
    rhs = np.mean(testfn(hg) / np.abs(den) ** 2)
    return float(abs(lhs - rhs))


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Gaussian with phase fix."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_special_orthogonal(m: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random element of SO(m)."""
    q, r = np.linalg.qr(rng.standard_normal((m, m)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def random_symplectic(n: int, rng: np.random.Generator, scale: float = 2.0) -> np.ndarray:
    """Random compact Sp(n) element as exp of a quaternionic anti-Hermitian image."""
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    a = (a - a.conj().T) / 2.0
    b = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    b = (b + b.T) / 2.0
    return expm(scale * quaternion_image(a, b))


def random_compact(family: GroupFamily, rng: np.random.Generator) -> np.ndarray:
    """Random element of U(n), SO(2n) or Sp(n) in matrix form."""
    n = family.rank
    if family.kind == "U":
        return random_unitary(n, rng)
    if family.kind == "O":
        return random_special_orthogonal(2 * n, rng)
    return random_symplectic(n, rng)


def random_pseudo_unitary(family: GroupFamily, rng: np.random.Generator,
                          boost_scale: float = 0.5) -> BlockMobiusElement:
    """Random element ``K1 B K2`` with block-diagonal compact ``K`` and a hyperbolic boost ``B``."""
    n = family.rank
    m = _compact_size(family)
    if family.kind == "Sp":
        d = rng.standard_normal(n) * boost_scale
        d = np.r_[d, d]
    else:
        d = rng.standard_normal(m) * boost_scale
    ch, sh = np.diag(np.cosh(d)), np.diag(np.sinh(d))
    boost = np.block([[ch, sh], [sh, ch]])

    def kblock():
        z = np.zeros((m, m))
        return np.block([[random_compact(family, rng), z], [z, random_compact(family, rng)]])

    mat = kblock() @ boost @ kblock()
    if family.kind == "O":
        mat = np.real(mat)
    return BlockMobiusElement.from_matrix(family, mat)

"""Cauchy-type determinant identities with closed-form evaluators.

Five identities are covered, all with rows indexed by ``r`` and columns by
the variable ``x_k``:

``Cauchy``
    ``det[1/(x_k + y_l)] = prod_{k<l}(x_k - x_l)(y_k - y_l) / prod_{k,l}(x_k + y_l)``;
    ``y`` is stored in the ``b`` field.
``L11``
    first row ones, row ``r >= 1`` is ``1/(x_k + b_r)``; ``b`` has ``n - 1`` entries.
``L12``
    row ``r`` is ``prod_{m<=r}(x_k + a_m)/(x_k + b_m)``; ``a, b`` have ``n - 1`` entries.
``L13``
    row ``r = 1..n`` is ``P_r(x_k) - P_r(-x_k)`` with the same partial products; ``n`` entries.
``L14``
    row ``r = 0..n-1`` is ``P_r(x_k) + P_r(-x_k)``; ``n - 1`` entries.

The right-hand sides of L13 and L14 carry the sign ``(-1)^(n(n-1)/2)``
and L13's denominator runs over all ``n`` values of ``b``; both were pinned
by brute force.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch, NearSingularDenominator
from .special import SignedLogValue, signed_log_product

__all__ = [
    "IDENTITY_IDS",
    "IdentityInstance",
    "build_matrix",
    "closed_form",
    "closed_form_signed",
    "elimination_determinant",
    "identity_residual",
    "matrix_residual",
    "random_instance",
    "run_identity_suite",
]

IDENTITY_IDS = ("Cauchy", "L11", "L12", "L13", "L14")
DENOMINATOR_TOL = 1e-6
_TINY = 1e-300

# number of a/b entries needed as a function of n
_A_LEN = {"Cauchy": lambda n: 0, "L11": lambda n: 0, "L12": lambda n: n - 1,
          "L13": lambda n: n, "L14": lambda n: n - 1}
_B_LEN = {"Cauchy": lambda n: n, "L11": lambda n: n - 1, "L12": lambda n: n - 1,
          "L13": lambda n: n, "L14": lambda n: n - 1}


@dataclass(frozen=True, eq=False)
class IdentityInstance:
    """Parameters of one identity; for ``Cauchy`` the ``b`` field holds ``y``."""

    identity_id: str
    x: np.ndarray
    a: np.ndarray = field(default_factory=lambda: np.zeros(0))
    b: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        if self.identity_id not in IDENTITY_IDS:
            raise ValueError(f"unknown identity {self.identity_id!r}")
        for name in ("x", "a", "b"):
            object.__setattr__(self, name, np.atleast_1d(np.asarray(getattr(self, name), dtype=float)))
        n = self.n
        if n < 1:
            raise DimensionMismatch("x must be non-empty")
        want_a, want_b = _A_LEN[self.identity_id](n), _B_LEN[self.identity_id](n)
        if len(self.a) != want_a or len(self.b) != want_b:
            raise DimensionMismatch(
                f"{self.identity_id} with n={n} needs len(a)={want_a}, len(b)={want_b}; "
                f"got {len(self.a)}, {len(self.b)}"
            )
        self._check_denominators()

    @property
    def n(self) -> int:
        return len(self.x)

    def _check_denominators(self) -> None:
        x, b = self.x, self.b
        dens = [x[:, None] + b[None, :]]
        if self.identity_id in ("L13", "L14"):
            dens.append(x[:, None] - b[None, :])
        worst = min((np.min(np.abs(d)) for d in dens if d.size), default=np.inf)
        if worst < DENOMINATOR_TOL:
            raise NearSingularDenominator(f"a matrix denominator is {worst:.3g}")


def _partial_products(x: np.ndarray, a: np.ndarray, b: np.ndarray, rows: Iterable[int]) -> np.ndarray:
    ratios = (x[None, :] + a[:, None]) / (x[None, :] + b[:, None])
    return np.array([np.prod(ratios[:r], axis=0) for r in rows])


def build_matrix(inst: IdentityInstance) -> np.ndarray:
    """Left-hand-side matrix of the identity (rows indexed by ``r``)."""
    x, a, b, n = inst.x, inst.a, inst.b, inst.n
    kind = inst.identity_id
    if kind == "Cauchy":
        return 1.0 / (b[:, None] + x[None, :])
    if kind == "L11":
        return np.vstack([np.ones(n), 1.0 / (b[:, None] + x[None, :])])
    if kind == "L12":
        return _partial_products(x, a, b, range(n))
    rows = range(1, n + 1) if kind == "L13" else range(n)
    plus = _partial_products(x, a, b, rows)
    minus = _partial_products(-x, a, b, rows)
    return plus - minus if kind == "L13" else plus + minus


def _slv(values: Iterable[float]) -> list[SignedLogValue]:
    return [SignedLogValue.from_value(v) for v in values]


def _pairs_lt(v: Sequence[float]) -> Iterable[tuple[float, float]]:
    return itertools.combinations(v, 2)


def _pairs_le(v: Sequence[float], w: Sequence[float]) -> Iterable[tuple[float, float]]:
    # (v_alpha, w_beta) with alpha <= beta
    return ((v[i], w[j]) for i in range(len(v)) for j in range(i, len(w)))


def closed_form_signed(inst: IdentityInstance) -> SignedLogValue:
    """Right-hand side as a signed logarithm."""
    x, a, b, n = inst.x, inst.a, inst.b, inst.n
    kind = inst.identity_id
    num: list[float] = []
    den: list[float] = []
    sign = 1
    if kind in ("Cauchy", "L11"):
        num += [p - q for p, q in _pairs_lt(x)]
        num += [p - q for p, q in _pairs_lt(b)]
        den += [xk + bl for xk in x for bl in b]
    elif kind == "L12":
        num += [p - q for p, q in _pairs_lt(x)]
        num += [p - q for p, q in _pairs_le(a, b)]
        den += [xk + bl for xk in x for bl in b]
    elif kind == "L13":
        num += [2.0 * xk for xk in x]
        num += [p * p - q * q for p, q in _pairs_lt(x)]
        num += [p + q for p, q in _pairs_lt(b)]
        num += [p - q for p, q in _pairs_le(a, b)]
        den += [xk * xk - bl * bl for xk in x for bl in b]
        sign = (-1) ** (n * (n - 1) // 2)
    else:  # L14
        num += [2.0]
        num += [p * p - q * q for p, q in _pairs_lt(x)]
        num += [p + q for p, q in _pairs_le(b, b)]
        num += [p - q for p, q in _pairs_le(a, b)]
        den += [xk * xk - bl * bl for xk in x for bl in b]
        sign = (-1) ** (n * (n - 1) // 2)
    if any(abs(d) < DENOMINATOR_TOL**2 for d in den):
        raise NearSingularDenominator("closed-form denominator vanishes")
    top = signed_log_product(_slv(num))
    bottom = signed_log_product(_slv(den))
    out = top / bottom
    return SignedLogValue(out.log_magnitude, out.sign * sign) if out.sign else out


def closed_form(inst: IdentityInstance) -> float:
    """Right-hand side of the identity, materialized."""
    return closed_form_signed(inst).value


def elimination_determinant(mat: np.ndarray) -> SignedLogValue:
    """Determinant by LU with partial pivoting, as a signed logarithm."""
    sign, logabs = np.linalg.slogdet(mat)
    if sign == 0:
        return SignedLogValue.zero()
    return SignedLogValue(float(logabs), int(np.sign(sign)))


def identity_residual(inst: IdentityInstance) -> float:
    """``|det(M) - rhs| / max(|rhs|, tiny)``."""
    return matrix_residual(build_matrix(inst), inst)


def matrix_residual(mat: np.ndarray, inst: IdentityInstance) -> float:
    """Residual of an explicit matrix against the closed form of ``inst``."""
    lhs = elimination_determinant(mat)
    rhs = closed_form_signed(inst)
    if rhs.sign == 0:
        return abs(lhs.value) / _TINY if lhs.sign else 0.0
    if lhs.sign == 0:
        return 1.0
    if lhs.sign != rhs.sign:
        return 1.0 + math.exp(lhs.log_magnitude - rhs.log_magnitude)
    return abs(math.expm1(lhs.log_magnitude - rhs.log_magnitude))


def _separated(values: np.ndarray, gap: float) -> bool:
    if len(values) < 2:
        return True
    d = np.abs(values[:, None] - values[None, :])
    return np.min(d[np.triu_indices(len(values), 1)]) >= gap


def _admissible(kind: str, x: np.ndarray, a: np.ndarray, b: np.ndarray, gap: float) -> bool:
    if not (_separated(x, gap) and _separated(b, gap)):
        return False
    if kind == "Cauchy":
        return bool(np.min(np.abs(x[:, None] + b[None, :])) >= gap)
    if b.size and np.min(np.abs(x[:, None] + b[None, :])) < gap:
        return False
    if kind in ("L13", "L14"):
        if b.size and np.min(np.abs(x[:, None] - b[None, :])) < gap:
            return False
        # keep x_k^2 - x_l^2 and b_a + b_b away from zero as well
        if not (_separated(np.abs(x), gap) and _separated(np.abs(b), gap)):
            return False
        if b.size and np.min(np.abs(b)) < gap / 2:
            return False
    if a.size and b.size:
        diffs = [abs(p - q) for p, q in _pairs_le(a, b)]
        if min(diffs) < gap:
            return False
    return True


def random_instance(identity_id: str, n: int, rng: np.random.Generator,
                    gap: float = 1e-2, low: float = -3.0, high: float = 3.0) -> IdentityInstance:
    """Draw a uniformly random instance on ``[low, high]`` satisfying the separation gaps."""
    na, nb = _A_LEN[identity_id](n), _B_LEN[identity_id](n)
    for _ in range(100_000):
        x = rng.uniform(low, high, n)
        a = rng.uniform(low, high, na)
        b = rng.uniform(low, high, nb)
        if _admissible(identity_id, x, a, b, gap):
            return IdentityInstance(identity_id, x, a, b)
    raise RuntimeError("could not draw an admissible instance; widen the range or reduce the gap")


@dataclass(frozen=True)
class SuiteRow:
    identity_id: str
    n: int
    max_residual: float
    instances: int


def run_identity_suite(n_max: int = 6, instances: int = 500, seed: int = 0,
                       gap: float = 1e-2,
                       identity_ids: Sequence[str] = IDENTITY_IDS) -> list[SuiteRow]:
    """Maximal residual per identity and size over seeded random instances.

    Each ``(identity, n)`` cell has its own stream derived from ``seed`` so
    results do not depend on iteration order.
    """
    rows = []
    for idx, kind in enumerate(identity_ids):
        for n in range(1, n_max + 1):
            rng = np.random.default_rng([seed, IDENTITY_IDS.index(kind), n])
            worst = 0.0
            for _ in range(instances):
                worst = max(worst, identity_residual(random_instance(kind, n, rng, gap)))
            rows.append(SuiteRow(kind, n, worst, instances))
    return rows

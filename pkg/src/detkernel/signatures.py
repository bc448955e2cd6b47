"""Signatures of the irreducible characters of U(n), O(2n) and Sp(n).

All signatures are kept in strict (rho-shifted) coordinates:

* ``U``  : ``m_1 > m_2 > ... > m_n``, any integers;
* ``O``  : ``l_1 > ... > l_n >= 0`` (merged labels, group O(2n));
* ``Sp`` : ``l_1 > ... > l_n > 0``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

from .errors import EmptyEnumeration, InternalError, InvalidSignature

__all__ = [
    "FAMILIES",
    "GroupFamily",
    "Signature",
    "conjugate_signature",
    "dimension_unitary",
    "enumerate_signatures",
    "shift_signature",
    "trivial_signature",
]

FAMILIES = ("U", "O", "Sp")

_FAMILY_NAMES = {"U": "U({n})", "O": "O(2*{n})", "Sp": "Sp({n})"}


@dataclass(frozen=True)
class GroupFamily:
    """A compact classical group of rank ``n``.

    ``kind`` is one of ``"U"`` (U(n)), ``"O"`` (O(2n)) and ``"Sp"`` (Sp(n)).
    """

    kind: str
    rank: int

    def __post_init__(self):
        if self.kind not in FAMILIES:
            raise ValueError(f"unknown family {self.kind!r}; expected one of {FAMILIES}")
        if int(self.rank) != self.rank or self.rank < 1:
            raise ValueError(f"rank must be a positive integer, got {self.rank!r}")

    @classmethod
    def U(cls, n: int) -> "GroupFamily":
        return cls("U", n)

    @classmethod
    def O(cls, n: int) -> "GroupFamily":  # noqa: E743
        return cls("O", n)

    @classmethod
    def Sp(cls, n: int) -> "GroupFamily":
        return cls("Sp", n)

    def __str__(self) -> str:
        return _FAMILY_NAMES[self.kind].format(n=self.rank)


def _check_parts(family: GroupFamily, parts: tuple[int, ...]) -> None:
    if len(parts) != family.rank:
        raise InvalidSignature(f"{family} needs {family.rank} parts, got {len(parts)}")
    if any(a <= b for a, b in zip(parts, parts[1:])):
        raise InvalidSignature(f"parts {parts} are not strictly decreasing")
    if family.kind == "O" and parts[-1] < 0:
        raise InvalidSignature(f"O-family parts must be >= 0, got {parts}")
    if family.kind == "Sp" and parts[-1] <= 0:
        raise InvalidSignature(f"Sp-family parts must be > 0, got {parts}")


@dataclass(frozen=True, order=False)
class Signature:
    """Family-tagged strictly decreasing integer tuple."""

    family: GroupFamily
    parts: tuple[int, ...]

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts)
        if any(p != q for p, q in zip(parts, self.parts)):
            raise InvalidSignature(f"parts must be integers, got {self.parts}")
        object.__setattr__(self, "parts", parts)
        _check_parts(self.family, parts)

    @classmethod
    def of(cls, kind: str, parts: Sequence[int]) -> "Signature":
        parts = tuple(parts)
        return cls(GroupFamily(kind, len(parts)), parts)

    @property
    def rank(self) -> int:
        return self.family.rank

    def __iter__(self):
        return iter(self.parts)

    def __len__(self) -> int:
        return len(self.parts)

    def __getitem__(self, i):
        return self.parts[i]

    def to_json(self) -> dict[str, Any]:
        return {"family": self.family.kind, "rank": self.rank, "parts": list(self.parts)}

    @classmethod
    def from_json(cls, obj: dict[str, Any]) -> "Signature":
        fam = GroupFamily(obj["family"], int(obj["rank"]))
        return cls(fam, tuple(obj["parts"]))

    def __str__(self) -> str:
        return f"{self.family.kind}{self.parts}"


def trivial_signature(family: GroupFamily) -> Signature:
    """Signature of the trivial character (its character is identically 1)."""
    n = family.rank
    if family.kind == "Sp":
        return Signature(family, tuple(range(n, 0, -1)))
    return Signature(family, tuple(range(n - 1, -1, -1)))


def enumerate_signatures(family: GroupFamily, bound: int) -> list[Signature]:
    """All signatures with ``max |part| <= bound`` in descending lexicographic order.

    Raises
    ------
    EmptyEnumeration
        If no signature fits within ``bound``.
    """
    bound = int(bound)
    lowest = {"U": -bound, "O": 0, "Sp": 1}[family.kind]
    values = range(bound, lowest - 1, -1)
    # combinations of a descending sequence come out in descending lex order
    out = [Signature(family, c) for c in itertools.combinations(values, family.rank)]
    if not out:
        raise EmptyEnumeration(f"no {family} signature has all parts within {bound}")
    return out


def iter_pairs(parts: Sequence[int]) -> Iterable[tuple[int, int]]:
    return itertools.combinations(parts, 2)


def dimension_unitary(m: Signature) -> int:
    """Dimension of the U(n) representation with strict signature ``m``.

    ``prod_{a<b} (m_a - m_b) / prod_{j=1}^{n-1} j!``, evaluated exactly.
    """
    if m.family.kind != "U":
        raise InvalidSignature("dimension_unitary needs a U-family signature")
    num = math.prod(a - b for a, b in iter_pairs(m.parts))
    den = math.prod(math.factorial(j) for j in range(1, m.rank))
    q, r = divmod(num, den)
    if r != 0 or q <= 0:
        raise InternalError(f"non-integral dimension {num}/{den} for {m}")
    return q


def shift_signature(m: Signature, k: int) -> Signature:
    """Shift every part by ``k``; the character gets multiplied by ``det**k``."""
    if m.family.kind != "U":
        raise InvalidSignature("shift_signature needs a U-family signature")
    return Signature(m.family, tuple(p + int(k) for p in m.parts))


def conjugate_signature(m: Signature) -> Signature:
    """Signature of the complex-conjugate character: ``(n-1) - reversed(m)``."""
    if m.family.kind != "U":
        raise InvalidSignature("conjugate_signature needs a U-family signature")
    n = m.rank
    return Signature(m.family, tuple(n - 1 - p for p in reversed(m.parts)))

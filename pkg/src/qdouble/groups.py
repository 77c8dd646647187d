"""Finite abelian groups, their characters, and exact unit-phase arithmetic.

A group is a direct product of cyclic factors Z_{n_1} x ... x Z_{n_k}.
Elements and characters are digit vectors; characters evaluate to exact
rational phases so that long products of character values never drift.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import prod

import numpy as np

__all__ = [
    "Phase",
    "Group",
    "GroupElement",
    "Character",
    "GroupError",
    "make_group",
    "parse_group_spec",
]


class GroupError(ValueError):
    """Raised for invalid group constructions or mismatched operands."""


@dataclass(frozen=True)
class Phase:
    """The unit complex number exp(2*pi*i*q) for an exact rational q in [0, 1).

    Multiplication, inversion, and integer powers stay exact; conversion to a
    complex float is the only lossy operation.
    """

    exponent: Fraction

    def __post_init__(self):
        q = self.exponent % 1
        object.__setattr__(self, "exponent", q)

    @staticmethod
    def of(numerator: int, denominator: int) -> "Phase":
        return Phase(Fraction(numerator, denominator))

    @staticmethod
    def one() -> "Phase":
        return Phase(Fraction(0))

    def __mul__(self, other: "Phase") -> "Phase":
        return Phase(self.exponent + other.exponent)

    def __truediv__(self, other: "Phase") -> "Phase":
        return Phase(self.exponent - other.exponent)

    def __pow__(self, k: int) -> "Phase":
        return Phase(self.exponent * k)

    def conjugate(self) -> "Phase":
        return Phase(-self.exponent)

    @property
    def is_one(self) -> bool:
        return self.exponent == 0

    def to_complex(self) -> complex:
        q = float(self.exponent)
        return complex(np.cos(2 * np.pi * q), np.sin(2 * np.pi * q))

    def exponent_str(self) -> str:
        """Render the exponent as 'p/q' (or '0')."""
        q = self.exponent
        if q.denominator == 1:
            return str(q.numerator)
        return f"{q.numerator}/{q.denominator}"

    def __str__(self) -> str:
        return f"exp(2*pi*i*{self.exponent_str()})"


@dataclass(frozen=True)
class GroupElement:
    """An element of a finite abelian group, stored as one digit per factor."""

    group: "Group"
    digits: tuple[int, ...]

    def __post_init__(self):
        if len(self.digits) != len(self.group.orders):
            raise GroupError("digit vector length does not match group rank")
        if any(not (0 <= d < n) for d, n in zip(self.digits, self.group.orders)):
            raise GroupError(f"digits {self.digits} out of range for {self.group}")

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        self.group.require_same(other.group)
        dig = tuple((a + b) % n for a, b, n in zip(self.digits, other.digits, self.group.orders))
        return GroupElement(self.group, dig)

    def inverse(self) -> "GroupElement":
        dig = tuple((-a) % n for a, n in zip(self.digits, self.group.orders))
        return GroupElement(self.group, dig)

    @property
    def is_identity(self) -> bool:
        return all(d == 0 for d in self.digits)

    @property
    def index(self) -> int:
        """Mixed-radix packing, little-endian in factor order."""
        idx, weight = 0, 1
        for d, n in zip(self.digits, self.group.orders):
            idx += d * weight
            weight *= n
        return idx

    def __repr__(self) -> str:
        return f"g{self.digits}"


@dataclass(frozen=True)
class Character:
    """A character of a finite abelian group, stored as one digit per factor.

    Evaluation on an element g gives the exact phase
    exp(2*pi*i * sum_j k_j * g_j / n_j).
    """

    group: "Group"
    digits: tuple[int, ...]

    def __post_init__(self):
        if len(self.digits) != len(self.group.orders):
            raise GroupError("digit vector length does not match group rank")
        if any(not (0 <= d < n) for d, n in zip(self.digits, self.group.orders)):
            raise GroupError(f"digits {self.digits} out of range for {self.group}")

    def __call__(self, g: GroupElement) -> Phase:
        self.group.require_same(g.group)
        q = Fraction(0)
        for k, d, n in zip(self.digits, g.digits, self.group.orders):
            q += Fraction(k * d, n)
        return Phase(q)

    def __mul__(self, other: "Character") -> "Character":
        self.group.require_same(other.group)
        dig = tuple((a + b) % n for a, b, n in zip(self.digits, other.digits, self.group.orders))
        return Character(self.group, dig)

    def inverse(self) -> "Character":
        dig = tuple((-a) % n for a, n in zip(self.digits, self.group.orders))
        return Character(self.group, dig)

    def conjugate(self) -> "Character":
        return self.inverse()

    @property
    def is_trivial(self) -> bool:
        return all(d == 0 for d in self.digits)

    @property
    def index(self) -> int:
        idx, weight = 0, 1
        for d, n in zip(self.digits, self.group.orders):
            idx += d * weight
            weight *= n
        return idx

    def __repr__(self) -> str:
        return f"chi{self.digits}"


@dataclass(frozen=True)
class Group:
    """A finite abelian group given as a direct product of cyclic factors."""

    orders: tuple[int, ...]

    def __post_init__(self):
        if not self.orders:
            raise GroupError("group needs at least one cyclic factor")
        if any(n < 2 for n in self.orders):
            raise GroupError(f"cyclic factor orders must be >= 2, got {self.orders}")
        if prod(self.orders) > 255:
            raise GroupError("group order above 255 is not supported")

    @property
    def size(self) -> int:
        return prod(self.orders)

    @property
    def rank(self) -> int:
        return len(self.orders)

    @property
    def spec(self) -> str:
        return "x".join(f"Z{n}" for n in self.orders)

    def require_same(self, other: "Group"):
        if self.orders != other.orders:
            raise GroupError(f"mixed groups {self} and {other}")

    def identity(self) -> GroupElement:
        return GroupElement(self, (0,) * self.rank)

    def trivial_character(self) -> Character:
        return Character(self, (0,) * self.rank)

    def element(self, digits) -> GroupElement:
        return GroupElement(self, tuple(int(d) for d in digits))

    def character(self, digits) -> Character:
        return Character(self, tuple(int(d) for d in digits))

    def element_from_index(self, idx: int) -> GroupElement:
        if not 0 <= idx < self.size:
            raise GroupError(f"element index {idx} out of range")
        dig = []
        for n in self.orders:
            dig.append(idx % n)
            idx //= n
        return GroupElement(self, tuple(dig))

    def character_from_index(self, idx: int) -> Character:
        if not 0 <= idx < self.size:
            raise GroupError(f"character index {idx} out of range")
        dig = []
        for n in self.orders:
            dig.append(idx % n)
            idx //= n
        return Character(self, tuple(dig))

    def elements(self) -> list[GroupElement]:
        """All elements, in packed-index order (first factor fastest)."""
        return [self.element_from_index(i) for i in range(self.size)]

    def characters(self) -> list[Character]:
        """All characters, in packed-index order (first factor fastest)."""
        return [self.character_from_index(i) for i in range(self.size)]

    def char_inner(self, chi: Character, sigma: Character) -> complex:
        """Normalized inner product (1/|G|) sum_g conj(chi(g)) sigma(g).

        Character values at a fixed chi != sigma sweep a nontrivial cyclic
        subgroup of the unit circle uniformly, so the sum telescopes to zero
        exactly; the inner product is the exact Kronecker delta.
        """
        self.require_same(chi.group)
        self.require_same(sigma.group)
        return complex(1.0) if chi.digits == sigma.digits else complex(0.0)

    # ---- integer tables used by the vectorized operator engine ----

    def mul_table(self) -> np.ndarray:
        """|G| x |G| uint8 table of products on packed element indices."""
        return _mul_table(self.orders)

    def inv_table(self) -> np.ndarray:
        return _inv_table(self.orders)

    def char_values(self, chi: Character) -> np.ndarray:
        """Complex character values on all packed element indices."""
        return _char_values(self.orders, chi.digits)

    def char_phase(self, chi_index: int, g_index: int) -> Phase:
        chi = self.character_from_index(chi_index)
        return chi(self.element_from_index(g_index))

    def __str__(self) -> str:
        return "x".join(f"Z{n}" for n in self.orders)


@lru_cache(maxsize=None)
def _mul_table(orders: tuple[int, ...]) -> np.ndarray:
    g = Group(orders)
    size = g.size
    table = np.zeros((size, size), dtype=np.uint8)
    els = [g.element_from_index(i) for i in range(size)]
    for i, a in enumerate(els):
        for j, b in enumerate(els):
            table[i, j] = (a * b).index
    table.setflags(write=False)
    return table


@lru_cache(maxsize=None)
def _inv_table(orders: tuple[int, ...]) -> np.ndarray:
    g = Group(orders)
    table = np.array([g.element_from_index(i).inverse().index for i in range(g.size)], dtype=np.uint8)
    table.setflags(write=False)
    return table


@lru_cache(maxsize=None)
def _char_values(orders: tuple[int, ...], chi_digits: tuple[int, ...]) -> np.ndarray:
    g = Group(orders)
    chi = Character(g, chi_digits)
    vals = np.array(
        [chi(g.element_from_index(i)).to_complex() for i in range(g.size)],
        dtype=np.complex128,
    )
    vals.setflags(write=False)
    return vals


def make_group(orders) -> Group:
    """Build a finite abelian group from a sequence of cyclic factor orders.

    Order-1 factors are dropped; an empty or all-trivial sequence is an error.
    """
    kept = tuple(int(n) for n in orders if int(n) != 1)
    if any(int(n) < 1 for n in orders):
        raise GroupError(f"invalid factor orders {tuple(orders)}")
    if not kept:
        raise GroupError("group must have at least one nontrivial cyclic factor")
    return Group(kept)


_GROUP_SPEC_RE = re.compile(r"^z\d+(xz\d+)*$")


def parse_group_spec(spec: str) -> Group:
    """Parse strings like ``Z2``, ``Z3``, or ``Z2xZ4`` (case-insensitive)."""
    s = spec.strip().lower()
    if not _GROUP_SPEC_RE.match(s):
        raise GroupError(f"malformed group spec {spec!r}; expected e.g. 'Z2' or 'Z2xZ4'")
    orders = [int(part[1:]) for part in s.split("x")]
    return make_group(orders)

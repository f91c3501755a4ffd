"""Linear algebra over F2 for the groups G = (Z/2)^r.

Elements and characters are stored as int bitsets.  Coordinate ``j`` of a
rank-``r`` vector lives in bit ``r - 1 - j``, so ``range(2**r)`` walks the
group in lexicographic order of bit tuples.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

__all__ = [
    "DEFAULT_RANK_CAP",
    "RankCapError",
    "GroupF2",
    "GVector",
    "GCharacter",
    "Subspace",
    "parity",
    "pairing",
    "bits_to_int",
    "int_to_bits",
    "xor_rank",
    "is_independent",
    "dual_basis",
    "subspace_span",
    "count_solutions",
]

DEFAULT_RANK_CAP = 24


class RankCapError(ValueError):
    """Exhaustive enumeration requested above the configured rank cap."""


def parity(x: int) -> int:
    return x.bit_count() & 1


def bits_to_int(bits: Sequence[int]) -> int:
    v = 0
    for b in bits:
        if b not in (0, 1):
            raise ValueError(f"bit must be 0 or 1, got {b!r}")
        v = (v << 1) | b
    return v


def int_to_bits(value: int, rank: int) -> tuple[int, ...]:
    return tuple((value >> (rank - 1 - j)) & 1 for j in range(rank))


@dataclass(frozen=True, order=True)
class GVector:
    """An element of (Z/2)^rank; ``value`` is the packed bitset."""

    rank: int
    value: int

    def __post_init__(self):
        if self.rank < 0:
            raise ValueError("rank must be non-negative")
        if not 0 <= self.value < (1 << self.rank):
            raise ValueError(f"value {self.value} out of range for rank {self.rank}")

    @classmethod
    def from_bits(cls, bits: Sequence[int]):
        return cls(len(bits), bits_to_int(bits))

    @classmethod
    def zero(cls, rank: int):
        return cls(rank, 0)

    @classmethod
    def unit(cls, rank: int, j: int):
        if not 0 <= j < rank:
            raise IndexError(j)
        return cls(rank, 1 << (rank - 1 - j))

    def bits(self) -> tuple[int, ...]:
        return int_to_bits(self.value, self.rank)

    def __add__(self, other):
        if self.rank != other.rank:
            raise ValueError("rank mismatch")
        return type(self)(self.rank, self.value ^ other.value)

    __sub__ = __add__

    def __bool__(self):
        return self.value != 0

    def __repr__(self):
        return f"{type(self).__name__}({''.join(map(str, self.bits())) or '-'})"


class GCharacter(GVector):
    """A character of (Z/2)^rank, identified with a bit sequence."""


def pairing(chi: GVector, sigma: GVector) -> int:
    """chi(sigma): parity of the bitwise AND."""
    if chi.rank != sigma.rank:
        raise ValueError("rank mismatch")
    return parity(chi.value & sigma.value)


@dataclass(frozen=True)
class GroupF2:
    rank: int

    def __post_init__(self):
        if self.rank < 0:
            raise ValueError("rank must be non-negative")

    @property
    def order(self) -> int:
        return 1 << self.rank

    def check_cap(self, cap: int = DEFAULT_RANK_CAP):
        if self.rank > cap:
            raise RankCapError(f"rank {self.rank} exceeds enumeration cap {cap}")

    def elements(self, cap: int = DEFAULT_RANK_CAP) -> Iterator[GVector]:
        self.check_cap(cap)
        for v in range(self.order):
            yield GVector(self.rank, v)

    def characters(self, cap: int = DEFAULT_RANK_CAP) -> Iterator[GCharacter]:
        self.check_cap(cap)
        for v in range(self.order):
            yield GCharacter(self.rank, v)

    def standard_basis(self) -> list[GVector]:
        return [GVector.unit(self.rank, j) for j in range(self.rank)]


def _reduce_basis(values: Iterable[int]) -> dict[int, int]:
    """XOR basis keyed by leading bit."""
    basis: dict[int, int] = {}
    for v in values:
        while v:
            top = v.bit_length() - 1
            if top in basis:
                v ^= basis[top]
            else:
                basis[top] = v
                break
    return basis


def xor_rank(values: Iterable[int]) -> int:
    return len(_reduce_basis(values))


def _common_rank(vs: Sequence[GVector]) -> int | None:
    ranks = {v.rank for v in vs}
    if len(ranks) > 1:
        raise ValueError("rank mismatch")
    return ranks.pop() if ranks else None


def is_independent(vs: Sequence[GVector]) -> bool:
    _common_rank(vs)
    return xor_rank(v.value for v in vs) == len(vs)


def _rref(rows: Iterable[int]) -> list[int]:
    """Reduced row echelon form, rows sorted by decreasing pivot."""
    basis = _reduce_basis(rows)
    pivots = sorted(basis, reverse=True)
    out = [basis[p] for p in pivots]
    for i, p in enumerate(pivots):
        for k in range(len(out)):
            if k != i and (out[k] >> p) & 1:
                out[k] ^= out[i]
    return out


def _nullspace(rows: Sequence[int], rank: int) -> list[int]:
    """Basis of {x : parity(row & x) = 0 for every row}."""
    red = _rref(rows)
    pivots = {r.bit_length() - 1: r for r in red}
    out = []
    for f in range(rank):
        if f in pivots:
            continue
        x = 1 << f
        for p, row in pivots.items():
            if (row >> f) & 1:
                x |= 1 << p
        out.append(x)
    return sorted(out, reverse=True)


def dual_basis(basis: Sequence[GVector]) -> list[GCharacter]:
    """Characters chi_i with chi_i(sigma_j) = delta_ij."""
    r = _common_rank(basis)
    if r is None:
        return []
    if len(basis) != r or not is_independent(basis):
        raise ValueError("not a basis")
    out = []
    for i in range(r):
        others = [basis[j].value for j in range(r) if j != i]
        (chi,) = _nullspace(others, r)
        if not parity(chi & basis[i].value):
            raise AssertionError("dual basis construction failed")
        out.append(GCharacter(r, chi))
    return out


@dataclass(frozen=True)
class Subspace:
    """A subspace of (Z/2)^rank held by an echelon basis."""

    rank: int
    basis: tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.basis)

    def contains(self, v: GVector | int) -> bool:
        x = v.value if isinstance(v, GVector) else v
        for b in self.basis:
            if (x >> (b.bit_length() - 1)) & 1:
                x ^= b
        return x == 0

    __contains__ = contains

    def elements(self) -> Iterator[GVector]:
        for mask in range(1 << self.dim):
            v = 0
            for i, b in enumerate(self.basis):
                if (mask >> i) & 1:
                    v ^= b
            yield GVector(self.rank, v)

    def element_values(self) -> list[int]:
        return sorted(e.value for e in self.elements())

    def complement_elements(self, cap: int = DEFAULT_RANK_CAP) -> Iterator[GVector]:
        """Elements of G outside the subspace, lexicographic."""
        GroupF2(self.rank).check_cap(cap)
        for v in range(1 << self.rank):
            if not self.contains(v):
                yield GVector(self.rank, v)

    def perp(self) -> "Subspace":
        """Annihilator in the dual group."""
        return Subspace(self.rank, tuple(_rref(_nullspace(self.basis, self.rank))))

    def vectors(self) -> list[GVector]:
        return [GVector(self.rank, b) for b in self.basis]


def subspace_span(vs: Sequence[GVector], rank: int | None = None) -> Subspace:
    r = _common_rank(vs)
    if r is None:
        if rank is None:
            raise ValueError("rank needed for an empty span")
        r = rank
    elif rank is not None and rank != r:
        raise ValueError("rank mismatch")
    return Subspace(r, tuple(_rref(v.value for v in vs)))


def count_solutions(functionals: Sequence[int], rhs: Sequence[int], rank: int) -> int:
    """Number of sigma in (Z/2)^rank with parity(f_i & sigma) = rhs_i for all i."""
    # right-hand side rides in bit 0, so an inconsistent row reduces to exactly 1
    rows = [(f << 1) | (b & 1) for f, b in zip(functionals, rhs)]
    red = _reduce_basis(rows)
    if 0 in red:
        return 0
    return 1 << (rank - len(red))

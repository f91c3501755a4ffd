"""Picard lattice of P1 x P1 blown up at n points.

A class ``(r, s; a_1..a_n)`` means r*F1 + s*F2 - sum a_i*E_i, with F1 the
fibre of the first projection.  Positive ``a_i`` subtract E_i, so the
canonical class carries a_i = -1.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

__all__ = [
    "ParityError",
    "BlownQuadricLattice",
    "DivClass",
    "HalfClass",
    "intersect",
    "canonical_class",
    "is_comb_ample",
    "comb_ample_margin",
    "rr_chi",
    "comb_ample_certificate",
    "NotCombAmpleError",
    "escalate_to_ample",
    "AMPLE_FACTS",
]


class ParityError(ValueError):
    """A lattice class that had to be halved has odd coordinates."""

    def __init__(self, message, *, where=None, odd_coordinates=()):
        super().__init__(message)
        self.where = where
        self.odd_coordinates = tuple(odd_coordinates)


class NotCombAmpleError(ValueError):
    pass


@dataclass(frozen=True)
class DivClass:
    r: int
    s: int
    a: tuple[int, ...] = ()

    def __post_init__(self):
        if not isinstance(self.a, tuple):
            object.__setattr__(self, "a", tuple(self.a))

    @property
    def n(self) -> int:
        return len(self.a)

    @classmethod
    def zero(cls, n: int):
        return cls(0, 0, (0,) * n)

    @classmethod
    def from_coords(cls, coords: Sequence[int]):
        c = [int(x) for x in coords]
        return cls(c[0], c[1], tuple(c[2:]))

    def coords(self) -> tuple[int, ...]:
        return (self.r, self.s, *self.a)

    def _same(self, other):
        if not isinstance(other, DivClass):
            return NotImplemented
        if self.n != other.n:
            raise ValueError(f"lattice size mismatch: {self.n} vs {other.n}")
        return True

    def __add__(self, other):
        if self._same(other) is NotImplemented:
            return NotImplemented
        return DivClass(self.r + other.r, self.s + other.s,
                        tuple(x + y for x, y in zip(self.a, other.a)))

    def __sub__(self, other):
        if self._same(other) is NotImplemented:
            return NotImplemented
        return DivClass(self.r - other.r, self.s - other.s,
                        tuple(x - y for x, y in zip(self.a, other.a)))

    def __neg__(self):
        return DivClass(-self.r, -self.s, tuple(-x for x in self.a))

    def __mul__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        return DivClass(k * self.r, k * self.s, tuple(k * x for x in self.a))

    __rmul__ = __mul__

    def dot(self, other: "DivClass") -> int:
        return intersect(self, other)

    def __bool__(self):
        return bool(self.r or self.s or any(self.a))

    def is_zero(self) -> bool:
        return not self

    def odd_coordinates(self) -> list[int]:
        return [i for i, c in enumerate(self.coords()) if c % 2]

    def halve(self) -> "DivClass":
        odd = self.odd_coordinates()
        if odd:
            raise ParityError(f"class {self.coords()} is not 2-divisible", odd_coordinates=odd)
        return DivClass(self.r // 2, self.s // 2, tuple(x // 2 for x in self.a))

    def extend(self, m: int) -> "DivClass":
        """Same class with m extra zero exceptional coordinates."""
        return DivClass(self.r, self.s, self.a + (0,) * m)

    def project(self, n: int) -> "DivClass":
        """Forget the exceptional coordinates past the first n."""
        return DivClass(self.r, self.s, self.a[:n])

    def to_json(self) -> dict:
        return {"r": self.r, "s": self.s, "a": list(self.a)}

    @classmethod
    def from_json(cls, obj: dict):
        return cls(int(obj["r"]), int(obj["s"]), tuple(int(x) for x in obj["a"]))

    def __repr__(self):
        body = f"{self.r},{self.s}"
        if self.a:
            body += ";" + ",".join(map(str, self.a))
        return f"DivClass({body})"


def intersect(A: DivClass, B: DivClass) -> int:
    if A.n != B.n:
        raise ValueError(f"lattice size mismatch: {A.n} vs {B.n}")
    return A.r * B.s + B.r * A.s - sum(x * y for x, y in zip(A.a, B.a))


@dataclass(frozen=True)
class HalfClass:
    """A class with coefficients in (1/2)Z, stored as its double."""

    twice: DivClass

    @classmethod
    def of(cls, c: DivClass):
        return cls(c * 2)

    @classmethod
    def half(cls, c: DivClass):
        return cls(c)

    def __add__(self, other):
        if isinstance(other, DivClass):
            other = HalfClass.of(other)
        return HalfClass(self.twice + other.twice)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, DivClass):
            other = HalfClass.of(other)
        return HalfClass(self.twice - other.twice)

    def __mul__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        return HalfClass(self.twice * k)

    __rmul__ = __mul__

    def dot(self, other) -> Fraction:
        if isinstance(other, DivClass):
            return Fraction(intersect(self.twice, other), 2)
        return Fraction(intersect(self.twice, other.twice), 4)

    def square(self) -> Fraction:
        return self.dot(self)

    def coords(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(c, 2) for c in self.twice.coords())

    def is_integral(self) -> bool:
        return not self.twice.odd_coordinates()


@dataclass(frozen=True)
class BlownQuadricLattice:
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be non-negative")

    @property
    def rank(self) -> int:
        return self.n + 2

    def zero(self) -> DivClass:
        return DivClass.zero(self.n)

    def fibre1(self) -> DivClass:
        return DivClass(1, 0, (0,) * self.n)

    def fibre2(self) -> DivClass:
        return DivClass(0, 1, (0,) * self.n)

    def exceptional(self, i: int) -> DivClass:
        """The class E_i (stored with a_i = -1)."""
        a = [0] * self.n
        a[i] = -1
        return DivClass(0, 0, tuple(a))

    def canonical_class(self) -> DivClass:
        return DivClass(-2, -2, (-1,) * self.n)

    def gram(self) -> list[list[int]]:
        g = [[0] * self.rank for _ in range(self.rank)]
        g[0][1] = g[1][0] = 1
        for i in range(2, self.rank):
            g[i][i] = -1
        return g

    def signature(self) -> tuple[int, int]:
        return _signature(self.gram())


def _signature(gram) -> tuple[int, int]:
    """(positive, negative) inertia via symmetric elimination over Q."""
    m = [[Fraction(x) for x in row] for row in gram]
    k = len(m)
    pos = neg = 0
    idx = list(range(k))
    while idx:
        piv = next((i for i in idx if m[i][i] != 0), None)
        if piv is None:
            # all remaining diagonal entries vanish; split off a hyperbolic pair if any
            pair = next(((i, j) for i in idx for j in idx if i < j and m[i][j] != 0), None)
            if pair is None:
                break
            i, j = pair
            for c in range(k):
                m[i][c] += m[j][c]
            for c in range(k):
                m[c][i] += m[c][j]
            continue
        d = m[piv][piv]
        pos += d > 0
        neg += d < 0
        idx.remove(piv)
        for i in idx:
            f = m[i][piv] / d
            for c in range(k):
                m[i][c] -= f * m[piv][c]
        for i in idx:
            m[piv][i] = m[i][piv] = Fraction(0)
    return pos, neg


def canonical_class(lattice: BlownQuadricLattice | int) -> DivClass:
    n = lattice.n if isinstance(lattice, BlownQuadricLattice) else int(lattice)
    return BlownQuadricLattice(n).canonical_class()


def is_comb_ample(L: DivClass) -> bool:
    if any(x < 2 for x in L.a):
        return False
    bound = sum(x + 1 for x in L.a)
    return L.r > bound and L.s > bound


def comb_ample_margin(L: DivClass) -> int:
    """Smallest slack among the inequalities; comb ample iff margin > 0."""
    bound = sum(x + 1 for x in L.a)
    slacks = [L.r - bound, L.s - bound] + [x - 1 for x in L.a]
    return min(slacks)


def rr_chi(L: DivClass) -> int:
    """Holomorphic Euler characteristic 1 + L.(L-K)/2."""
    twice = intersect(L, L - canonical_class(L.n))
    if twice % 2:
        raise AssertionError(f"L.(L-K) odd for {L!r}")
    return 1 + twice // 2


AMPLE_FACTS = (
    "ample",
    "base_point_free",
    "H1(L)=0",
    "H1(-L)=0",
    "H0(-L)=0",
    "H0(T_S(-L))=0",
    "H1(T_S(-L))=0",
)


def comb_ample_certificate(L: DivClass) -> list[str]:
    if not is_comb_ample(L):
        raise NotCombAmpleError(f"{L!r} is not combinatorially ample")
    return list(AMPLE_FACTS)


def escalate_to_ample(D: DivClass, L: DivClass, max_alpha: int = 1 << 16) -> int:
    """Smallest alpha >= 0 with D + alpha*L combinatorially ample."""
    if not is_comb_ample(L):
        raise NotCombAmpleError(f"{L!r} is not combinatorially ample")
    alpha = 0
    while alpha <= max_alpha:
        if is_comb_ample(D + L * alpha):
            return alpha
        alpha += 1
    raise ValueError(f"no alpha <= {max_alpha} makes the class ample")

"""Cyclic quotient singularities 1/p(1,q): normal forms, HJ chains, class T."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Sequence

__all__ = [
    "CyclicSing",
    "Smooth",
    "SMOOTH",
    "HJChain",
    "ClassTWitness",
    "NonIsolatedError",
    "normalize",
    "hj",
    "from_chain",
    "class_t_witness",
    "class_t_values",
    "is_iso",
    "b_family",
    "y_family_by_type",
    "y_family",
    "fundamental_cycle",
    "q2_criterion",
    "a_type",
]


class NonIsolatedError(ValueError):
    pass


@dataclass(frozen=True)
class Smooth:
    """The smooth germ (p = 1)."""

    p: int = 1

    def to_json(self):
        return {"kind": "smooth", "p": 1}


SMOOTH = Smooth()


@dataclass(frozen=True)
class CyclicSing:
    p: int
    q: int
    origin: tuple[int, int, int] | None = None

    def __post_init__(self):
        if self.p < 2 or not 1 <= self.q < self.p or gcd(self.p, self.q) != 1:
            raise ValueError(f"not a normal form: 1/{self.p}(1,{self.q})")

    @property
    def is_rdp(self) -> bool:
        return self.q == self.p - 1

    @property
    def q_inverse(self) -> int:
        return pow(self.q, -1, self.p)

    def chain(self) -> "HJChain":
        return hj(self)

    def to_json(self):
        out = {"kind": "cyclic", "p": self.p, "q": self.q}
        if self.origin:
            out["origin"] = list(self.origin)
        return out

    def __str__(self):
        return f"1/{self.p}(1,{self.q})"


@dataclass(frozen=True)
class HJChain:
    b: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "b", tuple(self.b))
        if not self.b or any(x < 2 for x in self.b):
            raise ValueError("HJ entries must be >= 2 and the chain nonempty")

    def value(self) -> Fraction:
        x = Fraction(self.b[-1])
        for b in reversed(self.b[:-1]):
            x = b - 1 / x
        return x

    def __len__(self):
        return len(self.b)

    def __iter__(self):
        return iter(self.b)

    def to_json(self):
        return list(self.b)


@dataclass(frozen=True)
class ClassTWitness:
    d: int
    n: int
    a: int
    kind: str = "T"  # "T", "rdp", or "smooth"

    def to_json(self):
        return {"d": self.d, "n": self.n, "a": self.a, "kind": self.kind}


def normalize(p: int, a: int, b: int) -> CyclicSing | Smooth:
    if p < 1:
        raise ValueError("p must be positive")
    g = gcd(gcd(p, a), b)
    p0, a0, b0 = p // g, a // g, b // g
    if p0 == 1:
        return SMOOTH
    if gcd(p0, a0) != 1 or gcd(p0, b0) != 1:
        raise NonIsolatedError(f"1/{p}({a},{b}) is not isolated")
    q = (pow(a0, -1, p0) * b0) % p0
    return CyclicSing(p0, q, (p, a, b))


def _as_pq(s) -> tuple[int, int]:
    if type(s) is tuple:
        return s
    if isinstance(s, Smooth):
        return 1, 0
    if isinstance(s, CyclicSing):
        return s.p, s.q
    p, q = s
    return int(p), int(q)


def hj(s) -> HJChain:
    p, q = _as_pq(s)
    if p < 2:
        raise ValueError("smooth germs have no chain")
    out = []
    while q:
        c = -(-p // q)
        out.append(c)
        p, q = q, c * q - p
    return HJChain(tuple(out))


def from_chain(chain: HJChain | Sequence[int]) -> CyclicSing:
    ch = chain if isinstance(chain, HJChain) else HJChain(tuple(chain))
    v = ch.value()
    return CyclicSing(v.numerator, v.denominator)


@lru_cache(maxsize=4096)
def _class_t_table(p: int) -> dict[int, ClassTWitness]:
    table: dict[int, ClassTWitness] = {}
    n = 1
    while n * n <= p:
        if p % (n * n) == 0:
            d = p // (n * n)
            for a in range(1, n + 1):
                if gcd(a, n) != 1:
                    continue
                x = (d * n * a - 1) % p
                if gcd(x, p) != 1:
                    continue
                w = ClassTWitness(d, n, a, "rdp" if x == p - 1 else "T")
                for q in (x, pow(x, -1, p)):
                    table.setdefault(q, w)
        n += 1
    return table


def class_t_values(p: int) -> dict[int, ClassTWitness]:
    """All q in [1, p-1] making 1/p(1,q) class T, with a witness each."""
    return dict(_class_t_table(p))


_SMOOTH_WITNESS = ClassTWitness(1, 1, 1, "smooth")


def class_t_witness(s) -> ClassTWitness | None:
    p, q = _as_pq(s)
    if p == 1:
        return _SMOOTH_WITNESS
    q %= p
    if q == p - 1:
        return ClassTWitness(p, 1, 1, "rdp")
    return _class_t_table(p).get(q)


def is_iso(s1, s2) -> bool:
    p1, q1 = _as_pq(s1)
    p2, q2 = _as_pq(s2)
    if p1 != p2:
        return False
    if p1 == 1:
        return True
    return q2 % p1 in (q1 % p1, pow(q1, -1, p1))


def b_family(n: int) -> tuple[CyclicSing, HJChain]:
    """B_n = 1/(2n+1)(1, 2n-1), resolved by the chain 2,...,2,3."""
    if n < 1:
        raise ValueError("n >= 1")
    return CyclicSing(2 * n + 1, 2 * n - 1), HJChain((2,) * (n - 1) + (3,))


def y_family_by_type(n: int) -> tuple[CyclicSing, HJChain]:
    """The type 1/(4n)(1, 2n-1); chain [4] for n = 1, else 3,2,...,2,3."""
    if n < 1:
        raise ValueError("n >= 1")
    chain = (4,) if n == 1 else (3,) + (2,) * (n - 2) + (3,)
    return CyclicSing(4 * n, 2 * n - 1), HJChain(chain)


# label k of the Y family -> type parameter n of 1/(4n)(1,2n-1)
Y_CONVENTIONS = {"table": 0, "shifted": -1}


def y_family(label: int, convention: str = "table") -> tuple[CyclicSing, HJChain]:
    """Y by its subscript; "table" reads Y_n as 1/(4n)(1,2n-1), "shifted" as 1/(4n-4)."""
    return y_family_by_type(label + Y_CONVENTIONS[convention])


def a_type(k: int) -> CyclicSing:
    """The RDP A_k as 1/(k+1)(1,k)."""
    return CyclicSing(k + 1, k)


def fundamental_cycle(graph) -> tuple[list[int], int]:
    """Laufer's algorithm on a tree of rational curves.

    ``graph`` is a chain (sequence of b_i >= 2, self-intersection -b_i) or a
    pair (selfints, edges) with selfints negative and edges index pairs.
    """
    if isinstance(graph, HJChain):
        graph = list(graph.b)
    if all(isinstance(x, int) for x in graph):
        selfint = [-b for b in graph]
        edges = [(i, i + 1) for i in range(len(graph) - 1)]
    else:
        selfint, edges = graph
        selfint = list(selfint)
    k = len(selfint)
    if k == 0:
        raise ValueError("empty graph")
    if any(e > -2 for e in selfint):
        raise ValueError("self-intersections must be <= -2")
    adj = [[] for _ in range(k)]
    for i, j in edges:
        if i == j or not (0 <= i < k and 0 <= j < k):
            raise ValueError(f"bad edge {(i, j)}")
        adj[i].append(j)
        adj[j].append(i)
    if len(edges) != k - 1 or not _connected(adj):
        raise ValueError("graph must be a tree")

    def dot_e(z, i):
        return z[i] * selfint[i] + sum(z[j] for j in adj[i])

    z = [1] * k
    for _ in range(10_000 * k):
        bad = next((i for i in range(k) if dot_e(z, i) > 0), None)
        if bad is None:
            break
        z[bad] += 1
    else:
        raise ValueError("no fundamental cycle found (form not negative definite?)")
    z2 = sum(z[i] * dot_e(z, i) for i in range(k))
    return z, z2


def _connected(adj) -> bool:
    seen, stack = {0}, [0]
    while stack:
        for j in adj[stack.pop()]:
            if j not in seen:
                seen.add(j)
                stack.append(j)
    return len(seen) == len(adj)


def q2_criterion(d: int, n: int, a: int) -> bool:
    """Whether q = dna - 1 satisfies q^2 = 1 mod dn^2."""
    p = d * n * n
    q = d * n * a - 1
    return (q * q - 1) % p == 0

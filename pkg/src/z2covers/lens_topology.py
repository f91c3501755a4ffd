"""Lens-space links, mapping-class flags, Milnor lattices and embedding obstructions."""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from itertools import product
from math import gcd, isqrt
from typing import Sequence

from .quotient_sings import CyclicSing, Smooth, b_family, is_iso, y_family_by_type

__all__ = [
    "LensSpace",
    "MCGReport",
    "MilnorLattice",
    "AmbientModel",
    "EmbeddingResult",
    "SearchBoundError",
    "link_of",
    "compare_links",
    "mcg",
    "milnor_lattice",
    "embeds",
    "lemma_verdicts",
]


@dataclass(frozen=True)
class LensSpace:
    p: int
    q: int

    def __post_init__(self):
        if self.p == 1:
            if self.q != 0:
                raise ValueError("S^3 is L(1,0)")
            return
        if not (1 <= self.q < self.p and gcd(self.p, self.q) == 1):
            raise ValueError(f"L({self.p},{self.q}) needs coprime 0 < q < p")

    @property
    def is_sphere(self) -> bool:
        return self.p == 1

    def to_json(self):
        return {"p": self.p, "q": self.q}

    def __str__(self):
        return "S^3" if self.is_sphere else f"L({self.p},{self.q})"


def link_of(s: CyclicSing | Smooth) -> LensSpace:
    if isinstance(s, Smooth):
        return LensSpace(1, 0)
    return LensSpace(s.p, s.q)


def compare_links(s1, s2) -> dict:
    """Links of two germs; isomorphic germs have equal links."""
    l1, l2 = link_of(s1), link_of(s2)
    same = is_iso(s1, s2)
    note = "germs isomorphic (q2 = q1 or q1^-1), links identified" if same else \
        "germs not isomorphic; no diffeomorphism claim either way"
    return {"links": [l1.to_json(), l2.to_json()], "iso": same, "note": note}


@dataclass(frozen=True)
class MCGReport:
    sigma_defined: bool
    sigma_isotopic_to_id: bool
    sigma_tau_isotopic_to_id: bool
    generators: tuple[str, ...]

    def to_json(self):
        return {"sigma_defined": self.sigma_defined,
                "sigma_isotopic_to_id": self.sigma_isotopic_to_id,
                "sigma_tau_isotopic_to_id": self.sigma_tau_isotopic_to_id,
                "generators": list(self.generators)}


def mcg(L: LensSpace) -> MCGReport:
    """Flags for the generators tau (conjugation) and sigma (coordinate swap)."""
    p, q = L.p, L.q
    if p == 1:
        return MCGReport(True, True, True, ("tau",))
    defined = (q * q - 1) % p == 0
    iso_id = (q - 1) % p == 0
    iso_tau = (q + 1) % p == 0
    gens = ("tau",) if (not defined or iso_id or iso_tau) else ("sigma", "tau")
    return MCGReport(defined, iso_id, iso_tau, gens)


@dataclass(frozen=True)
class MilnorLattice:
    label: str
    gram: tuple[tuple[int, ...], ...] | None
    torsion_canonical_two: bool = False

    @property
    def rank(self) -> int | None:
        return None if self.gram is None else len(self.gram)

    def to_json(self):
        return {"label": self.label, "rank": self.rank,
                "gram": None if self.gram is None else [list(r) for r in self.gram],
                "torsion_canonical_two": self.torsion_canonical_two}


def _tree_gram(selfint: Sequence[int], edges) -> tuple[tuple[int, ...], ...]:
    k = len(selfint)
    g = [[0] * k for _ in range(k)]
    for i, e in enumerate(selfint):
        g[i][i] = e
    for i, j in edges:
        g[i][j] = g[j][i] = 1
    return tuple(tuple(r) for r in g)


def _chain_gram(b: Sequence[int]):
    return _tree_gram([-x for x in b], [(i, i + 1) for i in range(len(b) - 1)])


_KIND = re.compile(r"^\s*([ADEBY])\s*\(?\s*(\d+)\s*\)?\s*(?:[:,]\s*(\w+))?\s*$", re.I)


def milnor_lattice(kind) -> MilnorLattice:
    """Lattice for "A(n)", "D(n)", "E(6|7|8)", "B(n)", "Y(n):artin" or "Y(n):qg".

    Y(n) is the type 1/(4n)(1,2n-1).
    """
    if isinstance(kind, tuple):
        letter, n, *tag = kind
        tag = tag[0] if tag else None
    else:
        m = _KIND.match(str(kind))
        if not m:
            raise ValueError(f"unknown lattice kind {kind!r}")
        letter, n, tag = m.group(1), int(m.group(2)), m.group(3)
    letter = letter.upper()
    n = int(n)
    if n < 1:
        raise ValueError("index must be positive")
    if letter == "A":
        return MilnorLattice(f"A({n})", _chain_gram([2] * n))
    if letter == "D":
        if n < 3:
            raise ValueError("D(n) needs n >= 3")
        edges = [(i, i + 1) for i in range(n - 2)] + [(n - 1, n - 3)]
        return MilnorLattice(f"D({n})", _tree_gram([-2] * n, edges))
    if letter == "E":
        if n not in (6, 7, 8):
            raise ValueError("E(n) needs n in 6, 7, 8")
        edges = [(i, i + 1) for i in range(n - 2)] + [(n - 1, 2)]
        return MilnorLattice(f"E({n})", _tree_gram([-2] * n, edges))
    if letter == "B":
        return MilnorLattice(f"B({n})", _chain_gram(b_family(n)[1].b))
    if letter == "Y":
        tag = (tag or "artin").lower()
        if tag == "artin":
            return MilnorLattice(f"Y({n}):artin", _chain_gram(y_family_by_type(n)[1].b))
        if tag == "qg":
            return MilnorLattice(f"Y({n}):qg", None, True)
        raise ValueError(f"unknown Y component {tag!r}")
    raise ValueError(f"unknown lattice kind {kind!r}")


class AmbientModel(Enum):
    PLANE_C2 = "plane-c2"
    BLOWUP_C2 = "blowup-c2"
    BLOWUP_CXP1_TWO_POINTS = "blowup-cxp1-two-points"

    @property
    def gram(self) -> tuple[tuple[int, ...], ...]:
        return {
            "plane-c2": (),
            "blowup-c2": ((-1,),),
            "blowup-cxp1-two-points": ((0, 0, 0), (0, -1, 0), (0, 0, -1)),
        }[self.value]

    @property
    def degenerate_dims(self) -> int:
        """Leading coordinates pairing to zero with everything."""
        return 1 if self is AmbientModel.BLOWUP_CXP1_TWO_POINTS else 0

    @property
    def definite_dims(self) -> int:
        return len(self.gram) - self.degenerate_dims


class SearchBoundError(RuntimeError):
    pass


@dataclass(frozen=True)
class EmbeddingResult:
    embeds: bool
    witness: tuple[tuple[int, ...], ...] | None
    certificate: dict

    def __bool__(self):
        return self.embeds

    def to_json(self):
        return {"embeds": self.embeds,
                "witness": None if self.witness is None else [list(w) for w in self.witness],
                "certificate": self.certificate}


def _pair(gram, u, v) -> int:
    return sum(gram[i][j] * u[i] * v[j] for i in range(len(u)) for j in range(len(v)))


def embeds(source: MilnorLattice, ambient: AmbientModel, box_limit: int = 1 << 20) -> EmbeddingResult:
    """Search for images of the source basis realizing its Gram matrix."""
    if source.torsion_canonical_two:
        return EmbeddingResult(False, None, {"rule": "torsion",
                                             "reason": "2-torsion canonical class cannot restrict "
                                                       "from a torsion-free ambient"})
    G = source.gram
    k = len(G)
    m = ambient.definite_dims
    # definite coordinates carry the form -sum x_i y_i; norms bound each entry
    bound = isqrt(max(abs(G[i][i]) for i in range(k))) if k else 0
    per_vector = (2 * bound + 1) ** m
    if per_vector > box_limit:
        raise SearchBoundError(f"box of {per_vector} candidates exceeds limit {box_limit}")
    values = [0] + [x for v in range(1, bound + 1) for x in (v, -v)]
    cands = list(product(values, repeat=m))
    by_norm: dict[int, list] = {}
    for c in cands:
        by_norm.setdefault(-sum(x * x for x in c), []).append(c)

    def ip(u, v):
        return -sum(x * y for x, y in zip(u, v))

    nodes = 0
    chosen: list[tuple[int, ...]] = []

    def search(i):
        nonlocal nodes
        if i == k:
            return True
        for c in by_norm.get(G[i][i], []):
            nodes += 1
            if all(ip(c, chosen[j]) == G[i][j] for j in range(i)):
                chosen.append(c)
                if search(i + 1):
                    return True
                chosen.pop()
        return False

    found = search(0)
    cert = {"rule": "search", "definite_dims": m, "degenerate_dims": ambient.degenerate_dims,
            "box_bound": bound, "candidates_per_vector": per_vector, "nodes": nodes}
    if not found:
        return EmbeddingResult(False, None, cert)
    pad = (0,) * ambient.degenerate_dims
    witness = tuple(pad + c for c in chosen)
    amb = ambient.gram
    for i in range(k):
        for j in range(k):
            if _pair(amb, witness[i], witness[j]) != G[i][j]:
                raise AssertionError("witness does not reproduce the Gram matrix")
    return EmbeddingResult(True, witness, cert)


def lemma_verdicts(max_n: int = 6) -> dict:
    """Run the three obstruction lemmas; every expected verdict is negative."""
    cases = []
    blow = AmbientModel.BLOWUP_C2
    for n in range(1, max_n + 1):
        cases.append(("rdp-in-blowup", f"A({n})", blow))
    for n in range(4, max_n + 1):
        cases.append(("rdp-in-blowup", f"D({n})", blow))
    for n in (6, 7, 8):
        cases.append(("rdp-in-blowup", f"E({n})", blow))
    for n in range(1, max_n + 1):
        cases.append(("rdp-in-blowup", f"B({n})", blow))
    for n in range(1, max_n + 1):
        cases.append(("y-in-plane", f"Y({n}):artin", AmbientModel.PLANE_C2))
        cases.append(("y-in-plane", f"Y({n}):qg", AmbientModel.PLANE_C2))
    for n in range(2, max_n + 1):
        cases.append(("a-in-two-point-blowup", f"A({n})", AmbientModel.BLOWUP_CXP1_TWO_POINTS))
    rows = []
    for lemma, kind, amb in cases:
        res = embeds(milnor_lattice(kind), amb)
        rows.append({"lemma": lemma, "source": kind, "ambient": amb.value,
                     "expected": False, "embeds": res.embeds, "agrees": not res.embeds,
                     "certificate": res.certificate})
    control = embeds(milnor_lattice("A(1)"), AmbientModel.BLOWUP_CXP1_TWO_POINTS)
    return {"max_n": max_n, "rows": rows,
            "all_agree": all(r["agrees"] for r in rows) and control.embeds,
            "control": {"source": "A(1)", "ambient": AmbientModel.BLOWUP_CXP1_TWO_POINTS.value,
                        **control.to_json()}}

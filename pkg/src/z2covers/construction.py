"""The product construction: assemble G, place branch divisors, certify.

G is a sum of per-factor blocks (alpha1, alpha2, eps_1..eps_n), the four
ruling directions (tau1, tau2, eta1, eta2) and one extra direction zeta.
Off the hyperplane zeta* = 0 every branch class is a multiple of a fixed
comb-ample class, with parity corrections so that L can be solved.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Sequence

from .cover_data import (
    SCHEMA_VERSION,
    BuildingData,
    check_ample_differences,
    check_cor314,
    hyperplane_extension,
    invariants,
    verify_all,
)
from .divisor_lattice import DivClass, comb_ample_margin, is_comb_ample
from .f2_groups import GroupF2, int_to_bits, parity

__all__ = [
    "FactorParams",
    "ConstructionInput",
    "Certificate",
    "CertificationError",
    "build_group",
    "assign_branch_divisors",
    "base_class",
    "certify",
    "brill_noether_split",
    "n_of",
    "moduli_dim",
    "h1_theta",
    "curve_genus",
    "h0_curve",
    "canonical_json",
]

EXHAUSTIVE_PAIR_RANK = 12
EXHAUSTIVE_RANK = 20


class CertificationError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# moduli bookkeeping on the quadric


def brill_noether_split(a: int, b: int, n: int) -> list[tuple[int, int]]:
    """All (l, c) with b = l*a, n = l*a*(2a - c), 0 < 2c < a and l >= 2."""
    if a <= 0 or b % a:
        return []
    l = b // a
    if l < 2:
        return []
    out = []
    for c in range(1, (a + 1) // 2):
        if 2 * c < a and l * a * (2 * a - c) == n:
            out.append((l, c))
    return out


def n_of(a: int, b: int, c: int) -> int:
    """Number of base points H.L = b(2a - c) for L = (a - c, b)."""
    return b * (2 * a - c)


def _check_split(a, b, c):
    if not 0 < 2 * c < a:
        raise ValueError(f"need 0 < 2c < a, got a={a}, c={c}")
    if b < 1:
        raise ValueError("b must be positive")


def moduli_dim(a: int, b: int, c: int, k: int, n: int) -> int:
    """Dimension of the space of k curves through n points cut by (a - c, b)."""
    _check_split(a, b, c)
    if k < 1:
        raise ValueError("k >= 1")
    if n != n_of(a, b, c):
        raise ValueError(f"n must be b(2a - c) = {n_of(a, b, c)}, got {n}")
    return n + 2 * (a + b) - 1 + (k - 1) * (c + 1)


def h1_theta(n: int, a: int | None = None, b: int | None = None) -> int:
    """h^1 of the tangent sheaf of the blown-up quadric; needs n > max(2a, 2b)."""
    if a is not None and b is not None and not n > max(2 * a, 2 * b):
        raise ValueError(f"need n > max(2a, 2b) = {max(2 * a, 2 * b)}")
    if n < 3:
        raise ValueError("need at least three points")
    return 2 * n - 6


def curve_genus(a: int, b: int) -> int:
    return (a - 1) * (b - 1)


def h0_curve(a: int, b: int, c: int) -> int:
    """h^0(C, L) = L.C + 1 - g(C) for C of bidegree (a, b) and L = (a - c, b)."""
    _check_split(a, b, c)
    return b * (a - c) + a + b


# ---------------------------------------------------------------------------
# inputs


@dataclass(frozen=True)
class FactorParams:
    a: int
    b: int
    n: int
    bn_split: tuple[int, int] | None = None

    def __post_init__(self):
        if self.a < 3 or self.b < 3:
            raise ValueError(f"need a, b >= 3, got ({self.a}, {self.b})")
        if self.a == self.b:
            raise ValueError("need a != b")
        if not 0 <= self.n <= 2 * self.a * self.b:
            raise ValueError(f"need 0 <= n <= 2ab = {2 * self.a * self.b}, got {self.n}")
        if self.bn_split is not None:
            l, c = self.bn_split
            if (l, c) not in brill_noether_split(self.a, self.b, self.n):
                raise ValueError(f"({l}, {c}) is not a split for {self.a, self.b, self.n}")

    def detected_split(self) -> tuple[int, int] | None:
        if self.bn_split is not None:
            return tuple(self.bn_split)
        found = brill_noether_split(self.a, self.b, self.n)
        return found[0] if found else None

    def to_json(self):
        return {"a": self.a, "b": self.b, "n": self.n,
                "bn_split": None if self.bn_split is None else list(self.bn_split)}


@dataclass(frozen=True)
class ConstructionInput:
    k: int
    factors: tuple[FactorParams, ...]
    M: int = 1
    mode: str = "bounded"
    seed: int = 0
    m_cap: int = 64

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if self.k != len(self.factors) or self.k < 1:
            raise ValueError(f"k = {self.k} but {len(self.factors)} factors given")
        ns = [f.n for f in self.factors]
        if any(x >= y for x, y in zip(ns, ns[1:])):
            raise ValueError(f"factor sizes must increase strictly, got {ns}")
        if self.mode not in ("bounded", "exhaustive"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.M < 1 or self.m_cap < self.M:
            raise ValueError("need 1 <= M <= m_cap")

    def to_json(self):
        return {"k": self.k, "factors": [f.to_json() for f in self.factors], "M": self.M,
                "mode": self.mode, "seed": self.seed, "m_cap": self.m_cap}


# ---------------------------------------------------------------------------
# group and branch data


def build_group(factors: Sequence[FactorParams]) -> tuple[GroupF2, dict[str, int]]:
    """The group and a name -> element bitset map for the basis and alpha3."""
    names = []
    for i, f in enumerate(factors, 1):
        names += [f"alpha{i}_1", f"alpha{i}_2"] + [f"eps{i}_{j}" for j in range(1, f.n + 1)]
    names += ["tau1", "tau2", "eta1", "eta2", "zeta"]
    r = len(names)
    index = {nm: 1 << (r - 1 - j) for j, nm in enumerate(names)}
    for i in range(1, len(factors) + 1):
        index[f"alpha{i}_3"] = index[f"alpha{i}_1"] ^ index[f"alpha{i}_2"]
    return GroupF2(r), index


def base_class(n_total: int) -> DivClass:
    """(3n+1, 3n+1; 2, ..., 2): comb ample with unit slack."""
    R = 3 * n_total + 1
    return DivClass(R, R, (2,) * n_total)


def _blocks(factors):
    out, start = [], 0
    for f in factors:
        out.append(range(start, start + f.n))
        start += f.n
    return out, start


def _on_hyperplane(factors) -> tuple[dict[int, DivClass], dict[str, int], int]:
    _, index = build_group(factors)
    blocks, n = _blocks(factors)
    D: dict[int, DivClass] = {}
    for i, (f, blk) in enumerate(zip(factors, blocks), 1):
        a = tuple(1 if j in blk else 0 for j in range(n))
        curve = DivClass(f.a, f.b, a)
        for j in (1, 2, 3):
            D[index[f"alpha{i}_{j}"]] = curve
        for j, pos in enumerate(blk, 1):
            e = [0] * n
            e[pos] = -1
            D[index[f"eps{i}_{j}"]] = DivClass(0, 0, tuple(e))
    for nm in ("tau1", "tau2"):
        D[index[nm]] = DivClass(1, 0, (0,) * n)
    for nm in ("eta1", "eta2"):
        D[index[nm]] = DivClass(0, 1, (0,) * n)
    return D, index, n


def assign_branch_divisors(factors: Sequence[FactorParams], M: int) -> BuildingData:
    """Sparse D on G with L solved; the zeta coset carries M * base plus parity fixes."""
    if M < 1:
        raise ValueError("M >= 1")
    D, index, n = _on_hyperplane(factors)
    G, _ = build_group(factors)
    r = G.rank
    zeta = index["zeta"]
    psi = zeta  # the standard basis is self-dual, so zeta* has the same bitset
    basis = [1 << (r - 1 - j) for j in range(r)]
    data = hyperplane_extension(r, n, D, psi, zeta, base_class(n) * M, basis)
    if any(c.odd_coordinates() for c in (L * 2 for L in data.L_basis)):
        raise AssertionError("parity scheme failed")
    return data


# ---------------------------------------------------------------------------
# certification


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _digest(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()


@dataclass
class Certificate:
    input: ConstructionInput
    data: BuildingData
    M: int
    margin_history: list
    conditions: dict
    cover: dict
    sufficient: dict
    invariants: dict
    component_lower_bound: int | None
    factors: list
    index: dict
    passed: bool
    notes: list = field(default_factory=list)

    def to_json(self) -> dict:
        r = self.data.rank
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "z2covers/certificate",
            "input": self.input.to_json(),
            "group": {"rank": r,
                      "index": {k: list(int_to_bits(v, r)) for k, v in sorted(self.index.items())}},
            "M": self.M,
            "margin_history": self.margin_history,
            "building_data": self.data.to_json(),
            "building_data_sha256": _digest(self.data.to_json()),
            "conditions": self.conditions,
            "cover_verification": self.cover,
            "sufficient_conditions": self.sufficient,
            "invariants": self.invariants,
            "component_lower_bound": self.component_lower_bound,
            "factors": self.factors,
            "diffeo_statement": {
                "holds": True,
                "text": "all members of the family over the good locus are deformation "
                        "T-equivalent, so their smooth fibres are orientedly diffeomorphic",
            },
            "passed": self.passed,
            "notes": self.notes,
        }

    def dumps(self) -> str:
        return canonical_json(self.to_json())


def _condition_i(data, mode, cap):
    rep = check_ample_differences(data, mode, perp_only=False, nonzero_only=False,
                                  name="(i) L_chi - D_sigma, all chi != 0, all sigma", cap=cap,
                                  list_limit=256)
    return rep


def _condition_ii_iii(data, factors, index):
    """Hyperplane classes: curves on alpha, then exceptional, rulings and zero."""
    D, _, _ = _on_hyperplane(factors)
    zeta = index["zeta"]
    ii_bad, iii_bad = [], []
    ii_n = iii_n = 0
    for nm, s in sorted(index.items()):
        if nm == "zeta":
            continue
        ok = data.D_at(s) == D[s]
        if nm.startswith("alpha"):
            ii_n += 1
            ii_bad += [] if ok else [nm]
        else:
            iii_n += 1
            iii_bad += [] if ok else [nm]
    for s, c in data.entries:
        if not parity(zeta & s) and D.get(s) != c:
            iii_n += 1
            iii_bad.append(list(int_to_bits(s, data.rank)))
    ii = {"name": "(ii) curve classes on alpha", "checked": ii_n, "failures": ii_bad,
          "passed": not ii_bad}
    iii = {"name": "(iii) exceptional and ruling classes, zero elsewhere on the hyperplane",
           "checked": iii_n, "failures": iii_bad, "passed": not iii_bad}
    return ii, iii


def _condition_iv(data):
    """Every class on the zeta coset is comb ample."""
    zeta_psi = data.background.psi
    vals = {c for s, c in data.entries if parity(zeta_psi & s)}
    if data._background_count():
        vals.add(data.background.cls)
    entries = sorted(({"class": c.to_json(), "margin": comb_ample_margin(c), "ok": is_comb_ample(c)}
                      for c in vals), key=lambda e: (e["class"]["r"], e["class"]["s"], e["class"]["a"]))
    return {"name": "(iv) comb ample classes off the hyperplane", "checked": len(entries),
            "passed": all(e["ok"] for e in entries), "entries": entries,
            "min_margin": min(e["margin"] for e in entries)}


def certify(inp: ConstructionInput, rank_cap: int = 24) -> Certificate:
    """Build the data, escalate M until (i) and (iv) hold, then certify everything."""
    factors = inp.factors
    G, index = build_group(factors)
    r = G.rank
    if inp.mode == "exhaustive" and r > min(EXHAUSTIVE_RANK, rank_cap):
        raise CertificationError(f"exhaustive mode needs rank <= {min(EXHAUSTIVE_RANK, rank_cap)}, got {r}")
    history = []
    M = inp.M
    while True:
        data = assign_branch_divisors(factors, M)
        cond_i = _condition_i(data, inp.mode, rank_cap)
        cond_iv = _condition_iv(data)
        history.append({"M": M, "i_min_margin": cond_i.min_margin, "iv_min_margin": cond_iv["min_margin"],
                        "passed": cond_i.passed and cond_iv["passed"]})
        if len(history) > 1:
            prev = history[-2]
            if prev["passed"] and not history[-1]["passed"]:
                raise AssertionError("raising M broke a passing obligation")
        if cond_i.passed and cond_iv["passed"]:
            break
        if M >= inp.m_cap:
            raise CertificationError(f"no M <= {inp.m_cap} makes condition (i) hold")
        M += 1
    ii, iii = _condition_ii_iii(data, factors, index)
    if r <= EXHAUSTIVE_PAIR_RANK:
        cover = verify_all(data, "exhaustive").to_json(r)
    else:
        bounded = verify_all(data, "bounded").to_json(r)
        sampled = verify_all(data, "sampled", seed=inp.seed, samples=64).to_json(r)
        cover = {"mode": "bounded+sampled", "passed": bounded["passed"] and sampled["passed"],
                 "bounded": bounded, "sampled": sampled}
    cor = check_cor314(data, inp.mode, cap=rank_cap, list_limit=256)
    if cond_i.passed and not cor["passed"]:
        raise AssertionError("condition (i) holds but the sufficient conditions fail")
    inv = invariants(data).to_json()
    splits = [f.detected_split() for f in factors]
    bound = (1 << inp.k) if all(s is not None for s in splits) else None
    fac_out = []
    for f, s in zip(factors, splits):
        entry = {"a": f.a, "b": f.b, "n": f.n, "bn_split": None if s is None else list(s),
                 "curve_genus": curve_genus(f.a, f.b)}
        if s is not None:
            l, c = s
            entry.update({"h0_curve": h0_curve(f.a, f.b, c),
                          "moduli_dim": moduli_dim(f.a, f.b, c, 3, f.n),
                          "components_at_least": 2})
        if f.n > max(2 * f.a, 2 * f.b):
            entry["h1_theta"] = h1_theta(f.n, f.a, f.b)
        fac_out.append(entry)
    conditions = {"i": cond_i.to_json(), "ii": ii, "iii": iii, "iv": cond_iv}
    passed = (cond_i.passed and ii["passed"] and iii["passed"] and cond_iv["passed"]
              and cover["passed"] and cor["passed"])
    notes = []
    if bound is None:
        notes.append("some factor has no Brill-Noether split; no component bound")
    if inp.mode == "bounded":
        notes.append("bounded mode: interval bounds over all characters against every D value")
    return Certificate(inp, data, M, history, conditions, cover, cor, inv, bound, fac_out,
                       index, passed, notes)

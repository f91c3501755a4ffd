"""Building data (L, D) for flat (Z/2)^r covers of a blown-up quadric.

D is held as sparse entries plus an optional *background*: a fixed class
placed on every sigma with psi(sigma) = 1 for one character psi, unless a
sparse entry overrides it.  This keeps groups of rank far above the
enumeration cap representable, and every sum over a linear family of group
elements stays computable by counting solutions of F2 systems.

L is stored on the dual of a chosen basis only; ``L_of`` extends it by the
k-fold identity.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Mapping, Sequence

import numpy as np

from .divisor_lattice import (
    BlownQuadricLattice,
    DivClass,
    HalfClass,
    ParityError,
    canonical_class,
    intersect,
    rr_chi,
)
from .f2_groups import (
    DEFAULT_RANK_CAP,
    GCharacter,
    GroupF2,
    GVector,
    RankCapError,
    Subspace,
    count_solutions,
    dual_basis,
    int_to_bits,
    bits_to_int,
    parity,
    xor_rank,
)

__all__ = [
    "SCHEMA_VERSION",
    "ParityError",
    "InvariantMismatch",
    "Background",
    "BuildingData",
    "CoverReport",
    "Invariants",
    "ObligationReport",
    "solve_basis_L",
    "L_of",
    "verify_pair",
    "verify_all",
    "elementary_solution",
    "lift",
    "ample_extension",
    "minimal_extension_multiplier",
    "ramification_profile",
    "invariants",
    "check_cor314",
    "check_ample_differences",
    "L_table",
    "D_table",
    "character_bounds",
    "random_building_data",
    "hyperplane_extension",
]

SCHEMA_VERSION = 1
DEFAULT_PAIR_RANK_CAP = 12  # exhaustive pair checks walk 4^r pairs


class InvariantMismatch(AssertionError):
    pass


def _val(x) -> int:
    return x.value if isinstance(x, GVector) else int(x)


@dataclass(frozen=True)
class Background:
    """Class ``cls`` on every sigma with parity(psi & sigma) = 1."""

    psi: int
    cls: DivClass


@dataclass(frozen=True, eq=False)
class BuildingData:
    rank: int
    n: int
    entries: tuple[tuple[int, DivClass], ...]
    basis: tuple[int, ...]
    L_basis: tuple[DivClass, ...]
    background: Background | None = None
    duals: tuple[int, ...] = field(default=(), repr=False)

    def __post_init__(self):
        r = self.rank
        if len(self.basis) != r or xor_rank(self.basis) != r:
            raise ValueError("basis must have rank-many independent vectors")
        if len(self.L_basis) != r:
            raise ValueError("one L class per basis character required")
        if not self.duals:
            ds = dual_basis([GVector(r, b) for b in self.basis])
            object.__setattr__(self, "duals", tuple(d.value for d in ds))
        dmap = {}
        for s, c in self.entries:
            if s == 0:
                if c:
                    raise ValueError("D_0 must vanish")
                continue
            if c.n != self.n:
                raise ValueError("lattice size mismatch in D")
            dmap[s] = c
        if self.background is not None:
            if self.background.psi == 0 or self.background.cls.n != self.n:
                raise ValueError("bad background")
        for c in self.L_basis:
            if c.n != self.n:
                raise ValueError("lattice size mismatch in L")
        object.__setattr__(self, "entries", tuple(sorted(dmap.items())))
        object.__setattr__(self, "_dmap", dmap)

    # -- basic accessors ---------------------------------------------------
    @property
    def group(self) -> GroupF2:
        return GroupF2(self.rank)

    @property
    def lattice(self) -> BlownQuadricLattice:
        return BlownQuadricLattice(self.n)

    @property
    def D(self) -> Mapping[int, DivClass]:
        """Explicit entries (background not expanded)."""
        return self._dmap

    def zero(self) -> DivClass:
        return DivClass.zero(self.n)

    def D_at(self, sigma) -> DivClass:
        s = _val(sigma)
        if s in self._dmap:
            return self._dmap[s]
        bg = self.background
        if bg is not None and parity(bg.psi & s):
            return bg.cls
        return self.zero()

    def deltas(self) -> list[tuple[int, DivClass]]:
        """Entries minus what the background would put there."""
        bg = self.background
        out = []
        for s, c in self.entries:
            if bg is not None and parity(bg.psi & s):
                out.append((s, c - bg.cls))
            else:
                out.append((s, c))
        return out

    def with_L(self, L_basis: Sequence[DivClass]) -> "BuildingData":
        return BuildingData(self.rank, self.n, self.entries, self.basis, tuple(L_basis),
                            self.background, self.duals)

    def support_values(self) -> list[DivClass]:
        """Distinct D values over the whole group (zero included)."""
        vals = {c for _, c in self.entries}
        vals.add(self.zero())
        if self.background is not None:
            # the background reaches some sigma unless overrides cover its coset
            if self._background_count() > 0:
                vals.add(self.background.cls)
        return sorted(vals, key=lambda c: c.coords())

    def _background_count(self) -> int:
        bg = self.background
        if bg is None:
            return 0
        total = 1 << (self.rank - 1)
        return total - sum(1 for s in self._dmap if parity(bg.psi & s))

    # -- structured sums ---------------------------------------------------
    def sum_D_where(self, functionals: Sequence[int], rhs: Sequence[int]) -> DivClass:
        """Sum of D_sigma over sigma with parity(f_i & sigma) = rhs_i."""
        total = self.zero()
        for s, c in self.entries:
            if all(parity(f & s) == b for f, b in zip(functionals, rhs)):
                total = total + c
        bg = self.background
        if bg is not None:
            cnt = count_solutions(list(functionals) + [bg.psi], list(rhs) + [1], self.rank)
            cnt -= sum(1 for s in self._dmap
                       if parity(bg.psi & s)
                       and all(parity(f & s) == b for f, b in zip(functionals, rhs)))
            total = total + bg.cls * cnt
        return total

    def total_D(self) -> DivClass:
        return self.sum_D_where([], [])

    # -- algebra -------------------------------------------------------------
    def __add__(self, other: "BuildingData") -> "BuildingData":
        if (self.rank, self.n, self.basis) != (other.rank, other.n, other.basis):
            raise ValueError("sum needs equal rank, lattice and basis")
        bg = self.background or other.background
        if self.background and other.background:
            if self.background.psi != other.background.psi:
                raise ValueError("backgrounds on different hyperplanes")
            bg = Background(self.background.psi, self.background.cls + other.background.cls)
        keys = set(self._dmap) | set(other._dmap)
        entries = tuple((s, self.D_at(s) + other.D_at(s)) for s in sorted(keys))
        L = tuple(x + y for x, y in zip(self.L_basis, other.L_basis))
        return BuildingData(self.rank, self.n, entries, self.basis, L, bg, self.duals)

    def __eq__(self, other):
        if not isinstance(other, BuildingData):
            return NotImplemented
        return self.to_json() == other.to_json()

    __hash__ = None

    # -- serialization -------------------------------------------------------
    def to_json(self) -> dict:
        r = self.rank
        out = {
            "schema_version": SCHEMA_VERSION,
            "group_rank": r,
            "lattice_n": self.n,
            "basis": [list(int_to_bits(b, r)) for b in self.basis],
            "D": [{"sigma": list(int_to_bits(s, r)), "class": c.to_json()} for s, c in self.entries],
            "L_basis": [{"chi": list(int_to_bits(x, r)), "class": c.to_json()}
                        for x, c in zip(self.duals, self.L_basis)],
        }
        if self.background is not None:
            out["D_background"] = {"psi": list(int_to_bits(self.background.psi, r)),
                                   "class": self.background.cls.to_json()}
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "BuildingData":
        r = int(obj["group_rank"])
        basis = tuple(bits_to_int(b) for b in obj["basis"])
        entries = tuple((bits_to_int(e["sigma"]), DivClass.from_json(e["class"])) for e in obj["D"])
        n = int(obj.get("lattice_n", entries[0][1].n if entries else 0))
        bg = None
        if obj.get("D_background"):
            b = obj["D_background"]
            bg = Background(bits_to_int(b["psi"]), DivClass.from_json(b["class"]))
        duals = tuple(d.value for d in dual_basis([GVector(r, b) for b in basis]))
        given = {bits_to_int(e["chi"]): DivClass.from_json(e["class"]) for e in obj["L_basis"]}
        if set(given) != set(duals):
            raise ValueError("L_basis characters must be the dual basis")
        return cls(r, n, entries, basis, tuple(given[d] for d in duals), bg, duals)

    @classmethod
    def from_branch(cls, rank: int, n: int, D: Mapping, basis: Sequence | None = None,
                    background: Background | None = None) -> "BuildingData":
        """Solve the basis equations for L and package the data."""
        basis_vals = tuple(_val(b) for b in basis) if basis is not None else \
            tuple(1 << (rank - 1 - j) for j in range(rank))
        entries = tuple((_val(s), c) for s, c in D.items())
        shell = cls(rank, n, entries, basis_vals, (DivClass.zero(n),) * rank, background)
        return shell.with_L(_solve(shell))


def _solve(data: BuildingData) -> list[DivClass]:
    out = []
    for chi in data.duals:
        twice = data.sum_D_where([chi], [1])
        odd = twice.odd_coordinates()
        if odd:
            raise ParityError(
                f"basis sum for character {int_to_bits(chi, data.rank)} has odd coordinates {odd}",
                where=int_to_bits(chi, data.rank), odd_coordinates=odd)
        out.append(twice.halve())
    return out


def solve_basis_L(D: Mapping, basis: Sequence, n: int | None = None,
                  background: Background | None = None) -> dict[GCharacter, DivClass]:
    """L on the dual basis from 2 L_i = sum over chi_i(sigma) = 1 of D_sigma."""
    basis = list(basis)
    if not basis:
        return {}
    rank = basis[0].rank if isinstance(basis[0], GVector) else None
    if rank is None:
        raise ValueError("basis must be GVector instances")
    if n is None:
        vals = list(D.values()) + ([background.cls] if background else [])
        if not vals:
            raise ValueError("lattice size needed for empty D")
        n = vals[0].n
    data = BuildingData.from_branch(rank, n, D, basis, background)
    return {GCharacter(rank, d): c for d, c in zip(data.duals, data.L_basis)}


# ---------------------------------------------------------------------------
# the k-fold closed form


@lru_cache(maxsize=None)
def _background_weight(x: int, y: int, z: int, w: int) -> int:
    """Sum of floor(|c & S| / 2) over c with |c & P| odd.

    x = |S & P|, y = |S - P|, z = |P - S|, w = the remaining coordinates.
    """
    if z > 0:
        # parity of the P-S part is free, so exactly half the choices count
        inner = sum(comb(x + y, m) * (m // 2) for m in range(x + y + 1))
        return inner << (w + z - 1)
    tot = 0
    for i in range(1, x + 1, 2):
        ci = comb(x, i)
        for j in range(y + 1):
            tot += ci * comb(y, j) * ((i + j) // 2)
    return tot << w


def _coords_in(data: BuildingData, sigma: int) -> int:
    """Bit j set iff chi_j(sigma) = 1, i.e. sigma's j-th basis coordinate."""
    c = 0
    for j, d in enumerate(data.duals):
        if parity(d & sigma):
            c |= 1 << j
    return c


def _selection(data: BuildingData, chi: int) -> int:
    """Bit j set iff chi(sigma_j) = 1, i.e. chi's j-th dual coordinate."""
    S = 0
    for j, b in enumerate(data.basis):
        if parity(chi & b):
            S |= 1 << j
    return S


def _prepared(data: BuildingData) -> list[tuple[int, tuple[int, ...]]]:
    """(basis coordinates, delta coords) per entry, cached on the instance."""
    prep = data.__dict__.get("_prep")
    if prep is None:
        prep = [(_coords_in(data, s), d.coords()) for s, d in data.deltas()]
        object.__setattr__(data, "_prep", prep)
    return prep


def L_of(data: BuildingData, chi) -> DivClass:
    x = _val(chi)
    if x == 0:
        return data.zero()
    S = _selection(data, x)
    out = [0] * (data.n + 2)
    for j in range(data.rank):
        if (S >> j) & 1:
            for k, v in enumerate(data.L_basis[j].coords()):
                out[k] += v
    for cs, delta in _prepared(data):
        w = (cs & S).bit_count() // 2
        if w:
            for k, v in enumerate(delta):
                out[k] -= w * v
    bg = data.background
    if bg is not None:
        P = _selection(data, bg.psi)
        xs = (S & P).bit_count()
        ys = (S & ~P).bit_count()
        zs = (P & ~S).bit_count()
        w = _background_weight(xs, ys, zs, data.rank - xs - ys - zs)
        if w:
            for k, v in enumerate(bg.cls.coords()):
                out[k] -= w * v
    return DivClass.from_coords(out)


def verify_pair(data: BuildingData, chi, eta) -> DivClass:
    x, y = _val(chi), _val(eta)
    div_beta = data.sum_D_where([x, y], [1, 1])
    return L_of(data, x) + L_of(data, y) - L_of(data, x ^ y) - div_beta


# ---------------------------------------------------------------------------
# vectorized tables for exhaustive work


def _popcount(a: np.ndarray) -> np.ndarray:
    return np.bitwise_count(a).astype(np.int64)


def _coord_matrix(classes: Sequence[DivClass], width: int) -> np.ndarray:
    if not classes:
        return np.zeros((0, width), dtype=np.int64)
    return np.array([c.coords() for c in classes], dtype=np.int64)


def _magnitude_guard(data: BuildingData):
    # table entries are sums of at most r basis classes plus at most
    # 2^r copies of each D value; keep a factor 16 for the transforms
    mL = max([abs(x) for c in data.L_basis for x in c.coords()] + [1])
    mD = max([abs(x) for _, c in data.entries for x in c.coords()] +
             ([abs(x) for x in data.background.cls.coords()] if data.background else []) + [1])
    terms = len(data.entries) + 2
    if 16 * (data.rank * mL + (1 << data.rank) * mD * terms) >= 1 << 62:
        raise OverflowError("coordinates too large for the int64 tables; use bounded mode")


def L_table(data: BuildingData, cap: int = DEFAULT_RANK_CAP) -> np.ndarray:
    """L_of on every character, rows indexed by the character's bitset."""
    data.group.check_cap(cap)
    cached = data.__dict__.get("_L_table")
    if cached is not None:
        return cached
    _magnitude_guard(data)
    r, dim = data.rank, data.n + 2
    chars = np.arange(1 << r, dtype=np.int64)
    S = np.zeros(1 << r, dtype=np.int64)
    for j, b in enumerate(data.basis):
        S |= (_popcount(chars & b) & 1) << j
    sel = ((S[:, None] >> np.arange(r)) & 1).astype(np.int64)
    out = sel @ _coord_matrix(data.L_basis, dim)
    dl = data.deltas()
    if dl:
        cs = np.array([_coords_in(data, s) for s, _ in dl], dtype=np.int64)
        w = _popcount(S[:, None] & cs[None, :]) // 2
        out -= w @ _coord_matrix([d for _, d in dl], dim)
    bg = data.background
    if bg is not None:
        P = _selection(data, bg.psi)
        xs = _popcount(S & P)
        ys = _popcount(S & ~np.int64(P))
        zs = P.bit_count() - xs
        table = {}
        for key in set(zip(xs.tolist(), ys.tolist(), zs.tolist())):
            table[key] = _background_weight(*key, r - sum(key))
        wv = np.array([table[k] for k in zip(xs.tolist(), ys.tolist(), zs.tolist())], dtype=np.int64)
        out -= wv[:, None] * np.array(bg.cls.coords(), dtype=np.int64)[None, :]
    out.flags.writeable = False
    object.__setattr__(data, "_L_table", out)
    return out


def D_table(data: BuildingData, cap: int = DEFAULT_RANK_CAP) -> np.ndarray:
    data.group.check_cap(cap)
    _magnitude_guard(data)
    r, dim = data.rank, data.n + 2
    out = np.zeros((1 << r, dim), dtype=np.int64)
    bg = data.background
    if bg is not None:
        mask = (_popcount(np.arange(1 << r, dtype=np.int64) & bg.psi) & 1).astype(bool)
        out[mask] = np.array(bg.cls.coords(), dtype=np.int64)
    for s, c in data.entries:
        out[s] = c.coords()
    return out


def _walsh(table: np.ndarray) -> np.ndarray:
    """H[chi] = sum over sigma of (-1)^{chi(sigma)} table[sigma]."""
    h = table.copy()
    size = h.shape[0]
    step = 1
    while step < size:
        h = h.reshape(-1, 2, step, h.shape[-1])
        a = h[:, 0].copy()
        b = h[:, 1].copy()
        h[:, 0] = a + b
        h[:, 1] = a - b
        h = h.reshape(size, -1)
        step <<= 1
    return h


# ---------------------------------------------------------------------------
# verification


@dataclass
class CoverReport:
    mode: str
    checked: int
    failures: list = field(default_factory=list)
    failure_count: int = 0
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.failure_count == 0

    def to_json(self, rank: int) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "mode": self.mode,
            "checked_pairs": self.checked,
            "passed": self.passed,
            "failure_count": self.failure_count,
            "failures": [{"chi": list(int_to_bits(x, rank)), "eta": list(int_to_bits(y, rank)),
                          "defect": d.to_json()} for x, y, d in self.failures],
            "note": self.note,
        }


def verify_all(data: BuildingData, mode: str = "exhaustive", *, seed: int = 0,
               samples: int = 256, cap: int = DEFAULT_RANK_CAP,
               pair_cap: int = DEFAULT_PAIR_RANK_CAP, max_failures: int = 100) -> CoverReport:
    if mode == "exhaustive":
        if data.rank > min(cap, pair_cap):
            raise RankCapError(f"exhaustive pair check needs rank <= {min(cap, pair_cap)}")
        return _verify_exhaustive(data, max_failures)
    if mode == "sampled":
        return _verify_sampled(data, seed, samples, max_failures)
    if mode == "bounded":
        return _verify_bounded(data)
    raise ValueError(f"unknown mode {mode!r}")


def _verify_exhaustive(data: BuildingData, max_failures: int) -> CoverReport:
    r = data.rank
    size = 1 << r
    L = L_table(data)
    D = D_table(data)
    H = _walsh(D)
    T = D.sum(axis=0)
    etas = np.arange(size, dtype=np.int64)
    failures, count = [], 0
    for chi in range(size):
        xe = chi ^ etas
        # 4 [chi=1][eta=1] = 1 - (-1)^chi - (-1)^eta + (-1)^(chi+eta), summed against D
        four_beta = T[None, :] - H[chi][None, :] - H + H[xe]
        four_defect = 4 * (L[chi][None, :] + L - L[xe]) - four_beta
        bad = np.nonzero(four_defect.any(axis=1))[0]
        count += len(bad)
        for eta in bad[: max(0, max_failures - len(failures))]:
            failures.append((chi, int(eta), DivClass.from_coords((four_defect[eta] // 4).tolist())))
    return CoverReport("exhaustive", size * size, failures, count)


def _verify_sampled(data: BuildingData, seed: int, samples: int, max_failures: int) -> CoverReport:
    r = data.rank
    rng = random.Random(seed)
    pairs = [(a, b) for i, a in enumerate(data.duals) for b in data.duals[i:]]
    pairs += [(rng.getrandbits(r) if r else 0, rng.getrandbits(r) if r else 0) for _ in range(samples)]
    failures, count = [], 0
    for chi, eta in pairs:
        d = verify_pair(data, chi, eta)
        if d:
            count += 1
            if len(failures) < max_failures:
                failures.append((chi, eta, d))
    failures.sort(key=lambda t: (t[0], t[1]))
    return CoverReport("sampled", len(pairs), failures, count,
                       note=f"seed={seed}; all basis pairs plus {samples} random pairs")


def _verify_bounded(data: BuildingData) -> CoverReport:
    # L_of is the unique extension of L_basis; it satisfies every pair
    # condition exactly when the basis equations hold.
    failures = []
    for chi, L in zip(data.duals, data.L_basis):
        d = L * 2 - data.sum_D_where([chi], [1])
        if d:
            failures.append((chi, chi, d))
    return CoverReport("bounded", 1 << (2 * data.rank), failures, len(failures),
                       note="certified through the basis equations and unique extension")


# ---------------------------------------------------------------------------
# constructions


def elementary_solution(H: Subspace, v: DivClass, basis: Sequence[GVector] | None = None) -> BuildingData:
    if H.dim == 0:
        raise ValueError("elementary solutions need H != 0")
    r = H.rank
    if basis is None:
        basis = GroupF2(r).standard_basis()
    d = H.dim - 2
    dval, lval = (v * 2, v) if H.dim == 1 else (v, v * (1 << d))
    entries = tuple((e.value, dval) for e in H.elements() if e.value)
    basis_vals = tuple(b.value for b in basis)
    duals = tuple(x.value for x in dual_basis(list(basis)))
    perp = H.perp()
    L = tuple(v.__class__.zero(v.n) if perp.contains(x) else lval for x in duals)
    return BuildingData(r, v.n, entries, basis_vals, L, None, duals)


def lift(data: BuildingData, m: int, D_lift: Mapping) -> BuildingData:
    """Lift to the lattice with m appended exceptional coordinates."""
    if data.background is not None:
        raise ValueError("lift expects explicit (background-free) data")
    if m < 0:
        raise ValueError("m must be non-negative")
    lifted = {_val(s): c for s, c in D_lift.items()}
    for s in set(lifted) | set(data.D):
        c = lifted.get(s, DivClass.zero(data.n + m))
        if c.n != data.n + m:
            raise ValueError("lifted classes must live in the enlarged lattice")
        if c.project(data.n) != data.D_at(s):
            raise ValueError(f"D_lift does not project to D at {int_to_bits(s, data.rank)}")
    out = BuildingData.from_branch(data.rank, data.n + m, lifted, [GVector(data.rank, b) for b in data.basis])
    if tuple(c.project(data.n) for c in out.L_basis) != data.L_basis:
        raise AssertionError("lift does not project back to the input")
    return out


def _alpha(functional: Sequence[int], c: DivClass) -> int:
    return sum(f * x for f, x in zip(functional, c.coords()))


def _extension_pieces(rank, H, D_on_H, eta, v):
    """Coefficient tables (fixed part, per-q part) of the summed construction."""
    size = 1 << rank
    n = v.n
    zero = DivClass.zero(n)
    hvals = H.element_values()
    hset = set(hvals)
    D0 = [zero] * size
    D1 = [0] * size
    for tau in hvals:
        if tau == 0:
            continue
        Dt = D_on_H.get(tau, zero)
        for s in {tau, eta, tau ^ eta}:
            D0[s] = D0[s] + Dt
    for s in range(size):
        if s not in hset:
            D1[s] = 2
    L0 = [zero] * size
    L1 = [0] * size
    for chi in range(1, size):
        acc = zero
        for tau in hvals:
            if tau and (parity(chi & eta) or parity(chi & tau)):
                acc = acc + D_on_H.get(tau, zero)
        L0[chi] = acc
        L1[chi] = sum(1 for tau in range(size) if tau not in hset and parity(chi & tau))
    return D0, D1, L0, L1, hset


def _check_extension_inputs(G, H, D_on_H, eta, v, alpha):
    rank = G.rank if isinstance(G, GroupF2) else int(G)
    if rank < 4:
        raise ValueError("the construction needs dim G >= 4")
    if H.rank != rank or H.dim >= rank:
        raise ValueError("H must be a proper subspace of G")
    e = _val(eta)
    if H.contains(e):
        raise ValueError("eta must lie outside H")
    if not any(alpha):
        raise ValueError("alpha must be nonzero")
    if _alpha(alpha, v) <= 0:
        raise ValueError("alpha(v) must be positive")
    dh = {_val(s): c for s, c in D_on_H.items()}
    if dh.get(0):
        raise ValueError("D_on_H must vanish at 0")
    for s in dh:
        if not H.contains(s):
            raise ValueError("D_on_H has entries outside H")
    return rank, e, dh


def minimal_extension_multiplier(G, H: Subspace, D_on_H: Mapping, eta, v: DivClass,
                                 alpha: Sequence[int], N: int, q_cap: int = 1 << 16,
                                 cap: int = DEFAULT_RANK_CAP) -> int:
    rank, e, dh = _check_extension_inputs(G, H, D_on_H, eta, v, alpha)
    GroupF2(rank).check_cap(cap)
    D0, D1, L0, L1, hset = _extension_pieces(rank, H, dh, e, v)
    av = _alpha(alpha, v)
    aD0 = [_alpha(alpha, c) for c in D0]
    aL0 = [_alpha(alpha, c) for c in L0]
    size = 1 << rank
    for q in range(1, q_cap + 1):
        dvals = [aD0[s] + q * D1[s] * av for s in range(size)]
        lmin = min(aL0[x] + q * L1[x] * av for x in range(1, size))
        if lmin - max(dvals) < N:
            continue
        if any(dvals[s] < N for s in range(size) if s not in hset):
            continue
        return q
    raise ValueError(f"no q <= {q_cap} satisfies the bounds")


def ample_extension(G, H: Subspace, D_on_H: Mapping, eta, v: DivClass, alpha: Sequence[int],
                    N: int, q_cap: int = 1 << 16, cap: int = DEFAULT_RANK_CAP) -> BuildingData:
    """Extend D from H to G so that alpha(L_chi - D_sigma) and alpha(D_sigma off H) are >= N."""
    q = minimal_extension_multiplier(G, H, D_on_H, eta, v, alpha, N, q_cap, cap)
    rank, e, dh = _check_extension_inputs(G, H, D_on_H, eta, v, alpha)
    D0, D1, L0, L1, _ = _extension_pieces(rank, H, dh, e, v)
    entries = tuple((s, D0[s] + v * (q * D1[s])) for s in range(1, 1 << rank))
    basis = tuple(1 << (rank - 1 - j) for j in range(rank))
    L = tuple(L0[b] + v * (q * L1[b]) for b in basis)  # standard basis is self-dual
    return BuildingData(rank, v.n, entries, basis, L, None, basis)


def hyperplane_extension(rank: int, n: int, D_on_hyperplane: Mapping, psi: int, zeta: int,
                         base: DivClass, basis: Sequence[int] | None = None) -> BuildingData:
    """Put ``base`` on the coset psi = 1 and fix parities there.

    ``basis`` must be a basis of G whose only vector outside the hyperplane
    psi = 0 is ``zeta``.  For each other basis vector h whose basis sum is odd,
    the parity vector p_h is added at zeta + h, and the sum of all p_h at zeta;
    every basis equation then becomes even.
    """
    if not parity(psi & zeta):
        raise ValueError("zeta must lie off the hyperplane")
    if basis is None:
        basis = [1 << (rank - 1 - j) for j in range(rank)]
    basis = list(basis)
    if zeta not in basis or any(parity(psi & b) for b in basis if b != zeta):
        raise ValueError("basis must be hyperplane basis plus zeta")
    dh = {_val(s): c for s, c in D_on_hyperplane.items() if c}
    for s in dh:
        if parity(psi & s):
            raise ValueError("entries must lie on the hyperplane psi = 0")
    duals = [d.value for d in dual_basis([GVector(rank, b) for b in basis])]
    entries = dict(dh)
    total = DivClass.zero(n)
    for b, chi in zip(basis, duals):
        if b == zeta:
            continue
        # the background meets chi = 1 in 2^(r-2) points; odd only for rank 2
        s = base * count_solutions([chi, psi], [1, 1], rank)
        for sigma, c in dh.items():
            if parity(chi & sigma):
                s = s + c
        p = DivClass.from_coords([x % 2 for x in s.coords()])
        if p:
            entries[zeta ^ b] = base + p
            total = total + p
    entries[zeta] = base + total
    return BuildingData.from_branch(rank, n, entries, [GVector(rank, b) for b in basis],
                                    Background(psi, base))


# ---------------------------------------------------------------------------
# ramification and invariants


PROFILE_NOTES = (
    "flat (Z/2)^r covers of a smooth surface are Q-Gorenstein of index at most 2",
    "the cover is Gorenstein exactly where it is locally simple",
    "smoothness needs the D_sigma smooth and the local index sets independent; "
    "that is a pointwise condition and is not decided from classes",
)


def ramification_profile(data: BuildingData, cap: int = DEFAULT_RANK_CAP) -> dict:
    r = data.rank
    explicit = [s for s, c in data.entries if c]
    bg = data.background
    if bg is None:
        I = explicit
        size = len(I)
        span = xor_rank(I)
    else:
        zero_on = [s for s, c in data.entries if not c and parity(bg.psi & s)]
        on_coset = (1 << (r - 1)) - len(zero_on)
        size = on_coset + sum(1 for s in explicit if not parity(bg.psi & s))
        # a proper subspace meets the coset in at most 2^(r-2) points
        if r >= 2 and on_coset > (1 << (r - 2)):
            span = r
            I = None
        else:
            GroupF2(r).check_cap(cap)
            I = [s for s in range(1, 1 << r) if data.D_at(s)]
            span = xor_rank(I)
    if I is not None and r <= cap:
        I = sorted(I)
    total = span == r and r > 0
    simple = size == r and span == r and r > 0
    return {
        "I": [list(int_to_bits(s, r)) for s in I] if I is not None else None,
        "I_size": size,
        "span_rank": span,
        "totally_ramified": total,
        "simple": simple,
        "notes": list(PROFILE_NOTES),
    }


@dataclass(frozen=True)
class Invariants:
    K2: int
    chi: int
    routes: dict

    def to_json(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, "K2": self.K2, "chi": self.chi,
                "routes": {k: {kk: str(vv) for kk, vv in v.items()} for k, v in self.routes.items()}}


def _int_or_raise(x: Fraction, what: str) -> int:
    if x.denominator != 1:
        raise InvariantMismatch(f"{what} is not integral: {x}")
    return int(x)


def _atoms(data: BuildingData) -> list[tuple[int, DivClass]]:
    """(multiplicity, class) pairs covering every nonzero D_sigma once."""
    atoms = [(1, c) for _, c in data.entries if c]
    if data.background is not None:
        u = data._background_count()
        if u:
            atoms.append((u, data.background.cls))
    return atoms


def _K2_formula(data: BuildingData) -> Fraction:
    K = canonical_class(data.n)
    g = 1 << data.rank
    return g * (HalfClass.half(data.total_D()) + K).square()


def _K2_hurwitz(data: BuildingData) -> Fraction:
    # K_X = pi^*K + sum R_s; (pi^*A)(pi^*B) = gAB, R_s pi^*A = g D_s A / 2, R_s R_t = g D_s D_t / 4
    K = canonical_class(data.n)
    g = 1 << data.rank
    atoms = _atoms(data)
    pull = g * intersect(K, K)
    mixed = sum(Fraction(g * m * intersect(c, K), 2) for m, c in atoms)
    rr = sum(Fraction(g * m1 * m2 * intersect(c1, c2), 4) for m1, c1 in atoms for m2, c2 in atoms)
    return pull + 2 * mixed + rr


def _chi_structured(data: BuildingData) -> Fraction:
    # sum_chi L_chi^2 = 2^(r-4) (T^2 + Q), sum_chi L_chi.K = 2^(r-2) T.K
    r = data.rank
    K = canonical_class(data.n)
    T = data.total_D()
    Q = sum(m * intersect(c, c) for m, c in _atoms(data))
    g = 1 << r
    sq = Fraction(intersect(T, T) + Q) * Fraction(2) ** (r - 4)
    lk = Fraction(intersect(T, K)) * Fraction(2) ** (r - 2)
    return g + (sq + lk) / 2


def _chi_pair_counts(data: BuildingData) -> Fraction:
    # #{chi : chi(s) = chi(t) = 1} is 2^(r-1) on the diagonal and 2^(r-2) off it
    r = data.rank
    if r == 0:
        return Fraction(1)
    K = canonical_class(data.n)
    diag, off = Fraction(2) ** (r - 1), Fraction(2) ** (r - 2)
    atoms = _atoms(data)
    sq = Fraction(0)
    for i, (m1, c1) in enumerate(atoms):
        for j, (m2, c2) in enumerate(atoms):
            if i == j:
                pairs_off = m1 * (m1 - 1)
                sq += (diag * m1 + off * pairs_off) * intersect(c1, c1)
            else:
                sq += off * m1 * m2 * intersect(c1, c2)
    sq /= 4
    lk = sum(Fraction(m * intersect(c, K)) for m, c in atoms) * diag / 2
    total_rr = (1 << r) + (sq + lk) / 2  # sum over chi of rr_chi(-L_chi)
    return total_rr


def invariants(data: BuildingData, cap: int = 14) -> Invariants:
    """K^2 and chi of the cover, each by two independent routes."""
    g = 1 << data.rank
    K = canonical_class(data.n)
    k2_a = _K2_formula(data)
    k2_b = _K2_hurwitz(data)
    if data.rank <= cap:
        Ls = L_table(data, cap).tolist() if data.rank > 6 else None
        chi_sum = Fraction(0)
        rr_sum = 0
        for x in range(g):
            L = DivClass.from_coords(Ls[x]) if Ls is not None else L_of(data, x)
            chi_sum += intersect(L, L + K)
            rr_sum += rr_chi(-L)
        chi_a = g + chi_sum / 2
        chi_b = Fraction(rr_sum)
        routes = {"formula": {"K2": k2_a, "chi": chi_a},
                  "hurwitz_rr": {"K2": k2_b, "chi": chi_b}}
        chi_label = "exhaustive characters"
    else:
        chi_a = _chi_structured(data)
        chi_b = _chi_pair_counts(data)
        routes = {"formula": {"K2": k2_a, "chi": chi_a},
                  "hurwitz_rr": {"K2": k2_b, "chi": chi_b}}
        chi_label = "pair counts"
    if k2_a != k2_b or chi_a != chi_b:
        raise InvariantMismatch(f"dual-path mismatch: {routes}")
    routes["method"] = {"chi": chi_label}
    return Invariants(_int_or_raise(k2_a, "K2"), _int_or_raise(chi_a, "chi"), routes)


# ---------------------------------------------------------------------------
# ampleness obligations


def _ample_rows(X: np.ndarray) -> np.ndarray:
    a = X[:, 2:]
    bound = (a + 1).sum(axis=1)
    return (a >= 2).all(axis=1) & (X[:, 0] > bound) & (X[:, 1] > bound)


def _margin_rows(X: np.ndarray) -> np.ndarray:
    a = X[:, 2:]
    bound = (a + 1).sum(axis=1)
    cols = [X[:, 0] - bound, X[:, 1] - bound]
    if a.shape[1]:
        cols.append((a - 1).min(axis=1))
    return np.min(np.stack(cols, axis=1), axis=1)


@dataclass
class ObligationReport:
    name: str
    mode: str
    obligations: int
    failures: int
    entries: list = field(default_factory=list)
    min_margin: int | None = None
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def to_json(self) -> dict:
        return {"name": self.name, "mode": self.mode, "obligations": self.obligations,
                "failures": self.failures, "passed": self.passed, "min_margin": self.min_margin,
                "entries": self.entries, "note": self.note}


def character_bounds(data: BuildingData) -> tuple[DivClass | None, list[int], list[int]]:
    """Exact L at psi, plus coordinatewise bounds of L_chi over the other chi != 0.

    Valid for data satisfying the cover condition, where 2 L_chi is the sum
    of D_sigma over chi(sigma) = 1.
    """
    r, dim = data.rank, data.n + 2
    bg = data.background
    base = [0] * dim
    if bg is not None and r >= 2:
        base = [x << (r - 2) for x in bg.cls.coords()]
    lo2, hi2 = list(base), list(base)
    for _, d in data.deltas():
        for k, x in enumerate(d.coords()):
            if x < 0:
                lo2[k] += x
            else:
                hi2[k] += x
    lo = [-((-x) // 2) for x in lo2]
    hi = [x // 2 for x in hi2]
    exact = L_of(data, bg.psi) if bg is not None else None
    return exact, lo, hi


def _interval_margin(lo, hi, d) -> int:
    a_lo = [x - y for x, y in zip(lo[2:], d[2:])]
    a_hi = [x - y for x, y in zip(hi[2:], d[2:])]
    bound = sum(x + 1 for x in a_hi)
    slacks = [lo[0] - d[0] - bound, lo[1] - d[1] - bound] + [x - 1 for x in a_lo]
    return min(slacks)


def check_ample_differences(data: BuildingData, mode: str = "exhaustive", *,
                            perp_only: bool = False, nonzero_only: bool = False,
                            name: str = "L_chi - D_sigma", cap: int = DEFAULT_RANK_CAP,
                            list_limit: int = 4096, max_listed_failures: int = 50) -> ObligationReport:
    """Check L_chi - D_sigma comb ample for chi != 0 and sigma in the chosen family.

    Family: all sigma, or only sigma with D_sigma != 0, optionally only
    sigma in the kernel of chi.  When every slack is positive over all
    characters the reported margin is that global minimum, which bounds the
    kernel-restricted one from below.
    """
    r = data.rank
    values = [c for c in data.support_values() if not (nonzero_only and not c)]
    if mode == "bounded":
        exact, lo, hi = character_bounds(data)
        margins = []
        entries = []
        for c in values:
            m = _interval_margin(lo, hi, c.coords())
            if exact is not None:
                m = min(m, _interval_margin(exact.coords(), exact.coords(), c.coords()))
            margins.append(m)
            entries.append({"D_value": c.to_json(), "margin": m, "ok": m > 0})
        fails = sum(1 for m in margins if m <= 0)
        return ObligationReport(name, "bounded", len(values), fails, entries,
                                min(margins) if margins else None,
                                note="chi-family interval bounds against each distinct D value; "
                                     "kernel restriction relaxed to all sigma")
    if mode != "exhaustive":
        raise ValueError(f"unknown mode {mode!r}")
    data.group.check_cap(cap)
    L = L_table(data, cap)[1:]
    size = 1 << r
    groups = _value_groups(data, values, cap)
    prepared = []
    total_pairs = 0
    for c, members in groups:
        if perp_only:
            # members in ker(chi) = (|S| + sum_s (-1)^chi(s)) / 2
            ind = np.zeros((size, 1), dtype=np.int64)
            ind[members, 0] = 1
            counts = (len(members) + _walsh(ind)[1:, 0]) // 2
        else:
            counts = np.full(size - 1, len(members), dtype=np.int64)
        prepared.append((c, np.array(members, dtype=np.int64), counts))
        total_pairs += int(counts.sum())
    enumerate_all = total_pairs <= list_limit
    obligations = failures = 0
    listed, min_margin = [], None
    # the minimum over all characters of each slack splits into column minima
    n_a = data.n
    asum = L[:, 2:].sum(axis=1)
    min_r = int((L[:, 0] - asum).min()) - n_a
    min_s = int((L[:, 1] - asum).min()) - n_a
    colmin = L[:, 2:].min(axis=0).tolist() if n_a else []
    for c, members_arr, counts in prepared:
        cc = c.coords()
        ca = sum(cc[2:])
        slacks = [min_r - (cc[0] - ca), min_s - (cc[1] - ca)]
        slacks += [m - x - 1 for m, x in zip(colmin, cc[2:])]
        floor = min(slacks)
        obligations += int(counts.sum())
        live = counts > 0
        if floor > 0 and not enumerate_all:
            min_margin = floor if min_margin is None else min(min_margin, floor)
            continue
        X = L - np.array(cc, dtype=np.int64)[None, :]
        ok = _ample_rows(X)
        marg = _margin_rows(X)
        failures += int(counts[~ok].sum())
        if live.any():
            mm = int(marg[live].min())
            min_margin = mm if min_margin is None else min(min_margin, mm)
        if enumerate_all:
            rows = np.nonzero(live)[0]
        else:
            rows = np.nonzero(live & ~ok)[0][:max_listed_failures]
        for idx in rows.tolist():
            x = idx + 1
            if perp_only:
                ss = members_arr[(_popcount(members_arr & x) & 1) == 0]
            else:
                ss = members_arr
            for s in ss.tolist():
                if not enumerate_all and len(listed) >= max_listed_failures:
                    break
                listed.append({"chi": list(int_to_bits(x, r)), "sigma": list(int_to_bits(s, r)),
                               "ok": bool(ok[idx]), "margin": int(marg[idx])})
    listed.sort(key=lambda e: (e["chi"], e["sigma"]))
    return ObligationReport(name, "exhaustive", obligations, failures, listed, min_margin,
                            note="every obligation listed" if enumerate_all else "failures listed")


def _value_groups(data: BuildingData, values: list[DivClass], cap: int):
    """(value, members) for each wanted value, read off entries and background."""
    data.group.check_cap(cap)
    r = data.rank
    keys = sorted({c.coords() for c in values} | {data.zero().coords()})
    pos = {k: i for i, k in enumerate(keys)}
    zero_label = pos[data.zero().coords()]
    labels = np.full(1 << r, zero_label, dtype=np.int64)
    bg = data.background
    if bg is not None:
        mask = (_popcount(np.arange(1 << r, dtype=np.int64) & bg.psi) & 1).astype(bool)
        labels[mask] = pos.get(bg.cls.coords(), -1)
    for s, c in data.entries:
        labels[s] = pos.get(c.coords(), -1)
    wanted = {c.coords(): c for c in values}
    out = []
    for k in keys:
        if k in wanted:
            members = np.nonzero(labels == pos[k])[0]
            if len(members):
                out.append((wanted[k], members.tolist()))
    return out


def check_cor314(data: BuildingData, mode: str = "exhaustive", cap: int = DEFAULT_RANK_CAP,
                 list_limit: int = 4096) -> dict:
    """Sufficient conditions: L_chi comb ample, and L_chi - D_sigma comb ample on chi's kernel."""
    r = data.rank
    if mode == "exhaustive":
        data.group.check_cap(cap)
        L = L_table(data, cap)[1:] if r else np.zeros((0, data.n + 2), dtype=np.int64)
        ok = _ample_rows(L) if len(L) else np.zeros(0, dtype=bool)
        entries = []
        if len(L) <= list_limit:
            entries = [{"chi": list(int_to_bits(x + 1, r)), "ok": bool(v)} for x, v in enumerate(ok.tolist())]
        ii = ObligationReport("(ii) L_chi", "exhaustive", len(L), int((~ok).sum()), entries,
                              int(_margin_rows(L).min()) if len(L) else None)
    else:
        exact, lo, hi = character_bounds(data)
        zero = [0] * (data.n + 2)
        m = _interval_margin(lo, hi, zero)
        if exact is not None:
            m = min(m, _interval_margin(exact.coords(), exact.coords(), zero))
        ii = ObligationReport("(ii) L_chi", "bounded", 1, int(m <= 0),
                              [{"family": "chi != 0", "margin": m, "ok": m > 0}], m)
    iii = check_ample_differences(data, mode, perp_only=True, nonzero_only=True,
                                  name="(iii) L_chi - D_sigma", cap=cap, list_limit=list_limit)
    return {"schema_version": SCHEMA_VERSION, "mode": mode, "passed": ii.passed and iii.passed,
            "ii": ii.to_json(), "iii": iii.to_json()}


# ---------------------------------------------------------------------------
# random valid data


def random_building_data(rng: random.Random, rank: int, n: int, *, density: float = 0.6,
                         coeff: int = 4, basis: Sequence[int] | None = None) -> BuildingData:
    """Random D on G with parities fixed on the basis vectors, then L solved."""
    if basis is None:
        basis = [1 << (rank - 1 - j) for j in range(rank)]
    D = {}
    for s in range(1, 1 << rank):
        if rng.random() < density:
            D[s] = DivClass(rng.randint(-coeff, coeff), rng.randint(-coeff, coeff),
                            tuple(rng.randint(-coeff, coeff) for _ in range(n)))
    duals = [d.value for d in dual_basis([GVector(rank, b) for b in basis])]
    for b, chi in zip(basis, duals):
        # sigma_b is the only basis vector in chi_b's sum, so it can absorb the parity
        tot = DivClass.zero(n)
        for s, c in D.items():
            if parity(chi & s):
                tot = tot + c
        fix = DivClass.from_coords([x % 2 for x in tot.coords()])
        if fix:
            D[b] = D.get(b, DivClass.zero(n)) + fix
    return BuildingData.from_branch(rank, n, D, [GVector(rank, b) for b in basis])

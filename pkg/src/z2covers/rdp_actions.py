"""(Z/2)^r actions on rational double points: equations, involution forms,
the conjugacy class table and exact equivariance checks.

The class table ships as ``data/involutions.json``; ``consistency_check``
validates it against direct computation.
"""

from __future__ import annotations

import json
import re
from math import gcd
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Mapping, Sequence

from .quotient_sings import a_type, b_family, fundamental_cycle, hj, y_family_by_type

__all__ = [
    "PolySparse",
    "SignedMonomialMap",
    "ActionRecord",
    "VariableMismatch",
    "poly",
    "act",
    "is_invariant",
    "compose",
    "mu_weights",
    "weight_verdict",
    "rdp_equation",
    "forms",
    "table",
    "record",
    "consistency_check",
    "smoothing_family",
    "qg_family",
]

SCHEMA = "z2covers/involutions"


class VariableMismatch(ValueError):
    pass


@dataclass(frozen=True)
class PolySparse:
    """Integer polynomial as sorted (exponent vector, coefficient) pairs."""

    variables: tuple[str, ...]
    terms: tuple[tuple[tuple[int, ...], int], ...]

    @classmethod
    def from_dict(cls, variables: Sequence[str], coeffs: Mapping[tuple[int, ...], int]):
        variables = tuple(variables)
        acc: dict[tuple[int, ...], int] = {}
        for e, c in coeffs.items():
            e = tuple(int(x) for x in e)
            if len(e) != len(variables) or any(x < 0 for x in e):
                raise ValueError(f"bad exponent vector {e}")
            acc[e] = acc.get(e, 0) + int(c)
        return cls(variables, tuple(sorted((e, c) for e, c in acc.items() if c)))

    def as_dict(self) -> dict[tuple[int, ...], int]:
        return dict(self.terms)

    def __add__(self, other: "PolySparse"):
        if self.variables != other.variables:
            raise VariableMismatch(f"{self.variables} vs {other.variables}")
        d = self.as_dict()
        for e, c in other.terms:
            d[e] = d.get(e, 0) + c
        return PolySparse.from_dict(self.variables, d)

    def __neg__(self):
        return PolySparse(self.variables, tuple((e, -c) for e, c in self.terms))

    def __sub__(self, other):
        return self + (-other)

    def __bool__(self):
        return bool(self.terms)

    def __str__(self):
        if not self.terms:
            return "0"
        out = []
        for e, c in reversed(self.terms):
            mono = "".join(v if k == 1 else f"{v}^{k}" for v, k in zip(self.variables, e) if k)
            mag = abs(c)
            body = (str(mag) if mag != 1 or not mono else "") + mono
            out.append(("- " if c < 0 else "+ ") + body)
        s = " ".join(out)
        return s[2:] if s.startswith("+ ") else "-" + s[1:]


_TERM = re.compile(r"([+-]?)\s*(\d*)\s*((?:[a-z]\d*(?:\^\d+)?\*?)*)")
_FACTOR = re.compile(r"([a-z]\d*)(?:\^(\d+))?")


def poly(text: str, variables: Sequence[str]) -> PolySparse:
    """Parse "uv + y^3 - 2t0y"; variables are a letter plus optional digits."""
    variables = tuple(variables)
    index = {v: i for i, v in enumerate(variables)}
    src = text.replace(" ", "")
    if not src:
        raise ValueError("empty polynomial")
    coeffs: dict[tuple[int, ...], int] = {}
    pos = 0
    while pos < len(src):
        m = _TERM.match(src, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse {text!r} at {pos}")
        sign, num, mono = m.groups()
        if not num and not mono:
            raise ValueError(f"empty term in {text!r}")
        e = [0] * len(variables)
        for f in _FACTOR.finditer(mono.replace("*", "")):
            if f.group(1) not in index:
                raise VariableMismatch(f"unknown variable {f.group(1)!r}")
            e[index[f.group(1)]] += int(f.group(2) or 1)
        c = (-1 if sign == "-" else 1) * int(num or 1)
        coeffs[tuple(e)] = coeffs.get(tuple(e), 0) + c
        pos = m.end()
    return PolySparse.from_dict(variables, coeffs)


@dataclass(frozen=True)
class SignedMonomialMap:
    """Each variable goes to sign * (another variable); ``images[v] = (sign, w)``."""

    name: str
    images: tuple[tuple[str, int, str], ...]
    order: int = 2

    @classmethod
    def of(cls, name: str, images: Mapping[str, tuple[int, str]], order: int = 2):
        m = cls(name, tuple(sorted((v, int(s), w) for v, (s, w) in images.items())), order)
        m._validate()
        return m

    def _validate(self):
        src = [v for v, _, _ in self.images]
        dst = [w for _, _, w in self.images]
        if sorted(src) != sorted(dst):
            raise ValueError(f"map {self.name} is not a permutation of its variables")
        if any(s not in (1, -1) for _, s, _ in self.images):
            raise ValueError("signs must be +-1")

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(v for v, _, _ in self.images)

    def image(self, v: str) -> tuple[int, str]:
        for x, s, w in self.images:
            if x == v:
                return s, w
        return 1, v

    @property
    def is_diagonal(self) -> bool:
        return all(v == w for v, _, w in self.images)

    def is_identity(self) -> bool:
        return all(v == w and s == 1 for v, s, w in self.images)

    def to_json(self):
        return {"name": self.name, "images": {v: [s, w] for v, s, w in self.images}}


def act(m: SignedMonomialMap, f: PolySparse) -> PolySparse:
    """Exact substitution f(m(x)); variables of f not moved by m stay fixed."""
    moved = set(m.variables)
    index = {v: i for i, v in enumerate(f.variables)}
    missing = [v for v in moved if v not in index]
    if missing:
        raise VariableMismatch(f"map {m.name} moves {missing} absent from {f.variables}")
    out: dict[tuple[int, ...], int] = {}
    for e, c in f.terms:
        new = [0] * len(e)
        sign = 1
        for v, k in zip(f.variables, e):
            if not k:
                continue
            s, w = m.image(v)
            new[index[w]] += k
            if s < 0 and k % 2:
                sign = -sign
        key = tuple(new)
        out[key] = out.get(key, 0) + sign * c
    return PolySparse.from_dict(f.variables, out)


def is_invariant(m: SignedMonomialMap, f: PolySparse) -> str:
    g = act(m, f)
    if g == f:
        return "invariant"
    if g == -f:
        return "anti-invariant"
    return "neither"


def compose(m1: SignedMonomialMap, m2: SignedMonomialMap) -> SignedMonomialMap:
    """The map x -> m1(m2(x)) as a substitution (apply m2, then m1)."""
    names = sorted(set(m1.variables) | set(m2.variables))
    images = {}
    for v in names:
        s2, w2 = m2.image(v)
        s1, w1 = m1.image(w2)
        images[v] = (s1 * s2, w1)
    return SignedMonomialMap.of(f"{m1.name}{m2.name}", images)


def mu_weights(f: PolySparse, weights: Mapping[str, int], n: int) -> list[int]:
    """Weight mod n of every monomial under xi -> xi^weight on each variable."""
    w = [int(weights.get(v, 0)) for v in f.variables]
    return [sum(a * b for a, b in zip(e, w)) % n for e, _ in f.terms]


def weight_verdict(m: SignedMonomialMap, f: PolySparse) -> str:
    """Invariance of a diagonal sign map read off monomial parities."""
    if not m.is_diagonal:
        raise ValueError("weight reading needs a diagonal map")
    ws = mu_weights(f, {v: (1 if s < 0 else 0) for v, s, _ in m.images}, 2)
    if all(x == 0 for x in ws):
        return "invariant"
    if all(x == 1 for x in ws):
        return "anti-invariant"
    return "neither"


XYZ = ("x", "y", "z")
UVY = ("u", "v", "y")


def rdp_equation(family: str, index: int, coords: str = "xyz") -> PolySparse:
    """Hypersurface equation of an RDP germ in C^3."""
    family = family.upper()
    if coords == "uvy":
        if family != "A":
            raise ValueError("uvy coordinates only carry the A family")
        return poly(f"uv + y^{index + 1}", UVY)
    if coords != "xyz":
        raise ValueError(f"unknown coordinates {coords!r}")
    if family == "A":
        if index < 0:
            raise ValueError("A_n needs n >= 0")
        return poly(f"z^2 + x^2 + y^{index + 1}", XYZ)
    if family == "D":
        if index < 3:
            raise ValueError("D_n needs n >= 3")
        return poly(f"z^2 + xy^2 + x^{index - 1}", XYZ)
    if family == "E":
        eq = {6: "z^2 + x^3 + y^4", 7: "z^2 + xy^3 + x^3", 8: "z^2 + x^3 + y^5"}
        if index not in eq:
            raise ValueError("E_n needs n in 6, 7, 8")
        return poly(eq[index], XYZ)
    raise ValueError(f"unknown RDP family {family!r}")


@lru_cache(maxsize=1)
def _raw() -> dict:
    text = resources.files("z2covers").joinpath("data/involutions.json").read_text()
    doc = json.loads(text)
    if doc.get("format") != SCHEMA or doc.get("version") != 1:
        raise ValueError("unsupported action table format")
    return doc


@lru_cache(maxsize=1)
def forms() -> dict[str, dict[str, SignedMonomialMap]]:
    """The six involution forms, each in xyz and/or uvy coordinates."""
    out = {}
    for name, by_coords in _raw()["forms"].items():
        out[name] = {c: SignedMonomialMap.of(name, {v: (s, w) for v, (s, w) in img.items()})
                     for c, img in by_coords.items()}
    return out


@dataclass(frozen=True)
class FamilyIndex:
    family: str
    coef: int
    const: int
    n_min: int = 0

    def at(self, n: int) -> int:
        return self.coef * n + self.const

    @property
    def fixed(self) -> bool:
        return self.coef == 0


@dataclass(frozen=True)
class ActionRecord:
    id: int
    variant: int
    r: int
    X_label: str
    X_members: tuple[FamilyIndex, ...]
    basis_forms: tuple[str, ...]
    Y_label: str
    Y_family: FamilyIndex
    I_x_size: int
    simple: bool
    smoothable: bool
    almost_simple: bool
    n_min: int = 0
    n_parity: str | None = None
    note: str | None = None

    def n_values(self, count: int = 5) -> list[int]:
        out, n = [], self.n_min
        while len(out) < count:
            if self.n_parity is None or (n % 2 == 1) == (self.n_parity == "odd"):
                out.append(n)
            n += 1
        return out

    def to_json(self):
        return {"id": self.id, "variant": self.variant, "r": self.r, "X": self.X_label,
                "basis_forms": list(self.basis_forms), "Y": self.Y_label,
                "I_x_size": self.I_x_size, "simple": self.simple,
                "smoothable": self.smoothable, "almost_simple": self.almost_simple,
                **({"n_parity": self.n_parity} if self.n_parity else {}),
                **({"note": self.note} if self.note else {})}


def _record(d) -> ActionRecord:
    members = tuple(FamilyIndex(m["family"], *m["index"], m.get("n_min", 0))
                    for m in d["X"]["members"])
    y = d["Y"]
    return ActionRecord(d["id"], d["variant"], d["r"], d["X"]["label"], members,
                        tuple(d["basis_forms"]), y["label"],
                        FamilyIndex(y["family"], *y["index"]), d["I_x_size"], d["simple"],
                        d["smoothable"], d["almost_simple"], d.get("n_min", 0),
                        d.get("n_parity"), d.get("note"))


@lru_cache(maxsize=1)
def _table() -> tuple[ActionRecord, ...]:
    return tuple(_record(d) for d in _raw()["records"])


def table() -> list[ActionRecord]:
    return list(_table())


def record(row: int) -> list[ActionRecord]:
    out = [r for r in _table() if r.id == row]
    if not out:
        raise KeyError(f"no row {row}")
    return out


def _coords_for(names: Sequence[str]) -> str:
    fs = forms()
    return "xyz" if all("xyz" in fs[n] for n in names) else "uvy"


def _norm(family: str, k: int) -> tuple[str, int]:
    # D_3 = A_3; A_0 is the smooth germ
    return ("A", 3) if (family, k) == ("D", 3) else (family, k)


def _z_squared(family: str, k: int) -> int | None:
    """Fundamental cycle self-intersection of the quotient germ."""
    family, k = _norm(family, k)
    if family == "A":
        return None if k == 0 else fundamental_cycle([2] * k)[1]
    if family == "D":
        edges = [(i, i + 1) for i in range(k - 2)] + [(k - 1, k - 3)]
        return fundamental_cycle(([-2] * k, edges))[1]
    if family == "E":
        edges = [(i, i + 1) for i in range(k - 2)] + [(k - 1, 2)]
        return fundamental_cycle(([-2] * k, edges))[1]
    if family == "B":
        return fundamental_cycle(b_family(k)[1])[1]
    if family == "Y":
        return fundamental_cycle(y_family_by_type(k)[1])[1]
    raise ValueError(family)


def smoothing_family(n: int) -> PolySparse:
    """uv + y^(2n+1) + t y, a one-parameter smoothing of A_2n."""
    return poly(f"uv + y^{2 * n + 1} + ty", ("u", "v", "y", "t"))


def qg_family(d: int, n: int) -> tuple[PolySparse, dict[str, int]]:
    """uv - y^(dn) - sum t_k y^(kn) with its mu_n weights (u:1, v:-1, y:a, t:0)."""
    ts = [f"t{k}" for k in range(d)]
    f = poly(f"uv - y^{d * n}" + "".join(f" - t{k}y^{k * n}" if k else " - t0"
                                          for k in range(d)), ("u", "v", "y", *ts))
    return f, {"u": 1, "v": -1}


def consistency_check(samples: int = 5) -> dict:
    """Validate the shipped class table against direct computation."""
    errors: list[str] = []
    checks = 0
    recs = _table()
    fs = forms()

    def expect(cond, msg):
        nonlocal checks
        checks += 1
        if not cond:
            errors.append(msg)

    # forms are involutions, and the two coordinate versions agree on the overlap
    for name, by_c in fs.items():
        for c, m in by_c.items():
            expect(compose(m, m).is_identity(), f"form {name}/{c} is not an involution")

    rows = sorted({r.id for r in recs})
    expect(rows == list(range(1, 14)), f"rows are {rows}")
    simple_rows = sorted({r.id for r in recs if r.simple})
    nonsmooth_rows = sorted({r.id for r in recs if not r.smoothable})
    expect(simple_rows == [1, 6, 7, 8, 13], f"simple rows {simple_rows}")
    expect(nonsmooth_rows == [2, 4, 9, 10, 11], f"non-smoothable rows {nonsmooth_rows}")

    equivariance = []
    for rec in recs:
        tag = f"row {rec.id}.{rec.variant}"
        expect(len(rec.basis_forms) == rec.r, f"{tag}: basis size != r")
        expect(rec.almost_simple, f"{tag}: not almost simple")
        expect(rec.I_x_size <= rec.r, f"{tag}: |I_x| > r")
        if rec.simple:
            expect(rec.I_x_size == rec.r, f"{tag}: simple but |I_x| != r")
            expect(rec.smoothable, f"{tag}: simple but not smoothable")
        coords = _coords_for(rec.basis_forms)
        maps = [fs[n][coords] for n in rec.basis_forms]
        # the basis forms commute and generate a group of order 2^r
        for a in maps:
            for b in maps:
                expect(compose(a, b).images == compose(b, a).images,
                       f"{tag}: forms {a.name},{b.name} do not commute")
        elems = [SignedMonomialMap.of("1", {v: (1, v) for v in maps[0].variables})]
        for m in maps:
            elems += [compose(m, e) for e in elems]
        expect(len({e.images for e in elems}) == 2 ** rec.r, f"{tag}: forms are dependent")
        for n in rec.n_values(samples):
            for mem in rec.X_members:
                k = mem.at(n)
                if n < mem.n_min or (mem.fixed and n != rec.n_values(1)[0]):
                    continue
                f = rdp_equation(mem.family, k, coords)
                for m in maps:
                    v = is_invariant(m, f)
                    ok = v in ("invariant", "anti-invariant")
                    if m.is_diagonal:
                        ok = ok and weight_verdict(m, f) == v
                    expect(ok, f"{tag}: {mem.family}_{k} under {m.name}: {v}")
                    equivariance.append({"row": rec.id, "variant": rec.variant,
                                         "X": f"{mem.family}_{k}", "form": m.name,
                                         "coords": coords, "verdict": v})

    # quotient families against the singularity module
    quotient = []
    for rec in recs:
        yf = rec.Y_family
        for n in rec.n_values(samples):
            k = yf.at(n)
            if yf.family == "B":
                s, ch = b_family(k)
                expect(hj(s).b == ch.b, f"row {rec.id}: B_{k} chain mismatch")
                z2 = _z_squared("B", k)
                expect(z2 == -3, f"row {rec.id}: B_{k} has Z^2 = {z2}")
            elif yf.family == "Y":
                s, ch = y_family_by_type(k)
                expect(hj(s).b == ch.b, f"row {rec.id}: Y_{k} chain mismatch")
                z2 = _z_squared("Y", k)
                expect(z2 == -4, f"row {rec.id}: Y_{k} has Z^2 = {z2}")
            else:
                if yf.family == "A" and k:
                    expect(hj(a_type(k)).b == (2,) * k, f"row {rec.id}: A_{k} chain")
                z2 = _z_squared(yf.family, k)
                expect(z2 in (None, -2), f"row {rec.id}: {yf.family}_{k} has Z^2 = {z2}")
            quotient.append({"row": rec.id, "variant": rec.variant, "n": n,
                             "Y": f"{yf.family}_{k}", "Z2": z2})
            if yf.fixed:
                break

    # equivariant smoothing and the weighted family
    c_uv = fs["c"]["uvy"]
    ex48 = []
    for n in range(1, samples + 1):
        f = smoothing_family(n)
        v = is_invariant(c_uv, f)
        expect(v == "anti-invariant", f"smoothing of A_{2 * n} under c: {v}")
        ex48.append({"n": n, "verdict": v})
    weights = []
    for d in range(1, 5):
        for n in range(2, 7):
            for a in range(1, n):
                if gcd(a, n) != 1:
                    continue
                f, w = qg_family(d, n)
                ws = mu_weights(f, {**w, "y": a}, n)
                expect(all(x == 0 for x in ws), f"weighted family d={d} n={n} a={a}: {ws}")
                weights.append({"d": d, "n": n, "a": a, "ok": all(x == 0 for x in ws)})

    overlaps = _overlaps(recs, samples)
    return {"passed": not errors, "checks": checks, "errors": errors,
            "simple_rows": simple_rows, "non_smoothable_rows": nonsmooth_rows,
            "equivariance": equivariance, "quotients": quotient,
            "smoothing_family": ex48, "weighted_family": weights, "overlaps": overlaps}


def _overlaps(recs, samples) -> list[dict]:
    """Small indices where two records with the same forms meet the same germ."""
    seen: dict[tuple, list] = {}
    for rec in recs:
        for n in rec.n_values(samples):
            for mem in rec.X_members:
                if n < mem.n_min:
                    continue
                x = _norm(mem.family, mem.at(n))
                y = rec.Y_family
                seen.setdefault((rec.basis_forms, x), []).append(
                    {"row": rec.id, "variant": rec.variant, "n": n,
                     "X": f"{mem.family}_{mem.at(n)}", "Y": f"{y.family}_{y.at(n)}"})
    out = []
    for (fs_, x), hits in sorted(seen.items()):
        labels = {h["X"] for h in hits}
        if len(labels) > 1:
            out.append({"forms": list(fs_), "germ": f"{x[0]}_{x[1]}", "records": hits})
    return out

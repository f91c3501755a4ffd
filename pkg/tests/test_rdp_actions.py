import pytest
import sympy
from hypothesis import given, strategies as st

from z2covers.rdp_actions import (SignedMonomialMap, VariableMismatch, act, compose, consistency_check,
                                  forms, is_invariant, mu_weights, poly, qg_family, rdp_equation,
                                  record, smoothing_family, table, weight_verdict)

x, y, z, u, v = sympy.symbols("x y z u v")
I = sympy.I
SYM = {"x": x, "y": y, "z": z, "u": u, "v": v}


def as_sympy(m):
    return {SYM[k]: s * SYM[w] for k, (s, w) in ((k, m.image(k)) for k in m.variables)}


def to_sympy(f):
    return sum(c * sympy.prod([SYM[v] ** e for v, e in zip(f.variables, mono)])
               for mono, c in f.as_dict().items())


def uv_in_xyz():
    return {u: z + I * x, v: z - I * x}


@pytest.mark.parametrize("name", ["a", "b", "d", "e", "f"])
def test_uvy_versions_are_the_xyz_forms(name):
    fs = forms()[name]
    if "xyz" not in fs or "uvy" not in fs:
        pytest.skip("single coordinate system")
    sub_xyz = as_sympy(fs["xyz"])
    sub_uvy = as_sympy(fs["uvy"])
    for w in (u, v, y):
        lhs = sympy.expand(w.subs(uv_in_xyz()).subs(sub_xyz, simultaneous=True))
        rhs = sympy.expand(sub_uvy.get(w, w).subs(uv_in_xyz()))
        assert lhs == rhs, (name, w)


def test_equations_agree_with_sympy():
    for fam, k in [("A", 4), ("D", 5), ("E", 6), ("E", 7), ("E", 8)]:
        f = rdp_equation(fam, k)
        g = to_sympy(f)
        ref = {"A": z**2 + x**2 + y**5, "D": z**2 + x*y**2 + x**4, "E6": z**2 + x**3 + y**4,
               "E7": z**2 + x*y**3 + x**3, "E8": z**2 + x**3 + y**5}[fam if fam != "E" else f"E{k}"]
        assert sympy.expand(g - ref) == 0
    # the two A_n models are the same surface after u = z + ix
    g = to_sympy(rdp_equation("A", 3, "uvy"))
    assert sympy.expand(g.subs(uv_in_xyz()) - (z**2 + x**2 + y**4)) == 0


@pytest.mark.parametrize("name", list("abcdef"))
def test_forms_are_involutions(name):
    for m in forms()[name].values():
        assert compose(m, m).is_identity()


@given(st.integers(1, 12))
def test_invariance_against_sympy(n):
    f = rdp_equation("A", n)
    g = z**2 + x**2 + y**(n + 1)
    for name, by_c in forms().items():
        if "xyz" in by_c:
            m = by_c["xyz"]
            h = g.subs(as_sympy(m), simultaneous=True)
            want = "invariant" if sympy.expand(h - g) == 0 else \
                "anti-invariant" if sympy.expand(h + g) == 0 else "neither"
            assert is_invariant(m, f) == want


def test_poly_parser_and_action():
    f = poly("x^2*y - 3y + 2", ("x", "y"))
    assert str(f - f) == "0"
    m = SignedMonomialMap.of("s", {"x": (-1, "x"), "y": (-1, "y")})
    assert is_invariant(m, poly("x^2 + y^2", ("x", "y"))) == "invariant"
    assert is_invariant(m, poly("x + y", ("x", "y"))) == "anti-invariant"
    assert is_invariant(m, f) == "neither"
    assert weight_verdict(m, poly("x*y", ("x", "y"))) == "invariant"
    with pytest.raises(VariableMismatch):
        act(m, poly("u", ("u", "v")))


def test_smoothing_and_weighted_families():
    c = forms()["c"]["uvy"]
    for n in range(1, 6):
        assert is_invariant(c, smoothing_family(n)) == "anti-invariant"
    f, w = qg_family(2, 3)
    assert all(x == 0 for x in mu_weights(f, {**w, "y": 1}, 3))


def test_table_shape():
    recs = table()
    assert sorted({r.id for r in recs}) == list(range(1, 14))
    assert len(record(1)) == 3 and len(record(2)) == 3
    assert record(10)[0].n_parity == "odd"
    with pytest.raises(KeyError):
        record(14)


def test_consistency_check():
    rep = consistency_check()
    assert rep["passed"], rep["errors"]
    assert rep["simple_rows"] == [1, 6, 7, 8, 13]
    assert rep["non_smoothable_rows"] == [2, 4, 9, 10, 11]
    assert {tuple(o["forms"]) for o in rep["overlaps"]} >= {("a",), ("b",)}

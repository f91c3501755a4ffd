import pytest

from z2covers.lens_topology import (AmbientModel, LensSpace, SearchBoundError, compare_links, embeds,
                                    lemma_verdicts, link_of, mcg, milnor_lattice)
from z2covers.quotient_sings import SMOOTH, normalize


def test_links():
    assert str(link_of(normalize(5, 1, 2))) == "L(5,2)"
    assert link_of(SMOOTH).is_sphere
    with pytest.raises(ValueError):
        LensSpace(6, 2)


def test_compare_links_only_claims_iso():
    assert compare_links(normalize(7, 1, 3), normalize(7, 1, 5))["iso"]
    assert not compare_links(normalize(7, 1, 2), normalize(7, 1, 3))["iso"]


def test_mcg_flags():
    # sigma exists iff q^2 = 1 mod p
    r = mcg(LensSpace(8, 3))
    assert r.sigma_defined and r.generators == ("sigma", "tau")
    assert mcg(LensSpace(7, 2)).generators == ("tau",)
    assert mcg(LensSpace(5, 4)).sigma_tau_isotopic_to_id
    for p in range(2, 40):
        for q in range(1, p):
            if (q * q - 1) % p == 0 and q not in (1, p - 1):
                assert mcg(LensSpace(p, q)).generators == ("sigma", "tau")


def test_lattices():
    assert milnor_lattice("E(8)").rank == 8
    assert milnor_lattice("D(5)").gram[3][4] == 0 and milnor_lattice("D(5)").gram[2][4] == 1
    assert milnor_lattice("B(3)").gram[2][2] == -3
    assert milnor_lattice("Y(1):artin").gram == ((-4,),)
    assert milnor_lattice("Y(2):qg").gram is None
    for bad in ("Q(3)", "D(2)", "E(5)", "Y(2):foo"):
        with pytest.raises(ValueError):
            milnor_lattice(bad)


def test_embeddings():
    ok = embeds(milnor_lattice("A(1)"), AmbientModel.BLOWUP_CXP1_TWO_POINTS)
    assert ok.embeds and ok.witness in (((0, 1, -1),), ((0, -1, 1),), ((0, 1, 1),), ((0, -1, -1),))
    no = embeds(milnor_lattice("A(1)"), AmbientModel.BLOWUP_C2)
    assert not no.embeds and no.certificate["rule"] == "search"
    assert embeds(milnor_lattice("Y(3):qg"), AmbientModel.PLANE_C2).certificate["rule"] == "torsion"
    # a single -1 curve does embed in the blow-up
    assert embeds(milnor_lattice("A(1)").__class__("E", ((-1,),)), AmbientModel.BLOWUP_C2).embeds


def test_search_bound():
    with pytest.raises(SearchBoundError):
        embeds(milnor_lattice("A(2)"), AmbientModel.BLOWUP_C2, box_limit=1)


def test_lemma_verdicts_agree():
    res = lemma_verdicts(4)
    assert res["all_agree"] and res["control"]["embeds"]
    assert {r["lemma"] for r in res["rows"]} == {"rdp-in-blowup", "y-in-plane", "a-in-two-point-blowup"}

import json

import pytest
from hypothesis import given, strategies as st

from z2covers.construction import (CertificationError, ConstructionInput, FactorParams,
                                   assign_branch_divisors, base_class, brill_noether_split,
                                   build_group, certify, curve_genus, h0_curve, h1_theta, moduli_dim,
                                   n_of)
from z2covers.cover_data import check_ample_differences, check_cor314, verify_all
from z2covers.divisor_lattice import is_comb_ample


def brute_splits(a, b, n):
    out = []
    for l in range(2, b + 1):
        if l * a != b:
            continue
        for c in range(1, a):
            if 2 * c < a and n == l * a * (2 * a - c):
                out.append((l, c))
    return out


def test_moduli_bookkeeping():
    assert moduli_dim(5, 3, 2, 3, 24) == 45
    assert h1_theta(24) == 42
    assert brill_noether_split(3, 6, 30) == [(2, 1)]
    assert curve_genus(3, 6) == 2 * 5
    assert h0_curve(3, 6, 1) == 6 * 2 + 9


@given(st.integers(3, 12), st.integers(3, 40), st.integers(0, 400))
def test_splits_match_brute_force(a, b, n):
    assert brill_noether_split(a, b, n) == brute_splits(a, b, n)


@given(st.integers(3, 12), st.integers(1, 5), st.integers(1, 5))
def test_n_of_formula(a, l, c):
    if 2 * c < a:
        b = l * a
        assert n_of(a, b, c) == b * (2 * a - c)


def test_input_validation():
    for bad in [(2, 5, 1), (4, 4, 1), (3, 4, 100)]:
        with pytest.raises(ValueError):
            FactorParams(*bad)
    with pytest.raises(ValueError):
        FactorParams(3, 6, 30, bn_split=(3, 1))
    f = FactorParams(3, 4, 2)
    with pytest.raises(ValueError):
        ConstructionInput(2, [f, f])
    with pytest.raises(ValueError):
        ConstructionInput(1, [f], mode="fast")


def test_group_layout():
    G, index = build_group([FactorParams(3, 4, 2)])
    assert G.rank == 2 + 2 + 5
    assert index["zeta"] == 1 and index["alpha1_3"] == index["alpha1_1"] ^ index["alpha1_2"]
    assert is_comb_ample(base_class(7))


@pytest.mark.parametrize("M", [1, 2, 3])
def test_branch_data_is_a_cover(M):
    data = assign_branch_divisors([FactorParams(3, 4, 2)], M)
    assert verify_all(data, "exhaustive").passed


def test_margins_grow_with_M():
    f = [FactorParams(3, 4, 2)]
    margins = [check_ample_differences(assign_branch_divisors(f, M)).min_margin for M in range(1, 6)]
    assert margins == sorted(margins) and margins[-1] > 0


def test_condition_i_implies_sufficient_conditions():
    for n in range(0, 5):
        for M in (1, 2, 3):
            data = assign_branch_divisors([FactorParams(3, 4, n)], M)
            if check_ample_differences(data).passed:
                assert check_cor314(data)["passed"]


def test_toy_certificate_exhaustive():
    cert = certify(ConstructionInput(1, [FactorParams(3, 4, 2)], mode="exhaustive"))
    out = cert.to_json()
    assert out["passed"] and out["M"] == 2
    assert all(out["conditions"][k]["passed"] for k in "i ii iii iv".split())
    assert out["cover_verification"]["passed"] and out["sufficient_conditions"]["passed"]
    assert out["component_lower_bound"] is None  # no split for (3, 4, 2)
    assert [h["passed"] for h in out["margin_history"]] == [False, True]
    assert cert.dumps() == certify(ConstructionInput(1, [FactorParams(3, 4, 2)], mode="exhaustive")).dumps()
    assert json.loads(cert.dumps()) == out


def test_split_factor_bounded():
    cert = certify(ConstructionInput(1, [FactorParams(3, 6, 30)]))
    assert cert.passed and cert.component_lower_bound == 2
    assert cert.to_json()["factors"][0]["bn_split"] == [2, 1]


def test_rank_and_multiplier_caps():
    with pytest.raises(CertificationError):
        certify(ConstructionInput(1, [FactorParams(3, 6, 30)], mode="exhaustive"))
    with pytest.raises(CertificationError):
        certify(ConstructionInput(1, [FactorParams(3, 4, 2)], m_cap=1))

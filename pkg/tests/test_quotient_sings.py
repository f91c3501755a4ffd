from fractions import Fraction
from math import gcd

import pytest
from hypothesis import given, strategies as st

from z2covers.quotient_sings import (SMOOTH, CyclicSing, HJChain, NonIsolatedError, a_type, b_family,
                                     class_t_values, class_t_witness, from_chain, fundamental_cycle,
                                     hj, is_iso, normalize, q2_criterion, y_family, y_family_by_type)


def brute_class_t(p, q):
    """All (d, n, a) with p = d n^2, gcd(n, a) = 1 and q or q^-1 equal to d n a - 1 mod p."""
    qi = pow(q, -1, p)
    out = []
    for n in range(1, p + 1):
        if n * n > p:
            break
        if p % (n * n):
            continue
        d = p // (n * n)
        for a in range(1, n + 1):
            if gcd(a, n) == 1 and (d * n * a - 1) % p in (q, qi):
                out.append((d, n, a))
    return out


@st.composite
def coprime_pairs(draw, pmax=400):
    p = draw(st.integers(2, pmax))
    q = draw(st.integers(1, p - 1).filter(lambda q: gcd(p, q) == 1))
    return p, q


def cf_value(b):
    x = Fraction(b[-1])
    for v in reversed(b[:-1]):
        x = v - 1 / x
    return x


@given(coprime_pairs())
def test_hj_chain_evaluates_back(pq):
    p, q = pq
    ch = hj(pq)
    assert cf_value(ch.b) == Fraction(p, q)
    assert from_chain(ch) == CyclicSing(p, q)


@given(coprime_pairs())
def test_inverse_type_reverses_chain(pq):
    p, q = pq
    assert hj((p, pow(q, -1, p))).b == tuple(reversed(hj(pq).b))


@given(coprime_pairs(pmax=300))
def test_witness_matches_brute_force(pq):
    p, q = pq
    w = class_t_witness(pq)
    assert (w is not None) == bool(brute_class_t(p, q))
    if w is not None:
        assert (w.d, w.n, w.a) in brute_class_t(p, q)


def test_witness_for_one_quarter():
    w = class_t_witness(normalize(4, 1, 1))
    assert (w.d, w.n, w.a) == (1, 2, 1)


def test_normalize():
    s = normalize(6, 2, 4)
    assert (s.p, s.q, s.origin) == (3, 2, (6, 2, 4))
    assert normalize(5, 2, 3).q == 4
    assert normalize(3, 3, 3) is SMOOTH
    with pytest.raises(NonIsolatedError):
        normalize(4, 2, 1)


def test_isomorphism_and_rdp():
    assert is_iso((7, 3), (7, 5)) and not is_iso((7, 2), (7, 3))
    assert a_type(5).is_rdp and hj(a_type(5)).b == (2,) * 5
    assert class_t_witness(a_type(5)).kind == "rdp"


@pytest.mark.parametrize("n", range(1, 12))
def test_families(n):
    s, ch = b_family(n)
    assert hj(s) == ch and fundamental_cycle(ch)[1] == -3
    s, ch = y_family_by_type(n)
    assert hj(s) == ch and fundamental_cycle(ch)[1] == -4


def test_y_conventions_are_shifted():
    assert y_family(3, "table") == y_family_by_type(3)
    assert y_family(3, "shifted") == y_family_by_type(2)


def test_fundamental_cycle_on_trees():
    # D4 and E8 have known fundamental cycles
    z, z2 = fundamental_cycle(([-2] * 4, [(0, 1), (1, 2), (1, 3)]))
    assert z == [1, 2, 1, 1] and z2 == -2
    e8 = ([-2] * 8, [(i, i + 1) for i in range(6)] + [(2, 7)])
    z, z2 = fundamental_cycle(e8)
    assert sum(z) == 29 and z2 == -2  # height of the highest root
    with pytest.raises(ValueError):
        fundamental_cycle(([-2, -1], [(0, 1)]))
    with pytest.raises(ValueError):
        fundamental_cycle(([-2, -2, -2], [(0, 1)]))


def test_q2_criterion_small():
    for d in range(1, 20):
        for n in range(1, 10):
            for a in range(1, n + 1):
                if gcd(a, n) == 1:
                    assert q2_criterion(d, n, a) == (a == 1 and n <= 2)


def test_class_t_values_include_inverses():
    vals = class_t_values(100)
    for q in vals:
        assert pow(q, -1, 100) in vals


def test_chain_validation():
    with pytest.raises(ValueError):
        HJChain((2, 1))
    with pytest.raises(ValueError):
        CyclicSing(4, 2)

"""Acceptance suite: one PASS/FAIL line per criterion.

Run under pytest, or directly with ``python3 tests/test_acceptance.py``.
"""

import random
import sys
import time
from math import gcd
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from conftest import all_subspaces, kfold_defect  # noqa: E402
from z2covers.construction import (ConstructionInput, FactorParams, brill_noether_split, certify,  # noqa: E402
                                   h1_theta, moduli_dim, n_of)
from z2covers.cover_data import (BuildingData, L_of, ample_extension, elementary_solution,  # noqa: E402
                                 invariants, random_building_data, solve_basis_L, verify_all)
from z2covers.divisor_lattice import DivClass, rr_chi  # noqa: E402
from z2covers.f2_groups import GVector, subspace_span  # noqa: E402
from z2covers.lens_topology import AmbientModel, embeds, lemma_verdicts, milnor_lattice  # noqa: E402
from z2covers.quotient_sings import (b_family, class_t_witness, fundamental_cycle, hj,  # noqa: E402
                                     q2_criterion, y_family_by_type)
from z2covers.rdp_actions import consistency_check, table  # noqa: E402

RESULTS: dict[int, tuple[bool, str, float]] = {}


def _record(k, fn):
    t0 = time.perf_counter()
    ok, detail = fn()
    dt = time.perf_counter() - t0
    RESULTS[k] = (ok, detail, dt)
    print(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'} ({dt:.1f}s) {detail}")
    return ok, detail


# ---------------------------------------------------------------------------


def hj_families():
    for n in range(1, 51):
        if hj((2 * n + 1, 2 * n - 1)).b != (2,) * (n - 1) + (3,):
            return False, f"B chain at n={n}"
        want = (4,) if n == 1 else (3,) + (2,) * (n - 2) + (3,)
        got = hj((4 * n, 2 * n - 1)).b
        if got != want or len(got) != n:
            return False, f"Y chain at n={n}"
    return True, "n = 1..50"


def fundamental_cycles():
    for n in range(1, 51):
        if fundamental_cycle(b_family(n)[1])[1] != -3:
            return False, f"B_{n}"
        if fundamental_cycle(y_family_by_type(n)[1])[1] != -4:
            return False, f"Y type {n}"
    return True, "Z^2 = -3 (B), -4 (Y), n = 1..50"


def _brute_t(p):
    """q -> set of (d, n, a) from direct enumeration of p = d n^2."""
    hits = {}
    for n in range(1, p + 1):
        if n * n > p:
            break
        if p % (n * n):
            continue
        d = p // (n * n)
        for a in range(1, n + 1):
            if gcd(a, n) != 1:
                continue
            q = (d * n * a - 1) % p
            if gcd(q, p) != 1:
                continue
            hits.setdefault(q, set()).add((d, n, a))
            hits.setdefault(pow(q, -1, p), set()).add((d, n, a))
    return hits


def class_t():
    pairs = 0
    for p in range(2, 10 ** 4 + 1):
        hits = _brute_t(p)
        for q in range(1, p):
            if gcd(p, q) != 1:
                continue
            pairs += 1
            w = class_t_witness((p, q))
            if q == p - 1:
                if w is None or w.kind != "rdp":
                    return False, f"rdp {p},{q}"
                continue
            if (w is not None) != (q in hits):
                return False, f"disagree at {p},{q}"
            if w is not None and (w.d, w.n, w.a) not in hits[q]:
                return False, f"bad witness at {p},{q}"
    for d in range(1, 51):
        for n in range(1, 21):
            for a in range(1, n + 1):
                if gcd(a, n) == 1 and q2_criterion(d, n, a) != (a == 1 and n <= 2):
                    return False, f"q2 at {d},{n},{a}"
    return True, f"{pairs} coprime pairs, p <= 10^4"


def obstructions():
    res = lemma_verdicts(6)
    ctrl = embeds(milnor_lattice("A(1)"), AmbientModel.BLOWUP_CXP1_TWO_POINTS)
    w = ctrl.witness
    gram = AmbientModel.BLOWUP_CXP1_TWO_POINTS.gram
    ok_w = w is not None and sum(gram[i][j] * w[0][i] * w[0][j] for i in range(3) for j in range(3)) == -2
    certified = all("rule" in r["certificate"] for r in res["rows"])
    ok = res["all_agree"] and ctrl.embeds and ok_w and certified
    return ok, f"{len(res['rows'])} negative verdicts, control witness {w}"


def _solved(rng, r, n):
    """Random D with even basis sums, L from solve_basis_L."""
    D = dict(random_building_data(rng, r, n).D)
    basis = [GVector(r, 1 << (r - 1 - j)) for j in range(r)]
    L = solve_basis_L(D, basis, n)
    by_char = {chi.value: c for chi, c in L.items()}
    duals = tuple(b.value for b in basis)  # standard basis is self-dual
    return BuildingData(r, n, tuple(D.items()), duals, tuple(by_char[d] for d in duals), None, duals)


def cover_algebra():
    rng = random.Random(0)
    datas = []
    for i in range(1000):
        r = 1 + i % 6
        data = _solved(rng, r, rng.randint(0, 4))
        if not verify_all(data, "exhaustive").passed:
            return False, f"random instance {i}"
        datas.append(data)
    subspaces = 0
    v = DivClass(1, 2, (1, 0))
    for r in range(1, 7):
        for H in all_subspaces(r):
            if H.dim == 0:
                continue
            subspaces += 1
            if not verify_all(elementary_solution(H, v), "exhaustive").passed:
                return False, f"elementary solution r={r} H={H.basis}"
    for i in range(200):
        r = rng.randint(1, 6)
        n = rng.randint(0, 3)
        a, b = _solved(rng, r, n), _solved(rng, r, n)
        if not verify_all(a + b, "exhaustive").passed:
            return False, f"sum {i}"
    for i, data in enumerate(datas[:300]):
        for k in range(2, 6):
            chis = [rng.randrange(1 << data.rank) for _ in range(k)]
            if kfold_defect(data, chis):
                return False, f"k-fold defect k={k} on instance {i}"
    return True, f"1000 random, {subspaces} subspaces, 200 sums, k-fold k <= 5"


def extension_bounds():
    rng = random.Random(1)
    for i in range(100):
        r = 4 + i % 2
        n = rng.randint(0, 3)
        while True:
            H = subspace_span([GVector(r, rng.randrange(1, 1 << r)) for _ in range(rng.randint(1, r - 1))], r)
            if H.dim < r:
                break
        eta = next(s for s in rng.sample(range(1, 1 << r), (1 << r) - 1) if not H.contains(s))
        D = {h: DivClass(rng.randint(0, 3), rng.randint(0, 3), tuple(rng.randint(-1, 2) for _ in range(n)))
             for h in H.element_values() if h and rng.random() < 0.8}
        v = DivClass(rng.randint(1, 3), rng.randint(1, 3), tuple(rng.randint(0, 2) for _ in range(n)))
        alpha = [rng.randint(0, 2) for _ in range(n + 2)]
        alpha[0] = max(alpha[0], 1)
        N = rng.randint(1, 30)

        def al(c):
            return sum(f * x for f, x in zip(alpha, c.coords()))

        data = ample_extension(r, H, D, eta, v, alpha, N)
        if not verify_all(data, "exhaustive").passed:
            return False, f"instance {i} is not a cover"
        for s in range(1 << r):
            Ds = data.D_at(s)
            if not H.contains(s) and al(Ds) < N:
                return False, f"instance {i}: alpha(D) < N off H"
            for x in range(1, 1 << r):
                if al(L_of(data, x) - Ds) < N:
                    return False, f"instance {i}: alpha(L - D) < N"
    return True, "100 instances, r in {4, 5}"


def invariant_paths():
    rng = random.Random(2)
    for i in range(200):
        data = random_building_data(rng, rng.randint(1, 5), rng.randint(0, 12))
        inv = invariants(data)  # raises on a dual-path mismatch
        if inv.chi != sum(rr_chi(-L_of(data, x)) for x in range(1 << data.rank)):
            return False, f"chi oracle on instance {i}"
        slow = invariants(data, cap=0)
        if (slow.K2, slow.chi) != (inv.K2, inv.chi):
            return False, f"structured routes on instance {i}"
    curve = DivClass(3, 3, (1,) * 6)
    data = BuildingData.from_branch(2, 6, {1: curve, 2: curve, 3: curve})
    inv = invariants(data)
    r = inv.routes
    ok = (inv.K2, inv.chi) == (44, 13) and r["formula"]["K2"] == r["hurwitz_rr"]["K2"] \
        and r["formula"]["chi"] == r["hurwitz_rr"]["chi"]
    return ok, f"200 random; bidouble K^2 = {inv.K2}, chi = {inv.chi}"


def bookkeeping():
    ok = moduli_dim(5, 3, 2, 3, 24) == 45 and h1_theta(24) == 42
    ok &= brill_noether_split(3, 6, 30) == [(2, 1)]
    for a in range(3, 12):
        for l in range(2, 5):
            for c in range(1, (a + 1) // 2):
                b = l * a
                ok &= n_of(a, b, c) == b * (2 * a - c)
    for a in range(21):
        for b in range(21):
            ok &= rr_chi(DivClass(a, b, ())) == (a + 1) * (b + 1)
    return ok, "moduli_dim, h1_theta, n_of, splits, rr_chi"


def certification():
    toy = ConstructionInput(1, [FactorParams(3, 4, 6)], mode="exhaustive")
    c1, c2 = certify(toy), certify(toy)
    toy_ok = c1.passed and c1.data.rank <= 20 and c1.dumps() == c2.dumps()
    two = ConstructionInput(2, [FactorParams(3, 6, 30), FactorParams(3, 9, 45)], mode="bounded")
    d1, d2 = certify(two), certify(two)
    two_ok = (d1.passed and d1.component_lower_bound == 4 and d1.to_json()["sufficient_conditions"]["passed"]
              and d1.dumps() == d2.dumps())
    return toy_ok and two_ok, (f"toy rank {c1.data.rank} M={c1.M}; k=2 rank {d1.data.rank} "
                               f"bound {d1.component_lower_bound}")


def action_table():
    rep = consistency_check()
    recs = table()
    ok = rep["passed"] and rep["simple_rows"] == [1, 6, 7, 8, 13]
    ok &= rep["non_smoothable_rows"] == [2, 4, 9, 10, 11]
    ok &= all(r.I_x_size == r.r for r in recs if r.simple)
    ok &= bool(rep["equivariance"]) and bool(rep["smoothing_family"]) and bool(rep["weighted_family"])
    return ok, f"{rep['checks']} checks, {len(rep['errors'])} errors"


CRITERIA = {
    1: hj_families,
    2: fundamental_cycles,
    3: class_t,
    4: obstructions,
    5: cover_algebra,
    6: extension_bounds,
    7: invariant_paths,
    8: bookkeeping,
    9: certification,
    10: action_table,
}


def test_criterion_01_hj_families():
    assert _record(1, hj_families)[0]


def test_criterion_02_fundamental_cycles():
    assert _record(2, fundamental_cycles)[0]


def test_criterion_03_class_t():
    assert _record(3, class_t)[0]


def test_criterion_04_embedding_obstructions():
    assert _record(4, obstructions)[0]


def test_criterion_05_cover_algebra():
    assert _record(5, cover_algebra)[0]


def test_criterion_06_extension_bounds():
    assert _record(6, extension_bounds)[0]


def test_criterion_07_invariants():
    assert _record(7, invariant_paths)[0]


def test_criterion_08_bookkeeping():
    assert _record(8, bookkeeping)[0]


def test_criterion_09_certification():
    assert _record(9, certification)[0]


def test_criterion_10_action_table():
    assert _record(10, action_table)[0]


if __name__ == "__main__":
    t0 = time.perf_counter()
    oks = [_record(k, fn)[0] for k, fn in CRITERIA.items()]
    print(f"total {time.perf_counter() - t0:.1f}s; {sum(oks)}/{len(oks)} PASS")
    sys.exit(0 if all(oks) else 1)

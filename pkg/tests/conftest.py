from itertools import product

from hypothesis import HealthCheck, settings

from z2covers.f2_groups import Subspace, _rref, parity

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def all_subspaces(rank):
    """Every subspace of (Z/2)^rank, grown one vector at a time."""
    seen = {()}
    frontier = [()]
    while frontier:
        nxt = []
        for basis in frontier:
            span = Subspace(rank, basis)
            for v in range(1, 1 << rank):
                if span.contains(v):
                    continue
                key = tuple(_rref(list(basis) + [v]))
                if key not in seen:
                    seen.add(key)
                    nxt.append(key)
        frontier = nxt
    return [Subspace(rank, b) for b in sorted(seen, key=lambda b: (len(b), b))]


def brute_count(functionals, rhs, rank):
    return sum(all(parity(f & s) == b for f, b in zip(functionals, rhs)) for s in range(1 << rank))


def kfold_defect(data, chis):
    """sum L_chi_i - L_sum - sum over sigma of ((#i with chi_i(sigma)=1) - sum(sigma)) / 2 * D_sigma."""
    from z2covers.cover_data import L_of
    total = 0
    for c in chis:
        total ^= c
    out = data.zero()
    for c in chis:
        out = out + L_of(data, c)
    out = out - L_of(data, total)
    for s in range(1, 1 << data.rank):
        hits = sum(parity(c & s) for c in chis) - parity(total & s)
        assert hits % 2 == 0
        if hits:
            out = out - data.D_at(s) * (hits // 2)
    return out


def bit_vectors(rank):
    return [list(b) for b in product((0, 1), repeat=rank)]


def pytest_addoption(parser):
    parser.addoption("--update-golden", action="store_true", help="rewrite tests/golden files")


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.RESULTS):
        ok, detail, dt = mod.RESULTS[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'} ({dt:.1f}s) {detail}")

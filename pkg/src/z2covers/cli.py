"""Command line: ``z2covers <group> <command> ...``.

Exit codes: 0 success, 1 failed verification or certification, 2 usage error.
``--json`` prints a report {schema_version, command, input_hash, payload, timing}.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from importlib import resources

from . import construction as cons
from . import cover_data as cd
from . import lens_topology as lt
from . import quotient_sings as qs
from . import rdp_actions as ra
from .divisor_lattice import DivClass
from .f2_groups import DEFAULT_RANK_CAP, RankCapError

__all__ = ["main", "dispatch", "build_parser", "UsageError", "load_demo"]

REPORT_SCHEMA = 1


class UsageError(ValueError):
    pass


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _global_flags(p: argparse.ArgumentParser, top: bool):
    # subparsers repeat the flags with suppressed defaults so either position works
    kw = {} if top else {"default": argparse.SUPPRESS}
    p.add_argument("--json", action="store_true", **kw, help="emit a JSON report")
    p.add_argument("--seed", type=int, **({"default": 0} if top else kw))
    p.add_argument("--rank-cap", type=int, **({"default": DEFAULT_RANK_CAP} if top else kw))
    p.add_argument("--q-cap", type=int, **({"default": 1 << 16} if top else kw))
    p.add_argument("--m-cap", type=int, **({"default": 64} if top else kw))
    p.add_argument("--parallel", action="store_true", **kw,
                   help="accepted for compatibility; loops are vectorized and deterministic")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="z2covers", description="Abelian covers, class T singularities and certificates")
    _global_flags(top, True)
    sub = top.add_subparsers(dest="group", required=True, parser_class=_Parser)

    def cmd(parent, name, **kw):
        p = parent.add_parser(name, **kw)
        _global_flags(p, False)
        return p

    sing = sub.add_parser("sing", help="cyclic quotient singularities")
    ss = sing.add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    for name in ("normalize", "class-t"):
        p = cmd(ss, name, help="type 1/p(a,b)")
        p.add_argument("p", type=int)
        p.add_argument("a", type=int)
        p.add_argument("b", type=int)
    p = cmd(ss, "hj", help="Hirzebruch-Jung chain of 1/p(1,q)")
    p.add_argument("p", type=int)
    p.add_argument("q", type=int)
    p = cmd(ss, "chain", help="type from a chain")
    p.add_argument("b", type=int, nargs="+")
    p = cmd(ss, "cycle", help="fundamental cycle of a chain")
    p.add_argument("b", type=int, nargs="+")
    p = cmd(ss, "family", help="B or Y family member")
    p.add_argument("name", choices=["b", "y"])
    p.add_argument("n", type=int)
    p.add_argument("--convention", choices=sorted(qs.Y_CONVENTIONS), default="table")
    p = cmd(ss, "class-t-values", help="all class T q for a given p")
    p.add_argument("p", type=int)

    lens = sub.add_parser("lens", help="lens spaces")
    ls = lens.add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    for name in ("mcg", "link"):
        p = cmd(ls, name)
        p.add_argument("p", type=int)
        p.add_argument("q", type=int)
    p = cmd(ls, "compare")
    for nm in ("p1", "q1", "p2", "q2"):
        p.add_argument(nm, type=int)

    ob = sub.add_parser("obstruct", help="Milnor lattice embeddings")
    os_ = ob.add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    p = cmd(os_, "embed")
    p.add_argument("kind", help='e.g. "A(3)", "D(4)", "Y(2):qg"')
    p.add_argument("ambient", choices=[m.value for m in lt.AmbientModel])
    p = cmd(os_, "lemmas")
    p.add_argument("--max-n", type=int, default=6)

    cov = sub.add_parser("cover", help="building data")
    cs = cov.add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    p = cmd(cs, "verify")
    p.add_argument("file")
    p.add_argument("--mode", choices=["exhaustive", "sampled", "bounded"], default="exhaustive")
    for name in ("invariants", "ramification"):
        p = cmd(cs, name)
        p.add_argument("file")
    p = cmd(cs, "sufficient")
    p.add_argument("file")
    p.add_argument("--mode", choices=["exhaustive", "bounded"], default="exhaustive")
    p = cmd(cs, "demo")
    p.add_argument("name", choices=["bidouble", "pascal"])

    act = sub.add_parser("actions", help="involutions on rational double points")
    as_ = act.add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    cmd(as_, "list")
    cmd(as_, "check")
    p = cmd(as_, "show")
    p.add_argument("id", type=int)

    p = cmd(sub, "construct", help="build and certify the product construction")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--factor", action="append", required=True, help="a,b,n or a,b,n,l,c")
    p.add_argument("--mode", choices=["bounded", "exhaustive"], default="bounded")
    p.add_argument("--multiplier", type=int, default=1)
    p.add_argument("--out")
    return top


# ---------------------------------------------------------------------------
# handlers return (payload, ok, text)


def _sing(a):
    if a.cmd == "normalize":
        s = qs.normalize(a.p, a.a, a.b)
        return s.to_json(), True, str(s) if isinstance(s, qs.CyclicSing) else "smooth"
    if a.cmd == "class-t":
        s = qs.normalize(a.p, a.a, a.b)
        w = qs.class_t_witness(s)
        payload = {"singularity": s.to_json(), "class_t": w is not None,
                   "witness": None if w is None else w.to_json()}
        text = f"{s if isinstance(s, qs.CyclicSing) else 'smooth'}: " + \
            (f"class T ({w.kind}) d={w.d} n={w.n} a={w.a}" if w else "not class T")
        return payload, True, text
    if a.cmd == "hj":
        ch = qs.hj((a.p, a.q))
        return {"p": a.p, "q": a.q, "chain": ch.to_json()}, True, " ".join(map(str, ch.b))
    if a.cmd == "chain":
        s = qs.from_chain(a.b)
        return {"chain": a.b, **s.to_json()}, True, str(s)
    if a.cmd == "cycle":
        z, z2 = qs.fundamental_cycle(list(a.b))
        return {"chain": a.b, "cycle": z, "Z2": z2}, True, f"Z = {z}, Z^2 = {z2}"
    if a.cmd == "family":
        s, ch = qs.b_family(a.n) if a.name == "b" else qs.y_family(a.n, a.convention)
        z2 = qs.fundamental_cycle(ch)[1]
        payload = {"family": a.name.upper(), "n": a.n, **s.to_json(), "chain": ch.to_json(), "Z2": z2}
        return payload, True, f"{a.name.upper()}_{a.n} = {s}, chain {list(ch.b)}, Z^2 = {z2}"
    if a.cmd == "class-t-values":
        if a.p > a.q_cap:
            raise UsageError(f"p = {a.p} exceeds --q-cap {a.q_cap}")
        vals = qs.class_t_values(a.p)
        payload = {"p": a.p, "values": [{"q": q, **w.to_json()} for q, w in sorted(vals.items())]}
        return payload, True, ", ".join(str(q) for q in sorted(vals)) or "none"
    raise UsageError(a.cmd)


def _lens(a):
    if a.cmd == "mcg":
        r = lt.mcg(lt.LensSpace(a.p, a.q))
        return r.to_json(), True, f"generators: {', '.join(r.generators)}"
    if a.cmd == "link":
        s = qs.normalize(a.p, 1, a.q)
        L = lt.link_of(s)
        return L.to_json(), True, str(L)
    out = lt.compare_links(qs.normalize(a.p1, 1, a.q1), qs.normalize(a.p2, 1, a.q2))
    return out, True, out["note"]


def _obstruct(a):
    if a.cmd == "embed":
        res = lt.embeds(lt.milnor_lattice(a.kind), lt.AmbientModel(a.ambient))
        return res.to_json(), True, f"{a.kind} into {a.ambient}: {'embeds' if res.embeds else 'no embedding'}"
    res = lt.lemma_verdicts(a.max_n)
    lines = [f"{r['lemma']:22} {r['source']:10} -> {r['ambient']:24} embeds={r['embeds']}"
             for r in res["rows"]]
    lines.append(f"control A(1) -> {res['control']['ambient']}: embeds={res['control']['embeds']}")
    return res, res["all_agree"], "\n".join(lines)


def _read_data(path):
    with open(path) as fh:
        obj = json.load(fh)
    if "building_data" in obj:
        obj = obj["building_data"]
    return cd.BuildingData.from_json(obj)


def load_demo(name: str) -> dict:
    return json.loads(resources.files("z2covers").joinpath(f"data/{name}.json").read_text())


def _demo(name, a):
    doc = load_demo(name)
    if name == "bidouble":
        data = cd.BuildingData.from_json(doc["building_data"])
        rep = cd.verify_all(data, "exhaustive")
        inv = cd.invariants(data)
        prof = cd.ramification_profile(data)
        cor = cd.check_cor314(data)
        ok = rep.passed and (inv.K2, inv.chi) == (doc["expected"]["K2"], doc["expected"]["chi"])
        payload = {"demo": name, "verify": rep.to_json(data.rank), "invariants": inv.to_json(),
                   "ramification": prof, "sufficient_conditions": cor, "expected": doc["expected"]}
        text = f"K^2 = {inv.K2}, chi = {inv.chi}; cover condition {'holds' if rep.passed else 'FAILS'}; " \
               f"sufficient conditions {'hold' if cor['passed'] else 'do not hold'}"
        return payload, ok, text
    n, r0 = doc["lattice_n"], doc["subgroup_rank"]
    r = r0 + 1
    zeta = 1  # the last standard basis vector
    D = {1 << (r - 1 - j): DivClass.from_json(e["class"]) for j, e in enumerate(doc["branch"])}
    base = DivClass.from_json(doc["base"])
    M = doc["M_start"]
    while True:
        data = cd.hyperplane_extension(r, n, D, zeta, zeta, base * M)
        cor = cd.check_cor314(data, "exhaustive", cap=a.rank_cap)
        if cor["passed"] or M >= min(doc["M_cap"], a.m_cap):
            break
        M += 1
    rep = cd.verify_all(data, "exhaustive")
    inv = cd.invariants(data)
    payload = {"demo": name, "M": M, "building_data": data.to_json(), "verify": rep.to_json(r),
               "sufficient_conditions": cor, "invariants": inv.to_json(),
               "ramification": cd.ramification_profile(data), "description": doc["description"]}
    text = f"M = {M}; cover condition {'holds' if rep.passed else 'FAILS'}; " \
           f"sufficient conditions {'hold' if cor['passed'] else 'fail'}; K^2 = {inv.K2}, chi = {inv.chi}"
    return payload, rep.passed and cor["passed"], text


def _cover(a):
    if a.cmd == "demo":
        return _demo(a.name, a)
    data = _read_data(a.file)
    if a.cmd == "verify":
        rep = cd.verify_all(data, a.mode, seed=a.seed, cap=a.rank_cap)
        return rep.to_json(data.rank), rep.passed, \
            f"{rep.mode}: {rep.checked} pairs, {rep.failure_count} failures"
    if a.cmd == "invariants":
        inv = cd.invariants(data)
        return inv.to_json(), True, f"K^2 = {inv.K2}, chi = {inv.chi}"
    if a.cmd == "ramification":
        prof = cd.ramification_profile(data, a.rank_cap)
        return prof, True, json.dumps({k: v for k, v in prof.items() if k != "notes"})
    cor = cd.check_cor314(data, a.mode, cap=a.rank_cap)
    return cor, cor["passed"], f"sufficient conditions {'hold' if cor['passed'] else 'fail'}"


def _actions(a):
    if a.cmd == "list":
        rows = [r.to_json() for r in ra.table()]
        lines = [f"{r['id']:>2}.{r['variant']} r={r['r']} {r['X']:>18} [{','.join(r['basis_forms'])}] "
                 f"-> {r['Y']:10} |I|={r['I_x_size']} simple={'yes' if r['simple'] else 'no'} "
                 f"smoothable={'yes' if r['smoothable'] else 'no'}" for r in rows]
        return {"records": rows}, True, "\n".join(lines)
    if a.cmd == "show":
        try:
            recs = ra.record(a.id)
        except KeyError as e:
            raise UsageError(str(e)) from None
        return {"records": [r.to_json() for r in recs]}, True, \
            "\n".join(json.dumps(r.to_json()) for r in recs)
    rep = ra.consistency_check()
    text = f"{rep['checks']} checks, {len(rep['errors'])} errors; simple rows {rep['simple_rows']}; " \
           f"non-smoothable rows {rep['non_smoothable_rows']}; {len(rep['overlaps'])} small-index overlaps"
    return rep, rep["passed"], text


def _parse_factor(text):
    try:
        vals = [int(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"bad factor {text!r}") from None
    if len(vals) == 3:
        return cons.FactorParams(*vals)
    if len(vals) == 5:
        return cons.FactorParams(*vals[:3], bn_split=(vals[3], vals[4]))
    raise UsageError(f"factor needs a,b,n or a,b,n,l,c: {text!r}")


def _construct(a):
    factors = [_parse_factor(f) for f in a.factor]
    inp = cons.ConstructionInput(a.k, factors, M=a.multiplier, mode=a.mode, seed=a.seed, m_cap=a.m_cap)
    cert = cons.certify(inp, rank_cap=a.rank_cap)
    out = cert.to_json()
    if a.out:
        with open(a.out, "w") as fh:
            fh.write(cert.dumps())
    text = (f"rank {cert.data.rank}, M = {cert.M}, passed = {cert.passed}, "
            f"K^2 = {cert.invariants['K2']}, chi = {cert.invariants['chi']}, "
            f"component lower bound = {cert.component_lower_bound}")
    return out, cert.passed, text


HANDLERS = {"sing": _sing, "lens": _lens, "obstruct": _obstruct, "cover": _cover,
            "actions": _actions, "construct": _construct}


def dispatch(argv) -> tuple[int, dict | None, str]:
    """Run one command; returns (exit code, report or None, human text)."""
    argv = list(argv)
    t0 = time.perf_counter()
    try:
        args = build_parser().parse_args(argv)
        payload, ok, text = HANDLERS[args.group](args)
    except (UsageError, qs.NonIsolatedError) as e:
        return 2, None, f"usage error: {e}"
    except (ValueError, KeyError, FileNotFoundError) as e:
        return 2, None, f"invalid input: {e}"
    except (RankCapError, cons.CertificationError, OverflowError, lt.SearchBoundError) as e:
        return 1, None, f"failed: {e}"
    except cd.InvariantMismatch as e:
        return 1, None, f"invariant mismatch: {e}"
    report = {"schema_version": REPORT_SCHEMA, "command": argv,
              "input_hash": hashlib.sha256(_dumps(argv).encode()).hexdigest(),
              "payload": payload, "timing": {"seconds": round(time.perf_counter() - t0, 6)}}
    return (0 if ok else 1), report, text


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    code, report, text = dispatch(argv)
    want_json = "--json" in argv
    if report is None:
        print(text, file=sys.stderr)
        return code
    if want_json:
        print(_dumps(report))
    else:
        color = os.environ.get("Z2COVERS_COLOR") == "1" and sys.stdout.isatty()
        status = "ok" if code == 0 else "FAILED"
        if color:
            status = ("\033[32m" if code == 0 else "\033[31m") + status + "\033[0m"
        print(text)
        print(status)
    return code


if __name__ == "__main__":
    raise SystemExit(main())

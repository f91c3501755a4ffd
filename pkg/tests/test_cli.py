import json
import subprocess
import sys
from pathlib import Path

import pytest

from z2covers.cli import dispatch, main

GOLDEN = Path(__file__).parent / "golden"

DEMOS = {
    "demo_bidouble": ["cover", "demo", "bidouble", "--json"],
    "demo_pascal": ["cover", "demo", "pascal", "--json"],
    "sing_class_t": ["sing", "class-t", "4", "1", "1", "--json"],
    "construct_toy": ["construct", "--k", "1", "--factor", "3,4,2", "--mode", "exhaustive", "--json"],
    "actions_list": ["actions", "list", "--json"],
}


def stable(report):
    out = dict(report)
    out.pop("timing")
    return out


@pytest.mark.parametrize("name", sorted(DEMOS))
def test_golden(name, request):
    code, report, _ = dispatch(DEMOS[name])
    assert code == 0
    path = GOLDEN / f"{name}.json"
    got = json.dumps(stable(report), sort_keys=True, indent=1) + "\n"
    if request.config.getoption("--update-golden"):
        path.write_text(got)
    assert path.read_text() == got


def test_repeat_runs_are_byte_identical():
    a = dispatch(DEMOS["demo_pascal"])[1]
    b = dispatch(DEMOS["demo_pascal"])[1]
    assert json.dumps(stable(a), sort_keys=True) == json.dumps(stable(b), sort_keys=True)


def test_flags_before_or_after_subcommand():
    a = dispatch(["--seed", "3", "sing", "hj", "7", "3"])
    b = dispatch(["sing", "hj", "7", "3", "--seed", "3"])
    assert a[0] == b[0] == 0 and a[1]["payload"] == b[1]["payload"]


def test_class_t_witness():
    code, rep, text = dispatch(["sing", "class-t", "4", "1", "1"])
    assert code == 0 and rep["payload"]["witness"] == {"d": 1, "n": 2, "a": 1, "kind": "T"}
    assert "d=1 n=2 a=1" in text


def test_lemmas_exit_zero():
    code, rep, _ = dispatch(["obstruct", "lemmas", "--max-n", "6"])
    assert code == 0 and rep["payload"]["all_agree"]


def test_construct_split_factor():
    code, rep, _ = dispatch(["construct", "--k", "1", "--factor", "3,6,30", "--mode", "bounded"])
    assert code == 0 and rep["payload"]["component_lower_bound"] == 2


def test_exit_codes(tmp_path):
    assert dispatch(["nope"])[0] == 2
    assert dispatch(["sing", "normalize", "4", "2", "4"])[0] == 2
    assert dispatch(["sing", "class-t-values", "100", "--q-cap", "10"])[0] == 2
    assert dispatch(["construct", "--k", "1", "--factor", "3,4"])[0] == 2
    assert dispatch(["construct", "--k", "1", "--factor", "3,4,2", "--m-cap", "1"])[0] == 1
    # tampered data fails verification
    rep = dispatch(["cover", "demo", "bidouble", "--json"])[1]
    data = rep["payload"]["verify"]
    assert data["passed"]
    from z2covers.cli import load_demo
    doc = load_demo("bidouble")["building_data"]
    doc["L_basis"][0]["class"]["r"] += 1
    f = tmp_path / "bad.json"
    f.write_text(json.dumps(doc))
    assert dispatch(["cover", "verify", str(f)])[0] == 1
    assert dispatch(["cover", "invariants", str(f)])[0] in (0, 1)
    assert dispatch(["cover", "verify", str(tmp_path / "missing.json")])[0] == 2


def test_file_commands(tmp_path):
    out = tmp_path / "cert.json"
    assert dispatch(["construct", "--k", "1", "--factor", "3,4,2", "--out", str(out)])[0] == 0
    cert = json.loads(out.read_text())
    assert cert["passed"]
    for cmd in (["verify"], ["verify", "--mode", "bounded"], ["invariants"], ["sufficient"], ["ramification"]):
        code, rep, _ = dispatch(["cover", cmd[0], str(out), *cmd[1:]])
        assert code == 0, cmd
    code, rep, _ = dispatch(["cover", "invariants", str(out)])
    assert rep["payload"]["K2"] == cert["invariants"]["K2"]


def test_main_prints(capsys):
    assert main(["lens", "mcg", "8", "3"]) == 0
    assert "sigma" in capsys.readouterr().out
    assert main(["sing", "hj", "7", "3", "--json"]) == 0
    assert json.loads(capsys.readouterr().out)["payload"]["chain"] == [3, 2, 2]
    assert main(["bogus"]) == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "z2covers", "sing", "hj", "5", "2"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("3 2")

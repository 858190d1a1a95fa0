import json
import subprocess
import sys

import pytest

from wdwkit import cli
from wdwkit import checks

FAST = ["clifford.anticommutator.relations", "grassmann.car.relations", "geometry.dewitt.signature",
        "hamiltonian.legendre.quadratic_toy", "hyperbolic.green.skew", "hamiltonian.wdw.symmetry"]


def write(tmp_path, obj, name="scenario.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return p


def run(argv, capsys):
    code = cli.main([str(a) for a in argv])
    return code, capsys.readouterr()


def test_list_checks(capsys):
    code, out = run(["list-checks", "--json"], capsys)
    cat = json.loads(out.out)
    assert code == 0
    assert len(cat) >= 30
    ids = [c["id"] for c in cat]
    assert ids == sorted(ids)
    assert {"ccr.commutator.central", "grassmann.car.relations"} <= set(ids)
    assert {c["module"] for c in cat} == {"clifford", "grassmann", "geometry", "hamiltonian",
                                         "hyperbolic", "ccr", "localnets"}


def test_run_pass_and_outputs(tmp_path, capsys):
    sc = write(tmp_path, {"name": "fast", "seed": 3, "checks": FAST})
    code, _ = run(["run", sc, "--out", tmp_path / "out"], capsys)
    assert code == 0
    rep = json.loads((tmp_path / "out" / "report.json").read_text())
    assert [r["id"] for r in rep["body"]["records"]] == FAST
    assert rep["body"]["summary"]["pass"]
    for r in rep["body"]["records"]:
        assert {"id", "relation", "module", "inputs_digest", "seed", "parameters", "measured",
                "tolerance", "order_estimate", "pass"} <= set(r)
    assert "timestamp" in rep["meta"]
    assert "| check |" in (tmp_path / "out" / "summary.md").read_text()


def test_zero_tolerance_fails(tmp_path, capsys):
    sc = write(tmp_path, {"name": "strict", "checks": ["hyperbolic.green.inverse"],
                          "tolerances": {"*": 0}})
    code, out = run(["run", sc], capsys)
    assert code == 1
    rec = json.loads(out.out)["body"]["records"][0]
    assert rec["pass"] is False and rec["tolerance"] == 0


def test_determinism(tmp_path, capsys):
    sc = write(tmp_path, {"name": "det", "seed": 11, "checks": FAST})
    bodies = []
    for extra in ([], [], ["--parallel", "--workers", "2"]):
        code, out = run(["run", sc] + extra, capsys)
        assert code == 0
        bodies.append(json.dumps(json.loads(out.out)["body"], sort_keys=True))
    assert bodies[0] == bodies[1] == bodies[2]


def test_seed_changes_digest(tmp_path, capsys):
    a = json.loads(run(["run", write(tmp_path, {"name": "a", "seed": 1, "checks": FAST[:1]})], capsys)[1].out)
    b = json.loads(run(["run", write(tmp_path, {"name": "a", "seed": 2, "checks": FAST[:1]})], capsys)[1].out)
    assert a["body"]["records"][0]["inputs_digest"] != b["body"]["records"][0]["inputs_digest"]


@pytest.mark.parametrize("scenario", [
    {"checks": FAST},                                       # missing name
    {"name": "x", "checks": FAST, "surprise": 1},           # unknown key
    {"name": "x", "checks": ["no.such.check"]},             # unknown id
    {"name": "x", "modules": ["astrology"]},                # bad module
    {"name": "x", "checks": FAST, "tolerances": {"clifford.anticommutator.relations": -1}},
    {"name": "x", "checks": FAST, "parameters": {"hyperbolic.green.skew": {"bogus": 1}}},
    {"name": "x", "checks": FAST, "field_dumps": [{"name": "g", "lattice": "missing.json"}]},
])
def test_config_errors(tmp_path, capsys, scenario):
    code, out = run(["run", write(tmp_path, scenario)], capsys)
    assert code == 2
    assert "configuration error" in out.err


def test_missing_and_malformed_files(tmp_path, capsys):
    assert run(["run", tmp_path / "nope.json"], capsys)[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["run", bad], capsys)[0] == 2


def test_module_error_surfaces(tmp_path, capsys, monkeypatch):
    def boom(*args, **kw):
        raise RuntimeError("exploded")

    c = checks.REGISTRY["clifford.index.lowering"]
    monkeypatch.setitem(checks.REGISTRY, c.id, checks.Check(c.id, c.relation, c.module, boom,
                                                            c.tolerance, c.min_order, c.defaults))
    code, out = run(["run", write(tmp_path, {"name": "err", "checks": [c.id]})], capsys)
    assert code == 1
    rec = json.loads(out.out)["body"]["records"][0]
    assert rec["id"] == c.id and "exploded" in rec["error"]


def test_field_dump(tmp_path, capsys):
    write(tmp_path, {"h": 0.125}, "lat.json")
    sc = write(tmp_path, {"name": "dump", "checks": FAST[:1],
                          "field_dumps": [{"name": "g", "lattice": "lat.json", "mode": "retarded"}]})
    assert run(["run", sc, "--out", tmp_path / "o"], capsys)[0] == 0
    lines = (tmp_path / "o" / "g.csv").read_text().splitlines()
    assert lines[0] == "t,x,u0" and len(lines) > 100


def test_module_subcommands(tmp_path, capsys):
    code, out = run(["clifford", "--n", "3", "--dump", tmp_path / "g.json"], capsys)
    assert code == 0 and json.loads(out.out)["n1"] == 4
    assert json.loads((tmp_path / "g.json").read_text())["n1"] == 4
    code, out = run(["grassmann", "car-check", "--n1", "2", "--n2", "1", "--sites", "2"], capsys)
    assert code == 0 and all(r["status"] == "pass" for r in json.loads(out.out))
    assert run(["grassmann", "car-check", "--n1", "4", "--n2", "4"], capsys)[0] == 2
    code, out = run(["geometry", "signature", "--config", cli.bundled("metric-grid.json")], capsys)
    assert code == 0 and json.loads(out.out)["all_lorentzian"]
    code, out = run(["hamiltonian", "check", "--sector", "ym", "--config", cli.bundled("hamiltonian.json")], capsys)
    assert code == 0 and json.loads(out.out)[0]["sector"] == "ym"
    lat = write(tmp_path, {"h": 0.0625}, "lat.json")
    code, out = run(["hyperbolic", "green", "--mode", "retarded", "--config", lat, "--csv", tmp_path / "g.csv"], capsys)
    assert code == 0 and json.loads(out.out)["support_violation"] == 0.0
    assert (tmp_path / "g.csv").exists()


def test_bundled_scenarios_valid():
    for name in ("full-suite.json",):
        scenario, _ = cli.load_scenario(name)
        assert len(cli.scenario_checks(scenario)) == len(checks.REGISTRY)


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "wdwkit", "list-checks"], capture_output=True, text=True)
    assert out.returncode == 0 and "clifford.anticommutator.relations" in out.stdout

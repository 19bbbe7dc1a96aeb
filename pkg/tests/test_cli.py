import io
import json
import math
import subprocess
import sys

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gkp_transduction.cli import (
    HEADER,
    SweepRecord,
    Task,
    emit_csv,
    generate_code_list,
    main,
    parse_csv,
    parse_eta_grid,
    run_task,
    run_tasks,
)
from gkp_transduction.lattice import RationalEfficiency
from gkp_transduction.states import delta_from_nbar


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_code_list_order():
    codes = generate_code_list(1000)
    assert codes[:4] == [(2, 1, 1), (2, 1, 2), (2, 2, 1), (3, 1, 1)]
    assert len(set(codes)) == 1000
    assert all(math.gcd(a, b) == 1 and d1 >= 2 for d1, a, b in codes)
    keys = [(sum(c), c) for c in codes]
    assert keys == sorted(keys)
    with pytest.raises(ValueError):
        generate_code_list(0)


def test_eta_grid():
    assert parse_eta_grid("0.1:0.2:0.05") == [0.1, 0.15, 0.2]
    assert parse_eta_grid("1/3") == [RationalEfficiency(1, 3)]
    auto = parse_eta_grid("0.3:0.4:auto", nbar_max=10)
    assert auto[0] == 0.3 and all(b > a for a, b in zip(auto, auto[1:]))


floats = st.floats(0.0, 1.0, allow_nan=False)


@given(floats, floats, floats, st.one_of(st.none(), st.floats(0.01, 0.99)), st.integers(2, 9))
def test_csv_round_trip(eta, fe, ic, delta2, d1):
    rec = SweepRecord(eta=eta, code=f"{d1},1,2", nbar1=3.0, nbar2=0.0 if delta2 is None else 2.5,
                      delta1=0.3779, delta2=delta2, fe=fe, fe_comp=1 - fe, coherent_info=ic - 0.5,
                      tail_mass=1e-7 * fe, wall_time=0.01, floor_sensitivity=0.0)
    buf = io.StringIO()
    emit_csv([rec, rec], buf)
    assert buf.getvalue().splitlines()[0].split(",") == HEADER
    assert parse_csv(buf.getvalue()) == [rec, rec]


def test_fidelity_headline(capsys):
    code, out, _ = run(["fidelity", "--eta", "1/3", "--code", "2,1,1", "--nbar", "3"], capsys)
    assert code == 0
    rec = parse_csv(out)[0]
    assert 0.95 <= rec.fe <= 1.0
    assert rec.code == "2,1,1"


def test_fidelity_json_and_vacuum(capsys):
    code, out, _ = run(["fidelity", "--eta", "0.5", "--nbar", "3,0", "--format", "json"], capsys)
    assert code == 0
    doc = json.loads(out)
    rec = doc["records"][0]
    assert rec["delta2"] is None and abs(rec["coherent_info"]) < 1e-6
    assert doc["summary"][0]["code"] == "2,1,1"


@pytest.mark.parametrize("argv,flag", [
    (["fidelity", "--eta", "1.5"], "--eta"),
    (["fidelity", "--eta", "1/3", "--code", "2,2,2"], "--code"),
    (["fidelity", "--eta", "1/3", "--nbar", "-1"], "--nbar"),
    (["ideal", "--eta", "0.3"], "--eta"),
    (["ideal", "--eta", "1/3", "--dims", "3,1"], "--dims"),
    (["sweep", "--eta", "0.4:0.3:0.01"], "--eta"),
    (["approx", "--eta", "2"], "--eta"),
])
def test_bad_flags_exit_2(capsys, argv, flag):
    code, _, err = run(argv, capsys)
    assert code == 2
    assert flag in err


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["fidelity", "--eta", "1/3", "--method", "bogus"])
    assert exc.value.code == 2


def test_sweep_deterministic_and_ordered(tmp_path, capsys):
    argv = ["sweep", "--eta", "0.3,0.5", "--nbar", "2,3", "--codes", "3"]
    outs = []
    for i, jobs in enumerate(("1", "2")):
        path = tmp_path / f"s{i}.csv"
        assert main([*argv, "--jobs", jobs, "--out", str(path)]) == 0
        outs.append(parse_csv(path.read_text()))
        summary = json.loads((tmp_path / f"s{i}.summary.json").read_text())
        assert {(s["eta"], s["nbar1"]) for s in summary} == {(e, n) for e in (0.3, 0.5) for n in (2.0, 3.0)}
    a, b = outs
    assert len(a) == 12
    assert [r.deterministic() for r in a] == [r.deterministic() for r in b]
    assert [(r.nbar1, r.eta, r.code) for r in a][:4] == [
        (2.0, 0.3, "2,1,1"), (2.0, 0.3, "2,1,2"), (2.0, 0.3, "2,2,1"), (2.0, 0.5, "2,1,1")]


def test_run_tasks_keeps_input_order():
    tasks = [Task(e, (2, 1, 1), delta_from_nbar(2), delta_from_nbar(2), None, None, 1e-12, "input")
             for e in (0.7, 0.2, 0.5, 0.3)]
    got = [r.eta for r in run_tasks(tasks, 2)]
    assert got == [0.7, 0.2, 0.5, 0.3]
    assert run_task(tasks[0]).deterministic() == next(run_tasks(tasks[:1], 1)).deterministic()


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"eta": "1/3", "nbar": 3, "code": "2,1,1"}))
    code, out, _ = run(["fidelity", "--config", str(cfg)], capsys)
    assert code == 0
    base = parse_csv(out)[0]
    code, out, _ = run(["fidelity", "--config", str(cfg), "--nbar", "5"], capsys)
    assert parse_csv(out)[0].nbar1 == 5 and base.nbar1 == 3
    cfg.write_text(json.dumps({"bogus": 1}))
    code, _, err = run(["fidelity", "--eta", "1/3", "--config", str(cfg)], capsys)
    assert code == 2 and "--config" in err


def test_ideal_bell_table(capsys):
    code, out, _ = run(["ideal", "--eta", "1/2"], capsys)
    assert code == 0
    doc = json.loads(out)
    (bell,) = doc["outputs"]
    assert {(t["mu3"], t["mu4"]) for t in bell["terms"]} == {(0, 0), (1, 1)}
    assert bell["amplitude"] == "1/sqrt(2)"
    assert doc["report"]["ok"]


def test_approx(capsys):
    code, out, _ = run(["approx", "--eta", "0.37", "--d", "2"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["found"]
    assert doc["m"] % 2 == 1 and doc["n"] % 2 == 1
    assert doc["error"] < doc["bound"]
    # n <= 4 with n = 1 (mod 3) leaves only 1/4, too far from 0.9
    code, out, _ = run(["approx", "--eta", "0.9", "--d", "3", "--n-max", "4"], capsys)
    assert code == 1 and not json.loads(out)["found"]


def test_codes_state_tmss_qnd(capsys):
    code, out, _ = run(["codes", "--count", "3"], capsys)
    assert json.loads(out) == [[2, 1, 1], [2, 1, 2], [2, 2, 1]]
    code, out, _ = run(["codes", "--eta", "1/5", "--max-d1", "4", "--max-d2", "4"], capsys)
    dims = {(m["d1"], m["d2"]) for m in json.loads(out)}
    assert {(2, 2), (4, 1), (2, 1)} <= dims
    code, out, _ = run(["state", "--d", "2", "--mu", "1", "--delta", "0.4"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["cutoff"] == 50 and len(doc["amplitudes"]) == 50
    code, out, _ = run(["state", "--delta", "0.4", "--format", "csv"], capsys)
    lines = out.splitlines()
    assert lines[0] == "n,re,im" and len(lines) == 51
    code, out, _ = run(["tmss", "--m", "3", "--k", "1", "--factors", "1,3,1,1"], capsys)
    assert code == 0
    code, out, _ = run(["qnd", "--eta", "0.5"], capsys)
    assert code == 0


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "gkp_transduction", "codes", "--count", "1"],
                         capture_output=True, text=True, check=True)
    assert json.loads(res.stdout) == [[2, 1, 1]]


@pytest.mark.slow
def test_sweep_peak_near_one_third(tmp_path):
    path = tmp_path / "s.csv"
    assert main(["sweep", "--eta", "0.30:0.36:0.002", "--nbar", "10", "--codes", "20",
                 "--out", str(path)]) == 0
    records = parse_csv(path.read_text())
    assert len(records) == 31 * 20
    best = {}
    for r in records:
        best[r.eta] = max(best.get(r.eta, 0.0), r.fe)
    peak = max(best, key=best.get)
    grid = sorted(best)
    assert peak == min(grid, key=lambda e: abs(e - 1 / 3))

import csv
import json
import math

import numpy as np
import pytest

from ptstable import Atom, Pareto, RosinskiMeasure, TSParams, cli, levy, moments, sim

PARETO3 = TSParams(0.5, 1.0, 0, RosinskiMeasure(1, [((1.0,), Pareto(1.0, 3.0, 1.0)),
                                                    ((-1.0,), Atom(2.0, 0.5))]))


@pytest.fixture
def pfile(tmp_path):
    def write(params_or_dict, name="p.json"):
        path = tmp_path / name
        obj = params_or_dict.to_dict() if isinstance(params_or_dict, TSParams) else params_or_dict
        path.write_text(obj if isinstance(obj, str) else json.dumps(obj))
        return str(path)
    return write


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_validate_valid_and_invalid(pfile, tmp_path, capsys):
    out = tmp_path / "v.json"
    assert cli.main(["validate", "-i", pfile(PARETO3), "-o", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["valid"] and rep["violations"] == [] and rep["proper"] is True
    bad = PARETO3.to_dict()
    bad["measure"]["rays"][0]["profile"]["rho"] = 0.3
    assert cli.main(["validate", "-i", pfile(bad, "bad.json")]) == 1
    rep = json.loads(capsys.readouterr().out)
    assert not rep["valid"] and rep["violations"]


def test_numbers_may_be_strings(pfile, tmp_path):
    d = PARETO3.to_dict()
    d["alpha"] = "0.5"
    d["measure"]["rays"][0]["profile"]["rho"] = "3"
    assert cli.main(["validate", "-i", pfile(d)]) == 0


def test_parse_failures_exit_2(pfile, tmp_path):
    assert cli.main(["validate", "-i", str(tmp_path / "missing.json")]) == 2
    assert cli.main(["validate", "-i", pfile("{not json", "x.json")]) == 2
    assert cli.main(["validate", "-i", pfile({"alpha": 0.5}, "y.json")]) == 2
    d = PARETO3.to_dict()
    d["p"] = "one"
    assert cli.main(["validate", "-i", pfile(d, "z.json")]) == 2
    assert cli.main(["tail", "-i", pfile(PARETO3), "--grid", "1:2"]) == 2
    assert cli.main(["frobnicate"]) == 2


def test_invalid_measure_exits_1_for_computations(pfile):
    bad = PARETO3.to_dict()
    bad["measure"]["rays"][0]["profile"]["rho"] = 0.3
    assert cli.main(["cumulants", "-i", pfile(bad)]) == 1


def test_cumulants_csv(pfile, tmp_path):
    out = tmp_path / "c.csv"
    assert cli.main(["cumulants", "-i", pfile(PARETO3), "-o", str(out), "--max-order", "3"]) == 0
    rows = read_csv(out)
    assert rows[0] == ["coordinate", "order", "status", "cumulant"]
    assert [r[2] for r in rows[1:]] == ["finite", "finite", "infinite"]
    assert float(rows[1][3]) == moments.cumulant(PARETO3, [1])
    assert float(rows[2][3]) == moments.cumulant(PARETO3, [2])
    assert rows[3][3] == ""


def test_tail_csv_round_trips_floats(pfile, tmp_path):
    out = tmp_path / "t.csv"
    assert cli.main(["tail", "-i", pfile(PARETO3), "-o", str(out), "--grid", "0.1:10:5:log",
                     "--cone", "0"]) == 0
    rows = read_csv(out)
    assert rows[0] == ["r", "tail"] and len(rows) == 6
    r = np.array([float(x[0]) for x in rows[1:]])
    np.testing.assert_allclose(r, np.geomspace(0.1, 10, 5), rtol=1e-15)
    vals = [float(x[1]) for x in rows[1:]]
    assert vals == list(levy.tail(PARETO3, r, [0]))


def test_transform_writes_equivalent_params(pfile, tmp_path):
    src = TSParams(1.5, 1.0, 0, RosinskiMeasure.atom(1.0))
    out, rep = tmp_path / "low.json", tmp_path / "rep.json"
    code = cli.main(["transform", "-i", pfile(src), "--op", "lower-alpha", "--alpha", "0.5",
                     "-o", str(out), "--report", str(rep), "--check-tol", "1e-5"])
    assert code == 0
    low = cli.load_params(str(out))
    assert low.alpha == 0.5
    assert json.loads(rep.read_text())["passed"]
    assert cli.main(["transform", "-i", pfile(src), "--op", "raise-p", "-o", str(out)]) == 2
    assert cli.main(["compare", "-i", pfile(src), "--other", str(out), "--check-tol", "1e-5"]) == 0


def test_compare_detects_different_laws(pfile, capsys):
    a = pfile(TSParams(0.5, 1.0, 0, RosinskiMeasure.atom(1.0)), "a.json")
    b = pfile(TSParams(0.5, 1.0, 0, RosinskiMeasure.atom(1.0, 1.01)), "b.json")
    assert cli.main(["compare", "-i", a, "--other", b]) == 1
    rep = json.loads(capsys.readouterr().out)
    # deviations are relative to the larger of the two tails
    assert rep["max_rel_dev"] == pytest.approx(0.01 / 1.01, rel=1e-9)


def test_simulate_is_deterministic(pfile, tmp_path):
    a, b = tmp_path / "a.bin", tmp_path / "b.bin"
    args = ["simulate", "-i", pfile(PARETO3), "--n", "500", "--seed", "4", "--epsilon", "0.01"]
    assert cli.main(args + ["-o", str(a)]) == 0
    assert cli.main(args + ["-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    x = sim.read_batch(a)
    assert x.shape == (500, 1)
    ref = sim.sample(PARETO3, sim.SimConfig(0.01, 500, 4)).values
    assert np.array_equal(x, ref)


def test_doa_command(pfile, capsys):
    P = TSParams(0.5, 1.0, 0, RosinskiMeasure(1, [((1.0,), Pareto(300.0, 1.5, 1.0))]))
    assert cli.main(["doa", "-i", pfile(P), "--n-values", "100,1000", "--m", "50"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["gamma"] == 1.5 and len(rep["distances"]) == 2
    assert all(math.isfinite(d) for d in rep["distances"])
    assert cli.main(["doa", "-i", pfile(PARETO3)]) == 1


def test_params_round_trip(tmp_path):
    path = tmp_path / "rt.json"
    cli.save_params(PARETO3, str(path))
    assert cli.load_params(str(path)) == PARETO3

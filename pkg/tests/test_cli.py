import csv
import json

import numpy as np
import pytest

from zonoest.cli import METRIC_COLUMNS, main, run_scenario
from zonoest.sets import set_from_dict


def read_metrics(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


@pytest.fixture(scope="module")
def example1_out(tmp_path_factory):
    out = tmp_path_factory.mktemp("ex1")
    assert main(["run", "--scenario", "example1", "--out", str(out), "--samples", "2000"]) == 0
    return out


def test_metrics_schema(example1_out):
    with open(example1_out / "metrics.csv") as fh:
        header = fh.readline().strip().split(",")
    assert tuple(header) == METRIC_COLUMNS
    rows = read_metrics(example1_out / "metrics.csv")
    assert len(rows) == 25
    assert {r["method"] for r in rows} == {"RRSR", "D-RRSR", "D-ZB", "D-CZ", "COMB"}
    assert all(r["status"] == "ok" for r in rows)
    assert all(float(r["containment_fraction"]) == 1.0 for r in rows)


def test_initial_volume_column(example1_out):
    for r in read_metrics(example1_out / "metrics.csv"):
        if r["k"] == "0":
            v, s = float(r["mc_volume"]), float(r["mc_stderr"])
            assert abs(v - 0.12) <= 3 * s


def test_sets_and_polygons_written(example1_out):
    for k in range(5):
        for m in ("RRSR", "D-RRSR", "D-ZB", "D-CZ", "COMB"):
            S = set_from_dict(json.loads((example1_out / "sets" / f"{k}_{m}.json").read_text()))
            assert S.n == 2
            with open(example1_out / "polygons" / f"{k}_{m}.csv") as fh:
                rows = list(csv.reader(fh))
            assert rows[0] == ["x", "y"] and len(rows) > 3
            poly = np.array(rows[1:], float)
            assert np.isfinite(poly).all()


def test_method_subset_and_steps(tmp_path):
    code = main(["run", "--scenario", "example1", "--out", str(tmp_path), "--methods", "RRSR,D-CZ",
                 "--steps", "2", "--samples", "300"])
    assert code == 0
    rows = read_metrics(tmp_path / "metrics.csv")
    assert [(r["k"], r["method"]) for r in rows] == [("0", "RRSR"), ("0", "D-CZ"), ("1", "RRSR"), ("1", "D-CZ")]


def test_check_command(capsys, tmp_path):
    assert main(["check", "--scenario", "unicycle"]) == 0
    assert "nx=3" in capsys.readouterr().out
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"model": "example1"}))
    assert main(["check", "--scenario", str(bad)]) == 2
    unknown = tmp_path / "unknown.json"
    unknown.write_text(json.dumps({"model": "nope", "X0": {"type": "box", "lo": [0], "hi": [1]},
                                   "W": {"type": "box", "lo": [0], "hi": [1]},
                                   "V": {"type": "box", "lo": [0], "hi": [1]}}))
    assert main(["check", "--scenario", str(unknown)]) == 4


def test_run_errors(tmp_path):
    assert main(["run", "--scenario", str(tmp_path / "nope.json"), "--out", str(tmp_path / "o")]) == 2
    assert main(["run", "--scenario", "example1", "--out", str(tmp_path), "--methods", "EKF"]) == 2
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert run_scenario("example1", blocker / "sub", {"steps": 1, "samples": 10}) == 3


def test_identical_seeds_give_identical_metrics(tmp_path):
    args = ["run", "--scenario", "example1", "--steps", "3", "--samples", "500", "--seed", "4"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    strip = lambda rows: [{k: v for k, v in r.items() if k != "wall_time_s"} for r in rows]
    a = strip(read_metrics(tmp_path / "a" / "metrics.csv"))
    b = strip(read_metrics(tmp_path / "b" / "metrics.csv"))
    assert a == b

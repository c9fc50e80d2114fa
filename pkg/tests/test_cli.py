import csv
import json
import xml.etree.ElementTree as ET
from pathlib import Path

import pytest

from mtlweight.cli import DELTA_M_HEADER, SIM_HEADER, WEIGHTS_HEADER, main
from mtlweight.plot import line_chart, nice_ticks

SMALL = {
    "seed": 3,
    "data": {"n": 200, "d": 4, "shared_rank": 2,
             "tasks": [{"name": "a", "margin": 2.0}, {"name": "b", "margin": 0.5, "positive_rate": 0.3}]},
    "train": {"epochs": 3, "batch_size": 32, "learning_rate": 0.2, "hidden_dims": [8]},
    "sim": {"epochs": 5, "tasks": [{"name": "x"}, {"name": "y"}, {"name": "slow", "rate": 0.05}]},
}


@pytest.fixture
def cfg_path(tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(SMALL))
    return p


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_gen_data(tmp_path, cfg_path):
    cfg = dict(SMALL, data=dict(SMALL["data"], n=100))
    cfg_path.write_text(json.dumps(cfg))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["gen-data", "--config", str(cfg_path), "--out", str(a)]) == 0
    assert main(["gen-data", "--config", str(cfg_path), "--out", str(b)]) == 0
    assert len(a.read_text().splitlines()) == 101
    assert a.read_bytes() == b.read_bytes()
    assert read_rows(a)[0] == ["x_0", "x_1", "x_2", "x_3", "y_a", "y_b"]


def test_seed_override_changes_data(tmp_path, cfg_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["gen-data", "--config", str(cfg_path), "--out", str(a)])
    main(["gen-data", "--config", str(cfg_path), "--out", str(b), "--seed", "4"])
    assert a.read_bytes() != b.read_bytes()


@pytest.mark.parametrize("cfg, needle", [
    ({"data": {"foo": 1}}, "data.foo"),
    ({"bogus": 1}, "bogus"),
    ({"seed": -1}, "seed"),
    ({"data": {"d": 4, "shared_rank": 5}}, "shared_rank"),
    ({"weighting": {"alpha": 0.9}}, "alpha"),
])
def test_bad_config_exits_2(tmp_path, capsys, cfg, needle):
    p = tmp_path / "c.json"
    p.write_text(json.dumps(cfg))
    assert main(["gen-data", "--config", str(p), "--out", str(tmp_path / "x.csv")]) == 2
    assert needle in capsys.readouterr().err


def test_io_errors_exit_3(tmp_path):
    assert main(["gen-data", "--config", str(tmp_path / "missing.json")]) == 3
    assert main(["delta-m", "--data", str(tmp_path / "missing.csv")]) == 3


def test_compare_outputs(tmp_path, cfg_path):
    out = tmp_path / "run"
    assert main(["compare", "--config", str(cfg_path), "--out", str(out)]) == 0
    weights = read_rows(out / "weights.csv")
    assert weights[0] == WEIGHTS_HEADER
    assert len(weights) == 1 + 3 * 3 * 2
    dm = read_rows(out / "delta_m.csv")
    assert dm[0] == DELTA_M_HEADER and [r[0] for r in dm[1:]] == ["a", "b", "TOTAL"]
    values = []
    for task, stl, mtl, d in dm[1:-1]:
        assert float(d) == pytest.approx((float(mtl) - float(stl)) / float(stl), rel=1e-7)
        values.append(float(d))
    assert float(dm[-1][3]) == pytest.approx(sum(values) / len(values), rel=1e-7)
    summary = (out / "summary.txt").read_text()
    assert "validation" in summary and "total delta_m" in summary


def test_compare_on_csv_input(tmp_path, cfg_path):
    data = tmp_path / "d.csv"
    main(["gen-data", "--config", str(cfg_path), "--out", str(data)])
    out = tmp_path / "run"
    assert main(["compare", "--config", str(cfg_path), "--data", str(data), "--out", str(out)]) == 0
    assert len(read_rows(out / "delta_m.csv")) == 4


def test_compare_deterministic(tmp_path, cfg_path):
    for name in ("r1", "r2"):
        main(["compare", "--config", str(cfg_path), "--out", str(tmp_path / name)])
    for f in ("weights.csv", "delta_m.csv", "summary.txt"):
        assert (tmp_path / "r1" / f).read_bytes() == (tmp_path / "r2" / f).read_bytes()


def test_simulate(tmp_path, cfg_path):
    out = tmp_path / "sim"
    assert main(["simulate", "--config", str(cfg_path), "--out", str(out)]) == 0
    rows = read_rows(out / "trajectory.csv")
    assert rows[0] == SIM_HEADER
    assert len(rows) == 1 + 2 * (5 + 1) * 3
    by = {(r[0], r[1], r[2]): r for r in rows[1:]}
    for e in range(6):
        x, y = by[("deepchest", str(e), "x")], by[("deepchest", str(e), "y")]
        assert x[3:6] == y[3:6]
    assert all(r[4] == "" and r[6] == "sim" for r in rows[1:])


def test_plot(tmp_path, cfg_path):
    main(["compare", "--config", str(cfg_path), "--out", str(tmp_path / "run")])
    svg = tmp_path / "w.svg"
    assert main(["plot", "--data", str(tmp_path / "run" / "weights.csv"), "--out", str(svg)]) == 0
    root = ET.parse(svg).getroot()
    assert len(root.findall("{http://www.w3.org/2000/svg}polyline")) == 3 * 2


def test_plot_empty(tmp_path):
    data = tmp_path / "w.csv"
    data.write_text(",".join(WEIGHTS_HEADER) + "\n")
    svg = tmp_path / "w.svg"
    assert main(["plot", "--data", str(data), "--out", str(svg)]) == 0
    assert "no data" in svg.read_text()
    ET.parse(svg)


def test_plot_bad_schema(tmp_path):
    data = tmp_path / "w.csv"
    data.write_text("epoch,weight\n0,1\n")
    assert main(["plot", "--data", str(data), "--out", str(tmp_path / "w.svg")]) == 2


def write_table(tmp_path, body):
    p = tmp_path / "t.csv"
    p.write_text("task,mtl_loss,stl_loss\n" + body)
    return p


def test_delta_m_single_row(tmp_path, capsys):
    assert main(["delta-m", "--data", str(write_table(tmp_path, "a,0.5,0.5\n"))]) == 0
    out = capsys.readouterr().out.split()
    assert out == ["a", "0.00", "total", "0.00"]


def test_delta_m_zero_baseline(tmp_path, capsys):
    assert main(["delta-m", "--data", str(write_table(tmp_path, "a,0.5,0.5\nb,0.1,0\n"))]) == 2
    assert "'b'" in capsys.readouterr().err


@pytest.mark.parametrize("body", ["a,0.5\n", "a,x,0.5\n", ""])
def test_delta_m_malformed(tmp_path, body):
    assert main(["delta-m", "--data", str(write_table(tmp_path, body))]) == 2


def test_delta_m_fixture(capsys):
    fixture = Path(__file__).parent / "fixtures" / "chest_losses.csv"
    assert main(["delta-m", "--data", str(fixture)]) == 0
    assert capsys.readouterr().out.splitlines()[-1].split() == ["total", "-0.44"]


def test_nice_ticks():
    assert nice_ticks(0, 10) == [0, 2, 4, 6, 8, 10]
    assert nice_ticks(0, 1) == [0, 0.2, 0.4, 0.6, 0.8, 1.0]


def test_line_chart_escapes_labels():
    svg = line_chart({"a<b": [(0, 1), (1, 2)]}, "t & t", "x", "y")
    root = ET.fromstring(svg)
    assert len(root.findall("{http://www.w3.org/2000/svg}polyline")) == 1

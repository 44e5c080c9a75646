import csv
import json

import pytest
from click.testing import CliRunner

from vqembed.cli import main


@pytest.fixture
def write_config(tmp_path):
    def _write(cfg, name="cfg.json"):
        path = tmp_path / name
        path.write_text(json.dumps(cfg))
        return str(path)

    return _write


TFI5 = {"model": {"type": "tfi", "graph": "er:5:0.5", "coefficients": {"h": 1.0, "J": 1.0}}, "seed": 2}


def _invoke(*args):
    return CliRunner().invoke(main, list(args), catch_exceptions=False)


def test_solve_prints_sandwich(write_config):
    cfg = dict(TFI5, schemes=["anderson", "e12_prime", "e12_pairwise"])
    res = _invoke("--config", write_config(cfg), "solve")
    assert res.exit_code == 0, res.output
    rec = json.loads(res.output)
    vals = [rec["relaxations"][s]["value"] for s in cfg["schemes"]]
    assert vals == sorted(vals)
    assert vals[-1] <= rec["exact_energy"] + 1e-6
    assert rec["command"] == "solve"


def test_solve_is_deterministic(write_config):
    path = write_config(dict(TFI5, layout="uniform:2"))
    a = json.loads(_invoke("--config", path, "solve").output)
    b = json.loads(_invoke("--config", path, "solve").output)
    assert a["relaxations"] == {k: dict(v, timing=a["relaxations"][k]["timing"]) for k, v in b["relaxations"].items()}


def test_invalid_config_exits_nonzero(write_config):
    res = CliRunner().invoke(main, ["--config", write_config({"model": {"type": "potts"}}), "solve"])
    assert res.exit_code != 0
    assert "config error" in res.output


def test_missing_config_is_a_usage_error():
    res = CliRunner().invoke(main, ["solve"])
    assert res.exit_code == 2


def test_single_weight_draw_rejected(write_config):
    res = CliRunner().invoke(main, ["--config", write_config(dict(TFI5, draws=1)), "weight-robustness"])
    assert res.exit_code != 0


def test_weight_robustness_writes_csv(write_config, tmp_path):
    out = tmp_path / "out"
    res = _invoke("--config", write_config(dict(TFI5, draws=2)), "--out", str(out), "weight-robustness")
    assert res.exit_code == 0, res.output
    rows = list(csv.DictReader(open(out / "weight_robustness.csv")))
    assert len(rows) == 2
    rec = json.loads((out / "weight_robustness.json").read_text())
    assert rec["spread"] < 1e-5


def test_empty_graph_has_no_gap(write_config):
    cfg = {"model": {"type": "tfi", "graph": "er:4:0"}, "restarts": 1}
    rec = json.loads(_invoke("--config", write_config(cfg), "entanglement-graph").output)
    assert rec["verdict"] == "no-gap"


def test_pair_scan_rows(write_config, tmp_path):
    out = tmp_path / "scan"
    cfg = {"model": {"type": "xxz", "graph": "er:4:0.6"}, "seed": 1, "restarts": 1}
    res = _invoke("--config", write_config(cfg), "--out", str(out), "pair-scan")
    assert res.exit_code == 0, res.output
    rows = list(csv.DictReader(open(out / "pair_scan.csv")))
    assert len(rows) == 6
    base = json.loads((out / "pair_scan.json").read_text())["singleton_value"]
    assert all(float(r["value_by_correlation"]) >= base - 1e-6 for r in rows)


def test_ieff_batch_and_successive(write_config, tmp_path):
    out = tmp_path / "batch"
    cfg = {"model": {"type": "tfi", "graph": "er:4:0.7"}, "instances": 2, "k": 2}
    res = _invoke("--config", write_config(cfg), "--out", str(out), "ieff-batch")
    assert res.exit_code == 0, res.output
    rec = json.loads((out / "ieff_batch.json").read_text())
    assert rec["statistics"]["instances"] == 2
    cfg = {"model": {"type": "tfi", "graph": "er:4:0.7"}, "layout": {"successive": {"max": 2}}}
    lines = _invoke("--config", write_config(cfg, "s.json"), "successive").output.strip().splitlines()
    assert len(lines) == 2 and all(json.loads(line) for line in lines)


def test_optimize_clusters_command(write_config):
    cfg = {"model": {"type": "hubbard", "graph": "er:4:0.7"}, "k": 2}
    rec = json.loads(_invoke("--config", write_config(cfg), "optimize-clusters").output)
    assert sorted(s for c in rec["clusters"] for s in c) == [0, 1, 2, 3]


def test_seed_override(write_config):
    path = write_config(dict(TFI5, schemes=["anderson"]))
    a = json.loads(_invoke("--config", path, "--seed", "7", "solve").output)
    assert a["seed"] == 7

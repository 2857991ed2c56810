import json
import math

import numpy as np
import pytest

from cechlab.errors import InvalidConfigurationError
from cechlab.harness import (
    SweepConfig,
    config_to_dict,
    lambda_cell,
    read_result_rows,
    result_columns,
    run_cells,
    run_sweep,
    run_trial,
    sidecar_paths,
)
from cechlab.manifold import flat_torus


def config(**over):
    raw = {
        "manifold": {"kind": "torus", "d": 2, "scale": 1.0},
        "n_list": [400],
        "offsets": [{"k": 1, "c": 2.0}, {"k": -1, "c": -1.0}],
        "trials": 3,
        "master_seed": 11,
        "toggles": {"run_morse": True, "run_theta": True, "run_coverage": True},
    }
    raw.update(over)
    return SweepConfig.from_dict(raw)


def test_upper_branch_trial_matches_torus():
    cfg = config(n_list=[1e4], offsets=[{"k": 1, "c": 6.0}], trials=2, toggles={})
    rows = run_cells(cfg.cells(), 2)
    assert all(r["status"] == "pass" for r in rows)
    assert sum(r["full_match"] for r in rows) >= 1
    assert rows[0]["betti1"] in (2, rows[0]["betti1"])


@pytest.mark.parametrize("c,fraction", [(-8.0, 0.05), (-8.75, 0.5)])
def test_sparse_cell(c, fraction):
    cfg = config(n_list=[1000], offsets=[{"k": 1, "c": c}], trials=2, toggles={})
    (cell,) = cfg.cells()
    assert cell.lam < 1
    row = run_trial(cell, 0)
    assert row["status"] == "pass"
    assert row["betti0"] > fraction * row["N"]
    assert row["match1"] is False and row["full_match"] is False


def test_trials_are_deterministic():
    cell = config().cells()[0]
    a, b = run_trial(cell, 1), run_trial(cell, 1)
    a.pop("_elapsed"), b.pop("_elapsed")
    assert a == b


def test_two_cells_ten_trials(tmp_path):
    cfg = config(trials=10, toggles={})
    out = tmp_path / "res.csv"
    outcome = run_sweep(cfg, out=str(out))
    assert outcome.exit_code == 0
    lines = read_result_rows(str(out))
    assert len(lines) == 1 + 20
    assert lines[0].strip().split(",") == result_columns(2)
    summary, timing = sidecar_paths(str(out))
    assert len(read_result_rows(summary)) == 1 + 2
    assert len(open(timing).read().splitlines()) == 1 + 20


def test_empty_cell_list(tmp_path):
    cfg = config(offsets=[])
    out = tmp_path / "empty.csv"
    outcome = run_sweep(cfg, out=str(out))
    assert outcome.exit_code == 0
    assert read_result_rows(str(out)) == [",".join(result_columns(2)) + "\n"]


def test_outputs_byte_identical_and_thread_independent(tmp_path):
    cfg = config()
    paths = []
    for i, threads in enumerate((1, 1, 2)):
        out = tmp_path / f"r{i}.csv"
        run_sweep(cfg, threads=threads, out=str(out))
        paths.append(out)
        summary, _ = sidecar_paths(str(out))
        paths.append(summary)
    res = [read_result_rows(str(p)) for p in paths[0::2]]
    summ = [read_result_rows(str(p)) for p in paths[1::2]]
    assert res[0] == res[1] == res[2]
    assert summ[0] == summ[1] == summ[2]


def test_invariants_recorded_as_passing():
    cfg = config(n_list=[800], offsets=[{"k": 1, "c": 0.0}, {"k": 1, "c": 4.0}], trials=3)
    rows = run_cells(cfg.cells(), 3)
    assert all(r["status"] == "pass" for r in rows)
    for r in rows:
        assert r["coverage_r0"] is not None and r["crit1"] is not None and r["theta1"] is not None
        assert r["betti1"] <= r["crit1"]


def test_upper_beats_lower_branch(tmp_path):
    cfg = config(n_list=[2000], offsets=[{"k": 1, "c": 4.0}, {"k": -1, "c": -4.0}], trials=15,
                 toggles={})
    outcome = run_sweep(cfg, out=str(tmp_path / "results.csv"))
    upper, lower = outcome.summary
    assert upper["full_match_fraction"] > lower["full_match_fraction"]


def test_config_validation():
    with pytest.raises(InvalidConfigurationError):
        config(bogus=1)
    with pytest.raises(InvalidConfigurationError):
        config(toggles={"run_everything": True})
    with pytest.raises(InvalidConfigurationError):
        config(trials=0)
    with pytest.raises(InvalidConfigurationError):
        config(offsets=[{"k": 1, "c": 500.0}])
    raw = config_to_dict(config())
    assert SweepConfig.from_dict(json.loads(json.dumps(raw))) == config()


def test_lambda_cell_direct():
    cell = lambda_cell(flat_torus(2), 0, 1000, 8.0, 3, run_morse=True)
    assert cell.lam == 8.0 and math.isnan(cell.offset)
    assert cell.r < cell.r0 <= 0.25
    assert run_trial(cell, 0)["status"] == "pass"

import json

import numpy as np
import pytest

from cechlab import cech, verify
from cechlab.cli import main
from cechlab.manifold import pairwise_distances


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_sample_build_betti(tmp_path, capsys):
    pts = tmp_path / "cloud.csv"
    code, _, _ = run(capsys, "sample", "--n", "300", "--seed", "4", "--out", str(pts))
    assert code == 0
    code, out, _ = run(capsys, "betti", "--points", str(pts), "--lambda", "20", "--method", "delaunay")
    assert code == 0
    assert out.splitlines()[0] == "betti 1 2 1 0"
    code, out, _ = run(capsys, "build", "--points", str(pts), "--r", "0.05")
    assert code == 0 and len(out.splitlines()) > 300


def test_global_flags_before_or_after_subcommand(capsys):
    a = run(capsys, "--seed", "9", "sample", "--n", "20")[1]
    b = run(capsys, "sample", "--n", "20", "--seed", "9")[1]
    assert a == b and a.startswith("x0,x1")


def test_critical_theta_coverage(capsys):
    code, out, _ = run(capsys, "critical", "--n", "200", "--k", "1", "--r-hi", "0.08")
    assert code == 0 and out.startswith("index,radius,center,generators")
    code, out, _ = run(capsys, "theta", "--n", "500", "--lambda", "6")
    assert code == 0 and out.startswith("theta_count")
    code, out, _ = run(capsys, "coverage", "--n", "2000", "--r0", "0.07")
    assert code == 0 and out.strip() in ("covered true", "covered false")


def test_sphere_kind(capsys):
    code, out, _ = run(capsys, "betti", "--kind", "sphere", "--n", "1500", "--lambda", "20",
                       "--method", "delaunay")
    assert code == 0 and out.splitlines()[0].startswith("betti 1 0 1")


def test_out_of_regime_exit_code(capsys):
    code, _, err = run(capsys, "betti", "--n", "100", "--r", "0.5")
    assert code == 2 and "error" in err
    code, _, _ = run(capsys, "sample", "--n", "-3")
    assert code == 2


def test_sweep(tmp_path, capsys):
    cfg = {
        "manifold": {"kind": "torus", "d": 2, "scale": 1.0},
        "n_list": [500],
        "offsets": [{"k": 1, "c": 3.0}],
        "trials": 2,
        "master_seed": 1,
        "toggles": {"run_morse": True},
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    out = tmp_path / "res.csv"
    code, stdout, _ = run(capsys, "sweep", "--config", str(path), "--out", str(out))
    assert code == 0
    assert json.loads(stdout.splitlines()[0])["trials"] == 2
    assert out.exists()
    path.write_text(json.dumps({**cfg, "surprise": 1}))
    assert run(capsys, "sweep", "--config", str(path))[0] == 2


def test_rips_mutation_fails_complex_oracle(monkeypatch):
    def rips_radii(m, lifted):
        # half the diameter: admits every clique, the Rips rule
        return np.array([pairwise_distances(m, Y).max() / 2 for Y in lifted])

    monkeypatch.setattr(cech, "miniball_radii", rips_radii)
    res = verify.criterion_complex_oracle(n_clouds=30, seed=1)
    assert not res.passed

"""The eleven acceptance criteria at their stated sizes and tolerances.

Each test prints one ``[PASS]``/``[FAIL]`` line; the lines are repeated in the
terminal summary.  The Euler audit (C3) runs after every other test.
"""

import os
import time

from cechlab import verify
from cechlab.sampler import subtrial_seed

from conftest import ACCEPTANCE_LINES

MASTER_SEED = 0


def seed(number):
    return subtrial_seed(MASTER_SEED, number)


def record(res, budget=None):
    line = res.line()
    if budget is not None and res.seconds > budget:
        line = line.replace("[PASS]", "[FAIL]") + f" over the {budget:.0f}s budget"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert res.passed, line
    if budget is not None:
        assert res.seconds <= budget, line


def test_c01_complex_oracle():
    record(verify.criterion_complex_oracle(n_clouds=200, seed=seed(1)), budget=60)


def test_c02_homology_oracle():
    record(verify.criterion_homology_oracle(n_complexes=200, seed=seed(2)), budget=60)


def test_c03_euler_audit():
    record(verify.criterion_euler_audit(n_complexes=100, seed=seed(3)))


def test_c04_critical_oracle():
    record(verify.criterion_critical_oracle(n_clouds=100, seed=seed(4)), budget=120)


def test_c05_morse_inequalities():
    record(verify.criterion_morse(trials=200, n=2000, lams=(8.0, 12.0, 16.0), seed=seed(5)))


def test_c06_theta_lower_bound():
    record(verify.criterion_theta(trials=100, n=5000, seed=seed(6)))


def test_c07_upper_branch():
    record(verify.criterion_upper_branch(trials=100, n=1e4, seed=seed(7)), budget=600)


def test_c08_lower_branch():
    record(verify.criterion_lower_branch(trials=100, n=1e4, seed=seed(7)))


def test_c09_sphere():
    record(verify.criterion_sphere(trials=50, n=1e4, seed=seed(9)))


def test_c10_trend():
    record(verify.criterion_trend(n=1e4, lams=(8.0, 10.0, 12.0, 14.0), seed=seed(10)))


def _result_files(out_dir):
    files = {}
    for name in sorted(os.listdir(out_dir)):
        with open(os.path.join(out_dir, name), encoding="utf-8") as fh:
            files[name] = [line for line in fh if not line.startswith("# generated")]
    return files


def test_c11_determinism(tmp_path):
    start = time.perf_counter()
    dirs = [tmp_path / "run1", tmp_path / "run2"]
    for d in dirs:
        results = verify.verify_suite("quick", out_dir=str(d), master_seed=MASTER_SEED, echo=None)
        assert all(r.passed for r in results), [r.line() for r in results if not r.passed]
    # criteria with per-trial rows write a result file
    expected = {f"criterion_{r.number:02d}.csv" for r in results if r.rows}
    a, b = (_result_files(str(d)) for d in dirs)
    same = a == b and set(a) == expected and len(expected) > 0
    res = verify.CriterionResult(
        11, "determinism", same,
        f"{len(a)} result files from two quick runs, "
        + ("byte-identical apart from the timestamp line" if same else "differ"),
        seconds=time.perf_counter() - start,
    )
    record(res)

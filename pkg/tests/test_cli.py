import json
import subprocess
import sys


def run_cli(*args, env=None):
    cmd = [sys.executable, "-m", "omp_sharp.cli", *args]
    return subprocess.run(cmd, capture_output=True, text=True, env=env)


def write_identity(tmp_path, n=3):
    path = tmp_path / "identity.txt"
    rows = []
    for i in range(n):
        rows.append(",".join("1" if i == j else "0" for j in range(n)))
    path.write_text("\n".join(rows) + "\n")
    return path


def test_omp_run_zero_measurements(tmp_path):
    matrix = write_identity(tmp_path)
    y = tmp_path / "y.txt"
    y.write_text("0\n0\n0\n")
    result = run_cli("omp", "run", str(matrix), str(y), "l2:1")
    assert result.returncode == 0
    doc = json.loads(result.stdout)
    assert doc["final_support"] == []
    assert doc["iterations"] == []


def test_omp_run_naive_linf_example1(tmp_path):
    delta = 0.5
    result = run_cli(
        "construct", "example1", "--delta", str(delta),
        "-o", str(tmp_path / "inst.json"),
        "--matrix-out", str(tmp_path / "A.txt"),
    )
    assert result.returncode == 0, result.stderr
    doc = json.loads((tmp_path / "inst.json").read_text())
    inst = doc["instance"]
    y = [
        sum(a * x for a, x in zip(row, inst["x"])) + v
        for row, v in zip(inst["A"], inst["v"])
    ]
    y_file = tmp_path / "y.txt"
    y_file.write_text("\n".join("%.17g" % t for t in y) + "\n")
    result = run_cli("omp", "run", str(tmp_path / "A.txt"), str(y_file), "naive-linf:1")
    assert result.returncode == 0
    trace = json.loads(result.stdout)
    assert trace["final_support"] == [1, 2]
    # the corrected threshold stops after the first, correct selection
    result = run_cli(
        "omp", "run", str(tmp_path / "A.txt"), str(y_file), "linf:1",
        "--sparsity", "1", "--exact-ric",
    )
    trace = json.loads(result.stdout)
    assert trace["final_support"] == [1]
    assert len(trace["iterations"]) == 1


def test_omp_run_dimension_mismatch_exit_3(tmp_path):
    matrix = write_identity(tmp_path)
    y = tmp_path / "y.txt"
    y.write_text("1\n2\n")
    result = run_cli("omp", "run", str(matrix), str(y), "l2:1")
    assert result.returncode == 3
    assert "DimensionMismatch" in result.stderr


def test_omp_run_bad_rule_spec_exit_2(tmp_path):
    matrix = write_identity(tmp_path)
    y = tmp_path / "y.txt"
    y.write_text("1\n2\n3\n")
    assert run_cli("omp", "run", str(matrix), str(y), "bogus:1").returncode == 2
    assert run_cli("omp", "run", str(matrix), str(y), "l2").returncode == 2
    assert run_cli("omp", "run", str(matrix), str(y), "linf:1").returncode == 2


def test_parse_error_exit_2(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("1,2\n3,nope\n")
    result = run_cli("ric", str(bad), "1")
    assert result.returncode == 2
    assert "line 2" in result.stderr


def test_ric_all_orders_monotone(tmp_path):
    result = run_cli(
        "construct", "l2", "-K", "2", "--delta", "0.4",
        "--matrix-out", str(tmp_path / "A.txt"),
        "-o", str(tmp_path / "inst.json"),
    )
    assert result.returncode == 0, result.stderr
    result = run_cli("ric", str(tmp_path / "A.txt"), "3", "--all-orders")
    assert result.returncode == 0
    reports = json.loads(result.stdout)["reports"]
    deltas = [r["delta"] for r in reports]
    assert deltas == sorted(deltas)
    assert abs(deltas[-1] - 0.4) < 1e-10


def test_ric_budget_exceeded_exit_4(tmp_path):
    matrix = write_identity(tmp_path, 6)
    result = run_cli("ric", str(matrix), "3", "--budget", "2")
    assert result.returncode == 4
    assert "budget" in result.stderr


def test_construct_certification_block(tmp_path):
    out = tmp_path / "inst.json"
    result = run_cli(
        "construct", "linf", "-K", "1", "--delta", "0.6", "--epsilon", "1",
        "-o", str(out),
    )
    assert result.returncode == 0, result.stderr
    cert = json.loads(out.read_text())["certification"]
    assert abs(cert["exact_ric"]["delta"] - 0.6) < 1e-10
    assert cert["noise_bound_satisfied"] is True
    # the linf construction saturates its noise budget exactly
    assert abs(cert["noise_bound_value"] - 1.0) < 1e-10
    assert (
        cert["first_iteration_correlations"]["max_off_support"]
        > cert["first_iteration_correlations"]["max_on_support"]
    )


def test_construct_gate_exit_3():
    result = run_cli("construct", "example2", "--delta", "0.8")
    assert result.returncode == 3
    assert "ParameterOutOfRange" in result.stderr


def test_experiment_command(tmp_path):
    cfg = {
        "experiment": "Example2",
        "seed": 9,
        "output_csv": str(tmp_path / "out.csv"),
        "output_summary": str(tmp_path / "out.json"),
    }
    cfg_file = tmp_path / "cfg.json"
    cfg_file.write_text(json.dumps(cfg))
    result = run_cli("experiment", str(cfg_file))
    assert result.returncode == 0, result.stderr
    summary = json.loads(result.stdout)
    assert summary["failures"] == 0
    assert (tmp_path / "out.csv").exists()
    assert json.loads((tmp_path / "out.json").read_text()) == summary


def test_experiment_missing_csv_path_exit_2(tmp_path):
    cfg_file = tmp_path / "cfg.json"
    cfg_file.write_text(json.dumps({"experiment": "Example2", "seed": 9}))
    assert run_cli("experiment", str(cfg_file)).returncode == 2


def test_experiment_bad_json_exit_2(tmp_path):
    cfg_file = tmp_path / "cfg.json"
    cfg_file.write_text("{not json")
    assert run_cli("experiment", str(cfg_file)).returncode == 2


def test_thread_cap_env_var(tmp_path):
    import os

    matrix = write_identity(tmp_path)
    y = tmp_path / "y.txt"
    y.write_text("1\n0\n0\n")
    env = dict(os.environ, OMP_SHARP_THREADS="2")
    assert run_cli("omp", "run", str(matrix), str(y), "l2:0.5", env=env).returncode == 0
    env["OMP_SHARP_THREADS"] = "zero"
    assert run_cli("omp", "run", str(matrix), str(y), "l2:0.5", env=env).returncode == 2


def test_help_screens():
    for args in ([], ["omp"], ["omp", "run"], ["ric"], ["construct"], ["experiment"]):
        result = run_cli(*args, "--help")
        assert result.returncode == 0
        assert "Usage" in result.stdout

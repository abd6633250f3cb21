import json
import subprocess
import sys

import numpy as np
import pytest

from nehari.cli import main, parse_sweep, sanitize
from nehari.config import parse_config
from nehari.exceptions import InvalidInputError


def write(tmp_path, text, name="run.yaml"):
    path = tmp_path / name
    path.write_text(text)
    return path


def report(out):
    return json.loads((out / "report.json").read_text())


# -- config ----------------------------------------------------------------------


def test_minimal_superlinear_config(tmp_path):
    cfg = parse_config(write(tmp_path, "family: superlinear\nr: 4\nb: constant 1\ngrid_n: 511\n"))
    m = cfg.model()
    assert m.grid.n == 511 and m.r == 4
    np.testing.assert_array_equal(m._weights["b"], 1.0)


def test_nested_params_and_aliases(tmp_path):
    text = "family: kirchhoff\nparams:\n  a: 2\n  lambda: 3\n  mu: 4\nseed: 9\n"
    cfg = parse_config(write(tmp_path, text))
    assert cfg.params == {"a": 2, "lam": 3, "mu": 4}
    assert cfg.seed == 9 and cfg.model().lam == 3


def test_ordering_violation_is_named(tmp_path):
    with pytest.raises(InvalidInputError, match="PQConvex requires 1 < q < p < r"):
        parse_config(write(tmp_path, "family: pq_convex\np: 4\nq: 4\nr: 6\n"))


def test_weight_file_wrong_length(tmp_path):
    np.savetxt(tmp_path / "b.txt", np.ones(10))
    text = f"family: superlinear\nb: {{file: {tmp_path / 'b.txt'}}}\ngrid_n: 31\n"
    with pytest.raises(InvalidInputError, match="n = 31"):
        parse_config(write(tmp_path, text))


def test_parse_error_reports_line(tmp_path):
    with pytest.raises(InvalidInputError, match=r"line \d+, column \d+"):
        parse_config(write(tmp_path, "family: superlinear\nr: 4\nb: [1, 2\n"))


@pytest.mark.parametrize(
    "text, message",
    [
        ("- 1\n- 2\n", "mapping"),
        ("r: 4\n", "without a 'family'"),
        ("family: superlinear\nzeta: 1\n", "zeta"),
        ("family: nope\n", "unknown family"),
        ("family: superlinear\ngrid_n: 2.5\n", "grid_n"),
        ("family: superlinear\ntol: -1\n", "tol"),
        ("family: superlinear\nsolve: 3\n", "solve"),
    ],
)
def test_bad_configs(tmp_path, text, message):
    with pytest.raises(InvalidInputError, match=message):
        parse_config(write(tmp_path, text))


def test_missing_file():
    with pytest.raises(InvalidInputError, match="does not exist"):
        parse_config("/nonexistent/run.yaml")


def test_parse_sweep():
    assert parse_sweep("lam=1:2:3") == {"key": "lam", "lo": 1.0, "hi": 2.0, "steps": 3}
    with pytest.raises(InvalidInputError):
        parse_sweep("lam=1:2")


def test_sanitize():
    out = sanitize({"a": np.float64(np.inf), "b": np.arange(2), "c": {np.bool_(True)}, "d": float("nan")})
    assert out == {"a": "inf", "b": [0, 1], "c": [True], "d": "nan"}


# -- subcommands -------------------------------------------------------------------


def test_solve_writes_report_and_profile(tmp_path):
    cfg = write(tmp_path, "family: superlinear\nr: 4\nb: constant 1\ngrid_n: 127\n")
    out = tmp_path / "out"
    assert main(["solve", "--config", str(cfg), "--out", str(out)]) == 0
    rep = report(out)
    assert rep["status"] == "ok"
    assert rep["result"]["ground"]["classification"] == "ground_state"
    assert rep["config"]["params"]["b"] == "constant 1"
    assert rep["config"]["grid_n"] == 127
    raw = (out / "solution.csv").read_bytes()
    assert b"\r" not in raw
    lines = raw.decode().splitlines()
    assert lines[0] == "x,u" and len(lines) == 128
    x, u = map(float, lines[64].split(","))
    assert x == pytest.approx(0.5) and u > 0


def test_solve_is_deterministic(tmp_path):
    args = ["solve", "--family", "concave_convex", "--param", "lam=3", "--grid-n", "63", "--seed", "4"]
    main(args + ["--out", str(tmp_path / "a")])
    main(args + ["--out", str(tmp_path / "b")])
    a, b = report(tmp_path / "a"), report(tmp_path / "b")
    a.pop("timestamp"), b.pop("timestamp")
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
    assert (tmp_path / "a" / "solution.csv").read_bytes() == (tmp_path / "b" / "solution.csv").read_bytes()


def test_solve_second_solution(tmp_path):
    out = tmp_path / "o"
    code = main(
        ["solve", "--family", "concave_convex", "--param", "lam=3", "--grid-n", "63", "--second", "--out", str(out)]
    )
    assert code == 0
    res = report(out)["result"]
    assert res["second"]["classification"] == "mountain_pass_type"
    assert (out / "solution_second.csv").exists()


def test_pair_solution_csv(tmp_path):
    out = tmp_path / "o"
    assert main(["solve", "--family", "gradient_system", "--param", "lam=9.91", "--grid-n", "31", "--out", str(out)]) == 0
    assert (out / "solution.csv").read_text().splitlines()[0] == "x,u,v"


def test_eigen(tmp_path):
    out = tmp_path / "o"
    assert main(["eigen", "--p", "2", "--grid-n", "63", "--out", str(out)]) == 0
    res = report(out)["result"]
    assert {"value", "residual", "iterations", "grid_n", "seed"} <= set(res)
    assert res["value"] == pytest.approx(4 * np.sin(np.pi / 128) ** 2 * 64**2, rel=1e-10)


def test_threshold_and_infeasible_exit_code(tmp_path):
    out = tmp_path / "o"
    base = ["threshold", "--grid-n", "63", "--p", "4", "--q", "2", "--out", str(out)]
    assert main(base + ["--kind", "pq_corners"]) == 0
    corners = report(out)["result"]
    assert corners["alpha0"] > corners["lambda1_p"]
    assert main(base + ["--kind", "beta_star", "--value", str(0.5 * corners["lambda1_p"])]) == 2
    rep = report(out)
    assert rep["status"] == "error" and rep["error"]["type"] == "InfeasibleError"


def test_threshold_missing_option(tmp_path):
    assert main(["threshold", "--kind", "beta_star", "--out", str(tmp_path)]) == 1


def test_extremal(tmp_path):
    out = tmp_path / "o"
    assert main(["extremal", "--family", "concave_convex", "--grid-n", "63", "--n-starts", "3", "--out", str(out)]) == 0
    res = report(out)["result"]
    assert {"value", "seed", "starts", "oracle_gap"} <= set(res)
    assert res["oracle_gap"] < 1e-8


def test_fibering_terms(tmp_path):
    out = tmp_path / "o"
    assert main(["fibering", "--terms", "0.25:4,-0.05:2,-0.0166666666666666667:6", "--out", str(out)]) == 0
    res = report(out)["result"]
    assert res["label"] == "H5"
    ts = [cp["t"] for cp in res["critical_points"]]
    np.testing.assert_allclose(ts, [np.sqrt(5 - np.sqrt(24)), np.sqrt(5 + np.sqrt(24))], atol=1e-10)


def test_fibering_bad_terms(tmp_path):
    assert main(["fibering", "--terms", "1:2:3", "--out", str(tmp_path)]) == 1
    assert main(["fibering", "--terms", "1:0.5", "--out", str(tmp_path)]) == 1


def test_exit_codes(tmp_path):
    assert main(["solve", "--family", "pq_convex", "--param", "q=4", "--out", str(tmp_path)]) == 1
    code = main(
        ["solve", "--family", "concave_convex", "--param", "lam=12", "--grid-n", "63", "--n-starts", "2", "--out", str(tmp_path)]
    )
    assert code == 3
    assert report(tmp_path)["error"]["type"] == "NonConvergenceError"
    assert main(["solve", "--family", "pq_eigen", "--param", "beta=5", "--cone", "Y2", "--grid-n", "31", "--out", str(tmp_path)]) == 2


def test_sweep_csv_and_parallel(tmp_path):
    base = ["sweep", "--family", "concave_convex", "--grid-n", "63", "--sweep", "lam=1:12:4", "--n-starts", "2"]
    assert main(base + ["--out", str(tmp_path / "a")]) == 0
    assert main(base + ["--jobs", "2", "--out", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "sweep.csv").read_text()
    assert a == (tmp_path / "b" / "sweep.csv").read_text()
    lines = a.splitlines()
    assert lines[0] == "lam,level,residual,classification,geometry,status"
    assert len(lines) == 5
    assert lines[1].endswith(",ok")
    # above the extremal parameter the branch folds: recorded, not fatal
    assert lines[-1].endswith("NonConvergenceError")
    assert report(tmp_path / "a")["result"]["failed"] == 1


def test_sweep_rejects_unknown_key(tmp_path):
    assert main(["sweep", "--family", "superlinear", "--sweep", "zz=1:2:2", "--out", str(tmp_path)]) == 1


def test_sweep_extremal_task(tmp_path):
    code = main(
        ["sweep", "--family", "concave_convex", "--grid-n", "31", "--sweep", "r=3:5:2", "--task", "extremal", "--n-starts", "2", "--out", str(tmp_path)]
    )
    assert code == 0
    assert (tmp_path / "sweep.csv").read_text().splitlines()[0] == "r,value,oracle_gap,status"


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "nehari", "fibering", "--terms", "0.5:2,-0.25:4", "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["label"] == "H1"


def test_concave_convex_sweep_across_extremal_parameter(tmp_path):
    # lam over [0.5 lambda_1, 1.5 lam_*]: below lam_* the first-minimum level is
    # negative; above it the branch folds and rows record the failure
    from nehari.energy import ConcaveConvex
    from nehari.rayleigh import QuotientSpec, extremal_parameter
    from nehari.spectrum import discrete_laplacian_eigenvalue

    model = ConcaveConvex(63)
    lam1 = discrete_laplacian_eigenvalue(model.grid)
    lam_star = extremal_parameter(QuotientSpec(model), n_starts=6).value
    spec = f"lam={0.5 * lam1}:{1.5 * lam_star}:6"
    args = ["sweep", "--family", "concave_convex", "--grid-n", "63", "--sweep", spec, "--n-starts", "3"]
    assert main(args + ["--out", str(tmp_path)]) == 0
    rows = report(tmp_path)["result"]["rows"]
    assert len(rows) == 6
    for row in rows:
        if row["lam"] < 0.99 * lam_star:
            assert row["status"] == "ok" and row["level"] < 0
        elif row["lam"] > 1.01 * lam_star:
            assert row["status"] != "ok" or row["level"] < 0

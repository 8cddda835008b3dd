import json

import numpy as np
import pytest

from polygmres import ConfigError
from polygmres.cli import main, parse_config, run_experiment


def test_defaults_with_matrix_file_only():
    cfg = parse_config(["--matrix-file", "m.mtx"])
    assert cfg.matrix_file == "m.mtx"
    assert cfg.restart_m == 50
    assert cfg.tol == 1e-8
    assert cfg.degree is None and not cfg.degree_auto
    assert cfg.seed == 0
    assert cfg.max_iters == 200000
    assert cfg.rhs_mode == "axrandom"


def test_degree_auto_with_cap():
    cfg = parse_config(["--generator", "bidiag2", "--degree", "auto", "--degree-cap", "20"])
    assert cfg.degree_auto and cfg.degree is None
    assert cfg.degree_cap == 20


def test_degree_explicit():
    cfg = parse_config(["--generator", "bidiag1", "--degree", "10"])
    assert cfg.degree == 10 and not cfg.degree_auto


def test_degree_garbage_rejected():
    with pytest.raises(ConfigError):
        parse_config(["--generator", "bidiag1", "--degree", "several"])


def test_conflicting_matrix_sources():
    with pytest.raises(ConfigError):
        parse_config(["--matrix-file", "m.mtx", "--generator", "bidiag1"])
    with pytest.raises(ConfigError):
        parse_config([])


def test_config_file_with_flag_override(tmp_path):
    cfile = tmp_path / "exp.json"
    cfile.write_text(json.dumps({"generator": "laplacian2d", "grid_n": 5, "tol": 1e-6}))
    cfg = parse_config(["--config", str(cfile), "--tol", "1e-4"])
    assert cfg.generator == "laplacian2d"
    assert cfg.grid_n == 5
    assert cfg.tol == 1e-4  # flag wins


def test_config_file_unknown_key_rejected(tmp_path):
    cfile = tmp_path / "exp.json"
    cfile.write_text(json.dumps({"generator": "bidiag1", "tollerance": 1e-6}))
    with pytest.raises(ConfigError):
        parse_config(["--config", str(cfile)])


def test_config_file_degree_auto(tmp_path):
    cfile = tmp_path / "exp.json"
    cfile.write_text(json.dumps({"generator": "bidiag2", "degree": "auto"}))
    cfg = parse_config(["--config", str(cfile)])
    assert cfg.degree_auto


def test_rhs_generator_needs_supplying_generator():
    with pytest.raises(ConfigError):
        parse_config(["--generator", "bidiag1", "--rhs", "generator"])


def _run(tmp_path, extra, name="run"):
    args = [
        "--generator", "laplacian2d", "--grid-n", "8",
        "--rhs", "generator", "--degree", "2",
        "-o", str(tmp_path / name),
    ] + extra
    code = main(args)
    history = (tmp_path / f"{name}.history.csv").read_text()
    summary = json.loads((tmp_path / f"{name}.summary.json").read_text())
    return code, history, summary


def test_small_experiment_end_to_end(tmp_path):
    code, history, summary = _run(tmp_path, [])
    assert code == 0
    assert summary["converged"] is True
    assert summary["degree"] == 2
    assert len(summary["coefficients"]) == 3
    lines = history.strip().splitlines()
    assert lines[0] == "iter,relres,spmvs,dots,scalar_dots"
    assert len(lines) == summary["iterations"] + 1


def test_history_final_row_equals_summary_totals(tmp_path):
    code, history, summary = _run(tmp_path, [])
    last = history.strip().splitlines()[-1].split(",")
    assert int(last[2]) == summary["counters"]["spmvs"]
    assert int(last[3]) == summary["counters"]["dots"]
    assert int(last[4]) == summary["counters"]["scalar_dots"]


def test_history_spmv_increments_follow_counter_law(tmp_path):
    code, history, summary = _run(tmp_path, [])
    deg = summary["degree"]
    rows = [line.split(",") for line in history.strip().splitlines()[1:]]
    spmvs = [int(r[2]) for r in rows]
    dots = [int(r[3]) for r in rows]
    # dots: 3 per iteration on top of the 2 setup block products
    for k, d in enumerate(dots, start=1):
        assert d == 3 * k + 2
    # spmvs: deg+1 per iteration; each closed cycle adds a recovery (deg)
    # plus the explicit residual check (1) to the row that closed it
    setup = deg + 1
    for i, s in enumerate(spmvs):
        base = (deg + 1) * (i + 1) + setup
        assert s >= base
        assert (s - base) % (deg + 1) == 0
    assert spmvs[-1] == (deg + 1) * len(spmvs) + setup + (deg + 1) * summary["cycles"]


def test_determinism_byte_identical(tmp_path):
    _, h1, s1 = _run(tmp_path, ["--seed", "7", "--v0", "random"], name="a")
    _, h2, s2 = _run(tmp_path, ["--seed", "7", "--v0", "random"], name="b")
    assert h1 == h2
    s1["config"].pop("output")
    s2["config"].pop("output")
    assert s1 == s2


def test_axrandom_rhs_determinism(tmp_path):
    args = ["--generator", "bidiag1", "--degree", "3", "--rhs", "axrandom",
            "--seed", "7", "--tol", "1e-8"]
    code1 = main(args + ["-o", str(tmp_path / "x")])
    code2 = main(args + ["-o", str(tmp_path / "y")])
    assert code1 == code2 == 0
    assert (tmp_path / "x.history.csv").read_bytes() == (tmp_path / "y.history.csv").read_bytes()


def test_jsonl_format(tmp_path):
    args = ["--generator", "laplacian2d", "--grid-n", "6", "--rhs", "generator",
            "--format", "jsonl", "-o", str(tmp_path / "j")]
    assert main(args) == 0
    lines = (tmp_path / "j.history.jsonl").read_text().strip().splitlines()
    rows = [json.loads(line) for line in lines]
    assert set(rows[0]) == {"iter", "relres", "spmvs", "dots", "scalar_dots"}
    assert rows[-1]["iter"] == len(rows)


def test_exit_code_not_converged(tmp_path):
    args = ["--generator", "laplacian2d", "--grid-n", "12", "--rhs", "generator",
            "--max-iters", "3", "--tol", "1e-10", "-o", str(tmp_path / "nc")]
    assert main(args) == 2
    summary = json.loads((tmp_path / "nc.summary.json").read_text())
    assert summary["converged"] is False
    assert summary["iterations"] == 3


def test_exit_code_error_on_bad_file(tmp_path, capsys):
    assert main(["--matrix-file", str(tmp_path / "missing.mtx")]) == 1
    assert "error" in capsys.readouterr().err


def test_exit_code_error_on_malformed_matrix(tmp_path, capsys):
    bad = tmp_path / "bad.mtx"
    bad.write_text("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 oops 3\n")
    assert main(["--matrix-file", str(bad), "-o", str(tmp_path / "e")]) == 1
    assert "line 3" in capsys.readouterr().err


def test_matrix_file_run(tmp_path):
    mtx = tmp_path / "spd.mtx"
    mtx.write_text(
        "%%MatrixMarket matrix coordinate real symmetric\n"
        "3 3 5\n1 1 4.0\n2 2 4.0\n3 3 4.0\n2 1 -1.0\n3 2 -1.0\n"
    )
    args = ["--matrix-file", str(mtx), "--rhs", "axrandom", "-o", str(tmp_path / "mm")]
    assert main(args) == 0
    summary = json.loads((tmp_path / "mm.summary.json").read_text())
    assert summary["degree"] is None
    assert summary["final_relres"] < 1e-8


def test_ilu_with_polynomial_run(tmp_path):
    args = ["--generator", "convdiff2d", "--grid-n", "10", "--epsilon", "0.05",
            "--rhs", "generator", "--ilu", "--degree", "2",
            "-o", str(tmp_path / "ic")]
    assert main(args) == 0
    summary = json.loads((tmp_path / "ic.summary.json").read_text())
    assert summary["preconditioned_system"] is True
    assert summary["counters"]["prec_applies"] > 0
    assert summary["converged"] is True


def test_rhs_from_file(tmp_path):
    rhs = tmp_path / "b.txt"
    rhs.write_text("1.0 2.0 3.0 4.0\n")
    args = ["--generator", "laplacian2d", "--grid-n", "2",
            "--rhs", "file", "--rhs-file", str(rhs), "-o", str(tmp_path / "rf")]
    assert main(args) == 0
    summary = json.loads((tmp_path / "rf.summary.json").read_text())
    assert summary["converged"] is True


def test_summary_echoes_effective_config(tmp_path):
    _, _, summary = _run(tmp_path, ["--seed", "3"])
    assert summary["config"]["generator"] == "laplacian2d"
    assert summary["config"]["grid_n"] == 8
    assert summary["config"]["seed"] == 3
    assert summary["history_residual_kind"] == "implicit"
    assert summary["cost_report"]["spmvs_per_iteration"] == 3

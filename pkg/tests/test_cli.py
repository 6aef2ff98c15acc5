"""Command-line interface: subcommands, formats, files, and exit codes.

Most cases drive ``main(argv)`` in process so outputs can be compared
bit for bit against the library calls they wrap; one smoke test goes
through ``python -m`` to cover the installed entry point.
"""

import json
import subprocess
import sys

import numpy as np
import pytest

from duhamelcheb import (
    KernelSeries,
    SolverConfig,
    build_reference_example,
    compute_errors,
    heat_basis,
    march,
)
from duhamelcheb.cli import EXIT_CONFIG, EXIT_OK, EXIT_SOLVER, load_structured, main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def parse_csv(text):
    lines = [l for l in text.strip().split("\n") if not l.startswith("#")]
    header = lines[0].split(",")
    rows = [[float(tok) for tok in line.split(",")] for line in lines[1:]]
    return header, rows


@pytest.mark.parametrize("n", [2, 4, 8])
def test_tables_row_count_and_magnitudes(capsys, n):
    code, out = run_cli(capsys, "tables", "--n", str(n))
    assert code == EXIT_OK
    header, rows = parse_csv(out)
    assert header == ["t", "eps1", "eps2"]
    assert len(rows) == n
    worst = max(r[1] for r in rows)
    windows = {2: (1e-3, 1e-1), 4: (0.0, 5e-3), 8: (0.0, 1e-6)}
    lo, hi = windows[n]
    assert lo <= worst <= hi


def test_tables_rejects_unsupported_degree(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["tables", "--n", "3"])
    assert exc.value.code == 2


def test_tables_structured_document(capsys):
    code, out = run_cli(capsys, "tables", "--n", "4", "--format", "structured")
    assert code == EXIT_OK
    doc = load_structured(out)
    assert doc["kind"] == "error_report"
    assert len(doc["rows"]) == 4
    assert doc["config"]["N"] == 4
    assert any("magnitude" in note for note in doc["notes"])


def test_solve_zero_problem_yields_zero_columns(capsys):
    code, out = run_cli(capsys, "solve", "--problem", "zero", "--N", "4", "--K", "2", "--M", "16")
    assert code == EXIT_OK
    trace_text, errors_text = out.split("t,eps1,eps2")
    header, rows = parse_csv(trace_text)
    assert header[:3] == ["t", "y", "u1"]
    assert header[3] == "mode_1"
    assert len(header) == 3 + 16
    assert len(rows) == 9
    for row in rows:
        assert all(v == 0.0 for v in row[1:])
    err_rows = [[float(t) for t in line.split(",")] for line in errors_text.strip().split("\n")]
    assert all(r[1] == 0.0 and r[2] == 0.0 for r in err_rows)


def test_solve_structured_matches_library_bit_for_bit(capsys, tmp_path):
    out_path = tmp_path / "trace.json"
    code = main(
        ["solve", "--problem", "reference", "--N", "6", "--K", "2",
         "--format", "structured", "--out", str(out_path)]
    )
    assert code == EXIT_OK
    doc = load_structured(str(out_path))
    assert doc["kind"] == "solution_trace"

    problem = build_reference_example(M=128, T=1.0)
    trace = march(problem, SolverConfig(N=6, K=2, M=128, T=1.0))
    times = trace.node_times()
    modes = trace.node_modes()
    yvals = trace.node_boundary_values()
    assert len(doc["rows"]) == times.shape[0]
    for row, t, y, mode_row in zip(doc["rows"], times, yvals, modes):
        assert row[0] == t
        assert row[1] == y
        assert row[3] == mode_row[0]

    errors_path = tmp_path / "trace_errors.json"
    err_doc = load_structured(str(errors_path))
    report = compute_errors(trace, problem)
    for row, t, e1 in zip(err_doc["rows"], report.times, report.eps1):
        assert row[0] == t
        assert row[1] == e1


def test_solve_rejects_out_of_range_gamma(capsys):
    code = main(["solve", "--gamma", "1.5"])
    assert code == EXIT_CONFIG


def test_solve_rejects_bad_mode_count(capsys):
    code = main(["solve", "--M", "0"])
    assert code == EXIT_CONFIG


def test_solve_reports_solver_failure(capsys):
    code = main(
        ["solve", "--problem", "reference", "--mode", "picard",
         "--fp-tol", "1e-30", "--fp-max-iter", "3"]
    )
    assert code == EXIT_SOLVER


def test_unwritable_output_is_a_config_error(capsys, tmp_path):
    target = tmp_path / "missing" / "out.csv"
    code = main(["tables", "--n", "2", "--out", str(target)])
    assert code == EXIT_CONFIG


def test_convergence_sweep_rows_decrease(capsys):
    code, out = run_cli(capsys, "convergence", "--Ns", "2,4,8", "--Ks", "1")
    assert code == EXIT_OK
    header, rows = parse_csv(out)
    assert header == ["N", "K", "M", "max_eps1", "max_eps2", "wall_time_s"]
    assert [int(r[0]) for r in rows] == [2, 4, 8]
    errs = [r[3] for r in rows]
    assert errs[0] > errs[1] > errs[2]


def test_baseline_halves_error_when_steps_double(capsys):
    code, out = run_cli(capsys, "baseline", "--steps", "100,200")
    assert code == EXIT_OK
    header, rows = parse_csv(out)
    assert header == ["steps", "max_eps1", "max_eps2", "wall_time_s"]
    assert 1.8 <= rows[0][1] / rows[1][1] <= 2.2


def test_kernels_table_matches_series(capsys):
    code, out = run_cli(capsys, "kernels", "--t", "0.5,1.0", "--x", "0.5")
    assert code == EXIT_OK
    header, rows = parse_csv(out)
    assert header == ["t", "K", "K1_at_x"]
    series = KernelSeries(heat_basis(128))
    assert rows[1][0] == 1.0
    assert rows[1][1] == series.K(1.0)
    assert rows[1][2] == series.K1(1.0, 0.5)


def test_kernels_reject_nonpositive_times(capsys):
    code = main(["kernels", "--t", "0.0,1.0"])
    assert code == EXIT_CONFIG


def test_kernels_structured_carries_truncation_bound(capsys):
    code, out = run_cli(capsys, "kernels", "--format", "structured", "--M", "64")
    assert code == EXIT_OK
    doc = load_structured(out)
    assert doc["kind"] == "kernels"
    assert doc["config"]["M"] == 64
    assert doc["config"]["integrated_tail"] > 0.0
    assert "off_coincidence_tail" in doc["config"]


def test_load_structured_validates_fields(tmp_path):
    with pytest.raises(ValueError):
        load_structured(json.dumps({"kind": "x"}))
    path = tmp_path / "doc.json"
    payload = {"kind": "k", "config": {}, "columns": [], "rows": []}
    path.write_text(json.dumps(payload))
    assert load_structured(str(path)) == payload


def test_module_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "duhamelcheb", "tables", "--n", "2", "--M", "32"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "t,eps1,eps2" in proc.stdout

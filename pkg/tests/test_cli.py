import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
import yaml

from sefpp import cli, fixtures
from sefpp.config import ConfigError, load_config, parse_config
from sefpp.diagnostics import check_fejer
from sefpp.solvers import SolverConfig, solve
from sefpp.traceio import format_trace, read_trace, write_trace

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


@pytest.fixture
def p1_data():
    return yaml.safe_load((CONFIGS / "p1_known_norm.yaml").read_text())


@pytest.fixture
def outdir(tmp_path, monkeypatch):
    d = tmp_path / "out"
    monkeypatch.setenv("SEFPP_OUTPUT_DIR", str(d))
    return d


def write_cfg(tmp_path, data, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(data))
    return str(path)


class TestRun:
    def test_p1_converges(self, outdir, capsys):
        assert cli.main(["run", str(CONFIGS / "p1_known_norm.yaml")]) == 0
        out = capsys.readouterr().out
        assert "status: converged" in out and "coupling:" in out
        trace = read_trace(outdir / "p1_known_norm.trace.csv")
        assert trace.records[0].n == 1
        assert check_fejer(trace).holds
        assert abs(trace.final.x[0] - 4) < 1e-4 and abs(trace.final.y[0] - 6) < 1e-4

    def test_trace_matches_library_run(self, outdir):
        cli.main(["run", str(CONFIGS / "p1_known_norm.yaml")])
        from_file = read_trace(outdir / "p1_known_norm.trace.csv")
        cfg = load_config(CONFIGS / "p1_known_norm.yaml")
        direct = solve(cfg.problem, cfg.solver, cfg.solution)
        assert from_file.xs.tobytes() == direct.xs.tobytes()

    def test_constant_tau_rejected(self, tmp_path, outdir, p1_data, capsys):
        p1_data["solver"]["tau"] = 0.5
        assert cli.main(["run", write_cfg(tmp_path, p1_data)]) == 1
        assert "tend to 0" in capsys.readouterr().err
        assert not outdir.exists()

    def test_constant_tau_override_warns(self, tmp_path, outdir, p1_data, capsys):
        p1_data["solver"].update(tau=0.5, paper_exact_override=True, max_iters=20)
        assert cli.main(["run", write_cfg(tmp_path, p1_data)]) == 2
        assert "warning:" in capsys.readouterr().err

    def test_dim_mismatch(self, tmp_path, outdir, p1_data, capsys):
        p1_data["problem"]["D2"] = [[1.0, 0.0], [0.0, 1.0]]
        assert cli.main(["run", write_cfg(tmp_path, p1_data)]) == 1
        err = capsys.readouterr().err
        assert "problem" in err and "dimension" in err

    def test_max_iters_exit(self, tmp_path, outdir, p1_data):
        p1_data["solver"]["max_iters"] = 10
        assert cli.main(["run", write_cfg(tmp_path, p1_data)]) == 2
        assert len(read_trace(outdir / "cfg.trace.csv").records) == 11

    def test_numerical_failure_exit(self, tmp_path, outdir, capsys):
        data = {
            "problem": {"D1": [[1.0]], "D2": [[1.0]],
                        "T1": {"kind": "example", "name": "ex2_S"},
                        "T2": {"kind": "example", "name": "ex2_S"},
                        "x0": [-1.0], "y0": [1.0]},
            "solver": {"mode": "decoupled-km", "max_iters": 5},
        }
        assert cli.main(["run", write_cfg(tmp_path, data)]) == 3
        assert "iteration 1" in capsys.readouterr().err

    def test_output_dir_override(self, tmp_path, monkeypatch, p1_data):
        p1_data["output"]["path"] = "somewhere/p1.csv"
        cfg = write_cfg(tmp_path, p1_data)
        monkeypatch.setenv("SEFPP_OUTPUT_DIR", str(tmp_path / "elsewhere"))
        assert cli.main(["run", cfg]) == 0
        assert (tmp_path / "elsewhere" / "p1.csv").exists()

    def test_reruns_are_byte_identical(self, tmp_path, monkeypatch):
        texts = []
        for i in range(2):
            monkeypatch.setenv("SEFPP_OUTPUT_DIR", str(tmp_path / str(i)))
            assert cli.main(["run", str(CONFIGS / "p1_norm_free.yaml")]) == 0
            texts.append((tmp_path / str(i) / "p1_norm_free.trace.jsonl").read_bytes())
        assert texts[0] == texts[1]

    def test_log_every(self, tmp_path, outdir, p1_data):
        p1_data["output"]["log_every"] = 50
        cli.main(["run", write_cfg(tmp_path, p1_data)])
        ns = [r.n for r in read_trace(outdir / "cfg.trace.csv").records]
        assert ns[:3] == [1, 51, 101] and ns[-1] == 220

    def test_module_entry_point(self, tmp_path):
        env = {"SEFPP_OUTPUT_DIR": str(tmp_path)}
        proc = subprocess.run([sys.executable, "-m", "sefpp", "validate", str(CONFIGS / "scmp_quadratic.yaml")],
                              capture_output=True, text=True, env={**os.environ, **env})
        assert proc.returncode == 0 and proc.stdout.startswith("ok:")


class TestValidate:
    def test_ok(self, capsys):
        assert cli.main(["validate", str(CONFIGS / "p1_known_norm.yaml")]) == 0
        assert "mode=known-norm" in capsys.readouterr().out

    def test_yaml_syntax_error_has_line(self, tmp_path, capsys):
        path = tmp_path / "bad.yaml"
        path.write_text("problem:\n  D1: [[0.5]\n  D2: 3\n")
        assert cli.main(["validate", str(path)]) == 1
        assert "line" in capsys.readouterr().err

    @pytest.mark.parametrize("edit, where", [
        (lambda d: d["problem"].pop("T1"), "problem.T1"),
        (lambda d: d["problem"]["T2"].update(kind="spline"), "problem.T2.kind"),
        (lambda d: d["solver"].update(mode="fastest"), "solver"),
        (lambda d: d["solver"].update(stop_tolerance="tiny"), "solver.stop_tolerance"),
        (lambda d: d["output"].update(format="xml"), "output.format"),
        (lambda d: d["output"].update(log_every=0), "output.log_every"),
        (lambda d: d["problem"].update(solution={"p": [4.0], "q": [5.0]}), "problem.solution"),
        (lambda d: d["problem"].update(D1=[["a"]]), "problem.D1"),
        (lambda d: d.update(extra=1), "unknown field"),
        (lambda d: d["problem"]["T1"].update(fixed_points=[[3.0]]), "problem.T1"),
    ])
    def test_field_located_errors(self, p1_data, edit, where):
        edit(p1_data)
        with pytest.raises(ConfigError, match=where.replace(".", r"\.")):
            parse_config(p1_data)

    def test_missing_file_and_empty(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            load_config(tmp_path / "nope.yaml")
        (tmp_path / "empty.yaml").write_text("")
        with pytest.raises(ConfigError, match="empty"):
            load_config(tmp_path / "empty.yaml")

    def test_mapping_kinds(self):
        data = {
            "problem": {
                "D1": [[1.0, 0.0], [0.0, 1.0]], "D2": [[1.0, 0.0], [0.0, 1.0]],
                "T1": {"kind": "projection", "set": {"kind": "ball", "center": [0, 0], "radius": 1}},
                "T2": {"kind": "prox", "function": {"kind": "indicator",
                                                    "set": {"kind": "halfspace", "normal": [1, 1], "offset": 0}}},
                "x0": [2.0, 0.0], "y0": [0.0, 0.0],
            },
            "solver": {"mode": "norm-free", "stop_tolerance": "1e-6"},
        }
        cfg = parse_config(data)
        assert cfg.solver.stop_tolerance == 1e-6
        np.testing.assert_allclose(cfg.problem.T1.evaluate([2.0, 0.0]), [1.0, 0.0])
        data["problem"]["T2"] = {"kind": "prox", "function": {"kind": "l1", "weight": 0.5}}
        data["problem"]["T1"] = {"kind": "identity"}
        cfg = parse_config(data)
        np.testing.assert_allclose(cfg.problem.T2.evaluate([2.0, 0.1]), [1.5, 0.0])


class TestTraceIO:
    @pytest.mark.parametrize("fmt", ["csv", "jsonl"])
    def test_round_trip_exact(self, tmp_path, fmt, p1):
        trace = solve(p1, SolverConfig(mode="norm-free", max_iters=40), fixtures.P1_SOLUTION)
        path = write_trace(trace, tmp_path / f"t.{fmt}", fmt)
        back = read_trace(path)
        assert len(back) == len(trace)
        for a, b in zip(trace.records, back.records):
            assert a.n == b.n
            assert a.x.tobytes() == b.x.tobytes() and a.y.tobytes() == b.y.tobytes()
            for k in ("coupling", "fix_x", "fix_y", "gamma", "k_norm", "r_norm"):
                assert getattr(a, k) == getattr(b, k)

    def test_csv_header_and_empty_optionals(self, p1):
        text = format_trace(solve(p1, SolverConfig(max_iters=2)), "csv")
        lines = text.splitlines()
        assert lines[0] == "n,x[0],y[0],coupling,fix_x,fix_y,gamma,k_norm,r_norm"
        assert lines[1].startswith("1,1,1,") and lines[1].endswith(",,,")
        jsonl = format_trace(solve(p1, SolverConfig(max_iters=2)), "jsonl")
        assert '"gamma": null' in jsonl.splitlines()[0]


class TestTables:
    def test_table1(self, capsys):
        assert cli.main(["reproduce-tables", "1"]) == 0
        out = capsys.readouterr().out
        assert out.count("PASS") == 4 and "table 1: pass" in out
        assert "computed=1.4464285714" in out

    def test_table2_reports_only(self, capsys):
        assert cli.main(["reproduce-tables", "2"]) == 0
        out = capsys.readouterr().out
        assert "report only" in out and "1.402141502" in out

    def test_invalid_id(self, capsys):
        with pytest.raises(SystemExit) as info:
            cli.main(["reproduce-tables", "3"])
        assert info.value.code == 2
        assert "invalid choice" in capsys.readouterr().err

import subprocess
import sys
from pathlib import Path

SCRIPT = Path(__file__).resolve().parents[1] / "benchmarks" / "bench_backends.py"


def test_benchmark_runs_both_backends():
    proc = subprocess.run([sys.executable, str(SCRIPT), "--repeat", "1"],
                          capture_output=True, text=True, timeout=300)
    assert proc.returncode == 0, proc.stderr
    header, *rows = proc.stdout.strip().splitlines()
    assert "numpy" in header
    assert any(r.startswith("affine_sefpp_run") for r in rows)

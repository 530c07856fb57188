import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from lsalloc.cli import main

ROOT = Path(__file__).resolve().parents[1]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_growth(capsys):
    code, out, _ = run(capsys, "growth", "cycle:n=1048576", "--gamma", "0.1", "--gamma", "0.5")
    assert code == 0
    d = json.loads(out)
    assert (d["r1"], d["r2"]) == (3, 3)
    assert d["r1_gamma"] == {"0.1": 2, "0.5": 2}
    code, out, _ = run(capsys, "growth", "complete:n=100")
    assert json.loads(out)["r2"] == 1


@pytest.mark.parametrize("argv", [
    ["growth", "cycle:n=-1"],
    ["growth", "cycle:n=8", "--gamma", "0.7"],
    ["simulate", "cycle:n=8", "local-search"],
    ["simulate", "cycle:n=8", "teleport", "--balls", "3"],
    ["simulate", "cycle:n=8", "local-search", "--until-blanket"],
    ["simulate", "cycle:n=8", "local-search", "--balls", "3", "--delta", "0.5"],
    ["simulate", "cycle:n=8", "poisson:local-search", "--until-cover"],
    ["simulate", "cycle:n=8", "local-search", "--balls", "3", "--trace"],
    ["couple", "lipschitz", "cycle:n=8", "--cases", "0"],
    ["couple", "majorization", "cycle:n=8", "--mu", "bogus"],
    ["sweep", "/nonexistent/config.ini"],
])
def test_usage_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and "error" in err


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "cycle:n=8", "local-search", "--balls", "3", "--until-cover"])
    assert exc.value.code == 2


def test_simulate_complete_until_cover(capsys):
    code, out, _ = run(capsys, "simulate", "complete:n=16", "local-search", "--until-cover", "--trials", "5")
    assert code == 0
    runs = json.loads(out)["runs"]
    assert [r["cover_time"] for r in runs] == [16] * 5


def test_simulate_zero_balls(capsys):
    code, out, _ = run(capsys, "simulate", "cycle:n=5", "local-search", "--balls", "0")
    assert json.loads(out)["runs"][0]["final_loads"] == [0] * 5


def test_simulate_csv_and_trace(capsys, tmp_path):
    code, out, _ = run(capsys, "simulate", "cycle:n=64", "local-search", "--until-blanket", "--delta", "2",
                       "--format", "csv", "--trials", "2", "--trace", "--trace-dir", str(tmp_path))
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 2 and rows[0]["blanket_2.0"]
    trace = (tmp_path / "trace_0.csv").read_text().splitlines()
    assert trace[0] == "ball,birthplace,allocated,path_length"
    assert len(trace) - 1 == int(rows[0]["balls"])


def test_simulate_other_processes(capsys):
    for proc in ("one-choice", "d-choice:d=2", "poisson:local-search", "poisson:d-choice:d=3"):
        code, out, _ = run(capsys, "simulate", "cycle:n=32", proc, "--balls", "64")
        assert code == 0 and json.loads(out)["process"] == proc
    code, out, _ = run(capsys, "simulate", "complete:n=10", "coupon", "--until-cover")
    assert json.loads(out)["runs"][0]["cover_time"] == 10


def test_simulate_seed_determinism(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert main(["simulate", "torus:8x8", "local-search", "--balls", "200", "--seed", "7",
                     "--trials", "3", "-o", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_couple(capsys, tmp_path):
    code, out, _ = run(capsys, "couple", "lipschitz", "cycle:n=32", "--cases", "1000")
    assert code == 0 and json.loads(out)["cases"] == 1000
    code, out, _ = run(capsys, "couple", "removal", "cycle:n=32", "--balls", "1", "--cases", "10")
    assert code == 0
    mu = tmp_path / "mu.txt"
    # distance to vertex 0 on the 8x8 torus (id = 8 * x + y)
    mu.write_text("".join(f"{8 * x + y} {min(x, 8 - x) + min(y, 8 - y)}\n" for x in range(8) for y in range(8)))
    code, _, _ = run(capsys, "couple", "majorization", "torus:8x8", "--mu", f"file:{mu}", "--cases", "20")
    assert code == 0
    code, _, _ = run(capsys, "couple", "coupon", "regular:n=256,d=4,seed=1", "--balls", "1024", "--cases", "20")
    assert code == 0


SMALL_SWEEP = """
[sweep]
graph = cycle:n={n}
trials = 1
seed = 5
metrics = max_load, cover_time
balls = cover
[grid]
n = 64, 128
"""


def test_sweep_csv_stable(tmp_path, capsys):
    cfg = tmp_path / "s.ini"
    cfg.write_text(SMALL_SWEEP)
    outs = []
    for k in range(2):
        out = tmp_path / f"o{k}.csv"
        assert main(["sweep", str(cfg), "-o", str(out), "--workers", "2"]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    assert outs[0].decode().startswith("family,n,params,process,metric")


def test_sweep_band_and_errors(tmp_path, capsys):
    cfg = tmp_path / "s.ini"
    cfg.write_text(SMALL_SWEEP)
    code, _, err = run(capsys, "sweep", str(cfg), "--band", "max_load:one:1000")
    assert code == 0 and "pass" in err
    code, _, err = run(capsys, "sweep", str(cfg), "--band", "cover_time:one:1.0000001")
    assert code == 1 and "FAIL" in err
    code, _, _ = run(capsys, "sweep", str(cfg), "--band", "max_load:bogus:2")
    assert code == 2
    cfg.write_text("[sweep]\ngraph=cycle:n={n}\n[grid]\nn=\n")
    code, _, err = run(capsys, "sweep", str(cfg))
    assert code == 2


def test_help_lists_grammar(capsys):
    with pytest.raises(SystemExit):
        main(["--help"])
    out = capsys.readouterr().out
    assert "grammar v1" in out and "torus:16x16" in out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "lsalloc", "growth", "cycle:n=64"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["n"] == 64

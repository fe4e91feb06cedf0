"""End-to-end tests of the command-line driver."""

from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path

import pytest

from echolat import __version__
from echolat.cli import main

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def scenario(name: str) -> str:
    return str(SCENARIO_DIR / f"{name}.json")


def test_solve_ambiguous_3d(capsys):
    code, out, err = run_cli(capsys, "solve", scenario("ambiguous_3d"))
    assert code == 0 and err == ""
    assert f"echolat {__version__}" in out
    assert "path: quadratic" in out
    assert "rank: 4" in out
    assert "candidates: 2" in out
    assert "time=-0.2190029602074753" in out
    assert "time=0.0 position=(0.0, 0.0, 0.0)" in out
    assert "spurious=true" not in out


def test_solve_spurious_2d(capsys):
    code, out, _ = run_cli(capsys, "solve", scenario("spurious_2d"))
    assert code == 0
    assert out.count("spurious=true") == 1
    assert out.count("spurious=false") == 1
    assert "time=0.0 position=(0.0, 0.0)" in out


def test_solve_degenerate_linear(capsys):
    code, out, _ = run_cli(capsys, "solve", scenario("degenerate_linear_2d"))
    assert code == 0
    assert "candidates: 1" in out


def test_match_equal_times(capsys):
    code, out, _ = run_cli(capsys, "match", scenario("equal_times_2d"))
    assert code == 0
    assert "candidate-tuples: 1" in out
    assert "accepted-tuples: 1" in out
    assert "events: 1" in out
    assert "event 1: time=0.0 position=(0.0, 0.0)" in out


def test_match_keep_ambiguous_flag(capsys):
    code, out, _ = run_cli(capsys, "match", scenario("ambiguous_3d"))
    assert code == 0
    assert "events: 2" in out
    assert out.count(" ambiguous=true") == 2  # leading space: skip the config line
    code, out, _ = run_cli(capsys, "match", scenario("ambiguous_3d"), "--no-keep-ambiguous")
    assert code == 0
    assert "events: 0" in out
    assert "dropped-ambiguous: 1" in out


def test_detect_walls_shoebox(capsys):
    code, out, _ = run_cli(capsys, "detect-walls", scenario("shoebox_3d"))
    assert code == 0
    assert "walls: 6" in out
    assert "direct-sound-events: 1" in out
    assert out.count("wall ") == 6
    offsets = sorted(
        round(float(line.rsplit("offset=", 1)[1]), 6)
        for line in out.splitlines()
        if line.startswith("wall ")
    )
    assert offsets == [-0.0, 0.0, 0.0, 2.5, 3.0, 4.0]


def test_simulate_shoebox(capsys):
    code, out, _ = run_cli(capsys, "simulate", scenario("shoebox_3d"))
    assert code == 0
    assert "walls: 6" in out
    assert "include-direct: true" in out
    # 6 echoes + direct sound per sensor
    for i in range(5):
        line = next(l for l in out.splitlines() if l.startswith(f"sensor {i}:"))
        assert len(line.split()[2:]) == 7


def test_check_geometry_reports_failing_pattern(capsys):
    code, out, _ = run_cli(capsys, "check-geometry", scenario("ambiguous_3d"))
    assert code == 0
    assert "noncoplanar: true" in out
    assert "condition-ok: false" in out
    assert "pattern 1: (+,+,+,+,+)" in out


def test_check_geometry_clean_layout(capsys):
    code, out, _ = run_cli(capsys, "check-geometry", scenario("shoebox_3d"))
    assert code == 0
    assert "condition-ok: true" in out
    assert "failing-sign-patterns: 0" in out


def test_check_geometry_not_applicable(capsys):
    # 3 sensors in 2 dimensions is n+1, not n+2: condition not defined
    code, out, _ = run_cli(capsys, "check-geometry", scenario("spurious_2d"))
    assert code == 0
    assert "condition-ok: n/a" in out


def test_goodness_shoebox(capsys):
    code, out, _ = run_cli(capsys, "goodness", scenario("shoebox_3d"), "--trials", "1")
    assert code == 0
    assert "trials: 1" in out
    assert "ghost-walls: 0" in out
    assert "missed-walls: 0" in out
    assert "mixed-residual-margin: " in out


def test_output_csv_files(capsys, tmp_path):
    out_dir = tmp_path / "out"
    code, _, _ = run_cli(capsys, "solve", scenario("ambiguous_3d"), "--output", str(out_dir))
    assert code == 0
    content = (out_dir / "events.csv").read_text()
    lines = content.splitlines()
    assert lines[0] == "time,x1,x2,x3,spurious,residual"
    assert len(lines) == 3
    assert lines[1].startswith("-0.2190029602074753,")
    assert ",false," in lines[1]

    code, _, _ = run_cli(capsys, "detect-walls", scenario("shoebox_3d"), "--output", str(out_dir))
    assert code == 0
    walls = (out_dir / "walls.csv").read_text().splitlines()
    assert walls[0] == "n1,n2,n3,offset"
    assert len(walls) == 7
    assert (out_dir / "events.csv").exists()

    code, _, _ = run_cli(capsys, "simulate", scenario("shoebox_3d"), "--output", str(out_dir))
    assert code == 0
    receptions = (out_dir / "receptions.csv").read_text().splitlines()
    assert receptions[0] == "sensor,time"
    assert len(receptions) == 1 + 5 * 7


def test_output_is_deterministic(capsys, tmp_path):
    a_dir, b_dir = tmp_path / "a", tmp_path / "b"
    code, out_a, _ = run_cli(capsys, "detect-walls", scenario("shoebox_3d"), "--output", str(a_dir))
    assert code == 0
    code, out_b, _ = run_cli(capsys, "detect-walls", scenario("shoebox_3d"), "--output", str(b_dir))
    assert code == 0
    assert out_a == out_b
    for name in ("walls.csv", "events.csv"):
        assert (a_dir / name).read_bytes() == (b_dir / name).read_bytes()


def test_exit_2_on_parse_and_validation_problems(capsys, tmp_path):
    code, _, err = run_cli(capsys, "solve", str(tmp_path / "nope.json"))
    assert code == 2 and "error:" in err

    bad = tmp_path / "bad.json"
    bad.write_text('{"dimension": 2, "sensors": [[0, 0], [1, 1]], "wombat": 3}')
    code, _, err = run_cli(capsys, "solve", str(bad))
    assert code == 2 and "wombat" in err

    # shoebox scenario has no reception_table, so solve cannot run
    code, _, err = run_cli(capsys, "solve", scenario("shoebox_3d"))
    assert code == 2 and "reception_table" in err

    # 3 sensors in 2d is not the n+2 the matcher needs
    code, _, err = run_cli(capsys, "match", scenario("spurious_2d"))
    assert code == 2

    code, _, err = run_cli(capsys, "detect-walls", scenario("shoebox_3d"), "--budget", "3")
    assert code == 2 and "budget" in err


def test_exit_3_on_numeric_failure(capsys, tmp_path):
    doc = {
        "dimension": 2,
        "sensors": [[0, 0], [1, 0], [2, 0]],  # collinear: cannot span the plane
        "reception_table": [[1.0], [1.0], [1.0]],
    }
    path = tmp_path / "collinear.json"
    path.write_text(json.dumps(doc))
    code, _, err = run_cli(capsys, "solve", str(path))
    assert code == 3
    assert "NotSpanning" in err


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert f"echolat {__version__}" in capsys.readouterr().out


def test_console_script_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "echolat.cli", "solve", scenario("equal_times_2d")],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "candidates: 2" in proc.stdout

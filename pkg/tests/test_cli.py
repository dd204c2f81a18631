from __future__ import annotations

import csv
import io
import json
import subprocess
import sys

import pytest

from tmpidan.cli import main, row_seed
from tmpidan.report import BENCH_COLUMNS, MULTI_BENCH_COLUMNS, RUN_COLUMNS
from tmpidan.workspace import load_scenario


def table(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_run_hanoi_ideal(capsys):
    assert main(["run", "--domain", "hanoi", "--disks", "3", "--ideal-motion"]) == 0
    (row,) = table(capsys.readouterr().out)
    assert row["d"] == "7" and row["solved"] == "true"


def test_run_one_row_per_rep(capsys):
    code = main(["run", "--objects", "6", "--reps", "3", "--seed", "2", "--motion-budget-ms", "200"])
    rows = table(capsys.readouterr().out)
    assert [r["rep"] for r in rows] == ["0", "1", "2"]
    assert tuple(rows[0]) == RUN_COLUMNS
    assert code == (0 if all(r["solved"] == "true" for r in rows) else 2)


def test_run_unsolved_exit_code(capsys):
    assert main(["run", "--domain", "hanoi", "--disks", "3", "--ideal-motion", "--depth-limit", "2"]) == 2
    assert table(capsys.readouterr().out)[0]["exit"] == "depth-limit"


def test_bench_files(tmp_path):
    out = tmp_path / "b.csv"
    main(["bench", "--objects", "4", "8", "--reps", "3", "--seed", "1", "--motion-budget-ms", "200",
          "--out", str(out)])
    agg = table(out.read_text())
    assert tuple(agg[0]) == BENCH_COLUMNS
    assert [r["objects"] for r in agg] == ["4", "8"]
    assert [r["runs"] for r in agg] == ["3", "3"]
    assert len(table((tmp_path / "b_runs.csv").read_text())) == 6
    assert len(table((tmp_path / "b_plot.csv").read_text())) == 6
    assert (tmp_path / "b_fig.png").stat().st_size > 0


def test_bench_multi_robot_blocks(tmp_path):
    out = tmp_path / "m.csv"
    main(["bench", "--objects", "8", "--robots", "2", "--reps", "2", "--seed", "3", "--no-timing",
          "--motion-budget-ms", "200", "--out", str(out)])
    agg = table(out.read_text())
    assert tuple(agg[0]) == MULTI_BENCH_COLUMNS
    assert [r["robot"] for r in agg] == ["R1", "R2"]
    assert not (tmp_path / "m_fig.png").exists()


def test_bench_jobs_do_not_change_output(tmp_path):
    outs = []
    for jobs in ("1", "3"):
        out = tmp_path / f"j{jobs}.csv"
        main(["bench", "--objects", "4", "6", "--reps", "2", "--seed", "5", "--no-timing", "--jobs", jobs,
              "--motion-budget-ms", "100", "--out", str(out)])
        outs.append((out.read_bytes(), (tmp_path / f"j{jobs}_runs.csv").read_bytes()))
    assert outs[0] == outs[1]


def test_row_seeds_independent():
    seeds = {row_seed(7, i) for i in range(1000)}
    assert len(seeds) == 1000
    assert row_seed(7, 3) == row_seed(7, 3) != row_seed(8, 3)


def test_generate_validate_round_trip(tmp_path, capsys):
    path = tmp_path / "s.json"
    assert main(["generate", "--objects", "9", "--seed", "4", "--out", str(path)]) == 0
    assert len(load_scenario(path).snapshot.objects) == 9
    assert main(["validate", str(path)]) == 0
    assert "ok" in capsys.readouterr().out


def invalid(tmp_path, mutate):
    path = tmp_path / "s.json"
    main(["generate", "--objects", "5", "--seed", "4", "--out", str(path)])
    doc = json.loads(path.read_text())
    mutate(doc["objects"])
    path.write_text(json.dumps(doc))
    return path


def test_validate_overlap(tmp_path, capsys):
    def overlap(objs):
        objs[1]["pose"] = list(objs[0]["pose"])

    assert main(["validate", str(invalid(tmp_path, overlap))]) == 2
    assert "overlap" in capsys.readouterr().out


def test_validate_out_of_bounds(tmp_path, capsys):
    def outside(objs):
        objs[0]["pose"] = [2.5, 2.5, 0.0]

    assert main(["validate", str(invalid(tmp_path, outside))]) == 2
    assert "outside" in capsys.readouterr().out


def test_malformed_scenario(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "objects": [,]\n}')
    assert main(["validate", str(path)]) == 1
    err = capsys.readouterr().err
    assert "line 2" in err and "column" in err


@pytest.mark.parametrize("argv", [
    ["run", "--bogus"],
    ["run", "--reps", "0"],
    ["run", "--fail-prob", "1.5"],
    ["bench", "--domain", "nowhere"],
])
def test_usage_errors(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        code = main(argv)
        raise SystemExit(code)
    assert exc.value.code == 1
    assert "error" in capsys.readouterr().err


def test_seed_from_environment(monkeypatch, capsys):
    monkeypatch.setenv("TMPIDAN_SEED", "11")
    main(["run", "--objects", "5", "--no-timing", "--motion-budget-ms", "100"])
    env = capsys.readouterr().out
    main(["run", "--objects", "5", "--no-timing", "--seed", "11", "--motion-budget-ms", "100"])
    assert capsys.readouterr().out == env
    assert table(env)[0]["seed"] == "11"
    monkeypatch.setenv("TMPIDAN_SEED", "abc")
    assert main(["run", "--objects", "5"]) == 1


def test_json_format(capsys):
    main(["run", "--domain", "hanoi", "--disks", "2", "--ideal-motion", "--format", "json"])
    (doc,) = json.loads(capsys.readouterr().out)
    assert tuple(doc) == RUN_COLUMNS and doc["d"] == 3 and doc["solved"] is True


def test_console_script():
    proc = subprocess.run([sys.executable, "-m", "tmpidan.cli", "run", "--domain", "kitchen", "--no-timing"],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    assert table(proc.stdout)[0]["d"] == "1"

"""Metrics tables, aggregates, plot data and figures.

Column orders are frozen here; golden-file tests compare written bytes.
"""

from __future__ import annotations

import csv
import io
import json
import statistics
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

from scipy import stats

from .planner import RunMetrics

RUN_COLUMNS = (
    "domain", "objects", "robot", "seed", "rep", "d", "TP_s", "MP_s", "MP_attempts",
    "executions", "objects_rearranged", "solved", "exit",
)
BENCH_COLUMNS = (
    "objects", "avg_d", "TP_s", "MP_s", "MP_attempts", "objects_rearranged",
    "std_d", "std_TP_s", "std_MP_s", "std_MP_attempts", "std_objects_rearranged",
    "runs", "solved",
)
MULTI_BENCH_COLUMNS = ("robot",) + BENCH_COLUMNS
PLOT_COLUMNS = ("d", "TP_s")
TIMING_COLUMNS = frozenset({"TP_s", "MP_s", "std_TP_s", "std_MP_s"})

# run-row metric -> aggregate column
_MEANS = (("d", "avg_d"), ("TP_s", "TP_s"), ("MP_s", "MP_s"), ("MP_attempts", "MP_attempts"),
          ("objects_rearranged", "objects_rearranged"))


def run_row(m: RunMetrics, domain: str, objects: int, seed: int, rep: int, robot: str = "") -> dict:
    return {
        "domain": domain,
        "objects": objects,
        "robot": robot,
        "seed": seed,
        "rep": rep,
        "d": m.d,
        "TP_s": m.tp_s,
        "MP_s": m.mp_s,
        "MP_attempts": m.attempts,
        "executions": m.executions,
        "objects_rearranged": m.rearranged,
        "solved": m.solved,
        "exit": m.exit,
    }


def aggregate(rows: Sequence[dict], by_robot: bool = False) -> list[dict]:
    """Mean and population standard deviation per object count (and robot)."""
    groups: dict = {}
    for r in rows:
        key = (r["robot"], r["objects"]) if by_robot else (r["objects"],)
        groups.setdefault(key, []).append(r)
    out = []
    for key in sorted(groups):
        grp = groups[key]
        agg = {"robot": key[0]} if by_robot else {}
        agg["objects"] = key[-1]
        for src, dst in _MEANS:
            vals = [float(r[src]) for r in grp]
            agg[dst] = statistics.fmean(vals)
            agg["std_" + ("d" if src == "d" else src)] = statistics.pstdev(vals)
        agg["runs"] = len(grp)
        agg["solved"] = sum(bool(r["solved"]) for r in grp)
        out.append(agg)
    return out


def plot_rows(rows: Iterable[dict]) -> list[dict]:
    """(d, TP time) pairs for the depth-versus-planning-time trend."""
    return [{"d": r["d"], "TP_s": r["TP_s"]} for r in rows]


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    r2: float


def linear_fit(xs: Sequence[float], ys: Sequence[float]) -> LinearFit:
    res = stats.linregress(xs, ys)
    return LinearFit(float(res.slope), float(res.intercept), float(res.rvalue) ** 2)


def _cell(value, column: str, timing: bool) -> str:
    if column in TIMING_COLUMNS and not timing:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def _jsonable(value, column: str, timing: bool):
    if column in TIMING_COLUMNS and not timing:
        return None
    if isinstance(value, float):
        return round(value, 6)
    return value


def format_table(rows: Sequence[dict], columns: Sequence[str], fmt: str = "csv", timing: bool = True) -> str:
    """Render rows as CSV or as a JSON list with the same fields in the same order."""
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_cell(r.get(c, ""), c, timing) for c in columns])
        return buf.getvalue()
    if fmt == "json":
        docs = [{c: _jsonable(r.get(c), c, timing) for c in columns} for r in rows]
        return json.dumps(docs, indent=2) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def write_table(path: Path, rows: Sequence[dict], columns: Sequence[str], fmt: str = "csv",
                timing: bool = True) -> None:
    Path(path).write_text(format_table(rows, columns, fmt, timing))


def sibling(path: Path, suffix: str, fmt: Optional[str] = None) -> Path:
    """``out.csv`` -> ``out_runs.csv`` and friends."""
    path = Path(path)
    ext = "." + fmt if fmt else path.suffix
    return path.with_name(f"{path.stem}_{suffix}{ext}")


def plot_depth_time(rows: Sequence[dict], path: Path, title: str = "") -> Optional[LinearFit]:
    """Scatter of task-planning time against depth with a least-squares line."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    xs = [float(r["d"]) for r in rows]
    ys = [float(r["TP_s"]) * 1e3 for r in rows]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.scatter(xs, ys, s=14, color="tab:blue", label="runs")
    fit = None
    if len(set(xs)) > 1:
        fit = linear_fit(xs, ys)
        lo, hi = min(xs), max(xs)
        ax.plot([lo, hi], [fit.intercept + fit.slope * lo, fit.intercept + fit.slope * hi],
                color="tab:red", label=f"fit, $R^2$={fit.r2:.2f}")
        fit = LinearFit(fit.slope / 1e3, fit.intercept / 1e3, fit.r2)
    ax.set_xlabel("network depth d")
    ax.set_ylabel("task planning time [ms]")
    if title:
        ax.set_title(title)
    ax.legend(loc="upper left")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return fit

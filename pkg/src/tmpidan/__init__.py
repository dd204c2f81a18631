"""Iterative-deepening AND/OR graph networks for task and motion planning."""

from __future__ import annotations

from .planner import PlannerConfig, RunMetrics, run_multi, run_single, solve

__version__ = "0.1.0"

__all__ = ["PlannerConfig", "RunMetrics", "run_multi", "run_single", "solve", "__version__"]

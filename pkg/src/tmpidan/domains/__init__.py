"""Benchmark domains: graph templates, bindings and scenario generators."""

from __future__ import annotations

from .clutter import baxter, clutter_template, generate_clutter, pandas, two_blocker_scene
from .hanoi import hanoi_scenario, hanoi_template, next_move
from .kitchen import kitchen_scenario, kitchen_template

TEMPLATES = {
    "clutter": clutter_template,
    "hanoi": hanoi_template,
    "kitchen": kitchen_template,
}

__all__ = [
    "TEMPLATES",
    "baxter",
    "clutter_template",
    "generate_clutter",
    "hanoi_scenario",
    "hanoi_template",
    "kitchen_scenario",
    "kitchen_template",
    "next_move",
    "pandas",
    "two_blocker_scene",
]

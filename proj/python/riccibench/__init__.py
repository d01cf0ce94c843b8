"""Positive Ricci construction checks: block builders, gluing, feasibility and SW numbers."""

import json

from . import _core
from ._core import BlockError, ParamError, ScenarioError, block_names, round_sphere_curvature, sw_number, total_class

__all__ = [
    "BlockError",
    "ParamError",
    "ScenarioError",
    "block_names",
    "round_sphere_curvature",
    "run_block",
    "run_pipeline",
    "run_scenario",
    "sw_number",
    "total_class",
]


def run_block(name, params=None, grid=_core.DEFAULT_GRID):
    """Build one block and return its report as a dict."""
    return json.loads(_core.run_block_json(name, json.dumps(params or {}), grid))


def run_pipeline(graph, grid=_core.DEFAULT_GRID):
    """Assemble a pipeline graph (dict) and return the report as a dict."""
    return json.loads(_core.pipeline_json(json.dumps(graph), grid))


def run_scenario(scenario, grid=None, seed=None):
    """Run a scenario dict; returns (status, report, files) with files mapping names to text."""
    status, report, files, _ = _core.run_scenario_json(json.dumps(scenario), grid, seed)
    return status, json.loads(report), dict(files)

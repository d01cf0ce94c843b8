import math
import os

import pytest

import riccibench

SCENARIOS = os.path.join(os.environ.get("RB_SOURCE_DIR", os.path.join(os.path.dirname(__file__), "..", "..")), "scenarios")


def test_native_module_is_loaded():
    assert riccibench._core.__name__ == "riccibench._core"
    assert "handle1" in riccibench.block_names()


def test_round_sphere_curvature():
    entries = dict(riccibench.round_sphere_curvature(2, 2, 0.7))
    assert entries["Ric(dt,dt)"] == pytest.approx(4.0, abs=1e-8)
    for label, value in entries.items():
        if label.startswith("sec"):
            assert value == pytest.approx(1.0, abs=1e-8)


def test_block_report_round_trip():
    report = riccibench.run_block("wu", {"variant": "g00"}, grid=256)
    assert report["verdict"] == "pass"
    assert report["min_margin"] > 0
    assert report["aux"]["Ric(dt,dt)@0"] == pytest.approx((math.pi / 2) ** 2, abs=1e-6)


def test_errors_map_to_python_exceptions():
    with pytest.raises(riccibench.ParamError):
        riccibench.run_block("cone", {"zz": 1})
    with pytest.raises(ValueError):
        riccibench.run_block("nope")
    with pytest.raises(riccibench.ScenarioError):
        riccibench.run_scenario({"command": "plot"})
    with pytest.raises(riccibench.BlockError):
        riccibench.run_block("wu", {"variant": "blended", "eps": 0.2}, grid=128)


def test_sw_numbers():
    assert riccibench.total_class([("W", 2)]) == "1 + a + (a^3)*"
    assert riccibench.sw_number([("W", 2)], [(3, 1), (2, 3)]) == 1
    assert riccibench.sw_number([("W", 2)], [(7, 1), (2, 1)]) == 0
    assert riccibench.sw_number([("W", 1), ("CP", 2)], [(7, 1), (2, 1)]) == 1
    with pytest.raises(ValueError):
        riccibench.sw_number([("RP", 2)], [(2, 1)])


def test_scenario_sw_table():
    status, report, files = riccibench.run_scenario({"command": "sw-table"})
    assert status == 0
    assert report["values"] == [[1, 0], [1, 1]]
    assert list(files) == ["report.json"]


def test_scenario_file_pipeline():
    import json

    with open(os.path.join(SCENARIOS, "wu_blended.json")) as fh:
        scenario = json.load(fh)
    status, report, files = riccibench.run_scenario(scenario, grid=512)
    assert status == 0
    assert report["grid"] == 512
    assert "wu_blended_ricci.csv" in files
    assert files["wu_blended_ricci.csv"].splitlines()[0].startswith("t,")

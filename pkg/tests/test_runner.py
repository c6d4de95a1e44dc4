import json

import pytest

from polarsim.config import build_config
from polarsim.errors import BracketError, ConfigError
from polarsim.runner import bisect_critical_mass, run, sweep
from polarsim.serialize import fmt


def quick_cfg(**over):
    raw = {
        "model": "bks1d", "mass": 0.9, "t_end": 0.5,
        "z_max": 20.0, "n_cells": 120,
        "ic": {"kind": "step", "width": 1.0},
        "output_every": 0.1, "trace_cap": 50.0,
    }
    raw.update(over)
    raw = {k: v for k, v in raw.items() if v is not None}
    return build_config(raw)


def detect_cfg(**over):
    # fixed concentration cap valid across swept masses: above every
    # subcritical peak trace, below every super-critical saturation level
    raw = {
        "model": "bks1d", "mass": 0.9, "t_end": 30.0,
        "z_max": 20.0, "n_cells": 200,
        "ic": {"kind": "step", "width": 1.0},
        "output_every": 1.0, "trace_cap": 4.0,
    }
    raw.update(over)
    return build_config(raw)


class TestRun:
    def test_records_strictly_increasing(self):
        res = run(quick_cfg())
        times = [r.t for r in res.records]
        assert all(b > a for a, b in zip(times, times[1:]))
        assert times[0] == 0.0 and times[-1] == 0.5

    def test_terminal_mass_consistent(self):
        res = run(quick_cfg())
        assert res.terminal_field.mass == pytest.approx(
            res.records[-1].mass, rel=1e-12
        )

    def test_deterministic_payload(self):
        a = run(quick_cfg()).to_payload()
        b = run(quick_cfg()).to_payload()
        assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)

    def test_all_models_dispatch(self):
        configs = [
            quick_cfg(),
            quick_cfg(model="rescaled1d", mass=0.5, z_max=10.0),
            quick_cfg(model="exchange1d", mass=2.0, z_max=15.0),
            quick_cfg(model="interval1d", mass=1.0, L=5.0, z_max=None),
            quick_cfg(model="exchange1d", mass=0.5, z_max=12.0),
            quick_cfg(model="range1d", alpha=1.0),
            build_config({
                "model": "transversal2d", "mass": 1.0, "t_end": 0.05,
                "ny": 16, "nz": 16, "y_min": -3.0, "y_max": 3.0, "z_max": 3.0,
                "ic": {"kind": "half_gaussian", "sigma": 0.8, "sigma_y": 0.8},
                "output_every": 0.025,
            }),
            build_config({
                "model": "potential2d", "mass": 0.5, "t_end": 0.05, "C_2d": 1.0,
                "ny": 16, "nz": 16, "y_min": -3.0, "y_max": 3.0, "z_max": 3.0,
                "ic": {"kind": "half_gaussian", "sigma": 0.8, "sigma_y": 0.8},
                "output_every": 0.025,
            }),
        ]
        for cfg in configs:
            res = run(cfg)
            assert len(res.records) >= 2, cfg.model


class TestSweep:
    def test_rows_ordered_and_flagged(self):
        base = detect_cfg()
        values = [0.5, 0.9, 1.5]
        rows = sweep(base, "mass", values)
        assert [r.value for r in rows] == values
        assert [r.detected for r in rows] == [False, False, True]

    def test_empty_values(self):
        assert sweep(quick_cfg(), "mass", []) == []

    def test_concurrent_matches_serial(self):
        base = quick_cfg(t_end=2.0)
        values = [0.6, 0.8, 1.0]
        serial = sweep(base, "mass", values, max_workers=1)
        parallel = sweep(base, "mass", values, max_workers=3)
        for a, b in zip(serial, parallel):
            assert a.to_payload() == b.to_payload()

    def test_unknown_param(self):
        with pytest.raises(ConfigError):
            sweep(quick_cfg(), "spin", [1.0])


class TestBisect:
    def test_bracket_estimate(self):
        base = detect_cfg()
        result = bisect_critical_mass(base, 0.5, 2.0, 0.1)
        assert result.m_hi - result.m_lo <= 0.1
        assert result.m_lo <= result.estimate <= result.m_hi
        assert 0.9 <= result.estimate <= 1.2

    def test_bad_bracket_reports_both(self):
        base = detect_cfg()
        with pytest.raises(BracketError) as err:
            bisect_critical_mass(base, 1.5, 2.0, 0.1)
        msg = str(err.value)
        assert "m_lo" in msg and "m_hi" in msg

    def test_probe_budget_for_loose_tol(self):
        base = detect_cfg()
        result = bisect_critical_mass(base, 0.5, 2.0, 0.5)
        # two endpoint probes plus at most two interior batches
        assert len(result.probes) <= 4


def test_fmt_17_digits():
    assert fmt(1.0 / 3.0) == "0.33333333333333331"
    assert fmt(None) == ""
    assert fmt(2.0) == "2"

"""Measured-curve ingest: parsing, validation, interpolation contracts.

The shipped digitizations pin the plateau efficiencies (C 5%, L 4%,
S 1%) and the pump draw curve; interpolated lookups are exact at knots,
linear between them, bounded by bracketing knots, and refuse to
extrapolate.
"""

import io
import os

import numpy as np
import pytest

from sclink.measure import (CurveError, CurveRangeError, EfficiencyCurve,
                            PUMP_DRAW_FILES, default_efficiency_curve,
                            default_pump_draw_curve, efficiency_at,
                            load_efficiency_curve, load_pump_draw_curve,
                            pump_draw_at, save_efficiency_curve)
from sclink.units import dbm_to_mw

HERE = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
DATA = os.path.join(HERE, "src", "sclink", "data")


def _make_source(rows, value_column="efficiency_pct", meta=()):
    lines = list(meta) + [f"output_mw\t{value_column}"]
    lines += [f"{x}\t{y}" for x, y in rows]
    return io.StringIO("\n".join(lines))


def test_c_band_plateau(pce_curves):
    curve = pce_curves["C"]
    assert curve.band_label == "C"
    assert curve.efficiency[-1] == pytest.approx(0.05)
    # lookup at the saturation output (23 dBm ~ 199.5 mW)
    assert efficiency_at(curve, dbm_to_mw(23.0)) == pytest.approx(0.05, abs=1e-3)


def test_s_band_plateau(pce_curves):
    curve = pce_curves["S"]
    assert efficiency_at(curve, curve.saturation_mw) == pytest.approx(0.01, abs=2e-4)


def test_l_band_below_c(pce_curves):
    assert pce_curves["L"].efficiency[-1] < pce_curves["C"].efficiency[-1]


def test_single_row_rejected():
    with pytest.raises(CurveError, match="2 rows"):
        load_efficiency_curve(_make_source([(100.0, 5.0)]))


def test_non_monotone_output_names_row():
    src = _make_source([(10.0, 1.0), (30.0, 2.0), (20.0, 3.0), (40.0, 4.0)])
    with pytest.raises(CurveError, match="row 3"):
        load_efficiency_curve(src)


def test_negative_value_rejected():
    src = _make_source([(10.0, -1.0), (30.0, 2.0)])
    with pytest.raises(CurveError, match="negative"):
        load_efficiency_curve(src)


def test_missing_column_rejected():
    src = io.StringIO("output_mw\tsomething\n1\t2\n3\t4\n")
    with pytest.raises(CurveError, match="efficiency_pct"):
        load_efficiency_curve(src)


def test_knot_identity(pce_curves):
    curve = pce_curves["C"]
    for x, y in zip(curve.output_mw, curve.efficiency):
        assert efficiency_at(curve, float(x)) == pytest.approx(y, rel=1e-15)


def test_midpoint_is_mean(pce_curves):
    curve = pce_curves["C"]
    mid = 0.5 * (curve.output_mw[2] + curve.output_mw[3])
    want = 0.5 * (curve.efficiency[2] + curve.efficiency[3])
    assert efficiency_at(curve, float(mid)) == pytest.approx(want, rel=1e-15)


def test_no_extrapolation(pce_curves):
    curve = pce_curves["C"]
    with pytest.raises(CurveRangeError):
        efficiency_at(curve, curve.output_mw[-1] + 1.0)
    with pytest.raises(CurveRangeError):
        efficiency_at(curve, curve.output_mw[0] - 1.0)


def test_interpolation_bounded_by_knots(pce_curves):
    curve = pce_curves["S"]
    rng = np.random.default_rng(42)
    xs = rng.uniform(curve.output_mw[0], curve.output_mw[-1], 200)
    for x in xs:
        y = efficiency_at(curve, float(x))
        j = np.searchsorted(curve.output_mw, x)
        lo = min(curve.efficiency[j - 1], curve.efficiency[j])
        hi = max(curve.efficiency[j - 1], curve.efficiency[j])
        assert lo - 1e-15 <= y <= hi + 1e-15


def test_round_trip(tmp_path, pce_curves):
    path = tmp_path / "c.tsv"
    save_efficiency_curve(pce_curves["C"], path)
    again = load_efficiency_curve(str(path))
    assert np.array_equal(again.output_mw, pce_curves["C"].output_mw)
    assert np.array_equal(again.efficiency, pce_curves["C"].efficiency)
    assert again.band_label == "C"
    assert again.saturation_dbm == pce_curves["C"].saturation_dbm


def test_efficiency_bounds_enforced():
    with pytest.raises(CurveError, match=r"\(0, 0.5\)"):
        EfficiencyCurve(np.array([1.0, 2.0]), np.array([0.1, 0.6]))


def test_saturation_must_be_in_range():
    with pytest.raises(CurveError, match="saturation"):
        EfficiencyCurve(np.array([1.0, 2.0]), np.array([0.01, 0.02]),
                        saturation_dbm=23.0)


def test_pump_idle_draw_is_first_knot(pump_curve):
    table = np.loadtxt(os.path.join(DATA, "pump_draw_1365nm.tsv"), skiprows=2)
    assert pump_draw_at(pump_curve, 0.0) == pytest.approx(table[0, 1], rel=1e-12)


def test_pump_knot_identity(pump_curve):
    assert pump_draw_at(pump_curve, float(pump_curve.output_mw[5])) == \
        pytest.approx(pump_curve.draw_w[5], rel=1e-15)


def test_pump_curves_agree_at_250mw():
    draws = []
    for wl in PUMP_DRAW_FILES:
        curve = default_pump_draw_curve(wl)
        draws.append(pump_draw_at(curve, 250.0))
    draws = np.array(draws)
    assert np.max(draws) / np.min(draws) - 1.0 < 0.05


def test_pump_draw_exceeds_optical_output(pump_curve):
    # wallplug efficiency below 100 percent everywhere
    assert np.all(pump_curve.draw_w > pump_curve.output_mw * 1e-3)


def test_pump_draw_strictly_increasing_required():
    src = _make_source([(0.0, 1.0), (50.0, 1.0)], value_column="draw_w")
    with pytest.raises(CurveError, match="increasing"):
        load_pump_draw_curve(src)

"""Ingest of measured amplifier wallplug-efficiency and pump-draw curves.

File layout: tab-separated with one header row. Efficiency files carry
columns ``output_mw`` and ``efficiency_pct``; pump files carry
``output_mw`` and ``draw_w``. Comment lines starting with ``#`` may set
curve metadata (``# band:``, ``# saturation_dbm:``,
``# management_power_w:``). The shipped defaults are digitizations of
bench measurements and are marked as such in the files.

Lookups are piecewise linear with no extrapolation: measurement noise
does not justify higher-order fits, and monotone bracketing keeps the
interpolation testable.
"""

import io
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .units import dbm_to_mw

DEFAULT_MANAGEMENT_POWER_W = 8.0

_PCE_FILES = {"S": "pce_s_band.tsv", "C": "pce_c_band.tsv", "L": "pce_l_band.tsv"}
PUMP_DRAW_FILES = {
    1365: "pump_draw_1365nm.tsv",
    1385: "pump_draw_1385nm.tsv",
    1405: "pump_draw_1405nm.tsv",
    1425: "pump_draw_1425nm.tsv",
}


class CurveError(ValueError):
    """Malformed measurement table."""


class CurveRangeError(ValueError):
    """Query outside the measured range (no extrapolation)."""


@dataclass(frozen=True)
class EfficiencyCurve:
    """Wallplug efficiency (fraction) vs amplifier optical output (mW)."""

    output_mw: np.ndarray
    efficiency: np.ndarray
    band_label: str = ""
    saturation_dbm: float = float("nan")
    management_power_w: float = DEFAULT_MANAGEMENT_POWER_W

    def __post_init__(self):
        x = np.asarray(self.output_mw, dtype=float)
        y = np.asarray(self.efficiency, dtype=float)
        object.__setattr__(self, "output_mw", x)
        object.__setattr__(self, "efficiency", y)
        _check_columns(x, y, "efficiency")
        if np.any(y <= 0) or np.any(y >= 0.5):
            raise CurveError("efficiencies must lie in (0, 0.5)")
        if np.isfinite(self.saturation_dbm):
            sat = dbm_to_mw(self.saturation_dbm)
            if not x[0] <= sat <= x[-1]:
                raise CurveError(
                    f"saturation output {sat:.1f} mW outside measured range"
                )
        x.setflags(write=False)
        y.setflags(write=False)

    @property
    def saturation_mw(self):
        return dbm_to_mw(self.saturation_dbm)


@dataclass(frozen=True)
class PumpDrawCurve:
    """Electrical wall draw (W) vs Raman pump optical output (mW)."""

    output_mw: np.ndarray
    draw_w: np.ndarray
    label: str = ""

    def __post_init__(self):
        x = np.asarray(self.output_mw, dtype=float)
        y = np.asarray(self.draw_w, dtype=float)
        object.__setattr__(self, "output_mw", x)
        object.__setattr__(self, "draw_w", y)
        _check_columns(x, y, "draw")
        if np.any(np.diff(y) <= 0):
            raise CurveError("draw column must be strictly increasing")
        if np.any(y <= x * 1e-3):
            raise CurveError("electrical draw cannot be below the optical output")
        x.setflags(write=False)
        y.setflags(write=False)


def _check_columns(x, y, what):
    if x.ndim != 1 or x.shape != y.shape:
        raise CurveError("curve columns must be 1-D and equal length")
    if x.size < 2:
        raise CurveError(f"{what} curve needs at least 2 rows, got {x.size}")
    if np.any(x < 0) or np.any(y < 0):
        bad = int(np.argmax((x < 0) | (y < 0))) + 1
        raise CurveError(f"negative value at row {bad}")
    d = np.diff(x)
    if np.any(d <= 0):
        bad = int(np.argmax(d <= 0)) + 2
        raise CurveError(f"output column not strictly increasing at row {bad}")


def _parse_table(source, value_column):
    if hasattr(source, "read"):
        lines = source.read().splitlines()
    else:
        with open(source) as fh:
            lines = fh.read().splitlines()
    meta = {}
    header = None
    rows = []
    for lineno, raw in enumerate(lines):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line.lstrip("#").strip()
            if ":" in body:
                key, _, val = body.partition(":")
                meta[key.strip()] = val.strip()
            continue
        parts = line.split("\t")
        if header is None:
            header = [p.strip() for p in parts]
            if "output_mw" not in header or value_column not in header:
                raise CurveError(
                    f"expected columns 'output_mw' and '{value_column}', got {header}"
                )
            xi = header.index("output_mw")
            yi = header.index(value_column)
            continue
        try:
            rows.append((float(parts[xi]), float(parts[yi])))
        except (ValueError, IndexError):
            raise CurveError(f"unparseable row {lineno}: {raw!r}") from None
    if header is None:
        raise CurveError("missing header row")
    arr = np.array(rows, dtype=float).reshape(-1, 2)
    return arr, meta


def load_efficiency_curve(source):
    """Load and validate a wallplug-efficiency table (percent -> fraction)."""
    arr, meta = _parse_table(source, "efficiency_pct")
    return EfficiencyCurve(
        output_mw=arr[:, 0],
        efficiency=arr[:, 1] / 100.0,
        band_label=meta.get("band", ""),
        saturation_dbm=float(meta.get("saturation_dbm", "nan")),
        management_power_w=float(meta.get("management_power_w",
                                          DEFAULT_MANAGEMENT_POWER_W)),
    )


def load_pump_draw_curve(source, label=""):
    """Load and validate a pump wall-draw table."""
    arr, _ = _parse_table(source, "draw_w")
    return PumpDrawCurve(output_mw=arr[:, 0], draw_w=arr[:, 1], label=label)


def save_efficiency_curve(curve, path):
    with open(path, "w") as fh:
        if curve.band_label:
            fh.write(f"# band: {curve.band_label}\n")
        if np.isfinite(curve.saturation_dbm):
            fh.write(f"# saturation_dbm: {curve.saturation_dbm}\n")
        fh.write(f"# management_power_w: {curve.management_power_w}\n")
        fh.write("output_mw\tefficiency_pct\n")
        for x, y in zip(curve.output_mw, curve.efficiency):
            fh.write(f"{float(x)!r}\t{float(y * 100.0)!r}\n")


def _interp_no_extrapolation(x, xp, yp, what):
    xq = np.asarray(x, dtype=float)
    if np.any(xq < xp[0]) or np.any(xq > xp[-1]):
        raise CurveRangeError(
            f"{what} query {x} outside measured range [{xp[0]}, {xp[-1]}] mW"
        )
    out = np.interp(xq, xp, yp)
    return float(out) if np.isscalar(x) else out


def efficiency_at(curve, optical_output_mw):
    """Wallplug efficiency (fraction) at an operating point; exact at knots."""
    return _interp_no_extrapolation(optical_output_mw, curve.output_mw,
                                    curve.efficiency, "efficiency")


def pump_draw_at(curve, pump_output_mw):
    """Electrical draw (W) of one pump at the given optical output."""
    return _interp_no_extrapolation(pump_output_mw, curve.output_mw,
                                    curve.draw_w, "pump draw")


def default_efficiency_curve(band_label):
    """Shipped digitized PCE curve for band S, C or L."""
    try:
        name = _PCE_FILES[band_label]
    except KeyError:
        raise CurveError(f"no shipped efficiency curve for band {band_label!r}") from None
    with resources.files("sclink.data").joinpath(name).open() as fh:
        return load_efficiency_curve(fh)


def default_pump_draw_curve(wavelength_nm=1365):
    """Shipped digitized pump wall-draw curve (1365/1385/1405/1425 nm diodes)."""
    try:
        name = PUMP_DRAW_FILES[int(wavelength_nm)]
    except KeyError:
        raise CurveError(
            f"no shipped pump draw curve at {wavelength_nm} nm; "
            f"available: {sorted(PUMP_DRAW_FILES)}"
        ) from None
    with resources.files("sclink.data").joinpath(name).open() as fh:
        return load_pump_draw_curve(fh, label=f"{wavelength_nm}nm")

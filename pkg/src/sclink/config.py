"""Structured text configuration for link scenarios and sweeps.

INI sections/keys (dotted names below are section.key); unknown keys
and malformed values are rejected with the offending key named.

::

    [fiber]     length_km, dispersion_ps_nm_km, reference_wavelength_nm,
                nonlinear_coeff_w_km, attenuation_table, raman_table,
                temperature_k
    [grid]      band_set (CL|SCL), spacing_ghz, symbol_rate_gbd,
                launch_power_dbm
    [amplifiers] noise_figure_db_<s|c|l>, saturation_dbm_<s|c|l>,
                pce_curve_<s|c|l>, p_mm_w
    [transceiver] snr_db
    [raman]     pump_count, pump_draw_table
    [link]      span_count
    [solver]    step_km, bvp_tol, damping, format_correction, fast_raman
    [pso]       particles, iterations, inertia, cognitive, social, seed
    [sweep]     band_sets, span_counts, pump_counts, p_mm_values_w

Table values are either a path (absolute or relative to the config
file) or ``default`` / ``default:<variant>`` for the shipped tables.
"""

import configparser
import os
from dataclasses import dataclass, field

import numpy as np

from .fiber import FiberSpec, _load_packaged, default_fiber, triangular_raman_table
from .grid import build_grid, cl_band_plan, scl_band_plan
from .measure import (default_efficiency_curve, default_pump_draw_curve,
                      load_efficiency_curve, load_pump_draw_curve)
from .quality import AmplifierSpec
from .scenario import SolverOptions

BAND_SETS = {"CL": cl_band_plan, "SCL": scl_band_plan}


class ConfigError(ValueError):
    """Configuration problem; the message names the offending key."""


_DEFAULTS = {
    "fiber": {
        "length_km": "80.0",
        "dispersion_ps_nm_km": "16.5",
        "reference_wavelength_nm": "1550.0",
        "nonlinear_coeff_w_km": "1.13",
        "attenuation_table": "default",
        "raman_table": "default",
        "temperature_k": "298.0",
    },
    "grid": {
        "band_set": "SCL",
        "spacing_ghz": "150.0",
        "symbol_rate_gbd": "140.0",
        "launch_power_dbm": "2.0",
    },
    "amplifiers": {
        "noise_figure_db_s": "6.0",
        "noise_figure_db_c": "5.0",
        "noise_figure_db_l": "6.0",
        "saturation_dbm_s": "20.5",
        "saturation_dbm_c": "23.0",
        "saturation_dbm_l": "23.0",
        "pce_curve_s": "default",
        "pce_curve_c": "default",
        "pce_curve_l": "default",
        "p_mm_w": "8.0",
    },
    "transceiver": {"snr_db": "20.0"},
    "raman": {"pump_count": "0", "pump_draw_table": "default:1365"},
    "link": {"span_count": "1"},
    "solver": {
        "step_km": "0.1",
        "bvp_tol": "1e-6",
        "damping": "0.5",
        "format_correction": "true",
        "fast_raman": "false",
        "fitness_step_km": "1.0",
        "fitness_bvp_tol": "1e-5",
    },
    "pso": {
        "particles": "12",
        "iterations": "20",
        "inertia": "0.729",
        "cognitive": "1.49445",
        "social": "1.49445",
        "seed": "1234",
    },
    "sweep": {
        "band_sets": "CL, SCL",
        "span_counts": "1, 10, 100",
        "pump_counts": "0, 1, 2, 4",
        "p_mm_values_w": "0, 2, 8",
    },
}


@dataclass
class RunConfig:
    fiber: FiberSpec
    grid: object
    band_set: str
    amplifiers: dict
    pce_curves: dict
    pump_curve: object
    pump_count: int
    span_count: int
    p_mm_w: float
    transceiver_snr_db: float
    solver: SolverOptions
    fitness_step_km: float
    fitness_bvp_tol: float
    pso: dict
    sweep: dict
    source_path: str = ""


def _get(parser, section, key, cast, path=""):
    raw = parser.get(section, key, fallback=_DEFAULTS[section][key])
    try:
        return cast(raw)
    except (TypeError, ValueError):
        raise ConfigError(
            f"{path}: bad value {raw!r} for key {section}.{key}") from None


def _boolean(raw):
    low = str(raw).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(raw)


def _int_list(raw):
    return [int(v.strip()) for v in str(raw).split(",") if v.strip()]


def _float_list(raw):
    return [float(v.strip()) for v in str(raw).split(",") if v.strip()]


def _str_list(raw):
    return [v.strip() for v in str(raw).split(",") if v.strip()]


def _resolve(value, base_dir):
    if os.path.isabs(value):
        return value
    return os.path.join(base_dir, value)


def load_config(path):
    """Parse, validate and materialize a run configuration."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    base_dir = os.path.dirname(os.path.abspath(path))

    for section in parser.sections():
        if section not in _DEFAULTS:
            raise ConfigError(f"{path}: unknown section [{section}]")
        for key in parser[section]:
            if key not in _DEFAULTS[section]:
                raise ConfigError(f"{path}: unknown key {section}.{key}")

    g = lambda s, k, cast=float: _get(parser, s, k, cast, path)

    att_src = g("fiber", "attenuation_table", str)
    ram_src = g("fiber", "raman_table", str)
    fast_raman = g("solver", "fast_raman", _boolean)
    base = default_fiber()
    if att_src == "default":
        att = base.attenuation_table
    else:
        from .fiber import _read_two_column_tsv
        att = _read_two_column_tsv(_resolve(att_src, base_dir))
    if fast_raman:
        ram = triangular_raman_table()
    elif ram_src == "default":
        ram = base.raman_table
    else:
        from .fiber import _read_two_column_tsv
        ram = _read_two_column_tsv(_resolve(ram_src, base_dir))
    try:
        fiber = FiberSpec(
            length_km=g("fiber", "length_km"),
            attenuation_table=att,
            dispersion_ps_nm_km=g("fiber", "dispersion_ps_nm_km"),
            reference_wavelength_nm=g("fiber", "reference_wavelength_nm"),
            nonlinear_coeff_w_km=g("fiber", "nonlinear_coeff_w_km"),
            raman_table=ram,
            temperature_k=g("fiber", "temperature_k"),
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: fiber.*: {exc}") from None

    band_set = g("grid", "band_set", str).upper()
    if band_set not in BAND_SETS:
        raise ConfigError(
            f"{path}: grid.band_set: unknown band set {band_set!r} "
            f"(expected CL or SCL)")
    grid = build_grid(BAND_SETS[band_set](), g("grid", "spacing_ghz"),
                      g("grid", "symbol_rate_gbd"),
                      g("grid", "launch_power_dbm"))

    amps = {}
    curves = {}
    for band in grid.bands:
        suffix = band.lower()
        amps[band] = AmplifierSpec(
            band_label=band,
            noise_figure_db=g("amplifiers", f"noise_figure_db_{suffix}"),
            saturation_dbm=g("amplifiers", f"saturation_dbm_{suffix}"),
        )
        src = g("amplifiers", f"pce_curve_{suffix}", str)
        if src == "default":
            curves[band] = default_efficiency_curve(band)
        else:
            curves[band] = load_efficiency_curve(_resolve(src, base_dir))

    pump_src = g("raman", "pump_draw_table", str)
    if pump_src.startswith("default"):
        variant = pump_src.partition(":")[2] or "1365"
        pump_curve = default_pump_draw_curve(int(variant))
    else:
        pump_curve = load_pump_draw_curve(_resolve(pump_src, base_dir))

    pump_count = g("raman", "pump_count", int)
    if pump_count < 0:
        raise ConfigError(f"{path}: raman.pump_count must be >= 0")

    solver = SolverOptions(
        step_km=g("solver", "step_km"),
        bvp_tol=g("solver", "bvp_tol"),
        damping=g("solver", "damping"),
        format_correction=g("solver", "format_correction", _boolean),
    )

    sweep = {
        "band_sets": [b.upper() for b in g("sweep", "band_sets", _str_list)],
        "span_counts": g("sweep", "span_counts", _int_list),
        "pump_counts": g("sweep", "pump_counts", _int_list),
        "p_mm_values_w": g("sweep", "p_mm_values_w", _float_list),
    }
    for b in sweep["band_sets"]:
        if b not in BAND_SETS:
            raise ConfigError(f"{path}: sweep.band_sets: unknown band set {b!r}")
    for key in ("band_sets", "span_counts", "pump_counts", "p_mm_values_w"):
        if not sweep[key]:
            raise ConfigError(f"{path}: sweep.{key} must be non-empty")

    return RunConfig(
        fiber=fiber, grid=grid, band_set=band_set, amplifiers=amps,
        pce_curves=curves, pump_curve=pump_curve, pump_count=pump_count,
        span_count=g("link", "span_count", int),
        p_mm_w=g("amplifiers", "p_mm_w"),
        transceiver_snr_db=g("transceiver", "snr_db"),
        solver=solver,
        fitness_step_km=g("solver", "fitness_step_km"),
        fitness_bvp_tol=g("solver", "fitness_bvp_tol"),
        pso={
            "particles": g("pso", "particles", int),
            "iterations": g("pso", "iterations", int),
            "inertia": g("pso", "inertia"),
            "cognitive": g("pso", "cognitive"),
            "social": g("pso", "social"),
            "seed": g("pso", "seed", int),
        },
        sweep=sweep,
        source_path=str(path),
    )

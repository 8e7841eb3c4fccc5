"""Link scenarios: one (band set, span count, pump set, overhead) case.

Couples the span solver to the quality and power ledgers, and wraps the
swarm optimizer around the pump degrees of freedom. Spans are treated
as identical: one span is solved, per-span ASE and NLI accumulate
linearly over the span count, and launch powers are restored by the
lumped stage at each span end.
"""

import hashlib
import json
import logging
from dataclasses import dataclass, replace

import numpy as np

from .grid import ChannelGrid
from .power import (PowerLedger, allocate_dra_power, band_electrical_power,
                    lumped_optical_output, raman_electrical_power)
from .pso import OptimizeResult, SwarmConfig, optimize
from .quality import (AmplifierSpec, QualityReport, band_throughput,
                      dra_ase_power_all, lumped_ase_power, nli_power_all)
from .raman import (ConvergenceError, IntegrationError,
                    MAX_PUMP_POWER_MW, PUMP_WAVELENGTH_WINDOW_NM,
                    RamanPumpSet, effective_integrals, no_pumps, on_off_gain,
                    propagate)
from .units import db_to_linear, dbm_to_mw

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverOptions:
    step_km: float = 0.1
    bvp_tol: float = 1e-6
    damping: float = 0.5
    format_correction: bool = True
    eta_at_saturation: bool = True     # read PCE at the saturated output point


@dataclass(frozen=True)
class LinkScenario:
    grid: ChannelGrid
    fiber: object
    amplifiers: dict                   # band label -> AmplifierSpec (gain unset)
    pumps: RamanPumpSet
    n_span: int = 1
    p_mm_w: float = 8.0
    transceiver_snr_db: float = 20.0
    name: str = ""

    def __post_init__(self):
        if self.n_span < 1:
            raise ValueError("span count must be >= 1")
        if self.p_mm_w < 0:
            raise ValueError("management power must be >= 0")
        missing = [b for b in self.grid.bands if b not in self.amplifiers]
        if missing:
            raise ValueError(f"no amplifier spec for bands {missing}")

    @property
    def pump_count(self):
        return len(self.pumps)


@dataclass(frozen=True)
class ScenarioResult:
    quality: QualityReport
    ledger: PowerLedger
    on_off_gain_db: np.ndarray
    band_gains: dict
    pumps: RamanPumpSet

    @property
    def total_throughput_tbps(self):
        return self.quality.total_throughput_tbps


def evaluate_scenario(scenario, pce_curves, pump_curve, options=SolverOptions(),
                      baseline_profile=None, pumped_profile=None):
    """Full quality + power evaluation of one scenario.

    ``baseline_profile`` / ``pumped_profile`` may carry pre-solved span
    profiles for this grid/fiber/pump set (reused across overhead
    sweeps and pump candidates).
    """
    grid, fiber = scenario.grid, scenario.fiber
    prof_off = baseline_profile
    if prof_off is None:
        prof_off = propagate(grid, fiber, None, step_km=options.step_km,
                             bvp_tol=options.bvp_tol, damping=options.damping)
    pumped = scenario.pump_count > 0 and np.any(scenario.pumps.powers_mw > 0)
    if pumped:
        prof_on = pumped_profile
        if prof_on is None:
            prof_on = propagate(grid, fiber, scenario.pumps,
                                step_km=options.step_km, bvp_tol=options.bvp_tol,
                                damping=options.damping)
    else:
        prof_on = prof_off

    gains_db = on_off_gain(prof_on, prof_off)
    integrals = effective_integrals(prof_on)
    bw_ghz = grid.symbol_rate_gbd

    band_gains = {}
    amps = {}
    for band in grid.bands:
        spec = scenario.amplifiers[band]
        gain, output = lumped_optical_output(grid, band, integrals.output_mw,
                                             saturation_dbm=spec.saturation_dbm)
        amps[band] = replace(spec, gain=gain)
        band_gains[band] = (gain, output)

    n = len(grid)
    ase = np.array([lumped_ase_power(amps[grid.band_labels[i]],
                                     grid.frequencies_thz[i], bw_ghz)
                    for i in range(n)])
    ase = ase + dra_ase_power_all(prof_on, fiber, bw_ghz)
    nli = nli_power_all(grid, fiber, integrals,
                        format_correction=options.format_correction)

    trx = db_to_linear(scenario.transceiver_snr_db)
    p_ch = grid.launch_power_mw
    n_span = scenario.n_span
    snr_tot = 1.0 / (n_span * (ase + nli) / p_ch + 1.0 / trx)
    with np.errstate(divide="ignore"):
        snr_ase = p_ch / (n_span * ase)
        snr_nli = p_ch / (n_span * nli)
    throughput = band_throughput(grid, snr_tot)
    quality = QualityReport(
        frequencies_thz=grid.frequencies_thz, band_labels=grid.band_labels,
        snr_ase=snr_ase, snr_nli=snr_nli, snr_total=snr_tot,
        throughput_tbps=throughput, transceiver_snr=trx)

    band_lumped = {}
    for band in grid.bands:
        gain, output = band_gains[band]
        curve = pce_curves[band]
        idx = grid.band_indices(band)
        eta_point = (dbm_to_mw(curve.saturation_dbm)
                     if options.eta_at_saturation and np.isfinite(curve.saturation_dbm)
                     else output)
        band_lumped[band] = band_electrical_power(
            curve, eta_point, gain, idx.size, float(grid.launch_power_mw[idx[0]]))

    raman_w = raman_electrical_power(scenario.pumps, pump_curve) if pumped else 0.0
    gain_sums = {band: float(np.sum(gains_db[grid.band_indices(band)]))
                 for band in grid.bands}
    band_dra = allocate_dra_power(gain_sums, raman_w)

    ledger = PowerLedger(
        n_span=n_span, band_lumped_w=band_lumped, band_dra_w=band_dra,
        p_mm_per_amp_w=scenario.p_mm_w, band_throughput_tbps=throughput)

    return ScenarioResult(quality=quality, ledger=ledger,
                          on_off_gain_db=gains_db, band_gains=band_gains,
                          pumps=scenario.pumps)


def pump_set_from_vector(x):
    """Decode a swarm position [wl_1..wl_k, p_1..p_k] into a pump set."""
    x = np.asarray(x, dtype=float)
    k = x.size // 2
    return RamanPumpSet(x[:k], x[k:])


def pump_bounds(pump_count,
                wavelength_window_nm=PUMP_WAVELENGTH_WINDOW_NM,
                max_power_mw=MAX_PUMP_POWER_MW):
    lo_wl, hi_wl = wavelength_window_nm
    b = [[lo_wl, hi_wl]] * pump_count + [[0.0, max_power_mw]] * pump_count
    return np.array(b, dtype=float)


class FitnessEvaluator:
    """Total-throughput objective over pump candidates for one scenario.

    Pure and deterministic for a fixed candidate: the pump-free
    baseline is solved once and reused; a candidate whose boundary
    iteration fails scores -inf and is discarded.
    """

    def __init__(self, scenario, options=SolverOptions()):
        self.scenario = scenario
        self.options = options
        self.baseline = propagate(scenario.grid, scenario.fiber, None,
                                  step_km=options.step_km,
                                  bvp_tol=options.bvp_tol,
                                  damping=options.damping)
        self._throughput_cache = {}

    def throughput_for(self, pumps):
        grid, fiber = self.scenario.grid, self.scenario.fiber
        o = self.options
        pumped = len(pumps) > 0 and np.any(pumps.powers_mw > 0)
        if pumped:
            prof_on = propagate(grid, fiber, pumps, step_km=o.step_km,
                                bvp_tol=o.bvp_tol, damping=o.damping)
        else:
            prof_on = self.baseline
        integrals = effective_integrals(prof_on)
        bw = grid.symbol_rate_gbd
        amps = {}
        for band in grid.bands:
            spec = self.scenario.amplifiers[band]
            gain, _ = lumped_optical_output(grid, band, integrals.output_mw,
                                            saturation_dbm=spec.saturation_dbm)
            amps[band] = replace(spec, gain=gain)
        trx = db_to_linear(self.scenario.transceiver_snr_db)
        n_span = self.scenario.n_span
        ase = np.array([lumped_ase_power(amps[grid.band_labels[i]],
                                         grid.frequencies_thz[i], bw)
                        for i in range(len(grid))])
        ase = ase + dra_ase_power_all(prof_on, fiber, bw)
        nli = nli_power_all(grid, fiber, integrals,
                            format_correction=o.format_correction)
        snr = 1.0 / (n_span * (ase + nli) / grid.launch_power_mw + 1.0 / trx)
        return float(sum(band_throughput(grid, snr).values()))

    def __call__(self, x):
        key = np.asarray(x, dtype=float).tobytes()
        if key in self._throughput_cache:
            return self._throughput_cache[key]
        import warnings as _warnings
        try:
            with _warnings.catch_warnings():
                _warnings.simplefilter("ignore")
                value = self.throughput_for(pump_set_from_vector(x))
        except (ConvergenceError, IntegrationError) as exc:
            log.warning("discarding pump candidate %s: %s", x, exc)
            value = float("-inf")
        self._throughput_cache[key] = value
        return value


def optimize_pumps(scenario, pump_count, swarm=None, options=SolverOptions(),
                   seed_candidates=None):
    """Swarm-optimize pump wavelengths and powers for total capacity.

    Returns (RamanPumpSet, OptimizeResult). ``seed_candidates`` may carry
    known-good pump sets (e.g. the optimum found with fewer pumps, padded
    with zero-power pumps) injected into the initial swarm.
    """
    if pump_count < 1:
        raise ValueError("optimize_pumps needs at least one pump")
    bounds = pump_bounds(pump_count)
    if swarm is None:
        swarm = SwarmConfig(bounds=bounds)
    elif swarm.bounds.shape[0] != 2 * pump_count:
        swarm = replace(swarm, bounds=bounds)
    evaluator = FitnessEvaluator(scenario, options)
    initial = None
    if seed_candidates:
        initial = np.array([_pad_candidate(c, pump_count) for c in seed_candidates])
    result = optimize(evaluator, swarm, initial_candidates=initial)
    return pump_set_from_vector(result.best_position), result


def _pad_candidate(pumps, pump_count):
    """Embed a smaller pump set as a candidate vector with zero-power pads."""
    wl = list(pumps.wavelengths_nm[:pump_count])
    pw = list(pumps.powers_mw[:pump_count])
    lo, hi = PUMP_WAVELENGTH_WINDOW_NM
    while len(wl) < pump_count:
        wl.append(0.5 * (lo + hi))
        pw.append(0.0)
    return np.array(wl + pw, dtype=float)


def scenario_cache_key(scenario, pump_count, swarm, options):
    """Disk-cache key for one optimization: config hash + seed."""
    payload = {
        "freqs": np.round(scenario.grid.frequencies_thz, 9).tolist(),
        "launch": np.round(scenario.grid.launch_power_mw, 12).tolist(),
        "symbol_rate": scenario.grid.symbol_rate_gbd,
        "fiber": [scenario.fiber.length_km, scenario.fiber.dispersion_ps_nm_km,
                  scenario.fiber.nonlinear_coeff_w_km,
                  scenario.fiber.temperature_k,
                  scenario.fiber.attenuation_table.tolist(),
                  scenario.fiber.raman_table.tolist()],
        "amps": {b: [a.noise_figure_db, a.saturation_dbm]
                 for b, a in sorted(scenario.amplifiers.items())},
        "n_span": scenario.n_span,
        "trx": scenario.transceiver_snr_db,
        "pump_count": pump_count,
        "swarm": [swarm.particle_count, swarm.iteration_cap, swarm.inertia,
                  swarm.cognitive, swarm.social, swarm.seed],
        "options": [options.step_km, options.bvp_tol, options.damping,
                    options.format_correction],
    }
    blob = json.dumps(payload, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:24]

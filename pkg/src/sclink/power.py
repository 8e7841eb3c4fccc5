"""Electrical power ledger and energy per bit.

Total amplifier electrical power per span is the sum of the per-band
lumped terms (1/eta) N_ch P_ch (1 - 1/G), the per-amplifier
monitoring/management overhead, and the Raman pump wall draw; the span
total scales linearly with the span count. The constant pump efficiency
of the analytic ledger is replaced by the measured wall-draw curve;
per-band attribution of the (inherently multi-band) Raman draw uses the
ratio of summed per-channel on-off gains in dB.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .measure import efficiency_at, pump_draw_at
from .units import dbm_to_mw

BAND_ORDER = ("S", "C", "L")


class LedgerError(ValueError):
    pass


def lumped_optical_output(grid, band_label, post_dra_input_mw, saturation_dbm=None):
    """Band-level lumped gain and optical output restoring launch power.

    The amplifier brings the band's summed end-of-span power back to the
    summed launch power; output beyond the saturation point is clamped
    with a warning. Returns (gain, output_mw).
    """
    idx = grid.band_indices(band_label)
    if idx.size == 0:
        raise LedgerError(f"grid has no {band_label!r} channels")
    launch = float(np.sum(grid.launch_power_mw[idx]))
    arrived = float(np.sum(np.asarray(post_dra_input_mw, dtype=float)[idx]))
    if arrived <= 0:
        raise LedgerError(f"band {band_label}: zero input power into the amplifier")
    output = launch
    if saturation_dbm is not None and np.isfinite(saturation_dbm):
        sat_mw = dbm_to_mw(saturation_dbm)
        if output > sat_mw:
            warnings.warn(
                f"band {band_label}: requested output {output:.1f} mW exceeds "
                f"saturation {sat_mw:.1f} mW; clamping", stacklevel=2)
            output = sat_mw
    gain = output / arrived
    if gain < 1.0:
        warnings.warn(
            f"band {band_label}: distributed gain already exceeds the span "
            "loss; lumped stage held at unity gain", stacklevel=2)
        gain = 1.0
    return gain, output


def band_electrical_power(curve, output_mw, gain, n_channels, launch_power_mw):
    """One band's lumped amplifier electrical power (W).

    (1/eta) N_ch P_ch (1 - 1/G) with eta read from the measured
    efficiency curve at the amplifier's optical output (clamped to the
    measured range).
    """
    if gain < 1.0:
        raise LedgerError("gain must be >= 1")
    query = float(np.clip(output_mw, curve.output_mw[0], curve.output_mw[-1]))
    if query != output_mw:
        warnings.warn(
            f"amplifier output {output_mw:.1f} mW outside the measured "
            f"range; efficiency read at {query:.1f} mW", stacklevel=2)
    eta = efficiency_at(curve, query)
    return (1.0 / eta) * n_channels * (launch_power_mw * 1e-3) * (1.0 - 1.0 / gain)


def raman_electrical_power(pumps, curve):
    """Total pump wall draw (W): sum of the measured draw at each pump power."""
    return float(sum(pump_draw_at(curve, p) for p in pumps.powers_mw))


def allocate_dra_power(band_gain_db_sums, total_raman_w):
    """Split the Raman electrical power across bands by dB-gain share.

    ``band_gain_db_sums`` maps band label to the sum of that band's
    per-channel on-off gains in dB. Shares sum to the total exactly.
    """
    bands = [b for b in BAND_ORDER if b in band_gain_db_sums]
    if not bands:
        raise LedgerError("no bands to allocate over")
    if total_raman_w == 0.0:
        return {b: 0.0 for b in bands}
    weights = np.array([max(band_gain_db_sums[b], 0.0) for b in bands])
    if np.sum(weights) <= 0:
        warnings.warn("no positive on-off gain anywhere; splitting Raman "
                      "power uniformly", stacklevel=2)
        weights = np.ones(len(bands))
    shares = total_raman_w * weights / np.sum(weights)
    out = {b: float(s) for b, s in zip(bands, shares)}
    _force_exact_sum(out, bands, total_raman_w)
    return out


def _force_exact_sum(out, bands, total):
    """Nudge one share by ulps until the ordered float sum equals total."""
    def current():
        s = 0.0
        for b in bands:
            s += out[b]
        return s

    def walk(k):
        base = out[k]
        target = math.fsum([total] + [-out[b] for b in bands if b != k])
        for steps in range(25):
            for sign in (1.0, -1.0):
                cand = target
                for _ in range(steps):
                    cand = float(np.nextafter(cand, sign * np.inf))
                out[k] = cand
                if current() == total:
                    return True
        out[k] = base
        return False

    if current() == total:
        return
    largest = max(bands, key=lambda b: out[b])
    for k in dict.fromkeys((bands[-1], largest, bands[0])):
        if walk(k):
            return
    # rounding tie in an earlier addition: perturb the first summand too
    first = bands[0]
    base_first = out[first]
    for sign in (1.0, -1.0):
        out[first] = float(np.nextafter(base_first, sign * np.inf))
        if walk(bands[-1]) or walk(largest):
            return
    out[first] = base_first


def total_power(n_span, lumped_w_sum, p_mm_total_w, raman_w=0.0):
    """Link total electrical power: N_span (sum lumped + sum P_mm + Raman)."""
    if n_span < 1:
        raise LedgerError("span count must be >= 1")
    return n_span * (lumped_w_sum + p_mm_total_w + raman_w)


def energy_per_bit(power_w, throughput_tbps):
    """Energy per delivered bit in pJ/bit (W per Tb/s)."""
    if throughput_tbps <= 0:
        raise LedgerError("throughput must be positive")
    return power_w / throughput_tbps


@dataclass(frozen=True)
class PowerLedger:
    """Per-band and total electrical power and energy per bit for a link."""

    n_span: int
    band_lumped_w: dict                # per span
    band_dra_w: dict                   # per span
    p_mm_per_amp_w: float
    band_throughput_tbps: dict
    band_energy_pj_bit: dict = field(init=False)
    total_w: float = field(init=False)
    total_energy_pj_bit: float = field(init=False)

    def __post_init__(self):
        bands = list(self.band_lumped_w)
        span_sum = sum(self.band_lumped_w[b] + self.band_dra_w[b]
                       + self.p_mm_per_amp_w for b in bands)
        total = total_power(self.n_span, span_sum, 0.0, 0.0)
        energies = {}
        for b in bands:
            band_power = self.n_span * (self.band_lumped_w[b]
                                        + self.band_dra_w[b]
                                        + self.p_mm_per_amp_w)
            energies[b] = energy_per_bit(band_power, self.band_throughput_tbps[b])
        object.__setattr__(self, "band_energy_pj_bit", energies)
        object.__setattr__(self, "total_w", total)
        object.__setattr__(
            self, "total_energy_pj_bit",
            energy_per_bit(total, sum(self.band_throughput_tbps.values())))

    def to_tsv(self, path, scenario_id=""):
        with open(path, "w") as fh:
            fh.write("# sclink power ledger v1\n")
            fh.write("scenario\tband\tlumped_w\tdra_w\tp_mm_w\t"
                     "throughput_tbps\tenergy_pj_bit\n")
            for b in self.band_lumped_w:
                fh.write(
                    f"{scenario_id}\t{b}\t{self.band_lumped_w[b]:.6f}\t"
                    f"{self.band_dra_w[b]:.6f}\t{self.p_mm_per_amp_w:.6f}\t"
                    f"{self.band_throughput_tbps[b]:.6f}\t"
                    f"{self.band_energy_pj_bit[b]:.6f}\n")
            fh.write(f"# n_span: {self.n_span}\n")
            fh.write(f"# total_w: {self.total_w:.6f}\n")
            fh.write(f"# total_energy_pj_bit: {self.total_energy_pj_bit:.6f}\n")

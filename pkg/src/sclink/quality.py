"""Per-channel noise and throughput: lumped/distributed ASE, GN-model
nonlinear interference, SNR combination and Shannon capacity.

Conventions used throughout (documented here once):

* Lumped ASE is the dual-polarization power h f NF (G - 1) B with the
  large-gain identification NF = 2 n_sp (linear units).
* NLI is a first-order incoherent Gaussian-noise accumulation: one
  span's self- and cross-channel terms are computed from per-channel
  effective lengths (which carry the ISRS/DRA modification of the power
  profile) and summed linearly over spans by the caller.
* The cross-channel (XPM) terms optionally carry the leading-order
  modulation-format correction (1 + 5/6 * Phi) with Phi the excess
  kurtosis of the transmitted constellation.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.constants import Boltzmann, Planck

from .units import db_to_linear

_trapz = getattr(np, "trapezoid", np.trapz)

# fraction of the excess kurtosis entering the cross-channel correction
FORMAT_CORRECTION_COEFF = 5.0 / 6.0


def qam_constellation(order):
    """Square-QAM complex constellation points (unnormalized)."""
    side = int(math.isqrt(order))
    if side * side != order:
        raise ValueError(f"square QAM order required, got {order}")
    levels = np.arange(-(side - 1), side, 2, dtype=float)
    re, im = np.meshgrid(levels, levels)
    return (re + 1j * im).ravel()


def excess_kurtosis(constellation):
    """Phi = E|x|^4 / (E|x|^2)^2 - 2 over equiprobable points."""
    x = np.asarray(constellation)
    m2 = np.mean(np.abs(x) ** 2)
    m4 = np.mean(np.abs(x) ** 4)
    return float(m4 / m2**2 - 2.0)


QAM64_EXCESS_KURTOSIS = excess_kurtosis(qam_constellation(64))


@dataclass(frozen=True)
class AmplifierSpec:
    """One band's lumped amplifier."""

    band_label: str
    noise_figure_db: float
    gain: float = 1.0
    saturation_dbm: float = float("nan")

    def __post_init__(self):
        if self.gain < 1.0:
            raise ValueError("amplifier gain must be >= 1")
        if self.gain > 10.0 and self.noise_figure_db < 3.0:
            raise ValueError("noise figure below the 3 dB quantum limit at high gain")

    @property
    def noise_figure_linear(self):
        return db_to_linear(self.noise_figure_db)


def lumped_ase_power(amp, channel_frequency_thz, bandwidth_ghz):
    """Dual-pol ASE power (mW) added by a lumped amplifier in one band.

    P_ase = h f NF (G - 1) B with NF in linear units (NF = 2 n_sp).
    """
    f_hz = channel_frequency_thz * 1e12
    b_hz = bandwidth_ghz * 1e9
    p_w = Planck * f_hz * amp.noise_figure_linear * (amp.gain - 1.0) * b_hz
    return p_w * 1e3


def dra_ase_power_all(profile, fiber, bandwidth_ghz):
    """Per-channel spontaneous Raman ASE (mW) over one span.

    Integrates 2 h f B g_R(df) P_pump(z) (1 + eta_T) Gamma(z->L) over
    the solved profile, where eta_T is the phonon occupancy at the
    fiber temperature and Gamma the channel's own net transmission from
    z to the span end. Only pumps above the channel frequency
    contribute.
    """
    n_ch = profile.signal_mw.shape[0]
    if profile.pump_mw.shape[0] == 0:
        return np.zeros(n_ch)
    f_sig = profile.signal_frequencies_thz
    shifts = profile.pump_frequencies_thz[:, None] - f_sig[None, :]  # (n_p, n_ch)
    g = np.interp(np.clip(shifts, 0.0, None),
                  fiber.raman_table[:, 0], fiber.raman_table[:, 1],
                  left=0.0, right=0.0)
    g[shifts <= 0] = 0.0
    with np.errstate(over="ignore"):
        eta_t = np.where(
            shifts > 0,
            1.0 / np.expm1(Planck * np.maximum(shifts, 1e-6) * 1e12
                           / (Boltzmann * fiber.temperature_k)),
            0.0)
    gamma_to_end = profile.signal_mw[:, -1:] / profile.signal_mw  # (n_ch, n_z)
    # weight[k, i] = int P_pump_k(z) Gamma_i(z->L) dz
    weight = _trapz(profile.pump_mw[:, None, :] * 1e-3
                    * gamma_to_end[None, :, :], profile.z_km, axis=2)
    totals = np.sum(g * (1.0 + eta_t) * weight, axis=0)
    p_w = 2.0 * Planck * (f_sig * 1e12) * (bandwidth_ghz * 1e9) * totals
    return p_w * 1e3


def dra_ase_power(profile, fiber, channel_index, bandwidth_ghz):
    """One channel's spontaneous Raman ASE (mW); see dra_ase_power_all."""
    return float(dra_ase_power_all(profile, fiber, bandwidth_ghz)[channel_index])


def nli_power_all(grid, fiber, integrals, format_correction=True):
    """One span's GN-model NLI power (mW) for every channel.

    Self- (SPM) and cross-channel (XPM) terms in the arcsinh/arctan
    closed form, with the span's link function characterized per
    channel by an equivalent attenuation 1/L_eff taken from the solved
    power profile; launch powers and |beta2| at the channel wavelength
    set the scale. Cross terms are scaled by (1 + 5/6 Phi) for the
    64-QAM excess kurtosis when the format correction is on.
    """
    f = np.asarray(grid.frequencies_thz, dtype=float) * 1e12
    p_w = np.asarray(grid.launch_power_mw, dtype=float) * 1e-3
    b = grid.symbol_rate_gbd * 1e9
    gamma = fiber.nonlinear_coeff_w_km
    n = f.size
    if gamma == 0.0:
        return np.zeros(n)
    beta2 = np.asarray(fiber.beta2_abs_s2_km(grid.wavelengths_nm))
    l_eff = np.maximum(np.asarray(integrals.path_integral_km, dtype=float), 1e-9)

    spm = (8.0 / 27.0) * gamma**2 * p_w**3 * l_eff \
        * np.arcsinh(0.5 * np.pi**2 * beta2 * b**2 * l_eff) \
        / (b**2 * np.pi * beta2)

    df = np.abs(f[:, None] - f[None, :])            # |f_i - f_j|
    off = df > 0
    denom = np.where(off, b * 2.0 * np.pi**2 * beta2[:, None] * df, 1.0)
    xpm_terms = np.where(
        off,
        (32.0 / 27.0) * gamma**2 * p_w[:, None] * p_w[None, :] ** 2
        * l_eff[None, :]
        * np.arctan(2.0 * np.pi**2 * beta2[:, None] * df * b * l_eff[None, :])
        / denom,
        0.0,
    )
    xpm = np.sum(xpm_terms, axis=1)
    if format_correction:
        xpm = xpm * (1.0 + FORMAT_CORRECTION_COEFF * QAM64_EXCESS_KURTOSIS)

    return (spm + xpm) * 1e3


def nli_power(grid, fiber, integrals, channel_index, format_correction=True):
    """One channel's GN-model NLI power (mW); see nli_power_all."""
    return float(nli_power_all(grid, fiber, integrals,
                               format_correction=format_correction)[channel_index])


def channel_snr(p_ch_mw, p_ase_total_mw, p_nli_mw, snr_trx):
    """Total SNR by inverse addition of link noise and transceiver noise.

    ASE/NLI are the link totals (already accumulated over spans).
    """
    if p_ch_mw <= 0:
        raise ValueError("channel power must be positive")
    inv = (p_ase_total_mw + p_nli_mw) / p_ch_mw
    if np.isfinite(snr_trx):
        inv += 1.0 / snr_trx
    return 1.0 / inv if inv > 0 else float("inf")


def band_throughput(grid, snrs):
    """Per-band dual-pol Shannon throughput in Tb/s."""
    snrs = np.asarray(snrs, dtype=float)
    if snrs.shape != (len(grid),):
        raise ValueError("one SNR per channel required")
    rs = grid.symbol_rate_gbd * 1e9
    per_channel = 2.0 * rs * np.log2(1.0 + snrs)
    out = {}
    for band in grid.bands:
        idx = grid.band_indices(band)
        out[band] = float(np.sum(per_channel[idx])) / 1e12
    return out


@dataclass(frozen=True)
class QualityReport:
    """Per-channel SNR decomposition and per-band throughput."""

    frequencies_thz: np.ndarray
    band_labels: tuple
    snr_ase: np.ndarray
    snr_nli: np.ndarray
    snr_total: np.ndarray
    throughput_tbps: dict
    transceiver_snr: float

    @property
    def total_throughput_tbps(self):
        return float(sum(self.throughput_tbps.values()))

    def to_tsv(self, path):
        with open(path, "w") as fh:
            fh.write("# sclink quality report v1\n")
            fh.write("frequency_thz\tband\tsnr_ase_db\tsnr_nli_db\tsnr_total_db\n")
            for i, f in enumerate(self.frequencies_thz):
                fh.write(
                    f"{f:.4f}\t{self.band_labels[i]}\t"
                    f"{10*np.log10(self.snr_ase[i]):.4f}\t"
                    f"{10*np.log10(self.snr_nli[i]):.4f}\t"
                    f"{10*np.log10(self.snr_total[i]):.4f}\n"
                )
            for band, tbps in self.throughput_tbps.items():
                fh.write(f"# throughput_{band}_tbps: {tbps:.6f}\n")
            fh.write(f"# throughput_total_tbps: {self.total_throughput_tbps:.6f}\n")

"""Fiber physics parameters and spectral lookups.

Attenuation and the Raman gain profile are piecewise-linear tables.
The shipped defaults are an SMF-28-like attenuation curve pinned to
0.2 dB/km at 1550 nm and a 41-point silica Raman gain profile peaking
at a 13.2 THz pump-signal shift.
"""

from dataclasses import dataclass
from importlib import resources

import numpy as np

from .units import C_NM_THZ

MIN_LOSS_WAVELENGTH_NM = 1560.0  # documented minimum of the shipped curve


class FiberRangeError(ValueError):
    """Spectral query outside the tabulated range."""


def _read_two_column_tsv(path_or_buffer):
    rows = []
    if hasattr(path_or_buffer, "read"):
        lines = path_or_buffer.read().splitlines()
    else:
        with open(path_or_buffer) as fh:
            lines = fh.read().splitlines()
    for line in lines:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        try:
            rows.append((float(parts[0]), float(parts[1])))
        except ValueError:
            continue  # header row
    return np.array(rows, dtype=float)


def _load_packaged(name):
    with resources.files("sclink.data").joinpath(name).open() as fh:
        return _read_two_column_tsv(fh)


@dataclass(frozen=True)
class FiberSpec:
    """One span's fiber: length, spectral loss, dispersion, nonlinearity, Raman profile."""

    length_km: float
    attenuation_table: np.ndarray      # columns: wavelength nm, loss dB/km
    dispersion_ps_nm_km: float         # at reference_wavelength_nm
    reference_wavelength_nm: float
    nonlinear_coeff_w_km: float        # 1/(W km)
    raman_table: np.ndarray            # columns: shift THz, gain 1/(W km)
    temperature_k: float = 298.0

    def __post_init__(self):
        att = np.asarray(self.attenuation_table, dtype=float)
        ram = np.asarray(self.raman_table, dtype=float)
        object.__setattr__(self, "attenuation_table", att)
        object.__setattr__(self, "raman_table", ram)
        if self.length_km <= 0:
            raise ValueError("fiber length must be positive")
        if self.nonlinear_coeff_w_km < 0:
            raise ValueError("nonlinear coefficient must not be negative")
        if att.ndim != 2 or att.shape[0] < 2:
            raise ValueError("attenuation table needs at least two rows")
        if np.any(np.diff(att[:, 0]) <= 0):
            raise ValueError("attenuation table wavelengths must be strictly increasing")
        if np.any(att[:, 1] <= 0):
            raise ValueError("attenuation must be positive everywhere")
        if ram.ndim != 2 or ram.shape[0] < 2:
            raise ValueError("Raman table needs at least two rows")
        if ram[0, 0] != 0.0 or ram[0, 1] != 0.0:
            raise ValueError("Raman profile must start at (0, 0)")
        if np.any(np.diff(ram[:, 0]) <= 0):
            raise ValueError("Raman table shifts must be strictly increasing")
        if np.any(ram[:, 1] < 0):
            raise ValueError("Raman gain must be non-negative")
        att.setflags(write=False)
        ram.setflags(write=False)

    @property
    def wavelength_range_nm(self):
        return float(self.attenuation_table[0, 0]), float(self.attenuation_table[-1, 0])

    @property
    def raman_cutoff_thz(self):
        return float(self.raman_table[-1, 0])

    def beta2_abs_s2_km(self, wavelength_nm):
        """|beta2| in s^2/km from the (constant) dispersion parameter.

        beta2 = -D lambda^2 / (2 pi c); D is held constant over the band.
        """
        d_s_per_nm_km = self.dispersion_ps_nm_km * 1e-12
        lam = np.asarray(wavelength_nm, dtype=float)
        return d_s_per_nm_km * lam**2 / (2.0 * np.pi * C_NM_THZ * 1e12)


def attenuation_at(fiber, wavelength_nm):
    """Fiber loss in dB/km, piecewise linear in wavelength."""
    wl = np.asarray(wavelength_nm, dtype=float)
    lo, hi = fiber.wavelength_range_nm
    if np.any(wl < lo) or np.any(wl > hi):
        raise FiberRangeError(
            f"wavelength outside the tabulated range [{lo}, {hi}] nm"
        )
    out = np.interp(wl, fiber.attenuation_table[:, 0], fiber.attenuation_table[:, 1])
    return float(out) if np.isscalar(wavelength_nm) else out


def raman_profile(fiber, shift_thz):
    """g_R at a non-negative pump-signal shift; zero beyond the table cutoff."""
    s = np.asarray(shift_thz, dtype=float)
    if np.any(s < 0):
        raise ValueError("shift must be non-negative; use raman_gain for signed pairs")
    out = np.interp(s, fiber.raman_table[:, 0], fiber.raman_table[:, 1],
                    left=0.0, right=0.0)
    return float(out) if np.isscalar(shift_thz) else out


def raman_gain(fiber, pump_frequency_thz, signal_frequency_thz):
    """Signed pairwise Raman coupling coefficient acting on the signal wave.

    Positive shift (pump above signal): the signal gains, coefficient
    g_R(shift). Negative shift (pump below): the signal is a donor and
    the coefficient is the loss side, -(f_signal/f_pump) g_R(|shift|),
    the photon-conversion ratio used by the propagation equations.
    """
    lo, hi = fiber.wavelength_range_nm
    f_lo, f_hi = C_NM_THZ / hi, C_NM_THZ / lo
    for f in (pump_frequency_thz, signal_frequency_thz):
        if not f_lo <= f <= f_hi:
            raise FiberRangeError(
                f"frequency {f:.3f} THz outside supported range "
                f"[{f_lo:.3f}, {f_hi:.3f}] THz"
            )
    shift = pump_frequency_thz - signal_frequency_thz
    if shift == 0.0:
        return 0.0
    g = raman_profile(fiber, abs(shift))
    if shift > 0:
        return g
    return -(signal_frequency_thz / pump_frequency_thz) * g


def default_fiber(length_km=80.0, temperature_k=298.0):
    """The reference span: 80 km SMF-28-like fiber.

    Dispersion 16.5 ps/(nm km) at 1550 nm, nonlinear coefficient
    1.13 1/(W km), shipped attenuation and Raman tables.
    """
    return FiberSpec(
        length_km=length_km,
        attenuation_table=_load_packaged("attenuation_smf28.tsv"),
        dispersion_ps_nm_km=16.5,
        reference_wavelength_nm=1550.0,
        nonlinear_coeff_w_km=1.13,
        raman_table=_load_packaged("raman_gain_silica.tsv"),
        temperature_k=temperature_k,
    )


def triangular_raman_table(peak_per_w_km=0.42, peak_shift_thz=13.2, cutoff_thz=15.0):
    """Triangular small-shift approximation of the Raman profile.

    Linear rise to the peak then a linear fall to zero at the cutoff;
    used as a fast substitute for the measured profile shape.
    """
    return np.array([
        [0.0, 0.0],
        [peak_shift_thz, peak_per_w_km],
        [cutoff_thz, 0.0],
    ])

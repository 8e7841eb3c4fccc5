"""Coupled power evolution of WDM channels and backward Raman pumps.

One span is modelled by the standard coupled Raman equations: every
wave exchanges power with every other through the fiber's Raman gain
profile (photon-conversion ratio on the donor side), on top of its own
spectral attenuation. Signals propagate forward, pumps backward; the
two-point boundary value problem (signals known at z = 0, pumps known
at z = L) is solved by damped alternating forward/backward sweeps.

The integrator is a fixed-step 4th-order Runge-Kutta: the equations are
smooth and a fixed step keeps runs bit-reproducible.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .fiber import attenuation_at, raman_gain
from .units import db_per_km_to_linear, nm_to_thz

_trapz = getattr(np, "trapezoid", np.trapz)

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap

PUMP_WAVELENGTH_WINDOW_NM = (1350.0, 1460.0)
MAX_PUMP_POWER_MW = 250.0


class ConvergenceError(RuntimeError):
    """Pump boundary iteration did not reach the requested residual."""


class IntegrationError(RuntimeError):
    """Integrator produced a negative power (step size too large)."""


@dataclass(frozen=True)
class RamanPumpSet:
    """Backward-propagating pumps: wavelength (nm) and injected power (mW)."""

    wavelengths_nm: np.ndarray
    powers_mw: np.ndarray

    def __post_init__(self):
        wl = np.atleast_1d(np.asarray(self.wavelengths_nm, dtype=float))
        p = np.atleast_1d(np.asarray(self.powers_mw, dtype=float))
        object.__setattr__(self, "wavelengths_nm", wl)
        object.__setattr__(self, "powers_mw", p)
        if wl.shape != p.shape:
            raise ValueError("pump wavelengths and powers must have equal length")
        if np.any(p < 0) or np.any(p > MAX_PUMP_POWER_MW):
            raise ValueError(f"pump powers must lie in [0, {MAX_PUMP_POWER_MW}] mW")
        lo, hi = PUMP_WAVELENGTH_WINDOW_NM
        if wl.size and (np.any(wl < lo) or np.any(wl > hi)):
            raise ValueError(f"pump wavelengths must lie in [{lo}, {hi}] nm")
        wl.setflags(write=False)
        p.setflags(write=False)

    def __len__(self):
        return self.wavelengths_nm.size

    @property
    def frequencies_thz(self):
        return nm_to_thz(self.wavelengths_nm)


def no_pumps():
    return RamanPumpSet(np.empty(0), np.empty(0))


@dataclass(frozen=True)
class PowerProfile:
    """Solved per-wave power (mW) on a uniform z grid over one span."""

    z_km: np.ndarray
    signal_mw: np.ndarray             # (n_channels, n_z)
    pump_mw: np.ndarray               # (n_pumps, n_z)
    signal_frequencies_thz: np.ndarray
    pump_frequencies_thz: np.ndarray
    sweeps: int = 0
    residual: float = 0.0

    def __post_init__(self):
        for name in ("z_km", "signal_mw", "pump_mw",
                     "signal_frequencies_thz", "pump_frequencies_thz"):
            arr = np.asarray(getattr(self, name), dtype=float)
            object.__setattr__(self, name, arr)
            arr.setflags(write=False)
        if np.any(self.signal_mw < 0) or np.any(self.pump_mw < 0):
            raise IntegrationError("negative power in solved profile")

    @property
    def length_km(self):
        return float(self.z_km[-1])

    @property
    def launch_mw(self):
        return self.signal_mw[:, 0]

    @property
    def output_mw(self):
        return self.signal_mw[:, -1]


@dataclass(frozen=True)
class EffectiveIntegrals:
    """Per-channel normalized power-path integral (km) and span output (mW)."""

    path_integral_km: np.ndarray
    output_mw: np.ndarray


def coupling_matrix(fiber, frequencies_thz):
    """Pairwise Raman coupling K[i, j] acting on wave i from wave j, 1/(W km).

    K[i, j] = g_R(f_j - f_i) when f_j > f_i (wave i gains) and
    -(f_i / f_j) g_R(f_i - f_j) when f_j < f_i (wave i is the donor;
    the frequency ratio accounts for the photon energy difference).
    """
    f = np.asarray(frequencies_thz, dtype=float)
    fi = f[:, None]
    fj = f[None, :]
    shift = fj - fi
    g = np.interp(np.abs(shift), fiber.raman_table[:, 0], fiber.raman_table[:, 1],
                  left=0.0, right=0.0)
    k = np.where(shift > 0, g, -(fi / np.where(fj > 0, fj, 1.0)) * g)
    np.fill_diagonal(k, 0.0)
    return k


@njit(cache=True)
def _deriv(p_self, p_other_w, k_self, k_other, alpha, out):
    n = p_self.shape[0]
    m = p_other_w.shape[0]
    for i in range(n):
        acc = -alpha[i]
        for j in range(n):
            acc += k_self[i, j] * (p_self[j] * 1e-3)
        for j in range(m):
            acc += k_other[i, j] * p_other_w[j]
        out[i] = p_self[i] * acc
    return out


@njit(cache=True)
def _sweep_kernel(p0, frozen, k_self, k_cross, alpha, h, reverse):
    """RK4 integration of one co-moving block against a frozen other block.

    ``frozen`` is indexed on the z grid; with ``reverse`` the block is
    integrated from z = L to 0 (backward pumps), still returning the
    profile in z-index order. The derivative is always taken along the
    block's own direction of travel, so the step is +h either way and
    only the traversal order of the frozen profile flips.
    """
    n = p0.shape[0]
    n_z = frozen.shape[1]
    n_steps = n_z - 1
    prof = np.empty((n, n_z))
    p = p0.copy()
    step = h
    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    tmp = np.empty(n)
    other_a = np.empty(frozen.shape[0])
    other_m = np.empty(frozen.shape[0])
    other_b = np.empty(frozen.shape[0])
    if not reverse:
        prof[:, 0] = p
    else:
        prof[:, n_z - 1] = p
    for s in range(n_steps):
        if not reverse:
            ia, ib = s, s + 1
        else:
            ia, ib = n_z - 1 - s, n_z - 2 - s
        for j in range(frozen.shape[0]):
            other_a[j] = frozen[j, ia] * 1e-3
            other_b[j] = frozen[j, ib] * 1e-3
            other_m[j] = 0.5 * (other_a[j] + other_b[j])
        _deriv(p, other_a, k_self, k_cross, alpha, k1)
        for i in range(n):
            tmp[i] = p[i] + 0.5 * step * k1[i]
        _deriv(tmp, other_m, k_self, k_cross, alpha, k2)
        for i in range(n):
            tmp[i] = p[i] + 0.5 * step * k2[i]
        _deriv(tmp, other_m, k_self, k_cross, alpha, k3)
        for i in range(n):
            tmp[i] = p[i] + step * k3[i]
        _deriv(tmp, other_b, k_self, k_cross, alpha, k4)
        ok = True
        for i in range(n):
            p[i] = p[i] + (step / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            if p[i] < 0.0 or not np.isfinite(p[i]):
                ok = False
        if not ok:
            return prof, False
        prof[:, ib] = p
    return prof, True


def _run_sweep(p0, frozen, k_self, k_cross, alpha, h, reverse):
    prof, ok = _sweep_kernel(
        np.ascontiguousarray(p0, dtype=float),
        np.ascontiguousarray(frozen, dtype=float),
        np.ascontiguousarray(k_self, dtype=float),
        np.ascontiguousarray(k_cross, dtype=float),
        np.ascontiguousarray(alpha, dtype=float),
        float(h),
        bool(reverse),
    )
    if not ok:
        raise IntegrationError(
            "integrator produced a negative power; reduce step_km"
        )
    return prof


def propagate(grid, fiber, pumps=None, *, step_km=0.1, bvp_tol=1e-6,
              max_sweeps=200, damping=0.5):
    """Solve one span's power evolution for all channels and pumps.

    Signals are launched at z = 0 with the grid's launch powers; pumps
    are injected backward at z = L. The boundary-value problem is
    iterated (signals forward with the pump profile frozen, pumps
    backward with the signal profile frozen, damped update) until the
    relative pump-profile residual drops below ``bvp_tol``.

    Pump depletion by the signals and pump-pump interactions are both
    included.
    """
    if pumps is None:
        pumps = no_pumps()
    if len(grid) == 0:
        raise ValueError("empty channel grid")

    n_s = len(grid)
    n_p = len(pumps)
    f_sig = np.asarray(grid.frequencies_thz, dtype=float)
    f_pump = np.asarray(pumps.frequencies_thz, dtype=float) if n_p else np.empty(0)

    length = fiber.length_km
    n_steps = max(1, int(round(length / step_km)))
    h = length / n_steps
    z = np.linspace(0.0, length, n_steps + 1)

    alpha_s = db_per_km_to_linear(attenuation_at(fiber, grid.wavelengths_nm))
    k_all = coupling_matrix(fiber, np.concatenate([f_sig, f_pump]))
    k_ss = k_all[:n_s, :n_s]
    k_sp = k_all[:n_s, n_s:]
    k_pp = k_all[n_s:, n_s:]
    k_ps = k_all[n_s:, :n_s]

    p_sig0 = np.asarray(grid.launch_power_mw, dtype=float)

    if n_p == 0 or not np.any(pumps.powers_mw > 0):
        pump_prof = np.zeros((n_p, n_steps + 1))
        sig_prof = _run_sweep(p_sig0, np.zeros((1, n_steps + 1)),
                              k_ss, np.zeros((n_s, 1)), alpha_s, h, False)
        return PowerProfile(z, sig_prof, pump_prof, f_sig, f_pump,
                            sweeps=1, residual=0.0)

    alpha_p = db_per_km_to_linear(attenuation_at(fiber, pumps.wavelengths_nm))
    p_inj = np.asarray(pumps.powers_mw, dtype=float)

    # initial guess: undepleted backward pumps
    pump_prof = p_inj[:, None] * np.exp(-alpha_p[:, None] * (length - z[None, :]))

    scale = np.maximum(p_inj, 1e-9)
    residual = np.inf
    for sweep in range(1, max_sweeps + 1):
        sig_prof = _run_sweep(p_sig0, pump_prof, k_ss, k_sp, alpha_s, h, False)
        fresh = _run_sweep(p_inj, sig_prof, k_pp, k_ps, alpha_p, h, True)
        residual = float(np.max(np.abs(fresh - pump_prof) / scale[:, None]))
        pump_prof = damping * pump_prof + (1.0 - damping) * fresh
        if residual < bvp_tol:
            break
    else:
        raise ConvergenceError(
            f"pump boundary iteration stalled at residual {residual:.3e} "
            f"after {max_sweeps} sweeps (tol {bvp_tol:.1e})"
        )

    # final signal pass against the converged pump profile
    sig_prof = _run_sweep(p_sig0, pump_prof, k_ss, k_sp, alpha_s, h, False)
    return PowerProfile(z, sig_prof, pump_prof, f_sig, f_pump,
                        sweeps=sweep, residual=residual)


def on_off_gain(with_pumps, without_pumps):
    """Per-channel on-off gain in dB from two profiles on the same grid."""
    same_z = (with_pumps.z_km.shape == without_pumps.z_km.shape
              and np.allclose(with_pumps.z_km, without_pumps.z_km))
    same_f = (with_pumps.signal_frequencies_thz.shape
              == without_pumps.signal_frequencies_thz.shape
              and np.allclose(with_pumps.signal_frequencies_thz,
                              without_pumps.signal_frequencies_thz))
    if not (same_z and same_f):
        raise ValueError("profiles were solved on different grids")
    return 10.0 * np.log10(with_pumps.output_mw / without_pumps.output_mw)


def effective_integrals(profile):
    """Per-channel normalized power-path integral and end-of-span power.

    The integral is int_0^L P(z)/P(0) dz (trapezoidal on the solved
    grid); it reduces to the classic effective length for a purely
    attenuated channel and grows under distributed Raman gain.
    """
    ratio = profile.signal_mw / profile.signal_mw[:, :1]
    path = _trapz(ratio, profile.z_km, axis=1)
    return EffectiveIntegrals(path_integral_km=path,
                              output_mw=profile.output_mw.copy())


def profile_to_tsv(profile, path, band_labels=None):
    """Dump a solved profile as TSV (z plus one dBm column per wave)."""
    with np.errstate(divide="ignore"):
        sig_dbm = 10.0 * np.log10(np.maximum(profile.signal_mw, 1e-300))
        pump_dbm = 10.0 * np.log10(np.maximum(profile.pump_mw, 1e-300))
    with open(path, "w") as fh:
        fh.write("# sclink power profile v1\n")
        cols = ["z_km"]
        for i, f in enumerate(profile.signal_frequencies_thz):
            label = band_labels[i] if band_labels else "ch"
            cols.append(f"{label}_{f:.4f}THz_dbm")
        for f in profile.pump_frequencies_thz:
            cols.append(f"pump_{f:.4f}THz_dbm")
        fh.write("\t".join(cols) + "\n")
        for iz, zv in enumerate(profile.z_km):
            row = [f"{zv:.6g}"]
            row += [f"{v:.6f}" for v in sig_dbm[:, iz]]
            row += [f"{v:.6f}" for v in pump_dbm[:, iz]]
            fh.write("\t".join(row) + "\n")

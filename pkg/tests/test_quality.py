"""Noise and throughput model.

Oracles: hand-evaluated ASE power, a brute-force 2-D integration of the
GN kernel for the single-channel SPM term, the constellation-moment
excess kurtosis, and direct Shannon-sum evaluation.
"""

import numpy as np
import pytest
from scipy.constants import Planck

import sclink as sl
from sclink.grid import ChannelGrid
from sclink.quality import (AmplifierSpec, FORMAT_CORRECTION_COEFF,
                            band_throughput, channel_snr, dra_ase_power,
                            dra_ase_power_all, excess_kurtosis,
                            lumped_ase_power, nli_power, nli_power_all,
                            qam_constellation)
from sclink.raman import RamanPumpSet, effective_integrals, propagate
from sclink.units import db_per_km_to_linear, nm_to_thz

trapz = getattr(np, "trapezoid", np.trapz)


# --- lumped ASE ------------------------------------------------------------

def test_transparent_amplifier_adds_no_ase():
    amp = AmplifierSpec("C", 5.0, gain=1.0)
    assert lumped_ase_power(amp, 193.4, 140.0) == 0.0


def test_ase_hand_value():
    # oracle: h * f * 10^(5/10) * (39.81 - 1) * 140e9, dual-pol convention
    amp = AmplifierSpec("C", 5.0, gain=39.81)
    oracle_w = Planck * 193.4e12 * 10 ** 0.5 * 38.81 * 1.4e11
    got_w = lumped_ase_power(amp, 193.4, 140.0) * 1e-3
    assert got_w == pytest.approx(oracle_w, rel=1e-12)
    assert got_w == pytest.approx(2.20e-6, rel=1e-2)


def test_ase_linear_in_bandwidth():
    amp = AmplifierSpec("L", 6.0, gain=20.0)
    one = lumped_ase_power(amp, 186.0, 140.0)
    two = lumped_ase_power(amp, 186.0, 280.0)
    assert two == pytest.approx(2.0 * one, rel=1e-12)


def test_amplifier_spec_invariants():
    with pytest.raises(ValueError):
        AmplifierSpec("C", 5.0, gain=0.5)
    with pytest.raises(ValueError, match="quantum limit"):
        AmplifierSpec("C", 2.0, gain=100.0)


# --- distributed Raman ASE --------------------------------------------------

def test_dra_ase_zero_without_pumps(fiber, small_grid):
    prof = propagate(small_grid, fiber, None, step_km=0.5)
    assert dra_ase_power(prof, fiber, 0, 140.0) == 0.0


def test_dra_ase_monotone_in_pump_power(fiber, small_grid):
    last = None
    for power in (60.0, 150.0, 250.0):
        pumps = RamanPumpSet(np.array([1428.0]), np.array([power]))
        prof = propagate(small_grid, fiber, pumps, step_km=0.5)
        ase = dra_ase_power(prof, fiber, len(small_grid) - 1, 140.0)
        assert ase > 0
        if last is not None:
            assert ase > last
        last = ase


def test_dra_ase_cold_fiber_reduces_to_spontaneous_term(small_grid):
    base = sl.default_fiber()
    cold = sl.FiberSpec(
        length_km=base.length_km,
        attenuation_table=base.attenuation_table,
        dispersion_ps_nm_km=base.dispersion_ps_nm_km,
        reference_wavelength_nm=base.reference_wavelength_nm,
        nonlinear_coeff_w_km=base.nonlinear_coeff_w_km,
        raman_table=base.raman_table,
        temperature_k=1.0,
    )
    pumps = RamanPumpSet(np.array([1428.0]), np.array([200.0]))
    prof = propagate(small_grid, cold, pumps, step_km=0.5)
    i = len(small_grid) - 1
    got = dra_ase_power(prof, cold, i, 140.0)
    # oracle: the bare spontaneous integral without the phonon factor
    f_i = prof.signal_frequencies_thz[i]
    shift = prof.pump_frequencies_thz[0] - f_i
    g = np.interp(shift, cold.raman_table[:, 0], cold.raman_table[:, 1])
    gamma_to_end = prof.signal_mw[i, -1] / prof.signal_mw[i]
    integral = trapz(g * prof.pump_mw[0] * 1e-3 * gamma_to_end, prof.z_km)
    oracle_mw = 2 * Planck * f_i * 1e12 * 140e9 * integral * 1e3
    assert got == pytest.approx(oracle_mw, rel=1e-9)


def test_dra_ase_scalar_matches_vector(fiber, small_grid):
    pumps = RamanPumpSet(np.array([1428.0]), np.array([200.0]))
    prof = propagate(small_grid, fiber, pumps, step_km=0.5)
    allv = dra_ase_power_all(prof, fiber, 140.0)
    for i in (0, 7, len(small_grid) - 1):
        assert dra_ase_power(prof, fiber, i, 140.0) == pytest.approx(allv[i])


# --- GN nonlinear interference ----------------------------------------------

def test_nli_zero_without_nonlinearity(single_channel_grid):
    base = sl.default_fiber()
    linear = sl.FiberSpec(
        length_km=base.length_km,
        attenuation_table=base.attenuation_table,
        dispersion_ps_nm_km=base.dispersion_ps_nm_km,
        reference_wavelength_nm=base.reference_wavelength_nm,
        nonlinear_coeff_w_km=0.0,
        raman_table=base.raman_table,
    )
    prof = propagate(single_channel_grid, linear, None)
    eff = effective_integrals(prof)
    assert nli_power(single_channel_grid, linear, eff, 0) == 0.0


def test_nli_cubic_power_scaling(fiber, small_grid):
    prof = propagate(small_grid, fiber, None, step_km=0.5)
    eff = effective_integrals(prof)
    base = nli_power_all(small_grid, fiber, eff)
    doubled_grid = ChannelGrid(
        small_grid.frequencies_thz, small_grid.band_labels,
        small_grid.symbol_rate_gbd, small_grid.launch_power_mw * 2.0,
        small_grid.channel_spacing_ghz)
    doubled = nli_power_all(doubled_grid, fiber, eff)
    assert np.allclose(doubled, 8.0 * base, rtol=1e-2)


def test_single_channel_spm_vs_brute_force(fiber, single_channel_grid):
    """Closed form within 15 percent of the 2-D GN kernel integral."""
    grid = single_channel_grid
    b = 140e9
    p_w = grid.launch_power_mw[0] * 1e-3
    gamma = fiber.nonlinear_coeff_w_km
    alpha = db_per_km_to_linear(0.2)
    length = 80.0
    beta2 = fiber.beta2_abs_s2_km(1550.0)

    n = 601
    f1 = np.linspace(-b / 2, b / 2, n)
    f1g, f2g = np.meshgrid(f1, f1, indexing="ij")
    phi = 4 * np.pi**2 * beta2 * f1g * f2g
    mu2 = (1 + np.exp(-2 * alpha * length)
           - 2 * np.exp(-alpha * length) * np.cos(phi * length)) \
        / (alpha**2 + phi**2)
    inside = np.abs(f1g + f2g) <= b / 2
    psd = (p_w / b) ** 3 * mu2 * inside
    df = f1[1] - f1[0]
    g_nli = (16.0 / 27.0) * gamma**2 * trapz(trapz(psd, dx=df, axis=1), dx=df)
    oracle_w = g_nli * b

    prof = propagate(grid, fiber, None)
    eff = effective_integrals(prof)
    got_w = nli_power(grid, fiber, eff, 0, format_correction=False) * 1e-3
    assert got_w == pytest.approx(oracle_w, rel=0.15)


def test_qam64_excess_kurtosis_from_moments():
    # oracle: plain moment sums over the 64 points
    levels = (-7, -5, -3, -1, 1, 3, 5, 7)
    pts = [complex(a, c) for a in levels for c in levels]
    m2 = sum(abs(x) ** 2 for x in pts) / 64
    m4 = sum(abs(x) ** 4 for x in pts) / 64
    oracle = m4 / m2**2 - 2.0
    assert oracle == pytest.approx(-0.6190, abs=5e-4)
    assert excess_kurtosis(qam_constellation(64)) == pytest.approx(oracle,
                                                                   rel=1e-12)


def test_format_correction_reduces_xpm(fiber, small_grid):
    prof = propagate(small_grid, fiber, None, step_km=0.5)
    eff = effective_integrals(prof)
    on = nli_power_all(small_grid, fiber, eff, format_correction=True)
    off = nli_power_all(small_grid, fiber, eff, format_correction=False)
    assert np.all(on < off)
    assert FORMAT_CORRECTION_COEFF == pytest.approx(5.0 / 6.0)


# --- SNR combination ---------------------------------------------------------

def test_snr_transceiver_ceiling():
    assert channel_snr(1.0, 0.0, 0.0, 100.0) == pytest.approx(100.0)


def test_snr_equal_parallel_combination():
    # link SNR 100 with transceiver SNR 100 halves the total
    assert channel_snr(1.0, 0.01, 0.0, 100.0) == pytest.approx(50.0)


def test_snr_without_transceiver_limit():
    p = 2.0
    assert channel_snr(p, p / 200, p / 200, float("inf")) == pytest.approx(100.0)


def test_snr_monotone_and_bounded():
    rng = np.random.default_rng(7)
    for _ in range(100):
        p = rng.uniform(0.5, 4.0)
        ase = rng.uniform(0.0, 0.2)
        nli = rng.uniform(0.0, 0.2)
        trx = rng.uniform(10.0, 1000.0)
        snr = channel_snr(p, ase, nli, trx)
        assert snr <= trx
        assert channel_snr(p, ase * 2 + 1e-6, nli, trx) < snr


# --- throughput ---------------------------------------------------------------

def test_single_channel_throughput(single_channel_grid):
    # oracle: 2 * 140e9 * log2(101)
    oracle = 2 * 140e9 * np.log2(101.0) / 1e12
    got = band_throughput(single_channel_grid, np.array([100.0]))
    assert got["C"] == pytest.approx(oracle, rel=1e-12)
    assert got["C"] == pytest.approx(1.8643, abs=2e-4)


def test_zero_snr_zero_throughput(small_grid):
    got = band_throughput(small_grid, np.zeros(len(small_grid)))
    assert all(v == 0.0 for v in got.values())


def test_throughput_invariant_under_reordering(scl_grid):
    rng = np.random.default_rng(3)
    snrs = rng.uniform(5.0, 120.0, len(scl_grid))
    base = band_throughput(scl_grid, snrs)
    # permute SNRs within one band only
    s_idx = scl_grid.band_indices("S")
    perm = snrs.copy()
    perm[s_idx] = perm[s_idx][::-1]
    again = band_throughput(scl_grid, perm)
    for band in base:
        assert again[band] == pytest.approx(base[band], rel=1e-12)


def test_nspan_accumulation_is_linear():
    p, ase, nli = 1.5, 0.001, 0.0005
    n = 37
    single_inv = (ase + nli) / p
    combined = channel_snr(p, n * ase, n * nli, float("inf"))
    assert 1.0 / combined == pytest.approx(n * single_inv, rel=1e-12)


def test_sband_one_span_scale(fiber, scl_grid, amplifiers):
    """Transceiver-limited single span: S-band lands near the reported
    per-band scale (tens of Tb/s, below the 54-channel ceiling)."""
    from sclink.scenario import LinkScenario, evaluate_scenario
    from sclink.measure import default_efficiency_curve, default_pump_draw_curve

    sc = LinkScenario(grid=scl_grid, fiber=fiber, amplifiers=amplifiers,
                      pumps=sl.no_pumps(), n_span=1, p_mm_w=0.0)
    res = evaluate_scenario(sc, {b: default_efficiency_curve(b) for b in "SCL"},
                            default_pump_draw_curve())
    s_tbps = res.quality.throughput_tbps["S"]
    ceiling = 54 * 2 * 140e9 * np.log2(101.0) / 1e12
    assert ceiling == pytest.approx(100.7, abs=0.2)
    assert 70.0 < s_tbps < ceiling

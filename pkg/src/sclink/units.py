"""Unit helpers shared across the package.

Internal conventions: optical power in mW, distance in km, frequency in
THz, attenuation in dB/km (converted to 1/km where integrated).
"""

import numpy as np

# speed of light expressed in nm * THz (= 2.99792458e8 m/s)
C_NM_THZ = 299_792.458

LN10_OVER_10 = np.log(10.0) / 10.0


def nm_to_thz(wavelength_nm):
    return C_NM_THZ / np.asarray(wavelength_nm, dtype=float)


def thz_to_nm(frequency_thz):
    return C_NM_THZ / np.asarray(frequency_thz, dtype=float)


def dbm_to_mw(dbm):
    return 10.0 ** (np.asarray(dbm, dtype=float) / 10.0)


def mw_to_dbm(mw):
    return 10.0 * np.log10(np.asarray(mw, dtype=float))


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def linear_to_db(ratio):
    return 10.0 * np.log10(np.asarray(ratio, dtype=float))


def db_per_km_to_linear(alpha_db_km):
    """Power attenuation dB/km -> 1/km (natural units)."""
    return np.asarray(alpha_db_km, dtype=float) * LN10_OVER_10

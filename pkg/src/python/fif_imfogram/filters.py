"""
Discrete filters for iterative filtering.

A prototype w0 is a double convolution filter supported on [-1/2, 1/2].
Dilating it to a length ell gives w(x) = w0(x/ell)/ell; sampling that at
the integers and renormalizing gives the taps of a DiscreteFilter, which
acts on Z_N by circular convolution. The filter length itself is chosen
from the data as nu times the median distance between consecutive local
extrema.
"""
from __future__ import annotations

import enum
import os
from dataclasses import dataclass

import numpy as np
import scipy.fft
import scipy.integrate

from .abelian import GroupSpec, SignalND, get_fft_workers
from .exceptions import (
    ConfigError,
    FilterError,
    MissingInputError,
    NoSpectralZeroError,
    SignalParseError,
    TooFewExtremaError,
)

# spectrum values at or below this count as zeros
TAU_ZERO = 1e-6

DEFAULT_NU = 1.6
DEFAULT_RESOLUTION = 2001
MIN_FILTER_LENGTH = 2.0

_TABLE_TOL = 1e-8


class PrototypeKind(str, enum.Enum):
    TRIANGLE = "triangle"
    TABULATED = "tabulated"


@dataclass(frozen=True, eq=False)
class FilterPrototype:
    "Dense table of a prototype w0 on [-1/2, 1/2], evaluated by linear interpolation."

    kind: PrototypeKind
    x: np.ndarray
    samples: np.ndarray

    @property
    def resolution(self):
        return len(self.x)

    def __call__(self, x):
        return np.interp(x, self.x, self.samples, left=0.0, right=0.0)


def _triangle_table(resolution):
    # odd resolution keeps the peak at x = 0 on the grid
    if resolution % 2 == 0:
        resolution += 1
    x = np.linspace(-0.5, 0.5, resolution)
    # self-convolution of the uniform density on [-1/4, 1/4]
    samples = 4.0 * np.maximum(0.0, 0.5 - np.abs(x))
    return x, samples


def _validate_table(x, samples):
    if x.ndim != 1 or x.shape != samples.shape or len(x) < 3:
        raise FilterError("prototype table needs at least 3 (x, value) pairs")
    if np.any(np.diff(x) <= 0):
        raise FilterError("prototype x values must be strictly ascending")
    if x[0] < -0.5 - _TABLE_TOL or x[-1] > 0.5 + _TABLE_TOL:
        raise FilterError("prototype x values must lie in [-1/2, 1/2]")
    if np.any(samples < 0):
        bad = int(np.flatnonzero(samples < 0)[0])
        raise FilterError(f"prototype is negative at x = {x[bad]:g}")
    peak = samples.max()
    if peak <= 0:
        raise FilterError("prototype is identically zero")
    mirrored = np.interp(-x, x, samples, left=0.0, right=0.0)
    if not np.allclose(mirrored, samples, rtol=0, atol=_TABLE_TOL * peak):
        raise FilterError("prototype is not even about 0")
    mass = scipy.integrate.trapezoid(samples, x)
    return mass


def make_prototype(kind=PrototypeKind.TRIANGLE, table=None, *, resolution=DEFAULT_RESOLUTION, normalize=False):
    """
    Build a filter prototype.

    `table` is an (n, 2) array of (x, w0(x)) pairs and is required for the
    tabulated kind. It must be nonnegative, even and of unit mass
    (trapezoidal rule); pass normalize=True to rescale the mass instead.
    """
    kind = PrototypeKind(kind)
    if kind is PrototypeKind.TRIANGLE:
        x, samples = _triangle_table(resolution)
        return FilterPrototype(kind, x, samples)

    if table is None:
        raise ConfigError("a tabulated prototype needs a table of (x, value) pairs")
    table = np.asarray(table, dtype=np.float64)
    if table.ndim != 2 or table.shape[1] != 2:
        raise FilterError("prototype table must have two columns: x and value")
    x = table[:, 0].copy()
    samples = table[:, 1].copy()
    if not np.all(np.isfinite(table)):
        raise FilterError("prototype table has non-finite entries")

    mass = _validate_table(x, samples)
    if normalize:
        samples = samples / mass
    elif abs(mass - 1.0) > _TABLE_TOL:
        raise FilterError(f"prototype must integrate to 1, not {mass:.10g}")

    return FilterPrototype(kind, x, samples)


def load_prototype(path, *, normalize=False):
    "Load a tabulated prototype from a two-column `x value` text file."
    if not os.path.exists(path):
        raise MissingInputError(f"prototype file '{path}' does not exist")
    rows = []
    with open(path, "rt") as fp:
        for lineno, line in enumerate(fp, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.replace(",", " ").split()
            if len(fields) != 2:
                raise SignalParseError(
                    f"prototype file '{path}', line {lineno}: expected 2 columns, found {len(fields)}"
                )
            try:
                rows.append((float(fields[0]), float(fields[1])))
            except ValueError:
                raise SignalParseError(
                    f"prototype file '{path}', line {lineno}: could not parse '{line}'"
                )
    if not rows:
        raise SignalParseError(f"prototype file '{path}' is empty")
    return make_prototype(PrototypeKind.TABULATED, np.array(rows), normalize=normalize)


@dataclass(frozen=True, eq=False)
class DiscreteFilter:
    """
    Even, nonnegative, unit-sum taps centered at 0, acting on Z_N.

    taps[m + k] is the weight at group element k, for k = -m..m.
    """

    taps: np.ndarray
    length_ell: float
    group: GroupSpec

    def __post_init__(self):
        taps = np.array(self.taps, dtype=np.float64)
        if self.group.ndim != 1:
            raise FilterError("DiscreteFilter acts on 1-D groups only")
        if taps.ndim != 1 or len(taps) % 2 != 1:
            raise FilterError("filter needs an odd number of taps")
        if len(taps) > self.group.order:
            raise FilterError(
                f"filter has {len(taps)} taps but the group has only {self.group.order} elements"
            )
        if np.any(taps < 0):
            raise FilterError("filter taps must be nonnegative")
        if not np.array_equal(taps, taps[::-1]):
            raise FilterError("filter taps must be even")
        if abs(taps.sum() - 1.0) > 1e-9:
            raise FilterError(f"filter taps must sum to 1, not {taps.sum():.12g}")
        taps.setflags(write=False)
        object.__setattr__(self, "taps", taps)

    @property
    def half_width(self):
        return len(self.taps) // 2

    @property
    def support(self):
        return len(self.taps)

    def wrapped(self):
        "The filter as a function on the group."
        n = self.group.order
        m = self.half_width
        out = np.zeros(n)
        out[np.arange(-m, m + 1) % n] = self.taps
        return out

    def as_signal(self, sample_rate=1.0):
        return SignalND(self.group, self.wrapped(), sample_rate)

    def self_convolve(self, k):
        "The k-fold self-convolution; its spectrum is (F w)^k."
        if k < 1:
            raise ConfigError("self-convolution power must be >= 1")
        taps = self.taps
        for _ in range(k - 1):
            taps = np.convolve(taps, self.taps)
        if len(taps) > self.group.order:
            raise FilterError(
                f"{k}-fold self-convolution needs {len(taps)} taps; the group has {self.group.order}"
            )
        taps = 0.5 * (taps + taps[::-1])
        return DiscreteFilter(taps / taps.sum(), k * self.length_ell, self.group)


def dilate_and_sample(proto, ell, group):
    """
    Sample the dilation w0(./ell)/ell at the integers |k| <= floor(ell/2).

    Only k >= 0 is evaluated and mirrored, so the taps are exactly even.
    """
    ell = float(ell)
    if ell < MIN_FILTER_LENGTH:
        raise FilterError(f"filter length must be >= {MIN_FILTER_LENGTH:g}, not {ell:g}")
    if group.ndim != 1:
        raise FilterError("dilate_and_sample builds 1-D filters; use make_radial_filter for grids")
    m = int(np.floor(ell / 2))
    if 2 * m + 1 > group.order:
        raise FilterError(
            f"filter of length {ell:g} needs {2 * m + 1} taps but the signal has {group.order} samples"
        )
    half = proto(np.arange(m + 1) / ell)
    taps = np.concatenate([half[:0:-1], half])
    total = taps.sum()
    if total <= 0:
        raise FilterError(f"prototype has no mass on the taps of a length-{ell:g} filter")
    return DiscreteFilter(taps / total, ell, group)


def transfer_function(filt):
    """
    The real multiplier F w: unnormalized DFT of the wrapped taps.

    Works for any filter with a `wrapped()` method (1-D or 2-D).
    """
    spectrum = scipy.fft.fftn(filt.wrapped(), workers=get_fft_workers())
    residue = np.abs(spectrum.imag).max()
    if residue > 1e-10:
        raise FilterError(f"filter spectrum is not real (residue {residue:.3g}); taps are not even")
    return spectrum.real


@dataclass(frozen=True, eq=False)
class FilterSpectrumInfo:
    spectrum: np.ndarray
    first_zero_index: int
    first_zero_freq: float


def first_zero_index(line):
    """
    Smallest 0 < k <= n/2 where the sampled spectrum reaches zero, or None.

    The spectrum reaches zero at k if line[k] <= TAU_ZERO (this also catches
    a sign change between k-1 and k), or if k is its first local minimum:
    a double zero of a nonnegative spectrum that falls between two sampled
    frequencies never dips below the threshold.
    """
    n = len(line)
    k = np.arange(1, n // 2 + 1)
    below = np.flatnonzero(line[k] <= TAU_ZERO)
    minima = np.flatnonzero((line[k] < line[k - 1]) & (line[k] <= line[(k + 1) % n]))
    found = [int(idx[0]) + 1 for idx in (below, minima) if len(idx)]
    if not found:
        return None
    return min(found)


def filter_spectrum_info(filt, sample_rate=1.0):
    """
    Spectrum of a filter and its first spectral zero xi, in physical units.
    """
    spectrum = transfer_function(filt)
    k = first_zero_index(spectrum)
    if k is None:
        raise NoSpectralZeroError(
            f"filter of length {filt.length_ell:g} has no spectral zero below Nyquist",
            spectrum=spectrum,
        )
    n = filt.group.order
    return FilterSpectrumInfo(spectrum, k, k * sample_rate / n)


def extrema_indices(values):
    """
    Local extrema of a circular 1-D sequence.

    An extremum is a strict sign change of the first circular difference;
    a plateau between opposite-sign differences counts once, at its
    midpoint (the lower middle for even runs).
    """
    values = np.asarray(values, dtype=np.float64)
    n = len(values)
    diff = np.roll(values, -1) - values
    nz = np.flatnonzero(diff)
    if len(nz) == 0:
        return np.empty(0, dtype=np.int64)
    signs = np.sign(diff[nz])
    run = (np.roll(nz, -1) - nz) % n
    run[run == 0] = n
    turning = signs != np.roll(signs, -1)
    start = nz[turning] + 1
    idx = (start + (run[turning] - 1) // 2) % n
    return np.sort(idx)


def find_local_extrema(signal):
    if signal.ndim != 1:
        raise ConfigError("find_local_extrema needs a 1-D signal")
    return [int(i) for i in extrema_indices(signal.values)]


def circular_gaps(indices, n):
    "Distances between consecutive indices on Z_n, wrap-around gap included."
    indices = np.sort(np.asarray(indices, dtype=np.int64))
    if len(indices) < 2:
        return np.empty(0, dtype=np.int64)
    inner = np.diff(indices)
    return np.append(inner, n - indices[-1] + indices[0])


def median_gap(gaps):
    return float(np.median(gaps))


def estimate_filter_length(signal, nu=DEFAULT_NU):
    "nu times the median circular distance between consecutive extrema, at least 2."
    indices = find_local_extrema(signal)
    if len(indices) < 2:
        raise TooFewExtremaError(
            f"signal has {len(indices)} local extrema; at least 2 are needed", len(indices)
        )
    gaps = circular_gaps(indices, signal.n)
    return max(MIN_FILTER_LENGTH, nu * median_gap(gaps))

"""
Time-frequency energy plots built from an IMF decomposition.

For an IMF f produced with a filter of length ell, and a window of half
width eta*ell around each sample:

  - the local energy E_f is the mean of f^2 over the window;
  - the local frequency Omega_f is the number of zero crossings in the
    window divided by four times the window half width (in seconds).

The IMFogram sums, over IMFs, the time average of E_f on each rectangle of
a uniform time-frequency partition, counting a sample only in the
frequency bin that contains its Omega_f. A short-time Fourier spectrogram
on the same grid type serves as the classical baseline.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np
import scipy.fft
import scipy.ndimage
import scipy.signal

from . import log
from .abelian import get_fft_workers
from .exceptions import (
    ConfigError,
    EmptyDecompositionError,
    MissingInputError,
    SignalParseError,
)

DEFAULT_ETA = 10.0
DEFAULT_FREQ_BINS = 64


@dataclass(frozen=True)
class ImfogramConfig:
    eta: float = DEFAULT_ETA
    time_bin_len: float = None  # seconds; None -> l(w_1)/B
    freq_bin_count: int = DEFAULT_FREQ_BINS
    freq_max: float = None  # None -> B/2
    min_imf_energy_frac: float = 0.0

    def __post_init__(self):
        if self.eta <= 0:
            raise ConfigError(f"eta must be positive, not {self.eta}")
        if self.time_bin_len is not None and self.time_bin_len <= 0:
            raise ConfigError(f"time bin length must be positive, not {self.time_bin_len}")
        if self.freq_bin_count < 1:
            raise ConfigError(f"need at least one frequency bin, not {self.freq_bin_count}")
        if self.freq_max is not None and self.freq_max <= 0:
            raise ConfigError(f"freq_max must be positive, not {self.freq_max}")
        if not 0 <= self.min_imf_energy_frac < 1:
            raise ConfigError(
                f"min_imf_energy_frac must be in [0, 1), not {self.min_imf_energy_frac}"
            )

    def snapshot(self):
        return {
            "eta": self.eta,
            "time_bin_len": self.time_bin_len,
            "freq_bin_count": self.freq_bin_count,
            "freq_max": self.freq_max,
            "min_imf_energy_frac": self.min_imf_energy_frac,
        }


@dataclass(frozen=True, eq=False)
class LocalTrack:
    imf_index: int
    energy: np.ndarray
    frequency: np.ndarray


@dataclass(frozen=True, eq=False)
class TFGrid:
    "Energy per rectangle; rows are time bins, columns frequency bins."

    time_edges: np.ndarray
    freq_edges: np.ndarray
    energy: np.ndarray

    def __post_init__(self):
        time_edges = np.asarray(self.time_edges, dtype=np.float64)
        freq_edges = np.asarray(self.freq_edges, dtype=np.float64)
        energy = np.asarray(self.energy, dtype=np.float64)
        if np.any(np.diff(time_edges) <= 0) or np.any(np.diff(freq_edges) <= 0):
            raise ConfigError("grid edges must be strictly ascending")
        if energy.shape != (len(time_edges) - 1, len(freq_edges) - 1):
            raise ConfigError(
                f"energy matrix {energy.shape} does not match "
                f"{len(time_edges) - 1} time bins x {len(freq_edges) - 1} frequency bins"
            )
        if np.any(energy < 0):
            raise ConfigError("grid energies must be nonnegative")
        object.__setattr__(self, "time_edges", time_edges)
        object.__setattr__(self, "freq_edges", freq_edges)
        object.__setattr__(self, "energy", energy)

    @property
    def n_time(self):
        return self.energy.shape[0]

    @property
    def n_freq(self):
        return self.energy.shape[1]

    def time_centers(self):
        return 0.5 * (self.time_edges[:-1] + self.time_edges[1:])

    def freq_centers(self):
        return 0.5 * (self.freq_edges[:-1] + self.freq_edges[1:])

    def freq_bin(self, freq):
        "Index of the half-open bin containing freq; the top bin is closed."
        idx = np.searchsorted(self.freq_edges, freq, side="right") - 1
        return np.minimum(idx, self.n_freq - 1)

    def ridge(self):
        "Frequency bin with the most energy, per time bin."
        return np.argmax(self.energy, axis=1)

    def total(self):
        return float(self.energy.sum())


def _window_half_width(record, eta, n):
    h = int(round(eta * record.filter_length))
    if h < 1:
        raise ConfigError(
            f"window eta*l = {eta * record.filter_length:.3g} is shorter than one sample"
        )
    if 2 * h + 1 > n:
        clamped = (n - 1) // 2
        log.notify(
            f"IMF {record.index}: window of {2 * h + 1} samples exceeds the signal; using {2 * clamped + 1}"
        )
        h = clamped
    return h


def _imf_values(record):
    signal = record.values
    if signal.ndim != 1:
        raise ConfigError("local energy and frequency need 1-D IMFs")
    return signal.values, signal.rate


def local_energy(record, eta=DEFAULT_ETA):
    "Mean of f^2 over the circular window of half width round(eta * l) samples."
    values, _ = _imf_values(record)
    h = _window_half_width(record, eta, len(values))
    energy = scipy.ndimage.uniform_filter1d(values * values, size=2 * h + 1, mode="wrap")
    return np.maximum(energy, 0.0)


def crossing_signs(values):
    "Signs of the samples, zeros taking the sign of the next nonzero sample."
    signs = np.sign(values).astype(np.int8)
    nonzero = np.flatnonzero(signs)
    if len(nonzero) == 0 or len(nonzero) == len(signs):
        return signs
    zeros = np.flatnonzero(signs == 0)
    following = nonzero[np.searchsorted(nonzero, zeros) % len(nonzero)]
    signs[zeros] = signs[following]
    return signs


def local_frequency(record, eta=DEFAULT_ETA):
    """
    Zero crossings in the circular window divided by 4 * (window half width
    in seconds), i.e. cycles per unit time.
    """
    values, rate = _imf_values(record)
    n = len(values)
    h = _window_half_width(record, eta, n)
    signs = crossing_signs(values)
    # crossing[i] is the pair (i, i+1)
    crossing = (signs != np.roll(signs, -1)).astype(np.int64)
    extended = crossing[np.arange(-h, n + h) % n]
    cumulative = np.concatenate([[0], np.cumsum(extended)])
    counts = cumulative[2 * h : 2 * h + n] - cumulative[:n]
    return counts * rate / (4.0 * h)


def local_track(record, eta=DEFAULT_ETA):
    return LocalTrack(record.index, local_energy(record, eta), local_frequency(record, eta))


def imfogram(result, config=None):
    "Aggregate the local energy of every IMF onto a uniform time-frequency grid."
    if config is None:
        config = ImfogramConfig()
    if not result.imfs:
        raise EmptyDecompositionError("the decomposition has no IMFs to plot")

    first = result.imfs[0].values
    n, rate = first.n, first.rate
    nyquist = rate / 2
    freq_max = config.freq_max if config.freq_max is not None else nyquist
    if freq_max > nyquist * (1 + 1e-12):
        raise ConfigError(f"freq_max {freq_max:g} exceeds Nyquist {nyquist:g}")
    time_bin_len = config.time_bin_len
    if time_bin_len is None:
        time_bin_len = result.imfs[0].filter_length / rate

    bin_samples = max(1, int(round(time_bin_len * rate)))
    n_time = int(math.ceil(n / bin_samples))
    time_edges = np.append(np.arange(n_time) * bin_samples, n) / rate
    freq_edges = np.linspace(0.0, freq_max, config.freq_bin_count + 1)
    energy = np.zeros((n_time, config.freq_bin_count))
    grid = TFGrid(time_edges, freq_edges, energy)

    time_bin = np.arange(n) // bin_samples
    bin_counts = np.bincount(time_bin, minlength=n_time)

    totals = np.array([np.sum(record.values.values ** 2) for record in result.imfs])
    cutoff = config.min_imf_energy_frac * totals.sum()
    for record, total in zip(result.imfs, totals):
        if total < cutoff:
            log.debug(f"IMF {record.index}: skipped, energy below {config.min_imf_energy_frac:g} of total")
            continue
        track = local_track(record, config.eta)
        inside = track.frequency <= freq_max
        tb = time_bin[inside]
        fb = grid.freq_bin(track.frequency[inside])
        np.add.at(energy, (tb, fb), track.energy[inside] / bin_counts[tb])

    return TFGrid(time_edges, freq_edges, energy)


def _one_sided_weights(window_len):
    weights = np.full(window_len // 2 + 1, 2.0)
    weights[0] = 1.0
    if window_len % 2 == 0:
        weights[-1] = 1.0
    return weights


def spectrogram(signal, window_len, hop, *, window="hann"):
    """
    Short-time power spectrum with circularly wrapped, centered frames.

    Frame j covers samples [j*hop, (j+1)*hop) and is centered at
    j*hop + hop//2. Each frame's one-sided power sums to the tapered mean
    square of the signal around it, so with hop = 1 the whole grid sums to
    ||s||^2.
    """
    if signal.ndim != 1:
        raise ConfigError("spectrogram needs a 1-D signal")
    n, rate = signal.n, signal.rate
    if not 2 <= window_len <= n:
        raise ConfigError(f"window length must be in [2, {n}], not {window_len}")
    if hop < 1:
        raise ConfigError(f"hop must be >= 1, not {hop}")

    taper = scipy.signal.get_window(window, window_len)
    n_frames = int(math.ceil(n / hop))
    centers = np.arange(n_frames) * hop + hop // 2
    idx = (centers[:, None] - window_len // 2 + np.arange(window_len)[None, :]) % n
    frames = signal.values[idx] * taper[None, :]
    spectra = scipy.fft.rfft(frames, axis=1, workers=get_fft_workers())
    power = np.abs(spectra) ** 2 * _one_sided_weights(window_len)[None, :]
    power /= window_len * np.sum(taper**2)

    df = rate / window_len
    n_bins = window_len // 2 + 1
    freq_edges = np.concatenate([[0.0], (np.arange(n_bins - 1) + 0.5) * df, [rate / 2]])
    time_edges = np.minimum(np.arange(n_frames + 1) * hop, n) / rate
    return TFGrid(time_edges, freq_edges, power)


def periodogram(signal):
    "One-sided power spectrum (freqs, power) that sums to the mean square of the signal."
    values = signal.values
    n = len(values)
    spectrum = scipy.fft.rfft(values, workers=get_fft_workers())
    power = np.abs(spectrum) ** 2 * _one_sided_weights(n) / n**2
    freqs = np.arange(len(power)) * signal.rate / n
    return freqs, power


def save_tfgrid(grid, path):
    "Text format: `time_edges ...` line, `freq_edges ...` line, then energy rows."
    with open(path, "wt") as fp:
        fp.write(" ".join(["time_edges"] + [repr(float(v)) for v in grid.time_edges]) + "\n")
        fp.write(" ".join(["freq_edges"] + [repr(float(v)) for v in grid.freq_edges]) + "\n")
        for row in grid.energy:
            fp.write(" ".join(repr(float(v)) for v in row) + "\n")


def load_tfgrid(path):
    if not os.path.exists(path):
        raise MissingInputError(f"grid file '{path}' does not exist")
    with open(path, "rt") as fp:
        lines = [line.split() for line in fp if line.strip()]
    if len(lines) < 2 or lines[0][0] != "time_edges" or lines[1][0] != "freq_edges":
        raise SignalParseError(f"'{path}' is not a time-frequency grid file")
    try:
        time_edges = [float(v) for v in lines[0][1:]]
        freq_edges = [float(v) for v in lines[1][1:]]
        energy = [[float(v) for v in row] for row in lines[2:]]
    except ValueError as exc:
        raise SignalParseError(f"'{path}': {exc}")
    if any(len(row) != len(freq_edges) - 1 for row in energy):
        raise SignalParseError(f"'{path}': energy rows do not match the frequency edges")
    return TFGrid(time_edges, freq_edges, np.array(energy).reshape(-1, len(freq_edges) - 1))

"""
Signal input/output and synthetic test signals.

Formats:
  csv       one value per line, optional header line;
  wav       mono PCM (8/16/24/32-bit integer) or float, scaled to [-1, 1];
  grid_csv  rectangular comma-separated matrix, one grid row per line.

All signals are treated as periodic by the decomposition; `detrend` offers
a linear detrend for data that is not.
"""
from __future__ import annotations

import csv
import enum
import math
import os
from dataclasses import dataclass

import numpy as np
import scipy.fft
import scipy.io.wavfile
import scipy.signal

from . import log
from .abelian import SignalND
from .exceptions import ConfigError, MissingInputError, SignalParseError, SynthError


class SignalFormat(str, enum.Enum):
    CSV = "csv"
    WAV = "wav"
    GRID_CSV = "grid_csv"


class SynthKind(str, enum.Enum):
    TONE = "tone"
    TWO_TONE = "two_tone"
    CHIRP_IN_NOISE = "chirp_in_noise"


def infer_format(path):
    if str(path).lower().endswith(".wav"):
        return SignalFormat.WAV
    return SignalFormat.CSV


def _check_exists(path):
    if not os.path.exists(path):
        raise MissingInputError(f"input file '{path}' does not exist")
    if os.path.isdir(path):
        raise MissingInputError(f"input '{path}' is a directory, not a file")


def _read_rows(path):
    "Non-blank csv rows, with their 1-based line numbers."
    with open(path, newline="") as fp:
        rows = [(lineno, row) for lineno, row in enumerate(csv.reader(fp), start=1)]
    rows = [(lineno, [x.strip() for x in row]) for lineno, row in rows if any(x.strip() for x in row)]
    if not rows:
        raise SignalParseError(f"input file '{path}' is empty")
    return rows


def _parse_floats(path, lineno, row):
    try:
        return [float(x) for x in row]
    except ValueError:
        raise SignalParseError(f"'{path}', line {lineno}: could not parse '{','.join(row)}' as numbers")


def _skip_header(rows):
    lineno, row = rows[0]
    try:
        [float(x) for x in row]
    except ValueError:
        return rows[1:]
    return rows


def _load_csv(path, sample_rate):
    rows = _skip_header(_read_rows(path))
    if not rows:
        raise SignalParseError(f"input file '{path}' has a header but no values")
    values = []
    for lineno, row in rows:
        if len(row) != 1:
            raise SignalParseError(
                f"'{path}', line {lineno}: expected one value per line, found {len(row)}"
            )
        values.extend(_parse_floats(path, lineno, row))
    return SignalND.from_array(values, sample_rate)


def _load_grid_csv(path, sample_rate):
    rows = _read_rows(path)
    width = len(rows[0][1])
    grid = []
    for lineno, row in rows:
        if len(row) != width:
            raise SignalParseError(
                f"'{path}': ragged row at line {lineno} ({len(row)} values, expected {width})"
            )
        grid.append(_parse_floats(path, lineno, row))
    return SignalND.from_array(np.array(grid), sample_rate)


def _wav_to_float(data):
    if data.dtype == np.uint8:
        return (data.astype(np.float64) - 128.0) / 128.0
    if data.dtype == np.int16:
        return data.astype(np.float64) / 32768.0
    if data.dtype == np.int32:
        # 24-bit files are read left-justified into int32
        return data.astype(np.float64) / 2.0**31
    if np.issubdtype(data.dtype, np.floating):
        return data.astype(np.float64)
    raise SignalParseError(f"unsupported WAV sample type {data.dtype}")


def _load_wav(path, sample_rate):
    try:
        rate, data = scipy.io.wavfile.read(path)
    except (ValueError, EOFError) as exc:
        raise SignalParseError(f"could not read WAV file '{path}': {exc}")
    if data.ndim == 2:
        if data.shape[1] != 1:
            raise SignalParseError(
                f"'{path}' has {data.shape[1]} channels; only mono is supported "
                "(mix down to mono first, e.g. by averaging the channels)"
            )
        data = data[:, 0]
    if len(data) == 0:
        raise SignalParseError(f"WAV file '{path}' has no samples")
    if sample_rate is not None and float(sample_rate) != float(rate):
        log.notify(f"note: using the WAV header rate {rate} instead of --sample-rate {sample_rate}")
    return SignalND.from_array(_wav_to_float(data), float(rate))


def load_signal(path, fmt=None, sample_rate=None):
    "Load a signal; csv rates default to 1 sample per unit time."
    fmt = SignalFormat(fmt) if fmt is not None else infer_format(path)
    _check_exists(path)
    if fmt is SignalFormat.WAV:
        return _load_wav(path, sample_rate)
    rate = 1.0 if sample_rate is None else sample_rate
    if fmt is SignalFormat.GRID_CSV:
        return _load_grid_csv(path, rate)
    return _load_csv(path, rate)


def _fmt(x):
    return repr(float(x))


def save_signal_csv(signal, path, *, header="value"):
    if signal.ndim != 1:
        raise ConfigError("save_signal_csv writes 1-D signals; use save_grid_csv")
    with open(path, "wt") as fp:
        if header:
            fp.write(header + "\n")
        for x in signal.values:
            fp.write(_fmt(x) + "\n")


def save_grid_csv(signal, path):
    values = np.atleast_2d(signal.values if isinstance(signal, SignalND) else signal)
    with open(path, "wt") as fp:
        for row in values:
            fp.write(",".join(_fmt(x) for x in row) + "\n")


def save_imfs_csv(result, path):
    "One column per IMF plus the remainder; each row sums to the input sample."
    columns = [record.values.values for record in result.imfs] + [result.remainder.values]
    names = [f"imf_{record.index}" for record in result.imfs] + ["remainder"]
    with open(path, "wt") as fp:
        fp.write(",".join(names) + "\n")
        for row in zip(*columns):
            fp.write(",".join(_fmt(x) for x in row) + "\n")


def save_wav(signal, path, *, sample_type="int16"):
    "Write a mono WAV file; int16 samples are clipped to [-1, 1)."
    if signal.ndim != 1:
        raise ConfigError("only 1-D signals can be written as WAV")
    rate = signal.rate
    if rate != int(rate):
        raise ConfigError(f"WAV files need an integer sample rate, not {rate:g}")
    if sample_type == "int16":
        data = np.clip(np.round(32768.0 * signal.values), -32768, 32767).astype(np.int16)
    elif sample_type == "float32":
        data = signal.values.astype(np.float32)
    else:
        raise ConfigError(f"unsupported WAV sample type '{sample_type}'")
    scipy.io.wavfile.write(path, int(rate), data)


def detrend(signal, kind="linear"):
    "Remove a constant or linear trend along every axis."
    if kind == "none":
        return signal
    if kind not in ("linear", "constant"):
        raise ConfigError(f"unknown detrend kind '{kind}'")
    values = signal.values
    for axis in range(signal.ndim):
        values = scipy.signal.detrend(values, axis=axis, type=kind)
    return signal.with_values(values)


#
# synthetic signals
#


@dataclass(frozen=True)
class SynthParams:
    n: int = 1024
    sample_rate: float = 1024.0
    amplitude: float = 1.0
    freq: float = 50.0
    phase: float = 0.0
    amplitude2: float = 1.0
    freq2: float = 5.0
    phase2: float = 0.0
    f0: float = 50.0
    f1: float = 200.0
    band_lo: float = 300.0
    band_hi: float = 400.0
    noise_amplitude: float = 0.1
    seed: int = 1

    def __post_init__(self):
        if self.n < 2:
            raise SynthError(f"need at least 2 samples, not {self.n}")
        if self.sample_rate <= 0:
            raise SynthError(f"sample rate must be positive, not {self.sample_rate}")
        if self.band_lo > self.band_hi:
            raise SynthError(f"noise band [{self.band_lo:g}, {self.band_hi:g}] is empty")

    @property
    def duration(self):
        return self.n / self.sample_rate

    def times(self):
        return np.arange(self.n) / self.sample_rate


def _check_freq(name, freq, params):
    nyquist = params.sample_rate / 2
    if freq < 0:
        raise SynthError(f"{name} must be nonnegative, not {freq:g}")
    if freq > nyquist:
        raise SynthError(f"{name} = {freq:g} is above the Nyquist frequency {nyquist:g}")


def chirp_phase(t, f0, f1, duration):
    "Quadratic phase 2 pi (f0 t + (f1 - f0) t^2 / 2L): frequency sweeps f0 -> f1 over L."
    return 2 * np.pi * (f0 * t + (f1 - f0) * t**2 / (2 * duration))


def chirp_instantaneous_frequency(t, f0, f1, duration):
    "Derivative of chirp_phase over 2 pi."
    return f0 + (f1 - f0) * np.asarray(t) / duration


def band_noise(params):
    "Gaussian noise restricted to [band_lo, band_hi] with unit RMS."
    rng = np.random.default_rng(params.seed)
    white = rng.standard_normal(params.n)
    spectrum = scipy.fft.rfft(white)
    freqs = scipy.fft.rfftfreq(params.n, 1.0 / params.sample_rate)
    spectrum[(freqs < params.band_lo) | (freqs > params.band_hi)] = 0
    noise = scipy.fft.irfft(spectrum, params.n)
    rms = math.sqrt(np.mean(noise**2))
    if rms == 0:
        return noise
    return noise / rms


def synth(kind, params=None):
    if params is None:
        params = SynthParams()
    kind = SynthKind(kind)
    t = params.times()

    if kind is SynthKind.TONE:
        _check_freq("freq", params.freq, params)
        values = params.amplitude * np.sin(2 * np.pi * params.freq * t + params.phase)
    elif kind is SynthKind.TWO_TONE:
        _check_freq("freq", params.freq, params)
        _check_freq("freq2", params.freq2, params)
        values = params.amplitude * np.sin(2 * np.pi * params.freq * t + params.phase)
        values = values + params.amplitude2 * np.sin(2 * np.pi * params.freq2 * t + params.phase2)
    else:
        for name in ("f0", "f1", "band_lo", "band_hi"):
            _check_freq(name, getattr(params, name), params)
        duration = params.duration
        values = params.amplitude * np.sin(chirp_phase(t, params.f0, params.f1, duration))
        envelope = 0.5 * (1 - np.cos(2 * np.pi * t / duration))
        values = values + params.noise_amplitude * envelope * band_noise(params)

    return SignalND.from_array(values, params.sample_rate)

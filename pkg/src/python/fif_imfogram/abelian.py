"""
Fourier analysis on finite abelian groups Z_N and Z_N1 x Z_N2.

Signals are real arrays indexed by group elements (row-major for 2-D) and
spectra are complex arrays indexed by the characters of the dual group.
The forward and inverse transforms are both scaled by 1/sqrt(N), so the
transform is an isometry. Transforms are computed with scipy.fft, which
handles any N (mixed radix, with Bluestein for large prime factors) and
keeps its plan cache per thread.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft

from .exceptions import ConjugateSymmetryError, GroupMismatchError, ConfigError

# relative size of the imaginary residue tolerated when going back to a real signal
IMAG_RESIDUE_TOL = 1e-12

_fft_workers = 1


def set_fft_workers(n):
    "Set the number of scipy.fft worker threads used by every transform."
    global _fft_workers
    _fft_workers = max(1, int(n))
    return _fft_workers


def get_fft_workers():
    return _fft_workers


@dataclass(frozen=True)
class GroupSpec:
    "Product of one or two cyclic groups, given by their orders."

    moduli: tuple

    def __post_init__(self):
        moduli = tuple(int(m) for m in self.moduli)
        if len(moduli) not in (1, 2):
            raise ConfigError(f"groups must have 1 or 2 cyclic factors, not {len(moduli)}")
        if any(m < 2 for m in moduli):
            raise ConfigError(f"every cyclic factor needs order >= 2; got {moduli}")
        object.__setattr__(self, "moduli", moduli)

    @property
    def ndim(self):
        return len(self.moduli)

    @property
    def order(self):
        return int(np.prod(self.moduli))

    @property
    def shape(self):
        return self.moduli


@dataclass(frozen=True, eq=False)
class SignalND:
    """
    Real samples over a finite abelian group.

    `sample_rate` holds one rate per axis (samples per unit of time or space).
    """

    group: GroupSpec
    values: np.ndarray
    sample_rate: tuple = (1.0,)

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.shape != self.group.shape:
            raise ConfigError(
                f"signal shape {values.shape} does not match group {self.group.moduli}"
            )
        if not np.all(np.isfinite(values)):
            raise ConfigError("signal values must all be finite")
        rate = self.sample_rate
        if np.isscalar(rate):
            rate = (rate,) * self.group.ndim
        rate = tuple(float(r) for r in rate)
        if len(rate) == 1:
            rate = rate * self.group.ndim
        if len(rate) != self.group.ndim or any(r <= 0 for r in rate):
            raise ConfigError(f"need one positive sample rate per axis; got {rate}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "sample_rate", rate)

    @classmethod
    def from_array(cls, values, sample_rate=1.0):
        values = np.asarray(values, dtype=np.float64)
        return cls(GroupSpec(values.shape), values, sample_rate)

    def with_values(self, values):
        "A signal on the same group with the same sampling and new values."
        return SignalND(self.group, values, self.sample_rate)

    @property
    def ndim(self):
        return self.group.ndim

    @property
    def n(self):
        return self.group.order

    @property
    def rate(self):
        "Sample rate of the first (for 1-D signals, the only) axis."
        return self.sample_rate[0]

    @property
    def duration(self):
        return self.group.moduli[0] / self.sample_rate[0]

    def times(self):
        "Sample times t_i = i/B along the first axis."
        return np.arange(self.group.moduli[0]) / self.sample_rate[0]

    def norm(self):
        return float(np.linalg.norm(self.values))


@dataclass(frozen=True, eq=False)
class Spectrum:
    "Complex values over the characters of the dual group."

    group: GroupSpec
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.complex128)
        if values.shape != self.group.shape:
            raise ConfigError(
                f"spectrum shape {values.shape} does not match group {self.group.moduli}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def norm(self):
        return float(np.linalg.norm(self.values))


def forward_transform(signal):
    "Unitary DFT of a signal, one transform per axis."
    values = scipy.fft.fftn(signal.values, norm="ortho", workers=_fft_workers)
    return Spectrum(signal.group, values)


def inverse_transform(spectrum, sample_rate=1.0):
    """
    Unitary inverse DFT back to a real signal.

    Raises ConjugateSymmetryError if the result has an imaginary part
    larger than IMAG_RESIDUE_TOL relative to the spectrum norm.
    """
    values = scipy.fft.ifftn(spectrum.values, norm="ortho", workers=_fft_workers)
    residue = np.linalg.norm(values.imag)
    scale = np.linalg.norm(spectrum.values)
    if residue > IMAG_RESIDUE_TOL * scale + np.finfo(float).tiny:
        raise ConjugateSymmetryError(
            f"spectrum is not conjugate-symmetric (imaginary residue {residue:.3g}, norm {scale:.3g})"
        )
    return SignalND(spectrum.group, values.real, sample_rate)


def check_same_group(u, v):
    if u.group != v.group:
        raise GroupMismatchError(
            f"signals live on different groups: {u.group.moduli} vs {v.group.moduli}"
        )


def convolve(u, v):
    """
    Circular convolution over the group: result(g) = sum_h u(g-h) v(h).

    The result carries the sampling metadata of `u`.
    """
    check_same_group(u, v)
    axes = tuple(range(u.ndim))
    shape = u.group.shape
    product = scipy.fft.rfftn(u.values, workers=_fft_workers) * scipy.fft.rfftn(
        v.values, workers=_fft_workers
    )
    values = scipy.fft.irfftn(product, s=shape, axes=axes, workers=_fft_workers)
    return u.with_values(values)


def circular_shift(signal, shift):
    "Translate a signal by a group element (an int, or one int per axis)."
    if np.isscalar(shift):
        shift = (shift,) * signal.ndim
    values = np.roll(signal.values, tuple(shift), axis=tuple(range(signal.ndim)))
    return signal.with_values(values)

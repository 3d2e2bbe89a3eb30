"""
Fast iterative filtering on the torus Z_N1 x Z_N2.

Filters are isotropic: the 1-D prototype is evaluated at the radius of
each tap. The outer loop is the one from `fif.run_decomposition`; only
the filter construction and the extrema statistics change. Grids are
treated as periodic in both axes, so non-periodic data should be
detrended or padded before decomposing.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.signal

from . import log
from .abelian import GroupSpec, SignalND
from .exceptions import ConfigError, FilterError, TooFewExtremaError
from .fif import DecompositionConfig, run_decomposition
from .filters import (
    DEFAULT_NU,
    MIN_FILTER_LENGTH,
    circular_gaps,
    extrema_indices,
    first_zero_index,
    median_gap,
    transfer_function,
)


@dataclass(frozen=True, eq=False)
class Filter2D:
    taps: np.ndarray
    length_ell: float
    group: GroupSpec

    def __post_init__(self):
        taps = np.array(self.taps, dtype=np.float64)
        if self.group.ndim != 2 or taps.ndim != 2:
            raise FilterError("Filter2D needs 2-D taps on a 2-D group")
        if any(extent % 2 != 1 for extent in taps.shape):
            raise FilterError(f"filter extents must be odd, not {taps.shape}")
        for extent, modulus in zip(taps.shape, self.group.moduli):
            if extent > modulus:
                raise FilterError(
                    f"filter extent {extent} exceeds the grid axis of length {modulus}"
                )
        if np.any(taps < 0):
            raise FilterError("filter taps must be nonnegative")
        if not (np.array_equal(taps, taps[::-1, :]) and np.array_equal(taps, taps[:, ::-1])):
            raise FilterError("filter taps must be even in each index")
        if abs(taps.sum() - 1.0) > 1e-9:
            raise FilterError(f"filter taps must sum to 1, not {taps.sum():.12g}")
        taps.setflags(write=False)
        object.__setattr__(self, "taps", taps)

    @property
    def half_widths(self):
        return tuple(extent // 2 for extent in self.taps.shape)

    @property
    def support(self):
        return max(self.taps.shape)

    def wrapped(self):
        out = np.zeros(self.group.shape)
        (h0, h1), (n0, n1) = self.half_widths, self.group.moduli
        rows = np.arange(-h0, h0 + 1) % n0
        cols = np.arange(-h1, h1 + 1) % n1
        out[np.ix_(rows, cols)] = self.taps
        return out

    def as_signal(self, sample_rate=1.0):
        return SignalND(self.group, self.wrapped(), sample_rate)


def _radial_taps(proto, ell):
    half = int(np.floor(ell / 2))
    k = np.arange(-half, half + 1)
    radius = np.hypot(k[:, None], k[None, :])
    return proto(radius / ell)


def make_radial_filter(proto, ell, group, *, self_convolve=False):
    """
    Isotropic filter with taps proportional to w0(r/ell), r = sqrt(i^2 + j^2).

    With self_convolve=True the taps are instead the self-convolution of the
    radial filter of length ell/2: same support, but a spectrum in [0, 1].
    """
    ell = float(ell)
    if group.ndim != 2:
        raise FilterError("make_radial_filter needs a 2-D group")
    if ell <= 0:
        raise FilterError(f"filter length must be positive, not {ell:g}")

    if self_convolve:
        inner = _radial_taps(proto, ell / 2)
        taps = scipy.signal.convolve2d(inner, inner)
        taps = 0.5 * (taps + taps[::-1, :])
        taps = 0.5 * (taps + taps[:, ::-1])
    else:
        taps = _radial_taps(proto, ell)

    for modulus in group.moduli:
        if taps.shape[0] > modulus:
            raise FilterError(
                f"filter of length {ell:g} spans {taps.shape[0]} samples; the grid axis has {modulus}"
            )
    total = taps.sum()
    if total <= 0:
        raise FilterError(f"prototype has no mass on the taps of a length-{ell:g} filter")
    return Filter2D(taps / total, ell, group)


def _line_gaps(grid):
    values = grid.values
    for lines in (values, values.T):
        for line in lines:
            idx = extrema_indices(line)
            if len(idx) >= 2:
                yield circular_gaps(idx, len(line))


def count_extrema_2d(grid):
    "Extrema pooled over every row and every column."
    return sum(len(extrema_indices(line)) for line in grid.values) + sum(
        len(extrema_indices(line)) for line in grid.values.T
    )


def estimate_filter_length_2d(grid, nu=DEFAULT_NU):
    "nu times the median of the extrema gaps pooled from all rows and columns."
    if grid.ndim != 2:
        raise ConfigError("estimate_filter_length_2d needs a 2-D signal")
    gaps = list(_line_gaps(grid))
    if not gaps:
        raise TooFewExtremaError("no row or column of the grid has 2 local extrema")
    return max(MIN_FILTER_LENGTH, nu * median_gap(np.concatenate(gaps)))


class GridGeometry:
    def __init__(self, prototype, self_convolve=True):
        self.prototype = prototype
        self.self_convolve = self_convolve

    def check(self, signal):
        if signal.ndim != 2:
            raise ConfigError("decompose_2d needs a 2-D signal")

    def count_extrema(self, signal):
        return count_extrema_2d(signal)

    def estimate(self, signal, nu):
        return estimate_filter_length_2d(signal, nu)

    def fits(self, ell, group):
        return 2 * int(np.floor(ell / 2)) + 1 <= min(group.moduli)

    def build(self, ell, group):
        return make_radial_filter(self.prototype, ell, group, self_convolve=self.self_convolve)

    def zero_freq(self, filt, signal):
        # first zero along the first axis
        line = transfer_function(filt)[:, 0]
        k = first_zero_index(line)
        if k is None:
            log.debug(f"no spectral zero for 2-D length {filt.length_ell:.4g}; using Nyquist")
            return signal.sample_rate[0] / 2
        return k * signal.sample_rate[0] / signal.group.moduli[0]


def decompose_2d(grid, config=None, *, self_convolve=True):
    """
    Split a grid into 2-D IMFs plus a remainder; the pieces sum back to the grid.

    Filters are self-convolved radial filters unless self_convolve=False. The
    plain radial cone has negative spectral lobes, where (1 - F w)^p grows
    with p instead of damping.
    """
    if config is None:
        config = DecompositionConfig()
    return run_decomposition(grid, config, GridGeometry(config.prototype, self_convolve))

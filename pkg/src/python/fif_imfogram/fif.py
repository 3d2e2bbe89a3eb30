"""
Fast iterative filtering on Z_N.

The moving average C_w s = w * s, the fluctuation V_w s = s - C_w s and the
IMF operator I_{w,p} = V_w^p are all diagonal in the Fourier basis:

    I_{w,p} s = F^-1 ( (1 - F w)^p . F s )

so each IMF costs one forward transform, one entrywise powering pass and
one inverse transform, whatever p is. `decompose` repeatedly picks a
filter from the extrema of the current remainder, picks p from the
threshold delta, and peels the IMF off the remainder.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import log
from .abelian import (
    Spectrum,
    convolve,
    forward_transform,
    inverse_transform,
)
from .exceptions import (
    ConfigError,
    GroupMismatchError,
    NoSpectralZeroError,
    TooFewExtremaError,
    ZeroSignalError,
)
from .filters import (
    DEFAULT_NU,
    TAU_ZERO,
    FilterPrototype,
    dilate_and_sample,
    estimate_filter_length,
    filter_spectrum_info,
    find_local_extrema,
    make_prototype,
    transfer_function,
)

DEFAULT_DELTA = 1e-3
DEFAULT_GROWTH_FACTOR = 1.1
DEFAULT_MAX_IMFS = 64

# filter spectra below -NEGATIVE_SPECTRUM_TOL get a warning
NEGATIVE_SPECTRUM_TOL = 1e-8


def default_max_inner_power(delta):
    "Smallest p for which 1/(e p) <= delta; select_power never needs more."
    return int(math.ceil(1.0 / (math.e * delta)))


@dataclass(frozen=True)
class DecompositionConfig:
    delta: float = DEFAULT_DELTA
    nu: float = DEFAULT_NU
    max_imfs: int = DEFAULT_MAX_IMFS
    max_inner_power: int = None
    growth_factor: float = DEFAULT_GROWTH_FACTOR
    prototype: FilterPrototype = field(default_factory=make_prototype)

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise ConfigError(f"delta must be in (0, 1), not {self.delta}")
        if self.nu <= 0:
            raise ConfigError(f"nu must be positive, not {self.nu}")
        if self.max_imfs < 1:
            raise ConfigError(f"max_imfs must be positive, not {self.max_imfs}")
        if self.growth_factor <= 1:
            raise ConfigError(f"growth factor must be > 1, not {self.growth_factor}")
        if self.max_inner_power is None:
            object.__setattr__(self, "max_inner_power", default_max_inner_power(self.delta))
        elif self.max_inner_power < 1:
            raise ConfigError(f"max_inner_power must be positive, not {self.max_inner_power}")

    def snapshot(self):
        return {
            "delta": self.delta,
            "nu": self.nu,
            "max_imfs": self.max_imfs,
            "max_inner_power": self.max_inner_power,
            "growth_factor": self.growth_factor,
            "prototype": self.prototype.kind.value,
        }


@dataclass(frozen=True)
class LoopEvent:
    kind: str  # forced_growth, insignificant, power_cap, stop
    imf_index: int
    filter_length: float
    detail: str


@dataclass(frozen=True, eq=False)
class ImfRecord:
    values: object  # SignalND
    filter_length: float
    power: int
    first_zero_freq: float
    index: int
    filter: object = None


@dataclass(frozen=True, eq=False)
class DecompositionResult:
    imfs: list
    remainder: object  # SignalND
    log: list

    def __len__(self):
        return len(self.imfs)

    def reconstruct(self):
        total = self.remainder.values.copy()
        for record in self.imfs:
            total = total + record.values.values
        return self.remainder.with_values(total)

    def filter_lengths(self):
        return [record.filter_length for record in self.imfs]

    def events(self, kind):
        return [event for event in self.log if event.kind == kind]


def _check_filter_group(signal, filt):
    if signal.group != filt.group:
        raise GroupMismatchError(
            f"filter acts on {filt.group.moduli} but the signal lives on {signal.group.moduli}"
        )


def moving_average(signal, filt):
    "C_w s: circular convolution with the filter placed on the group."
    _check_filter_group(signal, filt)
    return convolve(signal, filt.as_signal(signal.sample_rate))


def fluctuation(signal, filt):
    "V_w s = s - C_w s."
    average = moving_average(signal, filt)
    return signal.with_values(signal.values - average.values)


def imf_apply(signal, filt, p):
    "I_{w,p} s computed as F^-1 (1 - F w)^p F s."
    if p < 1:
        raise ConfigError(f"power must be >= 1, not {p}")
    _check_filter_group(signal, filt)
    spectrum = forward_transform(signal)
    multiplier = (1.0 - transfer_function(filt)) ** p
    return inverse_transform(
        Spectrum(signal.group, multiplier * spectrum.values), signal.sample_rate
    )


def _search_power(signal, filt, delta, cap):
    _check_filter_group(signal, filt)
    norm_s = signal.norm()
    if norm_s == 0:
        raise ZeroSignalError("cannot select a power for the zero signal")
    transfer = transfer_function(filt)
    damping = 1.0 - transfer
    term = transfer * forward_transform(signal).values
    target = delta * norm_s
    for p in range(1, cap + 1):
        term = term * damping
        if np.linalg.norm(term) <= target:
            return p, True
    return cap, False


def _warn_power_cap(filt, cap):
    log.warning(
        f"warning: inner power reached its cap {cap} for filter length {filt.length_ell:.4g}"
    )


def select_power(signal, filt, delta, cap):
    """
    Smallest p with ||I_{p+1} s - I_p s|| <= delta ||s||.

    The difference has spectrum (1 - F w)^p . F w . F s, so each candidate p
    costs one entrywise multiplication and a norm. Returns cap, with a
    warning, when no p <= cap meets the bound.
    """
    p, converged = _search_power(signal, filt, delta, cap)
    if not converged:
        _warn_power_cap(filt, cap)
    return p


def _warn_negative_spectrum(filt):
    lowest = transfer_function(filt).min()
    if lowest < -NEGATIVE_SPECTRUM_TOL:
        log.warning(
            f"warning: spectrum of the length-{filt.length_ell:.4g} filter dips to {lowest:.3g}; "
            "(1 - F w)^p amplifies those frequencies instead of damping them"
        )


def projection_limit_oracle(filt, signal):
    """
    The p -> infinity limit of I_{w,p}: orthogonal projection onto the
    frequencies where F w vanishes.
    """
    _check_filter_group(signal, filt)
    mask = np.abs(transfer_function(filt)) <= TAU_ZERO
    spectrum = forward_transform(signal)
    return inverse_transform(
        Spectrum(signal.group, mask * spectrum.values), signal.sample_rate
    )


def imf_multipliers(result):
    """
    Spectral multiplier of each IMF as a linear map of the input, for the
    filters and powers the decomposition picked:

        (1 - F w_n)^p_n . prod_{k<n} (1 - (1 - F w_k)^p_k)
    """
    multipliers = []
    carried = None
    for record in result.imfs:
        damp = (1.0 - transfer_function(record.filter)) ** record.power
        if carried is None:
            carried = np.ones_like(damp)
        multipliers.append(damp * carried)
        carried = carried * (1.0 - damp)
    return multipliers


class LineGeometry:
    "Filter construction and extrema statistics for signals on Z_N."

    def __init__(self, prototype):
        self.prototype = prototype

    def check(self, signal):
        if signal.ndim != 1:
            raise ConfigError("decompose needs a 1-D signal; use decompose_2d for grids")

    def count_extrema(self, signal):
        return len(find_local_extrema(signal))

    def estimate(self, signal, nu):
        return estimate_filter_length(signal, nu)

    def fits(self, ell, group):
        return 2 * int(np.floor(ell / 2)) + 1 <= group.order

    def build(self, ell, group):
        return dilate_and_sample(self.prototype, ell, group)

    def zero_freq(self, filt, signal):
        try:
            return filter_spectrum_info(filt, signal.rate).first_zero_freq
        except NoSpectralZeroError:
            log.debug(f"no spectral zero for length {filt.length_ell:.4g}; using Nyquist")
            return signal.rate / 2


def run_decomposition(signal, config, geometry):
    "The outer loop shared by the 1-D and 2-D decompositions."
    geometry.check(signal)
    if signal.norm() == 0:
        raise ZeroSignalError("cannot decompose the zero signal")

    group = signal.group
    remainder = signal
    imfs = []
    events = []
    previous = None
    checked_spectrum = False

    def event(kind, ell, detail):
        events.append(LoopEvent(kind, len(imfs) + 1, ell, detail))
        log.debug(f"imf {len(imfs) + 1}: {kind}: {detail}")

    while True:
        if len(imfs) >= config.max_imfs:
            event("stop", previous, f"reached max_imfs = {config.max_imfs}")
            break

        n_extrema = geometry.count_extrema(remainder)
        if n_extrema <= 1:
            event("stop", previous, f"remainder is a trend with {n_extrema} local extrema")
            break
        try:
            ell = geometry.estimate(remainder, config.nu)
        except TooFewExtremaError as exc:
            event("stop", previous, str(exc))
            break

        if previous is not None and ell <= previous:
            grown = config.growth_factor * previous
            event(
                "forced_growth",
                grown,
                f"estimated length {ell:.6g} <= previous {previous:.6g}; using {grown:.6g}",
            )
            ell = grown

        imf = None
        while geometry.fits(ell, group):
            filt = geometry.build(ell, group)
            if not checked_spectrum:
                _warn_negative_spectrum(filt)
                checked_spectrum = True
            threshold = config.delta * remainder.norm()
            if fluctuation(remainder, filt).norm() <= threshold:
                grown = config.growth_factor * ell
                event(
                    "insignificant",
                    ell,
                    f"IMF at length {ell:.6g} is insignificant; retrying at {grown:.6g}",
                )
                ell = grown
                continue
            power, converged = _search_power(
                remainder, filt, config.delta, config.max_inner_power
            )
            if not converged:
                _warn_power_cap(filt, power)
                event("power_cap", ell, f"inner power capped at {power}")
            imf = imf_apply(remainder, filt, power)
            break

        if imf is None:
            event("stop", ell, f"filter length {ell:.6g} exceeds the signal")
            break

        imfs.append(
            ImfRecord(
                values=imf,
                filter_length=ell,
                power=power,
                first_zero_freq=geometry.zero_freq(filt, remainder),
                index=len(imfs) + 1,
                filter=filt,
            )
        )
        remainder = remainder.with_values(remainder.values - imf.values)
        previous = ell

    return DecompositionResult(imfs, remainder, events)


def decompose(signal, config=None):
    "Split a 1-D signal into IMFs plus a remainder; the pieces sum back to the signal."
    if config is None:
        config = DecompositionConfig()
    return run_decomposition(signal, config, LineGeometry(config.prototype))

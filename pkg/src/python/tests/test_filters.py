import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
import scipy.integrate

from fif_imfogram.abelian import GroupSpec, SignalND, circular_shift
from fif_imfogram.exceptions import (
    ConfigError,
    FilterError,
    MissingInputError,
    NoSpectralZeroError,
    SignalParseError,
    TooFewExtremaError,
)
from fif_imfogram.filters import (
    TAU_ZERO,
    DiscreteFilter,
    PrototypeKind,
    circular_gaps,
    dilate_and_sample,
    estimate_filter_length,
    extrema_indices,
    filter_spectrum_info,
    find_local_extrema,
    first_zero_index,
    load_prototype,
    make_prototype,
    transfer_function,
)


def triangle_table(n=101, scale=1.0):
    x = np.linspace(-0.5, 0.5, n)
    return np.column_stack([x, scale * 4.0 * np.maximum(0.0, 0.5 - np.abs(x))])


def test_triangle_prototype():
    proto = make_prototype()
    assert proto.kind is PrototypeKind.TRIANGLE
    assert proto(0.0) == pytest.approx(2.0)
    assert proto(0.5) == 0.0
    assert proto(-0.7) == 0.0
    assert scipy.integrate.trapezoid(proto.samples, proto.x) == pytest.approx(1.0, abs=1e-12)


def test_triangle_prototype_even():
    proto = make_prototype()
    x = np.linspace(0, 0.5, 37)
    assert np.allclose(proto(x), proto(-x), atol=1e-12)


def test_tabulated_prototype():
    proto = make_prototype("tabulated", triangle_table())
    assert proto.kind is PrototypeKind.TABULATED
    assert proto(0.0) == pytest.approx(2.0)


def test_tabulated_prototype_needs_table():
    with pytest.raises(ConfigError):
        make_prototype("tabulated")


def test_tabulated_prototype_not_even():
    table = triangle_table()
    table[10, 1] += 0.5
    with pytest.raises(FilterError, match="even"):
        make_prototype("tabulated", table)


def test_tabulated_prototype_negative():
    table = triangle_table()
    table[0, 1] = -0.1
    table[-1, 1] = -0.1
    with pytest.raises(FilterError, match="negative"):
        make_prototype("tabulated", table)


def test_tabulated_prototype_mass():
    with pytest.raises(FilterError, match="integrate to 1"):
        make_prototype("tabulated", triangle_table(scale=2.0))

    proto = make_prototype("tabulated", triangle_table(scale=2.0), normalize=True)
    assert proto(0.0) == pytest.approx(2.0)


def test_tabulated_prototype_outside_support():
    table = triangle_table()
    table[:, 0] *= 1.5
    with pytest.raises(FilterError, match=r"\[-1/2, 1/2\]"):
        make_prototype("tabulated", table)


def test_load_prototype(runtmp):
    path = runtmp.output("proto.txt")
    with open(path, "wt") as fp:
        fp.write("# x value\n\n")
        for x, y in triangle_table():
            fp.write(f"{x!r} {y!r}\n")
    proto = load_prototype(path)
    assert proto.kind is PrototypeKind.TABULATED
    assert proto(0.25) == pytest.approx(1.0)


def test_load_prototype_missing(runtmp):
    with pytest.raises(MissingInputError, match="nope.txt"):
        load_prototype(runtmp.output("nope.txt"))


def test_load_prototype_bad_line(runtmp):
    path = runtmp.output("proto.txt")
    with open(path, "wt") as fp:
        fp.write("# header\n0.0 2.0\n0.1 abc\n")
    with pytest.raises(SignalParseError, match="line 3"):
        load_prototype(path)


def test_load_prototype_wrong_columns(runtmp):
    path = runtmp.output("proto.txt")
    with open(path, "wt") as fp:
        fp.write("0.0 2.0 3.0\n")
    with pytest.raises(SignalParseError, match="expected 2 columns"):
        load_prototype(path)


def test_dilate_length_2_is_delta():
    filt = dilate_and_sample(make_prototype(), 2, GroupSpec((16,)))
    assert list(filt.taps) == [0.0, 1.0, 0.0]


def test_dilate_length_4():
    filt = dilate_and_sample(make_prototype(), 4, GroupSpec((16,)))
    assert filt.support == 5
    assert np.allclose(filt.taps, [0.0, 0.25, 0.5, 0.25, 0.0], atol=1e-12)


@pytest.mark.parametrize("ell", [2.0, 3.3, 4.0, 7.5, 16.0, 31.9])
def test_dilate_taps_are_filters(ell):
    filt = dilate_and_sample(make_prototype(), ell, GroupSpec((64,)))
    assert filt.support == 2 * int(np.floor(ell / 2)) + 1
    assert np.array_equal(filt.taps, filt.taps[::-1])
    assert np.all(filt.taps >= 0)
    assert filt.taps.sum() == pytest.approx(1.0, abs=1e-12)


def test_dilate_too_long():
    with pytest.raises(FilterError, match="taps"):
        dilate_and_sample(make_prototype(), 10, GroupSpec((8,)))


def test_dilate_too_short():
    with pytest.raises(FilterError):
        dilate_and_sample(make_prototype(), 1.5, GroupSpec((8,)))


def test_dilate_needs_1d_group():
    with pytest.raises(FilterError):
        dilate_and_sample(make_prototype(), 4, GroupSpec((8, 8)))


@pytest.mark.parametrize(
    "taps",
    [
        [0.5, 0.5],  # even count
        [0.25, -0.5, 1.25],  # negative
        [0.2, 0.5, 0.3],  # not even
        [0.25, 0.25, 0.25],  # sum
    ],
)
def test_discrete_filter_rejects(taps):
    with pytest.raises(FilterError):
        DiscreteFilter(taps, 4.0, GroupSpec((8,)))


def test_discrete_filter_too_many_taps():
    with pytest.raises(FilterError, match="taps"):
        DiscreteFilter(np.full(9, 1 / 9), 9.0, GroupSpec((8,)))


def test_wrapped_places_taps_around_zero():
    filt = DiscreteFilter([0.25, 0.5, 0.25], 4.0, GroupSpec((6,)))
    assert list(filt.wrapped()) == [0.5, 0.25, 0.0, 0.0, 0.0, 0.25]


def test_transfer_function_length_4():
    n = 64
    filt = dilate_and_sample(make_prototype(), 4, GroupSpec((n,)))
    k = np.arange(n)
    expected = 0.5 + 0.5 * np.cos(2 * np.pi * k / n)
    assert np.allclose(transfer_function(filt), expected, atol=1e-14)


def test_spectrum_info_length_4():
    filt = dilate_and_sample(make_prototype(), 4, GroupSpec((64,)))
    info = filter_spectrum_info(filt, sample_rate=64.0)
    assert info.first_zero_index == 32
    assert info.first_zero_freq == 32.0
    assert info.spectrum[0] == pytest.approx(1.0)


def test_spectrum_info_delta_has_no_zero():
    filt = dilate_and_sample(make_prototype(), 2, GroupSpec((32,)))
    with pytest.raises(NoSpectralZeroError) as exc:
        filter_spectrum_info(filt)
    assert np.allclose(exc.value.spectrum, 1.0)


@pytest.mark.parametrize("ell", [6.0, 12.0, 20.0, 40.0])
def test_spectrum_first_zero_between_frequencies(ell):
    # even lengths give Fejer kernels of width ell/2: double zeros at 2n/ell
    n = 256
    filt = dilate_and_sample(make_prototype(), ell, GroupSpec((n,)))
    info = filter_spectrum_info(filt, sample_rate=n)
    spectrum = info.spectrum
    k = info.first_zero_index
    assert abs(k - 2 * n / ell) <= 1
    assert np.all(np.diff(spectrum[: k + 1]) < 0)
    assert np.all(spectrum[1:k] > TAU_ZERO)


def test_spectrum_exact_zero():
    # width-4 Fejer kernel on n = 64: zero exactly at k = 64/4
    filt = dilate_and_sample(make_prototype(), 8, GroupSpec((64,)))
    info = filter_spectrum_info(filt)
    assert info.first_zero_index == 16
    assert info.spectrum[16] <= TAU_ZERO


def test_first_zero_non_increasing_in_length():
    group = GroupSpec((256,))
    ks = [
        filter_spectrum_info(dilate_and_sample(make_prototype(), ell, group)).first_zero_index
        for ell in [4, 8, 12, 16, 24, 32, 48, 64]
    ]
    assert ks == sorted(ks, reverse=True)
    assert len(set(ks)) == len(ks)


def test_tap_count_non_decreasing_in_length():
    group = GroupSpec((256,))
    counts = [
        dilate_and_sample(make_prototype(), ell, group).support
        for ell in np.linspace(2.0, 100.0, 400)
    ]
    assert all(b >= a for a, b in zip(counts, counts[1:]))
    assert counts[0] == 3
    assert counts[-1] == 101


def test_first_zero_index_sign_change():
    line = np.array([1.0, 0.6, 0.2, -0.1, 0.2, 0.6])
    assert first_zero_index(line) == 3


def test_first_zero_index_none():
    assert first_zero_index(np.ones(8)) is None


@settings(max_examples=60, deadline=None)
@given(st.floats(min_value=2.0, max_value=100.0))
def test_sampled_triangle_spectrum_in_unit_interval(ell):
    filt = dilate_and_sample(make_prototype(), ell, GroupSpec((128,)))
    spectrum = transfer_function(filt)
    assert spectrum.min() >= -1e-12
    assert spectrum.max() <= 1 + 1e-12


def test_self_convolve():
    group = GroupSpec((32,))
    filt = dilate_and_sample(make_prototype(), 4, group)
    twice = filt.self_convolve(2)
    assert twice.support == 9
    assert twice.length_ell == 8.0
    assert np.allclose(transfer_function(twice), transfer_function(filt) ** 2, atol=1e-14)


def test_self_convolve_does_not_fit():
    filt = dilate_and_sample(make_prototype(), 4, GroupSpec((5,)))
    with pytest.raises(FilterError, match="self-convolution"):
        filt.self_convolve(2)


def test_self_convolve_power_must_be_positive():
    filt = dilate_and_sample(make_prototype(), 4, GroupSpec((16,)))
    with pytest.raises(ConfigError):
        filt.self_convolve(0)


def test_extrema_of_sine():
    n = 60
    s = SignalND.from_array(np.sin(2 * np.pi * 3 * np.arange(n) / n))
    assert find_local_extrema(s) == [5, 15, 25, 35, 45, 55]


def test_extrema_plateau_midpoint():
    assert list(extrema_indices([0, 0, 1, 1, 1, 0, 0, 0])) == [3, 7]


def test_extrema_even_plateau_lower_middle():
    assert list(extrema_indices([0, 1, 1, 0])) == [1, 3]


def test_extrema_constant_and_monotone():
    assert len(extrema_indices(np.full(10, 2.0))) == 0
    # a circular ramp has one max and one min, at the wrap
    assert list(extrema_indices(np.arange(10.0))) == [0, 9]


def test_circular_gaps_include_wrap():
    assert list(circular_gaps([3, 7], 8)) == [4, 4]
    assert list(circular_gaps([1, 2, 6], 10)) == [1, 4, 5]
    assert len(circular_gaps([4], 10)) == 0


def test_estimate_filter_length():
    n = 60
    s = SignalND.from_array(np.sin(2 * np.pi * 3 * np.arange(n) / n))
    assert estimate_filter_length(s) == pytest.approx(16.0)
    assert estimate_filter_length(s, nu=2.0) == pytest.approx(20.0)


def test_estimate_filter_length_floor():
    s = SignalND.from_array(np.tile([1.0, -1.0], 8))
    assert estimate_filter_length(s) == 2.0


def test_estimate_filter_length_constant():
    with pytest.raises(TooFewExtremaError):
        estimate_filter_length(SignalND.from_array(np.ones(12)))


@settings(max_examples=100, deadline=None)
@given(
    st.integers(min_value=16, max_value=300),
    st.integers(min_value=0, max_value=2**32 - 1),
    st.integers(min_value=-1000, max_value=1000),
    st.sampled_from([0.25, 8.0, 1024.0, -2.0]),
)
def test_estimate_filter_length_shift_and_scale(n, seed, shift, scale):
    values = np.random.default_rng(seed).standard_normal(n)
    ell = estimate_filter_length(SignalND.from_array(values))
    assert estimate_filter_length(circular_shift(SignalND.from_array(values), shift)) == ell
    assert estimate_filter_length(SignalND.from_array(scale * values)) == ell

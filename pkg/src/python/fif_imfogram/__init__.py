#! /usr/bin/env python
import sys
import argparse
import csv
import os
import importlib.metadata

from .log import notify, error
from .exceptions import ConfigError, FifError
from .abelian import set_fft_workers
from .filters import make_prototype, load_prototype
from .fif import DecompositionConfig, decompose
from .fif2d import decompose_2d
from .imfogram import ImfogramConfig, imfogram, spectrogram, save_tfgrid
from .signals import (
    SignalFormat,
    SynthKind,
    SynthParams,
    detrend,
    load_signal,
    save_grid_csv,
    save_imfs_csv,
    save_signal_csv,
    save_wav,
    synth,
)
from .manifest import RunManifest, output_lock
from . import prettyprint

try:
    __version__ = importlib.metadata.version("fif_imfogram")
except importlib.metadata.PackageNotFoundError:
    __version__ = "0.0.0+unknown"


def print_version():
    notify(f"=> fif_imfogram {__version__}\n")


def get_max_cores():
    try:
        if "SLURM_CPUS_ON_NODE" in os.environ:
            return int(os.environ["SLURM_CPUS_ON_NODE"])
        elif "SLURM_JOB_CPUS_PER_NODE" in os.environ:
            cpus_per_node_str = os.environ["SLURM_JOB_CPUS_PER_NODE"]
            return int(cpus_per_node_str.split("x")[0])
        else:
            return os.cpu_count()
    except Exception:
        return os.cpu_count()


def set_thread_pool(user_cores):
    avail_threads = get_max_cores() or 1
    num_threads = min(avail_threads, user_cores) if user_cores else avail_threads
    if user_cores and user_cores > avail_threads:
        notify(
            f"warning: only {avail_threads} threads available, using {avail_threads}"
        )
    return set_fft_workers(num_threads)


def parse_prototype(value):
    "'triangle', or 'file:<path>' for a tabulated prototype."
    if value == "triangle":
        return make_prototype()
    if value.startswith("file:"):
        return load_prototype(value[len("file:") :])
    raise ConfigError(f"unknown prototype '{value}'; use 'triangle' or 'file:<path>'")


def run_config(args):
    "Every effective flag value, for the manifest."
    skip = ("plugin", "output_dir", "command")
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


#
# shared argument groups
#


def add_input_args(p, *, grid=False):
    p.add_argument("input", help="grid CSV to decompose" if grid else "signal file (csv or wav)")
    if not grid:
        p.add_argument(
            "--format",
            default=None,
            choices=[SignalFormat.CSV.value, SignalFormat.WAV.value],
            help="input format (default: from the file extension)",
        )
    p.add_argument(
        "--sample-rate",
        default=None,
        type=float,
        help="samples per unit time for csv input (default: 1; wav uses its header)",
    )
    p.add_argument(
        "--detrend",
        default="none",
        choices=["none", "linear"],
        help="remove a linear trend before processing; signals are otherwise treated as periodic",
    )


def add_decomposition_args(p):
    p.add_argument(
        "--delta",
        default=1e-3,
        type=float,
        help="relative stopping threshold for the inner power (default: 1e-3)",
    )
    p.add_argument(
        "--nu",
        default=1.6,
        type=float,
        help="filter length as a multiple of the median extrema gap (default: 1.6)",
    )
    p.add_argument(
        "--max-imfs", default=64, type=int, help="maximum number of IMFs (default: 64)"
    )
    p.add_argument(
        "--growth-factor",
        default=1.1,
        type=float,
        help="filter length growth when lengths stall (default: 1.1)",
    )
    p.add_argument(
        "--max-inner-power",
        default=None,
        type=int,
        help="cap on the inner power (default: ceil(1/(e*delta)))",
    )
    p.add_argument(
        "--prototype",
        default="triangle",
        help="filter prototype: 'triangle' or 'file:<path>' (default: triangle)",
    )


def add_imfogram_args(p):
    p.add_argument(
        "--eta",
        default=10.0,
        type=float,
        help="local window half width, in filter lengths (default: 10)",
    )
    p.add_argument(
        "--time-bin",
        default=None,
        type=float,
        help="time bin length in seconds (default: first filter length)",
    )
    p.add_argument(
        "--freq-bins", default=64, type=int, help="number of frequency bins (default: 64)"
    )
    p.add_argument(
        "--freq-max",
        default=None,
        type=float,
        help="top of the frequency axis (default: Nyquist)",
    )
    p.add_argument(
        "--min-imf-energy",
        default=0.0,
        type=float,
        help="skip IMFs holding less than this fraction of the energy (default: 0)",
    )


def add_spectrogram_args(p):
    p.add_argument(
        "--window-len", default=256, type=int, help="spectrogram window length (default: 256)"
    )
    p.add_argument("--hop", default=16, type=int, help="spectrogram hop (default: 16)")


def add_run_args(p, *, pretty=False):
    p.add_argument("-o", "--output-dir", required=True, help="directory for all outputs")
    p.add_argument(
        "-c",
        "--cores",
        default=0,
        type=int,
        help="number of cores to use (default is all available)",
    )
    p.add_argument(
        "--plot",
        action=argparse.BooleanOptionalAction,
        default=False,
        help="also write PNG plots (default: off)",
    )
    if pretty:
        p.add_argument(
            "-P",
            "--pretty-print",
            action="store_true",
            default=True,
            help="display the IMF table after decomposing (default: True)",
        )
        p.add_argument(
            "-N",
            "--no-pretty-print",
            action="store_false",
            dest="pretty_print",
            help="do not display the IMF table",
        )


def decomposition_config(args):
    return DecompositionConfig(
        delta=args.delta,
        nu=args.nu,
        max_imfs=args.max_imfs,
        max_inner_power=args.max_inner_power,
        growth_factor=args.growth_factor,
        prototype=parse_prototype(args.prototype),
    )


def imfogram_config(args):
    return ImfogramConfig(
        eta=args.eta,
        time_bin_len=args.time_bin,
        freq_bin_count=args.freq_bins,
        freq_max=args.freq_max,
        min_imf_energy_frac=args.min_imf_energy,
    )


def read_input(args, fmt=None):
    if fmt is None:
        fmt = args.format
    signal = load_signal(args.input, fmt, args.sample_rate)
    if args.detrend != "none":
        signal = detrend(signal, args.detrend)
    notify(f"loaded '{args.input}': shape {signal.group.moduli}, sample rate {signal.rate:g}")
    return signal


def _fmt(x):
    return "" if x is None else repr(float(x))


def write_decomposition(result, output_dir, manifest, *, grid=False):
    "IMF values, the per-IMF summary table and the loop events."
    if grid:
        for record in result.imfs:
            path = os.path.join(output_dir, f"imf_{record.index:03d}.csv")
            save_grid_csv(record.values, path)
            manifest.add_output(path)
        path = os.path.join(output_dir, "remainder.csv")
        save_grid_csv(result.remainder, path)
        manifest.add_output(path)
    else:
        path = os.path.join(output_dir, "imfs.csv")
        save_imfs_csv(result, path)
        manifest.add_output(path)

    info_csv = os.path.join(output_dir, "imfs.info.csv")
    with open(info_csv, "w", newline="") as fp:
        w = csv.writer(fp, lineterminator="\n")
        w.writerow(["imf", "filter_length", "power", "first_zero_freq", "energy"])
        for record in result.imfs:
            energy = float((record.values.values**2).sum())
            w.writerow(
                [
                    record.index,
                    _fmt(record.filter_length),
                    record.power,
                    _fmt(record.first_zero_freq),
                    _fmt(energy),
                ]
            )
    manifest.add_output(info_csv)

    events_csv = os.path.join(output_dir, "loop_events.csv")
    with open(events_csv, "w", newline="") as fp:
        w = csv.writer(fp, lineterminator="\n")
        w.writerow(["kind", "imf_index", "filter_length", "detail"])
        for event in result.log:
            w.writerow([event.kind, event.imf_index, _fmt(event.filter_length), event.detail])
    manifest.add_output(events_csv)
    return info_csv


def finish_run(manifest, output_dir):
    path = os.path.join(output_dir, "manifest.json")
    manifest.finish()
    manifest.save(path)
    return path


#
# commands
#


class FifCommand:
    "A subcommand: builds its arguments in __init__, runs in main(args)."

    command = None
    description = None

    def __init__(self, p):
        self.parser = p

    def main(self, args):
        pass


class Fif_Synth(FifCommand):
    command = "synth"
    description = "synthesize a test signal (tone, two_tone, chirp_in_noise)"

    def __init__(self, p):
        super().__init__(p)
        p.add_argument("kind", choices=[k.value for k in SynthKind], help="signal to synthesize")
        p.add_argument(
            "-o", "--output", required=True, help="output file; .wav writes WAV, else csv"
        )
        p.add_argument("--n", default=1024, type=int, help="number of samples (default: 1024)")
        p.add_argument(
            "--sample-rate", default=1024.0, type=float, help="sample rate (default: 1024)"
        )
        p.add_argument("--amplitude", default=1.0, type=float, help="tone/chirp amplitude")
        p.add_argument("--freq", default=50.0, type=float, help="tone frequency (default: 50)")
        p.add_argument("--phase", default=0.0, type=float, help="tone phase in radians")
        p.add_argument("--amplitude2", default=1.0, type=float, help="second tone amplitude")
        p.add_argument(
            "--freq2", default=5.0, type=float, help="second tone frequency (default: 5)"
        )
        p.add_argument("--phase2", default=0.0, type=float, help="second tone phase")
        p.add_argument("--f0", default=50.0, type=float, help="chirp start frequency")
        p.add_argument("--f1", default=200.0, type=float, help="chirp end frequency")
        p.add_argument("--band-lo", default=300.0, type=float, help="noise band low edge")
        p.add_argument("--band-hi", default=400.0, type=float, help="noise band high edge")
        p.add_argument(
            "--noise-amplitude", default=0.1, type=float, help="noise RMS at peak envelope"
        )
        p.add_argument("--seed", default=1, type=int, help="noise seed (default: 1)")
        p.add_argument(
            "--wav-type",
            default="int16",
            choices=["int16", "float32"],
            help="WAV sample type (default: int16)",
        )

    def main(self, args):
        print_version()
        params = SynthParams(
            n=args.n,
            sample_rate=args.sample_rate,
            amplitude=args.amplitude,
            freq=args.freq,
            phase=args.phase,
            amplitude2=args.amplitude2,
            freq2=args.freq2,
            phase2=args.phase2,
            f0=args.f0,
            f1=args.f1,
            band_lo=args.band_lo,
            band_hi=args.band_hi,
            noise_amplitude=args.noise_amplitude,
            seed=args.seed,
        )
        notify(f"kind: {args.kind} / n: {args.n} / sample rate: {args.sample_rate:g} / seed: {args.seed}")

        manifest = RunManifest(self.command, [], run_config(args), __version__)
        signal = synth(args.kind, params)
        if args.output.lower().endswith(".wav"):
            save_wav(signal, args.output, sample_type=args.wav_type)
        else:
            save_signal_csv(signal, args.output)
        manifest.add_output(args.output)
        manifest.finish()
        manifest.save(args.output + ".manifest.json")
        notify(f"...synth is done! signal in '{args.output}'")
        return 0


class Fif_Decompose(FifCommand):
    command = "decompose"
    description = "split a 1-D signal into IMFs with fast iterative filtering"

    def __init__(self, p):
        super().__init__(p)
        add_input_args(p)
        add_decomposition_args(p)
        add_run_args(p, pretty=True)

    def main(self, args):
        print_version()
        notify(
            f"delta: {args.delta} / nu: {args.nu} / max imfs: {args.max_imfs} / prototype: {args.prototype}"
        )
        num_threads = set_thread_pool(args.cores)
        notify(f"decomposing '{args.input}' using {num_threads} threads")

        config = decomposition_config(args)
        with output_lock(args.output_dir):
            manifest = RunManifest(
                self.command, [args.input], run_config(args), __version__, output_dir=args.output_dir
            )
            signal = read_input(args)
            result = decompose(signal, config)
            info_csv = write_decomposition(result, args.output_dir, manifest)
            if args.plot:
                from .plotting import plot_decomposition

                manifest.add_output(
                    plot_decomposition(result, os.path.join(args.output_dir, "imfs.png"))
                )
            finish_run(manifest, args.output_dir)

        notify(f"...decompose is done! {len(result)} IMFs in '{args.output_dir}'")
        if args.pretty_print:
            prettyprint.pretty_print_decomposition(info_csv)
        return 0


class Fif_Decompose2D(FifCommand):
    command = "decompose-2d"
    description = "split a grid (periodic in both axes) into 2-D IMFs"

    def __init__(self, p):
        super().__init__(p)
        add_input_args(p, grid=True)
        add_decomposition_args(p)
        p.add_argument(
            "--self-convolve",
            action=argparse.BooleanOptionalAction,
            default=True,
            help="use self-convolved radial filters, whose spectra lie in [0, 1] (default: on); "
            "--no-self-convolve uses the plain radial cone",
        )
        add_run_args(p, pretty=True)

    def main(self, args):
        print_version()
        notify(
            f"delta: {args.delta} / nu: {args.nu} / max imfs: {args.max_imfs} / self-convolve: {args.self_convolve}"
        )
        num_threads = set_thread_pool(args.cores)
        notify(f"decomposing grid '{args.input}' using {num_threads} threads")

        config = decomposition_config(args)
        with output_lock(args.output_dir):
            manifest = RunManifest(
                self.command, [args.input], run_config(args), __version__, output_dir=args.output_dir
            )
            grid = read_input(args, SignalFormat.GRID_CSV)
            result = decompose_2d(grid, config, self_convolve=args.self_convolve)
            info_csv = write_decomposition(result, args.output_dir, manifest, grid=True)
            if args.plot:
                from .plotting import plot_decomposition_2d

                manifest.add_output(
                    plot_decomposition_2d(result, os.path.join(args.output_dir, "imfs.png"))
                )
            finish_run(manifest, args.output_dir)

        notify(f"...decompose-2d is done! {len(result)} IMFs in '{args.output_dir}'")
        if args.pretty_print:
            prettyprint.pretty_print_decomposition(info_csv)
        return 0


class Fif_Imfogram(FifCommand):
    command = "imfogram"
    description = "decompose a signal and build its IMFogram"

    def __init__(self, p):
        super().__init__(p)
        add_input_args(p)
        add_decomposition_args(p)
        add_imfogram_args(p)
        p.add_argument(
            "--compare-spectrogram",
            action="store_true",
            help="also write the spectrogram of the input on its own grid",
        )
        add_spectrogram_args(p)
        add_run_args(p, pretty=True)

    def main(self, args):
        print_version()
        notify(
            f"delta: {args.delta} / nu: {args.nu} / eta: {args.eta} / freq bins: {args.freq_bins} / time bin: {args.time_bin}"
        )
        num_threads = set_thread_pool(args.cores)
        notify(f"building the IMFogram of '{args.input}' using {num_threads} threads")

        config = decomposition_config(args)
        tf_config = imfogram_config(args)
        with output_lock(args.output_dir):
            manifest = RunManifest(
                self.command, [args.input], run_config(args), __version__, output_dir=args.output_dir
            )
            signal = read_input(args)
            result = decompose(signal, config)
            info_csv = write_decomposition(result, args.output_dir, manifest)

            grid = imfogram(result, tf_config)
            grid_path = os.path.join(args.output_dir, "imfogram.tfgrid")
            save_tfgrid(grid, grid_path)
            manifest.add_output(grid_path)

            baseline = None
            if args.compare_spectrogram:
                baseline = spectrogram(signal, args.window_len, args.hop)
                path = os.path.join(args.output_dir, "spectrogram.tfgrid")
                save_tfgrid(baseline, path)
                manifest.add_output(path)

            if args.plot:
                from .plotting import plot_decomposition, plot_tfgrid

                out = args.output_dir
                manifest.add_output(plot_decomposition(result, os.path.join(out, "imfs.png")))
                manifest.add_output(
                    plot_tfgrid(grid, os.path.join(out, "imfogram.png"), title="IMFogram")
                )
                if baseline is not None:
                    manifest.add_output(
                        plot_tfgrid(
                            baseline, os.path.join(out, "spectrogram.png"), title="spectrogram"
                        )
                    )
            finish_run(manifest, args.output_dir)

        notify(
            f"...imfogram is done! {grid.n_time} x {grid.n_freq} grid from {len(result)} IMFs in '{args.output_dir}'"
        )
        if args.pretty_print:
            prettyprint.pretty_print_decomposition(info_csv)
        return 0


class Fif_Spectrogram(FifCommand):
    command = "spectrogram"
    description = "short-time Fourier spectrogram of a signal"

    def __init__(self, p):
        super().__init__(p)
        add_input_args(p)
        add_spectrogram_args(p)
        add_run_args(p)

    def main(self, args):
        print_version()
        notify(f"window length: {args.window_len} / hop: {args.hop}")
        set_thread_pool(args.cores)

        with output_lock(args.output_dir):
            manifest = RunManifest(
                self.command, [args.input], run_config(args), __version__, output_dir=args.output_dir
            )
            signal = read_input(args)
            grid = spectrogram(signal, args.window_len, args.hop)
            path = os.path.join(args.output_dir, "spectrogram.tfgrid")
            save_tfgrid(grid, path)
            manifest.add_output(path)
            if args.plot:
                from .plotting import plot_tfgrid

                manifest.add_output(
                    plot_tfgrid(
                        grid, os.path.join(args.output_dir, "spectrogram.png"), title="spectrogram"
                    )
                )
            finish_run(manifest, args.output_dir)

        notify(f"...spectrogram is done! {grid.n_time} x {grid.n_freq} grid in '{args.output_dir}'")
        return 0


COMMANDS = [Fif_Synth, Fif_Decompose, Fif_Decompose2D, Fif_Imfogram, Fif_Spectrogram]


class _ArgumentParser(argparse.ArgumentParser):
    "Usage errors exit with status 1."

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = _ArgumentParser(
        prog="fif", description="fast iterative filtering and IMFograms"
    )
    parser.add_argument("--version", action="version", version=f"fif_imfogram {__version__}")
    subparsers = parser.add_subparsers(title="commands", dest="command", metavar="command")
    for cls in COMMANDS:
        p = subparsers.add_parser(
            cls.command,
            help=cls.description,
            description=cls.description,
            usage=f"fif {cls.command} [options]",
        )
        p.set_defaults(plugin=cls(p))
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help(sys.stderr)
        return 1
    try:
        return args.plugin.main(args)
    except FifError as exc:
        error(f"error: {exc.message}")
        return exc.exit_code

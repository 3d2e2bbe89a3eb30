import os

import numpy as np
import pytest

from fif_imfogram.imfogram import load_tfgrid
from fif_imfogram.manifest import load_manifest

from . import fif_tst_utils as utils


def test_installed(runtmp):
    with pytest.raises(utils.FifCommandFailed):
        runtmp.fif("spectrogram")

    assert "usage: fif spectrogram" in runtmp.last_result.err


def test_spectrogram_tone(runtmp):
    infile = runtmp.output("tone.csv")
    runtmp.fif("synth", "tone", "-o", infile, "--n", 1024, "--sample-rate", 1024, "--freq", 96)
    outdir = runtmp.output("out")

    runtmp.fif(
        "spectrogram", infile, "-o", outdir, "--sample-rate", 1024, "--window-len", 128, "--hop", 64
    )

    grid = load_tfgrid(os.path.join(outdir, "spectrogram.tfgrid"))
    assert grid.n_time == 16
    assert grid.n_freq == 65
    assert np.all(grid.ridge() == 12)

    manifest = load_manifest(os.path.join(outdir, "manifest.json"))
    assert manifest["command"] == "spectrogram"
    assert manifest["config"]["window_len"] == 128
    assert manifest["config"]["hop"] == 64
    assert manifest["outputs"] == ["spectrogram.tfgrid"]


def test_spectrogram_wav_input(runtmp):
    infile = runtmp.output("tone.wav")
    runtmp.fif("synth", "tone", "-o", infile, "--n", 2000, "--sample-rate", 1000, "--freq", 125)
    outdir = runtmp.output("out")

    runtmp.fif("spectrogram", infile, "-o", outdir, "--window-len", 64, "--plot")

    grid = load_tfgrid(os.path.join(outdir, "spectrogram.tfgrid"))
    assert grid.freq_edges[-1] == 500.0
    assert grid.time_edges[-1] == 2.0
    # 125 Hz is bin 8 of a 64-sample window at 1000 Hz
    assert np.all(grid.ridge() == 8)
    assert os.path.exists(os.path.join(outdir, "spectrogram.png"))


def test_spectrogram_window_too_long(runtmp):
    infile = runtmp.output("short.csv")
    utils.write_values(infile, np.sin(np.arange(100)))

    with pytest.raises(utils.FifCommandFailed) as exc:
        runtmp.fif("spectrogram", infile, "-o", runtmp.output("out"))

    assert exc.value.status == 1
    assert "window length" in runtmp.last_result.err


def test_spectrogram_missing_input(runtmp):
    with pytest.raises(utils.FifCommandFailed) as exc:
        runtmp.fif("spectrogram", runtmp.output("nope.wav"), "-o", runtmp.output("out"))

    assert exc.value.status == 2
    assert "nope.wav" in runtmp.last_result.err

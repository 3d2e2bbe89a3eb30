import pytest

from fif_imfogram.signals import SynthParams, synth

from .fif_tst_utils import TempDirectory, RunnerContext


@pytest.fixture
def runtmp():
    with TempDirectory() as location:
        yield RunnerContext(location)


@pytest.fixture(params=[1, 2])
def fft_workers(request):
    from fif_imfogram.abelian import get_fft_workers, set_fft_workers

    old = get_fft_workers()
    set_fft_workers(request.param)
    yield request.param
    set_fft_workers(old)


@pytest.fixture
def two_tone():
    "50 Hz + 5 Hz, N = 1024, B = 1024."
    return synth("two_tone", SynthParams(n=1024, sample_rate=1024, freq=50, freq2=5))


@pytest.fixture
def chirp_params():
    return SynthParams(
        n=4096,
        sample_rate=1024,
        f0=50,
        f1=200,
        band_lo=300,
        band_hi=400,
        noise_amplitude=0.1,
        seed=42,
    )

"Various utilities used by fif_imfogram tests."
import sys
import os
import tempfile
import shutil
import collections
import traceback
from io import StringIO

import numpy as np

import fif_imfogram


def write_values(filename, values, header=None):
    "Write a one-column csv signal."
    with open(filename, "wt") as fp:
        if header:
            fp.write(header + "\n")
        fp.write("\n".join(repr(float(x)) for x in values))
        fp.write("\n")


def write_grid(filename, grid):
    with open(filename, "wt") as fp:
        for row in grid:
            fp.write(",".join(repr(float(x)) for x in row) + "\n")


def read_bytes(filename):
    with open(filename, "rb") as fp:
        return fp.read()


#
# direct-summation oracles
#


def dft_matrix(n):
    "Unitary DFT matrix, entry (j, k) = exp(-2 pi i jk/n)/sqrt(n)."
    k = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(k, k) / n) / np.sqrt(n)


def direct_dft(values):
    return dft_matrix(len(values)) @ values


def direct_convolve(u, v):
    "O(N^2) circular convolution: out[i] = sum_j u[i-j] v[j]."
    n = len(u)
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    return (u[idx] * v[None, :]).sum(axis=1)


def direct_convolve_2d(u, v):
    n0, n1 = u.shape
    out = np.zeros_like(u)
    for a in range(n0):
        for b in range(n1):
            out += v[a, b] * np.roll(np.roll(u, a, axis=0), b, axis=1)
    return out


def correlation(a, b):
    return float(np.corrcoef(np.ravel(a), np.ravel(b))[0, 1])


#
# in-process command runner
#


ScriptResults = collections.namedtuple("ScriptResults", ["status", "out", "err"])


def runscript(args, in_directory):
    """Run `fif args...` in-process from in_directory.

    stdout and stderr are captured; an uncaught exception is printed to the
    captured stderr and reported as status -1.
    """
    __tracebackhide__ = True
    cwd = os.getcwd()
    oldargv = sys.argv
    oldout, olderr = sys.stdout, sys.stderr
    sys.argv = ["fif"] + list(args)
    sys.stdout = StringIO()
    sys.stderr = StringIO()

    try:
        os.chdir(in_directory)
        print("running: fif", " ".join(args), "in:", in_directory, file=oldout)
        try:
            status = fif_imfogram.main(list(args))
        except SystemExit as err:
            status = 0 if err.code is None else err.code
        except Exception:
            traceback.print_exc(file=sys.stderr)
            status = -1
    finally:
        out, err = sys.stdout.getvalue(), sys.stderr.getvalue()
        sys.argv = oldargv
        sys.stdout, sys.stderr = oldout, olderr
        os.chdir(cwd)

    return ScriptResults(status, out, err)


class TempDirectory:
    def __init__(self):
        self.tempdir = tempfile.mkdtemp(prefix="fiftest_")

    def __enter__(self):
        return self.tempdir

    def __exit__(self, exc_type, exc_value, traceback):
        shutil.rmtree(self.tempdir, ignore_errors=True)
        return False


class FifCommandFailed(Exception):
    def __init__(self, msg, status=None):
        super().__init__(msg)
        self.message = msg
        self.status = status


class RunnerContext:
    """
    A temporary directory to run `fif` commands in.

    `run_fif` (alias `fif`) runs a command there and raises FifCommandFailed
    on a nonzero exit status; `last_command` and `last_result` keep the most
    recent run, and `output` builds paths inside the directory.
    """

    def __init__(self, location):
        self.location = location
        self.last_command = None
        self.last_result = None

    def run_fif(self, *args):
        args = [str(x) for x in args]
        self.last_command = " ".join(["fif"] + args)
        self.last_result = runscript(args, self.location)

        if self.last_result.status:
            raise FifCommandFailed(self.last_result.err, self.last_result.status)

        return self.last_result

    fif = run_fif

    def output(self, path):
        return os.path.join(self.location, path)

    def __str__(self):
        s = ""
        if self.last_result:
            s += "Last command run:\n{}\n".format(repr(self.last_command))
            if self.last_result.status:
                s += "\nIt failed with status {}\n".format(self.last_result.status)
            s += "\nSTDOUT:\n{}".format(self.last_result.out)
            s += "\nSTDERR:\n{}".format(self.last_result.err)
        return s

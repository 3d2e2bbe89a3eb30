"""
Run manifests and output-directory locking.

Every command writes a JSON manifest next to its outputs: the command, its
inputs, the full effective configuration, the files written and the tool
version. Only `started_at` and `duration_seconds` change between two runs
with the same inputs and flags.
"""
from __future__ import annotations

import contextlib
import datetime
import json
import os
import time
from dataclasses import asdict, dataclass, field

from .exceptions import MissingInputError, OutputLockedError, SignalParseError

LOCK_NAME = ".fif.lock"
TIMING_FIELDS = ("started_at", "duration_seconds")


@dataclass
class RunManifest:
    command: str
    inputs: list
    config: dict
    version: str
    outputs: list = field(default_factory=list)
    output_dir: str = None
    started_at: str = None
    duration_seconds: float = None

    def __post_init__(self):
        self._t0 = time.perf_counter()
        if self.started_at is None:
            self.started_at = datetime.datetime.now(datetime.timezone.utc).isoformat()

    def add_output(self, path):
        "Record an output file, relative to the output directory when there is one."
        if self.output_dir is not None:
            path = os.path.relpath(path, self.output_dir)
        if path not in self.outputs:
            self.outputs.append(path)
        return path

    def finish(self):
        self.duration_seconds = time.perf_counter() - self._t0

    def to_dict(self):
        d = asdict(self)
        d.pop("output_dir")
        return d

    def save(self, path):
        if self.duration_seconds is None:
            self.finish()
        with open(path, "wt") as fp:
            json.dump(self.to_dict(), fp, sort_keys=True, indent=2)
            fp.write("\n")


def load_manifest(path):
    if not os.path.exists(path):
        raise MissingInputError(f"manifest '{path}' does not exist")
    with open(path, "rt") as fp:
        try:
            return json.load(fp)
        except json.JSONDecodeError as exc:
            raise SignalParseError(f"manifest '{path}' is not valid JSON: {exc}")


def without_timing(manifest_dict):
    return {k: v for k, v in manifest_dict.items() if k not in TIMING_FIELDS}


@contextlib.contextmanager
def output_lock(output_dir):
    "Hold `.fif.lock` in output_dir for the duration of a run."
    os.makedirs(output_dir, exist_ok=True)
    lock_path = os.path.join(output_dir, LOCK_NAME)
    try:
        fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise OutputLockedError(
            f"output directory '{output_dir}' is in use by another run (remove '{lock_path}' if it is stale)"
        )
    try:
        os.write(fd, f"{os.getpid()}\n".encode())
        os.close(fd)
        yield lock_path
    finally:
        with contextlib.suppress(FileNotFoundError):
            os.remove(lock_path)

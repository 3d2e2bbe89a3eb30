"""
Console logging for fif_imfogram.

Messages go to whatever `sys.stderr` is at the time they are emitted, so
the in-process test runner captures them. Set FIF_LOG=debug to see the
decomposition loop events.
"""
import logging
import os
import sys

_LEVELS = {
    "debug": logging.DEBUG,
    "info": logging.INFO,
    "warning": logging.WARNING,
    "error": logging.ERROR,
}


class _CurrentStderrHandler(logging.StreamHandler):
    def __init__(self):
        logging.StreamHandler.__init__(self)

    @property
    def stream(self):
        return sys.stderr

    @stream.setter
    def stream(self, value):
        pass


def _make_logger():
    logger = logging.getLogger("fif_imfogram")
    if not logger.handlers:
        handler = _CurrentStderrHandler()
        handler.setFormatter(logging.Formatter("%(message)s"))
        logger.addHandler(handler)
        logger.propagate = False
    level = os.environ.get("FIF_LOG", "info").lower()
    logger.setLevel(_LEVELS.get(level, logging.INFO))
    return logger


_logger = _make_logger()


def set_level(level):
    _logger.setLevel(_LEVELS[level.lower()])


def notify(s, *args):
    "A simple logging function => stderr."
    _logger.info(s, *args)


def debug(s, *args):
    _logger.debug(s, *args)


def warning(s, *args):
    _logger.warning(s, *args)


def error(s, *args):
    _logger.error(s, *args)

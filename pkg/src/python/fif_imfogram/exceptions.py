"Errors raised by fif_imfogram; each class knows its command-line exit code."


class FifError(Exception):
    exit_code = 3

    def __init__(self, msg):
        Exception.__init__(self, msg)
        self.message = msg


#
# usage problems: exit code 1
#


class UsageError(FifError):
    exit_code = 1


class ConfigError(UsageError, ValueError):
    pass


class SynthError(UsageError, ValueError):
    pass


class OutputLockedError(UsageError):
    pass


#
# input problems: exit code 2
#


class InputError(FifError):
    exit_code = 2


class SignalParseError(InputError, ValueError):
    pass


class MissingInputError(InputError, FileNotFoundError):
    pass


#
# numeric problems: exit code 3
#


class NumericError(FifError, ValueError):
    exit_code = 3


class GroupMismatchError(NumericError):
    pass


class ConjugateSymmetryError(NumericError):
    pass


class FilterError(NumericError):
    pass


class NoSpectralZeroError(FilterError):
    "No spectral zero at or below Nyquist; carries the spectrum for fallbacks."

    def __init__(self, msg, spectrum=None):
        FilterError.__init__(self, msg)
        self.spectrum = spectrum


class TooFewExtremaError(NumericError):
    def __init__(self, msg, n_extrema=0):
        NumericError.__init__(self, msg)
        self.n_extrema = n_extrema


class ZeroSignalError(NumericError):
    pass


class EmptyDecompositionError(NumericError):
    pass

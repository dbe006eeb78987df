"""Exceptions raised by the tmsns package."""


class TmsnsError(Exception):
    """Base class for all package errors."""


class TruncationOverflow(TmsnsError, ArithmeticError):
    """The prefix needed for the requested tail bound exceeds the hard cap."""


class UncertifiedTail(TmsnsError, ValueError):
    """A distribution without a monotone-tail certificate was sorted or compared."""


class CutoffTooSmall(TmsnsError, ArithmeticError):
    """The Fock cutoff loses more norm than the configured bound allows."""


class IncompatibleTruncation(TmsnsError, ValueError):
    """Witness and distributions share no fully determined rows."""


class DivisionByZeroMass(TmsnsError, ZeroDivisionError):
    """Toeplitz deconvolution was asked to divide by a vanishing leading mass."""


class NoSignChange(TmsnsError, ValueError):
    """A witness family stays column-stochastic over the whole scanned range."""

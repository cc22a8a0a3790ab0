"""Exception hierarchy shared by every ergolab module."""


class ErgolabError(Exception):
    """Base class for all errors raised by ergolab."""


class InputError(ErgolabError, ValueError):
    """Malformed or out-of-range input (non-finite entries, bad lags, ...)."""


class PreconditionError(ErgolabError, ValueError):
    """An operation's mathematical hypothesis does not hold for the input.

    ``details`` carries the measured quantities that violated the hypothesis,
    e.g. the commutator norm of a matrix that was expected to be normal.
    """

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details


class CapabilityError(ErgolabError, NotImplementedError):
    """The requested (system, observable, quality) combination is unsupported."""


class ConvergenceError(ErgolabError, RuntimeError):
    """A limit proxy that was required to converge did not."""

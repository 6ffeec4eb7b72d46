"""Exception types shared across the package."""


class BacktestError(Exception):
    """Base class for errors raised by this package."""


class DomainError(BacktestError, ValueError):
    """An argument is outside its mathematical domain."""


class NoViolationsError(BacktestError):
    """The PIT series contains no VaR violations; no test can be run."""


class SampleTooSmallError(BacktestError):
    """Too few violations for the requested moment conditions."""


class InputError(BacktestError, ValueError):
    """Malformed input data (bad file contents, inconsistent lengths)."""


class NonConvergenceError(BacktestError):
    """All optimizer starts failed to converge."""

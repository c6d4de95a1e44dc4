"""Exception types shared across the solver suite."""


class ConfigError(ValueError):
    """A run configuration is missing a key, names an unknown model, or
    carries an out-of-range value. The offending key is in the message."""


class BracketError(RuntimeError):
    """Critical-mass bisection was started on a bracket whose endpoints do
    not straddle the blow-up/global transition."""


class InputError(ValueError):
    """An external input file is unreadable or contains invalid data."""


class SupportMismatchError(ValueError):
    """Relative entropy requested against a reference that vanishes where
    the density does not."""


class NumericOverflowError(OverflowError):
    """A weighted integral overflows double precision; message names the
    exponential rate and domain size responsible."""

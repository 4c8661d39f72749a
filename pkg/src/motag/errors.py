"""Exception types shared by the analytic, markov, sim and cli layers."""


class MotagError(Exception):
    """Base class for errors raised by this package."""


class PrecisionError(MotagError, ArithmeticError):
    """A log-space computation lost too much mass before renormalization."""


class ValidityError(MotagError, ValueError):
    """An approximation was evaluated outside the regime where it holds."""


class SingularGeneratorError(MotagError, ArithmeticError):
    """The balance equations of a generator have no unique solution."""


class ConfigError(MotagError, ValueError):
    """A scenario or config file failed validation."""

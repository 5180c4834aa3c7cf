"""Exception hierarchy shared by every layer of the package."""


class HomError(Exception):
    """Base class for all errors raised by hompulse."""

    grid_point = None

    # every constructor argument stays in ``args`` so instances pickle across processes
    def message(self) -> str:
        return str(self.args[0]) if self.args else ""

    def __str__(self):
        msg = self.message()
        if self.grid_point:
            coords = ", ".join(f"{k}={v!r}" for k, v in self.grid_point.items())
            msg = f"{msg} (at grid point {coords})"
        return msg


class DomainError(HomError, ValueError):
    """An argument lies outside the domain of an operation."""


class UnitarityError(DomainError):
    """Beam-splitter amplitudes violate r**2 + t**2 == 1."""

    def __init__(self, message, residual):
        super().__init__(message, residual)
        self.residual = residual


class UnsupportedConfigurationError(HomError):
    """A closed form was requested outside the setup it was derived for."""


class UnsupportedInputError(HomError):
    """An input state lies outside the photon-number sector an operation handles."""


class TruncationError(HomError):
    """An input state has components beyond its declared photon-number truncation."""

    def __init__(self, message, offending):
        super().__init__(message, offending)
        self.offending = offending


class ConvergenceError(HomError, ArithmeticError):
    """Adaptive quadrature did not meet its tolerance within the subdivision budget."""

    def __init__(self, message, estimate, error):
        super().__init__(message, estimate, error)
        self.estimate = estimate
        self.error = error


class ConfigError(HomError):
    """A scenario config failed to parse or validate.

    ``location`` names the offending key path, e.g. ``axes[1].var``.
    """

    def __init__(self, message, location=None):
        super().__init__(message, location)
        self.location = location

    def message(self) -> str:
        if self.location:
            return f"{self.location}: {self.args[0]}"
        return str(self.args[0])

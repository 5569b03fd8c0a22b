"""Exception hierarchy shared by every module of the package."""


class PrensError(Exception):
    """Base class for all package errors."""


class InvalidInput(PrensError, ValueError):
    pass


class SingularDynamics(PrensError):
    """Drift matrix has an eigenvalue with non-positive real part."""


class NotPSD(PrensError):
    pass


class NonUniqueSteadyState(PrensError):
    pass


class NumericalFailure(PrensError):
    pass


class Unsupported(PrensError):
    pass


class ConfigError(PrensError):
    """Configuration schema violation; ``location`` is a JSON pointer."""

    def __init__(self, message, location=""):
        self.location = location
        super().__init__(f"{location or '/'}: {message}")


class IoError(PrensError, OSError):
    pass

"""Exception types shared across the package."""


class ConfigError(Exception):
    """A run configuration file or CLI flag violates the schema."""


class ConvergenceError(Exception):
    """A mode expansion failed to meet its tail criterion within the cutoff cap."""

    def __init__(self, message, ell=None, p=None):
        super().__init__(message)
        self.ell = ell
        self.p = p

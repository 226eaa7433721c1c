"""Exception types shared by the library and the command line."""


class ConfigError(ValueError):
    """A run configuration is malformed or inconsistent."""


class ConvergenceError(RuntimeError):
    """A numerical procedure did not reach its requested accuracy."""

    def __init__(self, message, value=None, estimate=None):
        super().__init__(message)
        self.value = value
        self.estimate = estimate

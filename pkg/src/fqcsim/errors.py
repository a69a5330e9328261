"""Exception types shared across the package."""


class FqcsimError(Exception):
    """Base class for package errors."""


class ConfigError(FqcsimError):
    """Invalid user-facing configuration (bad value, unknown key, ...)."""


class NumericalError(FqcsimError):
    """A numerical routine failed or violated a hard invariant."""

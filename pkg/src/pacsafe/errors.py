"""Exception hierarchy.  ``exit_code`` is the CLI contract for each class."""


class PacSafeError(Exception):
    exit_code = 1


class ConfigError(PacSafeError, ValueError):
    """Invalid parameters, presets, config files or CLI arguments."""

    exit_code = 2


class SamplingError(PacSafeError):
    """A rejection sampler exceeded its attempt cap."""

    exit_code = 1


class PluginError(PacSafeError):
    """External simulator timed out, died, or sent a malformed reply."""

    exit_code = 4


class SolverError(PacSafeError):
    """The LP solver failed (infeasible model or numerical breakdown)."""

    exit_code = 5


class CertificateError(PacSafeError):
    """A certificate file is unreadable or inconsistent."""

    exit_code = 2

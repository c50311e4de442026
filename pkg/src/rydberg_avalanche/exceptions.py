"""Error hierarchy.

Every error carries a ``category`` string and an ``exit_code`` so the command
line front end can report failures in a machine-parsable way.
"""


class AvalancheError(Exception):
    category = "ERROR"
    exit_code = 1


class ConfigError(AvalancheError, ValueError):
    """Invalid or inconsistent configuration."""

    category = "CONFIG"
    exit_code = 2

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        prefix = ""
        if field:
            prefix += f"{field}: "
        if line is not None:
            prefix = f"line {line}: " + prefix
        super().__init__(prefix + message)


class IntegrationError(AvalancheError, RuntimeError):
    """The ODE integrator could not advance the state."""

    category = "INTEGRATION"
    exit_code = 3

    def __init__(self, message, time=None):
        self.time = time
        if time is not None:
            message = f"{message} (t = {time:.6e} s)"
        super().__init__(message)


class FitError(AvalancheError, RuntimeError):
    category = "FIT"
    exit_code = 4


class DomainError(AvalancheError, ValueError):
    """An argument lies outside the domain of a formula."""

    category = "DOMAIN"
    exit_code = 5

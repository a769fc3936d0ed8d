class UnphysicalStateError(ValueError):
    """A matrix or Bloch vector violates the density-matrix invariants."""


class RegimeError(ValueError):
    """Parameters fall outside the validity range of an asymptotic formula."""


class IntegrationError(RuntimeError):
    """The adaptive integrator could not meet its tolerance."""

    def __init__(self, message, worst_error=None):
        super().__init__(message)
        self.worst_error = worst_error


class BracketError(ValueError):
    """A root-finding bracket does not contain a sign change."""


class ConfigError(ValueError):
    """Scenario configuration is missing fields or has invalid values."""

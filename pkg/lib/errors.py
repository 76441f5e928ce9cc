"""
Exception types shared across the lab.

Each one subclasses a builtin, so callers can catch ValueError / RuntimeError
without importing this module.
"""


class MisuseError(ValueError):
    """A precondition of an operation was violated by the caller."""


class ParameterDomainError(ValueError):
    """Measure or probe parameters outside their validity range."""


class SingularityError(ValueError):
    """Evaluation requested at an excluded (singular) point."""


class MissingDerivativeError(ValueError):
    """A trial function or measure does not provide a required derivative order."""


class IntegrabilityError(ValueError):
    """A weighted integral diverges for the given trial."""


class InputRejected(ValueError):
    """Positivity input is not non-negative with positive mass on K."""


class ConfigError(ValueError):
    """Run or measure configuration failed strict parsing."""


class ResourceLimitError(RuntimeError):
    """A tensor grid or sweep would exceed the configured cap."""


class ConvergenceError(RuntimeError):
    """Successive refinements disagree beyond tolerance."""


class ContractViolation(AssertionError):
    """A hard contract failed during a run."""

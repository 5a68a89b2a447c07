"""Errors raised across ras_lab.

Every error carries a stable ``code`` so the command line can report it in a
machine-readable form, and a ``details`` mapping with the values that explain
the failure (offending key, final residual, missing file...).
"""
from typing import Any, Dict, Optional


class RasLabError(Exception):
    """Base error."""

    code = "ras_lab_error"
    #: Process exit status used by the command line.
    exit_code = 1

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def as_dict(self) -> Dict[str, Any]:
        """Serializable form of the error."""
        return {"error": self.code, "message": self.message, "details": self.details}


class InputDomainError(RasLabError):
    """Control or disturbance outside its admissible box."""

    code = "input_domain"


class InvalidStateError(RasLabError):
    """Non-finite or wrongly shaped state."""

    code = "invalid_state"


class GridSpecError(RasLabError):
    code = "grid_spec"
    exit_code = 2


class GridIndexError(RasLabError):
    code = "grid_index"


class NonConvergenceError(RasLabError):
    """Value iteration hit its sweep cap above tolerance."""

    code = "non_convergence"


class SamplingFailureError(RasLabError):
    code = "sampling_failure"


class TrainingFailureError(RasLabError):
    """Training diverged; ``details['snapshot']`` holds the last evaluation."""

    code = "training_failure"


class ContractViolationError(RasLabError):
    """A policy returned a control outside the actuator bounds."""

    code = "contract_violation"


class ValidationError(RasLabError):
    code = "validation"
    exit_code = 2


class ConfigError(ValidationError):
    """Malformed run configuration, located by key path and line."""

    code = "config"


class DependencyError(RasLabError):
    """A subcommand needs an artifact a previous subcommand writes."""

    code = "missing_dependency"
    exit_code = 2


class SliceError(ValidationError):
    code = "slice"


class ArtifactError(ValidationError):
    """An artifact file exists but cannot be parsed."""

    code = "artifact"

"""rumorsim error types and error code constants."""

from __future__ import annotations

from typing import Any, Optional


class RumorSimError(Exception):
    """Base exception for every failure raised by rumorsim."""

    default_code = "RUMORSIM_ERROR"

    def __init__(
        self,
        message: str = "",
        *,
        code: str = "",
        details: Optional[dict[str, Any]] = None,
    ) -> None:
        self.code = code or self.default_code
        self.message = message
        self.details = dict(details or {})
        super().__init__(f"rumorsim: {self.code} - {message}")


class ConfigurationError(RumorSimError):
    """Invalid configuration, law parameters or missing inputs."""

    default_code = "CONFIG_INVALID"

    @classmethod
    def at(cls, path: str, message: str, *, code: str = "") -> ConfigurationError:
        """Create an error tied to a dotted config path such as ``laws.F.shape``."""
        return cls(f"{path}: {message}", code=code, details={"path": path})

    @property
    def path(self) -> str:
        return str(self.details.get("path", ""))


class RangeError(RumorSimError):
    """Argument outside the admissible interval (e.g. t outside [0, horizon])."""

    default_code = "OUT_OF_RANGE"


class DomainError(RumorSimError):
    """Request outside the domain of an operation (unknown pair, empty ensemble)."""

    default_code = "DOMAIN"


class NumericalError(RumorSimError):
    """A numerical scheme failed to meet its declared tolerance."""

    default_code = "NUMERICAL"


class InsufficientDataError(RumorSimError):
    """Too few samples for a statistical procedure."""

    default_code = "INSUFFICIENT_DATA"


class DegenerateEnsembleError(RumorSimError):
    """Standard error is zero, so a z-score cannot be formed."""

    default_code = "DEGENERATE"


class InvariantViolation(RumorSimError):
    """Internal simulator invariant broken; indicates a bug, not bad input."""

    default_code = "INVARIANT"


class OutputError(RumorSimError):
    """Output directory or file could not be written."""

    default_code = "OUTPUT"


class DegenerateEnsembleWarning(UserWarning):
    """Emitted when every replication carries the same value."""


def is_rumorsim_error(err: BaseException | None) -> RumorSimError | None:
    """Check if an exception is a RumorSimError and return it, or None."""
    if isinstance(err, RumorSimError):
        return err
    return None


# Error code constants
ERR_CONFIG_INVALID = "CONFIG_INVALID"
ERR_LAW_INVALID = "LAW_INVALID"
ERR_HORIZON = "HORIZON"
ERR_OUT_OF_RANGE = "OUT_OF_RANGE"
ERR_UNKNOWN_PAIR = "UNKNOWN_PAIR"
ERR_EMPTY_ENSEMBLE = "EMPTY_ENSEMBLE"
ERR_QUADRATURE = "QUADRATURE"
ERR_PICARD = "PICARD"
ERR_INDEFINITE = "INDEFINITE"
ERR_STEP_REJECTED = "STEP_REJECTED"
ERR_INSUFFICIENT_DATA = "INSUFFICIENT_DATA"
ERR_DEGENERATE = "DEGENERATE"
ERR_EVENT_ORDER = "EVENT_ORDER"
ERR_CONSERVATION = "CONSERVATION"
ERR_MISSING_MARKS = "MISSING_MARKS"
ERR_OUTPUT = "OUTPUT"

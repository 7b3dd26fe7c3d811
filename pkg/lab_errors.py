"""Error hierarchy shared by every lab module.

All failures raised by the lab derive from :class:`LabError`, which carries a
stable machine-readable ``code``, an HTTP ``status_code`` used by the JSON
service and a free-form ``context`` dictionary. The CLI and the HTTP routes
serialize errors with :meth:`LabError.to_dict`.

Example:
    >>> from lab_errors import GridError
    >>> try:
    ...     raise GridError("cube outside domain", context={"level": -3})
    ... except GridError as err:
    ...     print(err.code, err.context)
    GRID_ERROR {'level': -3}
"""

from __future__ import annotations

from typing import Any


class LabError(Exception):
    """Raised when a lab operation fails.

    Attributes:
        message: Human-readable error description.
        code: Error code for client handling.
        status_code: HTTP status code.
        context: Additional error context.
    """

    default_code = "LAB_ERROR"

    def __init__(
        self,
        message: str,
        code: str | None = None,
        status_code: int = 400,
        context: dict[str, Any] | None = None
    ) -> None:
        """Initialize lab error.

        Args:
            message: Error message.
            code: Error code identifier; defaults to the subclass code.
            status_code: HTTP status code to return.
            context: Additional context information.
        """
        self.message = message
        self.code = code or self.default_code
        self.status_code = status_code
        self.context = context or {}
        super().__init__(self.message)

    def to_dict(self) -> dict[str, Any]:
        """Return a JSON-serializable description of the error."""
        return {
            "message": self.message,
            "code": self.code,
            "context": {key: _jsonable(value) for key, value in self.context.items()},
        }


class GridError(LabError):
    """Cube/grid geometry violations: outside domain, too fine, misaligned."""

    default_code = "GRID_ERROR"


class FunctionFamilyError(LabError):
    """Raised when a function id cannot be parsed."""

    default_code = "UNKNOWN_FUNCTION"

    def __init__(self, function_id: str, reason: str) -> None:
        super().__init__(
            message=f"cannot build function '{function_id}': {reason}",
            context={"function_id": function_id},
        )


class YoungFunctionError(LabError):
    """Invalid Young function parameters or missing symbolic asymptotics."""

    default_code = "YOUNG_FUNCTION_ERROR"


class NonFiniteSamplesError(LabError):
    """Raised when samples on a cube are NaN or infinite."""

    default_code = "NON_FINITE"


class OperatorError(LabError):
    default_code = "OPERATOR_ERROR"


class WeightError(LabError):
    default_code = "WEIGHT_ERROR"


class DecompositionError(LabError):
    default_code = "DECOMPOSITION_ERROR"


class QuadratureError(LabError):
    default_code = "QUADRATURE_ERROR"


class ParameterError(LabError):
    """Raised when experiment parameters violate their constraints.

    Attributes:
        message: Human-readable error description.
        field: Parameter that failed validation.
        value: Offending value.
    """

    default_code = "PARAMETER_ERROR"

    def __init__(self, message: str, field: str, value: Any) -> None:
        super().__init__(
            message=message,
            context={"field": field, "value": str(value)},
        )


class ConfigError(LabError):
    default_code = "CONFIG_ERROR"


def _jsonable(value: Any) -> Any:
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    if isinstance(value, dict):
        return {str(key): _jsonable(item) for key, item in value.items()}
    return str(value)

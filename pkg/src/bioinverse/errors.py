"""Exception family for bioinverse.

Every error carries the process exit code the CLI reports for it, a message and
an optional JSON-serializable payload.
"""

from typing import Any, Dict, List, Optional

from .constants import EXIT_CONFIG, EXIT_MODEL_FAILURE, EXIT_NUMERICAL


class BioinverseError(Exception):
    """Base exception for bioinverse errors."""

    def __init__(self, code: int, message: str, data: Optional[Dict[str, Any]] = None):
        self.code = code
        self.message = message
        self.data = data
        super().__init__(message)

    def to_dict(self) -> Dict[str, Any]:
        """Convert error to a JSON-ready object."""
        error: Dict[str, Any] = {
            "type": type(self).__name__,
            "code": self.code,
            "message": self.message,
        }
        if self.data is not None:
            error["data"] = self.data
        return error


# Configuration and validation
class ConfigError(BioinverseError):
    """Configuration file missing, unreadable or invalid."""

    def __init__(self, message: str, data: Optional[Dict[str, Any]] = None):
        super().__init__(EXIT_CONFIG, message, data)


class InvalidGeometry(BioinverseError):
    """A curve, ray or mesh violates its invariants."""

    def __init__(self, message: str, data: Optional[Dict[str, Any]] = None):
        super().__init__(EXIT_CONFIG, message, data)


# Forward-model evaluation
class ModelEvaluationError(BioinverseError):
    """A forward model could not produce an interface."""

    def __init__(self, message: str, data: Optional[Dict[str, Any]] = None):
        super().__init__(EXIT_MODEL_FAILURE, message, data)


class ParameterOutOfRange(ModelEvaluationError):
    """Parameters outside the range a model can evaluate."""

    def __init__(self, name: str, value: float, constraint: str):
        super().__init__(
            f"Parameter {name}={value!r} violates {constraint}",
            {"parameter": name, "value": value, "constraint": constraint},
        )
        self.code = EXIT_CONFIG


class NoIntersection(ModelEvaluationError):
    """A measurement ray misses the model interface."""

    def __init__(self, ray_index: Optional[int] = None, max_length: Optional[float] = None):
        where = "ray" if ray_index is None else f"ray {ray_index}"
        super().__init__(
            f"No intersection for {where} within +/-{max_length} mm",
            {"ray_index": ray_index, "max_length": max_length},
        )
        self.ray_index = ray_index


class DegenerateNormal(ModelEvaluationError):
    """Adjacent segments are antiparallel, the vertex normal is undefined."""

    def __init__(self, vertex: int):
        super().__init__(f"Degenerate normal at vertex {vertex}", {"vertex": vertex})
        self.vertex = vertex


class MapDegenerate(ModelEvaluationError):
    """A mapped interface collapsed a segment."""

    def __init__(self, segment: int, length: float):
        super().__init__(
            f"Segment {segment} collapsed to length {length:.3e} mm",
            {"segment": segment, "length": length},
        )


class NewtonDivergence(ModelEvaluationError):
    """A Newton iteration did not reach its tolerance."""

    def __init__(self, solver: str, iterations: int, residual: float, tolerance: float):
        super().__init__(
            f"{solver} Newton iteration did not converge in {iterations} iterations "
            f"(residual {residual:.3e}, tolerance {tolerance:.3e})",
            {
                "solver": solver,
                "iterations": iterations,
                "residual": residual,
                "tolerance": tolerance,
            },
        )


class ElementInverted(ModelEvaluationError):
    """det F <= 0 at a Gauss point."""

    def __init__(self, element: int, det_f: float):
        super().__init__(
            f"Element {element} inverted (det F = {det_f:.3e})",
            {"element": element, "det_f": det_f},
        )


class ModelFailure(BioinverseError):
    """Residual evaluation failed inside the optimizer.

    ``index`` is the perturbed parameter column, or ``None`` for the base point.
    """

    def __init__(self, index: Optional[int], cause: BaseException):
        where = "base point" if index is None else f"perturbed column {index}"
        data: Dict[str, Any] = {"index": index, "cause": str(cause)}
        if isinstance(cause, BioinverseError):
            data["cause"] = cause.to_dict()
        super().__init__(EXIT_MODEL_FAILURE, f"Model evaluation failed at {where}: {cause}", data)
        self.index = index
        self.cause = cause


# Optimizer numerics
class PerturbationUnderflow(BioinverseError):
    """Finite-difference perturbation vanished."""

    def __init__(self, index: int, delta: float):
        super().__init__(
            EXIT_NUMERICAL,
            f"Perturbation of parameter {index} underflowed ({delta!r})",
            {"index": index, "delta": delta},
        )


class SingularSystem(BioinverseError):
    """Damped normal equations are numerically singular."""

    def __init__(self, condition: float, parameters: Optional[List[int]] = None):
        detail = (
            f"parameters {parameters} do not influence the residual"
            if parameters
            else "a parameter may not be identifiable from the measurements"
        )
        super().__init__(
            EXIT_NUMERICAL,
            f"Damped normal equations are singular (condition estimate {condition:.3e}); "
            f"{detail}",
            {"condition": condition, "parameters": parameters or []},
        )
        self.condition = condition
        self.parameters = parameters or []


__all__ = [
    "BioinverseError",
    "ConfigError",
    "InvalidGeometry",
    "ModelEvaluationError",
    "ParameterOutOfRange",
    "NoIntersection",
    "DegenerateNormal",
    "MapDegenerate",
    "NewtonDivergence",
    "ElementInverted",
    "ModelFailure",
    "PerturbationUnderflow",
    "SingularSystem",
]

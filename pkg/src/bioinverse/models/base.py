"""Forward-model contract: parameters in, interface curve out."""

from abc import ABC, abstractmethod
from typing import Any, Dict, Sequence

import numpy as np
import numpy.typing as npt

from ..errors import ConfigError
from ..geometry import InterfaceCurve


class ForwardModel(ABC):
    """Maps a parameter vector to a predicted interface.

    Evaluation must be deterministic and re-entrant so Jacobian columns can be
    computed concurrently. A model that cannot produce an interface raises a
    :class:`~bioinverse.errors.ModelEvaluationError`; it never returns a
    partial curve.
    """

    @property
    @abstractmethod
    def model_id(self) -> str:
        """Identifier recorded in observation provenance."""
        pass

    @property
    @abstractmethod
    def parameter_names(self) -> tuple[str, ...]:
        pass

    @property
    def parameter_units(self) -> tuple[str, ...]:
        return ("",) * len(self.parameter_names)

    @abstractmethod
    def evaluate(self, theta: npt.ArrayLike) -> InterfaceCurve:
        """Predicted interface for parameters ``theta`` (in parameter_names order)."""
        pass

    @abstractmethod
    def reference_curve(self) -> InterfaceCurve:
        """Undeformed interface the model starts from."""
        pass

    def describe(self) -> Dict[str, Any]:
        """Provenance entry for outputs."""
        return {
            "model_id": self.model_id,
            "parameters": list(self.parameter_names),
            "units": list(self.parameter_units),
        }

    def check_theta(self, theta: npt.ArrayLike) -> npt.NDArray[np.float64]:
        values = np.asarray(theta, dtype=float).reshape(-1)
        if values.size != len(self.parameter_names):
            raise ConfigError(
                f"{self.model_id} expects {len(self.parameter_names)} parameters "
                f"{list(self.parameter_names)}, got {values.size}"
            )
        return values

    def theta_from_mapping(self, values: Dict[str, float]) -> npt.NDArray[np.float64]:
        """Parameter vector from a name -> value mapping."""
        missing = [name for name in self.parameter_names if name not in values]
        if missing:
            raise ConfigError(f"Missing values for parameters {missing}")
        return np.array([values[name] for name in self.parameter_names], dtype=float)


def check_names(model: ForwardModel, names: Sequence[str]) -> None:
    """Raise ConfigError unless ``names`` matches the model's parameters in order."""
    if tuple(names) != model.parameter_names:
        raise ConfigError(
            f"Parameter names {list(names)} do not match model {model.model_id} "
            f"parameters {list(model.parameter_names)}"
        )


__all__ = ["ForwardModel", "check_names"]

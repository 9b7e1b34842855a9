"""Reduced parameterization of another model by tying parameters together."""

import logging
from typing import Any, Dict, Mapping, Optional, Sequence

import numpy as np
import numpy.typing as npt

from ..errors import ConfigError
from ..geometry import InterfaceCurve
from .base import ForwardModel

logger = logging.getLogger(__name__)


class TiedModel(ForwardModel):
    """Expose one parameter per tie group of an underlying model.

    ``ties`` maps each reduced parameter to the full-model parameters it is copied
    into; full parameters that appear in no group take their value from ``fixed``.

    Example:
        >>> ties = {"E": ["E1", "E2", "E3"], "nu": ["nu1", "nu2", "nu3"]}
        >>> homogeneous = TiedModel(fem_model, ties)  # doctest: +SKIP
        >>> homogeneous.expand([400.0, 0.3])  # doctest: +SKIP
    """

    def __init__(
        self,
        model: ForwardModel,
        ties: Mapping[str, Sequence[str]],
        fixed: Optional[Mapping[str, float]] = None,
    ):
        self.model = model
        self.ties = {name: list(targets) for name, targets in ties.items()}
        self.fixed = dict(fixed or {})
        if not self.ties:
            raise ConfigError("At least one tie group is required")

        full = model.parameter_names
        owner: Dict[str, str] = {}
        for reduced, targets in self.ties.items():
            if not targets:
                raise ConfigError(f"Tie group {reduced} is empty")
            for target in targets:
                if target not in full:
                    raise ConfigError(
                        f"Tie target {target} is not a parameter of {model.model_id}"
                    )
                if target in owner or target in self.fixed:
                    raise ConfigError(f"Parameter {target} is tied more than once")
                owner[target] = reduced
        unknown_fixed = [name for name in self.fixed if name not in full]
        if unknown_fixed:
            raise ConfigError(f"Fixed values for unknown parameters {unknown_fixed}")
        missing = [name for name in full if name not in owner and name not in self.fixed]
        if missing:
            raise ConfigError(f"Parameters {missing} are neither tied nor fixed")

        names = list(self.ties)
        self._sources = [
            (names.index(owner[name]), None) if name in owner else (None, self.fixed[name])
            for name in full
        ]

    @property
    def model_id(self) -> str:
        return f"{self.model.model_id}[tied]"

    @property
    def parameter_names(self) -> tuple[str, ...]:
        return tuple(self.ties)

    @property
    def parameter_units(self) -> tuple[str, ...]:
        units = dict(zip(self.model.parameter_names, self.model.parameter_units))
        return tuple(units[targets[0]] for targets in self.ties.values())

    def describe(self) -> Dict[str, Any]:
        info = super().describe()
        info.update(ties=self.ties, fixed=self.fixed, model=self.model.describe())
        return info

    def expand(self, theta: npt.ArrayLike) -> npt.NDArray[np.float64]:
        """Full-model parameter vector for a reduced vector."""
        reduced = self.check_theta(theta)
        return np.array(
            [reduced[index] if index is not None else value for index, value in self._sources],
            dtype=float,
        )

    def evaluate(self, theta: npt.ArrayLike) -> InterfaceCurve:
        return self.model.evaluate(self.expand(theta))

    def reference_curve(self) -> InterfaceCurve:
        return self.model.reference_curve()


__all__ = ["TiedModel"]

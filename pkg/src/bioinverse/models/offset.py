"""Rigid vertical offset of a fixed interface.

One parameter lifts the reference interface along y. The default reference is
a straight substratum-parallel line; a measured interface can be supplied
instead. With the generating offset outside the search box the iterate runs
into the bound and the optimizer terminates without a result.
"""

from typing import Optional

import numpy as np
import numpy.typing as npt

from ..errors import InvalidGeometry
from ..geometry import InterfaceCurve
from .base import ForwardModel


class OffsetModel(ForwardModel):
    """Reference interface translated by [0, offset].

    Without ``curve`` the reference is y = 0 over [-length/2, length/2] with
    ``n_vertices`` vertices, biofilm below (right of +x).
    """

    def __init__(
        self,
        length: float = 1.0,
        n_vertices: int = 11,
        curve: Optional[InterfaceCurve] = None,
    ):
        if curve is None:
            if length <= 0.0 or n_vertices < 2:
                raise InvalidGeometry(
                    "Offset model needs a positive length and at least 2 vertices"
                )
            x = np.linspace(-0.5 * length, 0.5 * length, int(n_vertices))
            curve = InterfaceCurve(np.column_stack([x, np.zeros_like(x)]))
        self._reference = curve

    @property
    def model_id(self) -> str:
        return "offset"

    @property
    def parameter_names(self) -> tuple[str, ...]:
        return ("offset",)

    @property
    def parameter_units(self) -> tuple[str, ...]:
        return ("mm",)

    def reference_curve(self) -> InterfaceCurve:
        return self._reference

    def evaluate(self, theta: npt.ArrayLike) -> InterfaceCurve:
        (offset,) = self.check_theta(theta)
        return self._reference.translated([0.0, offset])


__all__ = ["OffsetModel"]

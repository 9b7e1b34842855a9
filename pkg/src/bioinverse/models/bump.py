"""Analytic bump surrogate.

A semicircular biofilm colony of radius R on the substratum y = 0 is deformed by
the polynomial map (X, Y) -> (X + p1 * Y^2, Y * (1 + p2 * X)). p1 shears the cap
downstream, p2 tilts it; both act on the same surface points so the two
parameters partly compensate each other.
"""

import logging
from typing import Any, Dict

import numpy as np
import numpy.typing as npt

from ..constants import BUMP_RADIUS_MM, BUMP_VERTICES, MIN_SEGMENT_LENGTH_MM
from ..errors import InvalidGeometry, MapDegenerate, ParameterOutOfRange
from ..geometry import InterfaceCurve
from .base import ForwardModel

logger = logging.getLogger(__name__)


def bump_reference_curve(
    radius: float = BUMP_RADIUS_MM, n_vertices: int = BUMP_VERTICES
) -> InterfaceCurve:
    """Semicircle from (-R, 0) over the apex to (R, 0); biofilm inside (right)."""
    if radius <= 0.0:
        raise InvalidGeometry(f"Bump radius must be positive, got {radius}")
    if n_vertices < 3:
        raise InvalidGeometry(f"Bump needs at least 3 vertices, got {n_vertices}")
    angles = np.linspace(np.pi, 0.0, n_vertices)
    vertices = radius * np.column_stack([np.cos(angles), np.sin(angles)])
    vertices[[0, -1], 1] = 0.0
    return InterfaceCurve(vertices, closed=False, biofilm_side="right")


def bump_map(vertices: npt.ArrayLike, p1: float, p2: float) -> npt.NDArray[np.float64]:
    """Apply (X, Y) -> (X + p1 Y^2, Y (1 + p2 X)) to an (n, 2) array."""
    v = np.asarray(vertices, dtype=float)
    X, Y = v[:, 0], v[:, 1]
    return np.column_stack([X + p1 * Y**2, Y * (1.0 + p2 * X)])


class BumpModel(ForwardModel):
    """Two-parameter deformation of a semicircular colony.

    Example:
        >>> model = BumpModel()
        >>> curve = model.evaluate([0.3, 0.1])
        >>> len(curve)
        181
    """

    def __init__(self, radius: float = BUMP_RADIUS_MM, n_vertices: int = BUMP_VERTICES):
        self.radius = float(radius)
        self.n_vertices = int(n_vertices)
        self._reference = bump_reference_curve(self.radius, self.n_vertices)

    @property
    def model_id(self) -> str:
        return "bump"

    @property
    def parameter_names(self) -> tuple[str, ...]:
        return ("p1", "p2")

    @property
    def parameter_units(self) -> tuple[str, ...]:
        return ("1/mm", "1/mm")

    @property
    def injectivity_limit(self) -> float:
        """Largest admissible |p1|, |p2| [1/mm]."""
        return 2.0 / self.radius

    def reference_curve(self) -> InterfaceCurve:
        return self._reference

    def describe(self) -> Dict[str, Any]:
        info = super().describe()
        info.update(radius_mm=self.radius, n_vertices=self.n_vertices)
        return info

    def evaluate(self, theta: npt.ArrayLike) -> InterfaceCurve:
        """Deformed colony interface.

        Raises:
            ParameterOutOfRange: If |p1| or |p2| exceeds 2/R
            MapDegenerate: If a mapped segment is shorter than 1e-9 mm
        """
        p1, p2 = self.check_theta(theta)
        limit = self.injectivity_limit
        for name, value in zip(self.parameter_names, (p1, p2)):
            if not abs(value) <= limit:
                raise ParameterOutOfRange(name, float(value), f"|{name}| <= 2/R = {limit:g} 1/mm")

        mapped = bump_map(self._reference.vertices, p1, p2)
        lengths = np.linalg.norm(np.diff(mapped, axis=0), axis=1)
        short = int(np.argmin(lengths))
        if lengths[short] < MIN_SEGMENT_LENGTH_MM:
            raise MapDegenerate(short, float(lengths[short]))
        logger.debug(f"Bump evaluated at p1={p1:.6g}, p2={p2:.6g}")
        return self._reference.with_vertices(mapped)


__all__ = ["bump_reference_curve", "bump_map", "BumpModel"]

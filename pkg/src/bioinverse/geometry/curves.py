"""Interface polylines and measurement rays."""

import logging
from typing import Literal, Optional, Sequence

import numpy as np
import numpy.typing as npt

from ..constants import UNIT_VECTOR_TOL
from ..errors import DegenerateNormal, InvalidGeometry

logger = logging.getLogger(__name__)

Point2 = npt.NDArray[np.float64]
"""Planar point or vector [mm], shape (2,)"""

BiofilmSide = Literal["right", "left"]
"""Side of the traversal direction on which the biofilm lies"""


class InterfaceCurve:
    """Ordered planar polyline representing a fluid-biofilm interface.

    The biofilm lies on ``biofilm_side`` of the traversal direction; the default
    is the right-hand side. Vertices are stored read-only.
    """

    def __init__(
        self,
        vertices: npt.ArrayLike,
        closed: bool = False,
        biofilm_side: BiofilmSide = "right",
    ) -> None:
        v = np.array(vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2:
            raise InvalidGeometry(f"Vertices must have shape (n, 2), got {v.shape}")
        if len(v) < 2:
            raise InvalidGeometry("An interface curve needs at least 2 vertices")
        if not np.all(np.isfinite(v)):
            raise InvalidGeometry("Interface vertices must be finite")
        if biofilm_side not in ("right", "left"):
            raise InvalidGeometry(f"Unknown biofilm side '{biofilm_side}'")
        v.setflags(write=False)
        self.vertices = v
        self.closed = closed
        self.biofilm_side: BiofilmSide = biofilm_side

        lengths = self.segment_lengths()
        if np.any(lengths <= 0.0):
            bad = int(np.argmin(lengths))
            raise InvalidGeometry(
                f"Consecutive vertices coincide at segment {bad}", {"segment": bad}
            )

    def __len__(self) -> int:
        return len(self.vertices)

    def __repr__(self) -> str:
        return (
            f"InterfaceCurve(n={len(self)}, closed={self.closed}, "
            f"biofilm_side={self.biofilm_side!r})"
        )

    @property
    def segments(self) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
        """Segment start and end points, each of shape (n_segments, 2)."""
        if self.closed:
            return self.vertices, np.roll(self.vertices, -1, axis=0)
        return self.vertices[:-1], self.vertices[1:]

    @property
    def n_segments(self) -> int:
        return len(self.vertices) if self.closed else len(self.vertices) - 1

    def segment_lengths(self) -> npt.NDArray[np.float64]:
        starts, ends = self.segments
        return np.asarray(np.linalg.norm(ends - starts, axis=1))

    def segment_normals(self, into_biofilm: bool = True) -> npt.NDArray[np.float64]:
        """Unit segment normals pointing into the biofilm (or into the fluid)."""
        starts, ends = self.segments
        e = ends - starts
        right = np.column_stack([e[:, 1], -e[:, 0]]) / np.linalg.norm(e, axis=1)[:, None]
        sign = 1.0 if (self.biofilm_side == "right") == into_biofilm else -1.0
        return np.asarray(sign * right)

    def vertex_normals(
        self, into_biofilm: bool = True, indices: Optional[Sequence[int]] = None
    ) -> npt.NDArray[np.float64]:
        """Averaged adjacent segment normals, re-normalized.

        Args:
            into_biofilm: Orient normals toward the biofilm side
            indices: Vertices to return normals for; all vertices when None

        Raises:
            DegenerateNormal: If adjacent segments at a returned vertex are antiparallel
        """
        seg_normals = self.segment_normals(into_biofilm)
        n = len(self.vertices)
        summed = np.zeros((n, 2))
        if self.closed:
            summed += seg_normals
            summed += np.roll(seg_normals, 1, axis=0)
        else:
            summed[:-1] += seg_normals
            summed[1:] += seg_normals
        selected = np.arange(n) if indices is None else np.asarray(indices, dtype=int)
        summed = summed[selected]
        norms = np.linalg.norm(summed, axis=1)
        bad = np.flatnonzero(norms < 1e-12)
        if bad.size:
            raise DegenerateNormal(int(selected[bad[0]]))
        return np.asarray(summed / norms[:, None])

    def translated(self, offset: npt.ArrayLike) -> "InterfaceCurve":
        return InterfaceCurve(
            self.vertices + np.asarray(offset, dtype=float), self.closed, self.biofilm_side
        )

    def with_vertices(self, vertices: npt.ArrayLike) -> "InterfaceCurve":
        """Same topology and orientation, new vertex positions."""
        return InterfaceCurve(vertices, self.closed, self.biofilm_side)

    def bounding_box_diagonal(self) -> float:
        extent = self.vertices.max(axis=0) - self.vertices.min(axis=0)
        return float(np.hypot(extent[0], extent[1]))


class MeasurementRay:
    """Observed interface point with a unit measurement direction.

    The direction points toward the biofilm side of the observed interface, so a
    positive distance means the model interface lies toward the biofilm interior.
    """

    def __init__(self, origin: npt.ArrayLike, direction: npt.ArrayLike, max_length: float):
        o = np.array(origin, dtype=float)
        d = np.array(direction, dtype=float)
        if o.shape != (2,) or d.shape != (2,):
            raise InvalidGeometry("Ray origin and direction must be 2-vectors")
        if not (np.all(np.isfinite(o)) and np.all(np.isfinite(d))):
            raise InvalidGeometry("Ray origin and direction must be finite")
        if abs(float(np.hypot(d[0], d[1])) - 1.0) > UNIT_VECTOR_TOL:
            raise InvalidGeometry(f"Ray direction {d.tolist()} is not a unit vector")
        if not max_length > 0.0:
            raise InvalidGeometry(f"Ray max_length must be positive, got {max_length}")
        o.setflags(write=False)
        d.setflags(write=False)
        self.origin: Point2 = o
        self.direction: Point2 = d
        self.max_length = float(max_length)

    @classmethod
    def from_direction(
        cls, origin: npt.ArrayLike, direction: npt.ArrayLike, max_length: float
    ) -> "MeasurementRay":
        """Build a ray from an unnormalized direction."""
        d = np.asarray(direction, dtype=float)
        norm = float(np.hypot(d[0], d[1]))
        if norm == 0.0:
            raise InvalidGeometry("Ray direction must be non-zero")
        return cls(origin, d / norm, max_length)

    def __repr__(self) -> str:
        return (
            f"MeasurementRay(origin={self.origin.tolist()}, "
            f"direction={self.direction.tolist()}, max_length={self.max_length})"
        )

    def reversed(self) -> "MeasurementRay":
        return MeasurementRay(self.origin, -self.direction, self.max_length)


def default_max_length(curve: InterfaceCurve) -> float:
    """Search length of rays on an observed curve: its bounding-box diagonal."""
    return curve.bounding_box_diagonal()


def normal_rays(
    curve: InterfaceCurve,
    vertex_indices: Optional[Sequence[int]] = None,
    into_biofilm: bool = True,
    max_length: Optional[float] = None,
) -> list[MeasurementRay]:
    """Rays at selected vertices along the vertex normals.

    Args:
        curve: Observed interface
        vertex_indices: Vertices to measure at; all vertices when None
        into_biofilm: Orient directions toward the biofilm side
        max_length: Search length; bounding-box diagonal of ``curve`` when None

    Returns:
        One ray per selected vertex

    Raises:
        InvalidGeometry: If an index is out of range
        DegenerateNormal: If adjacent segments at a selected vertex are antiparallel
    """
    n = len(curve)
    indices = list(range(n)) if vertex_indices is None else [int(i) for i in vertex_indices]
    out_of_range = [i for i in indices if not 0 <= i < n]
    if out_of_range:
        raise InvalidGeometry(
            f"Vertex indices out of range for {n} vertices: {out_of_range}",
            {"indices": out_of_range, "n_vertices": n},
        )
    if max_length is None:
        max_length = default_max_length(curve)

    normals = curve.vertex_normals(into_biofilm, indices)
    rays = [
        MeasurementRay(curve.vertices[i], normal, max_length)
        for i, normal in zip(indices, normals)
    ]
    logger.debug(f"Built {len(rays)} normal rays (max_length={max_length:.4g} mm)")
    return rays


__all__ = [
    "Point2",
    "BiofilmSide",
    "InterfaceCurve",
    "MeasurementRay",
    "default_max_length",
    "normal_rays",
]

"""Signed ray distances between an observed and a model interface.

Each ray is treated as a bidirectional line clipped to +/-max_length and
intersected with every segment of the model curve. The residual component of a
ray is the intersection parameter t of minimal magnitude; exact-magnitude ties
resolve toward the negative value. Collinear overlaps (ray along a segment) are
not counted as hits.
"""

import logging
from typing import Sequence

import numpy as np
import numpy.typing as npt

from ..constants import INTERSECTION_DEDUPE_MM, SEGMENT_PARAM_TOL
from ..errors import InvalidGeometry, NoIntersection
from .curves import InterfaceCurve, MeasurementRay

logger = logging.getLogger(__name__)


def _cross(a: npt.NDArray[np.float64], b: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    return np.asarray(a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0])


def _hit_parameters(
    origins: npt.NDArray[np.float64],
    directions: npt.NDArray[np.float64],
    max_lengths: npt.NDArray[np.float64],
    curve: InterfaceCurve,
) -> npt.NDArray[np.float64]:
    """Ray parameters t of every ray/segment hit, NaN where a segment is missed.

    Shapes: origins/directions (n_rays, 2), max_lengths (n_rays,);
    result (n_rays, n_segments).
    """
    starts, ends = curve.segments
    e = (ends - starts)[None, :, :]
    w = starts[None, :, :] - origins[:, None, :]
    d = directions[:, None, :]

    denom = _cross(d, e)
    parallel = np.abs(denom) <= np.finfo(float).eps * np.linalg.norm(e, axis=2)
    safe = np.where(parallel, 1.0, denom)
    t = _cross(w, e) / safe
    s = _cross(w, d) / safe

    valid = (
        ~parallel
        & (s >= -SEGMENT_PARAM_TOL)
        & (s <= 1.0 + SEGMENT_PARAM_TOL)
        & (np.abs(t) <= max_lengths[:, None])
    )
    return np.where(valid, t, np.nan)


def _ray_arrays(
    rays: Sequence[MeasurementRay],
) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    origins = np.array([ray.origin for ray in rays], dtype=float)
    directions = np.array([ray.direction for ray in rays], dtype=float)
    max_lengths = np.array([ray.max_length for ray in rays], dtype=float)
    return origins, directions, max_lengths


def _nearest(t: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    """Row-wise minimal |t|, ties toward the negative value; NaN for rows without hits."""
    abs_t = np.where(np.isnan(t), np.inf, np.abs(t))
    smallest = abs_t.min(axis=1)
    candidates = np.where(abs_t == smallest[:, None], t, np.inf)
    nearest = candidates.min(axis=1)
    return np.where(np.isinf(smallest), np.nan, nearest)


def intersect_ray_curve(ray: MeasurementRay, curve: InterfaceCurve) -> list[float]:
    """All signed ray parameters at which the ray line crosses the curve.

    Both directions are searched up to ``ray.max_length``. Hits closer than
    1e-12 mm to each other (a ray through a shared vertex) are reported once.

    Returns:
        Sorted list of t values [mm]; empty if the curve is missed
    """
    origins, directions, max_lengths = _ray_arrays([ray])
    t = _hit_parameters(origins, directions, max_lengths, curve)[0]
    hits = np.sort(t[~np.isnan(t)])
    deduped: list[float] = []
    for value in hits:
        if deduped and value - deduped[-1] <= INTERSECTION_DEDUPE_MM:
            continue
        deduped.append(float(value))
    return deduped


def signed_distance(ray: MeasurementRay, curve: InterfaceCurve) -> float:
    """Signed distance d_mp from the ray origin to the curve along the ray.

    Raises:
        NoIntersection: If the curve is not hit within +/-max_length
    """
    hits = intersect_ray_curve(ray, curve)
    if not hits:
        raise NoIntersection(max_length=ray.max_length)
    return min(hits, key=lambda t: (abs(t), t))


def measure(rays: Sequence[MeasurementRay], curve: InterfaceCurve) -> npt.NDArray[np.float64]:
    """Residual vector of signed distances, one entry per ray.

    Raises:
        InvalidGeometry: If ``rays`` is empty
        NoIntersection: For the first ray that misses the curve
    """
    if len(rays) == 0:
        raise InvalidGeometry("measure() needs at least one ray")
    origins, directions, max_lengths = _ray_arrays(rays)
    distances = _nearest(_hit_parameters(origins, directions, max_lengths, curve))
    missing = np.flatnonzero(np.isnan(distances))
    if missing.size:
        index = int(missing[0])
        logger.debug(f"Ray {index} missed the model interface")
        raise NoIntersection(index, rays[index].max_length)
    return np.asarray(distances)


__all__ = ["intersect_ray_curve", "signed_distance", "measure"]

"""Interfaces, measurement rays and signed ray distances."""

# Types
from .curves import (
    BiofilmSide,
    InterfaceCurve,
    MeasurementRay,
    Point2,
    default_max_length,
    normal_rays,
)

# Distances
from .distance import intersect_ray_curve, measure, signed_distance

# Serialization
from .io import read_curve_csv, read_rays_csv, write_curve_csv, write_rays_csv

__all__ = [
    # Types
    "BiofilmSide",
    "InterfaceCurve",
    "MeasurementRay",
    "Point2",
    # Rays
    "default_max_length",
    "normal_rays",
    # Distances
    "intersect_ray_curve",
    "signed_distance",
    "measure",
    # Serialization
    "read_curve_csv",
    "read_rays_csv",
    "write_curve_csv",
    "write_rays_csv",
]

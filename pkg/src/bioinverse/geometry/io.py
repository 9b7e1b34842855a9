"""CSV serialization of interface curves and measurement rays.

Curves are stored as ``x_mm,y_mm`` rows with a JSON sidecar holding
``{"closed": ..., "orientation": ...}``; rays as
``ox_mm,oy_mm,dx,dy,max_length_mm`` rows. Floats are written with ``repr`` so a
curve written twice produces identical bytes.
"""

import csv
import json
from pathlib import Path
from typing import Sequence

from ..errors import ConfigError
from .curves import InterfaceCurve, MeasurementRay

CURVE_HEADER = ["x_mm", "y_mm"]
RAY_HEADER = ["ox_mm", "oy_mm", "dx", "dy", "max_length_mm"]


def curve_sidecar_path(path: str | Path) -> Path:
    """Descriptor file stored next to a curve CSV."""
    return Path(path).with_suffix(".json")


def write_curve_csv(curve: InterfaceCurve, path: str | Path) -> Path:
    """Write curve vertices and the orientation sidecar; returns the CSV path."""
    csv_path = Path(path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    with open(csv_path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CURVE_HEADER)
        for x, y in curve.vertices:
            writer.writerow([repr(float(x)), repr(float(y))])
    with open(curve_sidecar_path(csv_path), "w") as f:
        json.dump({"closed": curve.closed, "orientation": curve.biofilm_side}, f, indent=2)
        f.write("\n")
    return csv_path


def read_curve_csv(path: str | Path) -> InterfaceCurve:
    """Read a curve CSV and its sidecar (defaults: open, biofilm on the right).

    Raises:
        ConfigError: If the file is missing, has the wrong header or invalid rows
    """
    csv_path = Path(path).expanduser()
    if not csv_path.exists():
        raise ConfigError(f"Curve file not found: {csv_path}")
    with open(csv_path, newline="") as f:
        rows = list(csv.reader(f))
    if not rows or rows[0] != CURVE_HEADER:
        raise ConfigError(f"Curve file {csv_path} must start with header {CURVE_HEADER}")
    vertices = []
    for line, row in enumerate(rows[1:], start=2):
        try:
            x, y = (float(v) for v in row)
        except ValueError as e:
            raise ConfigError(f"Invalid curve row {line} in {csv_path}: {e}") from e
        vertices.append([x, y])

    closed, orientation = False, "right"
    sidecar = curve_sidecar_path(csv_path)
    if sidecar.exists():
        with open(sidecar) as f:
            try:
                descriptor = json.load(f)
            except json.JSONDecodeError as e:
                raise ConfigError(f"Invalid curve descriptor {sidecar}: {e}") from e
        closed = bool(descriptor.get("closed", False))
        orientation = descriptor.get("orientation", "right")
    return InterfaceCurve(vertices, closed=closed, biofilm_side=orientation)


def write_rays_csv(rays: Sequence[MeasurementRay], path: str | Path) -> Path:
    csv_path = Path(path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    with open(csv_path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(RAY_HEADER)
        for ray in rays:
            writer.writerow(
                [
                    repr(float(ray.origin[0])),
                    repr(float(ray.origin[1])),
                    repr(float(ray.direction[0])),
                    repr(float(ray.direction[1])),
                    repr(ray.max_length),
                ]
            )
    return csv_path


def read_rays_csv(path: str | Path) -> list[MeasurementRay]:
    """Read measurement rays.

    Raises:
        ConfigError: If the file is missing, has the wrong header or invalid rows
    """
    csv_path = Path(path).expanduser()
    if not csv_path.exists():
        raise ConfigError(f"Ray file not found: {csv_path}")
    with open(csv_path, newline="") as f:
        rows = list(csv.reader(f))
    if not rows or rows[0] != RAY_HEADER:
        raise ConfigError(f"Ray file {csv_path} must start with header {RAY_HEADER}")
    rays = []
    for line, row in enumerate(rows[1:], start=2):
        try:
            ox, oy, dx, dy, length = (float(v) for v in row)
        except ValueError as e:
            raise ConfigError(f"Invalid ray row {line} in {csv_path}: {e}") from e
        rays.append(MeasurementRay([ox, oy], [dx, dy], length))
    return rays


__all__ = [
    "CURVE_HEADER",
    "RAY_HEADER",
    "curve_sidecar_path",
    "write_curve_csv",
    "read_curve_csv",
    "write_rays_csv",
    "read_rays_csv",
]

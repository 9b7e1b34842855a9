"""Surface growth driven by nutrient flux and limited by interface tractions.

Every interface point moves along its outward normal by

    u_g = dt_g * (K1g * h - K2g * |sigma_nn| - K3g * |sigma_nt|)

so the grown interface is linear in (K1g, K2g, K3g) for fixed loads.
"""

import csv
import logging
from pathlib import Path
from typing import List, Sequence

import numpy as np
import numpy.typing as npt
from pydantic import Field, field_validator

from ..base import BioinverseModel
from ..constants import (
    FINGER_HEIGHT_MM,
    FINGER_WIDTH_MM,
    GROWTH_DT_DEFAULT_S,
    LOAD_POSITION_TOL_MM,
    MIN_SEGMENT_LENGTH_MM,
    UNIT_VECTOR_TOL,
)
from ..errors import ConfigError, InvalidGeometry, MapDegenerate
from ..geometry import InterfaceCurve
from .base import ForwardModel
from .diffusion import DiffusionProfile, MonodParams, solve_flux

logger = logging.getLogger(__name__)

LOAD_HEADER = ["x_mm", "y_mm", "nx", "ny", "h", "snn", "snt"]


class GrowthParams(BioinverseModel):
    """Growth law coefficients and timespan."""

    K1g: float
    """Growth per nutrient flux [mm^3/mol]"""

    K2g: float
    """Erosion per normal traction [mm^2 s/g]"""

    K3g: float
    """Erosion per tangential traction [mm^2 s/g]"""

    dt_g: float = Field(default=GROWTH_DT_DEFAULT_S, gt=0.0)
    """Growth timespan [s]"""


class SurfaceLoadSample(BioinverseModel):
    """Loads acting at one interface point."""

    position: tuple[float, float]
    """Interface point [mm]"""

    normal: tuple[float, float]
    """Outward unit normal (into the fluid)"""

    flux_h: float = Field(ge=0.0)
    """Nutrient flux into the biofilm h^S [mol/(mm^2 s)]"""

    sigma_nn: float
    """Normal traction [g/(mm s^2)]"""

    sigma_nt: float
    """Tangential traction [g/(mm s^2)]"""

    @field_validator("normal")
    @classmethod
    def _unit_normal(cls, value: tuple[float, float]) -> tuple[float, float]:
        if abs(float(np.hypot(*value)) - 1.0) > UNIT_VECTOR_TOL:
            raise ValueError(f"normal {value} is not a unit vector")
        return value


class TractionProfile(BioinverseModel):
    """Flow loading on a protruding colony, growing with height above the substratum.

    Pressure p(y) pushes along the inward normal and a wall shear tau(y) acts in
    +x, both scaled by (y / y_top) ** exponent.
    """

    pressure: float = 0.0
    """Pressure at the top of the colony [g/(mm s^2)]"""

    shear: float = 0.0
    """Shear traction at the top of the colony [g/(mm s^2)]"""

    exponent: float = Field(default=1.0, ge=0.0)


def growth_displacement(
    sample: SurfaceLoadSample, params: GrowthParams
) -> npt.NDArray[np.float64]:
    """Growth displacement u_g [mm] of one interface point."""
    magnitude = params.dt_g * (
        params.K1g * sample.flux_h
        - params.K2g * abs(sample.sigma_nn)
        - params.K3g * abs(sample.sigma_nt)
    )
    return np.asarray(magnitude * np.asarray(sample.normal, dtype=float))


class LoadTable:
    """Column view of per-vertex load samples."""

    def __init__(self, samples: Sequence[SurfaceLoadSample]):
        if not samples:
            raise ConfigError("Load table is empty")
        self.samples = list(samples)
        self.positions = np.array([s.position for s in samples], dtype=float)
        self.normals = np.array([s.normal for s in samples], dtype=float)
        self.flux_h = np.array([s.flux_h for s in samples], dtype=float)
        self.abs_nn = np.abs([s.sigma_nn for s in samples])
        self.abs_nt = np.abs([s.sigma_nt for s in samples])

    def __len__(self) -> int:
        return len(self.samples)

    def magnitudes(
        self, K1g: float, K2g: float, K3g: float, dt_g: float
    ) -> npt.NDArray[np.float64]:
        return np.asarray(dt_g * (K1g * self.flux_h - K2g * self.abs_nn - K3g * self.abs_nt))


def _check_table(base_curve: InterfaceCurve, table: LoadTable) -> None:
    if len(table) != len(base_curve):
        raise ConfigError(
            f"Need one load sample per vertex: {len(table)} samples, {len(base_curve)} vertices"
        )
    offsets = np.linalg.norm(table.positions - base_curve.vertices, axis=1)
    moved = np.flatnonzero(offsets > LOAD_POSITION_TOL_MM)
    if moved.size:
        i = int(moved[0])
        raise ConfigError(
            f"Load sample {i} at {table.positions[i].tolist()} does not sit on "
            f"vertex {base_curve.vertices[i].tolist()}",
            {"sample": i, "distance": float(offsets[i])},
        )


def _grow(base_curve: InterfaceCurve, table: LoadTable, params: GrowthParams) -> InterfaceCurve:
    _check_table(base_curve, table)
    magnitudes = table.magnitudes(params.K1g, params.K2g, params.K3g, params.dt_g)
    grown = base_curve.vertices + magnitudes[:, None] * table.normals
    if base_curve.closed:
        starts, ends = grown, np.roll(grown, -1, axis=0)
    else:
        starts, ends = grown[:-1], grown[1:]
    lengths = np.linalg.norm(ends - starts, axis=1)
    short = int(np.argmin(lengths))
    if lengths[short] < MIN_SEGMENT_LENGTH_MM:
        raise MapDegenerate(short, float(lengths[short]))
    return base_curve.with_vertices(grown)


def growth_model_evaluate(
    base_curve: InterfaceCurve, samples: Sequence[SurfaceLoadSample], params: GrowthParams
) -> InterfaceCurve:
    """Displace every vertex of ``base_curve`` by its growth displacement.

    Raises:
        ConfigError: If the samples do not match the vertices one to one
        MapDegenerate: If a grown segment collapses
    """
    return _grow(base_curve, LoadTable(samples), params)


class GrowthModel(ForwardModel):
    """Growth law over (K1g, K2g, K3g) for a fixed interface and fixed loads."""

    def __init__(
        self,
        base_curve: InterfaceCurve,
        samples: Sequence[SurfaceLoadSample],
        dt_g: float = GROWTH_DT_DEFAULT_S,
    ):
        self.base_curve = base_curve
        self.table = LoadTable(samples)
        self.dt_g = float(dt_g)
        _check_table(base_curve, self.table)

    @property
    def model_id(self) -> str:
        return "growth"

    @property
    def parameter_names(self) -> tuple[str, ...]:
        return ("K1g", "K2g", "K3g")

    @property
    def parameter_units(self) -> tuple[str, ...]:
        return ("mm^3/mol", "mm^2 s/g", "mm^2 s/g")

    def reference_curve(self) -> InterfaceCurve:
        return self.base_curve

    def evaluate(self, theta: npt.ArrayLike) -> InterfaceCurve:
        K1g, K2g, K3g = self.check_theta(theta)
        params = GrowthParams(K1g=K1g, K2g=K2g, K3g=K3g, dt_g=self.dt_g)
        return _grow(self.base_curve, self.table, params)


def finger_interface(
    width: float = FINGER_WIDTH_MM,
    height: float = FINGER_HEIGHT_MM,
    n_side: int = 21,
    n_tip: int = 21,
) -> InterfaceCurve:
    """Finger-shaped colony on y = 0: straight flanks and a semicircular tip.

    Traversal runs up the left flank, over the tip and down the right flank,
    so the biofilm is on the right.
    """
    radius = 0.5 * width
    stem = height - radius
    if width <= 0.0 or stem <= 0.0:
        raise InvalidGeometry(f"Finger needs height > width / 2 > 0, got {width} x {height}")
    if n_side < 2 or n_tip < 3:
        raise InvalidGeometry("Finger needs n_side >= 2 and n_tip >= 3")
    flank = np.linspace(0.0, stem, n_side)
    angles = np.linspace(np.pi, 0.0, n_tip)[1:-1]
    left = np.column_stack([np.full(n_side, -radius), flank])
    tip = np.column_stack([radius * np.cos(angles), stem + radius * np.sin(angles)])
    right = np.column_stack([np.full(n_side, radius), flank[::-1]])
    return InterfaceCurve(np.vstack([left, tip, right]), closed=False, biofilm_side="right")


def physics_load_samples(
    curve: InterfaceCurve,
    profile: DiffusionProfile,
    monod: MonodParams,
    traction: TractionProfile,
    layer_shrink: float = 0.5,
) -> List[SurfaceLoadSample]:
    """Per-vertex loads from the flux solver and a height-dependent traction profile.

    The boundary layer above a vertex at height y is
    ``L_fluid * (1 - layer_shrink * y / y_top)``: thinner near the top, where the
    colony reaches into faster flow, so nutrient flux grows with height.
    """
    if not 0.0 <= layer_shrink < 1.0:
        raise ConfigError(f"layer_shrink must lie in [0, 1), got {layer_shrink}")
    normals = curve.vertex_normals(into_biofilm=False)
    heights = np.clip(curve.vertices[:, 1], 0.0, None)
    y_top = float(heights.max()) or 1.0
    flux_cache: dict[float, float] = {}
    samples = []
    for vertex, normal, y in zip(curve.vertices, normals, heights):
        s = y / y_top
        layer = profile.L_fluid * (1.0 - layer_shrink * s)
        if layer not in flux_cache:
            flux_cache[layer] = solve_flux(profile.model_copy(update={"L_fluid": layer}), monod)
        weight = s**traction.exponent
        p, tau = traction.pressure * weight, traction.shear * weight
        tangent = np.array([-normal[1], normal[0]])
        traction_vector = -p * normal + np.array([tau, 0.0])
        samples.append(
            SurfaceLoadSample(
                position=(float(vertex[0]), float(vertex[1])),
                normal=(float(normal[0]), float(normal[1])),
                flux_h=flux_cache[layer],
                sigma_nn=float(traction_vector @ normal),
                sigma_nt=float(traction_vector @ tangent),
            )
        )
    logger.info(
        f"Computed {len(samples)} load samples "
        f"({len(flux_cache)} flux solves, y_top={y_top:.4g} mm)"
    )
    return samples


def write_load_csv(samples: Sequence[SurfaceLoadSample], path: str | Path) -> Path:
    """Write ``x_mm,y_mm,nx,ny,h,snn,snt`` rows."""
    csv_path = Path(path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    with open(csv_path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(LOAD_HEADER)
        for s in samples:
            values = [*s.position, *s.normal, s.flux_h, s.sigma_nn, s.sigma_nt]
            writer.writerow([repr(float(v)) for v in values])
    return csv_path


def read_load_csv(path: str | Path) -> List[SurfaceLoadSample]:
    """Read a load table.

    Raises:
        ConfigError: If the file is missing, has the wrong header or invalid rows
    """
    csv_path = Path(path).expanduser()
    if not csv_path.exists():
        raise ConfigError(f"Load file not found: {csv_path}")
    with open(csv_path, newline="") as f:
        rows = list(csv.reader(f))
    if not rows or rows[0] != LOAD_HEADER:
        raise ConfigError(f"Load file {csv_path} must start with header {LOAD_HEADER}")
    samples = []
    for line, row in enumerate(rows[1:], start=2):
        try:
            x, y, nx, ny, h, snn, snt = (float(v) for v in row)
            samples.append(
                SurfaceLoadSample(
                    position=(x, y), normal=(nx, ny), flux_h=h, sigma_nn=snn, sigma_nt=snt
                )
            )
        except ValueError as e:
            raise ConfigError(f"Invalid load row {line} in {csv_path}: {e}") from e
    return samples


__all__ = [
    "LOAD_HEADER",
    "GrowthParams",
    "SurfaceLoadSample",
    "TractionProfile",
    "LoadTable",
    "growth_displacement",
    "growth_model_evaluate",
    "GrowthModel",
    "finger_interface",
    "physics_load_samples",
    "write_load_csv",
    "read_load_csv",
]

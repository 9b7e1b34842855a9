"""Artificial observations: forward solve at a known truth, rays and seeded noise.

Noise enters as scalar offsets along the rays. For a ray j the residual is
``r_j(theta) = signed_distance_j(theta) - o_j`` with ``o_j ~ N(0, sigma^2)``.
"""

import json
import logging
from pathlib import Path
from typing import Any, Callable, Dict, List, Literal, Optional, Sequence

import numpy as np
import numpy.typing as npt
from pydantic import Field, ValidationError, model_validator

from ..base import BioinverseModel, BioinverseRecord
from ..constants import NOISE_GENERATOR, NOISE_TRANSFORM
from ..errors import ConfigError, ModelEvaluationError, ModelFailure
from ..geometry import (
    InterfaceCurve,
    MeasurementRay,
    default_max_length,
    measure,
    normal_rays,
    read_rays_csv,
)
from ..models.base import ForwardModel

logger = logging.getLogger(__name__)

DirectionSource = Literal["deformed", "reference"]


class RaySpec(BioinverseModel):
    """Where and along which directions the observed interface is measured."""

    vertex_indices: Optional[List[int]] = None
    """Observed vertices carrying a ray; every ``stride``-th vertex when None"""

    stride: int = Field(default=1, ge=1)

    max_length: Optional[float] = Field(default=None, gt=0.0)
    """Search length [mm]; bounding-box diagonal of the observed curve when None"""

    direction_source: DirectionSource = "deformed"
    """Normals of the observed (deformed) curve or of the model's reference curve"""

    rays_file: Optional[str] = None
    """Explicit rays CSV; overrides all other fields"""

    def build(
        self,
        model: ForwardModel,
        observed: InterfaceCurve,
        base_dir: Optional[Path] = None,
    ) -> list[MeasurementRay]:
        """Measurement rays on an observed curve.

        Raises:
            ConfigError: If the rays file is missing
            InvalidGeometry: If a vertex index is out of range
        """
        if self.rays_file is not None:
            path = Path(self.rays_file).expanduser()
            if not path.is_absolute() and base_dir is not None:
                path = base_dir / path
            return read_rays_csv(path)

        indices = (
            list(range(0, len(observed), self.stride))
            if self.vertex_indices is None
            else self.vertex_indices
        )
        max_length = self.max_length or default_max_length(observed)
        if self.direction_source == "deformed":
            return normal_rays(observed, indices, into_biofilm=True, max_length=max_length)

        reference = model.reference_curve()
        if len(reference) != len(observed):
            raise ConfigError(
                f"Reference directions need matching vertex counts "
                f"({len(reference)} reference, {len(observed)} observed)"
            )
        rays = normal_rays(reference, indices, into_biofilm=True, max_length=max_length)
        return [
            MeasurementRay(observed.vertices[i], ray.direction, max_length)
            for i, ray in zip(indices, rays)
        ]


class RayRecord(BioinverseModel):
    origin: tuple[float, float]
    direction: tuple[float, float]
    max_length: float = Field(gt=0.0)

    @classmethod
    def from_ray(cls, ray: MeasurementRay) -> "RayRecord":
        return cls(
            origin=(float(ray.origin[0]), float(ray.origin[1])),
            direction=(float(ray.direction[0]), float(ray.direction[1])),
            max_length=ray.max_length,
        )

    def to_ray(self) -> MeasurementRay:
        return MeasurementRay(self.origin, self.direction, self.max_length)


class ObservationProvenance(BioinverseRecord):
    """How an observation was produced; callers may attach extra keys."""

    model_id: str
    parameter_names: List[str]
    theta_true: List[float]
    sigma: float = Field(ge=0.0)
    """Noise standard deviation [mm]"""

    seed: int = Field(ge=0)
    stream: int = Field(default=0, ge=0)
    generator: str = NOISE_GENERATOR
    transform: str = NOISE_TRANSFORM
    numpy_version: str = np.__version__
    direction_source: DirectionSource = "deformed"


class Observation(BioinverseModel):
    """Rays on the observed interface plus target offsets along each ray."""

    rays: List[RayRecord]
    offsets: List[float]
    """Target signed distances o_j [mm]"""

    provenance: ObservationProvenance

    @model_validator(mode="after")
    def _check_lengths(self) -> "Observation":
        if not self.rays:
            raise ValueError("an observation needs at least one ray")
        if len(self.offsets) != len(self.rays):
            raise ValueError(
                f"offsets has {len(self.offsets)} entries for {len(self.rays)} rays"
            )
        return self

    @property
    def sigma(self) -> float:
        return self.provenance.sigma

    def measurement_rays(self) -> list[MeasurementRay]:
        return [record.to_ray() for record in self.rays]

    def offsets_array(self) -> npt.NDArray[np.float64]:
        return np.asarray(self.offsets, dtype=float)

    def check_model(self, model: ForwardModel) -> None:
        """Raise ConfigError unless the observation was generated by ``model``'s kind."""
        if self.provenance.model_id != model.model_id:
            raise ConfigError(
                f"Observation was generated by model '{self.provenance.model_id}', "
                f"configuration selects '{model.model_id}'"
            )
        if tuple(self.provenance.parameter_names) != model.parameter_names:
            raise ConfigError(
                f"Observation parameters {self.provenance.parameter_names} do not match "
                f"model parameters {list(model.parameter_names)}"
            )


def noise_offsets(n: int, sigma: float, seed: int, stream: int = 0) -> npt.NDArray[np.float64]:
    """``sigma`` times a standard-normal draw from PCG64(SeedSequence([seed, stream])).

    The draw depends only on (seed, stream, n), so every sigma of one seed shares
    the same perturbation direction.
    """
    if sigma < 0.0:
        raise ConfigError(f"Noise sigma must be non-negative, got {sigma}")
    if sigma == 0.0:
        return np.zeros(n)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, stream])))
    return np.asarray(sigma * rng.standard_normal(n))


def generate_observation(
    model: ForwardModel,
    theta_true: npt.ArrayLike,
    ray_spec: Optional[RaySpec] = None,
    sigma: float = 0.0,
    seed: int = 0,
    stream: int = 0,
    base_dir: Optional[Path] = None,
    extra_provenance: Optional[Dict[str, Any]] = None,
) -> Observation:
    """Evaluate the model at the truth, place rays and draw offsets.

    Args:
        model: Forward model generating the data
        theta_true: Generating parameters
        ray_spec: Ray placement (every vertex, deformed normals when None)
        sigma: Noise standard deviation [mm]
        seed: Root seed of the noise generator
        stream: Generator stream under the root seed
        base_dir: Directory relative ray files are resolved against
        extra_provenance: Additional provenance keys (tool, config hash, ...)

    Returns:
        Observation with ``len(offsets) == len(rays)``

    Raises:
        ModelFailure: If the model cannot be evaluated at ``theta_true``
    """
    ray_spec = ray_spec or RaySpec()
    theta = np.asarray(theta_true, dtype=float).reshape(-1)
    rays = _observed_rays(model, theta, ray_spec, base_dir)
    return _bundle(model, theta, rays, ray_spec, sigma, seed, stream, extra_provenance)


def _observed_rays(
    model: ForwardModel,
    theta: npt.NDArray[np.float64],
    ray_spec: RaySpec,
    base_dir: Optional[Path],
) -> list[MeasurementRay]:
    try:
        observed = model.evaluate(theta)
    except ModelEvaluationError as e:
        raise ModelFailure(None, e) from e
    return ray_spec.build(model, observed, base_dir)


def _bundle(
    model: ForwardModel,
    theta: npt.NDArray[np.float64],
    rays: Sequence[MeasurementRay],
    ray_spec: RaySpec,
    sigma: float,
    seed: int,
    stream: int,
    extra_provenance: Optional[Dict[str, Any]],
) -> Observation:
    offsets = noise_offsets(len(rays), sigma, seed, stream)
    logger.info(
        f"Observation of {model.model_id} at {theta.tolist()}: {len(rays)} rays, "
        f"sigma={sigma:g} mm, seed={seed}"
    )
    return Observation(
        rays=[RayRecord.from_ray(ray) for ray in rays],
        offsets=offsets.tolist(),
        provenance=ObservationProvenance(
            model_id=model.model_id,
            parameter_names=list(model.parameter_names),
            theta_true=theta.tolist(),
            sigma=sigma,
            seed=seed,
            stream=stream,
            direction_source=ray_spec.direction_source,
            **(extra_provenance or {}),
        ),
    )


def observation_residual(
    model: ForwardModel, observation: Observation
) -> Callable[[npt.NDArray[np.float64]], npt.NDArray[np.float64]]:
    """Residual r(theta) = measure(rays, model.evaluate(theta)) - offsets."""
    rays = observation.measurement_rays()
    offsets = observation.offsets_array()

    def residual(theta: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
        return np.asarray(measure(rays, model.evaluate(theta)) - offsets)

    return residual


def write_observation_json(observation: Observation, path: str | Path) -> Path:
    json_path = Path(path)
    json_path.parent.mkdir(parents=True, exist_ok=True)
    json_path.write_text(observation.model_dump_json(indent=2) + "\n")
    return json_path


def read_observation_json(path: str | Path) -> Observation:
    """Read an observation file.

    Raises:
        ConfigError: If the file is missing, not JSON or fails validation
    """
    json_path = Path(path).expanduser()
    if not json_path.exists():
        raise ConfigError(f"Observation file not found: {json_path}")
    try:
        with open(json_path) as f:
            data = json.load(f)
        return Observation(**data)
    except json.JSONDecodeError as e:
        raise ConfigError(f"Observation file {json_path} is not valid JSON: {e}") from e
    except ValidationError as e:
        raise ConfigError(
            f"Invalid observation {json_path}: {e.error_count()} validation errors",
            {"errors": e.errors(include_url=False, include_context=False)},
        ) from e


def observations_for_sigmas(
    model: ForwardModel,
    theta_true: npt.ArrayLike,
    sigmas: Sequence[float],
    ray_spec: Optional[RaySpec] = None,
    seed: int = 0,
    base_dir: Optional[Path] = None,
    extra_provenance: Optional[Dict[str, Any]] = None,
) -> List[Observation]:
    """One observation per noise level from a single forward solve.

    All levels use stream 0 of ``seed``, so they differ only by the scale of a
    common perturbation.
    """
    if not sigmas:
        raise ConfigError("At least one noise level is required")
    ray_spec = ray_spec or RaySpec()
    theta = np.asarray(theta_true, dtype=float).reshape(-1)
    rays = _observed_rays(model, theta, ray_spec, base_dir)
    return [
        _bundle(model, theta, rays, ray_spec, sigma, seed, 0, extra_provenance)
        for sigma in sigmas
    ]


__all__ = [
    "DirectionSource",
    "RaySpec",
    "RayRecord",
    "ObservationProvenance",
    "Observation",
    "noise_offsets",
    "generate_observation",
    "observation_residual",
    "write_observation_json",
    "read_observation_json",
    "observations_for_sigmas",
]

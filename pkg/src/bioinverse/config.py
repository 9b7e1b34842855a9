"""Run configuration: model selection, parameters, optimizer, rays and noise.

A configuration is a JSON file validated into :class:`RunConfig`. File references
inside it (scenario, interface, loads, rays) are relative to the configuration file.
"""

import hashlib
import json
import logging
import os
from pathlib import Path
from typing import Annotated, Dict, List, Literal, Optional, Union

from pydantic import Field, PrivateAttr, ValidationError, field_validator, model_validator

from .base import BioinverseModel
from .constants import BUMP_RADIUS_MM, BUMP_VERTICES, ENV_THREADS, GROWTH_DT_DEFAULT_S
from .errors import ConfigError
from .fem import FemModel, load_scenario
from .geometry import read_curve_csv
from .lmsolver import LMConfig, ParameterSpec
from .models import (
    BumpModel,
    DiffusionProfile,
    ForwardModel,
    GrowthModel,
    MonodParams,
    OffsetModel,
    TractionProfile,
    check_names,
    finger_interface,
    physics_load_samples,
    read_load_csv,
)
from .synth import RaySpec

logger = logging.getLogger(__name__)


def resolve_path(path: str, base_dir: Optional[Path]) -> Path:
    resolved = Path(path).expanduser()
    if not resolved.is_absolute() and base_dir is not None:
        resolved = base_dir / resolved
    return resolved


class BumpConfig(BioinverseModel):
    kind: Literal["bump"] = "bump"
    radius: float = Field(default=BUMP_RADIUS_MM, gt=0.0)
    n_vertices: int = Field(default=BUMP_VERTICES, ge=3)

    def build(self, base_dir: Optional[Path] = None) -> ForwardModel:
        return BumpModel(self.radius, self.n_vertices)


class OffsetConfig(BioinverseModel):
    kind: Literal["offset"] = "offset"
    length: float = Field(default=1.0, gt=0.0)
    n_vertices: int = Field(default=11, ge=2)
    interface: Optional[str] = None
    """Reference interface CSV; the straight line of ``length`` when None"""

    def build(self, base_dir: Optional[Path] = None) -> ForwardModel:
        curve = (
            None
            if self.interface is None
            else read_curve_csv(resolve_path(self.interface, base_dir))
        )
        return OffsetModel(self.length, self.n_vertices, curve)



class FemConfig(BioinverseModel):
    kind: Literal["fem"] = "fem"
    scenario: str
    """Scenario JSON path"""

    def build(self, base_dir: Optional[Path] = None) -> ForwardModel:
        path = resolve_path(self.scenario, base_dir)
        return FemModel(load_scenario(path), base_dir=path.parent)


class GrowthPhysics(BioinverseModel):
    """Inputs of the per-vertex flux and traction computation."""

    profile: DiffusionProfile
    monod: MonodParams
    traction: TractionProfile = Field(default_factory=TractionProfile)
    layer_shrink: float = Field(default=0.5, ge=0.0, lt=1.0)


class GrowthConfig(BioinverseModel):
    """Growth model; loads come from a CSV table or from the physics inputs."""

    kind: Literal["growth"] = "growth"
    interface: Optional[str] = None
    """Base interface CSV; the finger colony when None"""

    loads: Optional[str] = None
    """Load table CSV (``x_mm,y_mm,nx,ny,h,snn,snt``)"""

    physics: Optional[GrowthPhysics] = None
    dt_g: float = Field(default=GROWTH_DT_DEFAULT_S, gt=0.0)
    """Growth timespan [s]"""

    @model_validator(mode="after")
    def _one_load_source(self) -> "GrowthConfig":
        if (self.loads is None) == (self.physics is None):
            raise ValueError("growth model needs exactly one of 'loads' or 'physics'")
        return self

    def build(self, base_dir: Optional[Path] = None) -> ForwardModel:
        curve = (
            finger_interface()
            if self.interface is None
            else read_curve_csv(resolve_path(self.interface, base_dir))
        )
        if self.loads is not None:
            samples = read_load_csv(resolve_path(self.loads, base_dir))
        else:
            assert self.physics is not None
            samples = physics_load_samples(
                curve,
                self.physics.profile,
                self.physics.monod,
                self.physics.traction,
                self.physics.layer_shrink,
            )
        return GrowthModel(curve, samples, self.dt_g)


ModelConfig = Annotated[
    Union[BumpConfig, OffsetConfig, FemConfig, GrowthConfig], Field(discriminator="kind")
]


class NoiseConfig(BioinverseModel):
    sigmas: List[float] = Field(default_factory=lambda: [0.0])
    """Noise standard deviations [mm]"""

    seed: int = Field(default=0, ge=0)

    @field_validator("sigmas")
    @classmethod
    def _check_sigmas(cls, value: List[float]) -> List[float]:
        if not value:
            raise ValueError("at least one noise level is required")
        negative = [s for s in value if s < 0.0]
        if negative:
            raise ValueError(f"noise levels must be non-negative, got {negative}")
        return value


class BootstrapConfig(BioinverseModel):
    """Tied stage run before the full problem."""

    ties: Dict[str, List[str]]
    fixed: Dict[str, float] = Field(default_factory=dict)
    parameters: ParameterSpec
    """Bounds of the tied problem, names in ``ties`` order"""

    initial_guess: List[float]

    @model_validator(mode="after")
    def _check_guess(self) -> "BootstrapConfig":
        if list(self.ties) != self.parameters.names:
            raise ValueError(
                f"bootstrap parameter names {self.parameters.names} "
                f"must match ties {list(self.ties)}"
            )
        if len(self.initial_guess) != self.parameters.size:
            raise ValueError("bootstrap initial_guess must have one entry per tied parameter")
        outside = self.parameters.violations(self.initial_guess)
        if outside:
            raise ValueError(f"bootstrap initial_guess outside the bounds for {outside}")
        return self


class RunConfig(BioinverseModel):
    """Everything a subcommand needs besides its command-line flags."""

    model: ModelConfig
    parameters: ParameterSpec
    theta_true: Optional[List[float]] = None
    """Generating parameters of synthetic observations"""

    initial_guesses: List[List[float]] = Field(default_factory=list)
    lm: LMConfig = Field(default_factory=LMConfig)
    rays: RaySpec = Field(default_factory=RaySpec)
    noise: NoiseConfig = Field(default_factory=NoiseConfig)
    bootstrap: Optional[BootstrapConfig] = None
    workers: Optional[int] = Field(default=None, ge=1)
    """Concurrent model evaluations; BIOINVERSE_THREADS or 1 when None"""

    output_dir: Optional[str] = None

    _base_dir: Optional[Path] = PrivateAttr(default=None)

    @model_validator(mode="after")
    def _check_vectors(self) -> "RunConfig":
        n = self.parameters.size
        if self.theta_true is not None:
            if len(self.theta_true) != n:
                raise ValueError(f"theta_true needs {n} entries, got {len(self.theta_true)}")
            outside = self.parameters.violations(self.theta_true)
            if outside:
                logger.warning(f"theta_true lies outside the search box for {outside}")
        for index, guess in enumerate(self.initial_guesses):
            if len(guess) != n:
                raise ValueError(f"initial guess {index} needs {n} entries, got {len(guess)}")
            outside = self.parameters.violations(guess)
            if outside:
                raise ValueError(
                    f"initial guess {index} must lie strictly inside the bounds: {outside}"
                )
        return self

    @property
    def base_dir(self) -> Optional[Path]:
        """Directory relative file references are resolved against."""
        return self._base_dir

    def build_model(self) -> ForwardModel:
        """Instantiate the configured model and check the parameter names against it.

        Raises:
            ConfigError: If referenced files are missing or names do not match
        """
        model = self.model.build(self._base_dir)
        check_names(model, self.parameters.names)
        return model

    def require_theta_true(self) -> List[float]:
        if self.theta_true is None:
            raise ConfigError("Configuration has no theta_true")
        return self.theta_true

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON of the validated configuration."""
        canonical = json.dumps(
            self.model_dump(mode="json"), sort_keys=True, separators=(",", ":")
        )
        return hashlib.sha256(canonical.encode()).hexdigest()


def load_run_config(path: str | Path) -> RunConfig:
    """Load and validate a run configuration.

    Args:
        path: Path to the JSON configuration file

    Returns:
        RunConfig whose relative file references resolve against the file's directory

    Raises:
        ConfigError: If the file is missing, not JSON or fails validation

    Example config file:
        ```json
        {
          "model": {"kind": "bump"},
          "parameters": {"names": ["p1", "p2"], "lower": [-1, -1], "upper": [1, 1]},
          "theta_true": [0.3, 0.1],
          "initial_guesses": [[0.15, 0.05]],
          "noise": {"sigmas": [0.0, 1e-4], "seed": 7}
        }
        ```
    """
    config_path = Path(path).expanduser()
    if not config_path.exists():
        raise ConfigError(f"Config file not found: {config_path}")
    try:
        with open(config_path) as f:
            data = json.load(f)
        config = RunConfig(**data)
    except json.JSONDecodeError as e:
        raise ConfigError(f"Config file {config_path} is not valid JSON: {e}") from e
    except ValidationError as e:
        raise ConfigError(
            f"Invalid config {config_path}: {e.error_count()} validation errors: "
            + "; ".join(
                f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()
            ),
            {"errors": e.errors(include_url=False, include_context=False)},
        ) from e
    config._base_dir = config_path.resolve().parent
    logger.debug(f"Loaded {config.model.kind} config from {config_path}")
    return config


def resolve_workers(configured: Optional[int] = None) -> int:
    """Concurrency cap: configured value, else BIOINVERSE_THREADS, else 1.

    Raises:
        ConfigError: If the environment variable is not a positive integer
    """
    if configured is not None:
        return configured
    raw = os.environ.get(ENV_THREADS)
    if raw is None or not raw.strip():
        return 1
    try:
        value = int(raw)
    except ValueError as e:
        raise ConfigError(f"{ENV_THREADS} must be a positive integer, got '{raw}'") from e
    if value < 1:
        raise ConfigError(f"{ENV_THREADS} must be a positive integer, got '{raw}'")
    return value


__all__ = [
    "resolve_path",
    "BumpConfig",
    "OffsetConfig",
    "FemConfig",
    "GrowthPhysics",
    "GrowthConfig",
    "ModelConfig",
    "NoiseConfig",
    "BootstrapConfig",
    "RunConfig",
    "load_run_config",
    "resolve_workers",
]

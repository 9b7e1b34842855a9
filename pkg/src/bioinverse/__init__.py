"""Inverse analysis of biofilm interface deformation.

Signed ray distances between observed and model interfaces, a bounded
Levenberg-Marquardt optimizer with finite-difference Jacobians, desk-scale
forward models and synthetic noise-sensitivity campaigns.
"""

# Errors
from .errors import (
    BioinverseError,
    ConfigError,
    DegenerateNormal,
    ElementInverted,
    InvalidGeometry,
    MapDegenerate,
    ModelEvaluationError,
    ModelFailure,
    NewtonDivergence,
    NoIntersection,
    ParameterOutOfRange,
    PerturbationUnderflow,
    SingularSystem,
)

# Geometry
from .geometry import (
    InterfaceCurve,
    MeasurementRay,
    measure,
    normal_rays,
    signed_distance,
)

# Optimizer
from .lmsolver import LMConfig, LMResult, ParameterSpec, run

# Forward models
from .models import BumpModel, ForwardModel, GrowthModel, OffsetModel, TiedModel
from .fem import FemModel, FemScenario, load_scenario

# Synthetic studies
from .synth import (
    Observation,
    RaySpec,
    generate_observation,
    observation_residual,
    run_bootstrap,
    run_campaign,
)

# Configuration
from .config import RunConfig, load_run_config

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # Errors
    "BioinverseError",
    "ConfigError",
    "DegenerateNormal",
    "ElementInverted",
    "InvalidGeometry",
    "MapDegenerate",
    "ModelEvaluationError",
    "ModelFailure",
    "NewtonDivergence",
    "NoIntersection",
    "ParameterOutOfRange",
    "PerturbationUnderflow",
    "SingularSystem",
    # Geometry
    "InterfaceCurve",
    "MeasurementRay",
    "measure",
    "normal_rays",
    "signed_distance",
    # Optimizer
    "LMConfig",
    "LMResult",
    "ParameterSpec",
    "run",
    # Forward models
    "BumpModel",
    "ForwardModel",
    "GrowthModel",
    "OffsetModel",
    "TiedModel",
    "FemModel",
    "FemScenario",
    "load_scenario",
    # Synthetic studies
    "Observation",
    "RaySpec",
    "generate_observation",
    "observation_residual",
    "run_bootstrap",
    "run_campaign",
    # Configuration
    "RunConfig",
    "load_run_config",
]

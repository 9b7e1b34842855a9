"""Forward models: parameters in, predicted interface out."""

# Contract
from .base import ForwardModel, check_names

# Analytic surrogates
from .bump import BumpModel, bump_map, bump_reference_curve
from .offset import OffsetModel

# Diffusion-reaction
from .diffusion import (
    DiffusionProfile,
    Kinetics,
    MonodParams,
    monod_rate,
    solve_concentration,
    solve_flux,
)

# Growth
from .growth import (
    LOAD_HEADER,
    GrowthModel,
    GrowthParams,
    LoadTable,
    SurfaceLoadSample,
    TractionProfile,
    finger_interface,
    growth_displacement,
    growth_model_evaluate,
    physics_load_samples,
    read_load_csv,
    write_load_csv,
)

# Reduced parameterizations
from .tied import TiedModel

__all__ = [
    # Contract
    "ForwardModel",
    "check_names",
    # Analytic surrogates
    "BumpModel",
    "bump_map",
    "bump_reference_curve",
    "OffsetModel",
    # Diffusion-reaction
    "DiffusionProfile",
    "Kinetics",
    "MonodParams",
    "monod_rate",
    "solve_concentration",
    "solve_flux",
    # Growth
    "LOAD_HEADER",
    "GrowthModel",
    "GrowthParams",
    "LoadTable",
    "SurfaceLoadSample",
    "TractionProfile",
    "finger_interface",
    "growth_displacement",
    "growth_model_evaluate",
    "physics_load_samples",
    "read_load_csv",
    "write_load_csv",
    # Reduced parameterizations
    "TiedModel",
]

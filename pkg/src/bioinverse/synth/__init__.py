"""Synthetic observations and multi-run identification campaigns."""

# Observations
from .observation import (
    DirectionSource,
    Observation,
    ObservationProvenance,
    RayRecord,
    RaySpec,
    generate_observation,
    noise_offsets,
    observation_residual,
    observations_for_sigmas,
    read_observation_json,
    write_observation_json,
)

# Campaigns
from .campaign import (
    CampaignResult,
    CampaignRun,
    SigmaSummary,
    run_campaign,
    run_id,
    summarize,
    summary_header,
    write_summary_csv,
)

# Staged identification
from .bootstrap import BootstrapResult, run_bootstrap

__all__ = [
    # Observations
    "DirectionSource",
    "Observation",
    "ObservationProvenance",
    "RayRecord",
    "RaySpec",
    "generate_observation",
    "noise_offsets",
    "observation_residual",
    "observations_for_sigmas",
    "read_observation_json",
    "write_observation_json",
    # Campaigns
    "CampaignResult",
    "CampaignRun",
    "SigmaSummary",
    "run_campaign",
    "run_id",
    "summarize",
    "summary_header",
    "write_summary_csv",
    # Staged identification
    "BootstrapResult",
    "run_bootstrap",
]

"""Noise-sensitivity campaigns: one inverse run per (noise level, initial guess).

Runs are independent and fan out through :func:`bioinverse.parallel.map_threaded`.
Statistics per noise level use the completed runs only; runs that ended with
``mu_blowup`` or ``model_failure``, or raised a numerical error, are counted as
failed.
"""

import csv
import logging
import math
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence

import numpy as np
import numpy.typing as npt
from pydantic import Field

from ..base import BioinverseRecord
from ..errors import BioinverseError, ConfigError
from ..lmsolver import LMConfig, LMResult, ParameterSpec, run
from ..models.base import ForwardModel, check_names
from ..parallel import map_threaded
from .observation import Observation, observation_residual

logger = logging.getLogger(__name__)


class CampaignRun(BioinverseRecord):
    """Outcome of one (noise level, initial guess) pair."""

    sigma_index: int
    guess_index: int
    sigma: float
    x0: List[float]
    result: Optional[LMResult] = None
    error: Optional[Dict[str, Any]] = None
    """Exception payload when the run raised instead of returning"""

    @property
    def run_id(self) -> str:
        return run_id(self.sigma_index, self.guess_index)

    @property
    def completed(self) -> bool:
        return self.result is not None and not self.result.failed


class SigmaSummary(BioinverseRecord):
    """Mean and sample standard deviation over the completed runs of one noise level."""

    sigma: float
    mean_err_res: float
    std_err_res: float
    mean: Dict[str, float] = Field(default_factory=dict)
    std: Dict[str, float] = Field(default_factory=dict)
    n_completed: int
    n_failed: int


class CampaignResult(BioinverseRecord):
    names: List[str]
    runs: List[CampaignRun]
    summary: List[SigmaSummary]


def run_id(sigma_index: int, guess_index: int) -> str:
    return f"s{sigma_index:02d}_g{guess_index:02d}"


def _mean_std(values: Sequence[float]) -> tuple[float, float]:
    if not values:
        return math.nan, math.nan
    array = np.asarray(values, dtype=float)
    std = float(array.std(ddof=1)) if array.size > 1 else 0.0
    return float(array.mean()), std


def summarize(runs: Sequence[CampaignRun], names: Sequence[str]) -> List[SigmaSummary]:
    """Per-noise-level statistics in increasing sigma-index order."""
    summary = []
    for sigma_index in sorted({r.sigma_index for r in runs}):
        group = [r for r in runs if r.sigma_index == sigma_index]
        done = [r.result for r in group if r.completed and r.result is not None]
        mean_res, std_res = _mean_std([res.err_res for res in done if res.err_res is not None])
        params = np.array([res.x for res in done], dtype=float).reshape(len(done), len(names))
        means, stds = {}, {}
        for j, name in enumerate(names):
            means[name], stds[name] = _mean_std(params[:, j].tolist())
        summary.append(
            SigmaSummary(
                sigma=group[0].sigma,
                mean_err_res=mean_res,
                std_err_res=std_res,
                mean=means,
                std=stds,
                n_completed=len(done),
                n_failed=len(group) - len(done),
            )
        )
    return summary


def run_campaign(
    model: ForwardModel,
    observations: Sequence[Observation],
    initial_guesses: Sequence[npt.ArrayLike],
    spec: ParameterSpec,
    config: Optional[LMConfig] = None,
    workers: int = 1,
    completed: Optional[Mapping[str, CampaignRun]] = None,
    on_result: Optional[Callable[[CampaignRun], None]] = None,
) -> CampaignResult:
    """Run every (observation, initial guess) pair and summarize per noise level.

    Args:
        model: Forward model to identify
        observations: One observation per noise level
        initial_guesses: Starting points, strictly inside the bounds
        spec: Parameter names and bounds; names must match the model
        config: Iteration settings
        workers: Concurrent runs
        completed: Results of an earlier, interrupted campaign keyed by run id;
            these runs are not recomputed
        on_result: Called with every newly finished run

    Returns:
        CampaignResult with runs ordered by (noise level, guess)

    Raises:
        ConfigError: If there are no observations or guesses, or a guess is invalid
    """
    if not observations:
        raise ConfigError("A campaign needs at least one observation")
    if not initial_guesses:
        raise ConfigError("A campaign needs at least one initial guess")
    check_names(model, spec.names)
    guesses = [np.asarray(g, dtype=float).reshape(-1) for g in initial_guesses]
    for index, guess in enumerate(guesses):
        if guess.size != spec.size:
            raise ConfigError(
                f"Initial guess {index} has {guess.size} entries, expected {spec.size}"
            )
        outside = spec.violations(guess)
        if outside:
            raise ConfigError(
                f"Initial guess {index} must lie strictly inside the bounds: {', '.join(outside)}"
            )

    completed = dict(completed or {})
    residuals = [observation_residual(model, obs) for obs in observations]
    pending: List[tuple[int, int]] = []
    for s in range(len(observations)):
        for g in range(len(guesses)):
            if run_id(s, g) in completed:
                logger.warning(f"Skipping run {run_id(s, g)}: already completed")
            else:
                pending.append((s, g))
    logger.info(
        f"Campaign on {model.model_id}: {len(observations)} noise levels x "
        f"{len(guesses)} guesses, {len(pending)} runs pending"
    )

    def _run_one(task: tuple[int, int]) -> CampaignRun:
        s, g = task
        record = CampaignRun(
            sigma_index=s, guess_index=g, sigma=observations[s].sigma, x0=guesses[g].tolist()
        )
        try:
            record.result = run(residuals[s], guesses[g], spec, config)
        except BioinverseError as e:
            logger.warning(f"Run {record.run_id} failed: {e.message}")
            record.error = e.to_dict()
        else:
            logger.info(
                f"Run {record.run_id} (sigma={record.sigma:g}): {record.result.status} "
                f"after {record.result.iterations} iterations"
            )
        if on_result is not None:
            on_result(record)
        return record

    fresh = map_threaded(_run_one, pending, max_workers=workers)
    by_id = {**completed, **{record.run_id: record for record in fresh}}
    runs = [by_id[run_id(s, g)] for s in range(len(observations)) for g in range(len(guesses))]
    return CampaignResult(names=list(spec.names), runs=runs, summary=summarize(runs, spec.names))


def summary_header(names: Sequence[str]) -> List[str]:
    columns = ["sigma_mm", "mean_err_res_mm", "std_err_res_mm"]
    for name in names:
        columns += [f"mean_{name}", f"std_{name}"]
    return columns + ["n_completed", "n_failed"]


def write_summary_csv(
    summary: Sequence[SigmaSummary], names: Sequence[str], path: str | Path
) -> Path:
    """Write one row per noise level; statistics of levels without completed runs are ``nan``."""
    csv_path = Path(path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    with open(csv_path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(summary_header(names))
        for row in summary:
            cells = [row.sigma, row.mean_err_res, row.std_err_res]
            for name in names:
                cells += [row.mean[name], row.std[name]]
            writer.writerow([repr(float(c)) for c in cells] + [row.n_completed, row.n_failed])
    return csv_path


__all__ = [
    "CampaignRun",
    "SigmaSummary",
    "CampaignResult",
    "run_id",
    "summarize",
    "run_campaign",
    "summary_header",
    "write_summary_csv",
]

"""Staged identification: a tied (homogeneous) fit seeds the full fit."""

import logging
from typing import List, Mapping, Optional, Sequence

import numpy.typing as npt

from ..base import BioinverseRecord
from ..errors import ConfigError
from ..lmsolver import LMConfig, LMResult, ParameterSpec, run
from ..models import TiedModel, check_names
from ..models.base import ForwardModel
from .observation import Observation, observation_residual

logger = logging.getLogger(__name__)


class BootstrapResult(BioinverseRecord):
    reduced: LMResult
    """Result of the tied problem"""

    initial_guess: Optional[List[float]] = None
    """Expanded reduced solution used to start the full problem"""

    full: Optional[LMResult] = None
    """Result of the full problem; None when the tied stage failed"""

    @property
    def final(self) -> LMResult:
        return self.full if self.full is not None else self.reduced


def run_bootstrap(
    model: ForwardModel,
    observation: Observation,
    ties: Mapping[str, Sequence[str]],
    reduced_guess: npt.ArrayLike,
    reduced_spec: ParameterSpec,
    spec: ParameterSpec,
    config: Optional[LMConfig] = None,
    fixed: Optional[Mapping[str, float]] = None,
    workers: int = 1,
) -> BootstrapResult:
    """Solve the tied problem, expand its solution and solve the full problem from there.

    Args:
        model: Full (heterogeneous) model
        observation: Data both stages are fitted to
        ties: Reduced parameter -> full parameters it is copied into
        reduced_guess: Initial guess of the tied problem
        reduced_spec: Bounds of the tied problem, names in ``ties`` order
        spec: Bounds of the full problem, names in model order
        config: Iteration settings of both stages
        fixed: Full parameters held at a value during the tied stage
        workers: Concurrent evaluations per Jacobian

    Returns:
        BootstrapResult; ``full`` is None if the tied stage failed

    Raises:
        ConfigError: If names do not match or the expanded guess leaves the full bounds
    """
    tied = TiedModel(model, ties, fixed)
    check_names(tied, reduced_spec.names)
    check_names(model, spec.names)

    reduced = run(
        observation_residual(tied, observation), reduced_guess, reduced_spec, config, workers
    )
    logger.info(f"Tied stage: {reduced.status} at {reduced.as_dict()}")
    if reduced.failed:
        logger.warning(f"Tied stage ended with {reduced.status}; skipping the full problem")
        return BootstrapResult(reduced=reduced)

    guess = tied.expand(reduced.x_array)
    outside = spec.violations(guess)
    if outside:
        raise ConfigError(
            f"Tied solution {reduced.as_dict()} lies outside the full bounds for {outside}",
            {"parameters": outside, "x0": guess.tolist()},
        )
    full = run(observation_residual(model, observation), guess, spec, config, workers)
    logger.info(f"Full stage: {full.status} at {full.as_dict()}")
    return BootstrapResult(reduced=reduced, initial_guess=guess.tolist(), full=full)


__all__ = ["BootstrapResult", "run_bootstrap"]

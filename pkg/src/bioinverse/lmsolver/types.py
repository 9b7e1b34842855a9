"""Parameter, configuration and trace types for the Levenberg-Marquardt solver."""

from typing import Any, Dict, List, Literal, Optional

import numpy as np
import numpy.typing as npt
from pydantic import Field, model_validator

from ..base import BioinverseModel, BioinverseRecord
from ..constants import (
    FD_ALPHA,
    FD_BETA,
    LM_EPS_GRAD,
    LM_EPS_RES,
    LM_MU0,
    LM_MU_BLOWUP,
    LM_N_MAX,
)

ParameterVector = npt.NDArray[np.float64]
"""Parameter values in ParameterSpec order"""

StepStatus = Literal["accepted", "declined_bounds", "terminated"]

LMStatus = Literal[
    "converged_grad",
    "converged_res",
    "max_iterations",
    "mu_blowup",
    "model_failure",
]

CONVERGED_STATUSES: tuple[LMStatus, ...] = ("converged_grad", "converged_res")
FAILED_STATUSES: tuple[LMStatus, ...] = ("mu_blowup", "model_failure")


class ParameterSpec(BioinverseModel):
    """Named parameters with open box bounds lower < x < upper."""

    names: List[str]
    """Parameter identifiers, unique"""

    lower: List[float]
    """Lower bounds x_min"""

    upper: List[float]
    """Upper bounds x_max"""

    units: List[str] = Field(default_factory=list)
    """Unit strings, metadata only (empty means unit-less)"""

    @model_validator(mode="after")
    def _check_bounds(self) -> "ParameterSpec":
        n = len(self.names)
        if n == 0:
            raise ValueError("at least one parameter is required")
        if len(self.lower) != n or len(self.upper) != n:
            raise ValueError("names, lower and upper must have equal length")
        if self.units and len(self.units) != n:
            raise ValueError("units must be empty or match names")
        if len(set(self.names)) != n:
            raise ValueError(f"parameter names must be unique: {self.names}")
        for name, lo, hi in zip(self.names, self.lower, self.upper):
            if not lo < hi:
                raise ValueError(f"bounds of {name} must satisfy lower < upper ({lo}, {hi})")
        return self

    @property
    def size(self) -> int:
        return len(self.names)

    def unit(self, index: int) -> str:
        return self.units[index] if self.units else ""

    def contains(self, x: npt.ArrayLike) -> bool:
        """True if x lies strictly inside the bounds."""
        values = np.asarray(x, dtype=float)
        return bool(
            np.all(values > np.asarray(self.lower)) and np.all(values < np.asarray(self.upper))
        )

    def violations(self, x: npt.ArrayLike) -> List[str]:
        """Names of parameters not strictly inside their bounds."""
        values = np.asarray(x, dtype=float)
        return [
            name
            for name, value, lo, hi in zip(self.names, values, self.lower, self.upper)
            if not lo < value < hi
        ]


class LMConfig(BioinverseModel):
    """Tuning of the bounded Levenberg-Marquardt iteration."""

    alpha: float = Field(default=FD_ALPHA, ge=0.0)
    """Absolute finite-difference perturbation"""

    beta: float = Field(default=FD_BETA, ge=0.0)
    """Relative finite-difference perturbation"""

    mu0: float = Field(default=LM_MU0, gt=0.0)
    """Initial regularization"""

    eps_grad: float = Field(default=LM_EPS_GRAD, ge=0.0)
    """Converged once err_grad < eps_grad"""

    eps_res: float = Field(default=LM_EPS_RES, ge=0.0)
    """Converged once err_res < eps_res [mm]; 0 disables"""

    n_max: int = Field(default=LM_N_MAX, ge=1)
    """Maximum number of accepted steps"""

    mu_blowup: float = Field(default=LM_MU_BLOWUP, gt=1.0)
    """Terminate without result once mu > mu0 * mu_blowup"""

    @model_validator(mode="after")
    def _check_perturbation(self) -> "LMConfig":
        if not self.alpha + self.beta > 0.0:
            raise ValueError("alpha + beta must be positive")
        return self


class TraceRecord(BioinverseRecord):
    """One proposal of the iteration (accepted, declined or terminal)."""

    k: int
    """Iteration index: number of accepted steps before this record"""

    status: StepStatus

    x: List[float]
    """Current iterate x^k"""

    residual: List[float] = Field(default_factory=list)
    """Residual r^k at x^k (empty if the base point could not be evaluated)"""

    err_res: Optional[float] = None
    err_grad: Optional[float] = None
    mu: float

    step: Optional[List[float]] = None
    """Proposed step for accepted and declined records"""

    flipped: List[int] = Field(default_factory=list)
    """Parameters whose finite-difference perturbation was mirrored at a bound"""

    outcome: Optional[LMStatus] = None
    """Final status, set on the terminal record"""


class LMResult(BioinverseRecord):
    """Outcome of one inverse-analysis run."""

    status: LMStatus
    names: List[str]
    x: List[float]
    """Final parameters: the converged or last accepted iterate"""

    iterations: int
    """Accepted steps"""

    evaluations: int
    """Residual-function calls"""

    err_res: Optional[float] = None
    err_grad: Optional[float] = None
    mu: float
    message: str = ""
    failure: Optional[Dict[str, Any]] = None
    trace: List[TraceRecord] = Field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.status in CONVERGED_STATUSES

    @property
    def failed(self) -> bool:
        return self.status in FAILED_STATUSES

    @property
    def x_array(self) -> ParameterVector:
        return np.asarray(self.x, dtype=float)

    def as_dict(self) -> Dict[str, float]:
        return dict(zip(self.names, self.x))


__all__ = [
    "ParameterVector",
    "StepStatus",
    "LMStatus",
    "CONVERGED_STATUSES",
    "FAILED_STATUSES",
    "ParameterSpec",
    "LMConfig",
    "TraceRecord",
    "LMResult",
]

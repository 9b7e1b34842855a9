"""Bounded Levenberg-Marquardt least squares with finite-difference Jacobians."""

# Types
from .types import (
    CONVERGED_STATUSES,
    FAILED_STATUSES,
    LMConfig,
    LMResult,
    LMStatus,
    ParameterSpec,
    ParameterVector,
    StepStatus,
    TraceRecord,
)

# Building blocks
from .core import (
    ResidualFn,
    err_grad,
    err_res,
    evaluate_residual,
    fd_jacobian,
    fd_jacobian_columns,
    lm_step,
    perturb,
    update_mu,
)

# Iteration
from .optimizer import run

# Trace export
from .trace import TRACE_COLUMNS, read_trace_csv, trace_header, write_trace_csv

__all__ = [
    # Types
    "CONVERGED_STATUSES",
    "FAILED_STATUSES",
    "LMConfig",
    "LMResult",
    "LMStatus",
    "ParameterSpec",
    "ParameterVector",
    "StepStatus",
    "TraceRecord",
    # Building blocks
    "ResidualFn",
    "err_grad",
    "err_res",
    "evaluate_residual",
    "fd_jacobian",
    "fd_jacobian_columns",
    "lm_step",
    "perturb",
    "update_mu",
    # Iteration
    "run",
    # Trace export
    "TRACE_COLUMNS",
    "read_trace_csv",
    "trace_header",
    "write_trace_csv",
]

"""Bounded Levenberg-Marquardt iteration.

Steps are accepted whenever they stay strictly inside the parameter box; a step
that leaves the box is declined, mu is doubled and a new step is solved from the
same Jacobian and residual. mu is rescaled by the ratio of successive gradient
errors only after a step that reduced both errors.
"""

import logging
from typing import Optional

import numpy as np
import numpy.typing as npt

from ..errors import ConfigError, ModelFailure
from .core import (
    ResidualFn,
    err_grad,
    err_res,
    evaluate_residual,
    fd_jacobian_columns,
    lm_step,
    update_mu,
)
from .types import LMConfig, LMResult, LMStatus, ParameterSpec, StepStatus, TraceRecord

logger = logging.getLogger(__name__)


class _Iteration:
    """Mutable state of one run; produces trace records and the final result."""

    def __init__(self, spec: ParameterSpec, config: LMConfig, x0: npt.NDArray[np.float64]):
        self.spec = spec
        self.config = config
        self.x = x0
        self.r: Optional[npt.NDArray[np.float64]] = None
        self.mu = config.mu0
        self.k = 0
        self.evaluations = 0
        self.err_res: Optional[float] = None
        self.err_grad: Optional[float] = None
        self.flipped: list[int] = []
        self.trace: list[TraceRecord] = []

    def record(
        self,
        status: StepStatus,
        step: Optional[npt.NDArray[np.float64]] = None,
        outcome: Optional[LMStatus] = None,
    ) -> None:
        self.trace.append(
            TraceRecord(
                k=self.k,
                status=status,
                x=self.x.tolist(),
                residual=[] if self.r is None else self.r.tolist(),
                err_res=self.err_res,
                err_grad=self.err_grad,
                mu=self.mu,
                step=None if step is None else step.tolist(),
                flipped=list(self.flipped),
                outcome=outcome,
            )
        )

    def finish(
        self, status: LMStatus, message: str, failure: Optional[ModelFailure] = None
    ) -> LMResult:
        self.record("terminated", outcome=status)
        log = logger.warning if status in ("mu_blowup", "model_failure") else logger.info
        log(f"LM finished with {status} after {self.k} iterations: {message}")
        return LMResult(
            status=status,
            names=list(self.spec.names),
            x=self.x.tolist(),
            iterations=self.k,
            evaluations=self.evaluations,
            err_res=self.err_res,
            err_grad=self.err_grad,
            mu=self.mu,
            message=message,
            failure=None if failure is None else failure.to_dict(),
            trace=self.trace,
        )


def run(
    residual_fn: ResidualFn,
    x0: npt.ArrayLike,
    spec: ParameterSpec,
    config: Optional[LMConfig] = None,
    workers: int = 1,
) -> LMResult:
    """Minimize ||r(x)||^2 inside the open box of ``spec``.

    Args:
        residual_fn: Re-entrant residual function r(x) [mm]
        x0: Initial guess, strictly inside the bounds
        spec: Parameter names and bounds
        config: Iteration settings (defaults from bioinverse.constants)
        workers: Concurrent evaluations inside one Jacobian batch

    Returns:
        LMResult; model failures are reported as status ``model_failure``

    Raises:
        ConfigError: If x0 has the wrong size or lies outside the bounds
        SingularSystem: If the damped normal equations cannot be solved
        PerturbationUnderflow: If a finite-difference perturbation vanishes

    Example:
        >>> spec = ParameterSpec(names=["a"], lower=[-10.0], upper=[10.0])
        >>> result = run(lambda x: x - 1.0, [5.0], spec)
        >>> result.status
        'converged_grad'
    """
    config = config or LMConfig()
    x_start = np.array(x0, dtype=float).reshape(-1)
    if x_start.size != spec.size:
        raise ConfigError(
            f"Initial guess has {x_start.size} entries, expected {spec.size} ({spec.names})"
        )
    outside = spec.violations(x_start)
    if outside:
        raise ConfigError(
            f"Initial guess must lie strictly inside the bounds: {', '.join(outside)}",
            {"parameters": outside, "x0": x_start.tolist()},
        )

    state = _Iteration(spec, config, x_start)
    mu_limit = config.mu0 * config.mu_blowup
    previous: Optional[tuple[float, float]] = None

    try:
        state.evaluations += 1
        state.r = evaluate_residual(residual_fn, state.x)
    except ModelFailure as failure:
        return state.finish("model_failure", failure.message, failure)

    while True:
        r = state.r
        assert r is not None
        try:
            state.evaluations += spec.size
            J, state.flipped = fd_jacobian_columns(
                residual_fn, state.x, r, config.alpha, config.beta, spec, workers
            )
        except ModelFailure as failure:
            return state.finish("model_failure", failure.message, failure)

        state.err_grad = err_grad(J, r)
        state.err_res = err_res(r)
        if previous is not None:
            grad_prev, res_prev = previous
            improved = state.err_grad < grad_prev and state.err_res < res_prev
            if grad_prev > 0.0:
                state.mu = update_mu(state.mu, state.err_grad, grad_prev, improved)
        logger.info(
            f"LM k={state.k} err_res={state.err_res:.6e} err_grad={state.err_grad:.6e} "
            f"mu={state.mu:.3e}"
        )

        if state.err_res < config.eps_res:
            return state.finish("converged_res", f"err_res below {config.eps_res:g}")
        if state.err_grad < config.eps_grad:
            return state.finish("converged_grad", f"err_grad below {config.eps_grad:g}")
        if state.k >= config.n_max:
            return state.finish("max_iterations", f"reached n_max={config.n_max}")

        while True:
            step = lm_step(J, r, state.mu)
            proposal = state.x + step
            if spec.contains(proposal):
                break
            state.record("declined_bounds", step)
            logger.debug(
                f"Step declined at k={state.k}, outside bounds: {spec.violations(proposal)}"
            )
            state.mu *= 2.0
            if state.mu > mu_limit:
                return state.finish(
                    "mu_blowup",
                    f"mu={state.mu:.3e} exceeded mu0*{config.mu_blowup:g}; "
                    "optimum likely outside the parameter bounds",
                )

        state.record("accepted", step)
        try:
            state.evaluations += 1
            r_next = evaluate_residual(residual_fn, proposal)
        except ModelFailure as failure:
            return state.finish("model_failure", failure.message, failure)

        previous = (state.err_grad, state.err_res)
        state.x = proposal
        state.r = r_next
        state.k += 1


__all__ = ["run"]

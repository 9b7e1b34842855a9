"""Building blocks of the iteration: perturbation, Jacobian, damped step, errors."""

import logging
from typing import Callable, Optional

import numpy as np
import numpy.typing as npt
import scipy.linalg

from ..constants import LM_CONDITION_LIMIT, LM_DIAG_FLOOR, PERTURBATION_UNDERFLOW
from ..errors import ModelEvaluationError, ModelFailure, PerturbationUnderflow, SingularSystem
from ..parallel import map_threaded
from .types import ParameterSpec, ParameterVector

logger = logging.getLogger(__name__)

ResidualFn = Callable[[ParameterVector], npt.NDArray[np.float64]]


def perturb(
    x: npt.ArrayLike, i: int, alpha: float, beta: float
) -> tuple[ParameterVector, float]:
    """Copy of x with component i moved to x_i + alpha + beta * x_i.

    Returns:
        Tuple of (perturbed vector, delta)

    Raises:
        PerturbationUnderflow: If |delta| < 1e-300
    """
    values = np.array(x, dtype=float)
    if not 0 <= i < values.size:
        raise IndexError(f"Parameter index {i} out of range for {values.size} parameters")
    delta = alpha + beta * values[i]
    if abs(delta) < PERTURBATION_UNDERFLOW:
        raise PerturbationUnderflow(i, float(delta))
    values[i] = values[i] + delta
    return values, float(delta)


def evaluate_residual(
    residual_fn: ResidualFn, x: ParameterVector, index: Optional[int] = None
) -> npt.NDArray[np.float64]:
    """Call the residual function, mapping model failures to ModelFailure."""
    try:
        r = np.asarray(residual_fn(np.array(x, dtype=float)), dtype=float)
    except ModelEvaluationError as e:
        raise ModelFailure(index, e) from e
    if r.ndim != 1 or r.size == 0:
        raise ModelFailure(index, ValueError(f"residual must be a non-empty vector, got {r.shape}"))
    if not np.all(np.isfinite(r)):
        raise ModelFailure(index, ValueError("residual contains non-finite entries"))
    return r


def fd_jacobian_columns(
    residual_fn: ResidualFn,
    x: npt.ArrayLike,
    r_at_x: npt.ArrayLike,
    alpha: float,
    beta: float,
    spec: Optional[ParameterSpec] = None,
    workers: int = 1,
) -> tuple[npt.NDArray[np.float64], list[int]]:
    """Forward-difference Jacobian plus the indices whose perturbation was mirrored.

    When ``spec`` is given, a perturbation that would leave the open box is
    applied with the opposite sign so every model evaluation stays feasible.
    """
    x0 = np.asarray(x, dtype=float)
    r0 = np.asarray(r_at_x, dtype=float)
    points: list[ParameterVector] = []
    deltas: list[float] = []
    flipped: list[int] = []
    for i in range(x0.size):
        point, delta = perturb(x0, i, alpha, beta)
        if spec is not None and not spec.lower[i] < point[i] < spec.upper[i]:
            delta = -delta
            point[i] = x0[i] + delta
            flipped.append(i)
            logger.warning(
                f"Perturbation of {spec.names[i]} mirrored at its bound (delta={delta:.3e})"
            )
        points.append(point)
        deltas.append(delta)

    columns = map_threaded(
        lambda p: np.asarray(residual_fn(p), dtype=float),
        points,
        max_workers=workers,
        return_exceptions=True,
    )

    jacobian = np.empty((r0.size, x0.size))
    for i, column in enumerate(columns):
        if isinstance(column, ModelEvaluationError):
            raise ModelFailure(i, column)
        if isinstance(column, Exception):
            raise column
        if column.shape != r0.shape or not np.all(np.isfinite(column)):
            raise ModelFailure(i, ValueError("perturbed residual is malformed or non-finite"))
        jacobian[:, i] = (column - r0) / deltas[i]
        logger.debug(f"Jacobian column {i}: delta={deltas[i]:.3e}")
    return jacobian, flipped


def fd_jacobian(
    residual_fn: ResidualFn,
    x: npt.ArrayLike,
    r_at_x: npt.ArrayLike,
    alpha: float,
    beta: float,
    spec: Optional[ParameterSpec] = None,
    workers: int = 1,
) -> npt.NDArray[np.float64]:
    """Forward-difference Jacobian J[j, i] = (r_j(x~_i) - r_j(x)) / delta_i.

    The n_x perturbed evaluations are independent; with ``workers > 1`` they run
    concurrently and are assembled by column index.

    Raises:
        ModelFailure: With the index of the first failing perturbed column
    """
    jacobian, _ = fd_jacobian_columns(residual_fn, x, r_at_x, alpha, beta, spec, workers)
    return jacobian


def lm_step(
    jacobian: npt.ArrayLike, residual: npt.ArrayLike, mu: float
) -> npt.NDArray[np.float64]:
    """Solve (J^T J + mu diag(J^T J)) dx = -J^T r.

    The system is solved in Jacobi-scaled form, so its condition estimate does
    not depend on the units of the parameters. A diagonal entry of J^T J at or
    below the floor of 1e-30 leaves the damped system singular.

    Raises:
        SingularSystem: If a parameter does not influence the residual, or the
            scaled damped matrix has condition estimate above 1e15
    """
    J = np.asarray(jacobian, dtype=float)
    r = np.asarray(residual, dtype=float)
    normal = J.T @ J
    diagonal = np.diag(normal)
    insensitive = np.flatnonzero(diagonal <= LM_DIAG_FLOOR)
    if insensitive.size:
        raise SingularSystem(np.inf, insensitive.tolist())
    scale = 1.0 / np.sqrt(diagonal)
    system = (normal + mu * np.diag(diagonal)) * np.outer(scale, scale)
    condition = float(np.linalg.cond(system))
    if not np.isfinite(condition) or condition > LM_CONDITION_LIMIT:
        raise SingularSystem(condition)
    lu_piv = scipy.linalg.lu_factor(system)
    step = -scipy.linalg.lu_solve(lu_piv, scale * (J.T @ r)) * scale
    if not np.all(np.isfinite(step)):
        raise SingularSystem(condition)
    return np.asarray(step)


def err_grad(jacobian: npt.ArrayLike, residual: npt.ArrayLike) -> float:
    """Gradient-based error ||J^T r||_2."""
    return float(np.linalg.norm(np.asarray(jacobian).T @ np.asarray(residual)))


def err_res(residual: npt.ArrayLike, n_r: Optional[int] = None) -> float:
    """Residual error ||r||_2 / sqrt(n_r) [mm]."""
    r = np.asarray(residual, dtype=float)
    n = r.size if n_r is None else n_r
    if n < 1:
        raise ValueError("err_res needs at least one residual")
    return float(np.linalg.norm(r) / np.sqrt(n))


def update_mu(mu_k: float, err_grad_k: float, err_grad_km1: float, improved: bool) -> float:
    """Scale mu by err_grad^k / err_grad^(k-1) when the step improved both errors."""
    if err_grad_km1 <= 0.0:
        raise ValueError("previous err_grad must be positive")
    if not improved:
        return mu_k
    return mu_k * err_grad_k / err_grad_km1


__all__ = [
    "ResidualFn",
    "perturb",
    "evaluate_residual",
    "fd_jacobian_columns",
    "fd_jacobian",
    "lm_step",
    "err_grad",
    "err_res",
    "update_mu",
]

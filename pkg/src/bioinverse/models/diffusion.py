"""Steady 1D diffusion-reaction through a boundary layer into the biofilm.

The fluid layer 0 <= z <= L_F carries pure diffusion, the biofilm layer
L_F <= z <= L_F + L_S diffusion with a Monod sink. Concentration is prescribed
at the bulk-fluid edge, the substratum is impermeable, and concentration and
flux are continuous at the interface. Each layer is discretized with grid_n
nodes (the interface node shared) by node-centered finite volumes, which is
second-order accurate and conserves the interface flux exactly.
"""

import logging
from typing import Literal, Union

import numpy as np
import numpy.typing as npt
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from pydantic import Field

from ..base import BioinverseModel
from ..constants import FLUX_MIN_GRID, FLUX_NEWTON_MAX, FLUX_NEWTON_TOL
from ..errors import NewtonDivergence

logger = logging.getLogger(__name__)

Kinetics = Literal["monod", "linear"]
"""Monod sink K1R phi / (K2R + phi), or its dilute limit K1R phi / K2R"""


class MonodParams(BioinverseModel):
    """Monod consumption kinetics."""

    K1R: float = Field(ge=0.0)
    """Maximum reaction rate [mol/(mm^3 s)]"""

    K2R: float = Field(gt=0.0)
    """Half saturation concentration [mol/mm^3]"""


class DiffusionProfile(BioinverseModel):
    """Layer geometry, diffusivities and inlet concentration."""

    L_fluid: float = Field(gt=0.0)
    """Boundary-layer thickness [mm]"""

    L_solid: float = Field(gt=0.0)
    """Biofilm thickness [mm]"""

    D_F: float = Field(gt=0.0)
    """Diffusivity in the fluid [mm^2/s]"""

    D_S: float = Field(gt=0.0)
    """Diffusivity in the biofilm [mm^2/s]"""

    phi_in: float = Field(ge=0.0)
    """Bulk concentration [mol/mm^3]"""

    grid_n: int = Field(default=64, ge=FLUX_MIN_GRID)
    """Nodes per layer"""


def monod_rate(
    phi: Union[float, npt.NDArray[np.float64]], params: MonodParams
) -> Union[float, npt.NDArray[np.float64]]:
    """Consumption rate K1R * phi / (K2R + phi) [mol/(mm^3 s)]."""
    return params.K1R * phi / (params.K2R + phi)


def _rate_and_slope(
    phi: npt.NDArray[np.float64], monod: MonodParams, kinetics: Kinetics
) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    if kinetics == "linear":
        k = monod.K1R / monod.K2R
        return k * phi, np.full_like(phi, k)
    denominator = monod.K2R + phi
    return monod.K1R * phi / denominator, monod.K1R * monod.K2R / denominator**2


def _assemble(
    profile: DiffusionProfile,
) -> tuple[sp.csr_matrix, npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    """Linear operator A, right-hand side b and reaction weights w.

    Rows are scaled to concentration units; the discrete equations read
    A phi + w * R(phi) = b.
    """
    n = profile.grid_n
    m = n - 1  # interface node
    size = 2 * n - 1
    h_f = profile.L_fluid / (n - 1)
    h_s = profile.L_solid / (n - 1)
    g_f = profile.D_F / h_f
    g_s = profile.D_S / h_s

    main = np.full(size, 2.0)
    lower = np.full(size - 1, -1.0)
    upper = np.full(size - 1, -1.0)
    weights = np.zeros(size)
    b = np.zeros(size)

    main[0], upper[0] = 1.0, 0.0
    b[0] = profile.phi_in

    scale = g_f + g_s
    lower[m - 1] = -g_f / scale
    main[m] = 1.0
    upper[m] = -g_s / scale
    weights[m] = 0.5 * h_s / scale

    weights[m + 1 :] = h_s**2 / profile.D_S
    main[-1], lower[-1] = 1.0, -1.0
    weights[-1] = 0.5 * h_s**2 / profile.D_S

    A = sp.diags([lower, main, upper], [-1, 0, 1], format="csr")
    return A, b, weights


def solve_concentration(
    profile: DiffusionProfile, monod: MonodParams, kinetics: Kinetics = "monod"
) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    """Nodal positions z [mm] and concentrations phi [mol/mm^3].

    Raises:
        NewtonDivergence: If the residual does not drop below 1e-12 * phi_in
            within 50 iterations
    """
    n = profile.grid_n
    z = np.concatenate(
        [
            np.linspace(0.0, profile.L_fluid, n),
            profile.L_fluid + np.linspace(0.0, profile.L_solid, n)[1:],
        ]
    )
    A, b, weights = _assemble(profile)
    tolerance = FLUX_NEWTON_TOL * profile.phi_in
    phi = np.full(z.size, profile.phi_in)

    residual_norm = np.inf
    for iteration in range(FLUX_NEWTON_MAX + 1):
        rate, slope = _rate_and_slope(phi, monod, kinetics)
        residual = A @ phi + weights * rate - b
        residual_norm = float(np.max(np.abs(residual)))
        logger.debug(f"Flux Newton {iteration}: |F| = {residual_norm:.3e}")
        if residual_norm <= tolerance:
            return z, phi
        if iteration == FLUX_NEWTON_MAX:
            break
        tangent = (A + sp.diags(weights * slope)).tocsc()
        phi = np.maximum(phi - spla.spsolve(tangent, residual), 0.0)

    raise NewtonDivergence("diffusion-reaction", FLUX_NEWTON_MAX, residual_norm, tolerance)


def solve_flux(
    profile: DiffusionProfile, monod: MonodParams, kinetics: Kinetics = "monod"
) -> float:
    """Nutrient flux into the biofilm at the interface h^S [mol/(mm^2 s)].

    Args:
        profile: Layer geometry, diffusivities, inlet concentration and grid
        monod: Consumption kinetics
        kinetics: ``"monod"`` or the dilute ``"linear"`` limit K1R / K2R * phi

    Returns:
        D_F * (phi_in - phi_interface) / L_F, non-negative

    Raises:
        NewtonDivergence: If the nonlinear solve does not converge
    """
    _, phi = solve_concentration(profile, monod, kinetics)
    phi_interface = phi[profile.grid_n - 1]
    return max(0.0, float(profile.D_F * (profile.phi_in - phi_interface) / profile.L_fluid))


__all__ = [
    "Kinetics",
    "MonodParams",
    "DiffusionProfile",
    "monod_rate",
    "solve_concentration",
    "solve_flux",
]

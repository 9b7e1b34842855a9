"""Saint-Venant-Kirchhoff material in plane strain.

The strain energy density is

    W(E) = lambda / 2 * tr(E)^2 + mu * tr(E^2)

with the Green-Lagrange strain E, so the second Piola-Kirchhoff stress
S = lambda tr(E) I + 2 mu E is linear in E and reduces to Hooke's law for small
strains.
"""

import numpy as np
import numpy.typing as npt
from pydantic import Field, field_validator

from ..base import BioinverseModel


class Material(BioinverseModel):
    """Elastic constants of one subdomain."""

    E: float = Field(gt=0.0)
    """Young's modulus [Pa]"""

    nu: float
    """Poisson's ratio [-]"""

    @field_validator("nu")
    @classmethod
    def _check_nu(cls, value: float) -> float:
        if not -1.0 < value < 0.5:
            raise ValueError(f"Poisson's ratio must satisfy -1 < nu < 0.5, got {value}")
        return value

    @property
    def lame_lambda(self) -> float:
        """First Lame constant E nu / ((1 + nu)(1 - 2 nu)) [Pa]."""
        return self.E * self.nu / ((1.0 + self.nu) * (1.0 - 2.0 * self.nu))

    @property
    def lame_mu(self) -> float:
        """Shear modulus E / (2 (1 + nu)) [Pa]."""
        return self.E / (2.0 * (1.0 + self.nu))

    def elasticity_matrix(self) -> npt.NDArray[np.float64]:
        """Plane-strain tangent in Voigt order (11, 22, 12)."""
        lam, mu = self.lame_lambda, self.lame_mu
        return np.array([[lam + 2.0 * mu, lam, 0.0], [lam, lam + 2.0 * mu, 0.0], [0.0, 0.0, mu]])


def lame_arrays(
    materials: list[Material],
) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    """Per-element Lame constants for a per-element material list."""
    lam = np.array([m.lame_lambda for m in materials], dtype=float)
    mu = np.array([m.lame_mu for m in materials], dtype=float)
    return lam, mu


def pk2_stress(
    strain: npt.NDArray[np.float64],
    lam: npt.NDArray[np.float64],
    mu: npt.NDArray[np.float64],
) -> npt.NDArray[np.float64]:
    """Second Piola-Kirchhoff stress for strains of shape (..., 2, 2).

    ``lam`` and ``mu`` broadcast against the leading axes of ``strain``.
    """
    trace = np.trace(strain, axis1=-2, axis2=-1)
    lam_b = np.asarray(lam)[..., None, None]
    mu_b = np.asarray(mu)[..., None, None]
    return np.asarray(lam_b * trace[..., None, None] * np.eye(2) + 2.0 * mu_b * strain)


def energy_density(
    strain: npt.NDArray[np.float64],
    lam: npt.NDArray[np.float64],
    mu: npt.NDArray[np.float64],
) -> npt.NDArray[np.float64]:
    """Strain energy per unit reference area [Pa] for strains of shape (..., 2, 2)."""
    trace = np.trace(strain, axis1=-2, axis2=-1)
    squared = np.einsum("...ij,...ij->...", strain, strain)
    return np.asarray(0.5 * np.asarray(lam) * trace**2 + np.asarray(mu) * squared)


__all__ = ["Material", "lame_arrays", "pk2_stress", "energy_density"]

"""Static total-Lagrangian solve with incremental loading and full Newton iterations."""

import logging
from typing import Mapping, Optional

import numpy as np
import numpy.typing as npt
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..constants import FEM_LOAD_INCREMENTS, FEM_MAX_NEWTON, FEM_NEWTON_TOL
from ..errors import ConfigError, NewtonDivergence
from .element import (
    GAUSS_WEIGHTS,
    QuadKinematics,
    element_energies,
    element_forces,
    element_stresses,
    element_tangents,
)
from .loads import TractionLoad
from .material import Material, lame_arrays
from .mesh import Mesh2D

logger = logging.getLogger(__name__)

Materials = Mapping[str, Material]
"""Material per subdomain id"""


class SolidState:
    """Converged nodal displacements u^S [mm], shape (n_nodes, 2)."""

    def __init__(
        self,
        displacements: npt.NDArray[np.float64],
        converged: bool,
        iterations: int,
        residual_norm: float = 0.0,
    ):
        self.displacements = displacements
        self.converged = converged
        self.iterations = iterations
        self.residual_norm = residual_norm

    def __repr__(self) -> str:
        return (
            f"SolidState(max|u|={np.abs(self.displacements).max():.3e} mm, "
            f"converged={self.converged}, iterations={self.iterations})"
        )


def _element_lame(
    mesh: Mesh2D, materials: Materials
) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    missing = sorted(set(mesh.elem_material) - set(materials))
    if missing:
        raise ConfigError(f"No material given for subdomains {missing}")
    return lame_arrays([materials[m] for m in mesh.elem_material])


def _kinematics(mesh: Mesh2D, u: npt.ArrayLike) -> QuadKinematics:
    values = np.asarray(u, dtype=float).reshape(mesh.n_nodes, 2)
    return QuadKinematics(mesh.gradients, values[mesh.elems])


def _weights(mesh: Mesh2D) -> npt.NDArray[np.float64]:
    return np.asarray(mesh.jacobians * GAUSS_WEIGHTS)


def _element_dofs(mesh: Mesh2D) -> npt.NDArray[np.int_]:
    return np.asarray((2 * mesh.elems[:, :, None] + np.arange(2)).reshape(mesh.n_elems, 8))


def assemble_internal_forces(
    mesh: Mesh2D, materials: Materials, u: npt.ArrayLike
) -> tuple[npt.NDArray[np.float64], sp.csr_matrix]:
    """Global internal force vector and consistent tangent.

    Args:
        mesh: Reference mesh
        materials: Material per subdomain id
        u: Nodal displacements, shape (n_nodes, 2) or flat

    Returns:
        Internal forces of shape (2 n_nodes,) and the sparse tangent

    Raises:
        ElementInverted: If det F <= 0 at a Gauss point
    """
    lam, mu = _element_lame(mesh, materials)
    kin = _kinematics(mesh, u)
    weights = _weights(mesh)
    dofs = _element_dofs(mesh)
    n_dofs = 2 * mesh.n_nodes

    f_e = element_forces(kin, weights, lam, mu)
    K_e = element_tangents(kin, weights, lam, mu)
    f = np.bincount(dofs.ravel(), weights=f_e.ravel(), minlength=n_dofs)
    rows = np.broadcast_to(dofs[:, :, None], K_e.shape).ravel()
    cols = np.broadcast_to(dofs[:, None, :], K_e.shape).ravel()
    K = sp.coo_matrix((K_e.ravel(), (rows, cols)), shape=(n_dofs, n_dofs)).tocsr()
    return f, K


def gauss_point_stresses(
    mesh: Mesh2D, materials: Materials, u: npt.ArrayLike
) -> npt.NDArray[np.float64]:
    """Second Piola-Kirchhoff stress [Pa] at every Gauss point, shape (m, 4, 2, 2)."""
    lam, mu = _element_lame(mesh, materials)
    return element_stresses(_kinematics(mesh, u), lam, mu)


def gauss_point_strains(mesh: Mesh2D, u: npt.ArrayLike) -> npt.NDArray[np.float64]:
    """Green-Lagrange strain at every Gauss point, shape (m, 4, 2, 2)."""
    return _kinematics(mesh, u).strain


def strain_energy(mesh: Mesh2D, materials: Materials, u: npt.ArrayLike) -> float:
    """Total stored energy per unit thickness."""
    lam, mu = _element_lame(mesh, materials)
    return float(element_energies(_kinematics(mesh, u), _weights(mesh), lam, mu).sum())


def load_factors(increments: int) -> npt.NDArray[np.float64]:
    """Cosine ramp 0 -> 1 sampled at the end of each increment."""
    steps = np.arange(1, increments + 1) / increments
    return np.asarray(0.5 * (1.0 - np.cos(np.pi * steps)))


def solve_static(
    mesh: Mesh2D,
    materials: Materials,
    load: TractionLoad,
    newton_tol: float = FEM_NEWTON_TOL,
    max_newton: int = FEM_MAX_NEWTON,
    increments: int = FEM_LOAD_INCREMENTS,
) -> SolidState:
    """Equilibrium under dead tractions with the Dirichlet node sets clamped.

    Each increment iterates until ``||r_free|| < newton_tol * ||f_ext||``.

    Raises:
        ConfigError: If no Dirichlet node set is present
        NewtonDivergence: If an increment needs more than ``max_newton`` iterations
        ElementInverted: If an element turns inside out
    """
    fixed = mesh.constrained_dofs()
    if fixed.size == 0:
        raise ConfigError("Static solve needs a non-empty Dirichlet node set")
    if increments < 1:
        raise ConfigError(f"Need at least one load increment, got {increments}")
    load.check_on(mesh)

    n_dofs = 2 * mesh.n_nodes
    free = np.setdiff1d(np.arange(n_dofs), fixed)
    f_ext = load.external_force(mesh)
    scale = float(np.linalg.norm(f_ext[free]))
    u = np.zeros(n_dofs)
    if scale == 0.0:
        return SolidState(u.reshape(-1, 2), converged=True, iterations=0)

    tolerance = newton_tol * scale
    total = 0
    norm = np.inf
    for step, factor in enumerate(load_factors(increments), start=1):
        for iteration in range(max_newton + 1):
            f_int, K = assemble_internal_forces(mesh, materials, u)
            residual = (f_int - factor * f_ext)[free]
            norm = float(np.linalg.norm(residual))
            logger.debug(f"Increment {step}/{increments} Newton {iteration}: |r| = {norm:.3e}")
            if norm < tolerance:
                break
            if iteration == max_newton:
                raise NewtonDivergence("solid", max_newton, norm, tolerance)
            K_ff = K[free][:, free].tocsc()
            u[free] -= spla.spsolve(K_ff, residual)
            total += 1
    return SolidState(u.reshape(-1, 2), converged=True, iterations=total, residual_norm=norm)


def deformed_nodes(
    mesh: Mesh2D, state: SolidState, node_set: Optional[str] = None
) -> npt.NDArray[np.float64]:
    """Current node positions, optionally restricted to an ordered node set."""
    positions = mesh.nodes + state.displacements
    return positions if node_set is None else positions[mesh.node_set(node_set)]


__all__ = [
    "Materials",
    "SolidState",
    "assemble_internal_forces",
    "gauss_point_stresses",
    "gauss_point_strains",
    "strain_energy",
    "load_factors",
    "solve_static",
    "deformed_nodes",
]

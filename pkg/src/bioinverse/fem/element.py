"""Bilinear quadrilateral in the total-Lagrangian formulation, vectorized over elements.

All arrays carry the element index first and the Gauss point second, so one call
evaluates a whole mesh. Local node order is counter-clockwise; local edge k runs
from node k to node (k + 1) % 4.
"""

import numpy as np
import numpy.typing as npt

from ..errors import ElementInverted
from .material import energy_density, pk2_stress

_G = 1.0 / np.sqrt(3.0)

GAUSS_POINTS = np.array([[-_G, -_G], [_G, -_G], [_G, _G], [-_G, _G]])
"""2 x 2 Gauss points in the parent square"""

GAUSS_WEIGHTS = np.ones(4)

LOCAL_EDGES = ((0, 1), (1, 2), (2, 3), (3, 0))


def shape_derivatives(xi: float, eta: float) -> npt.NDArray[np.float64]:
    """dN/dxi of the four bilinear shape functions, shape (4, 2)."""
    return np.array(
        [
            [eta / 4 - 1 / 4, xi / 4 - 1 / 4],
            [-eta / 4 + 1 / 4, -xi / 4 - 1 / 4],
            [eta / 4 + 1 / 4, xi / 4 + 1 / 4],
            [-eta / 4 - 1 / 4, -xi / 4 + 1 / 4],
        ]
    )


_DN_DXI = np.stack([shape_derivatives(xi, eta) for xi, eta in GAUSS_POINTS])


def reference_gradients(
    coords: npt.NDArray[np.float64],
) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    """Shape-function gradients dN/dX and Jacobian determinants.

    Args:
        coords: Element node coordinates, shape (m, 4, 2)

    Returns:
        Gradients of shape (m, 4 Gauss points, 4 nodes, 2) and det(dX/dxi) of
        shape (m, 4)
    """
    J = np.einsum("mni,gnj->mgij", coords, _DN_DXI)
    det = J[..., 0, 0] * J[..., 1, 1] - J[..., 0, 1] * J[..., 1, 0]
    inverse = np.empty_like(J)
    inverse[..., 0, 0] = J[..., 1, 1]
    inverse[..., 0, 1] = -J[..., 0, 1]
    inverse[..., 1, 0] = -J[..., 1, 0]
    inverse[..., 1, 1] = J[..., 0, 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        inverse /= det[..., None, None]
    B = np.einsum("gnj,mgji->mgni", _DN_DXI, inverse)
    return B, det


class QuadKinematics:
    """Deformation state of every element at every Gauss point.

    Raises:
        ElementInverted: If det F <= 0 at any Gauss point
    """

    def __init__(self, B: npt.NDArray[np.float64], u_e: npt.NDArray[np.float64]):
        H = np.einsum("mna,mgnb->mgab", u_e, B)
        self.B = B
        self.F = H + np.eye(2)
        self.strain = 0.5 * (H + np.swapaxes(H, -1, -2) + np.einsum("mgca,mgcb->mgab", H, H))
        det_f = self.F[..., 0, 0] * self.F[..., 1, 1] - self.F[..., 0, 1] * self.F[..., 1, 0]
        if np.any(det_f <= 0.0):
            element, _ = np.unravel_index(int(np.argmin(det_f)), det_f.shape)
            raise ElementInverted(int(element), float(det_f.min()))
        self.det_f = det_f


def element_forces(
    kin: QuadKinematics,
    weights: npt.NDArray[np.float64],
    lam: npt.NDArray[np.float64],
    mu: npt.NDArray[np.float64],
) -> npt.NDArray[np.float64]:
    """Internal nodal forces, shape (m, 8), dof order (node, component)."""
    S = pk2_stress(kin.strain, lam[:, None], mu[:, None])
    P = np.einsum("mgai,mgij->mgaj", kin.F, S)
    f = np.einsum("mg,mgaj,mgnj->mna", weights, P, kin.B)
    return np.asarray(f.reshape(len(f), 8))


def element_tangents(
    kin: QuadKinematics,
    weights: npt.NDArray[np.float64],
    lam: npt.NDArray[np.float64],
    mu: npt.NDArray[np.float64],
) -> npt.NDArray[np.float64]:
    """Consistent tangent matrices, shape (m, 8, 8): material plus geometric part."""
    F, B = kin.F, kin.B
    S = pk2_stress(kin.strain, lam[:, None], mu[:, None])
    G = np.einsum("mgai,mgni->mgna", F, B)
    FF = np.einsum("mgai,mgci->mgac", F, F)
    BB = np.einsum("mgni,mgpi->mgnp", B, B)
    BSB = np.einsum("mgni,mgij,mgpj->mgnp", B, S, B)

    volumetric = np.einsum("mgna,mgpc->mgnapc", G, G)
    shear = np.einsum("mgac,mgnp->mgnapc", FF, BB) + np.einsum("mgpa,mgnc->mgnapc", G, G)
    geometric = np.einsum("mgnp,ac->mgnapc", BSB, np.eye(2))
    per_element = (slice(None),) + (None,) * 5
    K = lam[per_element] * volumetric + mu[per_element] * shear + geometric
    K = np.einsum("mg,mgnapc->mnapc", weights, K)
    return np.asarray(K.reshape(len(K), 8, 8))


def element_stresses(
    kin: QuadKinematics, lam: npt.NDArray[np.float64], mu: npt.NDArray[np.float64]
) -> npt.NDArray[np.float64]:
    """Second Piola-Kirchhoff stress at every Gauss point, shape (m, 4, 2, 2)."""
    return pk2_stress(kin.strain, lam[:, None], mu[:, None])


def element_energies(
    kin: QuadKinematics,
    weights: npt.NDArray[np.float64],
    lam: npt.NDArray[np.float64],
    mu: npt.NDArray[np.float64],
) -> npt.NDArray[np.float64]:
    """Strain energy per element (per unit thickness)."""
    W = energy_density(kin.strain, lam[:, None], mu[:, None])
    return np.asarray(np.einsum("mg,mg->m", weights, W))


__all__ = [
    "GAUSS_POINTS",
    "GAUSS_WEIGHTS",
    "LOCAL_EDGES",
    "shape_derivatives",
    "reference_gradients",
    "QuadKinematics",
    "element_forces",
    "element_tangents",
    "element_stresses",
    "element_energies",
]

"""Dead tractions on mesh boundary edges."""

import logging
from typing import List, Optional, Sequence

import numpy as np
import numpy.typing as npt
from pydantic import model_validator

from ..base import BioinverseModel
from ..errors import ConfigError, InvalidGeometry
from .element import LOCAL_EDGES
from .mesh import Mesh2D

logger = logging.getLogger(__name__)


class TractionLoad(BioinverseModel):
    """Constant nominal traction [Pa] per boundary edge (element, local edge)."""

    edges: List[tuple[int, int]]
    tractions: List[tuple[float, float]]

    @model_validator(mode="after")
    def _check_lengths(self) -> "TractionLoad":
        if len(self.edges) != len(self.tractions):
            raise ValueError("edges and tractions must have equal length")
        return self

    def check_on(self, mesh: Mesh2D) -> None:
        """Raise InvalidGeometry unless every edge lies on the mesh boundary."""
        boundary = mesh.boundary_edges()
        inner = [edge for edge in self.edges if tuple(edge) not in boundary]
        if inner:
            raise InvalidGeometry(
                f"Traction edges {inner[:5]} are not on the mesh boundary",
                {"edges": [list(e) for e in inner]},
            )

    def external_force(self, mesh: Mesh2D) -> npt.NDArray[np.float64]:
        """Consistent nodal forces: half the edge resultant to each end node."""
        f = np.zeros(2 * mesh.n_nodes)
        for (element, k), traction in zip(self.edges, self.tractions):
            a, b = (int(mesh.elems[element][i]) for i in LOCAL_EDGES[k])
            length = float(np.linalg.norm(mesh.nodes[b] - mesh.nodes[a]))
            share = 0.5 * length * np.asarray(traction, dtype=float)
            f[2 * a : 2 * a + 2] += share
            f[2 * b : 2 * b + 2] += share
        return f


class TractionEntry(BioinverseModel):
    """Traction on all boundary edges of one node set.

    Either ``vector`` [Pa] is given, or ``pressure`` acting against the outward
    normal plus ``shear`` along +x (the flow direction).
    """

    node_set: str
    pressure: float = 0.0
    shear: float = 0.0
    vector: Optional[tuple[float, float]] = None

    @model_validator(mode="after")
    def _exclusive(self) -> "TractionEntry":
        if self.vector is not None and (self.pressure or self.shear):
            raise ValueError("give either vector or pressure/shear, not both")
        return self


def edge_outward_normal(mesh: Mesh2D, element: int, k: int) -> npt.NDArray[np.float64]:
    a, b = (int(mesh.elems[element][i]) for i in LOCAL_EDGES[k])
    e = mesh.nodes[b] - mesh.nodes[a]
    return np.array([e[1], -e[0]]) / float(np.linalg.norm(e))


def traction_load(
    mesh: Mesh2D, entries: Sequence[TractionEntry], scale: float = 1.0
) -> TractionLoad:
    """Per-edge tractions from node-set entries; later entries add to earlier ones.

    Raises:
        ConfigError: If a node set is missing or has no boundary edges
    """
    totals: dict[tuple[int, int], npt.NDArray[np.float64]] = {}
    for entry in entries:
        edges = mesh.edges_on(entry.node_set)
        if not edges:
            raise ConfigError(f"Node set '{entry.node_set}' has no boundary edges to load")
        for element, k in edges:
            if entry.vector is not None:
                t = np.asarray(entry.vector, dtype=float)
            else:
                n = edge_outward_normal(mesh, element, k)
                t = -entry.pressure * n + np.array([entry.shear, 0.0])
            totals[(element, k)] = totals.get((element, k), np.zeros(2)) + scale * t
    edges_sorted = sorted(totals)
    logger.debug(f"Traction load on {len(edges_sorted)} edges")
    return TractionLoad(
        edges=edges_sorted,
        tractions=[(float(totals[e][0]), float(totals[e][1])) for e in edges_sorted],
    )


__all__ = ["TractionLoad", "TractionEntry", "edge_outward_normal", "traction_load"]

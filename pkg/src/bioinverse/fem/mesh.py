"""Quadrilateral meshes: container, generators and JSON I/O.

Node sets are ordered index lists. The ``interface`` set of a generated mesh is
ordered along the fluid-biofilm interface with the biofilm on the right, so it
maps directly onto an :class:`~bioinverse.geometry.InterfaceCurve`.
"""

import json
import logging
from pathlib import Path
from typing import Dict, Mapping, Optional, Sequence

import numpy as np
import numpy.typing as npt

from ..errors import ConfigError, InvalidGeometry
from .element import LOCAL_EDGES, reference_gradients

logger = logging.getLogger(__name__)

DIRICHLET_SETS = {"dirichlet": (0, 1), "dirichlet_x": (0,), "dirichlet_y": (1,)}
"""Node sets whose displacement components are fixed to zero"""


class Mesh2D:
    """Nodes [mm], counter-clockwise quadrilaterals, per-element subdomain ids.

    Raises:
        InvalidGeometry: If connectivity indices are invalid or an element has a
            non-positive Jacobian at a Gauss point
    """

    def __init__(
        self,
        nodes: npt.ArrayLike,
        elems: npt.ArrayLike,
        elem_material: Optional[Sequence[str]] = None,
        node_sets: Optional[Mapping[str, Sequence[int]]] = None,
    ):
        self.nodes = np.array(nodes, dtype=float)
        self.elems = np.array(elems, dtype=int)
        if self.nodes.ndim != 2 or self.nodes.shape[1] != 2 or not len(self.nodes):
            raise InvalidGeometry(f"Mesh nodes must have shape (n, 2), got {self.nodes.shape}")
        if self.elems.ndim != 2 or self.elems.shape[1] != 4 or not len(self.elems):
            raise InvalidGeometry(f"Mesh elements must have shape (m, 4), got {self.elems.shape}")
        if self.elems.min() < 0 or self.elems.max() >= len(self.nodes):
            raise InvalidGeometry("Element connectivity references missing nodes")

        materials = ["1"] * len(self.elems) if elem_material is None else list(elem_material)
        if len(materials) != len(self.elems):
            raise InvalidGeometry(
                f"elem_material has {len(materials)} entries for {len(self.elems)} elements"
            )
        self.elem_material = [str(m) for m in materials]

        self.node_sets: Dict[str, npt.NDArray[np.int_]] = {}
        for name, indices in (node_sets or {}).items():
            values = np.array(indices, dtype=int).reshape(-1)
            if values.size and (values.min() < 0 or values.max() >= len(self.nodes)):
                raise InvalidGeometry(f"Node set {name} references missing nodes")
            self.node_sets[name] = values

        self.gradients, self.jacobians = reference_gradients(self.nodes[self.elems])
        if np.any(self.jacobians <= 0.0):
            bad = int(np.argwhere(self.jacobians <= 0.0)[0][0])
            raise InvalidGeometry(
                f"Element {bad} has a non-positive Jacobian; nodes must be counter-clockwise",
                {"element": bad},
            )

    def __repr__(self) -> str:
        return (
            f"Mesh2D(nodes={self.n_nodes}, elems={self.n_elems}, "
            f"subdomains={self.subdomains}, node_sets={sorted(self.node_sets)})"
        )

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_elems(self) -> int:
        return len(self.elems)

    @property
    def subdomains(self) -> list[str]:
        return sorted(set(self.elem_material))

    def node_set(self, name: str) -> npt.NDArray[np.int_]:
        if name not in self.node_sets:
            raise ConfigError(
                f"Mesh has no node set '{name}' (available: {sorted(self.node_sets)})"
            )
        return self.node_sets[name]

    def with_node_sets(self, **sets: Sequence[int]) -> "Mesh2D":
        """Copy with additional or replaced node sets."""
        merged = {name: values.tolist() for name, values in self.node_sets.items()}
        merged.update({name: list(values) for name, values in sets.items()})
        return Mesh2D(self.nodes, self.elems, self.elem_material, merged)

    def boundary_edges(self) -> set[tuple[int, int]]:
        """(element, local edge) pairs not shared with another element."""
        count: Dict[frozenset[int], int] = {}
        for elem in self.elems:
            for a, b in LOCAL_EDGES:
                key = frozenset((int(elem[a]), int(elem[b])))
                count[key] = count.get(key, 0) + 1
        return {
            (e, k)
            for e, elem in enumerate(self.elems)
            for k, (a, b) in enumerate(LOCAL_EDGES)
            if count[frozenset((int(elem[a]), int(elem[b])))] == 1
        }

    def edges_on(self, name: str) -> list[tuple[int, int]]:
        """Boundary edges with both end nodes in node set ``name``, sorted."""
        members = set(self.node_set(name).tolist())
        return sorted(
            (e, k)
            for e, k in self.boundary_edges()
            if {int(self.elems[e][LOCAL_EDGES[k][0]]), int(self.elems[e][LOCAL_EDGES[k][1]])}
            <= members
        )

    def constrained_dofs(self) -> npt.NDArray[np.int_]:
        """Sorted global dofs fixed by the Dirichlet node sets."""
        dofs: set[int] = set()
        for name, components in DIRICHLET_SETS.items():
            for node in self.node_sets.get(name, []):
                dofs.update(2 * int(node) + c for c in components)
        return np.array(sorted(dofs), dtype=int)

    def to_dict(self) -> Dict[str, object]:
        return {
            "nodes": self.nodes.tolist(),
            "elems": self.elems.tolist(),
            "elem_material": list(self.elem_material),
            "node_sets": {name: values.tolist() for name, values in self.node_sets.items()},
        }


def _structured(
    x: npt.NDArray[np.float64], y: npt.NDArray[np.float64]
) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.int_]]:
    """Nodes and counter-clockwise connectivity of an (ny+1) x (nx+1) node grid."""
    ny, nx = x.shape[0] - 1, x.shape[1] - 1
    nodes = np.column_stack([x.ravel(), y.ravel()])
    index = np.arange((nx + 1) * (ny + 1)).reshape(ny + 1, nx + 1)
    elems = np.column_stack(
        [
            index[:-1, :-1].ravel(),
            index[:-1, 1:].ravel(),
            index[1:, 1:].ravel(),
            index[1:, :-1].ravel(),
        ]
    )
    return nodes, elems


def rectangle_mesh(
    width: float, height: float, nx: int, ny: int, origin: tuple[float, float] = (0.0, 0.0)
) -> Mesh2D:
    """Structured rectangle with node sets ``left``, ``right``, ``bottom``, ``top``.

    Example:
        >>> mesh = rectangle_mesh(1.0, 0.1, 64, 8)
        >>> mesh.n_elems
        512
    """
    if width <= 0.0 or height <= 0.0 or nx < 1 or ny < 1:
        raise InvalidGeometry("Rectangle mesh needs positive size and at least one element")
    xs = origin[0] + np.linspace(0.0, width, nx + 1)
    ys = origin[1] + np.linspace(0.0, height, ny + 1)
    x, y = np.meshgrid(xs, ys)
    nodes, elems = _structured(x, y)
    index = np.arange(len(nodes)).reshape(ny + 1, nx + 1)
    return Mesh2D(
        nodes,
        elems,
        node_sets={
            "left": index[:, 0],
            "right": index[:, -1],
            "bottom": index[0, :],
            "top": index[-1, :],
        },
    )


def dome_mesh(
    width: float,
    height: float,
    shoulder: float,
    nx: int,
    ny: int,
    n_bands: int = 1,
) -> Mesh2D:
    """Biofilm bump on the substratum y = 0.

    The upper boundary is the parabola ``shoulder + (height - shoulder)(1 - (2x/w)^2)``
    over ``-w/2 <= x <= w/2``; the side walls have height ``shoulder``. Elements are
    assigned to ``n_bands`` horizontal subdomains ``"1"`` (bottom) to ``"n_bands"``.

    Node sets:
        substratum (also ``dirichlet``): bottom row, clamped
        interface: up the left wall, over the top, down the right wall
        upstream, crest, downstream: thirds of the free surface, sharing end nodes
    """
    if not 0.0 < shoulder < height or width <= 0.0:
        raise InvalidGeometry(f"Dome needs width > 0 and 0 < shoulder < height, got {shoulder}")
    if nx < 3 or ny < 1 or not 1 <= n_bands <= ny:
        raise InvalidGeometry("Dome needs nx >= 3, ny >= 1 and 1 <= n_bands <= ny")
    xs = np.linspace(-0.5 * width, 0.5 * width, nx + 1)
    top = shoulder + (height - shoulder) * (1.0 - (2.0 * xs / width) ** 2)
    eta = np.linspace(0.0, 1.0, ny + 1)
    x = np.tile(xs, (ny + 1, 1))
    y = eta[:, None] * top[None, :]
    nodes, elems = _structured(x, y)

    rows = np.repeat(np.arange(ny), nx)
    bands = np.minimum(rows * n_bands // ny, n_bands - 1) + 1
    index = np.arange(len(nodes)).reshape(ny + 1, nx + 1)
    left, crest_row, right = index[:, 0], index[-1, :], index[::-1, -1]
    interface = np.concatenate([left, crest_row[1:-1], right])
    i1, i2 = nx // 3, nx - nx // 3
    node_sets = {
        "substratum": index[0, :],
        "dirichlet": index[0, :],
        "interface": interface,
        "upstream": np.concatenate([left, crest_row[1 : i1 + 1]]),
        "crest": crest_row[i1 : i2 + 1],
        "downstream": np.concatenate([crest_row[i2:-1], right]),
    }
    mesh = Mesh2D(nodes, elems, [str(b) for b in bands], node_sets)
    logger.debug(f"Built dome mesh {mesh}")
    return mesh


def write_mesh_json(mesh: Mesh2D, path: str | Path) -> Path:
    json_path = Path(path)
    json_path.parent.mkdir(parents=True, exist_ok=True)
    with open(json_path, "w") as f:
        json.dump(mesh.to_dict(), f, indent=2)
        f.write("\n")
    return json_path


def read_mesh_json(path: str | Path) -> Mesh2D:
    """Read ``{nodes, elems, elem_material, node_sets}``.

    Raises:
        ConfigError: If the file is missing or malformed
        InvalidGeometry: If the mesh violates its invariants
    """
    json_path = Path(path).expanduser()
    if not json_path.exists():
        raise ConfigError(f"Mesh file not found: {json_path}")
    try:
        with open(json_path) as f:
            data = json.load(f)
        return Mesh2D(
            data["nodes"],
            data["elems"],
            data.get("elem_material"),
            data.get("node_sets", {}),
        )
    except (json.JSONDecodeError, KeyError, TypeError) as e:
        raise ConfigError(f"Invalid mesh file {json_path}: {e}") from e


__all__ = [
    "DIRICHLET_SETS",
    "Mesh2D",
    "rectangle_mesh",
    "dome_mesh",
    "write_mesh_json",
    "read_mesh_json",
]

"""Identification scenarios: mesh, subdomain parameters and flow tractions.

A scenario file is JSON::

    {
      "mesh": {"kind": "dome", "width": 1.0, "height": 0.5, "shoulder": 0.1,
               "nx": 16, "ny": 6, "n_bands": 3},
      "subdomains": {"1": {"E": "E1", "nu": "nu1"}, "2": {"E": "E2", "nu": "nu2"}},
      "tractions": [{"node_set": "upstream", "pressure": 2.0, "shear": 1.0}],
      "increments": 5,
      "newton_tol": 1e-10
    }

``mesh`` may also be the path of a mesh JSON file, relative to the scenario.
Subdomains that share a parameter name share its value.
"""

import json
import logging
from pathlib import Path
from typing import Annotated, Any, Dict, List, Literal, Optional, Union

import numpy.typing as npt
from pydantic import Field, ValidationError

from ..base import BioinverseModel
from ..constants import FEM_LOAD_INCREMENTS, FEM_MAX_NEWTON, FEM_MAX_POISSON, FEM_NEWTON_TOL
from ..errors import ConfigError, ParameterOutOfRange
from ..geometry import InterfaceCurve
from ..models.base import ForwardModel
from .loads import TractionEntry, TractionLoad, traction_load
from .material import Material
from .mesh import Mesh2D, dome_mesh, read_mesh_json, rectangle_mesh
from .solver import SolidState, deformed_nodes, solve_static

logger = logging.getLogger(__name__)


class DomeMeshSpec(BioinverseModel):
    kind: Literal["dome"] = "dome"
    width: float = Field(gt=0.0)
    height: float = Field(gt=0.0)
    shoulder: float = Field(gt=0.0)
    nx: int = Field(ge=3)
    ny: int = Field(ge=1)
    n_bands: int = Field(default=1, ge=1)

    def build(self) -> Mesh2D:
        return dome_mesh(self.width, self.height, self.shoulder, self.nx, self.ny, self.n_bands)


class RectangleMeshSpec(BioinverseModel):
    kind: Literal["rectangle"] = "rectangle"
    width: float = Field(gt=0.0)
    height: float = Field(gt=0.0)
    nx: int = Field(ge=1)
    ny: int = Field(ge=1)
    node_sets: Dict[str, List[int]] = Field(default_factory=dict)
    """Extra node sets (e.g. ``dirichlet``, ``interface``) added to the generated ones"""

    def build(self) -> Mesh2D:
        mesh = rectangle_mesh(self.width, self.height, self.nx, self.ny)
        return mesh.with_node_sets(**self.node_sets) if self.node_sets else mesh


MeshSource = Union[
    str, Annotated[Union[DomeMeshSpec, RectangleMeshSpec], Field(discriminator="kind")]
]


class SubdomainParams(BioinverseModel):
    """Parameter names feeding one subdomain's material."""

    E: str
    nu: str


class FemScenario(BioinverseModel):
    """Mesh, parameterization and loading of a solid identification problem."""

    mesh: MeshSource
    subdomains: Dict[str, SubdomainParams]
    tractions: List[TractionEntry]
    interface_set: str = "interface"
    increments: int = Field(default=FEM_LOAD_INCREMENTS, ge=1)
    newton_tol: float = Field(default=FEM_NEWTON_TOL, gt=0.0)
    max_newton: int = Field(default=FEM_MAX_NEWTON, ge=1)

    @property
    def parameter_names(self) -> tuple[str, ...]:
        """E and nu names in subdomain order, first occurrence wins."""
        names: list[str] = []
        for sub in sorted(self.subdomains):
            for name in (self.subdomains[sub].E, self.subdomains[sub].nu):
                if name not in names:
                    names.append(name)
        return tuple(names)

    def build_mesh(self, base_dir: Optional[Path] = None) -> Mesh2D:
        if isinstance(self.mesh, str):
            path = Path(self.mesh).expanduser()
            if not path.is_absolute() and base_dir is not None:
                path = base_dir / path
            return read_mesh_json(path)
        return self.mesh.build()


def load_scenario(path: str | Path) -> FemScenario:
    """Read and validate a scenario JSON file.

    Raises:
        ConfigError: If the file is missing, not JSON or fails validation
    """
    scenario_path = Path(path).expanduser()
    if not scenario_path.exists():
        raise ConfigError(f"Scenario file not found: {scenario_path}")
    try:
        with open(scenario_path) as f:
            data = json.load(f)
        return FemScenario(**data)
    except json.JSONDecodeError as e:
        raise ConfigError(f"Scenario file {scenario_path} is not valid JSON: {e}") from e
    except ValidationError as e:
        raise ConfigError(
            f"Invalid scenario {scenario_path}: {e.error_count()} validation errors",
            {"errors": e.errors(include_url=False, include_context=False)},
        ) from e


class FemModel(ForwardModel):
    """Interface of a clamped biofilm under fixed flow tractions, over (E, nu) per subdomain.

    Example:
        >>> scenario = load_scenario("configs/fem_homogeneous_scenario.json")  # doctest: +SKIP
        >>> FemModel(scenario).parameter_names  # doctest: +SKIP
        ('E', 'nu')
    """

    def __init__(self, scenario: FemScenario, base_dir: Optional[Path] = None):
        self.scenario = scenario
        self.mesh = scenario.build_mesh(base_dir)
        unknown = sorted(set(self.mesh.subdomains) - set(scenario.subdomains))
        if unknown:
            raise ConfigError(f"Scenario has no parameters for mesh subdomains {unknown}")
        self.load: TractionLoad = traction_load(self.mesh, scenario.tractions)
        self.load.check_on(self.mesh)
        self.interface_nodes = self.mesh.node_set(scenario.interface_set)
        self._reference = InterfaceCurve(self.mesh.nodes[self.interface_nodes])
        logger.info(f"FEM model on {self.mesh} with parameters {list(self.parameter_names)}")

    @property
    def model_id(self) -> str:
        return "fem"

    @property
    def parameter_names(self) -> tuple[str, ...]:
        return self.scenario.parameter_names

    @property
    def parameter_units(self) -> tuple[str, ...]:
        e_names = {sub.E for sub in self.scenario.subdomains.values()}
        return tuple("Pa" if name in e_names else "" for name in self.parameter_names)

    def describe(self) -> Dict[str, Any]:
        info = super().describe()
        info.update(
            n_nodes=self.mesh.n_nodes,
            n_elems=self.mesh.n_elems,
            subdomains=self.mesh.subdomains,
        )
        return info

    def reference_curve(self) -> InterfaceCurve:
        return self._reference

    def materials(self, theta: npt.ArrayLike) -> Dict[str, Material]:
        """Material per subdomain.

        Raises:
            ParameterOutOfRange: If E <= 0 or nu outside (-1, 0.45]
        """
        values = dict(zip(self.parameter_names, self.check_theta(theta).tolist()))
        materials = {}
        for sub, names in self.scenario.subdomains.items():
            E, nu = values[names.E], values[names.nu]
            if not E > 0.0:
                raise ParameterOutOfRange(names.E, E, "E > 0 Pa")
            if not -1.0 < nu <= FEM_MAX_POISSON:
                raise ParameterOutOfRange(names.nu, nu, f"-1 < nu <= {FEM_MAX_POISSON}")
            materials[sub] = Material(E=E, nu=nu)
        return materials

    def solve(self, theta: npt.ArrayLike) -> SolidState:
        s = self.scenario
        return solve_static(
            self.mesh,
            self.materials(theta),
            self.load,
            newton_tol=s.newton_tol,
            max_newton=s.max_newton,
            increments=s.increments,
        )

    def evaluate(self, theta: npt.ArrayLike) -> InterfaceCurve:
        state = self.solve(theta)
        logger.debug(f"FEM solve {state}")
        return self._reference.with_vertices(
            deformed_nodes(self.mesh, state, self.scenario.interface_set)
        )


def fem_model_evaluate(
    theta: npt.ArrayLike, scenario: FemScenario, base_dir: Optional[Path] = None
) -> InterfaceCurve:
    """One-shot evaluation; builds the mesh and load every call."""
    return FemModel(scenario, base_dir).evaluate(theta)


__all__ = [
    "DomeMeshSpec",
    "RectangleMeshSpec",
    "MeshSource",
    "SubdomainParams",
    "FemScenario",
    "load_scenario",
    "FemModel",
    "fem_model_evaluate",
]

"""Plane-strain Saint-Venant-Kirchhoff solver for clamped biofilm colonies."""

# Material
from .material import Material, energy_density, lame_arrays, pk2_stress

# Mesh
from .mesh import (
    DIRICHLET_SETS,
    Mesh2D,
    dome_mesh,
    read_mesh_json,
    rectangle_mesh,
    write_mesh_json,
)

# Element
from .element import GAUSS_POINTS, LOCAL_EDGES, QuadKinematics, reference_gradients

# Loads
from .loads import TractionEntry, TractionLoad, edge_outward_normal, traction_load

# Solver
from .solver import (
    Materials,
    SolidState,
    assemble_internal_forces,
    deformed_nodes,
    gauss_point_strains,
    gauss_point_stresses,
    load_factors,
    solve_static,
    strain_energy,
)

# Scenarios
from .scenario import (
    DomeMeshSpec,
    FemModel,
    FemScenario,
    RectangleMeshSpec,
    SubdomainParams,
    fem_model_evaluate,
    load_scenario,
)

__all__ = [
    # Material
    "Material",
    "energy_density",
    "lame_arrays",
    "pk2_stress",
    # Mesh
    "DIRICHLET_SETS",
    "Mesh2D",
    "dome_mesh",
    "rectangle_mesh",
    "read_mesh_json",
    "write_mesh_json",
    # Element
    "GAUSS_POINTS",
    "LOCAL_EDGES",
    "QuadKinematics",
    "reference_gradients",
    # Loads
    "TractionEntry",
    "TractionLoad",
    "edge_outward_normal",
    "traction_load",
    # Solver
    "Materials",
    "SolidState",
    "assemble_internal_forces",
    "deformed_nodes",
    "gauss_point_strains",
    "gauss_point_stresses",
    "load_factors",
    "solve_static",
    "strain_energy",
    # Scenarios
    "DomeMeshSpec",
    "FemModel",
    "FemScenario",
    "RectangleMeshSpec",
    "SubdomainParams",
    "fem_model_evaluate",
    "load_scenario",
]

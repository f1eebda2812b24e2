# Copyright (c) the maxtomo developers. All rights reserved.
# SPDX-License-Identifier: Apache-2.0
"""Edge-element microwave tomography.

Thin Python layer over the C++ core: chamber meshing, forward S-parameter
simulation with the ORAS-preconditioned GMRES solver, synthetic phantoms
and the adjoint-state L-BFGS reconstruction.
"""

from ._maxtomo import (  # noqa: F401
    ChamberSpec,
    Ellipsoid,
    InverseConfig,
    MaterialField,
    Mesh,
    PhantomSpec,
    PhysicsParams,
    Provenance,
    ScatteringMatrix,
    Solver,
    SolverOptions,
    StrokeRule,
    add_noise,
    build_phantom,
    generate_chamber_mesh,
    load_mesh,
    load_smatrix,
    magnitude_db,
    save_mesh,
    save_smatrix,
)

__all__ = [
    "ChamberSpec",
    "Ellipsoid",
    "InverseConfig",
    "MaterialField",
    "Mesh",
    "PhantomSpec",
    "PhysicsParams",
    "Provenance",
    "ScatteringMatrix",
    "Solver",
    "SolverOptions",
    "StrokeRule",
    "add_noise",
    "build_phantom",
    "generate_chamber_mesh",
    "load_mesh",
    "load_smatrix",
    "magnitude_db",
    "save_mesh",
    "save_smatrix",
]

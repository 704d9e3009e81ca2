"""Obstacle reconstruction for Stokes flow from boundary measurements."""

from ._ccbm import (
    ArgumentError,
    BoundaryCurve,
    CauchyData,
    ConfigurationError,
    Error,
    GeometryError,
    Mesh,
    MeshError,
    SolverError,
    add_noise,
    deform_mesh,
    evaluate_cost,
    generate_measurement,
    generate_mesh,
    gradient_check,
    hausdorff,
    ls_misfit,
    mms_study,
    parse_config,
    reconstruct,
    remesh,
    run_experiment,
    run_gallery,
    shape_gradient,
)

__all__ = [name for name in dir() if not name.startswith("_")]

"""2-D quasistatic rate-independent mixed-mode delamination simulator."""

from delam2d._core import (
    MaterialSpec,
    Mesh2D,
    RunConfig,
    build_rectangle_mesh,
    config_from_json,
    lame_parameters,
    mode_II_toughness,
    preset_paper_pull_push,
    run,
    solve_qp,
    validate_material,
)

__all__ = [
    "MaterialSpec",
    "Mesh2D",
    "RunConfig",
    "build_rectangle_mesh",
    "config_from_json",
    "lame_parameters",
    "mode_II_toughness",
    "preset_paper_pull_push",
    "run",
    "solve_qp",
    "validate_material",
]

"""Reconstruction-error guided viewpoint selection for voxel reconstruction.

The package covers the full loop: dense voxel grids and their metrics
(:mod:`voxsel.grid`), viewpoint geometry and grid rotation
(:mod:`voxsel.geometry`), first-hit error projection and view scoring
(:mod:`voxsel.selection`), a per-category viewpoint pool
(:mod:`voxsel.pool`), silhouette rendering and synthetic shapes
(:mod:`voxsel.synthesis`), visual-hull carving (:mod:`voxsel.carve`), the
iterative harness (:mod:`voxsel.harness`), and file formats
(:mod:`voxsel.io`).
"""

from .carve import ViewObservation, carve, project_voxel
from .geometry import (
    Viewpoint,
    ViewpointLattice,
    discretize_viewpoints,
    rotate_grid,
    rotation_matrix,
    sample_gaussian_view,
    view_direction,
    viewpoint_from_direction,
)
from .grid import (
    DEFAULT_THRESHOLD,
    OccupancySet,
    VoxelGrid,
    bce_loss,
    dice_loss,
    error_grid,
    f_score,
    iou,
    threshold_grid,
)
from .harness import (
    LoopConfig,
    RunReport,
    SceneObject,
    compare_policies,
    make_corpus,
    report_json,
    run_loop,
)
from .io import FormatError, read_sil, read_vxg, write_sil, write_vxg
from .pool import EmptyCategoryError, ViewpointPool, load_pool, record, sample_by_category, save_pool
from .selection import (
    ErrorProjectionMap,
    ViewScore,
    project_first_hit,
    rank_scores,
    score_all,
    score_view,
    select_and_sample,
    select_top_n,
)
from .synthesis import (
    GroundTruthSilhouettes,
    NoisySilhouettes,
    ShapeSpec,
    SilhouetteImage,
    ViewDistribution,
    generate_shape,
    render_silhouette,
    sample_dataset_viewpoints,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_THRESHOLD",
    "EmptyCategoryError",
    "ErrorProjectionMap",
    "FormatError",
    "GroundTruthSilhouettes",
    "LoopConfig",
    "NoisySilhouettes",
    "OccupancySet",
    "RunReport",
    "SceneObject",
    "ShapeSpec",
    "SilhouetteImage",
    "ViewDistribution",
    "ViewObservation",
    "ViewScore",
    "Viewpoint",
    "ViewpointLattice",
    "ViewpointPool",
    "VoxelGrid",
    "bce_loss",
    "carve",
    "compare_policies",
    "dice_loss",
    "discretize_viewpoints",
    "error_grid",
    "f_score",
    "generate_shape",
    "iou",
    "load_pool",
    "make_corpus",
    "project_first_hit",
    "project_voxel",
    "rank_scores",
    "read_sil",
    "read_vxg",
    "record",
    "render_silhouette",
    "report_json",
    "rotate_grid",
    "rotation_matrix",
    "run_loop",
    "sample_by_category",
    "sample_dataset_viewpoints",
    "sample_gaussian_view",
    "save_pool",
    "score_all",
    "score_view",
    "select_and_sample",
    "select_top_n",
    "threshold_grid",
    "view_direction",
    "viewpoint_from_direction",
    "write_sil",
    "write_vxg",
]

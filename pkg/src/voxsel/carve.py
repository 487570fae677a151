"""Visual-hull reconstruction by silhouette intersection (space carving).

A voxel survives carving only if every observation sees it inside the
silhouette: the voxel center is rotated by the observation's viewpoint with
the same forward kernel used for rendering, and the resulting (y, z) cell is
looked up in the silhouette image. Because rendering and carving share that
kernel, every ground-truth voxel projects onto a set pixel of every rendered
silhouette, so the carve of exact silhouettes always contains the ground
truth. Projections that fall off the image count as outside.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import Viewpoint, rotated_cells
from .grid import VoxelGrid
from .synthesis import SilhouetteImage

__all__ = ["ViewObservation", "carve", "project_voxel"]


@dataclass(frozen=True)
class ViewObservation:
    """One silhouette together with the viewpoint it was rendered from."""

    viewpoint: Viewpoint
    silhouette: SilhouetteImage


def project_voxel(index: tuple[int, int, int], v: Viewpoint, dim: int) -> tuple[int, int] | None:
    """Image cell a voxel center lands on under the viewpoint rotation.

    Returns the (y, z) pixel of the cell nearest the rotated center, or None
    when that pixel falls outside the (dim, dim) image frame. The map is the
    one silhouette rendering uses, per-voxel.
    """
    x, y, z = index
    if not (0 <= x < dim and 0 <= y < dim and 0 <= z < dim):
        raise ValueError(f"voxel index {index} outside grid of dim {dim}")
    cells, _ = rotated_cells(dim, v)
    flat = (x * dim + y) * dim + z
    py, pz = int(cells[flat, 1]), int(cells[flat, 2])
    if 0 <= py < dim and 0 <= pz < dim:
        return (py, pz)
    return None


def carve(observations: Sequence[ViewObservation], dim: int) -> VoxelGrid:
    """Intersect silhouette constraints into a binary occupancy grid.

    Every observation must carry a (dim, dim) silhouette. The result is a
    0/1-valued grid; it shrinks (voxelwise) as observations are added, does
    not depend on their order, and is idempotent under duplicates.
    """
    if len(observations) == 0:
        raise ValueError("carving requires at least one observation")
    if dim < 1:
        raise ValueError(f"dim must be positive, got {dim}")
    for obs in observations:
        if obs.silhouette.dims != (dim, dim):
            raise ValueError(
                f"silhouette dims {obs.silhouette.dims} do not match grid dim {dim}"
            )
    keep = np.ones(dim * dim * dim, dtype=bool)
    for obs in observations:
        cells, _ = rotated_cells(dim, obs.viewpoint)
        py, pz = cells[:, 1], cells[:, 2]
        on_image = (py >= 0) & (py < dim) & (pz >= 0) & (pz < dim)
        inside = np.zeros(keep.shape, dtype=bool)
        inside[on_image] = obs.silhouette.pixels[py[on_image], pz[on_image]]
        keep &= inside
    return VoxelGrid(keep.reshape((dim, dim, dim)).astype(np.float64))

"""First-hit error projection and reconstruction-error guided view scoring.

A rotated error grid is projected onto the (y, z) image plane by sweeping x
ascending per pixel ray and keeping the first nonzero value, i.e. the error
on the surface nearest the camera. Summing a projection gives the score of
the viewpoint that produced it; the highest-scoring lattice centers are the
views most worth re-observing, and Gaussian jitter around them turns interval
centers into concrete camera poses.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .geometry import ViewpointLattice, Viewpoint, discretize_viewpoints, rotate_grid, sample_gaussian_view
from .grid import VoxelGrid, error_grid

__all__ = [
    "FIRST_HIT_EPS",
    "ErrorProjectionMap",
    "ViewScore",
    "project_first_hit",
    "score_view",
    "score_all",
    "rank_scores",
    "select_top_n",
    "select_and_sample",
]

# Values at or below this cutoff count as empty space during the ray sweep.
# Binary error grids hold exact 0.0/1.0 values, so for them the cutoff is
# equivalent to testing != 0; it only matters for soft-valued grids.
FIRST_HIT_EPS = 1e-9


@dataclass(frozen=True)
class ErrorProjectionMap:
    """Orthographic first-hit image of a grid, one pixel per (y, z) ray.

    ``pixels`` has shape ``(dims_y, dims_z)``; the canonical flat layout is
    y-fastest, ``flat[z * dims_y + y]``, which is ``pixels.ravel(order="F")``.
    """

    pixels: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.pixels, dtype=np.float64)
        if arr.ndim != 2 or any(d < 1 for d in arr.shape):
            raise ValueError(f"projection map must be 2-D with positive dims, got {arr.shape}")
        if not np.all(np.isfinite(arr)) or arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError("projection pixels must be finite values in [0, 1]")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "pixels", arr)

    @property
    def dims(self) -> tuple[int, int]:
        return self.pixels.shape  # type: ignore[return-value]

    @property
    def total(self) -> float:
        return float(self.pixels.sum())

    def to_flat(self) -> np.ndarray:
        return self.pixels.ravel(order="F")


@dataclass(frozen=True)
class ViewScore:
    """Score of one lattice center: the summed first-hit projection.

    ``lattice_index`` is the (yaw index, pitch index) pair; ties between
    equal scores are broken by this pair in ascending lexicographic order.
    """

    viewpoint: Viewpoint
    score: float
    lattice_index: tuple[int, int]


def project_first_hit(grid: VoxelGrid) -> ErrorProjectionMap:
    """Project a grid along +x, keeping each ray's first nonzero value.

    For every (y, z) the sweep visits x ascending; the first voxel whose
    value exceeds ``FIRST_HIT_EPS`` supplies the pixel, and rays that never
    hit yield 0.
    """
    vals = grid.values
    hits = vals > FIRST_HIT_EPS
    first_x = hits.argmax(axis=0)
    any_hit = hits.any(axis=0)
    front = np.take_along_axis(vals, first_x[np.newaxis, :, :], axis=0)[0]
    return ErrorProjectionMap(np.where(any_hit, front, 0.0))


def score_view(error: VoxelGrid, v: Viewpoint, lattice_index: tuple[int, int] = (0, 0)) -> ViewScore:
    """Score one viewpoint: rotate the error grid to it and sum the first hits.

    ``lattice_index`` is ordering metadata supplied by the caller; standalone
    calls can leave the default.
    """
    if not error.is_cubic:
        raise ValueError(f"view scoring requires a cubic grid, got dims {error.dims}")
    projection = project_first_hit(rotate_grid(error, v))
    return ViewScore(viewpoint=v, score=projection.total, lattice_index=tuple(lattice_index))


def score_all(error: VoxelGrid, lattice: ViewpointLattice) -> list[ViewScore]:
    """Score every lattice center, returned in lattice order (yaw fastest)."""
    return [
        score_view(error, center, lattice.lattice_index(k))
        for k, center in enumerate(lattice.centers)
    ]


def rank_scores(scores: Iterable[ViewScore]) -> list[ViewScore]:
    """Scores sorted by descending score, ties by ascending lattice index.

    The tie-break compares the yaw index first, then the pitch index, so the
    ranking is a deterministic function of the score multiset: permuting the
    input cannot change the output.
    """
    return sorted(scores, key=lambda s: (-s.score, s.lattice_index))


def select_top_n(scores: Sequence[ViewScore], n: int) -> list[Viewpoint]:
    """Viewpoints of the n highest-scoring entries, deterministically ordered.

    ``n`` must be between 1 and the number of scores; ``n`` equal to the
    input size returns every viewpoint sorted by descending score.
    """
    if not (1 <= n <= len(scores)):
        raise ValueError(f"n must lie in [1, {len(scores)}], got {n}")
    return [s.viewpoint for s in rank_scores(scores)[:n]]


def select_and_sample(
    pred: VoxelGrid,
    gt: VoxelGrid,
    interval_deg: int,
    n: int,
    rng: np.random.Generator,
) -> list[Viewpoint]:
    """Pick the n most error-visible lattice views and jitter each into a pose.

    Builds the error grid ``|pred - gt|``, scores every center of the
    ``interval_deg`` lattice, takes the top n, and draws one Gaussian sample
    per winner with sigma ``interval_deg / 6`` (yaw wrapped, pitch clamped).
    Samples are returned in ranking order.
    """
    lattice = discretize_viewpoints(interval_deg)
    top = select_top_n(score_all(error_grid(pred, gt), lattice), n)
    sigma = interval_deg / 6.0
    return [sample_gaussian_view(v, sigma, rng) for v in top]

"""Silhouette rendering, dataset view distributions, and synthetic shapes.

The renderer stands in for a real multi-view image pipeline: a view of an
object is the binary silhouette of its ground-truth occupancy seen from a
viewpoint. Silhouettes are produced by the same rotate-and-sweep kernel used
for error projection, which is what makes carving against them exactly
conservative. Synthetic test shapes are generated inside the grid's inscribed
ball (with one voxel of margin) so no rotation ever clips them.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from .geometry import Viewpoint, rotate_grid
from .grid import DEFAULT_THRESHOLD, OccupancySet, VoxelGrid, threshold_grid
from .selection import project_first_hit

__all__ = [
    "SilhouetteImage",
    "ViewDistribution",
    "ALIGNED_PITCH_DEG",
    "ALIGNED_VIEW_COUNT",
    "sample_dataset_viewpoints",
    "render_silhouette",
    "ViewProvider",
    "GroundTruthSilhouettes",
    "NoisySilhouettes",
    "SHAPE_KINDS",
    "ShapeSpec",
    "generate_shape",
    "safe_radius",
]

# The aligned rendering pattern: a fixed ring of 24 yaws at constant pitch.
ALIGNED_PITCH_DEG = 60.0
ALIGNED_YAW_STEP_DEG = 15.0
ALIGNED_VIEW_COUNT = 24


@dataclass(frozen=True)
class SilhouetteImage:
    """Binary view of an object, one pixel per (y, z) ray.

    ``pixels`` has shape ``(dims_y, dims_z)``; the canonical flat layout is
    y-fastest, matching :class:`~voxsel.selection.ErrorProjectionMap`.
    """

    pixels: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.pixels)
        if arr.dtype != np.bool_:
            raise ValueError(f"silhouette pixels must be boolean, got {arr.dtype}")
        if arr.ndim != 2 or any(d < 1 for d in arr.shape):
            raise ValueError(f"silhouette must be 2-D with positive dims, got {arr.shape}")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "pixels", arr)

    @property
    def dims(self) -> tuple[int, int]:
        return self.pixels.shape  # type: ignore[return-value]

    @property
    def count(self) -> int:
        return int(self.pixels.sum())

    def to_flat(self) -> np.ndarray:
        return self.pixels.ravel(order="F")


@dataclass(frozen=True)
class ViewDistribution:
    """How dataset viewpoints are spread over the view sphere.

    ``aligned`` is the fixed 24-view ring (pitch 60, yaw every 15 degrees);
    ``hemispherical`` draws pitch uniformly from [0, 90] and ``spherical``
    from [-90, 90], both with yaw uniform over [-180, 180).
    """

    kind: str
    views_per_object: int = ALIGNED_VIEW_COUNT

    def __post_init__(self) -> None:
        if self.kind not in ("aligned", "hemispherical", "spherical"):
            raise ValueError(f"unknown view distribution kind {self.kind!r}")
        if self.views_per_object < 1:
            raise ValueError(f"views_per_object must be positive, got {self.views_per_object}")


def sample_dataset_viewpoints(dist: ViewDistribution, rng: np.random.Generator) -> list[Viewpoint]:
    """Draw one object's worth of dataset viewpoints.

    The aligned pattern is fixed and consumes no randomness; it only supports
    exactly 24 views per object. Random patterns draw yaw then pitch for each
    view in order.
    """
    if dist.kind == "aligned":
        if dist.views_per_object != ALIGNED_VIEW_COUNT:
            raise ValueError(
                f"aligned distribution is a fixed {ALIGNED_VIEW_COUNT}-view pattern, "
                f"got views_per_object={dist.views_per_object}"
            )
        return [
            Viewpoint(yaw=-180.0 + k * ALIGNED_YAW_STEP_DEG, pitch=ALIGNED_PITCH_DEG)
            for k in range(ALIGNED_VIEW_COUNT)
        ]
    pitch_lo, pitch_hi = (0.0, 90.0) if dist.kind == "hemispherical" else (-90.0, 90.0)
    views = []
    for _ in range(dist.views_per_object):
        yaw = rng.uniform(-180.0, 180.0)
        pitch = rng.uniform(pitch_lo, pitch_hi)
        views.append(Viewpoint(yaw=yaw, pitch=pitch))
    return views


def render_silhouette(gt: VoxelGrid, v: Viewpoint, tau: float = DEFAULT_THRESHOLD) -> SilhouetteImage:
    """Binary silhouette of the thresholded grid seen from ``v``.

    Thresholds ``gt`` at ``tau``, rotates the resulting 0/1 grid, and marks
    every (y, z) ray that hits an occupied voxel. This is exactly the nonzero
    mask of the first-hit projection; the two paths share one kernel.
    """
    binary = threshold_grid(gt, tau).to_grid()
    projection = project_first_hit(rotate_grid(binary, v))
    return SilhouetteImage(projection.pixels > 0.0)


class ViewProvider(Protocol):
    """Source of silhouette observations for a ground-truth object."""

    def render(self, gt: VoxelGrid, v: Viewpoint) -> SilhouetteImage: ...


@dataclass(frozen=True)
class GroundTruthSilhouettes:
    """Noise-free provider: exact silhouettes of the ground truth."""

    tau: float = DEFAULT_THRESHOLD

    def render(self, gt: VoxelGrid, v: Viewpoint) -> SilhouetteImage:
        return render_silhouette(gt, v, self.tau)


@dataclass(frozen=True)
class NoisySilhouettes:
    """Wrapper that flips each silhouette pixel with a fixed probability.

    Flips are deterministic for a given (grid, viewpoint, seed) triple, so a
    noisy provider still renders reproducibly. The default probability 0
    passes the base silhouette through unchanged.
    """

    base: GroundTruthSilhouettes
    flip_prob: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not (0.0 <= self.flip_prob <= 1.0):
            raise ValueError(f"flip probability must lie in [0, 1], got {self.flip_prob}")

    def render(self, gt: VoxelGrid, v: Viewpoint) -> SilhouetteImage:
        sil = self.base.render(gt, v)
        if self.flip_prob == 0.0:
            return sil
        digest = hashlib.blake2b(digest_size=8)
        digest.update(np.float32(gt.to_flat()).tobytes())
        digest.update(np.float64([v.yaw, v.pitch, self.seed]).tobytes())
        rng = np.random.Generator(np.random.PCG64(int.from_bytes(digest.digest(), "little")))
        flips = rng.random(sil.pixels.shape) < self.flip_prob
        return SilhouetteImage(sil.pixels ^ flips)


SHAPE_KINDS = ("box", "sphere", "ell", "cross", "union-of-boxes", "random-blob")

MIN_SHAPE_DIM = 8
MIN_OCCUPANCY = 0.01
MAX_OCCUPANCY = 0.60


@dataclass(frozen=True)
class ShapeSpec:
    """Descriptor for one synthetic shape.

    ``size`` (box) and ``radius`` (sphere) pin the primitive exactly and
    center it; left unset, the generator randomizes extent and placement.
    """

    kind: str
    size: tuple[int, int, int] | None = None
    radius: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in SHAPE_KINDS:
            raise ValueError(f"unknown shape kind {self.kind!r}, expected one of {SHAPE_KINDS}")


def safe_radius(dim: int) -> float:
    """Radius of the centered ball whose content never clips under rotation.

    A voxel within this radius of the grid center stays at that distance when
    rotated, and the one voxel of margin absorbs nearest-cell rounding.
    """
    return (dim - 1) / 2.0 - 1.0


def _centered_coords(dim: int) -> np.ndarray:
    half = (dim - 1) / 2.0
    return np.indices((dim, dim, dim), dtype=np.float64) - half


def _ball_mask(dim: int, center: np.ndarray, radius: float) -> np.ndarray:
    coords = _centered_coords(dim)
    dist2 = sum((coords[a] - center[a]) ** 2 for a in range(3))
    return dist2 <= radius * radius


def _box_mask(dim: int, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    # lo/hi are inclusive integer index bounds per axis.
    mask = np.zeros((dim, dim, dim), dtype=bool)
    mask[lo[0] : hi[0] + 1, lo[1] : hi[1] + 1, lo[2] : hi[2] + 1] = True
    return mask


def _random_box_bounds(dim: int, rng: np.random.Generator, max_half: float) -> tuple[np.ndarray, np.ndarray]:
    # A box is safe when its farthest corner stays inside the safe ball.
    half = (dim - 1) / 2.0
    budget = safe_radius(dim)
    extents = rng.uniform(dim / 8.0, max_half, size=3)
    scale = budget / np.linalg.norm(extents)
    if scale < 1.0:
        extents = extents * scale
    slack = budget - np.linalg.norm(extents)
    offset = rng.uniform(-1.0, 1.0, size=3)
    offset *= slack / max(np.linalg.norm(offset), 1e-12) * rng.uniform(0.0, 1.0)
    lo = np.ceil(half + offset - extents).astype(int)
    hi = np.floor(half + offset + extents).astype(int)
    return np.maximum(lo, 0), np.minimum(hi, dim - 1)


def _centered_exact_box(dim: int, size: tuple[int, int, int]) -> np.ndarray:
    if any(s < 1 or s > dim for s in size):
        raise ValueError(f"box size {size} does not fit dim {dim}")
    lo = np.array([(dim - s) // 2 for s in size])
    hi = lo + np.array(size) - 1
    return _box_mask(dim, lo, hi)


def _arm(dim: int, axis: int, center: np.ndarray, half_len: float, half_thick: float) -> np.ndarray:
    half = (dim - 1) / 2.0
    ext = np.full(3, half_thick)
    ext[axis] = half_len
    lo = np.maximum(np.ceil(half + center - ext).astype(int), 0)
    hi = np.minimum(np.floor(half + center + ext).astype(int), dim - 1)
    return _box_mask(dim, lo, hi)


def generate_shape(spec: ShapeSpec, dim: int, rng: np.random.Generator) -> VoxelGrid:
    """Generate one binary shape grid, deterministic given the generator state.

    All occupancy lies inside the safe ball (:func:`safe_radius`), and the
    occupied fraction always lands in [1%, 60%] of the grid.
    """
    if dim < MIN_SHAPE_DIM:
        raise ValueError(f"shape dim must be at least {MIN_SHAPE_DIM}, got {dim}")
    budget = safe_radius(dim)

    if spec.kind == "box":
        if spec.size is not None:
            mask = _centered_exact_box(dim, spec.size)
        else:
            lo, hi = _random_box_bounds(dim, rng, max_half=dim / 4.0)
            mask = _box_mask(dim, lo, hi)
    elif spec.kind == "sphere":
        if spec.radius is not None:
            radius = float(spec.radius)
            center = np.zeros(3)
        else:
            radius = rng.uniform(dim / 6.0, dim / 3.5)
            center = rng.uniform(-1.0, 1.0, size=3)
            slack = budget - radius
            center *= slack / max(np.linalg.norm(center), 1e-12) * rng.uniform(0.0, 1.0)
        mask = _ball_mask(dim, center, radius)
    elif spec.kind == "ell":
        # Two orthogonal arms joined at a shared end: deliberately asymmetric.
        # Lengths scale with the safe ball so the ranges stay valid down to
        # the minimum dim.
        axes = rng.permutation(3)[:2]
        # Floors keep the smallest dims from rounding an arm to a sliver;
        # they only bind below dim 12.
        thick = max(rng.uniform(dim / 12.0, dim / 8.0), 1.0)
        long_a = max(rng.uniform(budget * 0.55, budget * 0.62), 2.0)
        long_b = max(rng.uniform(budget * 0.44, budget * 0.50), 1.5)
        joint = np.zeros(3)
        joint[axes[0]] = -long_a + thick
        arm_a = _arm(dim, int(axes[0]), np.zeros(3), long_a, thick)
        arm_b_center = joint.copy()
        arm_b_center[axes[1]] = long_b - thick
        arm_b = _arm(dim, int(axes[1]), arm_b_center, long_b, thick)
        mask = arm_a | arm_b
    elif spec.kind == "cross":
        thick = rng.uniform(dim / 12.0, dim / 9.0)
        mask = np.zeros((dim, dim, dim), dtype=bool)
        for axis in range(3):
            half_len = rng.uniform(dim / 4.0, np.sqrt(budget**2 - 2 * thick**2))
            mask |= _arm(dim, axis, np.zeros(3), half_len, thick)
    elif spec.kind == "union-of-boxes":
        count = int(rng.integers(3, 6))
        mask = np.zeros((dim, dim, dim), dtype=bool)
        for _ in range(count):
            lo, hi = _random_box_bounds(dim, rng, max_half=dim / 5.0)
            mask |= _box_mask(dim, lo, hi)
    elif spec.kind == "random-blob":
        count = int(rng.integers(4, 9))
        mask = np.zeros((dim, dim, dim), dtype=bool)
        for _ in range(count):
            radius = rng.uniform(dim / 10.0, dim / 5.0)
            center = rng.uniform(-1.0, 1.0, size=3)
            slack = budget - radius
            center *= slack / max(np.linalg.norm(center), 1e-12) * rng.uniform(0.0, 1.0)
            mask |= _ball_mask(dim, center, radius)
    else:  # pragma: no cover - guarded by ShapeSpec
        raise ValueError(f"unknown shape kind {spec.kind!r}")

    mask &= _ball_mask(dim, np.zeros(3), budget)
    fraction = mask.sum() / mask.size
    if not (MIN_OCCUPANCY <= fraction <= MAX_OCCUPANCY):
        raise ValueError(f"shape occupancy {fraction:.3%} outside [1%, 60%] for {spec}")
    return OccupancySet(mask).to_grid()

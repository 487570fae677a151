"""Dense voxel occupancy grids and the metrics defined over them.

A grid holds one scalar per voxel in [0, 1]. Values are addressed as
``values[x, y, z]``; the canonical flat layout (used by the ``.vxg`` file
format and by anything that serializes a grid) is row-major with x varying
fastest, i.e. ``flat[(z * dims_y + y) * dims_x + x]``, which is exactly
``values.ravel(order="F")``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "VoxelGrid",
    "OccupancySet",
    "DEFAULT_THRESHOLD",
    "threshold_grid",
    "error_grid",
    "iou",
    "f_score",
    "bce_loss",
    "dice_loss",
]

# Occupancy decision boundary used throughout when none is given explicitly.
DEFAULT_THRESHOLD = 0.4

# Clamp bound for log arguments in the cross-entropy loss.
BCE_EPS = 1e-7

# Additive smoothing term in the Dice loss denominator and numerator.
DICE_SMOOTHING = 1e-6


def _validated_values(values: np.ndarray) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 3:
        raise ValueError(f"voxel grid must be 3-D, got shape {arr.shape}")
    if any(d < 1 for d in arr.shape):
        raise ValueError(f"voxel grid dims must be positive, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("voxel grid values must be finite")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ValueError("voxel grid values must lie in [0, 1]")
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class VoxelGrid:
    """Dense grid of scalar occupancy values in [0, 1].

    ``values`` has shape ``(dims_x, dims_y, dims_z)`` and is stored read-only;
    all operations on grids are pure functions returning new grids.
    """

    values: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", _validated_values(self.values))

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.values.shape  # type: ignore[return-value]

    @property
    def is_cubic(self) -> bool:
        dx, dy, dz = self.dims
        return dx == dy == dz

    @classmethod
    def zeros(cls, dims: tuple[int, int, int]) -> "VoxelGrid":
        return cls(np.zeros(dims, dtype=np.float64))

    @classmethod
    def from_flat(cls, dims: tuple[int, int, int], flat: np.ndarray) -> "VoxelGrid":
        """Build a grid from the canonical x-fastest flat layout."""
        flat = np.asarray(flat, dtype=np.float64)
        expected = int(np.prod(dims))
        if flat.shape != (expected,):
            raise ValueError(f"expected {expected} flat values, got {flat.shape}")
        return cls(flat.reshape(dims, order="F"))

    def to_flat(self) -> np.ndarray:
        """Return values in the canonical x-fastest flat layout."""
        return self.values.ravel(order="F")


@dataclass(frozen=True)
class OccupancySet:
    """Binary occupancy decisions for a grid, one bit per voxel."""

    bits: np.ndarray

    def __post_init__(self) -> None:
        bits = np.asarray(self.bits)
        if bits.dtype != np.bool_:
            raise ValueError(f"occupancy bits must be boolean, got {bits.dtype}")
        if bits.ndim != 3 or any(d < 1 for d in bits.shape):
            raise ValueError(f"occupancy bits must be 3-D with positive dims, got {bits.shape}")
        bits = bits.copy()
        bits.flags.writeable = False
        object.__setattr__(self, "bits", bits)

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.bits.shape  # type: ignore[return-value]

    @property
    def count(self) -> int:
        return int(self.bits.sum())

    def to_grid(self) -> VoxelGrid:
        """Binary 0.0/1.0 grid carrying these decisions as values."""
        return VoxelGrid(self.bits.astype(np.float64))

    @classmethod
    def from_flat(cls, dims: tuple[int, int, int], flat: np.ndarray) -> "OccupancySet":
        flat = np.asarray(flat, dtype=np.bool_)
        expected = int(np.prod(dims))
        if flat.shape != (expected,):
            raise ValueError(f"expected {expected} flat bits, got {flat.shape}")
        return cls(flat.reshape(dims, order="F"))

    def to_flat(self) -> np.ndarray:
        return self.bits.ravel(order="F")


def _check_tau(tau: float) -> float:
    if not (0.0 <= tau <= 1.0):
        raise ValueError(f"threshold must lie in [0, 1], got {tau}")
    return float(tau)


def _check_same_dims(a, b) -> None:
    if a.dims != b.dims:
        raise ValueError(f"grid dims mismatch: {a.dims} vs {b.dims}")


def threshold_grid(grid: VoxelGrid, tau: float = DEFAULT_THRESHOLD) -> OccupancySet:
    """Mark voxels with value >= tau as occupied (the boundary is inclusive)."""
    tau = _check_tau(tau)
    return OccupancySet(grid.values >= tau)


def error_grid(pred: VoxelGrid, gt: VoxelGrid) -> VoxelGrid:
    """Per-voxel absolute reconstruction error ``|pred - gt|``.

    Symmetric in its arguments and zero exactly where the two grids agree.
    """
    _check_same_dims(pred, gt)
    return VoxelGrid(np.abs(pred.values - gt.values))


def iou(pred: OccupancySet, gt: OccupancySet) -> float:
    """Intersection over union of two occupancy sets.

    Two empty sets agree perfectly, so the empty/empty case is 1.0.
    """
    _check_same_dims(pred, gt)
    union = int(np.logical_or(pred.bits, gt.bits).sum())
    if union == 0:
        return 1.0
    inter = int(np.logical_and(pred.bits, gt.bits).sum())
    return inter / union

def f_score(pred: OccupancySet, gt: OccupancySet) -> float:
    """Voxelwise F1 score: harmonic mean of precision and recall.

    Both sets empty scores 1.0; if exactly one side is empty the score is 0.0.
    """
    _check_same_dims(pred, gt)
    n_pred = pred.count
    n_gt = gt.count
    if n_pred == 0 and n_gt == 0:
        return 1.0
    if n_pred == 0 or n_gt == 0:
        return 0.0
    inter = int(np.logical_and(pred.bits, gt.bits).sum())
    precision = inter / n_pred
    recall = inter / n_gt
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def bce_loss(pred: VoxelGrid, gt: VoxelGrid) -> float:
    """Mean binary cross-entropy between predicted values and targets.

    Predictions are clamped to [BCE_EPS, 1 - BCE_EPS] before taking logs, so
    the result is always finite.
    """
    _check_same_dims(pred, gt)
    p = np.clip(pred.values, BCE_EPS, 1.0 - BCE_EPS)
    g = gt.values
    per_voxel = -(g * np.log(p) + (1.0 - g) * np.log1p(-p))
    return float(per_voxel.mean())


def dice_loss(pred: VoxelGrid, gt: VoxelGrid) -> float:
    """Soft Dice loss ``1 - (2*sum(p*g) + s) / (sum(p) + sum(g) + s)``."""
    _check_same_dims(pred, gt)
    p = pred.values
    g = gt.values
    s = DICE_SMOOTHING
    overlap = 2.0 * float((p * g).sum()) + s
    total = float(p.sum()) + float(g.sum()) + s
    return 1.0 - overlap / total

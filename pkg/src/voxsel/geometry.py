"""Viewpoints, the discrete viewpoint lattice, and voxel-grid rotation.

Angle and axis conventions
--------------------------
A viewpoint is a (yaw, pitch) pair in degrees with roll fixed at zero. Yaw
rotates about the world z axis, pitch about the world y axis, and the full
rotation composes Tait-Bryan style as ``R = Rz(yaw) @ Ry(pitch) @ Rx(roll)``
with right-handed axes. Yaw lives on the half-open circle [-180, 180) and
pitch is clamped to [-90, 90].

Rotating a grid by a viewpoint moves grid content so that the line of sight
of that viewpoint becomes the +x sweep direction of the rotated frame: the
camera sits on the -x side and an x-ascending scan visits voxels nearest the
camera first. Concretely a voxel at centered position ``p`` lands at
``R @ p``, and ``view_direction`` returns the world-frame unit vector that
points from the grid toward that camera.

Resampling is nearest-neighbor in the forward direction: each source voxel
deposits its value into the output cell nearest its rotated center, targets
off the cube are dropped, and collisions keep the maximum value. Forward
mapping keeps the rotated occupied count bounded by the number of source
voxels that land inside the cube, and it makes silhouette consistency exact:
a voxel's projected pixel (used by carving) is by construction covered by any
silhouette rendered through the same kernel. Rotation centers on the
continuous point ``(dim - 1) / 2`` for every grid parity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .grid import VoxelGrid

__all__ = [
    "Viewpoint",
    "ViewpointLattice",
    "discretize_viewpoints",
    "rotation_matrix",
    "rotate_grid",
    "rotated_cells",
    "view_direction",
    "viewpoint_from_direction",
    "sample_gaussian_view",
    "wrap_yaw",
    "clamp_pitch",
]


def wrap_yaw(yaw_deg: float) -> float:
    """Wrap an angle into the half-open range [-180, 180)."""
    return float((yaw_deg + 180.0) % 360.0 - 180.0)


def clamp_pitch(pitch_deg: float) -> float:
    """Clamp an angle into the closed range [-90, 90]."""
    return float(min(90.0, max(-90.0, pitch_deg)))


@dataclass(frozen=True)
class Viewpoint:
    """A camera orientation: yaw and pitch in degrees, roll pinned to 0.

    The constructor normalizes yaw into [-180, 180) and clamps pitch into
    [-90, 90], so two viewpoints describing the same orientation compare
    equal.
    """

    yaw: float
    pitch: float
    roll: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.yaw) and math.isfinite(self.pitch)):
            raise ValueError(f"viewpoint angles must be finite, got ({self.yaw}, {self.pitch})")
        if self.roll != 0.0:
            raise ValueError(f"roll is fixed at 0, got {self.roll}")
        object.__setattr__(self, "yaw", wrap_yaw(self.yaw))
        object.__setattr__(self, "pitch", clamp_pitch(self.pitch))
        object.__setattr__(self, "roll", 0.0)


def rotation_matrix(v: Viewpoint) -> np.ndarray:
    """Right-handed rotation ``Rz(yaw) @ Ry(pitch) @ Rx(roll)`` as a 3x3 array."""
    cy, sy = math.cos(math.radians(v.yaw)), math.sin(math.radians(v.yaw))
    cp, sp = math.cos(math.radians(v.pitch)), math.sin(math.radians(v.pitch))
    rz = np.array([[cy, -sy, 0.0], [sy, cy, 0.0], [0.0, 0.0, 1.0]])
    ry = np.array([[cp, 0.0, sp], [0.0, 1.0, 0.0], [-sp, 0.0, cp]])
    # Roll is identically zero, so Rx drops out of the product.
    return rz @ ry


def view_direction(v: Viewpoint) -> np.ndarray:
    """Unit vector pointing from the grid toward the camera, world frame.

    The rotation for ``v`` carries this direction onto the -x axis of the
    rotated frame, where the projection sweep starts.
    """
    return -rotation_matrix(v)[0, :].copy()


def viewpoint_from_direction(direction: np.ndarray) -> Viewpoint:
    """Inverse of :func:`view_direction`, up to yaw at the gimbal poles.

    ``direction`` need not be normalized. For directions along +-y (where
    pitch is unconstrained) pitch 0 is returned.
    """
    d = np.asarray(direction, dtype=np.float64)
    norm = float(np.linalg.norm(d))
    if d.shape != (3,) or norm == 0.0 or not np.all(np.isfinite(d)):
        raise ValueError(f"direction must be a nonzero finite 3-vector, got {direction!r}")
    rx, ry_, rz = (-d / norm).tolist()
    planar = math.hypot(rx, rz)
    if planar == 0.0:
        return Viewpoint(yaw=math.degrees(math.atan2(-ry_, 0.0)), pitch=0.0)
    if rx >= 0.0:
        yaw = math.atan2(-ry_, planar)
        pitch = math.atan2(rz, rx)
    else:
        # Mirror branch: cos(yaw) < 0 keeps pitch inside [-90, 90].
        yaw = math.atan2(-ry_, -planar)
        pitch = math.atan2(-rz, -rx)
    return Viewpoint(yaw=math.degrees(yaw), pitch=math.degrees(pitch))


@dataclass(frozen=True)
class ViewpointLattice:
    """Regular grid of viewpoint interval centers covering the view sphere.

    ``centers`` is ordered with the yaw index varying fastest, so entry ``k``
    covers yaw cell ``k % n_yaw`` and pitch cell ``k // n_yaw``.
    """

    interval_deg: float
    n_yaw: int
    n_pitch: int
    centers: tuple[Viewpoint, ...]

    def lattice_index(self, k: int) -> tuple[int, int]:
        """(yaw index, pitch index) of the k-th center."""
        return (k % self.n_yaw, k // self.n_yaw)

    def center_at(self, yaw_index: int, pitch_index: int) -> Viewpoint:
        if not (0 <= yaw_index < self.n_yaw and 0 <= pitch_index < self.n_pitch):
            raise IndexError(f"lattice index ({yaw_index}, {pitch_index}) out of range")
        return self.centers[pitch_index * self.n_yaw + yaw_index]

    def cell_of(self, v: Viewpoint) -> tuple[int, int]:
        """Indices of the unique interval cell containing ``v``.

        Yaw cells are half-open; the last pitch cell is closed at +90 so the
        cells partition the full (yaw, pitch) rectangle.
        """
        i = int((v.yaw + 180.0) // self.interval_deg)
        j = int((v.pitch + 90.0) // self.interval_deg)
        return (min(i, self.n_yaw - 1), min(j, self.n_pitch - 1))


def discretize_viewpoints(interval_deg: float) -> ViewpointLattice:
    """Split yaw [-180, 180) and pitch [-90, 90] into interval_deg cells.

    The interval must divide both 360 and 180 (so 22.5 is fine, 50 is not).
    Each cell is represented by its median angle, e.g. a 30 degree lattice
    starts at (-165, -75).
    """
    interval_deg = float(interval_deg)
    if interval_deg <= 0:
        raise ValueError(f"interval must be positive, got {interval_deg}")
    n_yaw = round(360.0 / interval_deg)
    n_pitch = round(180.0 / interval_deg)
    if n_pitch < 1 or n_yaw * interval_deg != 360.0 or n_pitch * interval_deg != 180.0:
        raise ValueError(f"interval must divide both 360 and 180, got {interval_deg}")
    centers = tuple(
        Viewpoint(
            yaw=-180.0 + (i + 0.5) * interval_deg,
            pitch=-90.0 + (j + 0.5) * interval_deg,
        )
        for j in range(n_pitch)
        for i in range(n_yaw)
    )
    return ViewpointLattice(interval_deg=interval_deg, n_yaw=n_yaw, n_pitch=n_pitch, centers=centers)


@lru_cache(maxsize=512)
def _rotated_cells_cached(dim: int, yaw: float, pitch: float) -> tuple[np.ndarray, np.ndarray]:
    rot = rotation_matrix(Viewpoint(yaw=yaw, pitch=pitch))
    half = (dim - 1) / 2.0
    coords = np.indices((dim, dim, dim), dtype=np.float64).reshape(3, -1).T - half
    target = coords @ rot.T + half
    cells = np.rint(target).astype(np.int64)
    inside = ((cells >= 0) & (cells < dim)).all(axis=1)
    cells.flags.writeable = False
    inside.flags.writeable = False
    return cells, inside

def rotated_cells(dim: int, v: Viewpoint) -> tuple[np.ndarray, np.ndarray]:
    """Forward map of every voxel center of a cubic grid under ``v``.

    Returns ``(cells, inside)`` where ``cells[k]`` is the integer output cell
    nearest the rotated center of source voxel ``k`` (sources enumerated in C
    order over ``(x, y, z)`` indices) and ``inside[k]`` says whether that cell
    lies within the cube. Both arrays are cached and read-only.
    """
    if dim < 1:
        raise ValueError(f"dim must be positive, got {dim}")
    return _rotated_cells_cached(int(dim), v.yaw, v.pitch)


def rotate_grid(grid: VoxelGrid, v: Viewpoint) -> VoxelGrid:
    """Rotate a cubic grid's content by the viewpoint rotation.

    Nearest-neighbor forward resampling about the grid center: source values
    deposit into their rotated cells, out-of-cube targets are dropped, vacated
    cells read 0, and colliding deposits keep the maximum value.
    """
    if not grid.is_cubic:
        raise ValueError(f"rotation requires a cubic grid, got dims {grid.dims}")
    dim = grid.dims[0]
    cells, inside = rotated_cells(dim, v)
    vals = grid.values.reshape(-1)
    src = inside & (vals > 0.0)
    out = np.zeros((dim, dim, dim), dtype=np.float64)
    tgt = cells[src]
    flat = (tgt[:, 0] * dim + tgt[:, 1]) * dim + tgt[:, 2]
    np.maximum.at(out.reshape(-1), flat, vals[src])
    return VoxelGrid(out)


def sample_gaussian_view(center: Viewpoint, sigma_deg: float, rng: np.random.Generator) -> Viewpoint:
    """Draw a viewpoint near ``center`` with independent Gaussian jitter.

    One normal draw perturbs yaw, a second perturbs pitch (in that order);
    the result is wrapped and clamped by the Viewpoint constructor. Sigma 0
    returns the center exactly.
    """
    if not (math.isfinite(sigma_deg) and sigma_deg >= 0.0):
        raise ValueError(f"sigma must be finite and nonnegative, got {sigma_deg}")
    dyaw, dpitch = rng.normal(0.0, sigma_deg, size=2) if sigma_deg > 0.0 else (0.0, 0.0)
    return Viewpoint(yaw=center.yaw + dyaw, pitch=center.pitch + dpitch)

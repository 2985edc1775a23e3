"""Point-cloud normalization, Chamfer distance, voxelization and volumetric IoU."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import DegenerateCloud, EmptyCloud, GridMismatch
from .geometry import PointCloud, as_points

UNIT_BOUNDS = ((-0.5, -0.5, -0.5), (0.5, 0.5, 0.5))


def normalize_cloud(cloud) -> PointCloud:
    """Center the bounding box at the origin and scale its diagonal to 1."""
    pts = as_points(cloud)
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    diag = np.linalg.norm(hi - lo)
    if diag <= 1e-12:
        raise DegenerateCloud("bounding box diagonal is zero")
    return PointCloud((pts - (lo + hi) / 2) / diag)


def chamfer_distance(p1, p2, x100: bool = False, normalized: bool = False) -> float:
    """Symmetric mean nearest-neighbour distance (not squared).

    With ``normalized=True`` both clouds are checked to have unit bbox diagonal.
    """
    a, b = as_points(p1), as_points(p2)
    if len(a) == 0 or len(b) == 0:
        raise EmptyCloud("chamfer distance needs two non-empty clouds")
    if normalized:
        for pts in (a, b):
            if abs(np.linalg.norm(pts.max(0) - pts.min(0)) - 1.0) > 1e-9:
                raise ValueError("cloud is not normalized to unit bbox diagonal")
    d_ab = cKDTree(b).query(a, k=1)[0]
    d_ba = cKDTree(a).query(b, k=1)[0]
    cd = d_ab.mean() + d_ba.mean()
    return float(cd * 100 if x100 else cd)


@dataclass(eq=False)
class VoxelGrid:
    occupancy: np.ndarray
    bounds: tuple
    n_outside: int = 0

    @property
    def resolution(self) -> int:
        return self.occupancy.shape[0]


def voxelize(cloud, resolution: int = 32, bounds=UNIT_BOUNDS) -> VoxelGrid:
    """Occupancy grid: a voxel is set when it contains at least one point.

    Cells are half-open, except that points on the upper bound go to the last
    cell. Points outside ``bounds`` are dropped and counted in ``n_outside``.
    """
    if resolution < 1:
        raise ValueError("resolution must be >= 1")
    lo = np.asarray(bounds[0], dtype=np.float64)
    hi = np.asarray(bounds[1], dtype=np.float64)
    if np.any(hi <= lo):
        raise ValueError("bounds must have positive extent on every axis")
    occ = np.zeros((resolution,) * 3, dtype=bool)
    pts = np.asarray(cloud.points if isinstance(cloud, PointCloud) else cloud, dtype=np.float64).reshape(-1, 3)
    inside = np.all((pts >= lo) & (pts <= hi), axis=1)
    idx = np.floor((pts[inside] - lo) / (hi - lo) * resolution).astype(np.int64)
    idx = np.minimum(idx, resolution - 1)
    occ[idx[:, 0], idx[:, 1], idx[:, 2]] = True
    bounds = (tuple(float(x) for x in lo), tuple(float(x) for x in hi))
    return VoxelGrid(occ, bounds, int((~inside).sum()))


def volumetric_iou(a: VoxelGrid, b: VoxelGrid) -> float:
    if a.occupancy.shape != b.occupancy.shape or a.bounds != b.bounds:
        raise GridMismatch("grids differ in resolution or bounds")
    union = np.logical_or(a.occupancy, b.occupancy).sum()
    if union == 0:
        return 1.0
    return float(np.logical_and(a.occupancy, b.occupancy).sum() / union)

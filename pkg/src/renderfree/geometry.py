"""Point clouds, pinhole cameras and projection to continuous pixel coordinates.

Conventions
-----------
Camera frame is x right, y down, z forward. A world point ``X`` maps to the
camera frame as ``R @ X + t``. Pixel ``(row, col)`` has its center at the
continuous coordinate ``(u, v) = (col + 0.5, row + 0.5)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np
from scipy.spatial.transform import Rotation

from .errors import BehindCamera, DegenerateFrame

Z_NEAR = 1e-4


@dataclass(eq=False)
class PointCloud:
    """``N`` world-space points stored as an ``(N, 3)`` float array."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError(f"expected (N, 3) points, got shape {pts.shape}")
        if len(pts) < 1:
            raise ValueError("a point cloud needs at least one point")
        if not np.all(np.isfinite(pts)):
            raise ValueError("point coordinates must be finite")
        self.points = pts

    def __len__(self):
        return len(self.points)


def as_points(cloud) -> np.ndarray:
    if isinstance(cloud, PointCloud):
        return cloud.points
    return np.asarray(cloud, dtype=np.float64).reshape(-1, 3)


@dataclass(frozen=True, eq=False)
class CameraPose:
    """Rigid world-to-camera pose plus pinhole intrinsics.

    ``rotation`` is a unit quaternion in scalar-first order ``(w, x, y, z)``.
    With ``orthographic`` set, the projection drops the perspective divide and
    ``focal`` becomes pixels per world unit.
    """

    rotation: tuple
    translation: tuple
    focal: float
    principal_point: tuple
    width: int
    height: int
    orthographic: bool = False
    z_near: float = field(default=Z_NEAR)

    def __post_init__(self):
        q = np.asarray(self.rotation, dtype=np.float64)
        if q.shape != (4,) or abs(np.linalg.norm(q) - 1.0) > 1e-9:
            raise ValueError("rotation must be a unit quaternion (w, x, y, z)")
        if not self.focal > 0:
            raise ValueError("focal must be positive")
        if self.width < 4 or self.height < 4:
            raise ValueError("image must be at least 4x4 pixels")
        object.__setattr__(self, "rotation", tuple(float(x) for x in q))
        object.__setattr__(self, "translation", tuple(float(x) for x in self.translation))
        object.__setattr__(self, "principal_point", tuple(float(x) for x in self.principal_point))
        object.__setattr__(self, "focal", float(self.focal))
        object.__setattr__(self, "width", int(self.width))
        object.__setattr__(self, "height", int(self.height))

    @cached_property
    def R(self) -> np.ndarray:
        w, x, y, z = self.rotation
        return Rotation.from_quat([x, y, z, w]).as_matrix()

    @cached_property
    def t(self) -> np.ndarray:
        return np.array(self.translation)

    @property
    def center(self) -> np.ndarray:
        """Camera center in world coordinates."""
        return -self.R.T @ self.t

    def to_camera(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(points, dtype=np.float64) @ self.R.T + self.t

    def to_dict(self) -> dict:
        return {
            "rotation_wxyz": list(self.rotation),
            "translation": list(self.translation),
            "focal": self.focal,
            "principal_point": list(self.principal_point),
            "width": self.width,
            "height": self.height,
            "orthographic": self.orthographic,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CameraPose":
        return cls(
            rotation=tuple(d["rotation_wxyz"]),
            translation=tuple(d["translation"]),
            focal=d["focal"],
            principal_point=tuple(d["principal_point"]),
            width=d["width"],
            height=d["height"],
            orthographic=d.get("orthographic", False),
        )


def _matrix_to_quat(R: np.ndarray) -> tuple:
    x, y, z, w = Rotation.from_matrix(R).as_quat()
    q = np.array([w, x, y, z])
    q /= np.linalg.norm(q)
    if q[0] < 0:
        q = -q
    return tuple(q)


def look_at_camera(eye, target, up, focal, width, height, orthographic=False) -> CameraPose:
    """Build a pose at ``eye`` whose optical axis passes through ``target``."""
    eye = np.asarray(eye, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    up = np.asarray(up, dtype=np.float64)
    forward = target - eye
    dist = np.linalg.norm(forward)
    if dist <= 1e-9:
        raise DegenerateFrame("eye and target coincide")
    forward /= dist
    right = np.cross(forward, up)
    n = np.linalg.norm(right)
    if n <= 1e-9 * max(np.linalg.norm(up), 1.0):
        raise DegenerateFrame("up vector is parallel to the viewing direction")
    right /= n
    down = np.cross(forward, right)
    R = np.stack([right, down, forward])
    q = _matrix_to_quat(R)
    # translation from the quantized rotation so the target stays on-axis
    R_q = Rotation.from_quat([q[1], q[2], q[3], q[0]]).as_matrix()
    t = -R_q @ eye
    return CameraPose(
        rotation=q,
        translation=tuple(t),
        focal=focal,
        principal_point=(width / 2.0, height / 2.0),
        width=width,
        height=height,
        orthographic=orthographic,
    )


class Projection2(NamedTuple):
    uv: np.ndarray
    depth: float


class ProjectedCloud(NamedTuple):
    """Index-aligned projections of a whole cloud.

    Entries with ``valid == False`` lie behind the near plane; their ``uv`` is
    computed with the depth clamped to ``z_near`` and should not be trusted.
    """

    uv: np.ndarray
    depth: np.ndarray
    valid: np.ndarray

    def __len__(self):
        return len(self.depth)


def _project(pose: CameraPose, points: np.ndarray):
    pc = pose.to_camera(points)
    z = pc[:, 2]
    valid = z > pose.z_near
    pp = np.asarray(pose.principal_point)
    if pose.orthographic:
        uv = pp + pose.focal * pc[:, :2]
    else:
        zc = np.where(valid, z, pose.z_near)
        uv = pp + pose.focal * pc[:, :2] / zc[:, None]
    return uv, z, valid, pc


def project_point(pose: CameraPose, point) -> Projection2:
    p = np.asarray(point, dtype=np.float64).reshape(1, 3)
    if not np.all(np.isfinite(p)):
        raise ValueError("point must be finite")
    uv, z, valid, _ = _project(pose, p)
    if not valid[0]:
        raise BehindCamera(f"point depth {z[0]:.3g} is not beyond z_near={pose.z_near}")
    return Projection2(uv[0], float(z[0]))


def project_cloud(pose: CameraPose, cloud) -> ProjectedCloud:
    uv, z, valid, _ = _project(pose, as_points(cloud))
    return ProjectedCloud(uv, z, valid)


def projection_jacobians(pose: CameraPose, points: np.ndarray) -> np.ndarray:
    """Stacked ``(N, 2, 3)`` Jacobians of ``uv`` w.r.t. world coordinates.

    Rows for points behind the near plane are zero.
    """
    pc = pose.to_camera(points)
    n = len(pc)
    f = pose.focal
    Jc = np.zeros((n, 2, 3))
    if pose.orthographic:
        Jc[:, 0, 0] = f
        Jc[:, 1, 1] = f
    else:
        z = pc[:, 2]
        valid = z > pose.z_near
        zs = np.where(valid, z, 1.0)
        Jc[:, 0, 0] = f / zs
        Jc[:, 1, 1] = f / zs
        Jc[:, 0, 2] = -f * pc[:, 0] / zs**2
        Jc[:, 1, 2] = -f * pc[:, 1] / zs**2
        Jc[~valid] = 0.0
    return Jc @ pose.R


def projection_jacobian(pose: CameraPose, point) -> np.ndarray:
    """2x3 Jacobian of the pixel coordinates w.r.t. the world point."""
    p = np.asarray(point, dtype=np.float64).reshape(1, 3)
    z = pose.to_camera(p)[0, 2]
    if z <= pose.z_near:
        raise BehindCamera(f"point depth {z:.3g} is not beyond z_near={pose.z_near}")
    return projection_jacobians(pose, p)[0]

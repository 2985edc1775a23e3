"""Synthetic ground truth: parametric meshes, camera rings, silhouettes, surface samples."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadParams, NothingVisible
from .field import BinarySilhouette
from .geometry import CameraPose, PointCloud, look_at_camera, project_cloud

SHAPES = ("sphere", "box", "torus", "composite_chair", "composite_plane")


@dataclass(eq=False)
class TriMesh:
    vertices: np.ndarray
    triangles: np.ndarray

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        self.triangles = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        if self.triangles.size and (self.triangles.min() < 0 or self.triangles.max() >= len(self.vertices)):
            raise BadParams("triangle index out of range")
        if np.any(self.areas() <= 1e-12):
            raise BadParams("mesh contains degenerate triangles")

    def areas(self) -> np.ndarray:
        a, b, c = (self.vertices[self.triangles[:, k]] for k in range(3))
        return 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)


def _icosphere(subdiv: int):
    phi = (1 + 5 ** 0.5) / 2
    verts = [(-1, phi, 0), (1, phi, 0), (-1, -phi, 0), (1, -phi, 0),
             (0, -1, phi), (0, 1, phi), (0, -1, -phi), (0, 1, -phi),
             (phi, 0, -1), (phi, 0, 1), (-phi, 0, -1), (-phi, 0, 1)]
    verts = [np.array(v, dtype=np.float64) / np.linalg.norm(v) for v in verts]
    faces = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
             (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
             (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
             (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    for _ in range(subdiv):
        cache = {}

        def mid(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                m = verts[i] + verts[j]
                verts.append(m / np.linalg.norm(m))
                cache[key] = len(verts) - 1
            return cache[key]

        new = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new
    return np.array(verts), np.array(faces)


_BOX_FACES = np.array([
    (0, 2, 1), (0, 3, 2),  # z-
    (4, 5, 6), (4, 6, 7),  # z+
    (0, 1, 5), (0, 5, 4),  # y-
    (3, 7, 6), (3, 6, 2),  # y+
    (0, 4, 7), (0, 7, 3),  # x-
    (1, 2, 6), (1, 6, 5),  # x+
])


def _box(lo, hi):
    (x0, y0, z0), (x1, y1, z1) = lo, hi
    v = np.array([(x0, y0, z0), (x1, y0, z0), (x1, y1, z0), (x0, y1, z0),
                  (x0, y0, z1), (x1, y0, z1), (x1, y1, z1), (x0, y1, z1)], dtype=np.float64)
    return v, _BOX_FACES.copy()


def _merge(parts):
    verts, faces, off = [], [], 0
    for v, f in parts:
        verts.append(v)
        faces.append(f + off)
        off += len(v)
    return np.concatenate(verts), np.concatenate(faces)


def _torus(major, minor, n_major, n_minor):
    a = 2 * np.pi * np.arange(n_major) / n_major
    b = 2 * np.pi * np.arange(n_minor) / n_minor
    A, B = np.meshgrid(a, b, indexing="ij")
    ring = major + minor * np.cos(B)
    v = np.stack([ring * np.cos(A), minor * np.sin(B), ring * np.sin(A)], axis=-1).reshape(-1, 3)
    faces = []
    for i in range(n_major):
        for j in range(n_minor):
            p = i * n_minor + j
            q = ((i + 1) % n_major) * n_minor + j
            r = ((i + 1) % n_major) * n_minor + (j + 1) % n_minor
            s = i * n_minor + (j + 1) % n_minor
            faces += [(p, s, r), (p, r, q)]
    return v, np.array(faces)


def _chair():
    seat_h, leg = 0.08, 0.06
    parts = [
        _box((-0.5, 0.0, -0.5), (0.5, seat_h, 0.5)),            # seat
        _box((-0.5, seat_h, -0.5), (0.5, 1.1, -0.38)),          # back
    ]
    for x in (-0.5, 0.5 - 2 * leg):
        for z in (-0.5, 0.5 - 2 * leg):
            parts.append(_box((x, -0.9, z), (x + 2 * leg, 0.0, z + 2 * leg)))
    return _merge(parts)


def _plane():
    parts = [
        _box((-0.12, -0.1, -1.0), (0.12, 0.1, 1.0)),            # fuselage
        _box((-1.0, -0.03, -0.15), (1.0, 0.03, 0.25)),          # wings
        _box((-0.4, -0.03, 0.8), (0.4, 0.03, 1.0)),             # tailplane
        _box((-0.03, 0.1, 0.75), (0.03, 0.45, 1.0)),            # fin
    ]
    return _merge(parts)


def make_primitive(kind: str, **params) -> TriMesh:
    """Watertight mesh centered at the origin with bounding-box diagonal 1.

    ``sphere`` takes ``subdiv``; ``box`` takes ``size=(sx, sy, sz)``; ``torus``
    takes ``major``, ``minor``, ``segments=(n_major, n_minor)``. Composites are
    unions of boxes and take no parameters.
    """
    if kind == "sphere":
        subdiv = params.get("subdiv", 3)
        if not isinstance(subdiv, (int, np.integer)) or subdiv < 0:
            raise BadParams("subdiv must be a non-negative integer")
        v, f = _icosphere(int(subdiv))
    elif kind == "box":
        size = np.asarray(params.get("size", (1.0, 1.0, 1.0)), dtype=np.float64)
        if size.shape != (3,) or np.any(size <= 0):
            raise BadParams("box size must be three positive numbers")
        v, f = _box(-size / 2, size / 2)
    elif kind == "torus":
        major = params.get("major", 1.0)
        minor = params.get("minor", 0.35)
        n_major, n_minor = params.get("segments", (32, 16))
        if not (major > 0 and minor > 0 and minor < major and n_major >= 3 and n_minor >= 3):
            raise BadParams("torus needs 0 < minor < major and at least 3 segments each way")
        v, f = _torus(major, minor, n_major, n_minor)
    elif kind == "composite_chair":
        v, f = _chair()
    elif kind == "composite_plane":
        v, f = _plane()
    else:
        raise BadParams(f"unknown primitive {kind!r}; choose from {SHAPES}")
    lo, hi = v.min(axis=0), v.max(axis=0)
    v = (v - (lo + hi) / 2) / np.linalg.norm(hi - lo)
    return TriMesh(v, f)


def ring_cameras(count: int, radius: float = 2.5, elevation_deg: float = 20.0,
                 focal: float = 64.0, width: int = 64, height: int = 64) -> list[CameraPose]:
    """Cameras at equally spaced azimuths, all looking at the origin.

    Azimuth 0 sits on the +z side; world +y is up.
    """
    if count < 1:
        raise BadParams("need at least one camera")
    if radius <= 0.5:
        raise BadParams("radius must exceed 0.5 to stay outside the shape")
    el = np.deg2rad(elevation_deg)
    poses = []
    for k in range(count):
        az = 2 * np.pi * k / count
        eye = radius * np.array([np.cos(el) * np.sin(az), np.sin(el), np.cos(el) * np.cos(az)])
        poses.append(look_at_camera(eye, (0.0, 0.0, 0.0), (0.0, 1.0, 0.0), focal, width, height))
    return poses


def _owns_edge(dx, dy):
    # tie-break for pixel centers exactly on an edge; an edge and its reverse never agree
    return (dy > 0) | ((dy == 0) & (dx < 0))


def rasterize_silhouette(mesh: TriMesh, pose: CameraPose, name: str = "") -> BinarySilhouette:
    """Mark every pixel whose center is covered by a projected triangle."""
    proj = project_cloud(pose, mesh.vertices)
    h, w = pose.height, pose.width
    mask = np.zeros((h, w), dtype=np.uint8)
    for tri in mesh.triangles:
        if not proj.valid[tri].all():
            continue
        p = proj.uv[tri]
        area = (p[1, 0] - p[0, 0]) * (p[2, 1] - p[0, 1]) - (p[1, 1] - p[0, 1]) * (p[2, 0] - p[0, 0])
        if area == 0:
            continue
        if area < 0:
            p = p[[0, 2, 1]]
        c0 = max(int(np.floor(p[:, 0].min() - 0.5)), 0)
        c1 = min(int(np.ceil(p[:, 0].max() - 0.5)), w - 1)
        r0 = max(int(np.floor(p[:, 1].min() - 0.5)), 0)
        r1 = min(int(np.ceil(p[:, 1].max() - 0.5)), h - 1)
        if c0 > c1 or r0 > r1:
            continue
        cu = np.arange(c0, c1 + 1) + 0.5
        cv = np.arange(r0, r1 + 1) + 0.5
        U, V = np.meshgrid(cu, cv)
        inside = np.ones(U.shape, dtype=bool)
        for a, b in ((p[0], p[1]), (p[1], p[2]), (p[2], p[0])):
            dx, dy = b[0] - a[0], b[1] - a[1]
            e = dx * (V - a[1]) - dy * (U - a[0])
            inside &= (e > 0) | ((e == 0) & _owns_edge(dx, dy))
        mask[r0:r1 + 1, c0:c1 + 1] |= inside.astype(np.uint8)
    if not mask.any():
        raise NothingVisible("mesh covers no pixel center in this view")
    return BinarySilhouette(mask, name)


def sample_surface(mesh: TriMesh, n: int, seed: int = 0) -> PointCloud:
    """Area-weighted uniform samples on the mesh surface."""
    if n < 1:
        raise BadParams("n must be at least 1")
    rng = np.random.default_rng(seed)
    areas = mesh.areas()
    tri = rng.choice(len(areas), size=n, p=areas / areas.sum())
    r1 = np.sqrt(rng.random(n))
    r2 = rng.random(n)
    a, b, c = (mesh.vertices[mesh.triangles[tri, k]] for k in range(3))
    pts = (1 - r1)[:, None] * a + (r1 * (1 - r2))[:, None] * b + (r1 * r2)[:, None] * c
    return PointCloud(pts)

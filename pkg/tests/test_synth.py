import numpy as np
import pytest
from scipy import stats

from renderfree.errors import BadParams, NothingVisible
from renderfree.geometry import look_at_camera, project_cloud
from renderfree.synth import (SHAPES, TriMesh, make_primitive, rasterize_silhouette, ring_cameras,
                              sample_surface)


def bbox_diag(mesh):
    return np.linalg.norm(mesh.vertices.max(0) - mesh.vertices.min(0))


def is_watertight(mesh):
    # every undirected edge shared by exactly two faces, with opposite orientation
    directed = {}
    for t in mesh.triangles:
        for a, b in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
            directed[(a, b)] = directed.get((a, b), 0) + 1
    return all(n == 1 and directed.get((b, a), 0) == 1 for (a, b), n in directed.items())


def test_icosphere_counts():
    m = make_primitive("sphere")
    assert len(m.vertices) == 642 and len(m.triangles) == 1280
    r = np.linalg.norm(m.vertices, axis=1)
    np.testing.assert_allclose(r, r[0], rtol=1e-12)


def test_box_counts():
    m = make_primitive("box", size=(1, 2, 3))
    assert len(m.vertices) == 8 and len(m.triangles) == 12


@pytest.mark.parametrize("kind", SHAPES)
def test_primitive_normalized(kind):
    m = make_primitive(kind)
    assert bbox_diag(m) == pytest.approx(1.0, abs=1e-9)
    np.testing.assert_allclose(m.vertices.max(0) + m.vertices.min(0), 0, atol=1e-12)


@pytest.mark.parametrize("kind", ["sphere", "box", "torus"])
def test_simple_primitives_watertight(kind):
    assert is_watertight(make_primitive(kind))


def test_composites_are_closed_parts():
    # composites are unions of closed boxes; each box is watertight on its own
    for kind in ("composite_chair", "composite_plane"):
        m = make_primitive(kind)
        assert len(m.triangles) % 12 == 0
        for b in range(len(m.triangles) // 12):
            tris = m.triangles[12 * b:12 * b + 12]
            assert is_watertight(TriMesh(m.vertices, tris))


def test_bad_params():
    with pytest.raises(BadParams):
        make_primitive("teapot")
    with pytest.raises(BadParams):
        make_primitive("torus", major=0.2, minor=0.5)
    with pytest.raises(BadParams):
        ring_cameras(0)
    with pytest.raises(BadParams):
        TriMesh([[0, 0, 0], [1, 0, 0], [2, 0, 0]], [[0, 1, 2]])


def test_ring_camera_azimuths():
    poses = ring_cameras(4, radius=2.0, elevation_deg=0.0)
    centers = np.array([p.center for p in poses])
    np.testing.assert_allclose(centers, [[0, 0, 2], [2, 0, 0], [0, 0, -2], [-2, 0, 0]], atol=1e-12)
    for p in poses:
        np.testing.assert_allclose(project_cloud(p, [[0, 0, 0]]).uv[0], p.principal_point, atol=1e-12)


def test_square_hand_count():
    # a unit square at depth 2 with focal 32 spans 16 px on each side
    v = np.array([[-0.5, -0.5, 0], [0.5, -0.5, 0], [0.5, 0.5, 0], [-0.5, 0.5, 0]], dtype=float)
    mesh = TriMesh(v, [[0, 1, 2], [0, 2, 3]])
    pose = look_at_camera((0, 0, 2), (0, 0, 0), (0, 1, 0), 32, 64, 64)
    sil = rasterize_silhouette(mesh, pose)
    assert sil.mask.sum() == 256
    rows, cols = np.nonzero(sil.mask)
    assert (rows.min(), rows.max(), cols.min(), cols.max()) == (24, 39, 24, 39)


def test_sphere_mask_is_convex_disk():
    pose = ring_cameras(1, 2.5, 0.0, 128, 64, 64)[0]
    mask = rasterize_silhouette(make_primitive("sphere"), pose).mask.astype(bool)
    # every row and column is a single contiguous run
    for line in list(mask) + list(mask.T):
        idx = np.flatnonzero(line)
        if idx.size:
            assert idx[-1] - idx[0] + 1 == idx.size
    assert np.array_equal(mask, mask[::-1, :]) and np.array_equal(mask, mask[:, ::-1])


def test_nothing_visible():
    pose = look_at_camera((0, 0, 2), (0, 0, 5), (0, 1, 0), 32, 64, 64)
    with pytest.raises(NothingVisible):
        rasterize_silhouette(make_primitive("sphere"), pose)


def test_vertex_projections_consistent_with_mask():
    # vertices of a convex mesh project inside or next to the covered pixels
    mesh = make_primitive("sphere")
    for pose in ring_cameras(4, 2.5, 20, 128, 64, 64):
        mask = rasterize_silhouette(mesh, pose).mask
        padded = np.pad(mask, 1)
        uv = project_cloud(pose, mesh.vertices).uv
        r, c = np.floor(uv[:, 1]).astype(int) + 1, np.floor(uv[:, 0]).astype(int) + 1
        near = np.zeros(len(uv), dtype=bool)
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                near |= padded[r + dr, c + dc] > 0
        assert near.mean() >= 0.999


def test_surface_samples_consistent_with_masks():
    mesh = make_primitive("composite_chair")
    pts = sample_surface(mesh, 4000, seed=1)
    for pose in ring_cameras(4, 2.5, 20, 128, 64, 64):
        mask = np.pad(rasterize_silhouette(mesh, pose).mask, 1)
        uv = project_cloud(pose, pts).uv
        r, c = np.floor(uv[:, 1]).astype(int) + 1, np.floor(uv[:, 0]).astype(int) + 1
        near = np.zeros(len(uv), dtype=bool)
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                near |= mask[r + dr, c + dc] > 0
        assert near.mean() >= 0.999


def test_torus_azimuthal_symmetry():
    # a 4-fold ring around a shape with 32 azimuthal segments sees identical masks
    mesh = make_primitive("torus")
    masks = [rasterize_silhouette(mesh, p).mask for p in ring_cameras(4, 2.5, 20, 128, 64, 64)]
    for m in masks[1:]:
        assert (m != masks[0]).sum() <= 2


def test_surface_sampling_on_surface_and_deterministic():
    mesh = make_primitive("sphere")
    a, b = sample_surface(mesh, 300, seed=7), sample_surface(mesh, 300, seed=7)
    np.testing.assert_array_equal(a.points, b.points)
    r = np.linalg.norm(a.points, axis=1)
    assert r.max() <= 0.5 / np.sqrt(3) + 1e-12  # icosphere vertices lie on the radius


def test_surface_sampling_area_weighted():
    # two triangles with areas 3:1
    v = np.array([[0, 0, 0], [3, 0, 0], [0, 1, 0], [10, 0, 0], [11, 0, 0], [10, 1, 0]], dtype=float)
    mesh = TriMesh(v, [[0, 1, 2], [3, 4, 5]])
    pts = sample_surface(mesh, 4000, seed=3).points
    k = int((pts[:, 0] < 5).sum())
    assert stats.binomtest(k, 4000, 0.75).pvalue > 1e-3


def test_surface_sampling_uniform_within_triangle():
    v = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]], dtype=float)
    pts = sample_surface(TriMesh(v, [[0, 1, 2]]), 20000, seed=4).points
    assert np.all(pts[:, 0] + pts[:, 1] <= 1 + 1e-12) and np.all(pts[:, :2] >= 0)
    # the sub-triangle x + y <= 1/2 holds a quarter of the area
    assert stats.binomtest(int((pts[:, 0] + pts[:, 1] <= 0.5).sum()), 20000, 0.25).pvalue > 1e-3

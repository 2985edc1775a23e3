import numpy as np
import pytest
from PIL import Image

from renderfree import io
from renderfree.errors import InconsistentView, ParseError, UnsupportedFormat
from renderfree.field import BinarySilhouette
from renderfree.geometry import look_at_camera
from renderfree.synth import make_primitive


def test_pgm_p5_all_white(tmp_path):
    p = tmp_path / "a.pgm"
    p.write_bytes(b"P5\n4 3\n255\n" + b"\xff" * 12)
    sil = io.read_silhouette(p)
    assert sil.mask.shape == (3, 4) and sil.mask.all()


def test_pgm_threshold_and_comments(tmp_path):
    p = tmp_path / "b.pgm"
    p.write_text("P2\n# comment\n3 1\n# another\n255\n127 128 0\n")
    assert io.read_silhouette(p).mask.tolist() == [[0, 1, 0]]


def test_pgm_maxval_rescaled(tmp_path):
    p = tmp_path / "c.pgm"
    p.write_text("P2 2 1 1 1 0\n")
    assert io.read_pgm(p).tolist() == [[255, 0]]


def test_pgm_errors(tmp_path):
    p = tmp_path / "t.pgm"
    p.write_bytes(b"P5\n4 4\n255\n" + b"\x00" * 5)
    with pytest.raises(ParseError):
        io.read_silhouette(p)
    p.write_bytes(b"P5\n4")
    with pytest.raises(ParseError):
        io.read_silhouette(p)
    p.write_bytes(b"GIF89a")
    with pytest.raises(UnsupportedFormat):
        io.read_silhouette(p)


def test_png_input(tmp_path):
    arr = np.zeros((5, 6), dtype=np.uint8)
    arr[1:3, 2:5] = 200
    Image.fromarray(arr, mode="L").save(tmp_path / "m.png")
    np.testing.assert_array_equal(io.read_silhouette(tmp_path / "m.png").mask, arr >= 128)
    Image.fromarray(np.zeros((2, 2, 3), dtype=np.uint8)).save(tmp_path / "rgb.png")
    with pytest.raises(UnsupportedFormat):
        io.read_silhouette(tmp_path / "rgb.png")


def test_silhouette_round_trip(tmp_path, disk_sil):
    io.write_silhouette(tmp_path / "d.pgm", disk_sil)
    np.testing.assert_array_equal(io.read_silhouette(tmp_path / "d.pgm").mask, disk_sil.mask)


def test_ply_round_trip_exact(tmp_path):
    pts = np.random.default_rng(0).normal(size=(50, 3)) * 1e-3
    io.write_cloud_ply(pts, tmp_path / "c.ply")
    np.testing.assert_array_equal(io.read_cloud_ply(tmp_path / "c.ply").points, pts)


def test_ply_errors(tmp_path):
    p = tmp_path / "bad.ply"
    p.write_text("ply\nformat binary_little_endian 1.0\nelement vertex 1\nend_header\n")
    with pytest.raises(UnsupportedFormat):
        io.read_cloud_ply(p)
    p.write_text("ply\nformat ascii 1.0\nelement vertex 3\nproperty double x\nend_header\n1 2 3\n")
    with pytest.raises(ParseError):
        io.read_cloud_ply(p)
    p.write_text("hello\n")
    with pytest.raises(ParseError):
        io.read_cloud_ply(p)


def test_obj_round_trip(tmp_path):
    mesh = make_primitive("torus")
    io.write_mesh_obj(mesh, tmp_path / "t.obj")
    back = io.read_mesh_obj(tmp_path / "t.obj")
    np.testing.assert_array_equal(back.vertices, mesh.vertices)
    np.testing.assert_array_equal(back.triangles, mesh.triangles)


def test_overlay(tmp_path):
    sil = BinarySilhouette(np.eye(4, dtype=np.uint8))
    io.write_overlay(sil, np.array([[0.5, 0.5], [100.0, 100.0], [np.nan, 1.0]]), tmp_path / "o.ppm")
    data = (tmp_path / "o.ppm").read_bytes()
    assert data.startswith(b"P6\n4 4\n255\n")
    img = np.frombuffer(data[len(b"P6\n4 4\n255\n"):], dtype=np.uint8).reshape(4, 4, 3)
    assert tuple(img[0, 0]) == (30, 80, 255) and tuple(img[1, 1]) == (30, 80, 255)
    assert tuple(img[3, 3]) == (200, 200, 200) and tuple(img[3, 0]) == (40, 40, 40)
    io.write_overlay(sil, None, tmp_path / "e.ppm")


def test_cameras_round_trip(tmp_path):
    poses = [look_at_camera((1, 2, 3), (0, 0, 0), (0, 1, 0), 50, 64, 48),
             look_at_camera((0, 0, 2), (0, 0, 0), (0, 1, 0), 5, 32, 32, orthographic=True)]
    io.write_cameras(tmp_path / "cams.json", poses)
    back = io.read_cameras(tmp_path / "cams.json")
    for a, b in zip(poses, back):
        assert a.to_dict() == b.to_dict()
    (tmp_path / "bad.json").write_text('{"cams": []}')
    with pytest.raises(ParseError):
        io.read_cameras(tmp_path / "bad.json")


def test_load_views_size_mismatch(tmp_path, disk_sil, front_pose):
    io.write_silhouette(tmp_path / "m0.pgm", disk_sil)
    io.write_silhouette(tmp_path / "m1.pgm", BinarySilhouette(disk_sil.mask[:32]))
    io.write_cameras(tmp_path / "cameras.json", [front_pose])
    man = io.SceneManifest(64, 64, [{"mask": "m0.pgm", "camera": 0}], [front_pose])
    (tmp_path / "scene.json").write_text(man.to_json())
    assert len(io.load_views(tmp_path)) == 1
    man.views.append({"mask": "m1.pgm", "camera": 0})
    (tmp_path / "scene.json").write_text(man.to_json())
    with pytest.raises(InconsistentView):
        io.load_views(tmp_path)


def test_parse_config():
    run = io.parse_config("""
        # comment
        n_points = 200
        iterations=50   # trailing
        theta = 0.02
        mu_scales = 1, 2
        determinism = true
        views_used = 3
        pad = 16
        ablation_seeds = 0, 1
    """)
    assert run.fit.n_points == 200 and run.fit.iterations == 50
    assert run.fit.loss.theta == 0.02 and run.fit.loss.mu_scales == (1.0, 2.0)
    assert run.fit.views_used == 3 and run.pad == 16 and run.ablation_seeds == (0, 1)


@pytest.mark.parametrize("text", ["bogus = 1", "n_points = ten", "theta = -1", "just words",
                                  "determinism = maybe"])
def test_parse_config_errors(text):
    with pytest.raises(ParseError):
        io.parse_config(text)

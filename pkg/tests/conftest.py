import numpy as np
import pytest

from renderfree.field import BinarySilhouette, build_smoothed_field
from renderfree.geometry import look_at_camera
from renderfree.loss import View
from renderfree.synth import make_primitive, rasterize_silhouette, ring_cameras

ACCEPTANCE_LINES = []


def record(criterion, ok, detail=""):
    """Log one acceptance line; printed in the terminal summary."""
    line = f"[{'PASS' if ok else 'FAIL'}] {criterion}" + (f" :: {detail}" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def disk_mask(size=64, radius=12.0, center=None):
    c = size / 2 if center is None else center
    yy, xx = np.mgrid[0:size, 0:size]
    return ((xx + 0.5 - c) ** 2 + (yy + 0.5 - c) ** 2 <= radius ** 2).astype(np.uint8)


@pytest.fixture
def disk_sil():
    return BinarySilhouette(disk_mask(), "disk")


@pytest.fixture
def front_pose():
    return look_at_camera((0, 0, 2.5), (0, 0, 0), (0, 1, 0), 128, 64, 64)


@pytest.fixture
def disk_view(disk_sil, front_pose):
    return View(front_pose, disk_sil, build_smoothed_field(disk_sil))


def make_views(shape="sphere", count=4, res=64, focal=None, elevation=20.0, pad=32):
    mesh = make_primitive(shape)
    views = []
    for pose in ring_cameras(count, 2.5, elevation, focal or 2.0 * res, res, res):
        sil = rasterize_silhouette(mesh, pose)
        views.append(View(pose, sil, build_smoothed_field(sil, pad)))
    return mesh, views


@pytest.fixture(scope="session")
def sphere_scene():
    return make_views("sphere")

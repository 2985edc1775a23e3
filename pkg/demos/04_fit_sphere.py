"""Fit 1000 points to four silhouettes of a sphere and score the result."""

import time

from renderfree import FitConfig, chamfer_distance, fit, normalize_cloud, volumetric_iou, voxelize
from renderfree.field import build_smoothed_field
from renderfree.loss import View
from renderfree.optim import init_cloud
from renderfree.synth import make_primitive, rasterize_silhouette, ring_cameras, sample_surface

mesh = make_primitive("sphere")
views = []
for pose in ring_cameras(4, 2.5, 20, focal=128, width=64, height=64):
    sil = rasterize_silhouette(mesh, pose)
    views.append(View(pose, sil, build_smoothed_field(sil)))
gt = normalize_cloud(sample_surface(mesh, 8000, seed=123))

cfg = FitConfig(n_points=1000, iterations=300)
init = init_cloud(cfg.n_points, cfg.init_half_extent, cfg.seed)
t0 = time.perf_counter()
rep = fit(cfg, views, init=init, callback=lambda it, x, loss: it % 50 or print(f"iter {it:4d}  loss {loss:.5f}"))
print(f"{cfg.iterations} iterations in {time.perf_counter() - t0:.1f} s")

pred = normalize_cloud(rep.cloud)
print(f"coverage {rep.coverage_trace[0]:.3f} -> {rep.final_coverage:.3f}")
print(f"CD  {chamfer_distance(normalize_cloud(init), gt):.4f} -> {chamfer_distance(pred, gt):.4f}")
print(f"IoU {volumetric_iou(voxelize(pred), voxelize(gt)):.3f}")

# reference point: a perfect surface sample of the same size
perfect = normalize_cloud(sample_surface(mesh, 1000, seed=1))
print(f"perfect 1000-point sample: CD {chamfer_distance(perfect, gt):.4f}, "
      f"IoU {volumetric_iou(voxelize(perfect), voxelize(gt)):.3f}")

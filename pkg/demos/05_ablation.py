"""A small ablation table on the chair: which loss terms matter."""

from renderfree.field import build_smoothed_field
from renderfree.loss import View
from renderfree.optim import FitConfig, ablation_csv, run_ablation
from renderfree.synth import make_primitive, rasterize_silhouette, ring_cameras, sample_surface

mesh = make_primitive("composite_chair")
views = []
for pose in ring_cameras(4, 2.5, 20, focal=128, width=64, height=64):
    sil = rasterize_silhouette(mesh, pose)
    views.append(View(pose, sil, build_smoothed_field(sil)))
gt = sample_surface(mesh, 8000, seed=123)

# one seed and fewer iterations than the acceptance run; the ordering is already visible
rows = run_ablation(FitConfig(n_points=500, iterations=300), views, gt, seeds=(0,))
print(ablation_csv(rows, (0,)))

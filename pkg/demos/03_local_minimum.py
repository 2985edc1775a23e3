"""Raw L1 stalls in the background, the smoothed first term pulls points in."""

import numpy as np

from renderfree import BinarySilhouette, FitConfig, LossParams, View, build_smoothed_field, fit, look_at_camera
from renderfree.loss import effective_loss_grad

yy, xx = np.mgrid[0:64, 0:64]
disk = ((xx + 0.5 - 32) ** 2 + (yy + 0.5 - 32) ** 2 <= 144).astype(np.uint8)
sil = BinarySilhouette(disk, "disk")
pose = look_at_camera((0, 0, 2.5), (0, 0, 0), (0, 1, 0), 128, 64, 64)
view = View(pose, sil, build_smoothed_field(sil))

# points near the image corners, well away from the disk
rng = np.random.default_rng(0)
pts = np.column_stack([rng.choice([-1, 1], 30) * rng.uniform(0.35, 0.55, 30),
                       rng.choice([-1, 1], 30) * rng.uniform(0.35, 0.55, 30),
                       np.zeros(30)])

raw = LossParams(beta=0.0, first_term="raw_l1")
m1 = LossParams(beta=0.0)
print("raw L1 gradient norm:", np.linalg.norm(effective_loss_grad(pts, [view], raw)))
print("smoothed gradient norm:", np.linalg.norm(effective_loss_grad(pts, [view], m1)))

for name, params in (("raw L1", raw), ("smoothed", m1)):
    rep = fit(FitConfig(n_points=30, iterations=500, loss=params), [view], init=pts)
    print(f"{name:9s} coverage: {rep.coverage_trace[0]:.2f} -> {rep.final_coverage:.2f}")

"""Chamfer distance and voxel IoU on a few hand-made clouds."""

import numpy as np

from renderfree import chamfer_distance, normalize_cloud, volumetric_iou, voxelize

print("CD of two single points one unit apart:", chamfer_distance([[0, 0, 0]], [[1, 0, 0]]))

rng = np.random.default_rng(0)
a = rng.random((500, 3))
b = a + rng.normal(scale=0.01, size=a.shape)
print("CD of a jittered copy:", round(chamfer_distance(a, b), 5), " x100:", round(chamfer_distance(a, b, x100=True), 3))

# normalization: bbox centered at the origin with unit diagonal
n = normalize_cloud(a * 10 + 3)
print("normalized bbox diagonal:", np.linalg.norm(n.points.max(0) - n.points.min(0)))

ga, gb = voxelize(normalize_cloud(a)), voxelize(normalize_cloud(b))
print("occupied voxels:", ga.occupancy.sum(), gb.occupancy.sum(), " IoU:", round(volumetric_iou(ga, gb), 3))

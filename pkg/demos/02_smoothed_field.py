"""Build the smoothed silhouette field and look at its values and gradients."""

import numpy as np

from renderfree import BinarySilhouette, build_smoothed_field
from renderfree.field import bilinear_gradient, distance_transform_l2

# a 4x4 image with a 2x2 block in the middle, no padding
m = np.zeros((4, 4), dtype=np.uint8)
m[1:3, 1:3] = 1
print("distance to foreground:\n", distance_transform_l2(m).round(3))
fld = build_smoothed_field(BinarySilhouette(m), pad=0)
print("smoothed field:\n", fld.values)
# edge neighbours sit at 1 - eps, corners at eps, with eps = 1 / (2 * 4)

# a disk on a 64x64 image with the default 32-pixel pad
yy, xx = np.mgrid[0:64, 0:64]
disk = ((xx + 0.5 - 32) ** 2 + (yy + 0.5 - 32) ** 2 <= 144).astype(np.uint8)
fld = build_smoothed_field(BinarySilhouette(disk, "disk"))
print("padded size:", fld.width, "x", fld.height)
bg = fld.values[fld.mask == 0]
print(f"background range: [{bg.min():.5f}, {bg.max():.5f}]")

# the field rises toward the disk, so its gradient points to the center
for uv in [(5.0, 5.0), (60.0, 32.0), (32.0, 10.0)]:
    g = fld.gradient(np.array(uv))
    print(f"at {uv}: value {fld.sample(np.array(uv)):.4f}, gradient {g.round(5)}")

# a raw binary mask is flat off the object: its gradient is zero there
print("binary mask gradient at (5,5):", bilinear_gradient(disk.astype(float), np.array([5.0, 5.0])))

"""Project a point cloud through a ring of pinhole cameras and check the Jacobian."""

import numpy as np

from renderfree import look_at_camera, project_cloud
from renderfree.geometry import projection_jacobians
from renderfree.synth import make_primitive, ring_cameras, sample_surface

# a camera 2 units in front of the origin; the origin lands on the principal point
pose = look_at_camera((0, 0, 2), (0, 0, 0), (0, 1, 0), focal=32, width=64, height=64)
print("principal point:", pose.principal_point)
print("origin projects to:", project_cloud(pose, [[0, 0, 0]]).uv[0])

# moving half a unit to the right shifts the image by f * 0.5 / 2 = 8 px
print("(0.5,0,0) projects to:", project_cloud(pose, [[0.5, 0, 0]]).uv[0])

# points behind the camera are flagged, not dropped
proj = project_cloud(pose, [[0, 0, 0], [0, 0, 5]])
print("valid flags:", proj.valid)

# the analytic Jacobian against central differences
p = np.array([[0.1, -0.2, 0.3]])
J = projection_jacobians(pose, p)[0]
h = 1e-6
Jfd = np.stack([(project_cloud(pose, p + h * e).uv[0] - project_cloud(pose, p - h * e).uv[0]) / (2 * h)
                for e in np.eye(3)], axis=1)
print("max |J - J_fd|:", np.abs(J - Jfd).max())

# a ring of four cameras around a chair
mesh = make_primitive("composite_chair")
pts = sample_surface(mesh, 2000, seed=0)
for k, cam in enumerate(ring_cameras(4, radius=2.5, elevation_deg=20, focal=128, width=64, height=64)):
    uv = project_cloud(cam, pts).uv
    print(f"view {k}: uv range u [{uv[:, 0].min():.1f}, {uv[:, 0].max():.1f}]"
          f"  v [{uv[:, 1].min():.1f}, {uv[:, 1].max():.1f}]")

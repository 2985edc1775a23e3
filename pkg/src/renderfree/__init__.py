"""Render-free point-cloud reconstruction from multi-view binary silhouettes."""

from .errors import *  # noqa: F401,F403
from .field import (BinarySilhouette, SmoothedField, bilinear_gradient, bilinear_sample,
                    build_smoothed_field, distance_transform_l2)
from .geometry import (CameraPose, PointCloud, ProjectedCloud, Projection2, look_at_camera,
                       project_cloud, project_point, projection_jacobian)
from .loss import (LossParams, PerViewEval, View, boundary_bias, effective_loss,
                   effective_loss_grad, indicator_weights, l2_loss, loss_and_grad, m1_loss,
                   pairwise_distance, raw_l1_loss)
from .metrics import VoxelGrid, chamfer_distance, normalize_cloud, volumetric_iou, voxelize
from .optim import (ABLATION_MODES, AdamState, FitConfig, FitReport, adam_step, coverage, fit,
                    init_cloud, run_ablation)
from .synth import TriMesh, make_primitive, rasterize_silhouette, ring_cameras, sample_surface

__version__ = "0.1.0"

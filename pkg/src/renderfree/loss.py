"""Render-free silhouette coverage loss and its analytic gradient.

The loss for a cloud seen in several views has two parts per view:

* a coverage term ``1 - S(uv)`` that pulls every projection into the
  silhouette, sampled either from the smoothed field (``"m1"``) or from the
  raw binary mask (``"raw_l1"``, kept as a baseline that stalls in the
  background);
* a repulsion term between projection pairs,
  ``w_j * sum_{j' != j} w_j' * exp(-d(p_j, p_j') / theta + mu_j)``, which
  spreads projections over the silhouette.

``w`` (binary coverage at the projection) and ``mu`` (local foreground
fraction over several square scales) are recomputed each evaluation and
treated as constants by the gradient.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numba
import numpy as np

from .errors import InconsistentView
from .field import BinarySilhouette, SmoothedField, bilinear_gradient, bilinear_sample
from .geometry import CameraPose, ProjectedCloud, as_points, project_cloud, projection_jacobians

COINCIDENT_EPS = 1e-8


@dataclass
class LossParams:
    alpha: float = 1.0
    # calibrated on the synthetic scenes; larger repulsion weights or widths
    # keep points out of thin silhouette parts
    beta: float = 0.01
    theta: float = 0.01
    mu_scales: tuple = (1.0, 2.0, 3.0)
    mu_min: float = 1e-3
    normalize_inner_sum: bool = True
    # ablation switches
    first_term: str = "m1"
    use_weights: bool = True
    use_bias: bool = True

    def __post_init__(self):
        self.mu_scales = tuple(float(s) for s in self.mu_scales)
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be non-negative")
        if not self.theta > 0:
            raise ValueError("theta must be positive")
        if not 0 < self.mu_min < 1:
            raise ValueError("mu_min must lie in (0, 1)")
        s = self.mu_scales
        if not s or any(b <= a for a, b in zip(s, s[1:])) or s[0] <= 0:
            raise ValueError("mu_scales must be non-empty, positive and strictly increasing")
        if self.first_term not in ("m1", "raw_l1"):
            raise ValueError(f"unknown first_term {self.first_term!r}")


@dataclass(eq=False)
class View:
    """One supervision view: camera, binary silhouette and its smoothed field."""

    pose: CameraPose
    silhouette: BinarySilhouette
    field: SmoothedField

    def __post_init__(self):
        sil, fld = self.silhouette, self.field
        if (sil.width, sil.height) != (self.pose.width, self.pose.height):
            raise InconsistentView(
                f"silhouette is {sil.width}x{sil.height}, camera expects "
                f"{self.pose.width}x{self.pose.height}")
        p = fld.pad
        if fld.values.shape != (sil.height + 2 * p, sil.width + 2 * p) or fld.mask.shape != fld.values.shape:
            raise InconsistentView("smoothed field does not match the silhouette size")
        if not np.array_equal(fld.mask[p:fld.height - p, p:fld.width - p], sil.mask):
            raise InconsistentView("smoothed field was built from a different silhouette")


@dataclass
class PerViewEval:
    view: int
    sampled: np.ndarray
    w: np.ndarray
    mu: np.ndarray
    m1: np.ndarray
    l2: np.ndarray
    total: float


def _uv(projections) -> np.ndarray:
    if isinstance(projections, ProjectedCloud):
        return projections.uv
    return np.asarray(projections, dtype=np.float64).reshape(-1, 2)


def _valid(projections, n) -> np.ndarray:
    if isinstance(projections, ProjectedCloud):
        return projections.valid
    return np.ones(n, dtype=bool)


def _binary(src):
    """Binary grid and the uv offset that maps image coordinates onto it."""
    if isinstance(src, SmoothedField):
        return src.mask, src.pad
    if isinstance(src, BinarySilhouette):
        return src.mask, 0
    return np.asarray(src), 0


def raw_l1_loss(sil, projections) -> float:
    """Mean of ``1 - pi`` with ``pi`` sampled from the binary mask."""
    grid, off = _binary(sil)
    uv = _uv(projections)
    valid = _valid(projections, len(uv))
    per = np.where(valid, 1.0 - bilinear_sample(grid, uv + off), 0.0)
    return float(per.mean())


def m1_loss(field: SmoothedField, projections):
    """Coverage term on the smoothed field; returns ``(mean, per_point)``."""
    uv = _uv(projections)
    valid = _valid(projections, len(uv))
    per = np.where(valid, 1.0 - field.sample(uv), 0.0)
    return float(per.mean()), per


def indicator_weights(sil, projections) -> np.ndarray:
    grid, off = _binary(sil)
    uv = _uv(projections)
    return bilinear_sample(grid, uv + off)


def boundary_bias(sil, projections, mu_scales=(1.0, 2.0, 3.0), mu_min=1e-3) -> np.ndarray:
    """Mean binary sample over the corners of squares of half-width ``s`` around each projection."""
    grid, off = _binary(sil)
    uv = _uv(projections) + off
    corners = np.array([(su * s, sv * s) for s in mu_scales for su, sv in ((-1, -1), (1, -1), (-1, 1), (1, 1))])
    samples = bilinear_sample(grid, uv[:, None, :] + corners[None, :, :])
    return np.clip(samples.mean(axis=1), mu_min, 1.0)


def pairwise_distance(projections, diag: float) -> np.ndarray:
    """Pixel distances between all projection pairs divided by ``diag``."""
    uv = _uv(projections)
    diff = uv[:, None, :] - uv[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff)) / diag


def l2_loss(projections, w, mu, theta, diag, normalize_inner_sum=True):
    """Repulsion term; returns ``(sum over points, per_point)``."""
    uv = _uv(projections)
    n = len(uv)
    if n < 2:
        return 0.0, np.zeros(n)
    d = pairwise_distance(uv, diag)
    kernel = np.exp(-d / theta)
    np.fill_diagonal(kernel, 0.0)
    scale = np.asarray(w) * np.exp(mu)
    if normalize_inner_sum:
        scale = scale / (n - 1)
    per = scale * (kernel @ np.asarray(w, dtype=np.float64))
    return float(per.sum()), per


class ViewTerms(NamedTuple):
    sampled: np.ndarray
    w: np.ndarray
    mu: np.ndarray
    first: np.ndarray
    l2: np.ndarray
    grad_uv: np.ndarray | None


def view_weights(uv, valid, fld: SmoothedField, params: LossParams):
    """Stop-gradient weights ``w`` and biases ``mu`` for one view."""
    if params.use_weights:
        w = indicator_weights(fld, uv)
    else:
        w = np.ones(len(uv))
    if params.use_bias:
        mu = boundary_bias(fld, uv, params.mu_scales, params.mu_min)
    else:
        mu = np.full(len(uv), params.mu_min)
    w = np.where(valid, w, 0.0)
    return w, mu


def evaluate_view(uv, valid, fld: SmoothedField, params: LossParams, w=None, mu=None,
                  need_grad=False) -> ViewTerms:
    """Per-point terms for one view, optionally with ``d(alpha*first + beta*l2)/d(uv)``."""
    n = len(uv)
    if w is None or mu is None:
        w_, mu_ = view_weights(uv, valid, fld, params)
        w = w_ if w is None else w
        mu = mu_ if mu is None else mu
    puv = uv + fld.pad
    if params.first_term == "m1":
        grid = fld.values
    else:
        grid = fld.mask
    sampled = bilinear_sample(grid, puv)
    first = np.where(valid, 1.0 - sampled, 0.0)

    grad = np.zeros((n, 2)) if need_grad else None
    if need_grad and params.alpha > 0:
        grad -= params.alpha * np.where(valid[:, None], bilinear_gradient(grid, puv), 0.0)

    l2 = np.zeros(n)
    if params.beta > 0 and n > 1:
        diag = fld.diagonal
        coef = w * np.exp(mu)
        if params.normalize_inner_sum:
            coef = coef / (n - 1)
        ksum, g = _pair_terms(np.ascontiguousarray(uv), np.ascontiguousarray(w, dtype=np.float64),
                              coef, 1.0 / (diag * params.theta), COINCIDENT_EPS * diag, need_grad)
        l2 = coef * ksum
        if need_grad:
            grad += params.beta * g
    return ViewTerms(sampled, w, mu, first, l2, grad)


@numba.njit(cache=True, fastmath=True)
def _pair_terms(uv, w, coef, inv_scale, min_dist, need_grad):
    """Weighted kernel sums ``sum_j' w_j' exp(-d_jj')`` and the repulsion gradient in uv.

    Each unordered pair is visited once; pairs where both weights vanish are skipped.
    """
    n = uv.shape[0]
    ksum = np.zeros(n)
    grad = np.zeros((n, 2))
    for i in range(n):
        ui = uv[i, 0]
        vi = uv[i, 1]
        wi = w[i]
        ci = coef[i]
        acc_k = 0.0
        acc_u = 0.0
        acc_v = 0.0
        for j in range(i + 1, n):
            wj = w[j]
            if wi == 0.0 and wj == 0.0:
                continue
            du = ui - uv[j, 0]
            dv = vi - uv[j, 1]
            dist = np.sqrt(du * du + dv * dv)
            k = np.exp(-dist * inv_scale)
            acc_k += wj * k
            ksum[j] += wi * k
            if need_grad and dist > min_dist:
                s = -(ci * wj + coef[j] * wi) * k * inv_scale / dist
                acc_u += s * du
                acc_v += s * dv
                grad[j, 0] -= s * du
                grad[j, 1] -= s * dv
        ksum[i] += acc_k
        grad[i, 0] += acc_u
        grad[i, 1] += acc_v
    return ksum, grad


def _check_views(views):
    if len(views) < 1:
        raise ValueError("at least one view is required")
    return [v if isinstance(v, View) else View(*v) for v in views]


def effective_loss(cloud, views: Sequence, params: LossParams | None = None, weights_from=None):
    """Combined loss averaged over points and views; returns ``(loss, [PerViewEval])``.

    ``weights_from`` evaluates ``w`` and ``mu`` at another cloud instead of
    ``cloud``; with it, the loss is exactly the function whose derivative
    :func:`effective_loss_grad` returns at ``weights_from``.
    """
    params = params or LossParams()
    views = _check_views(views)
    pts = as_points(cloud)
    n = len(pts)
    ref = None if weights_from is None else as_points(weights_from)
    total = 0.0
    evals = []
    for i, view in enumerate(views):
        proj = project_cloud(view.pose, pts)
        w = mu = None
        if ref is not None:
            rp = project_cloud(view.pose, ref)
            w, mu = view_weights(rp.uv, rp.valid, view.field, params)
        t = evaluate_view(proj.uv, proj.valid, view.field, params, w, mu)
        per = params.alpha * t.first + params.beta * t.l2
        vt = float(per.sum())
        total += vt
        evals.append(PerViewEval(i, t.sampled, t.w, t.mu, t.first, t.l2, vt))
    return total / (len(views) * n), evals


def loss_and_grad(cloud, views: Sequence, params: LossParams | None = None):
    """Loss value and its ``(N, 3)`` gradient in one pass."""
    params = params or LossParams()
    views = _check_views(views)
    pts = as_points(cloud)
    n = len(pts)
    total = 0.0
    grad = np.zeros_like(pts)
    for view in views:
        proj = project_cloud(view.pose, pts)
        t = evaluate_view(proj.uv, proj.valid, view.field, params, need_grad=True)
        total += float((params.alpha * t.first + params.beta * t.l2).sum())
        J = projection_jacobians(view.pose, pts)
        grad += np.einsum("nk,nkd->nd", t.grad_uv, J)
    norm = len(views) * n
    return total / norm, grad / norm


def effective_loss_grad(cloud, views: Sequence, params: LossParams | None = None) -> np.ndarray:
    return loss_and_grad(cloud, views, params)[1]

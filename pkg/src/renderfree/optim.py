"""Direct per-instance fitting of point coordinates with Adam, plus the ablation harness."""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import NumericalFailure, ShapeMismatch
from .field import bilinear_sample
from .geometry import PointCloud, as_points, project_cloud
from .loss import LossParams, View, loss_and_grad
from .metrics import chamfer_distance, normalize_cloud

ABLATION_MODES = ("full", "m1_only", "l2_only", "raw_l1_plus_l2", "no_w", "no_mu")
VIEW_COUNTS = (2, 3, 4)


@dataclass
class FitConfig:
    n_points: int = 1000
    iterations: int = 2000
    learning_rate: float = 1e-2
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0
    init_half_extent: float = 0.5
    loss: LossParams = field(default_factory=LossParams)
    ablation_mode: str = "full"
    views_used: int | None = None
    determinism: bool = True

    def __post_init__(self):
        if self.n_points < 1:
            raise ValueError("n_points must be >= 1")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError("beta1 and beta2 must lie in [0, 1)")
        if self.ablation_mode not in ABLATION_MODES:
            raise ValueError(f"unknown ablation mode {self.ablation_mode!r}")
        if self.init_half_extent < 0:
            raise ValueError("init_half_extent must be non-negative")

    def effective_loss_params(self) -> LossParams:
        """Loss parameters with the ablation mode applied."""
        p = self.loss
        mode = self.ablation_mode
        if mode == "m1_only":
            return replace(p, beta=0.0)
        if mode == "l2_only":
            return replace(p, alpha=0.0)
        if mode == "raw_l1_plus_l2":
            return replace(p, first_term="raw_l1")
        if mode == "no_w":
            return replace(p, use_weights=False)
        if mode == "no_mu":
            return replace(p, use_bias=False)
        return p


def init_cloud(n: int, half_extent: float, seed) -> PointCloud:
    """I.i.d. uniform points in the cube ``[-half_extent, half_extent]^3``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    return PointCloud(rng.uniform(-half_extent, half_extent, size=(n, 3)))


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    step: int = 0

    @classmethod
    def zeros_like(cls, x) -> "AdamState":
        x = np.asarray(x, dtype=np.float64)
        return cls(np.zeros_like(x), np.zeros_like(x), 0)


def adam_step(state: AdamState, coords, grads, lr=1e-2, beta1=0.9, beta2=0.999, eps=1e-8):
    """One bias-corrected Adam update; returns ``(new_coords, new_state)``."""
    x = np.asarray(coords, dtype=np.float64)
    g = np.asarray(grads, dtype=np.float64)
    if x.shape != g.shape or state.m.shape != x.shape:
        raise ShapeMismatch(f"coords {x.shape}, grads {g.shape}, state {state.m.shape}")
    t = state.step + 1
    m = beta1 * state.m + (1 - beta1) * g
    v = beta2 * state.v + (1 - beta2) * g * g
    m_hat = m / (1 - beta1 ** t)
    v_hat = v / (1 - beta2 ** t)
    x = x - lr * m_hat / (np.sqrt(v_hat) + eps)
    return x, AdamState(m, v, t)


def coverage(cloud, views: Sequence[View]) -> float:
    """Fraction of projections whose binary-mask sample is >= 0.5, averaged over views."""
    pts = as_points(cloud)
    fractions = []
    for view in views:
        proj = project_cloud(view.pose, pts)
        s = bilinear_sample(view.field.mask, proj.uv + view.field.pad)
        fractions.append(np.mean(proj.valid & (s >= 0.5)))
    return float(np.mean(fractions))


@dataclass
class FitReport:
    loss_trace: list
    coverage_trace: list
    cloud: PointCloud
    final_loss: float
    final_coverage: float
    wall_time: float | None
    config: dict
    config_text: str | None = None

    def to_json(self) -> str:
        d = {
            "config": self.config,
            "config_text": self.config_text,
            "iterations": len(self.loss_trace),
            "initial_loss": self.loss_trace[0],
            "final_loss": self.final_loss,
            "final_coverage": self.final_coverage,
            "wall_time": self.wall_time,
            "loss_trace": self.loss_trace,
            "coverage_trace": self.coverage_trace,
        }
        return json.dumps(d, indent=2, sort_keys=True) + "\n"

    def trace_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["iteration", "loss", "coverage"])
        for i, (l, c) in enumerate(zip(self.loss_trace, self.coverage_trace)):
            wr.writerow([i, repr(l), repr(c)])
        return buf.getvalue()


def fit(config: FitConfig, views: Sequence[View], init: PointCloud | None = None,
        config_text: str | None = None, callback=None) -> FitReport:
    """Minimize the effective loss over point coordinates with full-batch Adam.

    ``init`` overrides the random initial cloud. ``callback(it, cloud, loss)``
    is called before every update.
    """
    if len(views) < 1:
        raise ValueError("at least one view is required")
    k = len(views) if config.views_used is None else config.views_used
    if not 1 <= k <= len(views):
        raise ValueError(f"views_used={k} outside [1, {len(views)}]")
    views = list(views)[:k]
    params = config.effective_loss_params()
    if init is None:
        x = init_cloud(config.n_points, config.init_half_extent, config.seed).points
    else:
        x = as_points(init).copy()
    state = AdamState.zeros_like(x)
    losses, covs = [], []
    t0 = time.perf_counter()
    for it in range(config.iterations):
        loss, grad = loss_and_grad(x, views, params)
        if not np.isfinite(loss) or not np.all(np.isfinite(grad)):
            raise NumericalFailure(f"non-finite loss or gradient at iteration {it}")
        losses.append(loss)
        covs.append(coverage(x, views))
        if callback is not None:
            callback(it, x, loss)
        x, state = adam_step(state, x, grad, config.learning_rate, config.beta1,
                             config.beta2, config.adam_eps)
    final_loss, _ = loss_and_grad(x, views, params)
    wall = time.perf_counter() - t0
    cfg = asdict(config)
    cfg["loss"]["mu_scales"] = list(cfg["loss"]["mu_scales"])
    return FitReport(
        loss_trace=losses,
        coverage_trace=covs,
        cloud=PointCloud(x),
        final_loss=float(final_loss),
        final_coverage=coverage(x, views),
        wall_time=None if config.determinism else wall,
        config=cfg,
        config_text=config_text,
    )


@dataclass
class AblationRow:
    name: str
    cds: list

    @property
    def median(self) -> float:
        return float(np.median(self.cds))


def run_ablation(base: FitConfig, views: Sequence[View], gt_cloud, seeds=(0,),
                 modes=ABLATION_MODES, view_counts=VIEW_COUNTS) -> list[AblationRow]:
    """Chamfer distance (normalized clouds) per ablation mode and per view count.

    Mode rows use all views; ``views=k`` rows use the first ``k`` views in full mode.
    """
    gt = normalize_cloud(gt_cloud)
    g_all = len(views)
    cache = {}

    def run(mode, k, seed):
        key = (mode, k, seed)
        if key not in cache:
            cfg = replace(base, ablation_mode=mode, views_used=k, seed=seed)
            rep = fit(cfg, views)
            cache[key] = chamfer_distance(normalize_cloud(rep.cloud), gt)
        return cache[key]

    rows = []
    for mode in modes:
        rows.append(AblationRow(mode, [run(mode, g_all, s) for s in seeds]))
    for k in view_counts:
        if k > g_all:
            continue
        rows.append(AblationRow(f"views={k}", [run("full", k, s) for s in seeds]))
    return rows


def ablation_csv(rows: Sequence[AblationRow], seeds) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["row"] + [f"cd_seed{s}" for s in seeds] + ["cd_median"])
    for r in rows:
        wr.writerow([r.name] + [repr(c) for c in r.cds] + [repr(r.median)])
    return buf.getvalue()

import math

import numpy as np
import pytest

from renderfree.errors import ShapeMismatch
from renderfree.loss import LossParams
from renderfree.optim import (AblationRow, AdamState, FitConfig, ablation_csv, adam_step, coverage, fit,
                              init_cloud, run_ablation)
from renderfree.synth import make_primitive, sample_surface


def scalar_adam(x, grad_fn, steps, lr, b1=0.9, b2=0.999, eps=1e-8):
    m = v = 0.0
    for t in range(1, steps + 1):
        g = grad_fn(x)
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        x -= lr * (m / (1 - b1 ** t)) / (math.sqrt(v / (1 - b2 ** t)) + eps)
    return x


def test_init_cloud_deterministic_and_bounded():
    a, b = init_cloud(1000, 0.5, 3), init_cloud(1000, 0.5, 3)
    np.testing.assert_array_equal(a.points, b.points)
    assert np.abs(a.points).max() <= 0.5
    assert np.all(np.abs(a.points.mean(0)) < 0.03)
    assert not np.array_equal(a.points, init_cloud(1000, 0.5, 4).points)


def test_adam_matches_scalar_reference():
    x0 = np.array([1.5, -0.3, 4.0])
    x, st = x0.copy(), AdamState.zeros_like(x0)
    for _ in range(100):
        x, st = adam_step(st, x, 2 * x, lr=0.05)
    ref = [scalar_adam(float(v), lambda z: 2 * z, 100, 0.05) for v in x0]
    np.testing.assert_allclose(x, ref, atol=1e-12, rtol=0)
    assert st.step == 100


def test_adam_first_step_is_lr_times_sign():
    x0 = np.array([[1.0, -2.0, 3.0]])
    x, _ = adam_step(AdamState.zeros_like(x0), x0, np.array([[0.5, -7.0, 1e3]]), lr=0.1)
    np.testing.assert_allclose(x0 - x, [[0.1, -0.1, 0.1]], rtol=1e-6)


def test_adam_zero_gradient_no_move():
    x0 = np.arange(6.0).reshape(2, 3)
    x, st = adam_step(AdamState.zeros_like(x0), x0, np.zeros_like(x0))
    np.testing.assert_array_equal(x, x0)


def test_adam_shape_mismatch():
    with pytest.raises(ShapeMismatch):
        adam_step(AdamState.zeros_like(np.zeros((2, 3))), np.zeros((2, 3)), np.zeros((3, 3)))


def test_config_validation():
    with pytest.raises(ValueError):
        FitConfig(ablation_mode="nope")
    with pytest.raises(ValueError):
        FitConfig(learning_rate=0)
    assert FitConfig(ablation_mode="m1_only").effective_loss_params().beta == 0
    assert FitConfig(ablation_mode="l2_only").effective_loss_params().alpha == 0
    assert FitConfig(ablation_mode="raw_l1_plus_l2").effective_loss_params().first_term == "raw_l1"
    assert not FitConfig(ablation_mode="no_w").effective_loss_params().use_weights
    assert not FitConfig(ablation_mode="no_mu").effective_loss_params().use_bias


def test_fit_decreases_loss_and_raises_coverage(sphere_scene):
    _, views = sphere_scene
    rep = fit(FitConfig(n_points=150, iterations=150), views)
    assert len(rep.loss_trace) == 150
    assert rep.final_loss < rep.loss_trace[0]
    assert rep.final_coverage > rep.coverage_trace[0]
    assert rep.final_coverage == pytest.approx(coverage(rep.cloud, views))
    assert rep.wall_time is None
    assert fit(FitConfig(n_points=10, iterations=2, determinism=False), views).wall_time > 0


def test_fit_views_used(sphere_scene):
    _, views = sphere_scene
    with pytest.raises(ValueError):
        fit(FitConfig(n_points=5, iterations=1, views_used=5), views)
    rep = fit(FitConfig(n_points=5, iterations=1, views_used=2), views)
    assert rep.final_coverage == pytest.approx(coverage(rep.cloud, views[:2]))


def test_fit_callback_and_init(sphere_scene):
    _, views = sphere_scene
    seen = []
    init = np.zeros((4, 3))
    fit(FitConfig(n_points=4, iterations=3), views, init=init, callback=lambda it, x, l: seen.append(it))
    assert seen == [0, 1, 2]


def test_report_serialization(sphere_scene):
    _, views = sphere_scene
    rep = fit(FitConfig(n_points=20, iterations=5, loss=LossParams()), views, config_text="x = 1\n")
    text = rep.to_json()
    assert text == fit(FitConfig(n_points=20, iterations=5), views, config_text="x = 1\n").to_json()
    lines = rep.trace_csv().splitlines()
    assert lines[0] == "iteration,loss,coverage" and len(lines) == 6
    assert float(lines[1].split(",")[1]) == rep.loss_trace[0]


def test_ablation_rows_and_csv(sphere_scene):
    mesh, views = sphere_scene
    gt = sample_surface(mesh, 500, 1)
    base = FitConfig(n_points=30, iterations=10)
    rows = run_ablation(base, views, gt, seeds=(0, 1), modes=("full", "m1_only"), view_counts=(2, 4, 9))
    assert [r.name for r in rows] == ["full", "m1_only", "views=2", "views=4"]
    assert rows[3].cds == rows[0].cds
    text = ablation_csv(rows, (0, 1))
    assert text.splitlines()[0] == "row,cd_seed0,cd_seed1,cd_median"
    assert text == ablation_csv(run_ablation(base, views, gt, seeds=(0, 1), modes=("full", "m1_only"),
                                             view_counts=(2, 4, 9)), (0, 1))
    assert AblationRow("x", [3.0, 1.0, 2.0]).median == 2.0

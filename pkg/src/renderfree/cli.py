"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import replace
from pathlib import Path

from . import io
from .errors import NumericalFailure, RenderFreeError
from .field import build_smoothed_field
from .geometry import project_cloud
from .loss import effective_loss
from .metrics import chamfer_distance, normalize_cloud, volumetric_iou, voxelize
from .optim import ABLATION_MODES, ablation_csv, fit, run_ablation
from .synth import SHAPES, make_primitive, rasterize_silhouette, ring_cameras, sample_surface

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _synth(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    mesh = make_primitive(args.shape)
    focal = args.focal if args.focal is not None else 2.0 * args.res
    poses = ring_cameras(args.views, args.radius, args.elevation, focal, args.res, args.res)
    views = []
    for i, pose in enumerate(poses):
        name = f"mask_{i:03d}.pgm"
        io.write_silhouette(out / name, rasterize_silhouette(mesh, pose, name))
        views.append({"mask": name, "camera": i})
    io.write_cameras(out / "cameras.json", poses)
    io.write_cloud_ply(sample_surface(mesh, args.gt_points, args.seed), out / "gt.ply")
    io.write_mesh_obj(mesh, out / "mesh.obj")
    man = io.SceneManifest(args.res, args.res, views, poses, "gt.ply", "mesh.obj", args.shape)
    (out / "scene.json").write_text(man.to_json())
    print(f"wrote {len(poses)} views of {args.shape} to {out}")
    return EXIT_OK


def _fit(args) -> int:
    run = io.read_config(args.config)
    cfg = run.fit
    if args.ablation is not None:
        cfg = replace(cfg, ablation_mode=args.ablation)
    views = io.load_views(args.scene, run.pad)
    report = fit(cfg, views, config_text=run.text)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(report.to_json())
    (out / "trace.csv").write_text(report.trace_csv())
    io.write_cloud_ply(report.cloud, out / "cloud.ply")
    used = views[:len(views) if cfg.views_used is None else cfg.views_used]
    for i, view in enumerate(used):
        io.write_overlay(view.silhouette, project_cloud(view.pose, report.cloud), out / f"overlay_{i:03d}.ppm")
    if args.trace:
        _, evals = effective_loss(report.cloud, used, cfg.effective_loss_params())
        with open(out / "terms.csv", "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["view", "point", "sampled", "w", "mu", "first_term", "l2"])
            for ev in evals:
                for j in range(len(ev.m1)):
                    wr.writerow([ev.view, j, repr(float(ev.sampled[j])), repr(float(ev.w[j])),
                                 repr(float(ev.mu[j])), repr(float(ev.m1[j])), repr(float(ev.l2[j]))])
    print(f"final loss {report.final_loss:.6g}  coverage {report.final_coverage:.4f}")
    return EXIT_OK


def _eval(args) -> int:
    pred = io.read_cloud_ply(args.pred)
    gt = io.read_cloud_ply(args.gt)
    if not args.raw:
        pred, gt = normalize_cloud(pred), normalize_cloud(gt)
    cd = chamfer_distance(pred, gt, x100=args.x100)
    print(f"CD = {cd:.9g}")
    if args.iou:
        iou = volumetric_iou(voxelize(pred, args.res), voxelize(gt, args.res))
        print(f"IoU = {iou:.9g}")
    return EXIT_OK


def _ablate(args) -> int:
    run = io.read_config(args.config)
    scene = Path(args.scene)
    man = io.read_scene(scene)
    if not man.gt_cloud:
        raise RenderFreeError("scene has no ground-truth cloud")
    views = io.load_views(scene, run.pad)
    gt = io.read_cloud_ply(scene / man.gt_cloud)
    rows = run_ablation(run.fit, views, gt, seeds=run.ablation_seeds)
    text = ablation_csv(rows, run.ablation_seeds)
    Path(args.out).write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


def _inspect_field(args) -> int:
    sil = io.read_silhouette(args.mask)
    fld = build_smoothed_field(sil, args.pad)
    io.write_field_pgm(args.out, fld.values)
    print(f"field {fld.width}x{fld.height}, background range "
          f"[{fld.values[fld.mask == 0].min():.4f}, {fld.values[fld.mask == 0].max():.4f}]")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="renderfree", description="Fit point clouds to multi-view silhouettes.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("synth", help="generate a synthetic scene")
    s.add_argument("--shape", choices=SHAPES, required=True)
    s.add_argument("--views", type=int, default=4)
    s.add_argument("--res", type=int, default=64)
    s.add_argument("--out", required=True)
    s.add_argument("--radius", type=float, default=2.5)
    s.add_argument("--elevation", type=float, default=20.0)
    s.add_argument("--focal", type=float, default=None, help="pixels; default 2 * res")
    s.add_argument("--gt-points", type=int, default=8000)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=_synth)

    f = sub.add_parser("fit", help="fit a point cloud to a scene")
    f.add_argument("--scene", required=True)
    f.add_argument("--config", required=True)
    f.add_argument("--out", required=True)
    f.add_argument("--trace", action="store_true", help="also dump per-view, per-point terms")
    f.add_argument("--ablation", choices=ABLATION_MODES, default=None)
    f.set_defaults(func=_fit)

    e = sub.add_parser("eval", help="Chamfer distance / IoU between two PLY clouds")
    e.add_argument("--pred", required=True)
    e.add_argument("--gt", required=True)
    e.add_argument("--x100", action="store_true")
    e.add_argument("--iou", action="store_true")
    e.add_argument("--res", type=int, default=32)
    e.add_argument("--raw", action="store_true", help="skip bbox normalization")
    e.set_defaults(func=_eval)

    a = sub.add_parser("ablate", help="run the ablation table")
    a.add_argument("--scene", required=True)
    a.add_argument("--config", required=True)
    a.add_argument("--out", required=True)
    a.set_defaults(func=_ablate)

    i = sub.add_parser("inspect-field", help="write the smoothed field of a mask as PGM")
    i.add_argument("--mask", required=True)
    i.add_argument("--pad", type=int, default=32)
    i.add_argument("--out", required=True)
    i.set_defaults(func=_inspect_field)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return args.func(args)
    except NumericalFailure as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (RenderFreeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

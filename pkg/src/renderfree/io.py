"""File formats: PGM/PNG masks, ASCII PLY/OBJ, PPM overlays, camera JSON, key=value configs.

Byte-level layouts are described in FORMATS.md at the repository root.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .errors import InconsistentView, ParseError, UnsupportedFormat
from .field import DEFAULT_PAD, BinarySilhouette, build_smoothed_field
from .geometry import CameraPose, PointCloud, as_points
from .loss import LossParams, View
from .optim import FitConfig
from .synth import TriMesh

# ---------------------------------------------------------------- masks


def _pgm_tokens(data: bytes, count: int, start: int = 0):
    """Read ``count`` whitespace-separated header tokens, skipping ``#`` comments."""
    tokens, i, n = [], start, len(data)
    while len(tokens) < count:
        while i < n and data[i:i + 1].isspace():
            i += 1
        if i < n and data[i:i + 1] == b"#":
            while i < n and data[i:i + 1] not in (b"\n", b"\r"):
                i += 1
            continue
        j = i
        while j < n and not data[j:j + 1].isspace() and data[j:j + 1] != b"#":
            j += 1
        if j == i:
            raise ParseError("unexpected end of PGM header")
        tokens.append(data[i:j])
        i = j
    return tokens, i


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise UnsupportedFormat(f"{path}: not a P2/P5 PGM file")
    try:
        (w, h, maxval), pos = _pgm_tokens(data, 3, 2)
        w, h, maxval = int(w), int(h), int(maxval)
    except ValueError as exc:
        raise ParseError(f"{path}: malformed PGM header") from exc
    if w <= 0 or h <= 0 or not 0 < maxval < 65536:
        raise ParseError(f"{path}: bad PGM dimensions or maxval")
    if magic == b"P5":
        body = data[pos + 1:]
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype(np.uint8)
        need = w * h * dtype.itemsize
        if len(body) < need:
            raise ParseError(f"{path}: truncated PGM raster ({len(body)} of {need} bytes)")
        img = np.frombuffer(body[:need], dtype=dtype).reshape(h, w)
    else:
        vals = data[pos:].split()
        if len(vals) < w * h:
            raise ParseError(f"{path}: truncated PGM raster")
        try:
            img = np.array([int(v) for v in vals[:w * h]]).reshape(h, w)
        except ValueError as exc:
            raise ParseError(f"{path}: non-integer PGM sample") from exc
    if maxval != 255:
        img = np.round(img.astype(np.float64) * 255.0 / maxval)
    return img.astype(np.int64)


def write_pgm(path, image: np.ndarray) -> None:
    """Write an 8-bit binary (P5) PGM."""
    img = np.asarray(image)
    if img.dtype != np.uint8:
        img = np.clip(np.round(img), 0, 255).astype(np.uint8)
    h, w = img.shape
    Path(path).write_bytes(b"P5\n%d %d\n255\n" % (w, h) + img.tobytes())


def read_silhouette(path) -> BinarySilhouette:
    """Load a PGM (P2/P5) or 8-bit grayscale PNG; samples >= 128 are foreground."""
    path = Path(path)
    head = path.read_bytes()[:8]
    if head[:2] in (b"P2", b"P5"):
        img = read_pgm(path)
    elif head == b"\x89PNG\r\n\x1a\n":
        from PIL import Image

        with Image.open(path) as im:
            if im.mode != "L":
                raise UnsupportedFormat(f"{path}: PNG must be 8-bit grayscale, got mode {im.mode}")
            img = np.asarray(im)
    else:
        raise UnsupportedFormat(f"{path}: expected PGM or PNG")
    return BinarySilhouette((img >= 128).astype(np.uint8), path.stem)


def write_silhouette(path, sil: BinarySilhouette) -> None:
    write_pgm(path, sil.mask.astype(np.uint8) * 255)


def write_field_pgm(path, values: np.ndarray) -> None:
    write_pgm(path, np.asarray(values) * 255.0)


# ---------------------------------------------------------------- clouds and meshes


def write_cloud_ply(cloud, path) -> None:
    pts = as_points(cloud)
    lines = ["ply", "format ascii 1.0", f"element vertex {len(pts)}",
             "property double x", "property double y", "property double z", "end_header"]
    lines += ["%.17g %.17g %.17g" % tuple(p) for p in pts]
    Path(path).write_text("\n".join(lines) + "\n")


def read_cloud_ply(path) -> PointCloud:
    text = Path(path).read_text().splitlines()
    if not text or text[0].strip() != "ply":
        raise ParseError(f"{path}: missing 'ply' magic")
    n = None
    props = 0
    for i, line in enumerate(text):
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "format" and parts[1] != "ascii":
            raise UnsupportedFormat(f"{path}: only ASCII PLY is supported")
        if parts[:2] == ["element", "vertex"]:
            n = int(parts[2])
        elif parts[0] == "property" and n is not None:
            props += 1
        elif parts[0] == "end_header":
            body = text[i + 1:i + 1 + (n or 0)]
            break
    else:
        raise ParseError(f"{path}: missing end_header")
    if n is None or len(body) < n:
        raise ParseError(f"{path}: vertex count mismatch")
    try:
        pts = np.array([[float(v) for v in row.split()[:3]] for row in body])
    except ValueError as exc:
        raise ParseError(f"{path}: bad vertex record") from exc
    return PointCloud(pts.reshape(-1, 3))


def write_mesh_obj(mesh: TriMesh, path) -> None:
    lines = ["v %.17g %.17g %.17g" % tuple(v) for v in mesh.vertices]
    lines += ["f %d %d %d" % tuple(t + 1) for t in mesh.triangles]
    Path(path).write_text("\n".join(lines) + "\n")


def read_mesh_obj(path) -> TriMesh:
    verts, tris = [], []
    for line in Path(path).read_text().splitlines():
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "v":
            verts.append([float(x) for x in parts[1:4]])
        elif parts[0] == "f":
            tris.append([int(x.split("/")[0]) - 1 for x in parts[1:4]])
    return TriMesh(np.array(verts), np.array(tris))


# ---------------------------------------------------------------- overlays


def write_overlay(sil: BinarySilhouette, projections, path) -> None:
    """Binary PPM (P6): mask in gray levels, valid projections as 3x3 blue dots."""
    h, w = sil.mask.shape
    img = np.where(sil.mask[..., None] > 0, 200, 40).astype(np.uint8).repeat(3, axis=2)
    if projections is not None:
        uv = np.asarray(projections.uv if hasattr(projections, "uv") else projections).reshape(-1, 2)
        valid = getattr(projections, "valid", np.ones(len(uv), dtype=bool))
        for (u, v), ok in zip(uv, valid):
            if not ok or not np.isfinite(u) or not np.isfinite(v):
                continue
            c, r = int(np.floor(u)), int(np.floor(v))
            r0, r1 = max(r - 1, 0), min(r + 2, h)
            c0, c1 = max(c - 1, 0), min(c + 2, w)
            if r0 < r1 and c0 < c1:
                img[r0:r1, c0:c1] = (30, 80, 255)
    Path(path).write_bytes(b"P6\n%d %d\n255\n" % (w, h) + img.tobytes())


# ---------------------------------------------------------------- cameras and scenes


def write_cameras(path, poses) -> None:
    doc = {"cameras": [p.to_dict() for p in poses]}
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def read_cameras(path) -> list[CameraPose]:
    try:
        doc = json.loads(Path(path).read_text())
        return [CameraPose.from_dict(d) for d in doc["cameras"]]
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: malformed camera file ({exc})") from exc


@dataclass
class SceneManifest:
    width: int
    height: int
    views: list          # [{"mask": relpath, "camera": index}]
    cameras: list
    gt_cloud: str | None = None
    mesh: str | None = None
    shape: str | None = None

    def to_json(self) -> str:
        d = {"width": self.width, "height": self.height, "views": self.views,
             "cameras": "cameras.json", "gt_cloud": self.gt_cloud, "mesh": self.mesh,
             "shape": self.shape}
        return json.dumps(d, indent=2, sort_keys=True) + "\n"


def read_scene(scene_dir) -> SceneManifest:
    scene_dir = Path(scene_dir)
    try:
        doc = json.loads((scene_dir / "scene.json").read_text())
        cameras = read_cameras(scene_dir / doc.get("cameras", "cameras.json"))
        man = SceneManifest(int(doc["width"]), int(doc["height"]), list(doc["views"]), cameras,
                            doc.get("gt_cloud"), doc.get("mesh"), doc.get("shape"))
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise ParseError(f"{scene_dir}: malformed scene.json ({exc})") from exc
    for v in man.views:
        if not 0 <= int(v["camera"]) < len(cameras):
            raise ParseError(f"mask {v['mask']} refers to unknown camera {v['camera']}")
    return man


def load_views(scene_dir, pad: int = DEFAULT_PAD) -> list[View]:
    """Masks + cameras of a scene directory, with smoothed fields built at ``pad``."""
    scene_dir = Path(scene_dir)
    man = read_scene(scene_dir)
    views = []
    for v in man.views:
        sil = read_silhouette(scene_dir / v["mask"])
        pose = man.cameras[int(v["camera"])]
        if (sil.width, sil.height) != (man.width, man.height):
            raise InconsistentView(
                f"{v['mask']} is {sil.width}x{sil.height}, scene declares {man.width}x{man.height}")
        views.append(View(pose, sil, build_smoothed_field(sil, pad)))
    return views


# ---------------------------------------------------------------- config files

_LOSS_KEYS = {f.name for f in fields(LossParams)}
_FIT_KEYS = {f.name for f in fields(FitConfig)} - {"loss"}
_EXTRA_KEYS = {"pad", "ablation_seeds"}


def _coerce(value: str, like):
    if isinstance(like, bool):
        low = value.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {value!r}")
    if isinstance(like, int):
        return int(value)
    if isinstance(like, float):
        return float(value)
    if isinstance(like, tuple):
        return tuple(float(x) for x in value.split(",") if x.strip())
    return value


@dataclass
class RunConfig:
    fit: FitConfig
    pad: int = DEFAULT_PAD
    ablation_seeds: tuple = (0, 1, 2, 3, 4)
    text: str = ""


def parse_config(text: str) -> RunConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment. Unknown keys are errors."""
    loss_kw, fit_kw, extra = {}, {}, {}
    base_loss, base_fit = LossParams(), FitConfig()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"config line {lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        try:
            if key in _LOSS_KEYS:
                loss_kw[key] = _coerce(value, getattr(base_loss, key))
            elif key == "views_used":
                fit_kw[key] = None if value.lower() in ("", "all", "none") else int(value)
            elif key in _FIT_KEYS:
                fit_kw[key] = _coerce(value, getattr(base_fit, key))
            elif key == "pad":
                extra[key] = int(value)
            elif key == "ablation_seeds":
                extra[key] = tuple(int(x) for x in value.split(",") if x.strip())
            else:
                raise ParseError(f"config line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(f"config line {lineno}: bad value for {key!r}: {exc}") from exc
    try:
        cfg = FitConfig(loss=LossParams(**loss_kw), **fit_kw)
    except ValueError as exc:
        raise ParseError(f"invalid configuration: {exc}") from exc
    return RunConfig(cfg, text=text, **extra)


def read_config(path) -> RunConfig:
    return parse_config(Path(path).read_text())

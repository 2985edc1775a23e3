"""Binary silhouettes, exact distance transforms and the smoothed coverage field.

Grids are row-major ``(height, width)`` arrays whose samples sit at pixel
centers, so grid entry ``[r, c]`` lives at continuous ``(u, v) = (c + 0.5, r + 0.5)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyBackground, EmptyForeground

DEFAULT_PAD = 32


@dataclass(eq=False)
class BinarySilhouette:
    mask: np.ndarray
    name: str = ""

    def __post_init__(self):
        m = np.asarray(self.mask)
        if m.ndim != 2:
            raise ValueError("mask must be 2-D")
        if not np.isin(m, (0, 1)).all():
            raise ValueError("mask values must be 0 or 1")
        self.mask = m.astype(np.uint8)

    @property
    def height(self) -> int:
        return self.mask.shape[0]

    @property
    def width(self) -> int:
        return self.mask.shape[1]

    def padded(self, pad: int) -> "BinarySilhouette":
        return BinarySilhouette(np.pad(self.mask, pad), self.name)


@dataclass(eq=False)
class SmoothedField:
    """Smoothed silhouette on a grid padded by ``pad`` background pixels per side.

    ``values`` is 1 on the foreground and strictly inside (0, 1) elsewhere.
    ``mask`` is the padded binary silhouette. Sampling methods take ``uv`` in
    the coordinates of the *unpadded* image.
    """

    values: np.ndarray
    mask: np.ndarray
    pad: int
    source: str = ""

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def diagonal(self) -> float:
        return float(np.hypot(self.width, self.height))

    def sample(self, uv) -> np.ndarray:
        return bilinear_sample(self.values, np.asarray(uv) + self.pad)

    def gradient(self, uv) -> np.ndarray:
        return bilinear_gradient(self.values, np.asarray(uv) + self.pad)


def _lower_envelope_1d(f: np.ndarray) -> np.ndarray:
    """Squared distance transform of one line: ``min_q (p - q)^2 + f[q]``.

    Felzenszwalb-Huttenlocher lower envelope of parabolas. Infinite entries of
    ``f`` are skipped; a line without finite entries stays infinite.
    """
    n = len(f)
    sites = np.flatnonzero(np.isfinite(f))
    out = np.full(n, np.inf)
    if len(sites) == 0:
        return out
    v = np.empty(len(sites), dtype=np.int64)
    z = np.empty(len(sites) + 1)
    k = 0
    v[0] = sites[0]
    z[0] = -np.inf
    z[1] = np.inf
    for q in sites[1:]:
        fq = f[q] + q * q
        while True:
            p = v[k]
            s = (fq - (f[p] + p * p)) / (2.0 * (q - p))
            if s <= z[k]:
                k -= 1
            else:
                break
        k += 1
        v[k] = q
        z[k] = s
        z[k + 1] = np.inf
    k = 0
    for p in range(n):
        while z[k + 1] < p:
            k += 1
        out[p] = (p - v[k]) ** 2 + f[v[k]]
    return out


def squared_distance_transform(mask: np.ndarray) -> np.ndarray:
    """Exact squared Euclidean distance from each pixel to the nearest 1-pixel."""
    mask = np.asarray(mask)
    f = np.where(mask != 0, 0.0, np.inf)
    cols = np.empty_like(f)
    for c in range(f.shape[1]):
        cols[:, c] = _lower_envelope_1d(f[:, c])
    out = np.empty_like(f)
    for r in range(f.shape[0]):
        out[r] = _lower_envelope_1d(cols[r])
    return out


def distance_transform_l2(sil) -> np.ndarray:
    """Per-pixel distance (in pixels) to the nearest foreground pixel center."""
    mask = sil.mask if isinstance(sil, BinarySilhouette) else np.asarray(sil)
    if not np.any(mask):
        raise EmptyForeground("silhouette has no foreground pixels")
    return np.sqrt(squared_distance_transform(mask))


def build_smoothed_field(sil: BinarySilhouette, pad: int = DEFAULT_PAD) -> SmoothedField:
    """Replace the background by a normalized, min-max rescaled distance ramp.

    Background values are ``1 - d / diag`` min-max mapped onto
    ``[eps, 1 - eps]`` with ``eps = 1 / (2 * max(W, H))`` of the padded grid, so
    the pixel nearest the boundary gets ``1 - eps`` and the farthest gets ``eps``.
    """
    if pad < 0:
        raise ValueError("pad must be non-negative")
    mask = np.pad(sil.mask, pad)
    fg = mask.astype(bool)
    if not fg.any():
        raise EmptyForeground("silhouette has no foreground pixels")
    if fg.all():
        raise EmptyBackground("silhouette has no background pixels")
    h, w = mask.shape
    d = distance_transform_l2(mask) / np.hypot(w, h)
    raw = 1.0 - d[~fg]
    eps = 1.0 / (2 * max(w, h))
    lo, hi = raw.min(), raw.max()
    if hi > lo:
        scaled = (raw - lo) / (hi - lo)
    else:
        scaled = np.ones_like(raw)
    values = np.ones((h, w))
    values[~fg] = eps + (1.0 - 2.0 * eps) * scaled
    return SmoothedField(values=values, mask=mask, pad=pad, source=sil.name)


def _cell_coords(shape, uv):
    """Lower-left cell index, fractional offsets and in-range flags per axis."""
    h, w = shape
    uv = np.asarray(uv, dtype=np.float64)
    x = uv[..., 0] - 0.5
    y = uv[..., 1] - 0.5
    inside_x = (x >= 0) & (x <= w - 1)
    inside_y = (y >= 0) & (y <= h - 1)
    x = np.clip(x, 0, w - 1)
    y = np.clip(y, 0, h - 1)
    x0 = np.minimum(np.floor(x).astype(np.int64), max(w - 2, 0))
    y0 = np.minimum(np.floor(y).astype(np.int64), max(h - 2, 0))
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    return x0, y0, x1, y1, x - x0, y - y0, inside_x, inside_y


def bilinear_sample(grid: np.ndarray, uv) -> np.ndarray:
    """Bilinear interpolation of pixel-center samples, clamped at the border.

    ``uv`` has shape ``(..., 2)``; the result has shape ``(...)``.
    """
    g = np.asarray(grid, dtype=np.float64)
    x0, y0, x1, y1, fx, fy, _, _ = _cell_coords(g.shape, uv)
    top = (1 - fx) * g[y0, x0] + fx * g[y0, x1]
    bottom = (1 - fx) * g[y1, x0] + fx * g[y1, x1]
    return (1 - fy) * top + fy * bottom


def bilinear_gradient(grid: np.ndarray, uv) -> np.ndarray:
    """Gradient ``(d/du, d/dv)`` of the bilinear interpolant, shape ``(..., 2)``.

    The component along an axis is zero where that coordinate is clamped.
    """
    g = np.asarray(grid, dtype=np.float64)
    x0, y0, x1, y1, fx, fy, inx, iny = _cell_coords(g.shape, uv)
    a, b = g[y0, x0], g[y0, x1]
    c, d = g[y1, x0], g[y1, x1]
    du = (1 - fy) * (b - a) + fy * (d - c)
    dv = (1 - fx) * (c - a) + fx * (d - b)
    return np.stack([np.where(inx, du, 0.0), np.where(iny, dv, 0.0)], axis=-1)

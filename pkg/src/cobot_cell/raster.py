"""RGB raster images, binary PPM (P6) I/O, and polygon rasterization.

Pixel (row r, col c) has center (x=c, y=r); masks and waypoint geometry use
that pixel-center convention throughout.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np


@dataclass
class RasterImage:
    """Row-major 8-bit RGB image backed by a (height, width, 3) uint8 array."""

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels, dtype=np.uint8)
        if arr.ndim != 3 or arr.shape[2] != 3 or arr.shape[0] * arr.shape[1] == 0:
            raise ValueError("pixels must be a non-empty (h, w, 3) array")
        self.pixels = arr

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @classmethod
    def filled(cls, width: int, height: int, color: tuple[int, int, int]) -> "RasterImage":
        arr = np.empty((height, width, 3), dtype=np.uint8)
        arr[:, :] = color
        return cls(arr)


def write_ppm(img: RasterImage) -> bytes:
    header = f"P6\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + img.pixels.tobytes()


def read_ppm(data: bytes) -> RasterImage:
    buf = io.BytesIO(data)

    def token() -> bytes:
        t = b""
        while True:
            ch = buf.read(1)
            if ch == b"":
                raise ValueError("truncated ppm header")
            if ch == b"#":
                while ch not in (b"\n", b""):
                    ch = buf.read(1)
                continue
            if ch.isspace():
                if t:
                    return t
                continue
            t += ch

    if token() != b"P6":
        raise ValueError("not a P6 ppm")
    width = int(token())
    height = int(token())
    maxval = int(token())
    if maxval != 255:
        raise ValueError("only maxval 255 supported")
    raw = buf.read(width * height * 3)
    if len(raw) != width * height * 3:
        raise ValueError("truncated ppm payload")
    arr = np.frombuffer(raw, dtype=np.uint8).reshape(height, width, 3).copy()
    return RasterImage(arr)


def fill_polygon_mask(vertices_xy: np.ndarray, width: int, height: int) -> np.ndarray:
    """Even-odd rasterization of a polygon over pixel centers.

    vertices_xy: (n, 2) float array of (x, y) vertices in pixel coordinates.
    Returns a (height, width) bool mask. Pixels whose center ray-casts inside
    are set; exact-on-edge centers fall in a one-pixel tolerance band.
    """
    verts = np.asarray(vertices_xy, dtype=float)
    if verts.ndim != 2 or verts.shape[0] < 3 or verts.shape[1] != 2:
        raise ValueError("need an (n>=3, 2) vertex array")
    ys, xs = np.mgrid[0:height, 0:width]
    xs = xs.astype(float)
    ys = ys.astype(float)
    inside = np.zeros((height, width), dtype=bool)
    n = verts.shape[0]
    for i in range(n):
        x1, y1 = verts[i]
        x2, y2 = verts[(i + 1) % n]
        if y1 == y2:
            continue
        cond = (ys >= min(y1, y2)) & (ys < max(y1, y2))
        x_cross = (x2 - x1) * (ys - y1) / (y2 - y1) + x1
        inside ^= cond & (xs < x_cross)
    return inside

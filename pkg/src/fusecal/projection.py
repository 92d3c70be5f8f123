"""Pinhole projection of LiDAR clouds into per-pixel rasters.

Camera frame convention: x right, y down, z forward (optical axis).
A point at camera-frame (x, y, z) with z > z_near lands at
u = fx*x/z + cx, v = fy*y/z + cy.

Raster channels are dense float32 grids of values in [0, 1] where 0 means
"no return". The near-cull plane guarantees a real return never normalizes
to exactly 0, so the sentinel is unambiguous.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from PIL import Image

from fusecal.se3 import RigidTransform, SixDof, apply

DEFAULT_MAX_DEPTH = 80.0  # meters of usable LiDAR range mapped onto [0, 1]
DEFAULT_Z_NEAR = 0.1


@dataclass(frozen=True)
class CameraModel:
    """Pinhole intrinsics in pixels plus image size."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self) -> None:
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError("focal lengths must be positive")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ValueError("principal point must lie inside the image")


@dataclass
class Raster:
    """One dense channel bound to a camera's pixel grid."""

    values: np.ndarray  # (height, width) float32 in [0, 1]

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float32)
        if self.values.ndim != 2:
            raise ValueError("raster values must be a 2D grid")

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


@dataclass
class UnifiedSample:
    """The N-channel pseudo-image plus the de-calibration label.

    Channel order is fixed: camera channel(s) first (1 for grayscale,
    3 for rgb), then LiDAR depth, then LiDAR intensity when enabled.
    """

    channels: np.ndarray  # (N, H, W) float32 in [0, 1]
    label: SixDof
    meta: dict = field(default_factory=dict)

    @property
    def n_channels(self) -> int:
        return self.channels.shape[0]


def project_points(
    cloud: np.ndarray,
    extrinsic: RigidTransform,
    cam: CameraModel,
    z_near: float = DEFAULT_Z_NEAR,
) -> np.ndarray:
    """Project a (K, 3|4) cloud through the extrinsic into pixel space.

    Returns an (M, 4) array of (u, v, depth, intensity) rows for the points
    that survive the near plane and image bounds, in input order. Intensity
    is 0 when the cloud carries no 4th column.
    """
    cloud = np.asarray(cloud, dtype=np.float64)
    if cloud.ndim != 2 or cloud.shape[1] not in (3, 4):
        raise ValueError("cloud must be (K, 3) or (K, 4)")
    if cloud.shape[0] == 0:
        return np.zeros((0, 4))
    in_cam = apply(extrinsic, cloud[:, :3])
    intensity = cloud[:, 3] if cloud.shape[1] == 4 else np.zeros(len(cloud))
    z = in_cam[:, 2]
    keep = z > z_near
    u = np.full(len(cloud), -1.0)
    v = np.full(len(cloud), -1.0)
    u[keep] = cam.fx * in_cam[keep, 0] / z[keep] + cam.cx
    v[keep] = cam.fy * in_cam[keep, 1] / z[keep] + cam.cy
    keep &= (u >= 0) & (u < cam.width) & (v >= 0) & (v < cam.height)
    return np.column_stack([u[keep], v[keep], z[keep], intensity[keep]])


def rasterize(
    projected: np.ndarray,
    cam: CameraModel,
    max_depth: float = DEFAULT_MAX_DEPTH,
    splat: int = 1,
) -> tuple[Raster, Raster]:
    """Scatter projected points onto the pixel grid with a z-buffer.

    Each point writes to (round(u), round(v)); with splat > 1 it also
    writes the surrounding splat x splat neighborhood. On collision the
    nearer point wins in both channels (exact depth ties: the brighter
    return, so the outcome is independent of point order). Depth stores
    clamp(depth, 0, max_depth) / max_depth; intensity stores the winner's
    intensity clamped to [0, 1]; untouched pixels stay 0.
    """
    if max_depth <= 0:
        raise ValueError("max_depth must be positive")
    if splat < 1 or splat % 2 == 0:
        raise ValueError("splat must be an odd positive pixel width")
    depth = np.zeros((cam.height, cam.width), dtype=np.float32)
    inten = np.zeros((cam.height, cam.width), dtype=np.float32)
    projected = np.asarray(projected, dtype=np.float64)
    if projected.size == 0:
        return Raster(depth), Raster(inten)

    cols = np.rint(projected[:, 0]).astype(np.int64)
    rows = np.rint(projected[:, 1]).astype(np.int64)
    z = projected[:, 2]
    val_i = np.clip(projected[:, 3], 0.0, 1.0)

    half = splat // 2
    offsets = [(dr, dc) for dr in range(-half, half + 1) for dc in range(-half, half + 1)]
    r_all = np.concatenate([rows + dr for dr, _ in offsets])
    c_all = np.concatenate([cols + dc for _, dc in offsets])
    z_all = np.tile(z, len(offsets))
    i_all = np.tile(val_i, len(offsets))
    ok = (r_all >= 0) & (r_all < cam.height) & (c_all >= 0) & (c_all < cam.width)
    r_all, c_all, z_all, i_all = r_all[ok], c_all[ok], z_all[ok], i_all[ok]
    if r_all.size == 0:
        return Raster(depth), Raster(inten)

    # Sort so the last write per pixel is the winner: depth descending,
    # intensity ascending among exact depth ties.
    order = np.lexsort((i_all, -z_all))
    r_all, c_all, z_all, i_all = r_all[order], c_all[order], z_all[order], i_all[order]
    zbuf = np.full((cam.height, cam.width), np.inf)
    zbuf[r_all, c_all] = z_all
    inten[r_all, c_all] = i_all
    touched = np.isfinite(zbuf)
    depth[touched] = np.clip(zbuf[touched], 0.0, max_depth) / max_depth
    return Raster(depth), Raster(inten)


def to_grayscale(image: np.ndarray, mode: str = "grayscale") -> list[Raster]:
    """Convert an 8-bit (H, W, 3) RGB image into normalized camera channels.

    grayscale: one channel, Y = (0.299 R + 0.587 G + 0.114 B) / 255.
    rgb: three channels, each scaled into [0, 1].
    """
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] != 3 or image.dtype != np.uint8:
        raise ValueError("expected an 8-bit (H, W, 3) RGB image")
    scaled = image.astype(np.float32) / 255.0
    if mode == "grayscale":
        y = 0.299 * scaled[:, :, 0] + 0.587 * scaled[:, :, 1] + 0.114 * scaled[:, :, 2]
        return [Raster(y)]
    if mode == "rgb":
        return [Raster(scaled[:, :, c]) for c in range(3)]
    raise ValueError(f"unknown camera mode: {mode!r}")


def _resize(values: np.ndarray, hw: tuple[int, int], nearest: bool) -> np.ndarray:
    h, w = hw
    if values.shape == (h, w):
        return values.astype(np.float32)
    img = Image.fromarray(values.astype(np.float32), mode="F")
    resample = Image.Resampling.NEAREST if nearest else Image.Resampling.BILINEAR
    return np.asarray(img.resize((w, h), resample=resample), dtype=np.float32)


def build_unified(
    camera_channels: list[Raster],
    depth: Raster,
    intensity: Raster,
    include_intensity: bool,
    label: SixDof,
    out_hw: tuple[int, int],
    meta: Optional[dict] = None,
) -> UnifiedSample:
    """Stack camera and LiDAR channels into one (N, H, W) pseudo-image.

    All inputs must share dimensions before resize. Camera channels are
    resized bilinearly; the sparse LiDAR channels use nearest-neighbor so
    empty pixels never smear into false depths. Values stay in [0, 1].
    """
    shapes = {(r.height, r.width) for r in camera_channels}
    shapes.add((depth.height, depth.width))
    shapes.add((intensity.height, intensity.width))
    if len(shapes) != 1:
        raise ValueError(f"channel dimensions disagree before resize: {sorted(shapes)}")
    stack = [_resize(r.values, out_hw, nearest=False) for r in camera_channels]
    stack.append(_resize(depth.values, out_hw, nearest=True))
    if include_intensity:
        stack.append(_resize(intensity.values, out_hw, nearest=True))
    channels = np.clip(np.stack(stack, axis=0), 0.0, 1.0)
    return UnifiedSample(channels=channels, label=label, meta=dict(meta or {}))


def raster_to_png(raster: Raster, path) -> None:
    """Export one channel as 8-bit grayscale PNG (value * 255, rounded)."""
    data = np.rint(np.clip(raster.values, 0.0, 1.0) * 255.0).astype(np.uint8)
    Image.fromarray(data, mode="L").save(path, format="PNG")

"""Procedural desk-scale driving scenes for hermetic training and tests.

A scene lives in the LiDAR frame (x forward, y left, z up, sensor at the
origin 1.6 m above the ground) and is built from flat primitives: a ground
plane with bright lane stripes, vertical billboards, boxes, and poles.
The same surfaces produce both modalities:

  - the point cloud, by uniform area sampling with per-point intensity
    equal to the surface albedo pattern, and
  - the camera image, by ray casting from the camera pose with Lambertian
    shading of the same albedo (sky renders as exact 0).

Everything is a pure function of (config, seed), so frames regenerate
bit-identically. The per-vehicle extrinsic is derived from the day
identifier alone and therefore stays fixed across a vehicle's frames.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from fusecal.frame import Frame
from fusecal.projection import CameraModel
from fusecal.se3 import RigidTransform, SixDof, from_sixdof
from fusecal.seeding import derive_seed

GROUND_Z = -1.6  # sensor height above the road
AMBIENT = 0.35
LIGHT_DIR = np.array([0.3, 0.25, -0.9]) / np.linalg.norm([0.3, 0.25, -0.9])

DEFAULT_CAMERA = CameraModel(fx=220.0, fy=220.0, cx=128.0, cy=64.0, width=256, height=128)

# base rotation aligning LiDAR axes (x fwd, y left, z up) to camera axes
# (x right, y down, z fwd)
_LIDAR_TO_CAM = np.array([[0.0, -1.0, 0.0], [0.0, 0.0, -1.0], [1.0, 0.0, 0.0]])


@dataclass(frozen=True)
class SyntheticSceneConfig:
    n_planes: int = 4  # ground plane plus n_planes - 1 billboards
    n_boxes: int = 3
    n_poles: int = 3
    extent: float = 30.0  # meters of forward range
    points_per_scene: int = 8192
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.points_per_scene <= 0:
            raise ValueError("points_per_scene must be positive")
        if self.n_planes < 0 or self.n_boxes < 0 or self.n_poles < 0:
            raise ValueError("surface counts must be nonnegative")
        if self.extent <= 4.0:
            raise ValueError("extent must exceed 4 m")


class _Rect:
    """Flat rectangle p0 + a*e1 + b*e2, a,b in [0,1]."""

    def __init__(self, p0, e1, e2, albedo_fn):
        self.p0 = np.asarray(p0, dtype=np.float64)
        self.e1 = np.asarray(e1, dtype=np.float64)
        self.e2 = np.asarray(e2, dtype=np.float64)
        n = np.cross(self.e1, self.e2)
        self.normal = n / np.linalg.norm(n)
        self.albedo_fn = albedo_fn
        self.area = float(np.linalg.norm(np.cross(self.e1, self.e2)))

    def sample(self, rng, n):
        ab = rng.uniform(0, 1, size=(n, 2))
        pts = self.p0 + ab[:, :1] * self.e1 + ab[:, 1:] * self.e2
        return pts, self.albedo_fn(pts)

    def raycast(self, origin, dirs):
        denom = dirs @ self.normal
        num = (self.p0 - origin) @ self.normal
        t = np.full(len(dirs), np.inf)
        valid = np.abs(denom) > 1e-12
        t[valid] = num / denom[valid]
        reachable = np.isfinite(t) & (t > 1e-6)
        t_safe = np.where(reachable, t, 0.0)
        pts = origin + t_safe[:, None] * dirs
        rel = pts - self.p0
        a = rel @ self.e1 / (self.e1 @ self.e1)
        b = rel @ self.e2 / (self.e2 @ self.e2)
        hit = reachable & (a >= 0) & (a <= 1) & (b >= 0) & (b <= 1)
        t = np.where(hit, t, np.inf)
        albedo = np.zeros(len(dirs))
        if hit.any():
            albedo[hit] = self.albedo_fn(pts[hit])
        normals = np.broadcast_to(self.normal, dirs.shape)
        return t, albedo, normals


class _Box:
    """Axis-aligned box resting on the ground."""

    def __init__(self, lo, hi, albedo):
        self.lo = np.asarray(lo, dtype=np.float64)
        self.hi = np.asarray(hi, dtype=np.float64)
        self.albedo = float(albedo)
        d = self.hi - self.lo
        # lateral faces plus top; the bottom face is never visible
        self.area = 2 * d[2] * (d[0] + d[1]) + d[0] * d[1]

    def _faces(self):
        lo, hi = self.lo, self.hi
        d = hi - lo
        return [
            (np.array([-1.0, 0, 0]), lo, [1, 2], d[1] * d[2]),
            (np.array([1.0, 0, 0]), hi, [1, 2], d[1] * d[2]),
            (np.array([0, -1.0, 0]), lo, [0, 2], d[0] * d[2]),
            (np.array([0, 1.0, 0]), hi, [0, 2], d[0] * d[2]),
            (np.array([0, 0, 1.0]), hi, [0, 1], d[0] * d[1]),
        ]

    def sample(self, rng, n):
        faces = [f for f in self._faces() if f[0] @ (0.5 * (self.lo + self.hi)) < 0 or f[0][2] > 0]
        weights = np.array([f[3] for f in faces])
        weights = weights / weights.sum()
        counts = _allocate(weights, n)
        pts = []
        for (normal, corner, axes, _), k in zip(faces, counts):
            if k == 0:
                continue
            p = np.tile(corner, (k, 1)).astype(np.float64)
            for ax in axes:
                p[:, ax] = rng.uniform(self.lo[ax], self.hi[ax], size=k)
            pts.append(p)
        pts = np.concatenate(pts) if pts else np.zeros((0, 3))
        return pts, np.full(len(pts), self.albedo)

    def raycast(self, origin, dirs):
        # slab method; rays never start on a box face in this scene
        safe = np.where(np.abs(dirs) > 1e-12, dirs, 1e-12)
        inv = 1.0 / safe
        t1 = (self.lo - origin) * inv
        t2 = (self.hi - origin) * inv
        tmin_ax = np.minimum(t1, t2)
        tmax_ax = np.maximum(t1, t2)
        tmin = tmin_ax.max(axis=1)
        tmax = tmax_ax.min(axis=1)
        hit = (tmax > np.maximum(tmin, 1e-6)) & (tmin > 1e-6)
        t = np.where(hit, tmin, np.inf)
        # entry axis determines the face normal
        axis = np.argmax(tmin_ax, axis=1)
        normals = np.zeros_like(dirs)
        rows = np.arange(len(dirs))
        normals[rows, axis] = -np.sign(dirs[rows, axis])
        return t, np.full(len(dirs), self.albedo), normals


class _Pole:
    """Vertical cylinder."""

    def __init__(self, x, y, radius, height, albedo):
        self.x, self.y = float(x), float(y)
        self.radius = float(radius)
        self.z0, self.z1 = GROUND_Z, GROUND_Z + float(height)
        self.albedo = float(albedo)
        self.area = math.pi * self.radius * float(height)  # sensor-facing half

    def sample(self, rng, n):
        phi0 = math.atan2(-self.y, -self.x)
        theta = rng.uniform(phi0 - math.pi / 2, phi0 + math.pi / 2, size=n)
        z = rng.uniform(self.z0, self.z1, size=n)
        pts = np.column_stack(
            [self.x + self.radius * np.cos(theta), self.y + self.radius * np.sin(theta), z]
        )
        return pts, np.full(n, self.albedo)

    def raycast(self, origin, dirs):
        ox, oy = origin[0] - self.x, origin[1] - self.y
        a = dirs[:, 0] ** 2 + dirs[:, 1] ** 2
        b = 2 * (ox * dirs[:, 0] + oy * dirs[:, 1])
        c = ox * ox + oy * oy - self.radius**2
        disc = b * b - 4 * a * c
        sqrt_disc = np.sqrt(np.maximum(disc, 0.0))
        t = np.full(len(dirs), np.inf)
        solvable = (disc > 0) & (a > 1e-12)
        t[solvable] = (-b[solvable] - sqrt_disc[solvable]) / (2 * a[solvable])
        reachable = np.isfinite(t) & (t > 1e-6)
        t_safe = np.where(reachable, t, 0.0)
        z = origin[2] + t_safe * dirs[:, 2]
        hit = reachable & (z >= self.z0) & (z <= self.z1)
        t = np.where(hit, t, np.inf)
        pts = origin + t_safe[:, None] * dirs
        normals = np.zeros_like(dirs)
        normals[:, 0] = pts[:, 0] - self.x
        normals[:, 1] = pts[:, 1] - self.y
        norm = np.linalg.norm(normals, axis=1, keepdims=True)
        normals = np.divide(normals, norm, out=np.zeros_like(normals), where=norm > 0)
        return t, np.full(len(dirs), self.albedo), normals


def _allocate(weights: np.ndarray, total: int) -> np.ndarray:
    """Deterministically split `total` into integer counts proportional to weights."""
    counts = np.floor(weights * total).astype(int)
    remainder = total - counts.sum()
    order = np.argsort(-(weights * total - counts), kind="stable")
    counts[order[:remainder]] += 1
    return counts


def _ground_albedo(stripe_centers):
    def fn(pts):
        albedo = np.full(len(pts), 0.18)
        for c in stripe_centers:
            albedo[np.abs(pts[:, 1] - c) < 0.12] = 0.85
        return albedo

    return fn


def _billboard_albedo(base, striped, period):
    def fn(pts):
        if not striped:
            return np.full(len(pts), base)
        phase = np.floor(pts[:, 1] / period).astype(int) % 2
        return np.where(phase == 0, base, min(base + 0.45, 0.95))

    return fn


def _build_surfaces(cfg: SyntheticSceneConfig, rng: np.random.Generator) -> list:
    surfaces = []
    ey = 0.4 * cfg.extent
    if cfg.n_planes >= 1:
        stripe_centers = np.array([-3.5, 0.0, 3.5]) + rng.uniform(-0.5, 0.5, 3)
        surfaces.append(
            _Rect(
                p0=[2.0, -ey, GROUND_Z],
                e1=[cfg.extent - 2.0, 0, 0],
                e2=[0, 2 * ey, 0],
                albedo_fn=_ground_albedo(stripe_centers),
            )
        )
    for _ in range(max(cfg.n_planes - 1, 0)):
        x = rng.uniform(5.0, 0.85 * cfg.extent)
        y = rng.uniform(-0.7 * ey, 0.7 * ey)
        w = rng.uniform(1.0, 4.0)
        h = rng.uniform(1.0, 2.5)
        striped = rng.uniform() < 0.5
        base = rng.uniform(0.25, 0.6)
        surfaces.append(
            _Rect(
                p0=[x, y - w / 2, GROUND_Z],
                e1=[0, w, 0],
                e2=[0, 0, h],
                albedo_fn=_billboard_albedo(base, striped, period=rng.uniform(0.3, 0.6)),
            )
        )
    for _ in range(cfg.n_boxes):
        x = rng.uniform(4.0, 0.7 * cfg.extent)
        y = rng.uniform(-0.7 * ey, 0.7 * ey)
        sx, sy = rng.uniform(0.5, 2.5, 2)
        sz = rng.uniform(0.5, 2.0)
        surfaces.append(
            _Box(
                lo=[x - sx / 2, y - sy / 2, GROUND_Z],
                hi=[x + sx / 2, y + sy / 2, GROUND_Z + sz],
                albedo=rng.uniform(0.2, 0.9),
            )
        )
    for _ in range(cfg.n_poles):
        surfaces.append(
            _Pole(
                x=rng.uniform(4.0, 0.8 * cfg.extent),
                y=rng.uniform(-0.8 * ey, 0.8 * ey),
                radius=rng.uniform(0.05, 0.15),
                height=rng.uniform(2.0, 5.0),
                albedo=rng.uniform(0.4, 0.95),
            )
        )
    return surfaces


def _sample_cloud(surfaces, cfg, rng) -> np.ndarray:
    areas = np.array([s.area for s in surfaces])
    counts = _allocate(areas / areas.sum(), cfg.points_per_scene)
    parts = []
    for surface, n in zip(surfaces, counts):
        if n == 0:
            continue
        pts, albedo = surface.sample(rng, int(n))
        parts.append(np.column_stack([pts, albedo]))
    return np.concatenate(parts)


def _render_image(surfaces, cam: CameraModel, t_gt: RigidTransform, tints) -> np.ndarray:
    """Ray cast the scene from the camera pose; returns (H, W, 3) uint8."""
    us, vs = np.meshgrid(np.arange(cam.width), np.arange(cam.height))
    dirs_cam = np.stack(
        [(us.ravel() - cam.cx) / cam.fx, (vs.ravel() - cam.cy) / cam.fy, np.ones(us.size)],
        axis=1,
    )
    r_cam_to_lidar = t_gt.rotation.T
    origin = -(r_cam_to_lidar @ t_gt.translation)
    dirs = dirs_cam @ t_gt.rotation  # == (R^T d) for each row
    best_t = np.full(len(dirs), np.inf)
    shade = np.zeros((len(dirs), 3))
    for surface, tint in zip(surfaces, tints):
        t, albedo, normals = surface.raycast(origin, dirs)
        closer = t < best_t
        if not closer.any():
            continue
        n = normals[closer]
        # flip normals toward the viewer before shading
        facing = np.sign(-np.sum(n * dirs[closer], axis=1))[:, None]
        n = n * np.where(facing == 0, 1.0, facing)
        diffuse = np.maximum(0.0, -(n @ LIGHT_DIR))
        value = albedo[closer] * (AMBIENT + (1 - AMBIENT) * diffuse)
        shade[closer] = value[:, None] * tint[None, :]
        best_t[closer] = t[closer]
    img = np.clip(shade, 0.0, 1.0).reshape(cam.height, cam.width, 3)
    return np.rint(img * 255.0).astype(np.uint8)


def vehicle_extrinsic(base_seed: int, day_id: str) -> RigidTransform:
    """Per-vehicle LiDAR->camera ground truth, fixed across the vehicle's frames."""
    rng = np.random.Generator(np.random.PCG64(derive_seed("vehicle", base_seed, day_id)))
    jitter = from_sixdof(
        SixDof(*rng.uniform(-0.03, 0.03, 3), *rng.uniform(-0.08, 0.08, 3))
    )
    base = RigidTransform(_LIDAR_TO_CAM, np.array([0.02, -0.12, -0.25]), check=False)
    return RigidTransform(
        jitter.rotation @ base.rotation, jitter.rotation @ base.translation + jitter.translation
    )


def generate_synthetic_frame(
    cfg: SyntheticSceneConfig,
    seed: int,
    day_id: str = "synth_00",
    log_id: int = 0,
    frame_id: int = 0,
    cam: CameraModel = DEFAULT_CAMERA,
) -> Frame:
    """Deterministically build one synchronized synthetic capture."""
    rng = np.random.Generator(np.random.PCG64(seed))
    surfaces = _build_surfaces(cfg, rng)
    if not surfaces:
        raise ValueError("scene has no surfaces; increase n_planes/n_boxes/n_poles")
    tints = [np.clip(rng.uniform(0.85, 1.15, 3), 0, None) for _ in surfaces]
    cloud = _sample_cloud(surfaces, cfg, rng)
    t_gt = vehicle_extrinsic(cfg.rng_seed, day_id)
    image = _render_image(surfaces, cam, t_gt, tints)
    return Frame(
        image=image,
        cloud=cloud,
        cam=cam,
        t_gt=t_gt,
        day_id=day_id,
        log_id=log_id,
        frame_id=frame_id,
    )

"""A synchronized camera + LiDAR capture with its ground-truth extrinsic."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from fusecal.projection import CameraModel
from fusecal.se3 import RigidTransform


@dataclass
class Frame:
    image: np.ndarray  # (H, W, 3) uint8 RGB
    cloud: np.ndarray  # (K, 4) float64: x, y, z, intensity; order is load-bearing
    cam: CameraModel
    t_gt: RigidTransform  # LiDAR frame -> camera frame
    day_id: str
    log_id: int
    frame_id: int

    def __post_init__(self) -> None:
        if self.cloud.ndim != 2 or self.cloud.shape[1] != 4 or len(self.cloud) == 0:
            raise ValueError("frame cloud must be a non-empty (K, 4) array")

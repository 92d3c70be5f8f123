"""Camera-to-LiDAR extrinsic calibration toolkit.

Fuses camera and projected-LiDAR channels into a multi-channel pseudo-image
and regresses the 6-DoF de-calibration with a compact attention-based
network. Also supports a calibration-validation (binary classification)
head trained by transfer from the calibration backbone.
"""

from fusecal.se3 import RigidTransform, SixDof, DecalRange

__version__ = "0.1.0"

__all__ = ["RigidTransform", "SixDof", "DecalRange", "__version__"]

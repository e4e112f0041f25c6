"""motrack: deterministic multi-object tracking on precomputed detections.

Consumes detection, embedding, and camera-transform files; associates with a
constant-velocity Kalman filter, camera-motion correction, direction
consistency, and confidence-gated appearance fusion; emits standard track
files.  Hot kernels run compiled when the extension is available, with a
bit-identical pure-Python fallback (see ``motrack.kernels``).
"""

from .appearance import AppearanceParams
from .association import AssociationParams
from .geometry import Box, CameraTransform, StateBox
from .kernels import BACKEND
from .tracker import Detection, FrameOutput, Tracker, TrackerConfig

__version__ = "0.1.0"

__all__ = [
    "AppearanceParams",
    "AssociationParams",
    "BACKEND",
    "Box",
    "CameraTransform",
    "Detection",
    "FrameOutput",
    "StateBox",
    "Tracker",
    "TrackerConfig",
    "__version__",
]

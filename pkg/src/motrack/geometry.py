"""Bounding-box geometry: representations, IoU, similarity transforms.

Pixel coordinates are continuous floats end to end; nothing snaps to an
integer grid until file output.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels


class Box:
    """Axis-aligned box with strictly positive extent.

    Constructed from ``(left, top, width, height)`` but stored by its corner
    points, so transforming the corners and rebuilding the box is lossless
    (an identity transform returns bit-identical coordinates).
    """

    __slots__ = ("left", "top", "right", "bottom")

    def __init__(self, left: float, top: float, width: float, height: float):
        if not (width > 0.0 and height > 0.0):
            raise ValueError(f"box extent must be positive, got {width}x{height}")
        self.left = float(left)
        self.top = float(top)
        self.right = float(left) + float(width)
        self.bottom = float(top) + float(height)

    @classmethod
    def from_corners(cls, left, top, right, bottom) -> "Box":
        box = cls.__new__(cls)
        if not (right > left and bottom > top):
            raise ValueError("degenerate corners: right/bottom must exceed left/top")
        box.left = float(left)
        box.top = float(top)
        box.right = float(right)
        box.bottom = float(bottom)
        return box

    @property
    def width(self) -> float:
        return self.right - self.left

    @property
    def height(self) -> float:
        return self.bottom - self.top

    @property
    def center(self) -> tuple:
        return ((self.left + self.right) / 2.0, (self.top + self.bottom) / 2.0)

    @property
    def area(self) -> float:
        return (self.right - self.left) * (self.bottom - self.top)

    def as_ltrb(self) -> tuple:
        return (self.left, self.top, self.right, self.bottom)

    def as_ltwh(self) -> tuple:
        return (self.left, self.top, self.width, self.height)

    def __eq__(self, other):
        if not isinstance(other, Box):
            return NotImplemented
        return self.as_ltrb() == other.as_ltrb()

    def __hash__(self):
        return hash(self.as_ltrb())

    def __repr__(self):
        return f"Box(left={self.left}, top={self.top}, width={self.width}, height={self.height})"


@dataclass(frozen=True)
class StateBox:
    """Measurement-space box: center, area, aspect ratio (w/h)."""

    x_c: float
    y_c: float
    a: float
    s: float

    def __post_init__(self):
        if not (self.a > 0.0):
            raise ValueError(f"area must be positive, got {self.a}")
        if not (self.s > 0.0):
            raise ValueError(f"aspect ratio must be positive, got {self.s}")

    def as_vector(self) -> np.ndarray:
        return np.array([self.x_c, self.y_c, self.a, self.s], dtype=np.float64)


class CameraTransform:
    """Per-frame similarity transform: scaled rotation ``M`` plus translation ``T``.

    Maps previous-frame pixel coordinates into current-frame coordinates.
    """

    __slots__ = ("matrix", "translation")

    def __init__(self, matrix, translation):
        m = np.asarray(matrix, dtype=np.float64)
        t = np.asarray(translation, dtype=np.float64).reshape(2)
        if m.shape != (2, 2):
            raise ValueError("matrix must be 2x2")
        if not (np.isfinite(m).all() and np.isfinite(t).all()):
            raise ValueError("transform entries must be finite")
        if m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0] <= 0.0:
            raise ValueError("similarity transform must have positive determinant")
        self.matrix = m
        self.translation = t

    @classmethod
    def identity(cls) -> "CameraTransform":
        return cls(np.eye(2), np.zeros(2))

    def __repr__(self):
        return f"CameraTransform(matrix={self.matrix.tolist()}, translation={self.translation.tolist()})"


def compose(outer: CameraTransform, inner: CameraTransform) -> CameraTransform:
    """Transform equivalent to applying ``inner`` first, then ``outer``."""
    return CameraTransform(
        outer.matrix @ inner.matrix,
        outer.matrix @ inner.translation + outer.translation,
    )


def iou(a: Box, b: Box) -> float:
    """Intersection over union; symmetric, in [0, 1]."""
    iw = min(a.right, b.right) - max(a.left, b.left)
    if iw <= 0.0:
        return 0.0
    ih = min(a.bottom, b.bottom) - max(a.top, b.top)
    if ih <= 0.0:
        return 0.0
    inter = iw * ih
    return inter / (a.area + b.area - inter)


def iou_matrix(boxes_a, boxes_b) -> np.ndarray:
    """Pairwise IoU of two Box sequences, as an (M, N) float64 matrix."""
    return kernels.iou_matrix(boxes_ltrb(boxes_a), boxes_ltrb(boxes_b))


def boxes_ltrb(boxes) -> np.ndarray:
    """Stack boxes into an (N, 4) [l, t, r, b] float64 array."""
    out = np.empty((len(boxes), 4), dtype=np.float64)
    for i, b in enumerate(boxes):
        out[i, 0] = b.left
        out[i, 1] = b.top
        out[i, 2] = b.right
        out[i, 3] = b.bottom
    return out


def transform_point(t: CameraTransform, p) -> np.ndarray:
    """Apply the similarity transform to a 2-D point."""
    return t.matrix @ np.asarray(p, dtype=np.float64) + t.translation


def transform_box(t: CameraTransform, b: Box) -> Box:
    """Transform the two corner points and rebound axis-aligned.

    The rebound spans the per-axis min/max of the transformed corners; a
    rotation can collapse that span, which raises rather than producing a
    degenerate box.
    """
    p1 = transform_point(t, (b.left, b.top))
    p2 = transform_point(t, (b.right, b.bottom))
    left = min(p1[0], p2[0])
    right = max(p1[0], p2[0])
    top = min(p1[1], p2[1])
    bottom = max(p1[1], p2[1])
    if not (right > left and bottom > top):
        raise ValueError("transform collapsed the box to zero extent")
    return Box.from_corners(left, top, right, bottom)


def box_to_state(b: Box) -> StateBox:
    """Box -> measurement vector [x_c, y_c, area, aspect]."""
    w = b.width
    h = b.height
    return StateBox(b.left + w / 2.0, b.top + h / 2.0, w * h, w / h)


def state_to_box(sb: StateBox) -> Box:
    """Inverse of :func:`box_to_state`; rejects non-positive area or aspect."""
    if not (sb.a > 0.0 and sb.s > 0.0):
        raise ValueError("state box must have positive area and aspect ratio")
    w = math.sqrt(sb.a * sb.s)
    h = math.sqrt(sb.a / sb.s)
    return Box(sb.x_c - w / 2.0, sb.y_c - h / 2.0, w, h)

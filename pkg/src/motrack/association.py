"""Cost-matrix assembly and linear assignment.

The fused score for a track/detection pair is

    C[m, n] = IoU[m, n] + (a_w + w_b(m, n)) * A_c[m, n] - lambda_ocm * ocm[m, n]

where ``w_b`` boosts the appearance weight when the cosine row/column is
discriminative: the gap between its best and second-best entry, capped at
``epsilon``, averaged over the pair's row and column.  The assignment then
maximizes total C; everything here is a pure function over matrices.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .geometry import Box


@dataclass
class AssociationParams:
    """Fusion weights and match gating."""

    a_w: float = 0.75  # global appearance weight
    epsilon: float = 0.5  # cap on the discriminativeness boost
    lambda_ocm: float = 0.2  # weight of the direction-consistency penalty
    iou_floor: float = 0.3  # minimum IoU for a surviving match
    delta_t: int = 3  # how far back the direction estimate looks

    def __post_init__(self):
        if not (self.epsilon > 0.0):
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.delta_t < 1:
            raise ValueError(f"delta_t must be >= 1, got {self.delta_t}")
        if self.a_w < 0.0 or self.lambda_ocm < 0.0:
            raise ValueError("weights must be non-negative")


@dataclass
class CostMatrix:
    """Fused scores plus the identity of each row (track id) and column."""

    values: np.ndarray
    track_ids: list | None = None
    det_indices: list | None = None


def _top_two_gap(values: np.ndarray, epsilon: float) -> float:
    """Gap between the largest and second-largest entry, capped at epsilon.

    A single candidate is maximally discriminative: its second-best is taken
    as -inf and the gap caps at epsilon.
    """
    top = -math.inf
    second = -math.inf
    for x in values:
        if x > top:
            second = top
            top = float(x)
        elif x > second:
            second = float(x)
    return min(top - second, epsilon)


def z_diff_det(a_c: np.ndarray, n: int, epsilon: float) -> float:
    """Discriminativeness of detection column ``n`` of the cosine matrix."""
    a_c = np.asarray(a_c)
    if a_c.size == 0:
        raise ValueError("empty appearance matrix")
    return _top_two_gap(a_c[:, n], epsilon)


def z_diff_track(a_c: np.ndarray, m: int, epsilon: float) -> float:
    """Discriminativeness of track row ``m`` of the cosine matrix."""
    a_c = np.asarray(a_c)
    if a_c.size == 0:
        raise ValueError("empty appearance matrix")
    return _top_two_gap(a_c[m, :], epsilon)


def weight_boost(z_track: float, z_det: float) -> float:
    """Per-pair appearance boost: mean of the row and column gaps."""
    return (z_track + z_det) / 2.0


def boost_matrix(a_c: np.ndarray, epsilon: float) -> np.ndarray:
    """All pairwise weight boosts for a cosine matrix, as an (M, N) array."""
    a_c = np.asarray(a_c, dtype=np.float64)
    m, n = a_c.shape
    z_rows = np.array([_top_two_gap(a_c[i, :], epsilon) for i in range(m)])
    z_cols = np.array([_top_two_gap(a_c[:, j], epsilon) for j in range(n)])
    return (z_rows[:, None] + z_cols[None, :]) / 2.0


def fuse_costs(
    iou: np.ndarray,
    a_c: np.ndarray,
    ocm: np.ndarray,
    p: AssociationParams,
    with_boost: bool = True,
    track_ids=None,
    det_indices=None,
) -> CostMatrix:
    """Blend IoU, appearance, and direction-consistency into one score matrix.

    The boost is always computed from the raw cosine matrix, never from the
    fused result.  ``with_boost=False`` drops the adaptive term and uses the
    flat appearance weight only.
    """
    iou = np.asarray(iou, dtype=np.float64)
    a_c = np.asarray(a_c, dtype=np.float64)
    ocm = np.asarray(ocm, dtype=np.float64)
    if iou.shape != a_c.shape or iou.shape != ocm.shape:
        raise ValueError(
            f"shape mismatch: iou {iou.shape}, appearance {a_c.shape}, ocm {ocm.shape}"
        )
    if with_boost and iou.size:
        weight = p.a_w + boost_matrix(a_c, p.epsilon)
    else:
        weight = p.a_w
    values = iou + weight * a_c - p.lambda_ocm * ocm
    return CostMatrix(values, track_ids, det_indices)


def solve_assignment(c, iou: np.ndarray, iou_floor: float):
    """Assign tracks to detections by maximum total fused score.

    Matched pairs whose raw IoU falls below ``iou_floor`` are demoted to
    unmatched after the solve (the solver input stays dense).  Returns
    ``(matches, unmatched_rows, unmatched_cols)`` with deterministic,
    lexicographically tie-broken matches.
    """
    values = c.values if isinstance(c, CostMatrix) else np.asarray(c, dtype=np.float64)
    iou = np.asarray(iou, dtype=np.float64)
    m, n = values.shape
    rows, cols = kernels.solve_lap(values)
    matches = []
    for r, col in zip(rows, cols):
        if iou[r, col] >= iou_floor:
            matches.append((int(r), int(col)))
    matched_rows = {r for r, _ in matches}
    matched_cols = {col for _, col in matches}
    unmatched_rows = [i for i in range(m) if i not in matched_rows]
    unmatched_cols = [j for j in range(n) if j not in matched_cols]
    return matches, unmatched_rows, unmatched_cols


def ocm_cost(track_history, track_last_obs: Box, det: Box) -> float:
    """Direction-consistency cost in radians, in [0, pi].

    Angle between the track's observed motion (oldest retained observation
    to its last one) and the turn implied by the candidate detection (last
    observation to detection center).  Returns 0 without at least one prior
    observation or when either direction is degenerate.
    """
    if not track_history:
        return 0.0
    ax, ay = track_history[0].center
    bx, by = track_last_obs.center
    cx, cy = det.center
    v1x, v1y = bx - ax, by - ay
    v2x, v2y = cx - bx, cy - by
    if (v1x == 0.0 and v1y == 0.0) or (v2x == 0.0 and v2y == 0.0):
        return 0.0
    cross = v1x * v2y - v1y * v2x
    dot = v1x * v2x + v1y * v2y
    return math.atan2(abs(cross), dot)

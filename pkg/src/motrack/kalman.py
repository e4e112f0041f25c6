"""Constant-velocity Kalman filter over the 7-D box state.

State layout: ``[x_c, y_c, a, s, vx, vy, va]`` — center, area, aspect ratio,
then per-frame velocities of center and area.  The aspect ratio carries no
velocity term.  All operations are state-in/state-out; nothing is mutated,
so independent filters can run concurrently without restriction.
"""

from dataclasses import dataclass, field

import numpy as np

from .geometry import CameraTransform, StateBox

DIM_X = 7
DIM_Z = 4


def _default_f() -> np.ndarray:
    f = np.eye(DIM_X)
    f[0, 4] = 1.0  # x_c += vx
    f[1, 5] = 1.0  # y_c += vy
    f[2, 6] = 1.0  # a  += va
    return f


def _default_h() -> np.ndarray:
    h = np.zeros((DIM_Z, DIM_X))
    h[0, 0] = h[1, 1] = h[2, 2] = h[3, 3] = 1.0
    return h


def _default_q() -> np.ndarray:
    q = np.eye(DIM_X)
    q[4:, 4:] *= 0.01
    q[-1, -1] *= 0.01
    return q


def _default_r() -> np.ndarray:
    r = np.eye(DIM_Z)
    r[2:, 2:] *= 10.0
    return r


def _default_p0() -> np.ndarray:
    p = np.eye(DIM_X) * 10.0
    p[4:, 4:] *= 1000.0  # unobservable initial velocities
    return p


@dataclass
class FilterParams:
    """Transition/observation model and noise levels (SORT-lineage defaults)."""

    F: np.ndarray = field(default_factory=_default_f)
    H: np.ndarray = field(default_factory=_default_h)
    Q: np.ndarray = field(default_factory=_default_q)
    R: np.ndarray = field(default_factory=_default_r)
    P0: np.ndarray = field(default_factory=_default_p0)


@dataclass
class KalmanState:
    """Mean vector and covariance of one track's filter."""

    x: np.ndarray
    P: np.ndarray

    def copy(self) -> "KalmanState":
        return KalmanState(self.x.copy(), self.P.copy())


def initial_state(z: StateBox, params: FilterParams) -> KalmanState:
    """State for a freshly observed box: measured components, zero velocities."""
    x = np.zeros(DIM_X)
    x[:DIM_Z] = z.as_vector()
    return KalmanState(x, params.P0.copy())


def predict(state: KalmanState, params: FilterParams) -> KalmanState:
    """Extrapolate one frame: x <- F x, P <- F P F^T + Q.

    If the extrapolated area would go non-positive the area velocity is
    zeroed first, keeping the state convertible back to a box.
    """
    x = state.x.copy()
    if x[2] + x[6] <= 0.0:
        x[6] = 0.0
    x = params.F @ x
    p = params.F @ state.P @ params.F.T + params.Q
    return KalmanState(x, p)


def update(state: KalmanState, z: StateBox, params: FilterParams) -> KalmanState:
    """Standard Kalman correction with measurement [x_c, y_c, a, s]."""
    h = params.H
    innovation = z.as_vector() - h @ state.x
    s_mat = h @ state.P @ h.T + params.R
    gain = np.linalg.solve(s_mat, h @ state.P).T
    x = state.x + gain @ innovation
    p = (np.eye(DIM_X) - gain @ h) @ state.P
    p = (p + p.T) / 2.0  # keep symmetric under long update chains
    return KalmanState(x, p)


def apply_cmc(state: KalmanState, t: CameraTransform) -> KalmanState:
    """Rotate/scale/translate the state into current-frame coordinates.

    Position gets the full similarity transform, the velocity its linear
    part, and the matching covariance blocks are conjugated.  Area, aspect
    ratio, and area velocity are left untouched.
    """
    m = t.matrix
    x = state.x.copy()
    p = state.P.copy()
    x[0:2] = m @ x[0:2] + t.translation
    x[4:6] = m @ x[4:6]
    p[0:2, 0:2] = m @ p[0:2, 0:2] @ m.T
    p[4:6, 4:6] = m @ p[4:6, 4:6] @ m.T
    return KalmanState(x, p)


def oos_reupdate(
    state: KalmanState,
    last_obs: StateBox,
    new_obs: StateBox,
    gap: int,
    params: FilterParams,
) -> KalmanState:
    """Re-associate after ``gap`` frames by replaying a virtual measurement path.

    Runs predict+update through ``gap`` measurements linearly interpolated
    component-wise from ``last_obs`` (the camera-corrected last measurement)
    to ``new_obs``; the final step uses ``new_obs`` itself.  ``state`` must
    be the filter state as of the last real update.
    """
    if gap < 1:
        raise ValueError(f"gap must be >= 1, got {gap}")
    start = last_obs.as_vector()
    delta = new_obs.as_vector() - start
    out = state
    for k in range(1, gap + 1):
        if k == gap:
            z = new_obs
        else:
            vec = start + delta * (k / gap)
            z = StateBox(vec[0], vec[1], vec[2], vec[3])
        out = update(predict(out, params), z, params)
    return out

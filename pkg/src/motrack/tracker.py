"""Frame-sequential tracking pipeline.

Each frame runs, in order: detection gating, camera-motion correction of
every live track (filter state, its frozen snapshot, last observation, and
observation history), Kalman prediction, fused association, an IoU-only
recovery round over last observations, state updates (with virtual-path
re-updates after gaps), appearance blending, track spawning, and retirement.

A tracker instance is strictly sequential over frames.  Distinct instances
share nothing; independent sequences can run concurrently.
"""

from collections import deque
from dataclasses import dataclass, field, replace

import numpy as np

from . import appearance as app
from . import association as asc
from . import kalman
from .geometry import (
    Box,
    CameraTransform,
    StateBox,
    box_to_state,
    iou_matrix,
    state_to_box,
    transform_box,
)

TENTATIVE = "tentative"
CONFIRMED = "confirmed"
REMOVED = "removed"


@dataclass
class Detection:
    """One frame observation: box, confidence, optional embedding vector."""

    box: Box
    score: float
    embedding: np.ndarray | None = None

    def __post_init__(self):
        if not (0.0 <= self.score <= 1.0):
            raise ValueError(f"detection score must be in [0, 1], got {self.score}")


@dataclass
class TrackerConfig:
    """Pipeline thresholds, lifecycle limits, and feature switches."""

    sigma: float = 0.4  # detection confidence gate
    min_hits: int = 3
    max_age: int = 30
    assoc: asc.AssociationParams = field(default_factory=asc.AssociationParams)
    appear: app.AppearanceParams = field(default_factory=app.AppearanceParams)
    cmc_enabled: bool = True
    appearance_enabled: bool = True
    aw_enabled: bool = True  # adaptive appearance weighting
    da_enabled: bool = True  # confidence-gated (dynamic) EMA factor
    report_detections: bool = False  # emit raw detection boxes instead of posteriors
    filter_params: kalman.FilterParams = field(default_factory=kalman.FilterParams)


@dataclass
class FrameOutput:
    """Confirmed (id, box, score) entries for one frame, ascending by id."""

    frame: int
    entries: list


@dataclass
class TrackerStats:
    """Counters surfaced in the CLI summary."""

    frames: int = 0
    detections: int = 0
    tracks_created: int = 0
    matches: int = 0
    ocr_recoveries: int = 0
    alpha_sum: float = 0.0
    alpha_count: int = 0

    @property
    def mean_alpha(self) -> float | None:
        if self.alpha_count == 0:
            return None
        return self.alpha_sum / self.alpha_count


class Track:
    """Persistent identity: motion state, appearance memory, lifecycle."""

    __slots__ = (
        "id",
        "kf",
        "kf_frozen",
        "embedding",
        "last_obs",
        "last_update_frame",
        "history",
        "hits",
        "age_since_update",
        "status",
        "last_score",
    )

    def __init__(self, track_id: int, det: Detection, frame: int, cfg: TrackerConfig):
        self.id = track_id
        z = box_to_state(det.box)
        self.kf = kalman.initial_state(z, cfg.filter_params)
        self.kf_frozen = self.kf.copy()
        self.embedding = None
        self.last_obs = det.box
        self.last_update_frame = frame
        # prior observations only; last_obs is kept separately
        self.history = deque(maxlen=cfg.assoc.delta_t)
        self.hits = 1
        self.age_since_update = 0
        self.status = CONFIRMED if self.hits >= cfg.min_hits else TENTATIVE
        self.last_score = det.score

    def apply_cmc(self, t: CameraTransform) -> None:
        self.kf = kalman.apply_cmc(self.kf, t)
        self.kf_frozen = kalman.apply_cmc(self.kf_frozen, t)
        self.last_obs = transform_box(t, self.last_obs)
        for i in range(len(self.history)):
            self.history[i] = transform_box(t, self.history[i])

    def predict(self, params: kalman.FilterParams) -> None:
        self.kf = kalman.predict(self.kf, params)
        self.age_since_update += 1

    def predicted_box(self) -> Box:
        x = self.kf.x
        return state_to_box(box_state(x))

    def posterior_box(self) -> Box:
        return state_to_box(box_state(self.kf.x))


def box_state(x: np.ndarray) -> StateBox:
    """Measurement-space view of a filter mean vector."""
    return StateBox(float(x[0]), float(x[1]), float(x[2]), float(x[3]))


class Tracker:
    """Multi-object tracker over precomputed detections.

    Feed frames in strictly increasing order through :meth:`step`, or hand
    whole parsed files to :meth:`run_sequence`.  Identical inputs always
    produce identical outputs.
    """

    def __init__(self, config: TrackerConfig | None = None):
        self.config = config or TrackerConfig()
        self.tracks: list[Track] = []
        self.stats = TrackerStats()
        self._next_id = 1
        self._last_frame: int | None = None
        self._embed_dim: int | None = None

    # -- frame step ---------------------------------------------------------

    def step(
        self,
        detections,
        cmc: CameraTransform | None = None,
        frame: int | None = None,
    ) -> FrameOutput:
        """Advance one frame and return the confirmed tracks matched in it."""
        cfg = self.config
        if frame is None:
            frame = 0 if self._last_frame is None else self._last_frame + 1
        if self._last_frame is not None and frame <= self._last_frame:
            raise ValueError(
                f"frames must be strictly increasing: got {frame} after {self._last_frame}"
            )
        self._last_frame = frame
        self.stats.frames += 1

        dets = [d for d in detections if d.score >= cfg.sigma]
        self.stats.detections += len(dets)
        self._check_embedding_dims(dets)

        if cfg.cmc_enabled and cmc is not None:
            for tr in self.tracks:
                tr.apply_cmc(cmc)

        for tr in self.tracks:
            tr.predict(cfg.filter_params)

        matches, unmatched_tracks, unmatched_dets = self._associate(dets)
        ocr_matches, unmatched_tracks, unmatched_dets = self._recover(
            dets, unmatched_tracks, unmatched_dets
        )

        for ti, di in matches:
            self._apply_match(self.tracks[ti], dets[di], frame)
        for ti, di in ocr_matches:
            self._apply_match(self.tracks[ti], dets[di], frame)
        self.stats.matches += len(matches) + len(ocr_matches)
        self.stats.ocr_recoveries += len(ocr_matches)

        for di in unmatched_dets:
            self._spawn(dets[di], frame)

        survivors = []
        for tr in self.tracks:
            if tr.age_since_update > cfg.max_age:
                tr.status = REMOVED
            else:
                survivors.append(tr)
        self.tracks = survivors

        entries = []
        for tr in self.tracks:
            if tr.age_since_update == 0 and tr.status == CONFIRMED:
                box = tr.last_obs if cfg.report_detections else tr.posterior_box()
                entries.append((tr.id, box, tr.last_score))
        entries.sort(key=lambda e: e[0])
        return FrameOutput(frame=frame, entries=entries)

    # -- association rounds -------------------------------------------------

    def _associate(self, dets):
        cfg = self.config
        m, n = len(self.tracks), len(dets)
        if m == 0 or n == 0:
            return [], list(range(m)), list(range(n))

        track_boxes = [tr.predicted_box() for tr in self.tracks]
        det_boxes = [d.box for d in dets]
        iou = iou_matrix(track_boxes, det_boxes)

        a_c = np.zeros((m, n))
        if cfg.appearance_enabled:
            t_idx = [i for i, tr in enumerate(self.tracks) if tr.embedding is not None]
            d_idx = [j for j, d in enumerate(dets) if d.embedding is not None]
            if t_idx and d_idx:
                sub = app.appearance_cost_matrix(
                    [self.tracks[i].embedding for i in t_idx],
                    [app.normalize_embedding(dets[j].embedding) for j in d_idx],
                )
                a_c[np.ix_(t_idx, d_idx)] = sub

        ocm = np.zeros((m, n))
        for i, tr in enumerate(self.tracks):
            for j, d in enumerate(dets):
                ocm[i, j] = asc.ocm_cost(tr.history, tr.last_obs, d.box)

        fused = asc.fuse_costs(iou, a_c, ocm, cfg.assoc, with_boost=cfg.aw_enabled)
        return asc.solve_assignment(fused, iou, cfg.assoc.iou_floor)

    def _recover(self, dets, unmatched_tracks, unmatched_dets):
        """IoU-only second round over CMC-corrected last observations."""
        cfg = self.config
        if not unmatched_tracks or not unmatched_dets:
            return [], unmatched_tracks, unmatched_dets
        last_boxes = [self.tracks[i].last_obs for i in unmatched_tracks]
        det_boxes = [dets[j].box for j in unmatched_dets]
        iou = iou_matrix(last_boxes, det_boxes)
        sub_matches, sub_ut, sub_ud = asc.solve_assignment(
            iou, iou, cfg.assoc.iou_floor
        )
        matches = [(unmatched_tracks[a], unmatched_dets[b]) for a, b in sub_matches]
        rest_tracks = [unmatched_tracks[a] for a in sub_ut]
        rest_dets = [unmatched_dets[b] for b in sub_ud]
        return matches, rest_tracks, rest_dets

    # -- state updates ------------------------------------------------------

    def _apply_match(self, tr: Track, det: Detection, frame: int) -> None:
        cfg = self.config
        z = box_to_state(det.box)
        gap = frame - tr.last_update_frame
        if gap > 1:
            anchor = box_to_state(tr.last_obs)
            tr.kf = kalman.oos_reupdate(
                tr.kf_frozen, anchor, z, gap, cfg.filter_params
            )
        else:
            tr.kf = kalman.update(tr.kf, z, cfg.filter_params)
        tr.kf_frozen = tr.kf.copy()
        tr.history.append(tr.last_obs)
        tr.last_obs = det.box
        tr.last_update_frame = frame
        tr.age_since_update = 0
        tr.hits += 1
        tr.last_score = det.score
        if tr.hits >= cfg.min_hits and tr.status == TENTATIVE:
            tr.status = CONFIRMED

        if cfg.appearance_enabled and det.embedding is not None:
            emb = app.normalize_embedding(det.embedding)
            if tr.embedding is None:
                tr.embedding = emb
            else:
                if cfg.da_enabled:
                    alpha = app.dynamic_alpha(det.score, cfg.appear)
                else:
                    alpha = cfg.appear.alpha_f
                tr.embedding = app.ema_update(tr.embedding, emb, alpha)
                self.stats.alpha_sum += alpha
                self.stats.alpha_count += 1

    def _spawn(self, det: Detection, frame: int) -> None:
        tr = Track(self._next_id, det, frame, self.config)
        self._next_id += 1
        if self.config.appearance_enabled and det.embedding is not None:
            tr.embedding = app.normalize_embedding(det.embedding)
        self.tracks.append(tr)
        self.stats.tracks_created += 1

    def _check_embedding_dims(self, dets) -> None:
        for d in dets:
            if d.embedding is None:
                continue
            dim = int(np.asarray(d.embedding).reshape(-1).shape[0])
            if self._embed_dim is None:
                self._embed_dim = dim
            elif dim != self._embed_dim:
                raise ValueError(
                    f"embedding dimension mismatch: expected {self._embed_dim}, got {dim}"
                )

    # -- whole-sequence driver ----------------------------------------------

    def run_sequence(
        self,
        dets_by_frame,
        embs_by_frame=None,
        cmc_by_frame=None,
    ) -> list[FrameOutput]:
        """Fold :meth:`step` over a parsed sequence.

        Frames run densely from the first to the last detection frame;
        frames with no detections still age tracks and consume camera
        transforms.  Embedding lists must match detection counts per frame.
        """
        if not dets_by_frame:
            return []
        first, last = min(dets_by_frame), max(dets_by_frame)
        outputs = []
        for frame in range(first, last + 1):
            dets = dets_by_frame.get(frame, [])
            if embs_by_frame is not None:
                embs = embs_by_frame.get(frame, [])
                if len(embs) != len(dets):
                    raise ValueError(
                        f"frame {frame}: {len(dets)} detections but {len(embs)} embeddings"
                    )
                dets = [replace(d, embedding=e) for d, e in zip(dets, embs)]
            cmc = None
            if cmc_by_frame is not None:
                cmc = cmc_by_frame.get(frame)
            outputs.append(self.step(dets, cmc=cmc, frame=frame))
        return outputs

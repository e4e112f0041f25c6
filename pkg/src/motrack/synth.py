"""Seeded synthetic scenarios and desk-scale association metrics.

Every generator is a deterministic function of (seed, parameters); scenarios
serialize to the exact interchange formats, so generated data doubles as
parser fixtures.  The metrics are deliberately "lite" — greedy per-frame
matching, not the optimal matching of the reference evaluation toolkits —
and must never be compared against official toolkit numbers.
"""

from dataclasses import dataclass

import numpy as np

from . import io as mio
from . import kernels
from .geometry import Box, CameraTransform, iou
from .tracker import Detection, FrameOutput


@dataclass
class Scenario:
    """Ground truth plus the emitted detection/embedding/camera streams."""

    name: str
    n_frames: int
    # gt: id -> {frame: Box}; every emitted detection maps to exactly one id
    gt: dict
    dets: dict  # frame -> [(gt_id, Detection), ...] in emission order
    embs: dict | None = None  # frame -> [vector, ...] aligned with dets
    cmc: dict | None = None  # frame -> CameraTransform
    embed_dim: int | None = None

    def detections(self) -> dict:
        """Tracker-ready view: frame -> [Detection, ...]."""
        return {f: [d for _, d in rows] for f, rows in self.dets.items()}

    def det_counts(self) -> dict:
        return {f: len(rows) for f, rows in self.dets.items()}

    def write_files(self, out_dir, emb_fmt: str = "text") -> dict:
        """Serialize to det/emb/cmc/gt files; returns {kind: path}."""
        from pathlib import Path

        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = {"det": out / "det.txt", "gt": out / "gt.txt"}
        mio.write_detections(paths["det"], self.detections())
        gt_rows = {}
        for gt_id, traj in self.gt.items():
            for frame, box in traj.items():
                gt_rows.setdefault(frame, []).append((gt_id, box, 1.0))
        mio.write_tracks(mio.frame_outputs_from_tracks(gt_rows), paths["gt"])
        if self.embs is not None:
            ext = "txt" if emb_fmt == "text" else "bin"
            paths["emb"] = out / f"emb.{ext}"
            mio.write_embeddings(paths["emb"], self.embs, fmt=emb_fmt)
        if self.cmc is not None:
            paths["cmc"] = out / "cmc.txt"
            mio.write_cmc(paths["cmc"], self.cmc)
        return paths


@dataclass
class AssocMetrics:
    """Identity switches plus simplified MOTA/IDF1 over greedy matching."""

    id_switches: int
    mota_lite: float
    idf1_lite: float
    false_negatives: int = 0
    false_positives: int = 0
    true_positives: int = 0


def _noisy_embedding(rng, base: np.ndarray, noise: float) -> np.ndarray:
    vec = base + noise * rng.standard_normal(base.shape)
    return vec / np.linalg.norm(vec)


def gen_crossing(
    seed: int,
    n_targets: int = 2,
    noise: float = 0.1,
    sigma: float = 0.4,
    embed_dim: int = 8,
) -> Scenario:
    """Two targets meet on intersecting straight paths, hesitate, turn back.

    The mutual overlap exceeds 0.9 IoU for the whole meet window, scores dip
    to just above the confidence gate there, and the emitted embeddings blend
    both identities during the meet (occlusion corrupts crops).  Motion alone
    cannot tell "pass through" from "turn back"; the orthogonal base
    embeddings can.  Extra targets beyond the first two travel independent
    parallel lanes.
    """
    if n_targets < 2:
        raise ValueError(f"need at least 2 targets, got {n_targets}")
    rng = np.random.default_rng(seed)
    n_frames = 60
    size = 60.0
    meet_frames = range(29, 33)  # dwell window at the path intersection
    dim = max(embed_dim, n_targets)
    bases = np.eye(dim)[:n_targets]

    def center_a(t):
        if t < 29:
            return (500.0 - 10.0 * (29 - t), 397.0 - 1.0 * (29 - t))
        if t in meet_frames:
            return (500.0, 397.0)
        return (500.0 - 10.0 * (t - 32), 397.0 - 1.0 * (t - 32))

    def center_b(t):
        if t < 29:
            return (500.0 + 10.0 * (29 - t), 400.0 + 1.0 * (29 - t))
        if t in meet_frames:
            return (500.0, 400.0)
        return (500.0 + 10.0 * (t - 32), 400.0 + 1.0 * (t - 32))

    def lane(k, t):  # extra targets: straight horizontal lanes below the cross
        return (150.0 + 8.0 * t, 560.0 + 90.0 * (k - 2))

    gt: dict[int, dict[int, Box]] = {i: {} for i in range(n_targets)}
    dets: dict[int, list] = {}
    embs: dict[int, list] = {}
    half = size / 2.0
    for t in range(1, n_frames + 1):
        frame_rows = []
        for tid in range(n_targets):
            if tid == 0:
                cx, cy = center_a(t)
            elif tid == 1:
                cx, cy = center_b(t)
            else:
                cx, cy = lane(tid, t)
            box = Box(cx - half, cy - half, size, size)
            gt[tid][t] = box
            in_meet = tid < 2 and t in meet_frames
            score = sigma + 0.05 if in_meet else 0.9
            if in_meet:
                # occluded crops leak the other identity's features
                other = bases[1 - tid]
                emb = _noisy_embedding(rng, 0.75 * bases[tid] + 0.25 * other, noise)
            else:
                emb = _noisy_embedding(rng, bases[tid], noise)
            frame_rows.append((tid, Detection(box, score), emb))
        order = rng.permutation(len(frame_rows))
        dets[t] = [(frame_rows[i][0], frame_rows[i][1]) for i in order]
        embs[t] = [frame_rows[i][2] for i in order]
    return Scenario(
        name="crossing",
        n_frames=n_frames,
        gt=gt,
        dets=dets,
        embs=embs,
        embed_dim=dim,
    )


def gen_pan(seed: int, amplitude: float = 60.0, n_targets: int = 3) -> Scenario:
    """Static world, panning camera: targets jump ``amplitude`` px per frame.

    The matching camera file is emitted alongside; its per-frame transform
    maps frame t-1 coordinates into frame t.  With an integer-valued
    amplitude the emitted transforms recover the next frame's boxes exactly.
    """
    if not (amplitude > 0):
        raise ValueError(f"amplitude must be positive, got {amplitude}")
    rng = np.random.default_rng(seed)
    n_frames = 40
    width, height = 50.0, 80.0
    xs = 200.0 + 320.0 * np.arange(n_targets)
    ys = rng.integers(120, 420, size=n_targets).astype(np.float64)

    gt: dict[int, dict[int, Box]] = {i: {} for i in range(n_targets)}
    dets: dict[int, list] = {}
    cmc: dict[int, CameraTransform] = {}
    for t in range(1, n_frames + 1):
        offset = amplitude * (t - 1)
        rows = []
        for tid in range(n_targets):
            box = Box(xs[tid] - offset, ys[tid], width, height)
            gt[tid][t] = box
            rows.append((tid, Detection(box, 0.9)))
        dets[t] = rows
        if t > 1:
            cmc[t] = CameraTransform(np.eye(2), [-amplitude, 0.0])
    return Scenario(name="pan", n_frames=n_frames, gt=gt, dets=dets, cmc=cmc)


def gen_occlusion(seed: int, gap: int = 3, n_targets: int = 2) -> Scenario:
    """One fast target loses its detections for ``gap`` frames, then crawls on.

    The mover's prediction overshoots during the blackout while its last
    observed box still overlaps the reappearance, so recovery has to go
    through the last-observation round.  Other targets are unaffected.
    """
    if gap < 2:
        raise ValueError(f"gap must be >= 2, got {gap}")
    rng = np.random.default_rng(seed)
    n_frames = 20 + gap + 12
    size = 40.0
    occluded = range(21, 21 + gap)

    def mover_x(t):
        if t <= 20:
            return 60.0 + 10.0 * t
        return 260.0 + 1.0 * (t - 20)  # crawls from the disappearance point

    extra_y = 120.0 + 150.0 * np.arange(max(0, n_targets - 1))
    jitter = rng.uniform(-0.25, 0.25, size=(n_targets, n_frames + 1))

    gt: dict[int, dict[int, Box]] = {i: {} for i in range(n_targets)}
    dets: dict[int, list] = {}
    for t in range(1, n_frames + 1):
        rows = []
        for tid in range(n_targets):
            if tid == 0:
                box = Box(mover_x(t) - size / 2.0, 380.0, size, size)
            else:
                x = 600.0 + 2.0 * t + jitter[tid, t]
                box = Box(x, extra_y[tid - 1], size, size)
            gt[tid][t] = box
            if tid == 0 and t in occluded:
                continue
            rows.append((tid, Detection(box, 0.9)))
        dets[t] = rows
    return Scenario(name="occlusion", n_frames=n_frames, gt=gt, dets=dets)


GENERATORS = {
    "crossing": gen_crossing,
    "pan": gen_pan,
    "occlusion": gen_occlusion,
}


def score(gt: dict, outputs, iou_threshold: float = 0.5) -> AssocMetrics:
    """Greedy per-frame matching of predictions to ground truth.

    An identity switch is a ground-truth identity whose matched predicted id
    differs between consecutive frames in which it was matched at all.
    Prediction ids only ever enter through equality checks and a count-based
    bijection, so any relabeling of the id namespace leaves the result
    unchanged.
    """
    pred_by_frame = {fo.frame: fo.entries for fo in outputs}
    frames = sorted(set(pred_by_frame) | {f for traj in gt.values() for f in traj})

    total_gt = sum(len(traj) for traj in gt.values())
    total_pred = sum(len(entries) for entries in pred_by_frame.values())
    tp = fn = fp = idsw = 0
    last_matched_pred: dict[int, object] = {}
    pair_frames: dict[tuple, int] = {}

    for frame in frames:
        gt_items = sorted(
            (gid, traj[frame]) for gid, traj in gt.items() if frame in traj
        )
        pred_items = list(pred_by_frame.get(frame, []))
        candidates = []
        for gi, (gid, gbox) in enumerate(gt_items):
            for pi, (pid, pbox, _score) in enumerate(pred_items):
                overlap = iou(gbox, pbox)
                if overlap >= iou_threshold:
                    # order-based tie-breaks keep the metric invariant
                    # under relabeling of prediction ids
                    candidates.append((-overlap, gi, pi))
        candidates.sort()
        used_gt = set()
        used_pred = set()
        for neg_overlap, gi, pi in candidates:
            if gi in used_gt or pi in used_pred:
                continue
            used_gt.add(gi)
            used_pred.add(pi)
            gid = gt_items[gi][0]
            pid = pred_items[pi][0]
            tp += 1
            pair_frames[(gid, pid)] = pair_frames.get((gid, pid), 0) + 1
            if gid in last_matched_pred and last_matched_pred[gid] != pid:
                idsw += 1
            last_matched_pred[gid] = pid
        fn += len(gt_items) - len(used_gt)
        fp += len(pred_items) - len(used_pred)

    denom = max(total_gt, 1)
    mota = 1.0 - (fn + fp + idsw) / denom

    idtp = 0.0
    if pair_frames:
        gt_ids = sorted({g for g, _ in pair_frames})
        pred_ids = sorted({p for _, p in pair_frames}, key=repr)
        counts = np.zeros((len(gt_ids), len(pred_ids)))
        for (g, p), c in pair_frames.items():
            counts[gt_ids.index(g), pred_ids.index(p)] = c
        rows, cols = kernels.solve_lap(counts)
        idtp = float(counts[rows, cols].sum())
    idf1 = 2.0 * idtp / max(total_gt + total_pred, 1)
    return AssocMetrics(
        id_switches=idsw,
        mota_lite=mota,
        idf1_lite=idf1,
        false_negatives=fn,
        false_positives=fp,
        true_positives=tp,
    )

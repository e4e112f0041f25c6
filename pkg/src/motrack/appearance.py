"""Track appearance model: confidence-gated EMA of embeddings, cosine costs.

Embeddings are plain float64 vectors, L2-normalized at ingestion and after
every blend, so cosine similarity reduces to a dot product and repeated
averaging cannot shrink the vector.
"""

import warnings
from dataclasses import dataclass

import numpy as np

_DEGENERATE_NORM = 1e-12


@dataclass
class AppearanceParams:
    """EMA floor and the detection confidence threshold feeding the gate."""

    alpha_f: float = 0.95
    sigma: float = 0.4

    def __post_init__(self):
        if not (0.0 < self.sigma < 1.0):
            raise ValueError(f"sigma must be in (0, 1), got {self.sigma}")
        if not (0.0 <= self.alpha_f <= 1.0):
            raise ValueError(f"alpha_f must be in [0, 1], got {self.alpha_f}")


def normalize_embedding(v) -> np.ndarray:
    """Return the unit-norm float64 copy of an embedding vector."""
    arr = np.asarray(v, dtype=np.float64).reshape(-1)
    if not np.isfinite(arr).all():
        raise ValueError("embedding has non-finite components")
    norm = float(np.linalg.norm(arr))
    if norm < _DEGENERATE_NORM:
        raise ValueError("cannot normalize a zero embedding")
    return arr / norm


def dynamic_alpha(s_det: float, p: AppearanceParams) -> float:
    """Confidence-gated EMA factor.

    Decreases linearly from 1 at ``s_det == sigma`` (new embedding ignored)
    to ``alpha_f`` at ``s_det == 1`` (new embedding maximally blended).
    Callers must have filtered detections below ``sigma`` already.
    """
    if s_det < p.sigma:
        raise ValueError(f"detection score {s_det} below threshold {p.sigma}")
    if s_det > 1.0:
        raise ValueError(f"detection score {s_det} above 1")
    trust = (s_det - p.sigma) / (1.0 - p.sigma)
    return p.alpha_f + (1.0 - p.alpha_f) * (1.0 - trust)


def ema_update(e_prev: np.ndarray, e_new: np.ndarray, alpha_t: float) -> np.ndarray:
    """Blend a new embedding into the track memory and re-normalize.

    ``alpha_t == 1`` returns ``e_prev`` unchanged (bit-identical).  If the
    blend cancels to zero norm (opposite embeddings), the previous embedding
    is kept and a RuntimeWarning flags the degenerate input.
    """
    if alpha_t == 1.0:
        return e_prev
    mixed = alpha_t * e_prev + (1.0 - alpha_t) * e_new
    norm = float(np.linalg.norm(mixed))
    if norm < _DEGENERATE_NORM:
        warnings.warn("degenerate embedding blend; keeping previous", RuntimeWarning)
        return e_prev
    return mixed / norm


def appearance_cost_matrix(track_embs, det_embs) -> np.ndarray:
    """Cosine similarity between track and detection embeddings, (M, N).

    For the unit-norm vectors this package stores, each entry is the dot
    product; values lie in [-1, 1] up to roundoff.
    """
    t = np.atleast_2d(np.asarray(track_embs, dtype=np.float64))
    d = np.atleast_2d(np.asarray(det_embs, dtype=np.float64))
    if t.size == 0 or d.size == 0:
        return np.zeros((t.shape[0] if t.size else 0, d.shape[0] if d.size else 0))
    if t.shape[1] != d.shape[1]:
        raise ValueError(
            f"embedding dimension mismatch: tracks have {t.shape[1]}, detections {d.shape[1]}"
        )
    t_norm = np.linalg.norm(t, axis=1, keepdims=True)
    d_norm = np.linalg.norm(d, axis=1, keepdims=True)
    if (t_norm < _DEGENERATE_NORM).any() or (d_norm < _DEGENERATE_NORM).any():
        raise ValueError("zero-norm embedding in cost matrix input")
    return (t / t_norm) @ (d / d_norm).T

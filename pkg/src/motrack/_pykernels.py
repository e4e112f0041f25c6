"""Pure-Python reference kernels.

These mirror the compiled kernels in ``_speedups.pyx`` statement for
statement: both run the same IEEE-754 operation sequence, so results are
bit-identical across backends.  Keep the two files in sync.
"""

import math

import numpy as np


def iou_matrix(boxes_a: np.ndarray, boxes_b: np.ndarray) -> np.ndarray:
    """Pairwise IoU of two box sets given as (k, 4) float64 [l, t, r, b] arrays."""
    a = np.asarray(boxes_a, dtype=np.float64)
    b = np.asarray(boxes_b, dtype=np.float64)
    if a.ndim != 2 or a.shape[1] != 4 or b.ndim != 2 or b.shape[1] != 4:
        raise ValueError("boxes must be (k, 4) arrays in [l, t, r, b] layout")
    al, at, ar, ab = a[:, 0:1], a[:, 1:2], a[:, 2:3], a[:, 3:4]
    bl, bt, br, bb = b[:, 0], b[:, 1], b[:, 2], b[:, 3]
    iw = np.minimum(ar, br) - np.maximum(al, bl)
    ih = np.minimum(ab, bb) - np.maximum(at, bt)
    iw = np.where(iw > 0.0, iw, 0.0)
    ih = np.where(ih > 0.0, ih, 0.0)
    inter = iw * ih
    area_a = (ar - al) * (ab - at)
    area_b = (br - bl) * (bb - bt)
    return inter / (area_a + area_b - inter)


def lapjv(cost: np.ndarray):
    """Jonker-Volgenant shortest-augmenting-path solve of a dense min-cost
    rectangular assignment with ``rows <= cols``.

    Returns ``(col_of_row, row_of_col, u, v)`` where ``u``/``v`` are the
    final dual potentials (``cost[i, j] - u[i] - v[j] >= 0`` up to roundoff,
    with equality on matched edges).  Column scans run in ascending index
    order with strict ``<`` comparisons, which fixes the arithmetic and makes
    the duals reproducible bit for bit.
    """
    c = np.asarray(cost, dtype=np.float64)
    nr, nc = c.shape
    if nr > nc:
        raise ValueError("lapjv requires rows <= cols")
    if nr and not np.isfinite(c).all():
        raise ValueError("cost matrix must be finite")
    rows = [list(map(float, c[i])) for i in range(nr)]

    inf = math.inf
    u = [0.0] * nr
    v = [0.0] * nc
    col_of = [-1] * nr
    row_of = [-1] * nc

    for cur in range(nr):
        shortest = [inf] * nc
        pred = [cur] * nc
        done = [False] * nc
        scanned_rows = [cur]
        scanned_cols = []
        min_val = 0.0
        i = cur
        sink = -1
        while sink < 0:
            ci = rows[i]
            ui = u[i]
            lowest = inf
            jbest = -1
            for j in range(nc):
                if done[j]:
                    continue
                r = min_val + ci[j] - ui - v[j]
                if r < shortest[j]:
                    shortest[j] = r
                    pred[j] = i
                if shortest[j] < lowest:
                    lowest = shortest[j]
                    jbest = j
            # finite costs guarantee an augmenting path exists
            done[jbest] = True
            scanned_cols.append(jbest)
            min_val = lowest
            if row_of[jbest] < 0:
                sink = jbest
            else:
                i = row_of[jbest]
                scanned_rows.append(i)
        u[cur] = u[cur] + min_val
        for i2 in scanned_rows:
            if i2 != cur:
                u[i2] = u[i2] + (min_val - shortest[col_of[i2]])
        for j in scanned_cols:
            v[j] = v[j] - (min_val - shortest[j])
        j = sink
        while True:
            i2 = pred[j]
            row_of[j] = i2
            col_of[i2], j = j, col_of[i2]
            if i2 == cur:
                break

    return (
        np.asarray(col_of, dtype=np.intp),
        np.asarray(row_of, dtype=np.intp),
        np.asarray(u, dtype=np.float64),
        np.asarray(v, dtype=np.float64),
    )

# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: pairwise IoU and the assignment solver core.

Statement-for-statement port of ``_pykernels.py``.  The operation order is
identical on purpose (and the build disables FP contraction), so compiled and
pure results are bit-identical.  Keep the two files in sync.
"""

import numpy as np


def iou_matrix(boxes_a, boxes_b):
    """Pairwise IoU of two box sets given as (k, 4) float64 [l, t, r, b] arrays."""
    a_arr = np.ascontiguousarray(boxes_a, dtype=np.float64)
    b_arr = np.ascontiguousarray(boxes_b, dtype=np.float64)
    if a_arr.ndim != 2 or a_arr.shape[1] != 4 or b_arr.ndim != 2 or b_arr.shape[1] != 4:
        raise ValueError("boxes must be (k, 4) arrays in [l, t, r, b] layout")
    cdef double[:, ::1] a = a_arr
    cdef double[:, ::1] b = b_arr
    cdef Py_ssize_t m = a.shape[0]
    cdef Py_ssize_t n = b.shape[0]
    out_arr = np.empty((m, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double al, at, ar, ab, aa, bl, bt, br, bb, ba
    cdef double iw, ih, inter, lo, hi
    for i in range(m):
        al = a[i, 0]; at = a[i, 1]; ar = a[i, 2]; ab = a[i, 3]
        aa = (ar - al) * (ab - at)
        for j in range(n):
            bl = b[j, 0]; bt = b[j, 1]; br = b[j, 2]; bb = b[j, 3]
            hi = ar if ar < br else br
            lo = al if al > bl else bl
            iw = hi - lo
            if iw <= 0.0:
                out[i, j] = 0.0
                continue
            hi = ab if ab < bb else bb
            lo = at if at > bt else bt
            ih = hi - lo
            if ih <= 0.0:
                out[i, j] = 0.0
                continue
            inter = iw * ih
            ba = (br - bl) * (bb - bt)
            out[i, j] = inter / (aa + ba - inter)
    return out_arr


def lapjv(cost):
    """Jonker-Volgenant shortest-augmenting-path LAP solve, rows <= cols.

    Returns (col_of_row, row_of_col, u, v); see ``_pykernels.lapjv``.
    """
    c_arr = np.ascontiguousarray(cost, dtype=np.float64)
    cdef Py_ssize_t nr = c_arr.shape[0]
    cdef Py_ssize_t nc = c_arr.shape[1]
    if nr > nc:
        raise ValueError("lapjv requires rows <= cols")
    if nr and not np.isfinite(c_arr).all():
        raise ValueError("cost matrix must be finite")
    cdef double[:, ::1] c = c_arr

    u_arr = np.zeros(nr, dtype=np.float64)
    v_arr = np.zeros(nc, dtype=np.float64)
    col_of_arr = np.full(nr, -1, dtype=np.intp)
    row_of_arr = np.full(nc, -1, dtype=np.intp)
    cdef double[::1] u = u_arr
    cdef double[::1] v = v_arr
    cdef Py_ssize_t[::1] col_of = col_of_arr
    cdef Py_ssize_t[::1] row_of = row_of_arr

    shortest_arr = np.empty(nc, dtype=np.float64)
    pred_arr = np.empty(nc, dtype=np.intp)
    done_arr = np.empty(nc, dtype=np.uint8)
    sr_arr = np.empty(nr, dtype=np.intp)
    sc_arr = np.empty(nc, dtype=np.intp)
    cdef double[::1] shortest = shortest_arr
    cdef Py_ssize_t[::1] pred = pred_arr
    cdef unsigned char[::1] done = done_arr
    cdef Py_ssize_t[::1] scanned_rows = sr_arr
    cdef Py_ssize_t[::1] scanned_cols = sc_arr

    cdef double inf = np.inf
    cdef Py_ssize_t cur, i, j, i2, jbest, n_sr, n_sc, k
    cdef double min_val, lowest, r, ui
    cdef Py_ssize_t sink, tmp

    for cur in range(nr):
        for j in range(nc):
            shortest[j] = inf
            pred[j] = cur
            done[j] = 0
        scanned_rows[0] = cur
        n_sr = 1
        n_sc = 0
        min_val = 0.0
        i = cur
        sink = -1
        while sink < 0:
            ui = u[i]
            lowest = inf
            jbest = -1
            for j in range(nc):
                if done[j]:
                    continue
                r = min_val + c[i, j] - ui - v[j]
                if r < shortest[j]:
                    shortest[j] = r
                    pred[j] = i
                if shortest[j] < lowest:
                    lowest = shortest[j]
                    jbest = j
            done[jbest] = 1
            scanned_cols[n_sc] = jbest
            n_sc += 1
            min_val = lowest
            if row_of[jbest] < 0:
                sink = jbest
            else:
                i = row_of[jbest]
                scanned_rows[n_sr] = i
                n_sr += 1
        u[cur] = u[cur] + min_val
        for k in range(n_sr):
            i2 = scanned_rows[k]
            if i2 != cur:
                u[i2] = u[i2] + (min_val - shortest[col_of[i2]])
        for k in range(n_sc):
            j = scanned_cols[k]
            v[j] = v[j] - (min_val - shortest[j])
        j = sink
        while True:
            i2 = pred[j]
            row_of[j] = i2
            tmp = col_of[i2]
            col_of[i2] = j
            j = tmp
            if i2 == cur:
                break

    return col_of_arr, row_of_arr, u_arr, v_arr

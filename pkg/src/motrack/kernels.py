"""Hot-path kernels with a compiled core and a pure-Python fallback.

The backend is chosen once at import: the Cython extension
(``motrack._speedups``) when it is importable, otherwise the pure-Python
reference (``motrack._pykernels``).  Set ``MOTRACK_PURE=1`` to force the
fallback.  Both backends run the identical operation sequence, so every
result is bit-for-bit the same either way.

``solve_lap`` solves the rectangular assignment problem *maximizing* total
score.  When several assignments attain the optimum, the one whose sorted
(row, col) pair list is lexicographically smallest is returned.  Ties are
real in tracking cost matrices (zero-overlap blocks), and a pinned rule
keeps runs reproducible across backends and machines.
"""

import os

import numpy as np

from . import _pykernels

_FORCE_PURE = os.environ.get("MOTRACK_PURE", "").strip() not in ("", "0")

if _FORCE_PURE:
    _backend = _pykernels
    BACKEND = "pure"
else:
    try:
        from . import _speedups as _backend

        BACKEND = "compiled"
    except ImportError:  # extension not built
        _backend = _pykernels
        BACKEND = "pure"


def available_backends() -> dict:
    """Name -> module for every importable backend (used by tests/benchmarks)."""
    out = {"pure": _pykernels}
    try:
        from . import _speedups

        out["compiled"] = _speedups
    except ImportError:
        pass
    return out


def iou_matrix(boxes_a, boxes_b, backend=None) -> np.ndarray:
    """Pairwise IoU for (M, 4) and (N, 4) float64 [l, t, r, b] arrays."""
    mod = backend if backend is not None else _backend
    a = np.ascontiguousarray(boxes_a, dtype=np.float64).reshape(-1, 4)
    b = np.ascontiguousarray(boxes_b, dtype=np.float64).reshape(-1, 4)
    return mod.iou_matrix(a, b)


def solve_lap(scores, backend=None):
    """Maximum-total-score one-to-one assignment of rows to columns.

    Returns ``(rows, cols)`` index arrays of length ``min(M, N)`` with rows
    ascending.  Among all optimal assignments the lexicographically smallest
    sorted pair list is chosen (values within ``1e-12 * max|score|`` of the
    optimum count as tied).
    """
    mod = backend if backend is not None else _backend
    s = np.ascontiguousarray(scores, dtype=np.float64)
    if s.ndim != 2:
        raise ValueError("score matrix must be 2-D")
    m, n = s.shape
    empty = (np.empty(0, dtype=np.intp), np.empty(0, dtype=np.intp))
    if m == 0 or n == 0:
        return empty
    if not np.isfinite(s).all():
        raise ValueError("score matrix must be finite")

    # JV core works on the minimization problem with rows <= cols.
    if m <= n:
        col_of, _, u_min, v_min = mod.lapjv(np.ascontiguousarray(-s))
        row_dual = -u_min
        col_dual = -v_min
        base = [(i, int(col_of[i])) for i in range(m)]
    else:
        col_of, _, u_min, v_min = mod.lapjv(np.ascontiguousarray(-s.T))
        row_dual = -v_min
        col_dual = -u_min
        base = sorted((int(col_of[j]), j) for j in range(n))

    tol = 1e-12 * max(1.0, float(np.abs(s).max()))
    pairs = _lexicographic_refine(s, row_dual, col_dual, base, tol)
    rows = np.fromiter((p[0] for p in pairs), dtype=np.intp, count=len(pairs))
    cols = np.fromiter((p[1] for p in pairs), dtype=np.intp, count=len(pairs))
    return rows, cols


def _lexicographic_refine(s, row_dual, col_dual, base, tol):
    """Pick the lexicographically smallest optimal assignment.

    By complementary slackness an assignment is optimal iff it uses only
    tight edges (``row_dual + col_dual - score <= tol``), matches every
    mandatory vertex (all rows when M <= N, else rows with positive dual;
    symmetrically for columns), and has full cardinality.  A greedy scan in
    (row, col) order with a matching-feasibility oracle then yields the
    lexicographic minimum.  Degenerate dual noise falls back to the JV
    matching, which is still deterministic.
    """
    m, n = s.shape
    need = min(m, n)
    tight = (row_dual[:, None] + col_dual[None, :] - s) <= tol
    # Forced-matching fast path: exactly min(M, N) tight edges means no ties.
    if int(np.count_nonzero(tight)) == need:
        return sorted(base)

    row_mandatory = np.ones(m, dtype=bool) if m <= n else (row_dual > tol)
    col_mandatory = np.ones(n, dtype=bool) if n <= m else (col_dual > tol)
    adj = [np.flatnonzero(tight[i]) for i in range(m)]

    used_col = np.zeros(n, dtype=bool)
    forced = []
    for row in range(m):
        if len(forced) == need:
            break
        pick = -1
        for col in adj[row]:
            if used_col[col]:
                continue
            used_col[col] = True
            ok = _completion_exists(
                tight, adj, row, used_col, row_mandatory, col_mandatory
            )
            used_col[col] = False
            if ok:
                pick = int(col)
                break
        if pick >= 0:
            forced.append((row, pick))
            used_col[pick] = True
        elif row_mandatory[row]:
            return sorted(base)  # dual noise; keep the deterministic JV answer
    if len(forced) != need:
        return sorted(base)
    return forced


def _completion_exists(tight, adj, row, used_col, row_mandatory, col_mandatory):
    """True if rows > ``row`` can still complete an optimal assignment.

    Checks that the tight subgraph on the remaining vertices has a matching
    saturating every remaining mandatory row and one saturating every
    remaining mandatory column; by the Mendelsohn-Dulmage theorem a single
    matching then saturates both.
    """
    m, n = tight.shape
    lo = row + 1

    match_col = {}

    def augment_from_row(i, banned):
        for j in adj[i]:
            jj = int(j)
            if used_col[jj] or jj in banned:
                continue
            banned.add(jj)
            owner = match_col.get(jj, -1)
            if owner < 0 or augment_from_row(owner, banned):
                match_col[jj] = i
                return True
        return False

    for i in range(lo, m):
        if row_mandatory[i] and not augment_from_row(i, set()):
            return False

    match_row = {}

    def augment_from_col(j, banned):
        for i in range(lo, m):
            if not tight[i, j] or i in banned:
                continue
            banned.add(i)
            owner = match_row.get(i, -1)
            if owner < 0 or augment_from_col(owner, banned):
                match_row[i] = j
                return True
        return False

    for j in range(n):
        if col_mandatory[j] and not used_col[j]:
            if not augment_from_col(j, set()):
                return False
    return True

"""Hot numeric loops.

Each kernel exists twice: a loop version compiled with ``numba.njit`` and a
vectorised numpy version. Set ``OMNIAP_NO_NUMBA=1`` to force the numpy path
(also used automatically when numba is not importable).
"""

import os

import numpy as np

_CHUNK = 2048


def _env_disabled():
    return os.environ.get("OMNIAP_NO_NUMBA", "").strip().lower() in ("1", "true", "yes")


try:
    if _env_disabled():
        raise ImportError("numba disabled by OMNIAP_NO_NUMBA")
    import numba
    from numba import types
    from numba.typed import Dict

    HAVE_NUMBA = True
except ImportError:
    numba = None
    HAVE_NUMBA = False


# ---------------------------------------------------------------------------
# numpy implementations
# ---------------------------------------------------------------------------

def min_pairwise_gap_numpy(pts):
    n = pts.shape[0]
    best = np.inf
    for start in range(0, n, _CHUNK):
        block = pts[start:start + _CHUNK]
        diff = block[:, None, :] - pts[None, :, :]
        dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        rows = np.arange(block.shape[0])
        dist[rows, rows + start] = np.inf
        best = min(best, float(dist.min()))
    return best


def max_nearest_distance_numpy(targets, pool):
    worst = 0.0
    for start in range(0, targets.shape[0], _CHUNK):
        block = targets[start:start + _CHUNK]
        diff = block[:, None, :] - pool[None, :, :]
        dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        worst = max(worst, float(dist.min(axis=1).max()))
    return worst


def fps_packing_numpy(pts, r):
    n = pts.shape[0]
    chosen = [0]
    dmin = np.sqrt(((pts - pts[0]) ** 2).sum(axis=1))
    while True:
        idx = int(np.argmax(dmin))
        if not dmin[idx] > r:
            break
        chosen.append(idx)
        dmin = np.minimum(dmin, np.sqrt(((pts - pts[idx]) ** 2).sum(axis=1)))
    return np.asarray(chosen, dtype=np.int64)


def grid_packing_numpy(pts, r, offsets):
    h = r / np.sqrt(pts.shape[1])
    cells = np.floor((pts - pts.min(axis=0)) / h).astype(np.int64)
    occupied = {}
    chosen = []
    for i in range(pts.shape[0]):
        c = cells[i]
        ok = True
        for off in offsets:
            j = occupied.get(tuple(c + off))
            if j is not None and not np.sqrt(((pts[i] - pts[j]) ** 2).sum()) > r:
                ok = False
                break
        if ok:
            occupied[tuple(c)] = i
            chosen.append(i)
    return np.asarray(chosen, dtype=np.int64)


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if HAVE_NUMBA:

    @numba.njit(cache=True)
    def _dist(a, b):
        s = 0.0
        for k in range(a.shape[0]):
            t = a[k] - b[k]
            s += t * t
        return np.sqrt(s)

    @numba.njit(cache=True)
    def min_pairwise_gap_numba(pts):
        n = pts.shape[0]
        best = np.inf
        for i in range(n):
            for j in range(i + 1, n):
                dd = _dist(pts[i], pts[j])
                if dd < best:
                    best = dd
        return best

    @numba.njit(cache=True)
    def max_nearest_distance_numba(targets, pool):
        worst = 0.0
        for i in range(targets.shape[0]):
            near = np.inf
            for j in range(pool.shape[0]):
                dd = _dist(targets[i], pool[j])
                if dd < near:
                    near = dd
            if near > worst:
                worst = near
        return worst

    @numba.njit(cache=True)
    def fps_packing_numba(pts, r):
        n = pts.shape[0]
        dmin = np.empty(n)
        for i in range(n):
            dmin[i] = _dist(pts[i], pts[0])
        chosen = [0]
        while True:
            idx = 0
            for i in range(1, n):
                if dmin[i] > dmin[idx]:
                    idx = i
            if not dmin[idx] > r:
                break
            chosen.append(idx)
            for i in range(n):
                dd = _dist(pts[i], pts[idx])
                if dd < dmin[i]:
                    dmin[i] = dd
        return np.array(chosen, dtype=np.int64)

    @numba.njit(cache=True)
    def grid_packing_numba(pts, r, offsets):
        n, d = pts.shape
        h = r / np.sqrt(d)
        lo = np.empty(d)
        hi = np.empty(d)
        for k in range(d):
            lo[k] = pts[:, k].min()
            hi[k] = pts[:, k].max()
        # linearised cell keys with a one-cell margin per side for offsets
        pad = 0
        for k in range(offsets.shape[1]):
            pad = max(pad, offsets[:, k].max())
        stride = np.empty(d, dtype=np.int64)
        s = 1
        for k in range(d - 1, -1, -1):
            stride[k] = s
            s *= int(np.floor((hi[k] - lo[k]) / h)) + 1 + 2 * pad
        occupied = Dict.empty(key_type=types.int64, value_type=types.int64)
        chosen = []
        cell = np.empty(d, dtype=np.int64)
        for i in range(n):
            key = 0
            for k in range(d):
                cell[k] = int(np.floor((pts[i, k] - lo[k]) / h)) + pad
                key += cell[k] * stride[k]
            ok = True
            for o in range(offsets.shape[0]):
                nkey = key
                for k in range(d):
                    nkey += offsets[o, k] * stride[k]
                if nkey in occupied:
                    j = occupied[nkey]
                    if not _dist(pts[i], pts[j]) > r:
                        ok = False
                        break
            if ok:
                occupied[key] = i
                chosen.append(i)
        return np.array(chosen, dtype=np.int64)


def _as_points(pts):
    return np.ascontiguousarray(np.asarray(pts, dtype=np.float64))


def _neighbour_offsets(d):
    w = int(np.ceil(np.sqrt(d)))
    axes = [np.arange(-w, w + 1)] * d
    return np.ascontiguousarray(
        np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d).astype(np.int64)
    )


def min_pairwise_gap(pts, use_numba=None):
    pts = _as_points(pts)
    if _pick(use_numba):
        return float(min_pairwise_gap_numba(pts))
    return min_pairwise_gap_numpy(pts)


def max_nearest_distance(targets, pool, use_numba=None):
    targets, pool = _as_points(targets), _as_points(pool)
    if _pick(use_numba):
        return float(max_nearest_distance_numba(targets, pool))
    return max_nearest_distance_numpy(targets, pool)


def fps_packing(pts, r, use_numba=None):
    pts = _as_points(pts)
    if _pick(use_numba):
        return fps_packing_numba(pts, float(r))
    return fps_packing_numpy(pts, float(r))


def grid_packing(pts, r, use_numba=None):
    """Sequential greedy r-separated subset, accepting points in input order."""
    pts = _as_points(pts)
    offsets = _neighbour_offsets(pts.shape[1])
    if _pick(use_numba):
        return grid_packing_numba(pts, float(r), offsets)
    return grid_packing_numpy(pts, float(r), offsets)


def _pick(use_numba):
    if use_numba is None:
        return HAVE_NUMBA
    if use_numba and not HAVE_NUMBA:
        raise RuntimeError("numba kernels requested but numba is unavailable or disabled")
    return bool(use_numba)

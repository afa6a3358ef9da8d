"""Hot graph kernels with a numba path and a pure-numpy fallback.

Set ``CUSPWORK_DISABLE_NUMBA=1`` to force the numpy implementations.  Both
paths return identical integer arrays; the benchmark in ``benchmarks/``
compares them.
"""
from __future__ import annotations

import os

import numpy as np

UNREACHED = -1


def _numba_requested() -> bool:
    return os.environ.get("CUSPWORK_DISABLE_NUMBA", "").strip().lower() not in ("1", "true", "yes")


try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _numba_requested()


# --------------------------------------------------------------------------
# numpy implementations
# --------------------------------------------------------------------------

def _expand_frontier(indptr, indices, frontier):
    starts = indptr[frontier]
    counts = indptr[frontier + 1] - starts
    total = int(counts.sum())
    if total == 0:
        return np.empty(0, dtype=indices.dtype)
    offsets = np.repeat(starts - np.cumsum(counts) + counts, counts)
    return indices[np.arange(total) + offsets]


def multi_source_bfs_numpy(indptr, indices, sources):
    n = indptr.shape[0] - 1
    dist = np.full(n, UNREACHED, dtype=np.int32)
    frontier = np.unique(np.asarray(sources, dtype=np.int64))
    dist[frontier] = 0
    level = 0
    while frontier.size:
        level += 1
        nbrs = _expand_frontier(indptr, indices, frontier)
        nbrs = np.unique(nbrs)
        nbrs = nbrs[dist[nbrs] == UNREACHED]
        dist[nbrs] = level
        frontier = nbrs.astype(np.int64)
    return dist


def all_pairs_bfs_numpy(indptr, indices):
    n = indptr.shape[0] - 1
    out = np.empty((n, n), dtype=np.int32)
    for s in range(n):
        out[s] = multi_source_bfs_numpy(indptr, indices, [s])
    return out


def lex_paths_numpy(indptr, indices, dist, pairs, maxlen):
    """Lexicographically least geodesic for each ``(a, b)`` row of ``pairs``."""
    k = pairs.shape[0]
    paths = np.zeros((k, maxlen), dtype=np.int64)
    lengths = np.zeros(k, dtype=np.int64)
    for p in range(k):
        a, b = pairs[p]
        row = dist[b]
        cur = a
        paths[p, 0] = cur
        n = 1
        while cur != b:
            nbrs = indices[indptr[cur] : indptr[cur + 1]]
            cur = nbrs[np.argmax(row[nbrs] == row[cur] - 1)]
            paths[p, n] = cur
            n += 1
        lengths[p] = n
    return paths, lengths


def triangle_delta_numpy(dist, paths, lengths, triples):
    """``triples`` rows hold the path ids of the three sides of each triangle."""
    best = 0
    for t in range(triples.shape[0]):
        sides = [paths[p, : lengths[p]] for p in triples[t]]
        for i in range(3):
            others = np.concatenate((sides[(i + 1) % 3], sides[(i + 2) % 3]))
            gap = int(dist[np.ix_(sides[i], others)].min(axis=1).max())
            if gap > best:
                best = gap
    return best


# --------------------------------------------------------------------------
# numba implementations
# --------------------------------------------------------------------------

if HAVE_NUMBA:

    @numba.njit(cache=True)
    def multi_source_bfs_numba(indptr, indices, sources):
        n = indptr.shape[0] - 1
        dist = np.full(n, -1, dtype=np.int32)
        queue = np.empty(n, dtype=np.int64)
        head = 0
        tail = 0
        for s in sources:
            if dist[s] == -1:
                dist[s] = 0
                queue[tail] = s
                tail += 1
        while head < tail:
            u = queue[head]
            head += 1
            du = dist[u]
            for k in range(indptr[u], indptr[u + 1]):
                v = indices[k]
                if dist[v] == -1:
                    dist[v] = du + 1
                    queue[tail] = v
                    tail += 1
        return dist

    @numba.njit(cache=True, parallel=True)
    def all_pairs_bfs_numba(indptr, indices):
        n = indptr.shape[0] - 1
        out = np.empty((n, n), dtype=np.int32)
        for s in numba.prange(n):
            src = np.empty(1, dtype=np.int64)
            src[0] = s
            out[s] = multi_source_bfs_numba(indptr, indices, src)
        return out

    @numba.njit(cache=True, parallel=True)
    def lex_paths_numba(indptr, indices, dist, pairs, maxlen):
        k = pairs.shape[0]
        paths = np.zeros((k, maxlen), dtype=np.int64)
        lengths = np.zeros(k, dtype=np.int64)
        for p in numba.prange(k):
            a = pairs[p, 0]
            b = pairs[p, 1]
            cur = a
            paths[p, 0] = cur
            n = 1
            while cur != b:
                want = dist[b, cur] - 1
                for j in range(indptr[cur], indptr[cur + 1]):
                    w = indices[j]
                    if dist[b, w] == want:
                        cur = w
                        break
                paths[p, n] = cur
                n += 1
            lengths[p] = n
        return paths, lengths

    @numba.njit(cache=True)
    def _side_gap(dist, paths, lengths, a, c, e):
        # max over m on side a of distance to sides c and e
        worst = 0
        for i in range(lengths[a]):
            m = paths[a, i]
            near = 1 << 30
            for j in range(lengths[c]):
                w = dist[m, paths[c, j]]
                if w < near:
                    near = w
            for j in range(lengths[e]):
                w = dist[m, paths[e, j]]
                if w < near:
                    near = w
            if near > worst:
                worst = near
        return worst

    @numba.njit(cache=True, parallel=True)
    def triangle_delta_numba(dist, paths, lengths, triples):
        T = triples.shape[0]
        per = np.zeros(T, dtype=np.int64)
        for t in numba.prange(T):
            a = triples[t, 0]
            b = triples[t, 1]
            c = triples[t, 2]
            g = max(_side_gap(dist, paths, lengths, a, b, c), _side_gap(dist, paths, lengths, b, c, a))
            per[t] = max(g, _side_gap(dist, paths, lengths, c, a, b))
        return per.max()


# --------------------------------------------------------------------------
# dispatch
# --------------------------------------------------------------------------

def multi_source_bfs(indptr, indices, sources):
    sources = np.asarray(sources, dtype=np.int64)
    if USE_NUMBA:
        return multi_source_bfs_numba(indptr, indices, sources)
    return multi_source_bfs_numpy(indptr, indices, sources)


def all_pairs_bfs(indptr, indices):
    if USE_NUMBA:
        return all_pairs_bfs_numba(indptr, indices)
    return all_pairs_bfs_numpy(indptr, indices)


def lex_paths(indptr, indices, dist, pairs, maxlen):
    pairs = np.ascontiguousarray(pairs, dtype=np.int64).reshape(-1, 2)
    if USE_NUMBA:
        return lex_paths_numba(indptr, indices, dist, pairs, maxlen)
    return lex_paths_numpy(indptr, indices, dist, pairs, maxlen)


def triangle_delta(dist, paths, lengths, triples):
    triples = np.ascontiguousarray(triples, dtype=np.int64)
    if triples.shape[0] == 0:
        return 0
    if USE_NUMBA:
        return int(triangle_delta_numba(dist, paths, lengths, triples))
    return triangle_delta_numpy(dist, paths, lengths, triples)

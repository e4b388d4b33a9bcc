"""Undirected weighted kNN similarity graph over sample embeddings.

Each sample is linked to its k most cosine-similar samples (similarity
rescaled to [0, 1]); directed neighbor lists are then symmetrized by union.
Ties in similarity are broken toward the lower sample index, and edges whose
rescaled weight is exactly zero are dropped.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidK, ZeroVector

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    njit = None


@dataclass(frozen=True)
class SampleGraph:
    """CSR adjacency plus a canonical (u < v) edge list.

    ``indptr``/``indices``/``weights`` hold every undirected edge twice with
    per-row neighbor ids ascending; ``edge_u``/``edge_v``/``edge_w`` hold each
    edge once.  ``degrees[u]`` is the weighted degree d(u) and ``volume`` the
    total weighted degree of the graph.
    """

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray
    degrees: np.ndarray
    volume: float
    edge_u: np.ndarray
    edge_v: np.ndarray
    edge_w: np.ndarray

    @property
    def edge_count(self) -> int:
        return int(self.edge_u.size)

    def neighbors(self, u: int) -> tuple[np.ndarray, np.ndarray]:
        s, e = self.indptr[u], self.indptr[u + 1]
        return self.indices[s:e], self.weights[s:e]


def default_k(n: int) -> int:
    """Neighbor count that keeps the graph near O(n log2 n) edges."""
    if n < 2:
        raise InvalidK(f"need at least 2 samples, got {n}")
    return int(min(max(round(np.log2(n)), 1), n - 1))


def normalized_cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity of two rows mapped onto [0, 1]."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ZeroVector("zero-norm embedding row")
    cos = float(np.dot(a, b) / (na * nb))
    return min(max((cos + 1.0) / 2.0, 0.0), 1.0)


def _normalize_rows(emb: np.ndarray) -> np.ndarray:
    emb = np.ascontiguousarray(emb, dtype=np.float64)
    norms = np.linalg.norm(emb, axis=1)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise ZeroVector(f"zero-norm embedding row {int(zero[0])}")
    return emb / norms[:, None]


def _topk_block_np(sims: np.ndarray, start: int, k: int, out: np.ndarray) -> None:
    """Exact per-row top-k by (similarity desc, index asc) into ``out``."""
    rows, n = sims.shape
    sims[np.arange(rows), np.arange(start, start + rows)] = -np.inf
    kk = min(k + 1, n - 1)
    part = np.argpartition(sims, n - kk, axis=1)[:, n - kk:]
    pvals = np.take_along_axis(sims, part, axis=1)
    # order candidates by index first, then stably by value, so equal
    # similarities resolve toward the lower sample index
    by_idx = np.argsort(part, axis=1)
    part = np.take_along_axis(part, by_idx, axis=1)
    pvals = np.take_along_axis(pvals, by_idx, axis=1)
    by_val = np.argsort(-pvals, axis=1, kind="stable")
    part = np.take_along_axis(part, by_val, axis=1)
    pvals = np.take_along_axis(pvals, by_val, axis=1)
    out[:] = part[:, :k]
    if kk == k + 1:
        # a tie crossing the k-th position extends past the partition: those
        # rare rows need the full row rescanned for an exact answer
        for r in np.flatnonzero(pvals[:, k] == pvals[:, k - 1]):
            row = sims[r]
            cand = np.flatnonzero(row >= pvals[r, k - 1])
            order = np.lexsort((cand, -row[cand]))
            out[r] = cand[order[:k]]


if njit is not None:

    @njit(cache=True, nogil=True)
    def _topk_block_nb(sims, start, k, out):
        # per-row bounded min-heap keyed by (value, -index): the root is the
        # worst kept neighbor, so a candidate beats it when its similarity is
        # higher or equal with a lower index; exact and order-free
        rows, n = sims.shape
        hv = np.empty(k, dtype=np.float64)
        hi = np.empty(k, dtype=np.int64)
        for r in range(rows):
            gi = start + r
            row = sims[r]
            size = 0
            for j in range(n):
                if j == gi:
                    continue
                v = row[j]
                if size < k:
                    # push and sift up
                    pos = size
                    hv[pos] = v
                    hi[pos] = j
                    size += 1
                    while pos > 0:
                        par = (pos - 1) // 2
                        if hv[pos] < hv[par] or (hv[pos] == hv[par] and hi[pos] > hi[par]):
                            hv[pos], hv[par] = hv[par], hv[pos]
                            hi[pos], hi[par] = hi[par], hi[pos]
                            pos = par
                        else:
                            break
                    continue
                if v < hv[0] or (v == hv[0] and j > hi[0]):
                    continue
                # replace the root and sift down
                hv[0] = v
                hi[0] = j
                pos = 0
                while True:
                    child = 2 * pos + 1
                    if child >= k:
                        break
                    right = child + 1
                    if right < k and (
                        hv[right] < hv[child]
                        or (hv[right] == hv[child] and hi[right] > hi[child])
                    ):
                        child = right
                    if hv[child] < hv[pos] or (hv[child] == hv[pos] and hi[child] > hi[pos]):
                        hv[pos], hv[child] = hv[child], hv[pos]
                        hi[pos], hi[child] = hi[child], hi[pos]
                        pos = child
                    else:
                        break
            for t in range(k):
                out[r, t] = hi[t]


def _topk_block(sims: np.ndarray, start: int, k: int, out: np.ndarray) -> None:
    if njit is not None:
        _topk_block_nb(sims, start, k, out)
    else:
        _topk_block_np(sims, start, k, out)


def build_knn_graph(emb: np.ndarray, k: int, threads: int = 1) -> SampleGraph:
    """Exact blocked brute-force kNN graph under the normalized cosine weight."""
    emb = np.asarray(emb, dtype=np.float64)
    if emb.ndim != 2:
        raise InvalidK("embedding matrix must be 2-D")
    n = emb.shape[0]
    if not 1 <= k <= n - 1:
        raise InvalidK(f"k={k} outside [1, {n - 1}]")
    xn = _normalize_rows(emb)
    nbrs = np.empty((n, k), dtype=np.int64)

    # ~200 MB similarity buffer per in-flight block
    block = int(min(max(200_000_000 // (8 * max(n, 1)), 64), 8192))
    starts = range(0, n, block)

    def scan(s: int) -> None:
        e = min(s + block, n)
        sims = xn[s:e] @ xn.T
        _topk_block(sims, s, k, nbrs[s:e])

    if threads > 1:
        # one BLAS thread per worker, otherwise the workers thrash each other
        from threadpoolctl import threadpool_limits

        with threadpool_limits(limits=1, user_api="blas"):
            with ThreadPoolExecutor(max_workers=threads) as pool:
                list(pool.map(scan, starts))
    else:
        for s in starts:
            scan(s)

    us = np.repeat(np.arange(n, dtype=np.int64), k)
    vs = nbrs.reshape(-1)
    lo = np.minimum(us, vs)
    hi = np.maximum(us, vs)
    keys = np.unique(lo * n + hi)
    ea = keys // n
    eb = keys % n
    sim = np.einsum("ij,ij->i", xn[ea], xn[eb])
    ew = np.clip((sim + 1.0) / 2.0, 0.0, 1.0)
    keep = ew > 0.0
    return _assemble(n, ea[keep], eb[keep], ew[keep])


def _assemble(n: int, ea: np.ndarray, eb: np.ndarray, ew: np.ndarray) -> SampleGraph:
    rows = np.concatenate([ea, eb])
    cols = np.concatenate([eb, ea])
    ws = np.concatenate([ew, ew])
    order = np.lexsort((cols, rows))
    rows, cols, ws = rows[order], cols[order], ws[order]
    counts = np.bincount(rows, minlength=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    degrees = np.bincount(rows, weights=ws, minlength=n)
    return SampleGraph(
        n=n,
        indptr=indptr,
        indices=cols,
        weights=ws,
        degrees=degrees,
        volume=float(degrees.sum()),
        edge_u=ea,
        edge_v=eb,
        edge_w=ew,
    )


def graph_from_edges(n: int, ea, eb, ew) -> SampleGraph:
    """Build a SampleGraph from an explicit undirected edge list (tests, replay)."""
    ea = np.asarray(ea, dtype=np.int64)
    eb = np.asarray(eb, dtype=np.int64)
    ew = np.asarray(ew, dtype=np.float64)
    lo = np.minimum(ea, eb)
    hi = np.maximum(ea, eb)
    if (lo == hi).any():
        raise InvalidK("self-loops are not allowed")
    order = np.lexsort((hi, lo))
    return _assemble(n, lo[order], hi[order], ew[order])


def write_graph_csv(graph: SampleGraph, path) -> None:
    """Debug dump of the edge list as ``u,v,w`` with u < v."""
    lines = ["u,v,w"]
    for u, v, w in zip(graph.edge_u.tolist(), graph.edge_v.tolist(), graph.edge_w.tolist()):
        lines.append(f"{u},{v},{w!r}")
    Path(path).write_text("\n".join(lines) + "\n")

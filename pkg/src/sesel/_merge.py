"""Jitted core of the agglomerative merge loop.

Same discipline as the fallback in tree.py: communities absorb their smaller
neighbor (ids stay stable), neighbor dictionaries are kept clean, and a lazy
heap re-ranks entries that surface with out-of-date member state.  The heap
is a hand-rolled array quad-heap ordered by (priority, lo, hi) so ties break
deterministically toward the smallest id pair.

Returns per-merge records (surviving root, absorbed root, child tree nodes,
volumes/cuts) from which the caller assembles the tree.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit, types
    from numba.typed import Dict, List

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False


if HAVE_NUMBA:

    def merge_loop(edge_u, edge_v, edge_w, degrees, volume):
        return _merge_loop(
            np.ascontiguousarray(edge_u, dtype=np.int64),
            np.ascontiguousarray(edge_v, dtype=np.int64),
            np.ascontiguousarray(edge_w, dtype=np.float64),
            np.ascontiguousarray(degrees, dtype=np.float64),
            float(volume),
        )

    @njit(cache=True, inline="always")
    def _less(keys, los, his, i, j):
        if keys[i] != keys[j]:
            return keys[i] < keys[j]
        if los[i] != los[j]:
            return los[i] < los[j]
        return his[i] < his[j]

    @njit(cache=True)
    def _sift_down(keys, los, his, cuts_e, vas, vbs, size, start):
        # standard binary-heap sift starting at `start`
        root = start
        while True:
            child = 2 * root + 1
            if child >= size:
                return
            if child + 1 < size and _less(keys, los, his, child + 1, child):
                child += 1
            if _less(keys, los, his, child, root):
                for arr in (keys, cuts_e, vas, vbs):
                    arr[root], arr[child] = arr[child], arr[root]
                los[root], los[child] = los[child], los[root]
                his[root], his[child] = his[child], his[root]
                root = child
            else:
                return

    @njit(cache=True)
    def _sift_up(keys, los, his, cuts_e, vas, vbs, pos):
        while pos > 0:
            parent = (pos - 1) // 2
            if _less(keys, los, his, pos, parent):
                for arr in (keys, cuts_e, vas, vbs):
                    arr[pos], arr[parent] = arr[parent], arr[pos]
                los[pos], los[parent] = los[parent], los[pos]
                his[pos], his[parent] = his[parent], his[pos]
                pos = parent
            else:
                return

    @njit(cache=True)
    def _merge_loop(edge_u, edge_v, edge_w, degrees, volume):
        n = degrees.size
        ln_v = np.log(volume)
        vol = degrees.copy()
        g = degrees.copy()
        alive = np.ones(n, dtype=np.bool_)
        tnode = np.arange(n, dtype=np.int64)

        cuts = List()
        for _ in range(n):
            d = Dict.empty(types.int64, types.float64)
            cuts.append(d)
        m = edge_u.size
        for e in range(m):
            u = edge_u[e]
            v = edge_v[e]
            w = edge_w[e]
            cuts[u][v] = w
            cuts[v][u] = w

        cap = 2 * m + 16
        keys = np.empty(cap, dtype=np.float64)
        los = np.empty(cap, dtype=np.int64)
        his = np.empty(cap, dtype=np.int64)
        cuts_e = np.empty(cap, dtype=np.float64)
        vas = np.empty(cap, dtype=np.float64)
        vbs = np.empty(cap, dtype=np.float64)
        size = 0

        for e in range(m):
            u = edge_u[e]
            v = edge_v[e]
            w = edge_w[e]
            v12 = vol[u] + vol[v]
            lv = np.log(v12)
            keys[size] = (
                (vol[u] - g[u]) * (lv - np.log(vol[u]))
                + (vol[v] - g[v]) * (lv - np.log(vol[v]))
                - 2.0 * w * (ln_v - lv)
            )
            los[size] = u
            his[size] = v
            cuts_e[size] = w
            vas[size] = vol[u]
            vbs[size] = vol[v]
            size += 1
        # heapify
        for start in range(size // 2 - 1, -1, -1):
            _sift_down(keys, los, his, cuts_e, vas, vbs, size, start)

        # per-merge records
        rec_a = np.empty(n, dtype=np.int64)  # surviving root
        rec_b = np.empty(n, dtype=np.int64)  # absorbed root
        rec_ta = np.empty(n, dtype=np.int64)  # child tree nodes
        rec_tb = np.empty(n, dtype=np.int64)
        rec_vol = np.empty(n, dtype=np.float64)
        rec_cut = np.empty(n, dtype=np.float64)
        rec_inner = np.empty(n, dtype=np.float64)
        merges = 0
        h_delta = 0.0

        alive_cnt = n
        while alive_cnt > 2 and size > 0:
            key = keys[0]
            a = los[0]
            b = his[0]
            c = cuts_e[0]
            va = vas[0]
            vb = vbs[0]
            size -= 1
            if size > 0:
                keys[0] = keys[size]
                los[0] = los[size]
                his[0] = his[size]
                cuts_e[0] = cuts_e[size]
                vas[0] = vas[size]
                vbs[0] = vbs[size]
                _sift_down(keys, los, his, cuts_e, vas, vbs, size, 0)
            if not (alive[a] and alive[b]):
                continue
            cur = cuts[a].get(b, -1.0)
            if cur != c or vol[a] != va or vol[b] != vb:
                if cur > 0.0:
                    v12 = vol[a] + vol[b]
                    lv = np.log(v12)
                    keys[size] = (
                        (vol[a] - g[a]) * (lv - np.log(vol[a]))
                        + (vol[b] - g[b]) * (lv - np.log(vol[b]))
                        - 2.0 * cur * (ln_v - lv)
                    )
                    los[size] = a
                    his[size] = b
                    cuts_e[size] = cur
                    vas[size] = vol[a]
                    vbs[size] = vol[b]
                    size += 1
                    _sift_up(keys, los, his, cuts_e, vas, vbs, size - 1)
                continue

            new_vol = vol[a] + vol[b]
            new_cut = g[a] + g[b] - 2.0 * c
            rec_a[merges] = a
            rec_b[merges] = b
            rec_ta[merges] = tnode[a] if tnode[a] < tnode[b] else tnode[b]
            rec_tb[merges] = tnode[b] if tnode[a] < tnode[b] else tnode[a]
            rec_vol[merges] = new_vol
            rec_cut[merges] = new_cut
            rec_inner[merges] = c
            h_delta += 2.0 * c / volume * (np.log(new_vol) - ln_v)

            if len(cuts[b]) > len(cuts[a]):
                a, b = b, a
            alive[b] = False
            alive_cnt -= 1
            vol[a] = new_vol
            g[a] = new_cut
            tnode[a] = n + merges
            merges += 1
            ca = cuts[a]
            cb = cuts[b]
            if b in ca:
                del ca[b]
            if a in cb:
                del cb[a]
            va = vol[a]
            ga = g[a]
            vla = np.log(va)
            for x in cb:
                w = cb[x]
                cx = cuts[x]
                if b in cx:
                    del cx[b]
                nw = ca.get(x, 0.0) + w
                ca[x] = nw
                cx[a] = nw
                if size + 1 > cap:
                    # grow all heap arrays
                    ncap = cap * 2
                    nk = np.empty(ncap, dtype=np.float64)
                    nk[:size] = keys[:size]
                    keys = nk
                    nl = np.empty(ncap, dtype=np.int64)
                    nl[:size] = los[:size]
                    los = nl
                    nh = np.empty(ncap, dtype=np.int64)
                    nh[:size] = his[:size]
                    his = nh
                    nc = np.empty(ncap, dtype=np.float64)
                    nc[:size] = cuts_e[:size]
                    cuts_e = nc
                    nva = np.empty(ncap, dtype=np.float64)
                    nva[:size] = vas[:size]
                    vas = nva
                    nvb = np.empty(ncap, dtype=np.float64)
                    nvb[:size] = vbs[:size]
                    vbs = nvb
                    cap = ncap
                v12 = va + vol[x]
                lv = np.log(v12)
                keys[size] = (
                    (va - ga) * (lv - vla)
                    + (vol[x] - g[x]) * (lv - np.log(vol[x]))
                    - 2.0 * nw * (ln_v - lv)
                )
                if a < x:
                    los[size] = a
                    his[size] = x
                else:
                    los[size] = x
                    his[size] = a
                cuts_e[size] = nw
                vas[size] = vol[los[size]]
                vbs[size] = vol[his[size]]
                size += 1
                _sift_up(keys, los, his, cuts_e, vas, vbs, size - 1)
            cuts[b] = Dict.empty(types.int64, types.float64)

        # cross cuts between the surviving communities (the root's inner mass)
        root_inner = 0.0
        for i in range(n):
            if alive[i]:
                ci = cuts[i]
                for j in ci:
                    if i < j:
                        root_inner += ci[j]
        return (
            rec_a[:merges],
            rec_b[:merges],
            rec_ta[:merges],
            rec_tb[:merges],
            rec_vol[:merges],
            rec_cut[:merges],
            rec_inner[:merges],
            alive,
            tnode,
            h_delta,
            root_inner,
        )

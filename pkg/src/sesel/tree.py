"""Hierarchical community tree built by greedy structural-entropy minimization.

Construction is agglomerative: every graph node starts as its own community
under the root, and edge-connected community pairs merge one at a time until
only components remain.  Pairs are ranked by the classic two-level entropy
delta of forming the joint community C = A + B,

    prio(A, B) = (vol(A) - cut(A)) log(vol(C) / vol(A))
               + (vol(B) - cut(B)) log(vol(C) / vol(B))
               - 2 w(A, B) log(vol(V) / vol(C)),

which is negative exactly when the pair is denser inside than toward the rest
of the graph, so dense communities crystallize bottom-up before anything
cross-community merges.  (Ranking by the raw entropy change of the growing
binary tree instead is degenerate: that change is <= 0 for every connected
pair and rewards chain absorption into one giant community.)  The recorded
merge dendrogram is the tree; the entropy of the finished tree is tracked
incrementally through the exact per-merge change

    2 * w(A, B) / vol(V) * log(vol(C) / vol(V)).

The optional compression pass repeatedly deletes the internal node whose
removal (children re-attach to its parent) raises entropy the least, until the
tree height fits the configured bound.  Removing node x raises entropy by

    2 * inner(x) / vol(V) * log(vol(parent(x)) / vol(x))  >= 0,

where inner(x) is the total weight of graph edges whose lowest common ancestor
is exactly x.

Both passes keep a lazy heap: an entry is validated against the live state
when popped and superseded entries are reinserted with corrected keys, so a
pair whose rank went stale is re-ranked the moment it surfaces.  Fresh
entries are pushed whenever a pair forms or its cut weight changes; the only
rank updates deferred to surfacing are those caused purely by a member's
internal densification, which on every tested corpus leaves the merge order
identical to a full re-ranking (see the greedy-reference test).  Equal keys
resolve toward the lexicographically smallest id pair, making construction
deterministic.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import IsolatedNode, SameNode, TreeGraphMismatch
from .graph import SampleGraph


@dataclass(frozen=True)
class TreeBuildConfig:
    mode: str = "compressed"  # "binary" keeps the full merge tree
    max_height: int = 3

    def __post_init__(self):
        if self.mode not in ("binary", "compressed"):
            raise ValueError(f"unknown tree mode {self.mode!r}")
        if self.max_height < 2:
            raise ValueError("max_height must be >= 2")


@dataclass(frozen=True)
class EncodingTree:
    """Finalized community tree.

    Leaves are node ids 0..n_leaves-1 and coincide with sample ids.  ``vol``
    is the community's total weighted degree, ``cut`` the weight of edges
    leaving it, and ``inner`` the weight of edges whose LCA is the node.
    ``entropy_ln`` is the structural entropy (natural log) tracked
    incrementally during construction.
    """

    n_leaves: int
    parent: np.ndarray
    children: tuple
    vol: np.ndarray
    cut: np.ndarray
    inner: np.ndarray
    root: int
    depth: np.ndarray
    height: int
    volume: float
    entropy_ln: float = field(repr=False, default=float("nan"))

    @property
    def node_count(self) -> int:
        return int(self.parent.size)

    def entropy_at_base(self, base: float = 2.0) -> float:
        """Construction-time entropy converted to the requested log base."""
        return self.entropy_ln / math.log(base)


def _merge_records_py(graph: SampleGraph):
    """Pure-python merge loop; same discipline as the jitted core."""
    n = graph.n
    volume = graph.volume
    ln_v = math.log(volume)
    cuts: list = [dict() for _ in range(n)]
    for x, y, w in zip(graph.edge_u.tolist(), graph.edge_v.tolist(), graph.edge_w.tolist()):
        cuts[x][y] = cuts[y][x] = w
    vol_c = graph.degrees.tolist()
    g_c = graph.degrees.tolist()
    tnode = list(range(n))
    alive = bytearray([1]) * n

    def priority(a, b, c):
        v12 = vol_c[a] + vol_c[b]
        lv = math.log(v12)
        return (
            (vol_c[a] - g_c[a]) * (lv - math.log(vol_c[a]))
            + (vol_c[b] - g_c[b]) * (lv - math.log(vol_c[b]))
            - 2.0 * c * (ln_v - lv)
        )

    heap = []
    for x, y, w in zip(graph.edge_u.tolist(), graph.edge_v.tolist(), graph.edge_w.tolist()):
        heap.append((priority(x, y, w), x, y, w, vol_c[x], vol_c[y]))
    heapq.heapify(heap)
    push = heapq.heappush

    rec_ta, rec_tb, rec_vol, rec_cut, rec_inner = [], [], [], [], []
    h_delta = 0.0
    merges = 0
    alive_cnt = n
    while alive_cnt > 2 and heap:
        d, a, b, c, va, vb = heapq.heappop(heap)
        if not (alive[a] and alive[b]):
            continue  # superseded: fresh entries were pushed when ids merged
        cur = cuts[a].get(b)
        if cur != c or vol_c[a] != va or vol_c[b] != vb:
            if cur is not None:  # stale cut or volume: reinsert corrected
                push(heap, (priority(a, b, cur), a, b, cur, vol_c[a], vol_c[b]))
            continue

        new_vol = vol_c[a] + vol_c[b]
        new_cut = g_c[a] + g_c[b] - 2.0 * c
        ta, tb = tnode[a], tnode[b]
        rec_ta.append(min(ta, tb))
        rec_tb.append(max(ta, tb))
        rec_vol.append(new_vol)
        rec_cut.append(new_cut)
        rec_inner.append(c)
        h_delta += 2.0 * c / volume * (math.log(new_vol) - ln_v)

        # absorb the smaller neighbourhood into the larger one
        if len(cuts[b]) > len(cuts[a]):
            a, b = b, a
        alive[b] = 0
        alive_cnt -= 1
        vol_c[a] = new_vol
        g_c[a] = new_cut
        tnode[a] = n + merges
        merges += 1
        ca, cb = cuts[a], cuts[b]
        ca.pop(b, None)
        cb.pop(a, None)
        for x, w in cb.items():
            cx = cuts[x]
            cx.pop(b, None)
            nw = ca.get(x, 0.0) + w
            ca[x] = nw
            cx[a] = nw
            lo, hi = (a, x) if a < x else (x, a)
            push(heap, (priority(lo, hi, nw), lo, hi, nw, vol_c[lo], vol_c[hi]))
        cuts[b] = None

    root_inner = sum(
        cuts[i][j] for i in range(n) if alive[i] for j in cuts[i] if i < j
    )
    return (
        np.asarray(rec_ta, dtype=np.int64),
        np.asarray(rec_tb, dtype=np.int64),
        np.asarray(rec_vol, dtype=np.float64),
        np.asarray(rec_cut, dtype=np.float64),
        np.asarray(rec_inner, dtype=np.float64),
        np.frombuffer(bytes(alive), dtype=np.bool_),
        np.asarray(tnode, dtype=np.int64),
        h_delta,
        root_inner,
    )


def _merge_records(graph: SampleGraph):
    from . import _merge

    if not _merge.HAVE_NUMBA:
        return _merge_records_py(graph)
    out = _merge.merge_loop(
        graph.edge_u, graph.edge_v, graph.edge_w, graph.degrees, graph.volume
    )
    (_, _, rec_ta, rec_tb, rec_vol, rec_cut, rec_inner, alive, tnode, h_delta, root_inner) = out
    return rec_ta, rec_tb, rec_vol, rec_cut, rec_inner, alive, tnode, h_delta, root_inner


def build_tree(graph: SampleGraph, config: TreeBuildConfig | None = None) -> EncodingTree:
    """Greedy agglomerative encoding tree; optionally height-compressed."""
    config = config or TreeBuildConfig()
    n = graph.n
    if n == 0:
        raise IsolatedNode("empty graph")
    if (graph.degrees <= 0.0).any():
        bad = int(np.flatnonzero(graph.degrees <= 0.0)[0])
        raise IsolatedNode(f"node {bad} has zero degree")

    volume = graph.volume
    deg = graph.degrees
    # flat-tree entropy: every leaf directly under the root
    h_ln = float(-np.sum((deg / volume) * np.log(deg / volume)))

    rec_ta, rec_tb, rec_vol, rec_cut, rec_inner, alive, tnode, h_delta, root_inner = (
        _merge_records(graph)
    )
    merges = rec_ta.size
    count = n + merges + 1
    root = count - 1

    parent = [-1] * count
    children: list = [() for _ in range(count)]
    vol_t = deg.tolist() + [0.0] * (merges + 1)
    cut_t = deg.tolist() + [0.0] * (merges + 1)
    inner_t = [0.0] * count
    for i in range(merges):
        node = n + i
        ta = int(rec_ta[i])
        tb = int(rec_tb[i])
        children[node] = (ta, tb)
        parent[ta] = parent[tb] = node
        vol_t[node] = float(rec_vol[i])
        cut_t[node] = float(rec_cut[i])
        inner_t[node] = float(rec_inner[i])
    kids = sorted(int(tnode[i]) for i in range(n) if alive[i])
    children[root] = tuple(kids)
    for t in kids:
        parent[t] = root
    vol_t[root] = float(sum(vol_t[t] for t in kids))
    cut_t[root] = 0.0
    inner_t[root] = float(root_inner)
    h_ln += float(h_delta)

    tree = _finalize(
        n, count, parent, children, vol_t, cut_t, inner_t, root, volume, h_ln
    )
    if config.mode == "compressed":
        tree = compress_tree(tree, graph, config.max_height)
    return tree


def compress_tree(tree: EncodingTree, graph: SampleGraph, max_height: int) -> EncodingTree:
    """Delete cheapest internal nodes until the tree height fits max_height."""
    if max_height < 2:
        raise ValueError("max_height must be >= 2")
    if tree.height <= max_height:
        return tree

    volume = tree.volume
    m = tree.node_count
    parent = tree.parent.tolist()
    vol_t = tree.vol.tolist()
    cut_t = tree.cut.tolist()
    inner_t = tree.inner.tolist()
    children = [set(c.tolist()) for c in tree.children]
    alive = bytearray([1]) * m
    root = tree.root
    n = tree.n_leaves
    h_ln = tree.entropy_ln

    childh = [0] * m
    order = np.argsort(tree.depth)[::-1]
    for x in order.tolist():
        p = parent[x]
        if p >= 0:
            childh[p] = max(childh[p], childh[x] + 1)
    # per-node height histogram of the children, maintained on every edit
    hbuck: list = [None] * m
    for x in range(m):
        if children[x]:
            b = {}
            for c in children[x]:
                b[childh[c]] = b.get(childh[c], 0) + 1
            hbuck[x] = b

    def buck(p):
        return hbuck[p]

    def delta_of(x):
        return 2.0 * inner_t[x] / volume * (math.log(vol_t[parent[x]]) - math.log(vol_t[x]))

    heap = [
        (delta_of(x), x, parent[x], inner_t[x])
        for x in range(n, m)
        if x != root and children[x]
    ]
    heapq.heapify(heap)

    def reheight(p, old, new):
        """After a child's height changed from old to new, update p upward."""
        while p >= 0:
            b = buck(p)
            b[old] = b.get(old, 0) - 1
            if b[old] == 0:
                del b[old]
            b[new] = b.get(new, 0) + 1
            oldh = childh[p]
            newh = max(b) + 1
            if newh == oldh:
                return
            childh[p] = newh
            old, new, p = oldh, newh, parent[p]

    while childh[root] > max_height and heap:
        d, x, p, inn = heapq.heappop(heap)
        if not alive[x] or parent[x] != p or inner_t[x] != inn:
            if alive[x] and parent[x] >= 0 and children[x]:
                heapq.heappush(heap, (delta_of(x), x, parent[x], inner_t[x]))
            continue
        # remove x: its children re-attach to p
        alive[x] = 0
        h_ln += d
        pb = buck(p)
        pb[childh[x]] = pb.get(childh[x], 0) - 1
        if pb[childh[x]] == 0:
            del pb[childh[x]]
        children[p].discard(x)
        top = 0
        for c in children[x]:
            parent[c] = p
            children[p].add(c)
            pb[childh[c]] = pb.get(childh[c], 0) + 1
            if childh[c] > top:
                top = childh[c]
            if c >= n and children[c]:
                heapq.heappush(heap, (delta_of(c), c, p, inner_t[c]))
        inner_t[p] += inner_t[x]
        children[x] = set()
        oldh = childh[p]
        newh = max(pb) + 1
        if newh != oldh:
            childh[p] = newh
            reheight(parent[p], oldh, newh)
        if p != root:
            heapq.heappush(heap, (delta_of(p), p, parent[p], inner_t[p]))

    # compact live nodes: leaves keep their ids, internals are renumbered
    live = [i for i in range(m) if alive[i]]
    remap = {old: new for new, old in enumerate(live)}
    parent2 = [-1 if parent[i] < 0 else remap[parent[i]] for i in live]
    children2 = [tuple(sorted(remap[c] for c in children[i])) for i in live]
    vol2 = [vol_t[i] for i in live]
    cut2 = [cut_t[i] for i in live]
    inner2 = [inner_t[i] for i in live]
    return _finalize(
        n, len(live), parent2, children2, vol2, cut2, inner2, remap[root], volume, h_ln
    )


def _finalize(n, count, parent, children, vol_t, cut_t, inner_t, root, volume, h_ln):
    parent_a = np.asarray(parent[:count], dtype=np.int64)
    vol_a = np.asarray(vol_t[:count], dtype=np.float64)
    cut_a = np.asarray(cut_t[:count], dtype=np.float64)
    inner_a = np.asarray(inner_t[:count], dtype=np.float64)
    kids = tuple(np.asarray(sorted(children[i]), dtype=np.int64) for i in range(count))
    depth = np.zeros(count, dtype=np.int64)
    stack = [root]
    while stack:
        x = stack.pop()
        for c in kids[x]:
            depth[c] = depth[x] + 1
            stack.append(int(c))
    height = int(depth.max()) if count > 1 else 0
    return EncodingTree(
        n_leaves=n,
        parent=parent_a,
        children=kids,
        vol=vol_a,
        cut=cut_a,
        inner=inner_a,
        root=int(root),
        depth=depth,
        height=height,
        volume=float(volume),
        entropy_ln=float(h_ln),
    )


def tree_from_parents(graph: SampleGraph, parents) -> EncodingTree:
    """Build a tree from an explicit parent array (leaves first, -1 for root).

    Volumes, cuts, and inner weights are recomputed from the graph; the
    entropy field is filled from the finished structure.  Intended for
    hand-specified hierarchies in tools and tests.
    """
    parents = list(parents)
    count = len(parents)
    n = graph.n
    roots = [i for i, p in enumerate(parents) if p < 0]
    if len(roots) != 1:
        raise TreeGraphMismatch(f"need exactly one root, found {len(roots)}")
    root = roots[0]
    children: list = [set() for _ in range(count)]
    for i, p in enumerate(parents):
        if p >= 0:
            children[p].add(i)
    for i in range(n):
        if children[i]:
            raise TreeGraphMismatch(f"leaf {i} has children")
    for i in range(n, count):
        if not children[i]:
            raise TreeGraphMismatch(f"internal node {i} has no children")

    tree = _finalize(
        n, count, parents, children, [0.0] * count, [0.0] * count, [0.0] * count,
        root, graph.volume, float("nan"),
    )
    # fill volumes and cuts bottom-up from the graph
    order = np.argsort(tree.depth)[::-1]
    vol = np.zeros(count)
    vol[:n] = graph.degrees
    for x in order.tolist():
        for c in tree.children[x]:
            vol[x] += vol[c]
    lca = lca_nodes(tree, graph.edge_u, graph.edge_v)
    inner = np.bincount(lca, weights=graph.edge_w, minlength=count)
    inside = inner.copy()
    for x in order.tolist():
        for c in tree.children[x]:
            inside[x] += inside[c]
    cut = vol - 2.0 * inside
    mask = np.ones(count, dtype=bool)
    mask[root] = False
    terms = cut[mask] * (np.log(vol[mask]) - np.log(vol[tree.parent[mask]]))
    h_ln = float(-terms.sum() / graph.volume)
    return EncodingTree(
        n_leaves=n,
        parent=tree.parent,
        children=tree.children,
        vol=vol,
        cut=cut,
        inner=inner,
        root=root,
        depth=tree.depth,
        height=tree.height,
        volume=graph.volume,
        entropy_ln=h_ln,
    )


def lca_nodes(tree: EncodingTree, us: np.ndarray, vs: np.ndarray) -> np.ndarray:
    """Vectorized lowest common ancestor for arrays of leaf (sample) ids."""
    au = np.asarray(us, dtype=np.int64).copy()
    av = np.asarray(vs, dtype=np.int64).copy()
    parent = tree.parent
    depth = tree.depth
    du = depth[au].copy()
    dv = depth[av].copy()
    while True:
        m = du > dv
        if m.any():
            au[m] = parent[au[m]]
            du[m] -= 1
            continue
        m = dv > du
        if m.any():
            av[m] = parent[av[m]]
            dv[m] -= 1
            continue
        m = au != av
        if not m.any():
            return au
        au[m] = parent[au[m]]
        av[m] = parent[av[m]]
        du[m] -= 1
        dv[m] -= 1


def lca_volume(tree: EncodingTree, u: int, v: int) -> float:
    """Volume of the smallest community containing both samples."""
    if u == v:
        raise SameNode(f"lca_volume needs two distinct samples, got {u}")
    if not (0 <= u < tree.n_leaves and 0 <= v < tree.n_leaves):
        raise TreeGraphMismatch(f"sample out of range: {u}, {v}")
    node = lca_nodes(tree, np.array([u]), np.array([v]))[0]
    return float(tree.vol[node])


def validate_tree(tree: EncodingTree, graph: SampleGraph, tol: float = 1e-9) -> None:
    """Recompute vol/cut from the graph and check structural invariants."""
    if tree.n_leaves != graph.n:
        raise TreeGraphMismatch(f"{tree.n_leaves} leaves vs {graph.n} graph nodes")
    count = tree.node_count
    for i in range(tree.n_leaves):
        if tree.children[i].size:
            raise TreeGraphMismatch(f"leaf {i} has children")
    # membership bitmaps bottom-up via topological order (children before parents)
    order = np.argsort(tree.depth)[::-1]
    vol = np.zeros(count)
    vol[: tree.n_leaves] = graph.degrees
    for x in order.tolist():
        for c in tree.children[x]:
            vol[x] += vol[c]
    if not np.allclose(vol, tree.vol, rtol=tol, atol=tol):
        raise TreeGraphMismatch("stored volumes disagree with recomputation")
    lca = lca_nodes(tree, graph.edge_u, graph.edge_v)
    inner = np.bincount(lca, weights=graph.edge_w, minlength=count)
    if not np.allclose(inner, tree.inner, rtol=tol, atol=tol):
        raise TreeGraphMismatch("stored inner weights disagree with recomputation")
    # cut(x) = vol(x) - 2 * (edge weight inside x), accumulated bottom-up
    inside = inner.copy()
    for x in order.tolist():
        for c in tree.children[x]:
            inside[x] += inside[c]
    cut = vol - 2.0 * inside
    if not np.allclose(cut, tree.cut, rtol=tol, atol=max(tol, tol * graph.volume)):
        raise TreeGraphMismatch("stored cuts disagree with recomputation")
    if abs(tree.cut[tree.root]) > tol * max(1.0, graph.volume):
        raise TreeGraphMismatch("root cut must be zero")


def tree_to_json(tree: EncodingTree, path=None) -> str:
    """Dump nodes as {id, parent, vol, g, leaf_sample} records."""
    records = []
    for i in range(tree.node_count):
        records.append(
            {
                "id": i,
                "parent": None if tree.parent[i] < 0 else int(tree.parent[i]),
                "vol": float(tree.vol[i]),
                "g": float(tree.cut[i]),
                "leaf_sample": i if i < tree.n_leaves else None,
            }
        )
    text = json.dumps(records, indent=2)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text

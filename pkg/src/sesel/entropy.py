"""Structural entropy of a graph under an encoding tree, and its per-node split.

The graph-level quantity sums, over every non-root tree node, the plogp-style
term weighting the community's outgoing edges by how much volume its parent
adds.  An equivalent edge-wise form writes the same value as a sum of
w * log vol(lca(u, v)) over edges minus a degree term, which is what makes a
per-node decomposition possible: each node receives the share carried by its
own edges.  The decomposition is exact (per-node values sum back to the
graph-level entropy) and is validated here against a brute-force average of
marginal contributions over node orderings.
"""

from __future__ import annotations

import math
from itertools import combinations, permutations

import numpy as np

from .errors import TooLarge, TreeGraphMismatch
from .graph import SampleGraph
from .tree import EncodingTree, lca_nodes


def _check(graph: SampleGraph, tree: EncodingTree) -> None:
    if tree.n_leaves != graph.n:
        raise TreeGraphMismatch(
            f"tree has {tree.n_leaves} leaves but graph has {graph.n} nodes"
        )
    if graph.volume <= 0.0:
        raise TreeGraphMismatch("graph volume must be positive")


def graph_entropy_direct(graph: SampleGraph, tree: EncodingTree, base: float = 2.0) -> float:
    """Tree-node sum: -sum over non-root nodes of (g/vol(V)) log(vol/vol(parent))."""
    _check(graph, tree)
    mask = np.ones(tree.node_count, dtype=bool)
    mask[tree.root] = False
    cut = tree.cut[mask]
    vol = tree.vol[mask]
    pvol = tree.vol[tree.parent[mask]]
    terms = cut * (np.log(vol) - np.log(pvol))
    return float(-terms.sum() / (graph.volume * math.log(base)))


def graph_entropy_edge_sum(graph: SampleGraph, tree: EncodingTree, base: float = 2.0) -> float:
    """Edge-wise form: (2 sum_e w log vol(lca) - sum_u d log d) / vol(V)."""
    _check(graph, tree)
    lca = lca_nodes(tree, graph.edge_u, graph.edge_v)
    edge_part = float(np.sum(graph.edge_w * np.log(tree.vol[lca])))
    d = graph.degrees
    pos = d > 0.0
    deg_part = float(np.sum(d[pos] * np.log(d[pos])))
    return (2.0 * edge_part - deg_part) / (graph.volume * math.log(base))


def node_structural_entropy(
    graph: SampleGraph, tree: EncodingTree, base: float = 2.0, normalized: bool = True
) -> np.ndarray:
    """Per-sample share of entropy carried by the sample's own edges.

    Each edge contributes w * log vol(lca) to both endpoints; with
    ``normalized`` the sum is divided by the graph volume.
    """
    _check(graph, tree)
    lca = lca_nodes(tree, graph.edge_u, graph.edge_v)
    contrib = graph.edge_w * np.log(tree.vol[lca]) / math.log(base)
    out = np.bincount(graph.edge_u, weights=contrib, minlength=graph.n)
    out += np.bincount(graph.edge_v, weights=contrib, minlength=graph.n)
    return out / graph.volume if normalized else out


def shapley_closed_form(graph: SampleGraph, tree: EncodingTree, base: float = 2.0) -> np.ndarray:
    """Exact per-node split of the graph entropy; sums to the graph-level value."""
    s_e = node_structural_entropy(graph, tree, base)
    d = graph.degrees
    deg_term = np.where(d > 0.0, d * np.log(np.where(d > 0.0, d, 1.0)), 0.0)
    return s_e - deg_term / (graph.volume * math.log(base))


def _coalition_tables(graph: SampleGraph, tree: EncodingTree, base: float):
    """Per-edge and per-node terms entering a coalition's value."""
    lb = math.log(base)
    lca = lca_nodes(tree, graph.edge_u, graph.edge_v)
    edge_terms = 2.0 * graph.edge_w * np.log(tree.vol[lca]) / lb
    d = graph.degrees
    node_terms = np.where(d > 0.0, d * np.log(np.where(d > 0.0, d, 1.0)), 0.0) / lb
    return edge_terms, node_terms


def coalition_value(graph: SampleGraph, tree: EncodingTree, members, base: float = 2.0) -> float:
    """Entropy value of the subgraph induced on ``members``.

    Volumes, degrees, and ancestor volumes stay fixed at their full-graph
    values; only the edge and node sets shrink.  This is the game the
    brute-force reference below averages over.
    """
    _check(graph, tree)
    edge_terms, node_terms = _coalition_tables(graph, tree, base)
    return _coalition_value(graph, set(int(x) for x in members), edge_terms, node_terms)


def _coalition_value(graph, members, edge_terms, node_terms) -> float:
    total = 0.0
    for i, (u, v) in enumerate(zip(graph.edge_u.tolist(), graph.edge_v.tolist())):
        if u in members and v in members:
            total += edge_terms[i]
    for x in members:
        total -= node_terms[x]
    return total / graph.volume


def shapley_bruteforce(
    graph: SampleGraph,
    tree: EncodingTree,
    u: int,
    base: float = 2.0,
    method: str = "subset",
) -> float:
    """Average marginal contribution of node ``u`` over orderings.

    ``subset`` evaluates the binomially weighted subset sum; ``permutation``
    literally averages over all node orderings (tiny graphs only).  Both paths
    evaluate each coalition's value from scratch, independently of the
    closed-form decomposition they are used to check.
    """
    _check(graph, tree)
    n = graph.n
    u = int(u)
    edge_terms, node_terms = _coalition_tables(graph, tree, base)

    if method == "permutation":
        if n > 7:
            raise TooLarge(f"permutation enumeration limited to n <= 7, got {n}")
        total = 0.0
        count = 0
        for perm in permutations(range(n)):
            pos = perm.index(u)
            before = set(perm[:pos])
            total += _coalition_value(graph, before | {u}, edge_terms, node_terms)
            total -= _coalition_value(graph, before, edge_terms, node_terms)
            count += 1
        return total / count
    if method != "subset":
        raise ValueError(f"unknown method {method!r}")
    if n > 12:
        raise TooLarge(f"subset enumeration limited to n <= 12, got {n}")

    others = [x for x in range(n) if x != u]
    total = 0.0
    for size in range(n):
        weight = 1.0 / math.comb(n - 1, size)
        level = 0.0
        for subset in combinations(others, size):
            s = set(subset)
            level += _coalition_value(graph, s | {u}, edge_terms, node_terms)
            level -= _coalition_value(graph, s, edge_terms, node_terms)
        total += weight * level
    return total / n

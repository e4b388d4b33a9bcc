"""Acceptance gate: one test per criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -s`` to see the per-criterion
summary lines.  Two long-running checks (the full-size coverage benchmark and
the 100k end-to-end timing) carry the ``paperscale`` marker and are deselected
by default; run them with ``pytest -m paperscale -s``.
"""

import json
import math
import os
import subprocess
import sys
import time

import numpy as np
import pytest

from conftest import random_weighted_graph
from sesel import io, pipeline
from sesel.coverage import GmmSpec, run_coverage_check
from sesel.entropy import (
    graph_entropy_direct,
    graph_entropy_edge_sum,
    node_structural_entropy,
    shapley_bruteforce,
    shapley_closed_form,
)
from sesel.graph import build_knn_graph, default_k
from sesel.replay import ReplayMemory, update_merge_reduce, update_per_task
from sesel.sampler import SelectionConfig, select_samples
from sesel.tree import TreeBuildConfig, build_tree, compress_tree


def report(cid: str, message: str) -> None:
    print(f"\nACCEPTANCE {cid}: PASS — {message}")


def test_criterion_1_shapley_oracle_equivalence():
    """Closed form vs brute-force averaging on >= 100 small random graphs."""
    rng = np.random.default_rng(101)
    t0 = time.time()
    worst = 0.0
    graphs = 0
    while graphs < 100:
        n = int(rng.integers(3, 9))
        g = random_weighted_graph(rng, n, p=float(rng.uniform(0.3, 0.9)))
        mode = "binary" if rng.uniform() < 0.5 else "compressed"
        tree = build_tree(g, TreeBuildConfig(mode=mode))
        phi = shapley_closed_form(g, tree)
        for u in range(n):
            worst = max(worst, abs(shapley_bruteforce(g, tree, u) - phi[u]))
        graphs += 1
    elapsed = time.time() - t0
    assert worst <= 1e-9, f"max deviation {worst}"
    assert elapsed < 60.0
    report("1", f"{graphs} graphs, max |closed - brute| = {worst:.2e}, {elapsed:.1f}s")


def test_criterion_2_lossless_decomposition():
    """Sum of per-node values equals both graph-level forms up to n=1000."""
    rng = np.random.default_rng(202)
    t0 = time.time()
    worst = 0.0
    cases = 0
    sizes = [10, 50, 200, 500, 1000]
    for n in sizes:
        emb = rng.standard_normal((n, 8))
        g = build_knn_graph(emb, min(default_k(n), n - 1))
        for mode in ("binary", "compressed"):
            tree = build_tree(g, TreeBuildConfig(mode=mode))
            h1 = graph_entropy_direct(g, tree)
            h2 = graph_entropy_edge_sum(g, tree)
            total = float(shapley_closed_form(g, tree).sum())
            scale = max(1.0, abs(h1))
            worst = max(worst, abs(h1 - h2) / scale, abs(total - h1) / scale)
            cases += 1
    for _ in range(20):
        g = random_weighted_graph(rng, int(rng.integers(5, 60)))
        tree = build_tree(g, TreeBuildConfig())
        h1 = graph_entropy_direct(g, tree)
        h2 = graph_entropy_edge_sum(g, tree)
        total = float(shapley_closed_form(g, tree).sum())
        scale = max(1.0, abs(h1))
        worst = max(worst, abs(h1 - h2) / scale, abs(total - h1) / scale)
        cases += 1
    elapsed = time.time() - t0
    assert worst <= 1e-9, f"worst relative deviation {worst}"
    assert elapsed < 30.0
    report("2", f"{cases} cases up to n=1000, worst relative gap {worst:.2e}, {elapsed:.1f}s")


def test_criterion_3_construction_robustness():
    """Per-node scores barely move between the full and compressed trees."""
    t0 = time.time()
    # clustered mixture akin to embedding-space class structure
    spec = GmmSpec(classes=10, per_class=500, dim=16, seed=0, center_scale=3.0)
    from sesel.coverage import sample_gmm

    data, _ = sample_gmm(spec)
    g = build_knn_graph(data, default_k(spec.n))
    binary = build_tree(g, TreeBuildConfig(mode="binary"))
    compressed = compress_tree(binary, g, 3)
    s_b = node_structural_entropy(g, binary)
    s_c = node_structural_entropy(g, compressed)
    corr = float(np.corrcoef(s_b, s_c)[0, 1])
    elapsed = time.time() - t0
    assert corr >= 0.99, f"Pearson correlation {corr}"
    assert elapsed < 120.0
    report("3", f"Pearson(binary, compressed-3) = {corr:.4f} on 10x500 mixture, {elapsed:.1f}s")


def test_criterion_4_coverage_bound_desk():
    """Coverage lower bound holds for >= 85% of samples at desk scale."""
    t0 = time.time()
    spec = GmmSpec(classes=10, per_class=500, dim=16, seed=0)
    rep = run_coverage_check(spec)
    s = rep.summary()
    elapsed = time.time() - t0
    assert s["frac_ratio_ge_1"] >= 0.85, s
    assert elapsed < 300.0
    report(
        "4",
        f"ratio >= 1 for {100 * s['frac_ratio_ge_1']:.1f}% of samples; "
        f"p90 = {s['p90']:.2f}, p99 = {s['p99']:.2f} "
        f"(reference bands [1.00, 1.45] / < 1.97 are not met by this bound "
        f"instantiation: it is slack rather than tight), {elapsed:.1f}s",
    )


@pytest.mark.paperscale
def test_criterion_4_coverage_bound_full_scale():
    """Full-size coverage run (10 classes x 5000) finishes under 30 minutes.

    The >= 85% gate applies to the desk run; at full scale the criterion asks
    for completion time, with the band statistics reported for comparison.
    """
    t0 = time.time()
    spec = GmmSpec(classes=10, per_class=5000, dim=16, seed=0)
    rep = run_coverage_check(spec, threads=os.cpu_count() or 1)
    s = rep.summary()
    elapsed = time.time() - t0
    assert elapsed < 1800.0
    report(
        "4 (full scale)",
        f"n=50000 in {elapsed:.0f}s; ratio >= 1 for {100 * s['frac_ratio_ge_1']:.1f}%; "
        f"p90 = {s['p90']:.2f}, p99 = {s['p99']:.2f}",
    )


def test_criterion_5_sampler_contracts():
    """Budget exactness, blue-noise invariant, caps, affine and thread stability."""
    rng = np.random.default_rng(505)
    t0 = time.time()
    checked_caps = 0
    for trial in range(200):
        n = int(rng.integers(60, 220))
        dim = int(rng.integers(3, 10))
        emb = rng.standard_normal((n, dim))
        difficulty = rng.standard_normal(n)
        n_classes = int(rng.integers(2, 6))
        labels = rng.integers(0, n_classes, n)
        use_caps = trial % 4 == 0
        gamma = float(rng.uniform(1.0, 1.5)) if use_caps else None
        beta = float(rng.uniform(-0.4, 0.4))
        rate = float(rng.uniform(0.05, 0.4))
        seed = int(rng.integers(0, 10_000))
        kwargs = dict(
            rate=rate, beta=beta, gamma=gamma, seed=seed,
            labels=labels if use_caps else None,
        )
        res = pipeline.select(emb, difficulty, **kwargs)
        m = res.m
        # exact budget, uniqueness
        assert res.indices.size == m
        assert np.unique(res.indices).size == m
        # blue-noise invariant on the selection graph
        g = build_knn_graph(emb, default_k(n))
        sel = np.zeros(n, dtype=bool)
        sel[res.indices] = True
        both = sel[g.edge_u] & sel[g.edge_v]
        assert not (g.edge_w[both] > res.theta_final).any()
        # class caps unless relaxation was flagged
        if use_caps and not res.warnings:
            cap = math.ceil(gamma * m / (int(labels.max()) + 1))
            assert max(res.per_class_counts.values()) <= cap
            checked_caps += 1
        # positive affine transform of the raw difficulty cannot change anything
        res_aff = pipeline.select(emb, 3.0 * difficulty + 7.0, **kwargs)
        np.testing.assert_array_equal(res.indices, res_aff.indices)
        # identical rerun and thread-count variation are byte-identical
        res_rerun = pipeline.select(emb, difficulty, **kwargs)
        res_threads = pipeline.select(emb, difficulty, threads=3, **kwargs)
        blob = res.indices.tobytes() + json.dumps(io.selection_report_dict(res)).encode()
        for other in (res_rerun, res_threads):
            other_blob = other.indices.tobytes() + json.dumps(
                io.selection_report_dict(other)
            ).encode()
            assert blob == other_blob
    elapsed = time.time() - t0
    report(
        "5",
        f"200 instances: exact budgets, blue-noise invariant, "
        f"{checked_caps} capped runs within ceil(gamma*m/C), affine/thread/rerun stable, "
        f"{elapsed:.1f}s",
    )


def _ring_mixture(noise_seed: int):
    """2-D mixture with angularly separated classes (cosine-resolvable)."""
    angles = 2 * np.pi * np.arange(10) / 10
    centers = 4.0 * np.stack([np.cos(angles), np.sin(angles)], axis=1)
    rng = np.random.default_rng(noise_seed)
    train_labels = np.repeat(np.arange(10), 500)
    train = centers[train_labels] + rng.standard_normal((5000, 2))
    test_labels = np.repeat(np.arange(10), 100)
    test = centers[test_labels] + np.random.default_rng(noise_seed + 7919).standard_normal(
        (1000, 2)
    )
    d_all = np.linalg.norm(train[:, None, :] - centers[None, :, :], axis=2)
    d_own = d_all[np.arange(5000), train_labels]
    d_other = np.where(np.eye(10, dtype=bool)[train_labels], np.inf, d_all).min(axis=1)
    difficulty = d_own - d_other  # margin style: higher = harder
    return train, train_labels, test, test_labels, difficulty


def test_criterion_6_selection_quality_proxy():
    """Full selection beats random; score-only ablation trails it."""
    t0 = time.time()
    train, train_labels, test, test_labels, difficulty = _ring_mixture(0)

    def knn1_acc(sel_idx):
        d2 = ((test[:, None, :] - train[sel_idx][None, :, :]) ** 2).sum(-1)
        pred = train_labels[sel_idx][np.argmin(d2, axis=1)]
        return float((pred == test_labels).mean())

    full = knn1_acc(
        pipeline.select(
            train, difficulty, train_labels, rate=0.02, beta=0.5, gamma=1.1, seed=0
        ).indices
    )
    ablation = knn1_acc(
        pipeline.select(train, rate=0.02, seed=0, strategy="top_score").indices
    )
    random_accs = [
        knn1_acc(np.sort(np.random.default_rng(1000 + s).choice(5000, 100, replace=False)))
        for s in range(20)
    ]
    random_mean = float(np.mean(random_accs))
    elapsed = time.time() - t0
    assert full > random_mean, (full, random_mean)
    assert ablation < full, (ablation, full)
    assert elapsed < 300.0
    report(
        "6",
        f"1-NN accuracy: full selection {full:.3f} > random mean {random_mean:.3f}; "
        f"score-only ablation {ablation:.3f} < full, {elapsed:.1f}s",
    )


@pytest.mark.paperscale
def test_criterion_7_end_to_end_performance(tmp_path):
    """cmd_select on n=100k, d=64, k=17: < 60 s on 8 cores, < 4 GB."""
    rng = np.random.default_rng(7)
    data = rng.standard_normal((100_000, 64)).astype(np.float32)
    emb = tmp_path / "big.sesm"
    io.write_embeddings(emb, data.astype(np.float64))
    del data
    import resource

    cores = os.cpu_count() or 1
    t0 = time.time()
    proc = subprocess.run(
        [
            sys.executable, "-m", "sesel.cli", "select",
            "--embeddings", str(emb), "--identity-difficulty",
            "--rate", "0.1", "--k", "17", "--seed", "1",
            "--threads", str(cores),
            "--out", str(tmp_path / "sel.txt"), "--report", str(tmp_path / "rep.json"),
        ],
        capture_output=True,
        text=True,
    )
    elapsed = time.time() - t0
    assert proc.returncode == 0, proc.stderr
    peak_gb = resource.getrusage(resource.RUSAGE_CHILDREN).ru_maxrss / 1e6
    assert peak_gb < 4.0, f"peak RSS {peak_gb:.2f} GB"
    indices = io.read_selection_indices(tmp_path / "sel.txt")
    assert indices.size == 10_000
    msg = f"n=100k end-to-end {elapsed:.1f}s on {cores} cores, peak {peak_gb:.2f} GB"
    if elapsed < 60.0:
        report("7", msg)
    elif cores >= 8:
        pytest.fail(f"exceeded 60 s budget: {msg}")
    else:
        pytest.skip(f"stated budget assumes 8 cores; measured {msg}")


def test_criterion_8_replay_memory():
    """Per-task quota split stays even; merge-reduce conserves counts."""
    t0 = time.time()
    rng = np.random.default_rng(808)
    mem = ReplayMemory(capacity=100)
    for t in range(5):
        emb = rng.standard_normal((200, 6))
        difficulty = rng.uniform(size=200)
        update_per_task(mem, t, emb, difficulty, ids=np.arange(200) + 200 * t)
        sizes = [store.ids.size for store in mem.tasks]
        assert mem.size() <= 100
        assert max(sizes) - min(sizes) <= 1
    assert sizes == [20] * 5

    mr = ReplayMemory(capacity=50, mode="merge_reduce", slot_count=10)
    batch = 20
    for b in range(64):
        emb = rng.standard_normal((batch, 6))
        update_merge_reduce(mr, emb, rng.uniform(size=batch))
        assert mr.size() <= 50
        assert mr.represented_total() == (b + 1) * batch
    assert len(mr.slots) == 10
    assert not mr.warnings
    elapsed = time.time() - t0
    report(
        "8",
        f"5-task quotas all 20/20; merge-reduce over 64 batches conserves "
        f"{mr.represented_total()} streamed samples in {len(mr.slots)} slots, {elapsed:.1f}s",
    )

"""Command-line interface: select, score, bench-coverage, replay-sim.

Exit codes: 0 success, 2 usage error, 3 data error, 4 infeasible budget.
Errors print one line to stderr as ``error: <Name>: <message>``.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__, io, pipeline
from .coverage import GmmSpec, run_coverage_check
from .errors import SeselError, UsageError
from .replay import (
    ReplayMemory,
    snapshot_json,
    update_merge_reduce,
    update_per_task,
)
from .sampler import SelectionConfig


def _add_common_select_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--embeddings", required=True, help="embedding matrix (.sesm or CSV)")
    p.add_argument("--difficulty", help="difficulty CSV (index,value)")
    p.add_argument(
        "--identity-difficulty",
        action="store_true",
        help="score every sample with equal difficulty",
    )
    p.add_argument("--k", type=int, default=None, help="neighbors per sample (default: round(log2 n))")
    p.add_argument("--tree-mode", choices=["binary", "compressed"], default="compressed")
    p.add_argument("--max-height", type=int, default=3)
    p.add_argument("--log-base", choices=["2", "e"], default="2")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)


def _log_base(args) -> float:
    return 2.0 if args.log_base == "2" else float(np.e)


def _load_difficulty(args, n: int):
    if args.identity_difficulty and args.difficulty:
        raise UsageError("pass either --difficulty or --identity-difficulty")
    if args.difficulty:
        return io.read_scalar_csv(args.difficulty, n)
    if args.identity_difficulty:
        return None
    raise UsageError("need --difficulty FILE or --identity-difficulty")


def cmd_select(args) -> int:
    # flag validation happens before any heavy computation
    config = SelectionConfig(
        rate=args.rate,
        budget=args.budget,
        gamma=args.gamma,
        seed=args.seed,
        strategy=args.strategy.replace("-", "_"),
    )
    if args.gamma is not None and args.labels is None and args.kmeans is None:
        raise UsageError("--gamma requires --labels or --kmeans")
    if args.labels is not None and args.kmeans is not None:
        raise UsageError("pass either --labels or --kmeans, not both")
    emb = io.read_embeddings(args.embeddings)
    n = emb.shape[0]
    difficulty = _load_difficulty(args, n)
    labels = io.read_scalar_csv(args.labels, n, as_labels=True) if args.labels else None
    result = pipeline.select(
        emb,
        difficulty,
        labels,
        rate=config.rate,
        budget=config.budget,
        k=args.k,
        beta=args.beta,
        gamma=config.gamma,
        kmeans=args.kmeans,
        tree_mode=args.tree_mode,
        max_height=args.max_height,
        log_base=_log_base(args),
        seed=args.seed,
        strategy=config.strategy,
        threads=args.threads,
    )
    io.write_selection(result, args.out, args.report)
    print(json.dumps(io.selection_report_dict(result), sort_keys=True))
    return 0


def cmd_score(args) -> int:
    emb = io.read_embeddings(args.embeddings)
    n = emb.shape[0]
    difficulty = _load_difficulty(args, n)
    graph, tree, scores = pipeline.compute_scores(
        emb,
        difficulty,
        k=args.k,
        tree_mode=args.tree_mode,
        max_height=args.max_height,
        log_base=_log_base(args),
        threads=args.threads,
        with_phi=True,
    )
    io.write_score_csv(args.out, scores.s_e, scores.phi, scores.s_t, scores.s)
    from .entropy import graph_entropy_edge_sum

    footer = {
        "n": n,
        "k": args.k if args.k is not None else pipeline.default_k(n),
        "graph_entropy": graph_entropy_edge_sum(graph, tree, base=_log_base(args)),
        "phi_total": float(scores.phi.sum()),
    }
    print(json.dumps(footer, sort_keys=True))
    return 0


def cmd_bench_coverage(args) -> int:
    spec = GmmSpec(
        classes=args.classes,
        per_class=args.per_class,
        dim=args.dim,
        seed=args.seed,
    )
    report = run_coverage_check(spec, k=args.k, r=args.radius, threads=args.threads)
    if args.out:
        report.write_json(args.out)
    if args.csv:
        report.write_csv(args.csv)
    print(json.dumps(report.summary(), sort_keys=True))
    return 0


def cmd_replay_sim(args) -> int:
    rng = np.random.default_rng(args.seed)
    mode = args.mode.replace("-", "_")
    mem = ReplayMemory(capacity=args.capacity, mode=mode, slot_count=args.slot_count)
    checks = []
    if mode == "per_task":
        for t in range(args.tasks):
            centers = rng.standard_normal((args.classes, args.dim))
            labels = rng.integers(0, args.classes, args.samples_per_task)
            emb = centers[labels] + rng.standard_normal((args.samples_per_task, args.dim))
            difficulty = np.linalg.norm(emb - centers[labels], axis=1)
            ids = np.arange(args.samples_per_task) + t * args.samples_per_task
            update_per_task(mem, t, emb, difficulty, ids=ids, seed=args.seed)
            sizes = [store.ids.size for store in mem.tasks]
            assert mem.size() <= args.capacity
            assert max(sizes) - min(sizes) <= 1
            checks.append({"task": t, "sizes": sizes})
    else:
        for b in range(args.batches):
            emb = rng.standard_normal((args.batch_size, args.dim))
            difficulty = rng.uniform(size=args.batch_size)
            update_merge_reduce(mem, emb, difficulty, seed=args.seed)
            assert mem.size() <= args.capacity
            assert mem.represented_total() == mem.streamed
            checks.append(
                {"batch": b, "represented": [s.represented for s in mem.slots]}
            )
    if args.out:
        snapshot_json(mem, args.out)
    print(
        json.dumps(
            {
                "mode": mode,
                "size": mem.size(),
                "streamed": mem.streamed,
                "updates": len(checks),
                "warnings": mem.warnings,
            },
            sort_keys=True,
        )
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sesel",
        description="Structural-entropy sample selection",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("select", help="select a budgeted subset of samples")
    _add_common_select_flags(p)
    p.add_argument("--labels", help="label CSV (index,value) for class caps")
    p.add_argument("--rate", type=float, default=None, help="selection fraction in (0, 1]")
    p.add_argument("--budget", type=int, default=None, help="explicit sample budget")
    p.add_argument("--beta", type=float, default=0.0, help="difficulty cutoff ratio in [-1, 1]")
    p.add_argument("--gamma", type=float, default=None, help="class imbalance cap factor >= 1")
    p.add_argument("--kmeans", type=int, default=None, metavar="C", help="cluster count for label-free caps")
    p.add_argument("--strategy", choices=["blue-noise", "top-score"], default="blue-noise")
    p.add_argument("--out", required=True, help="output index file")
    p.add_argument("--report", required=True, help="output JSON report")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("score", help="emit per-sample scores as CSV")
    _add_common_select_flags(p)
    p.add_argument("--out", required=True, help="output CSV (index,s_e,phi,s_t,s)")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("bench-coverage", help="coverage lower-bound benchmark on a synthetic mixture")
    p.add_argument("--classes", type=int, default=10)
    p.add_argument("--per-class", type=int, default=500)
    p.add_argument("--dim", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--radius", type=float, default=None)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", help="summary JSON path")
    p.add_argument("--csv", help="per-sample ratio CSV path")
    p.set_defaults(func=cmd_bench_coverage)

    p = sub.add_parser("replay-sim", help="stream synthetic tasks through a replay memory")
    p.add_argument("--mode", choices=["per-task", "merge-reduce"], default="per-task")
    p.add_argument("--capacity", type=int, default=100)
    p.add_argument("--tasks", type=int, default=5)
    p.add_argument("--samples-per-task", type=int, default=500)
    p.add_argument("--batches", type=int, default=64)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--classes", type=int, default=5)
    p.add_argument("--dim", type=int, default=8)
    p.add_argument("--slot-count", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="memory snapshot JSON path")
    p.set_defaults(func=cmd_replay_sim)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SeselError as exc:
        print(f"error: {exc.name}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())

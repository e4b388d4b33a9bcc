"""Fixed-size replay memories for continual learning, filled by the selector.

Two update disciplines:

* per-task: capacity is split evenly across all tasks seen so far; earlier
  tasks shrink to their new quota by keeping their highest-scoring entries,
  and the incoming task contributes its quota through a fresh selection run.
* merge-reduce (task-free): the memory is divided into equally sized slots;
  each incoming batch fills a free slot with selected representatives, and
  when no slot is free the two slots representing equally many original
  samples are merged by re-selecting from their union.  Slots representing
  equal counts always exist for equal-size batch streams (binary-counter
  argument); for unequal streams the closest pair is merged and flagged.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import CapacityTooSmall, NoMergeablePair, UsageError
from .graph import build_knn_graph, default_k
from .sampler import SelectionConfig, select_samples
from .scoring import combine_scores, difficulty_cutoff_mask, minmax_normalize
from .tree import TreeBuildConfig, build_tree
from .entropy import node_structural_entropy


def ses_task_selector(emb: np.ndarray, difficulty, budget: int, seed: int = 0):
    """Default selector: full scoring pipeline plus blue-noise sampling.

    Returns (local indices, combined scores for those indices).
    """
    emb = np.asarray(emb, dtype=np.float64)
    n = emb.shape[0]
    if budget >= n:
        scores = np.ones(n)
        return np.arange(n, dtype=np.int64), scores
    graph = build_knn_graph(emb, default_k(n))
    tree = build_tree(graph, TreeBuildConfig())
    s_e = node_structural_entropy(graph, tree)
    s_t = np.ones(n) if difficulty is None else np.asarray(difficulty, dtype=np.float64)
    s = combine_scores(minmax_normalize(s_e), minmax_normalize(s_t))
    mask = difficulty_cutoff_mask(s_t, 0.0)
    result = select_samples(s, mask, graph, SelectionConfig(budget=budget, seed=seed))
    return result.indices, s[result.indices]


@dataclass
class TaskStore:
    task_id: int
    ids: np.ndarray
    scores: np.ndarray


@dataclass
class Slot:
    ids: np.ndarray
    emb: np.ndarray
    difficulty: np.ndarray
    scores: np.ndarray
    represented: int


@dataclass
class ReplayMemory:
    capacity: int
    mode: str = "per_task"  # or "merge_reduce"
    slot_count: int = 10
    tasks: list = field(default_factory=list)
    slots: list = field(default_factory=list)
    streamed: int = 0
    warnings: list = field(default_factory=list)

    def __post_init__(self):
        if self.capacity < 1:
            raise CapacityTooSmall("capacity must be >= 1")
        if self.mode not in ("per_task", "merge_reduce"):
            raise UsageError(f"unknown replay mode {self.mode!r}")
        if self.mode == "merge_reduce" and self.capacity < self.slot_count:
            raise CapacityTooSmall(
                f"capacity {self.capacity} below slot count {self.slot_count}"
            )

    @property
    def slot_size(self) -> int:
        return self.capacity // self.slot_count

    def size(self) -> int:
        if self.mode == "per_task":
            return sum(t.ids.size for t in self.tasks)
        return sum(s.ids.size for s in self.slots)

    def entries(self) -> list[tuple[int, int, float]]:
        """(sample id, task id, stored score) triplets."""
        out = []
        if self.mode == "per_task":
            for t in self.tasks:
                out += [
                    (int(i), t.task_id, float(sc))
                    for i, sc in zip(t.ids.tolist(), t.scores.tolist())
                ]
        else:
            for si, s in enumerate(self.slots):
                out += [
                    (int(i), si, float(sc))
                    for i, sc in zip(s.ids.tolist(), s.scores.tolist())
                ]
        return out

    def represented_total(self) -> int:
        return sum(s.represented for s in self.slots)


def _quotas(capacity: int, tasks: int) -> list[int]:
    base = capacity // tasks
    extra = capacity % tasks
    return [base + 1 if i < extra else base for i in range(tasks)]


def _keep_top(store: TaskStore, quota: int) -> TaskStore:
    if store.ids.size <= quota:
        return store
    order = np.lexsort((store.ids, -store.scores))[:quota]
    keep = np.sort(order)
    return TaskStore(store.task_id, store.ids[keep], store.scores[keep])


def update_per_task(
    mem: ReplayMemory,
    task_id: int,
    emb: np.ndarray,
    difficulty=None,
    ids=None,
    selector=ses_task_selector,
    seed: int = 0,
) -> ReplayMemory:
    """Even split of the capacity over all tasks seen so far."""
    if mem.mode != "per_task":
        raise UsageError("memory is not in per-task mode")
    emb = np.asarray(emb, dtype=np.float64)
    n = emb.shape[0]
    ids = np.arange(n, dtype=np.int64) if ids is None else np.asarray(ids, dtype=np.int64)
    t = len(mem.tasks) + 1
    if mem.capacity < t:
        raise CapacityTooSmall(f"capacity {mem.capacity} below task count {t}")
    quotas = _quotas(mem.capacity, t)
    mem.tasks = [_keep_top(store, q) for store, q in zip(mem.tasks, quotas[:-1])]
    budget = min(quotas[-1], n)
    local, scores = selector(emb, difficulty, budget, seed)
    mem.tasks.append(TaskStore(task_id, ids[local], np.asarray(scores, dtype=np.float64)))
    mem.streamed += n
    return mem


def _select_slot(emb, difficulty, ids, budget, selector, seed):
    local, scores = selector(emb, difficulty, budget, seed)
    return (
        ids[local],
        emb[local],
        difficulty[local],
        np.asarray(scores, dtype=np.float64),
    )


def _merge_pair(slots: list[Slot], warnings: list[str]) -> tuple[int, int]:
    """Pick two slots to merge: equal represented counts first (smallest,
    oldest), otherwise the closest counts with a warning."""
    counts = [s.represented for s in slots]
    by_count: dict[int, list[int]] = {}
    for i, c in enumerate(counts):
        by_count.setdefault(c, []).append(i)
    equal = sorted(c for c, idxs in by_count.items() if len(idxs) >= 2)
    if equal:
        a, b = by_count[equal[0]][:2]
        return a, b
    if len(slots) < 2:
        raise NoMergeablePair("fewer than two slots to merge")
    order = sorted(range(len(slots)), key=lambda i: (counts[i], i))
    best = None
    for x, y in zip(order, order[1:]):
        gap = abs(counts[x] - counts[y])
        cand = (gap, min(counts[x], counts[y]), min(x, y), max(x, y))
        if best is None or cand < best:
            best = cand
    warnings.append(f"unequal_merge:{best[2]}+{best[3]}")
    return best[2], best[3]


def update_merge_reduce(
    mem: ReplayMemory,
    emb: np.ndarray,
    difficulty=None,
    ids=None,
    selector=ses_task_selector,
    seed: int = 0,
) -> ReplayMemory:
    """Task-free update: fill a free slot, merging two equal slots if needed."""
    if mem.mode != "merge_reduce":
        raise UsageError("memory is not in merge-reduce mode")
    emb = np.asarray(emb, dtype=np.float64)
    n = emb.shape[0]
    if ids is None:
        ids = np.arange(mem.streamed, mem.streamed + n, dtype=np.int64)
    else:
        ids = np.asarray(ids, dtype=np.int64)
    difficulty = (
        np.ones(n) if difficulty is None else np.asarray(difficulty, dtype=np.float64)
    )
    size = mem.slot_size
    if size < 1:
        raise CapacityTooSmall("slot size is zero")

    if len(mem.slots) >= mem.slot_count:
        ia, ib = _merge_pair(mem.slots, mem.warnings)
        a, b = mem.slots[ia], mem.slots[ib]
        union_ids = np.concatenate([a.ids, b.ids])
        union_emb = np.concatenate([a.emb, b.emb])
        union_diff = np.concatenate([a.difficulty, b.difficulty])
        sid, semb, sdiff, sscores = _select_slot(
            union_emb, union_diff, union_ids, min(size, union_ids.size), selector, seed
        )
        merged = Slot(sid, semb, sdiff, sscores, a.represented + b.represented)
        mem.slots = [s for i, s in enumerate(mem.slots) if i not in (ia, ib)]
        mem.slots.insert(min(ia, ib), merged)

    sid, semb, sdiff, sscores = _select_slot(
        emb, difficulty, ids, min(size, n), selector, seed
    )
    mem.slots.append(Slot(sid, semb, sdiff, sscores, n))
    mem.streamed += n
    return mem


def snapshot_json(mem: ReplayMemory, path=None) -> str:
    state = {
        "capacity": mem.capacity,
        "mode": mem.mode,
        "size": mem.size(),
        "streamed": mem.streamed,
        "warnings": list(mem.warnings),
        "entries": [
            {"sample_id": sid, "task_id": tid, "score": sc}
            for sid, tid, sc in mem.entries()
        ],
    }
    if mem.mode == "merge_reduce":
        state["slots"] = [
            {"members": s.ids.tolist(), "represented": s.represented}
            for s in mem.slots
        ]
    text = json.dumps(state, indent=2)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text

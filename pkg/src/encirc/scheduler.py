"""Deterministic worker pool for batched gate jobs and tree reductions.

Batches submitted here are split into launches of at most max_batch jobs;
each launch is handed to the owning engine's kernel, which may fan work
out over the pool's threads in fixed-size blocks. All randomness is derived
from (engine seed, launch index, block index), never from worker-local
state, so results are bit-identical for any worker count.
"""

from __future__ import annotations

import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

DEFAULT_MAX_BATCH = 4096

# Sub-launch granularity for worker fan-out. Fixed: block boundaries must
# never depend on the worker count or determinism across pools breaks.
PARALLEL_BLOCK = 256

ENV_WORKERS = "WORKERS"
ENV_MAX_BATCH = "MAX_BATCH"


def _default_workers() -> int:
    return os.cpu_count() or 1


@dataclass
class PoolConfig:
    """workers defaults to the machine core count, max_batch to 4096."""

    workers: int = field(default_factory=_default_workers)
    max_batch: int = DEFAULT_MAX_BATCH

    def __post_init__(self) -> None:
        if self.workers < 1:
            raise ValueError(f"workers={self.workers} must be >= 1")
        if self.max_batch < 1:
            raise ValueError(f"max_batch={self.max_batch} must be >= 1")

    @classmethod
    def from_env(cls, workers: int | None = None, max_batch: int | None = None) -> "PoolConfig":
        """Explicit arguments win over WORKERS / MAX_BATCH environment
        variables, which win over the defaults."""
        if workers is None and ENV_WORKERS in os.environ:
            workers = _env_int(ENV_WORKERS)
        if max_batch is None and ENV_MAX_BATCH in os.environ:
            max_batch = _env_int(ENV_MAX_BATCH)
        kwargs = {}
        if workers is not None:
            kwargs["workers"] = workers
        if max_batch is not None:
            kwargs["max_batch"] = max_batch
        return cls(**kwargs)


def _env_int(name: str) -> int:
    raw = os.environ[name]
    try:
        return int(raw)
    except ValueError as exc:
        raise ValueError(f"environment variable {name}={raw!r} is not an integer") from exc


class JobBatch:
    """A sequence of independent gate jobs: kind + input handles + output slot.

    Jobs read only pre-existing handles and write only their own slot, so
    independence is structural; the representable violation, two jobs
    claiming one output slot, is rejected at construction.
    """

    __slots__ = ("kinds", "xs", "ys", "slots")

    def __init__(self, kinds, xs, ys, slots=None):
        kinds = tuple(kinds)
        xs = tuple(xs)
        ys = tuple(ys)
        k = len(kinds)
        if k == 0:
            raise ValueError("a job batch needs at least one job")
        if len(xs) != k or len(ys) != k:
            raise ValueError("kinds, xs and ys must have equal lengths")
        if slots is None:
            slots = tuple(range(k))
        else:
            slots = tuple(int(s) for s in slots)
            if len(slots) != k:
                raise ValueError("one output slot per job required")
            if len(set(slots)) != k:
                raise ValueError("dependency violation: duplicate output slot")
            if any(s < 0 or s >= k for s in slots):
                raise ValueError("output slots must lie in [0, job count)")
        self.kinds = kinds
        self.xs = xs
        self.ys = ys
        self.slots = slots

    def __len__(self) -> int:
        return len(self.kinds)


class WorkerPool:
    """Thread pool with deterministic launch splitting and tree reduction."""

    def __init__(self, config: PoolConfig | None = None):
        self.config = config if config is not None else PoolConfig.from_env()
        self._executor: ThreadPoolExecutor | None = None
        self._worker_idents: set[int] = set()
        self._last_levels = 0

    @property
    def workers(self) -> int:
        return self.config.workers

    @property
    def max_batch(self) -> int:
        return self.config.max_batch

    def set_workers(self, workers: int) -> None:
        if workers < 1:
            raise ValueError(f"workers={workers} must be >= 1")
        if workers != self.config.workers:
            self.shutdown()
            self.config = PoolConfig(workers=workers, max_batch=self.config.max_batch)

    def shutdown(self) -> None:
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None
            self._worker_idents = set()

    def __del__(self):
        try:
            self.shutdown()
        except Exception:
            pass

    def _forbid_reentry(self) -> None:
        if threading.get_ident() in self._worker_idents:
            raise RuntimeError("reentrant submission from inside a pool job is forbidden")

    def _get_executor(self) -> ThreadPoolExecutor:
        if self._executor is None:
            self._executor = ThreadPoolExecutor(
                max_workers=self.config.workers,
                thread_name_prefix="encirc-worker",
                initializer=lambda: self._worker_idents.add(threading.get_ident()),
            )
        return self._executor

    def execute_batch(self, batch: JobBatch, engine) -> list:
        """Run every job, in launches of at most max_batch, returning
        outputs ordered by slot. Larger batches become ceil(k / max_batch)
        sequential launches, each counted by the engine's stats."""
        self._forbid_reentry()
        k = len(batch)
        results: list = [None] * k
        mb = self.config.max_batch
        for lo in range(0, k, mb):
            hi = min(k, lo + mb)
            outs = engine.execute_launch(
                batch.kinds[lo:hi], batch.xs[lo:hi], batch.ys[lo:hi], self
            )
            for slot, out in zip(batch.slots[lo:hi], outs):
                results[slot] = out
        return results

    def run_blocks(self, fn: Callable[[int], object], n_blocks: int) -> list:
        """Map fn over block indices, in order. Serial when a single worker
        or block; otherwise fanned out over the pool threads. fn must not
        submit new batches (reentry is rejected)."""
        if n_blocks <= 1 or self.config.workers == 1:
            return [fn(i) for i in range(n_blocks)]
        return list(self._get_executor().map(fn, range(n_blocks)))

    def parallel_reduce(self, items: Sequence, combine=None, *, level_combine=None):
        """Pairwise tree reduction in ceil(log2(k)) levels.

        At each level adjacent pairs are combined and an odd trailing item
        passes through unchanged. `combine(left, right)` merges one pair;
        `level_combine(lefts, rights) -> merged` combines a whole level in
        one call, which is how gate-level circuits coalesce every pair of
        the level into shared launches. Equals a left fold for any
        associative, commutative combine.
        """
        self._forbid_reentry()
        items = list(items)
        if not items:
            raise ValueError("cannot reduce an empty sequence")
        if combine is None and level_combine is None:
            raise ValueError("need combine or level_combine")
        levels = 0
        while len(items) > 1:
            npairs = len(items) // 2
            lefts = items[0 : 2 * npairs : 2]
            rights = items[1 : 2 * npairs : 2]
            tail = items[2 * npairs :]
            if level_combine is not None:
                merged = list(level_combine(lefts, rights))
                if len(merged) != npairs:
                    raise ValueError("level_combine must return one item per pair")
            else:
                merged = [combine(l, r) for l, r in zip(lefts, rights)]
            items = merged + tail
            levels += 1
        self._last_levels = levels
        return items[0]

    def level_counter(self) -> int:
        """Levels executed by the most recent parallel_reduce."""
        return self._last_levels

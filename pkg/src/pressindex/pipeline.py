"""Map-reduce execution core with an elastically sized in-process worker pool.

Every data-intensive stage (crawl, preprocess, index build) runs through
this module. Workers are in-process threads, each playing the role of one
crawl/processing node. The scheduling policy: when a running task's current
attempt exceeds the configured timeout while other tasks are still pending,
one extra worker is started (up to the cap) and the next pending task goes
to it. The stalled task is never cancelled; its result is still collected.
"""

from __future__ import annotations

import threading
import time
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Hashable, Iterable, Sequence


class PipelineError(Exception):
    """Raised when a job cannot deliver its contract (e.g. reduce failure)."""


class TaskStatus(str, Enum):
    PENDING = "pending"
    RUNNING = "running"
    DONE = "done"
    FAILED = "failed"


@dataclass(frozen=True)
class JobConfig:
    """Worker-pool parameters for one job.

    ``initial_workers`` executors start immediately; stalls may grow the pool
    up to ``max_workers``. A task is retried after a raised exception until it
    has run ``max_retries + 1`` times.
    """

    initial_workers: int = 4
    max_workers: int = 8
    task_timeout_ms: float = 30_000.0
    max_retries: int = 2

    def __post_init__(self) -> None:
        if self.initial_workers < 1:
            raise ValueError("initial_workers must be >= 1")
        if self.max_workers < self.initial_workers:
            raise ValueError("max_workers must be >= initial_workers")
        if self.task_timeout_ms <= 0:
            raise ValueError("task_timeout_ms must be > 0")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")


@dataclass
class TaskRecord:
    """Lifecycle record of one input payload.

    ``elapsed`` is execution time in seconds summed over attempts; it never
    includes queue wait.
    """

    task_id: int
    payload_ref: Any
    status: TaskStatus = TaskStatus.PENDING
    attempts: int = 0
    elapsed: float = 0.0
    error: str | None = None
    _attempt_started: float | None = field(default=None, repr=False, compare=False)
    _scale_fired: bool = field(default=False, repr=False, compare=False)


@dataclass(frozen=True)
class ScaleEvent:
    """One scale decision: seconds since job start and the worker count after
    it. ``suppressed`` marks decisions blocked by the max_workers cap."""

    at: float
    workers: int
    suppressed: bool = False


@dataclass
class JobReport:
    per_task: list[TaskRecord]
    peak_workers: int
    wall_time: float
    scale_events: list[ScaleEvent]

    @property
    def done(self) -> list[TaskRecord]:
        return [t for t in self.per_task if t.status is TaskStatus.DONE]

    @property
    def failed(self) -> list[TaskRecord]:
        return [t for t in self.per_task if t.status is TaskStatus.FAILED]


def split_inputs(inputs: Sequence[Any] | Iterable[Any], n_partitions: int) -> list[list[Any]]:
    """Contiguous block split into ``n_partitions`` parts.

    Partitions are disjoint, cover all inputs, preserve input order, and
    differ in size by at most one; the remainder goes to the earliest
    partitions. An empty input yields ``n_partitions`` empty partitions.
    """
    if n_partitions < 1:
        raise ValueError("n_partitions must be >= 1")
    items = list(inputs)
    base, extra = divmod(len(items), n_partitions)
    parts: list[list[Any]] = []
    start = 0
    for i in range(n_partitions):
        size = base + (1 if i < extra else 0)
        parts.append(items[start : start + size])
        start += size
    return parts


def maybe_retry(task: TaskRecord, max_retries: int) -> bool:
    """Re-queue a transiently failed task or mark it terminally failed.

    ``attempts`` already counts the failed run; a task may run at most
    ``max_retries + 1`` times. Returns True when the task goes back to the
    queue.
    """
    if task.attempts <= max_retries:
        task.status = TaskStatus.PENDING
        return True
    task.status = TaskStatus.FAILED
    return False


class _ElasticPool:
    """One-shot pool executing ``fn`` over a list of payloads.

    All task state transitions happen under a single condition lock; worker
    threads pull task ids from a shared deque, so a newly spawned worker
    naturally picks up the next pending task.
    """

    def __init__(self, job: JobConfig, payloads: Sequence[Any], fn: Callable[[Any], Any]):
        self._job = job
        self._fn = fn
        self._records = [TaskRecord(i, p) for i, p in enumerate(payloads)]
        self._pending: deque[int] = deque(range(len(self._records)))
        self._cond = threading.Condition()
        self._results: dict[int, Any] = {}
        self._resolved = 0
        self._stop = False
        self._threads: list[threading.Thread] = []
        self._scale_events: list[ScaleEvent] = []
        self._started = 0.0

    def run(self) -> tuple[dict[int, Any], JobReport]:
        n = len(self._records)
        self._started = time.perf_counter()
        if n == 0:
            return {}, JobReport([], 0, 0.0, [])
        timeout_s = self._job.task_timeout_ms / 1000.0
        poll = max(0.001, min(0.01, timeout_s / 5.0))
        with self._cond:
            for _ in range(min(self._job.initial_workers, n)):
                self._spawn()
            while self._resolved < n:
                self._cond.wait(poll)
                self._check_stalls(timeout_s)
            self._stop = True
            self._cond.notify_all()
        for t in self._threads:
            t.join()
        wall = time.perf_counter() - self._started
        report = JobReport(self._records, len(self._threads), wall, self._scale_events)
        return dict(self._results), report

    def _spawn(self) -> None:
        t = threading.Thread(
            target=self._worker,
            name=f"pipeline-worker-{len(self._threads)}",
            daemon=True,
        )
        self._threads.append(t)
        t.start()

    def _check_stalls(self, timeout_s: float) -> None:
        # One scale decision per stalled task: the original policy is "start
        # one new node and hand it the next URL", not "keep adding nodes".
        if not self._pending:
            return
        now = time.perf_counter()
        for rec in self._records:
            if (
                rec.status is TaskStatus.RUNNING
                and not rec._scale_fired
                and rec._attempt_started is not None
                and now - rec._attempt_started > timeout_s
            ):
                rec._scale_fired = True
                at = now - self._started
                if len(self._threads) < self._job.max_workers:
                    self._spawn()
                    self._scale_events.append(ScaleEvent(at, len(self._threads)))
                else:
                    self._scale_events.append(
                        ScaleEvent(at, len(self._threads), suppressed=True)
                    )
                if not self._pending:
                    return

    def _worker(self) -> None:
        while True:
            with self._cond:
                while not self._pending and not self._stop:
                    self._cond.wait(0.01)
                if not self._pending and self._stop:
                    return
                task_id = self._pending.popleft()
                rec = self._records[task_id]
                rec.status = TaskStatus.RUNNING
                rec.attempts += 1
                rec._attempt_started = time.perf_counter()
                payload = rec.payload_ref
            try:
                result = self._fn(payload)
            except Exception as exc:  # noqa: BLE001 - task isolation boundary
                with self._cond:
                    rec.elapsed += time.perf_counter() - rec._attempt_started
                    rec._attempt_started = None
                    rec.error = f"{type(exc).__name__}: {exc}"
                    if maybe_retry(rec, self._job.max_retries):
                        self._pending.append(rec.task_id)
                    else:
                        self._resolved += 1
                    self._cond.notify_all()
            else:
                with self._cond:
                    rec.elapsed += time.perf_counter() - rec._attempt_started
                    rec._attempt_started = None
                    rec.status = TaskStatus.DONE
                    rec.error = None
                    self._results[rec.task_id] = result
                    self._resolved += 1
                    self._cond.notify_all()


def run_tasks(
    job: JobConfig, payloads: Sequence[Any], fn: Callable[[Any], Any]
) -> tuple[dict[int, Any], JobReport]:
    """Execute ``fn`` over payloads on an elastic pool.

    Returns results keyed by task id (input position) plus the JobReport.
    Tasks that exhaust their retries are absent from the results and appear
    as failed in the report.
    """
    return _ElasticPool(job, payloads, fn).run()


def run_map_reduce(
    job: JobConfig,
    inputs: Sequence[Any],
    map_fn: Callable[[Any], Iterable[tuple[Hashable, Any]]],
    reduce_fn: Callable[[Hashable, list[Any]], Any],
    partition_fn: Callable[[Hashable], int] | None = None,
) -> tuple[dict[Hashable, Any], JobReport]:
    """Group map emissions by key, then reduce each key group.

    Emissions are merged in task-id (input) order regardless of completion
    order, so the output equals the sequential evaluation for any worker
    count. The reduce phase starts only after every map task resolved; with a
    ``partition_fn`` key groups are reduced in parallel per partition,
    otherwise sequentially. Map failures surface in the report; the job still
    completes with partial outputs.
    """
    results, report = run_tasks(job, inputs, map_fn)
    grouped: dict[Hashable, list[Any]] = {}
    for task_id in sorted(results):
        for key, value in results[task_id]:
            grouped.setdefault(key, []).append(value)

    outputs: dict[Hashable, Any] = {}
    if partition_fn is None:
        for key, values in grouped.items():
            outputs[key] = reduce_fn(key, values)
        return outputs, report

    partitions: dict[int, list[Hashable]] = {}
    for key in grouped:
        partitions.setdefault(partition_fn(key), []).append(key)

    def reduce_partition(keys: list[Hashable]) -> list[tuple[Hashable, Any]]:
        return [(k, reduce_fn(k, grouped[k])) for k in keys]

    ordered = [partitions[pid] for pid in sorted(partitions)]
    part_results, part_report = run_tasks(job, ordered, reduce_partition)
    if part_report.failed:
        errors = "; ".join(t.error or "?" for t in part_report.failed)
        raise PipelineError(f"reduce phase failed: {errors}")
    for i in sorted(part_results):
        for key, value in part_results[i]:
            outputs[key] = value
    return outputs, report

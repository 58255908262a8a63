"""Task-event log ingestion and empirical execution-time extraction.

The neutral event format is UTF-8 CSV with a mandatory header
``job_id,task_id,event,timestamp`` (timestamps in decimal seconds).
A task's execution time is FINISH minus SCHEDULE; with duplicates, the
first SCHEDULE and the last FINISH win. ``convert_google_task_events``
maps the public Google cluster-trace ``task_events`` table (which this
repository does not bundle) onto the same format.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError

__all__ = [
    "TaskEvent",
    "ParseResult",
    "parse_events",
    "ExecTimesResult",
    "exec_times",
    "tail_curve",
    "write_tail_curve_csv",
    "write_events_csv",
    "convert_google_task_events",
]

HEADER = ("job_id", "task_id", "event", "timestamp")
KNOWN_EVENTS = ("SCHEDULE", "FINISH")


@dataclass(frozen=True)
class TaskEvent:
    job_id: str
    task_id: str
    event: str  # SCHEDULE | FINISH | other (unknown labels preserved)
    timestamp: float


@dataclass(frozen=True)
class ParseResult:
    events: tuple
    errors: tuple  # (line_number, message) pairs; parsing never aborts on a row


def parse_events(stream) -> ParseResult:
    """Parse the event CSV from a text stream, file path or string."""
    if isinstance(stream, (str, Path)) and "\n" not in str(stream):
        fh = open(stream, newline="")
        close = True
    elif isinstance(stream, str):
        fh = io.StringIO(stream)
        close = False
    else:
        fh = stream
        close = False
    try:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DomainError("empty event stream; expected a header row")
        if tuple(h.strip() for h in header) != HEADER:
            raise DomainError(f"expected header {','.join(HEADER)}, got {','.join(header)}")
        events = []
        errors = []
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 4:
                errors.append((line_no, f"expected 4 columns, got {len(row)}"))
                continue
            job_id, task_id, event, ts_text = (cell.strip() for cell in row)
            try:
                ts = float(ts_text)
            except ValueError:
                errors.append((line_no, f"bad timestamp {ts_text!r}"))
                continue
            if ts < 0:
                errors.append((line_no, f"negative timestamp {ts}"))
                continue
            events.append(TaskEvent(job_id, task_id, event, ts))
        return ParseResult(tuple(events), tuple(errors))
    finally:
        if close:
            fh.close()


@dataclass(frozen=True)
class ExecTimesResult:
    times: tuple  # FINISH - SCHEDULE per completed task
    dropped: int  # tasks with a missing or inverted event pair
    drop_reasons: tuple  # ((job_id, task_id, reason), ...)


def exec_times(events: Iterable[TaskEvent], filter_k: int | None = None) -> ExecTimesResult:
    """Per-task execution times; optionally restricted to jobs with exactly
    ``filter_k`` tasks (task count = distinct task ids seen for the job)."""
    schedule: dict = {}
    finish: dict = {}
    job_tasks: dict = {}
    pairs_seen = set()
    for ev in events:
        key = (ev.job_id, ev.task_id)
        pairs_seen.add(key)
        job_tasks.setdefault(ev.job_id, set()).add(ev.task_id)
        if ev.event == "SCHEDULE":
            # first SCHEDULE wins
            if key not in schedule:
                schedule[key] = ev.timestamp
        elif ev.event == "FINISH":
            # last FINISH wins
            finish[key] = ev.timestamp
    times = []
    reasons = []
    for key in sorted(pairs_seen):
        if filter_k is not None and len(job_tasks[key[0]]) != filter_k:
            continue
        if key not in schedule:
            reasons.append((*key, "missing SCHEDULE"))
            continue
        if key not in finish:
            reasons.append((*key, "missing FINISH"))
            continue
        dt = finish[key] - schedule[key]
        if dt < 0:
            reasons.append((*key, "FINISH before SCHEDULE"))
            continue
        times.append(dt)
    return ExecTimesResult(tuple(times), len(reasons), tuple(reasons))


def tail_curve(samples: Sequence[float], grid: Sequence[float]) -> tuple:
    """Empirical survival Pr{X > t} at each grid point (step function)."""
    arr = np.sort(np.asarray(list(samples), dtype=float))
    if arr.size == 0:
        raise DomainError("tail_curve requires nonempty samples")
    pts = [float(t) for t in grid]
    if any(b <= a for a, b in zip(pts, pts[1:])):
        raise DomainError("grid must be strictly increasing")
    out = []
    for t in pts:
        pos = np.searchsorted(arr, t, side="right")
        out.append((t, float(arr.size - pos) / arr.size))
    return tuple(out)


def write_tail_curve_csv(curve, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "survival"])
        for t, p in curve:
            writer.writerow([repr(t), repr(p)])


def write_events_csv(events: Iterable[TaskEvent], path) -> None:
    """Write events in the neutral CSV format (round-trips with parse_events)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(HEADER)
        for ev in events:
            writer.writerow([ev.job_id, ev.task_id, ev.event, repr(ev.timestamp)])


# Google cluster-trace task_events column layout (v2 schema):
# 0 timestamp (microseconds), 2 job ID, 3 task index, 5 event type.
_GOOGLE_EVENT_CODES = {1: "SCHEDULE", 4: "FINISH"}
_MICROSECONDS = 1e6


def convert_google_task_events(in_paths: Sequence, out_path) -> int:
    """Convert public Google cluster-trace task_events CSV shards into the
    neutral event format (SCHEDULE/FINISH rows only). Returns rows written.

    The dataset itself is not distributed with this package; point this at
    locally downloaded ``task_events/part-*.csv`` shards.
    """
    written = 0
    with open(out_path, "w", newline="") as out:
        writer = csv.writer(out)
        writer.writerow(HEADER)
        for in_path in in_paths:
            with open(in_path, newline="") as fh:
                for row in csv.reader(fh):
                    if len(row) < 6:
                        continue
                    try:
                        code = int(row[5])
                        ts = int(row[0]) / _MICROSECONDS
                    except ValueError:
                        continue
                    label = _GOOGLE_EVENT_CODES.get(code)
                    if label is None:
                        continue
                    writer.writerow([row[2], row[3], label, repr(ts)])
                    written += 1
    return written

"""Activity instance logs: parsing, validation and temporal partitioning.

An activity instance log is a set of records (case id, activity, start, end)
where the end timestamp may be missing for instances that are still running.
Timestamps are integers (seconds since epoch); all duration arithmetic is
integer arithmetic.

The canonical on-disk format is CSV with header ``case_id,activity,start,end``.
Timestamps are either ISO-8601 (``2024-01-01T08:00:00Z``) or plain integer
seconds; the format is auto-detected per file and preserved on write.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterable, Iterator, Optional

from .errors import LogParseError, LogValidationError

Timestamp = int

CSV_HEADER = ("case_id", "activity", "start", "end")


def parse_timestamp(text: str, time_format: str) -> Timestamp:
    if time_format == "epoch":
        return int(text)
    # ISO-8601; Python 3.10's fromisoformat does not accept a trailing Z
    raw = text.strip()
    if raw.endswith("Z"):
        raw = raw[:-1] + "+00:00"
    dt = datetime.fromisoformat(raw)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp())


def format_timestamp(ts: Timestamp, time_format: str) -> str:
    if time_format == "epoch":
        return str(ts)
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True)
class ActivityInstance:
    """One record of the log.  ``end`` is None while the instance is running."""

    case_id: str
    activity: str
    start: Timestamp
    end: Optional[Timestamp]

    def __post_init__(self):
        if self.start is None:
            raise LogValidationError(f"case {self.case_id}: start timestamp is required")
        if self.end is not None and self.end < self.start:
            raise LogValidationError(
                f"case {self.case_id}, activity {self.activity!r}: "
                f"end {self.end} < start {self.start}"
            )


@dataclass(frozen=True)
class Trace:
    """All instances of one case, sorted ascending by start (stable for ties)."""

    case_id: str
    instances: tuple[ActivityInstance, ...]

    def __len__(self) -> int:
        return len(self.instances)

    @property
    def last(self) -> ActivityInstance:
        return self.instances[-1]


@dataclass(frozen=True)
class ActivityInstanceLog:
    """Traces keyed by case id; iteration order is first-appearance order."""

    traces: dict[str, Trace]
    time_format: str = "iso"

    def __iter__(self) -> Iterator[Trace]:
        return iter(self.traces.values())

    def __len__(self) -> int:
        return len(self.traces)

    def instances(self) -> Iterator[ActivityInstance]:
        for trace in self.traces.values():
            yield from trace.instances

    @property
    def activity_vocab_raw(self) -> set[str]:
        return {inst.activity for inst in self.instances()}


@dataclass(frozen=True)
class CutoffSplit:
    train: ActivityInstanceLog
    test: ActivityInstanceLog
    cutoff: Timestamp


def build_log(
    instances: Iterable[ActivityInstance], time_format: str = "iso"
) -> ActivityInstanceLog:
    """Group instances into traces, sorting each trace by start (stable)."""
    grouped: dict[str, list[ActivityInstance]] = {}
    for inst in instances:
        grouped.setdefault(inst.case_id, []).append(inst)
    traces = {
        cid: Trace(cid, tuple(sorted(rows, key=lambda r: r.start)))
        for cid, rows in grouped.items()
    }
    return ActivityInstanceLog(traces=traces, time_format=time_format)


def _looks_like_epoch(value: str) -> bool:
    v = value.strip()
    return bool(v) and (v.isdigit() or (v.startswith("-") and v[1:].isdigit()))


def parse_log(source) -> ActivityInstanceLog:
    """Parse a CSV activity instance log from a path or an open text stream.

    Raises LogParseError for structural problems (header, timestamps) with the
    offending row number, and LogValidationError for semantic ones.
    """
    if isinstance(source, (str,)) or hasattr(source, "__fspath__"):
        with open(source, newline="", encoding="utf-8") as fh:
            return parse_log(fh)
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise LogParseError("missing header row") from None
    header = [h.strip() for h in header]
    if tuple(header[:4]) != CSV_HEADER:
        raise LogParseError(
            f"expected header {','.join(CSV_HEADER)!r}, got {','.join(header)!r}"
        )

    rows = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not f.strip() for f in row):
            continue
        if len(row) < 4:
            raise LogParseError(f"row {lineno}: expected 4 fields, got {len(row)}")
        rows.append((lineno, row))
    if not rows:
        raise LogValidationError("empty log")

    # auto-detect the timestamp format from the first data row
    time_format = "epoch" if _looks_like_epoch(rows[0][1][2]) else "iso"

    instances = []
    for lineno, (case_id, activity, start_s, end_s) in (
        (lineno, row[:4]) for lineno, row in rows
    ):
        if not start_s.strip():
            raise LogValidationError(f"row {lineno}: start timestamp is required")
        try:
            start = parse_timestamp(start_s, time_format)
            end = parse_timestamp(end_s, time_format) if end_s.strip() else None
        except (ValueError, OverflowError) as exc:
            raise LogParseError(f"row {lineno}: malformed timestamp: {exc}") from exc
        try:
            instances.append(ActivityInstance(case_id, activity, start, end))
        except LogValidationError as exc:
            raise LogValidationError(f"row {lineno}: {exc}") from exc
    return build_log(instances, time_format=time_format)


def serialize_log(log: ActivityInstanceLog, target=None) -> Optional[str]:
    """Write a log back to CSV (path, stream, or returned as a string)."""
    if target is None:
        buf = io.StringIO()
        serialize_log(log, buf)
        return buf.getvalue()
    if isinstance(target, str) or hasattr(target, "__fspath__"):
        with open(target, "w", newline="", encoding="utf-8") as fh:
            serialize_log(log, fh)
        return None
    writer = csv.writer(target)
    writer.writerow(CSV_HEADER)
    for inst in log.instances():
        writer.writerow(
            [
                inst.case_id,
                inst.activity,
                format_timestamp(inst.start, log.time_format),
                "" if inst.end is None else format_timestamp(inst.end, log.time_format),
            ]
        )
    return None


def log_duration(log: ActivityInstanceLog) -> int:
    """Seconds between the earliest start and the latest non-null end."""
    if not log.traces:
        raise LogValidationError("empty log")
    starts = [inst.start for inst in log.instances()]
    ends = [inst.end for inst in log.instances() if inst.end is not None]
    if not ends:
        raise LogValidationError("no completed instance")
    return max(ends) - min(starts)


def cutoff_at_fraction(log: ActivityInstanceLog, fraction: float) -> Timestamp:
    """Timestamp at which the given fraction of the log duration has elapsed."""
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction must be in (0, 1), got {fraction}")
    min_start = min(inst.start for inst in log.instances())
    return min_start + math.floor(fraction * log_duration(log))


def extract_training_log(
    log: ActivityInstanceLog, cutoff: Timestamp
) -> ActivityInstanceLog:
    """Traces whose every instance has a non-null end <= cutoff."""
    kept = {
        cid: trace
        for cid, trace in log.traces.items()
        if all(inst.end is not None and inst.end <= cutoff for inst in trace.instances)
    }
    if not kept:
        raise LogValidationError("no complete training traces before cutoff")
    return ActivityInstanceLog(traces=kept, time_format=log.time_format)


def extract_test_log(log: ActivityInstanceLog, cutoff: Timestamp) -> ActivityInstanceLog:
    """Censor the log at the cutoff.

    Instances starting after the cutoff are dropped; instances still running
    at the cutoff get their end set to None; traces left empty are removed.
    """
    kept: dict[str, Trace] = {}
    for cid, trace in log.traces.items():
        rows = []
        for inst in trace.instances:
            if inst.start > cutoff:
                continue
            if inst.end is not None and inst.end > cutoff:
                inst = ActivityInstance(inst.case_id, inst.activity, inst.start, None)
            rows.append(inst)
        if rows:
            kept[cid] = Trace(cid, tuple(rows))
    return ActivityInstanceLog(traces=kept, time_format=log.time_format)


def temporal_split(log: ActivityInstanceLog, fraction: float = 0.8) -> CutoffSplit:
    cutoff = cutoff_at_fraction(log, fraction)
    return CutoffSplit(
        train=extract_training_log(log, cutoff),
        test=extract_test_log(log, cutoff),
        cutoff=cutoff,
    )


def prefix_at(
    log_prime: ActivityInstanceLog, t_sweep: Timestamp, eot_label: str = "EOT"
) -> list[Trace]:
    """Traces eligible for extension at the sweep cursor.

    Eligibility rule (an interpretation; the source algorithm leaves the
    prefix-selection predicate implicit): the trace's last instance has
    started by t_sweep and the trace has not been closed with the
    end-of-trace label.
    """
    return [
        trace
        for trace in log_prime
        if trace.instances
        and trace.last.start <= t_sweep
        and trace.last.activity != eot_label
    ]

"""Lockstep suffix prediction: the sweep-line engine.

A global time cursor starts at the cutoff.  At every iteration, all cases
whose last instance has started by the cursor are processed together: their
still-open instances are first closed with a predicted processing time, then
each case is extended by one predicted instance (next activity, inter-start
time, processing time).  The cursor then advances to the smallest predicted
start strictly ahead of it, so that the workload features each case sees
include the predicted instances of every other case.

Every emitted instance carries a provenance flag: ``observed`` (from the
censored log), ``completed`` (open at the cutoff, end filled in by the
processing-time model) or ``predicted``.
"""

from __future__ import annotations

import csv
import heapq
import io
import math
import time
from dataclasses import dataclass, field
from typing import Optional

from .errors import SuffixSweepError
from .event_log import (
    ActivityInstance,
    ActivityInstanceLog,
    Timestamp,
    build_log,
    format_timestamp,
    parse_timestamp,
)
from .features import LambdaWindow, WorkloadIndex
from .predictors import Query, SamplingStrategy

PROV_OBSERVED = "observed"
PROV_COMPLETED = "completed_by_gamma"
PROV_PREDICTED = "predicted"

PREDICTED_CSV_HEADER = (
    "case_id",
    "activity",
    "start",
    "end",
    "delta_start",
    "delta_proc",
    "provenance",
)


@dataclass(frozen=True)
class PredictedRecord:
    case_id: str
    activity: str
    start: Timestamp
    end: Optional[Timestamp]
    delta_start: int
    delta_proc: Optional[int]
    provenance: str


@dataclass
class SweepConfig:
    """Engine knobs; unset fields default from the model bundle."""

    max_suffix_len: Optional[int] = None  # per-case cap on predicted instances
    global_step_cap: Optional[int] = None  # total predicted instances cap
    strategy: SamplingStrategy = field(default_factory=SamplingStrategy)
    tau: Optional[int] = None  # arrival-rate window, frozen from training


@dataclass
class SweepResult:
    log: ActivityInstanceLog  # completed log (failed cases excluded)
    records: list[PredictedRecord]
    suffixes: dict[str, list[PredictedRecord]]
    report: dict


class _Row:
    __slots__ = ("activity", "index", "start", "end", "delta_start", "delta_proc", "provenance")

    def __init__(self, activity, index, start, end, delta_start, delta_proc, provenance):
        self.activity = activity
        self.index = index
        self.start = start
        self.end = end
        self.delta_start = delta_start
        self.delta_proc = delta_proc
        self.provenance = provenance


def _clamp_duration(value: float, warnings: dict) -> int:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        warnings["nan_durations"] = warnings.get("nan_durations", 0) + 1
        return 0
    if value < 0:
        warnings["negative_durations"] = warnings.get("negative_durations", 0) + 1
        return 0
    return int(round(value))


class _SweepEngine:
    def __init__(self, log_prime: ActivityInstanceLog, bundle, config: SweepConfig):
        self.bundle = bundle
        self.vocab = bundle.vocab
        self.encode = self.vocab.to_index_map()
        self.n = bundle.ngram
        self.strategy = config.strategy
        tau = config.tau if config.tau is not None else getattr(bundle, "tau", None)
        if tau is None:
            # no frozen training window available: fall back to 20% of the
            # censored log's observed span
            starts = [inst.start for inst in log_prime.instances()]
            tau = max(1, int(0.2 * (max(starts) - min(starts)))) if starts else 1
        self.tau = LambdaWindow(tau=int(tau))
        if config.max_suffix_len is not None:
            self.max_suffix_len = config.max_suffix_len
        else:
            base = getattr(bundle, "max_trace_len", 0) or 1
            self.max_suffix_len = math.ceil(1.5 * base)
        total_at_cutoff = sum(len(t) for t in log_prime)
        self.global_cap = (
            config.global_step_cap
            if config.global_step_cap is not None
            else max(1, 10 * total_at_cutoff)
        )

        self.index = WorkloadIndex(log_prime)  # bulk load; kept in sync below
        self.cases: dict[str, list[_Row]] = {}
        self.case_encoded: dict[str, list[int]] = {}
        self.last_start: dict[str, int] = {}
        self.terminated: set[str] = set()
        self.forced: set[str] = set()
        self.failed: dict[str, str] = {}
        self.suffix_count: dict[str, int] = {}
        self.predicted_events = 0
        self.completed_events = 0
        self.iterations = 0
        self.warnings: dict[str, int] = {}
        self.time_format = log_prime.time_format

        for trace in log_prime:
            rows = []
            encoded = []
            prev_start = trace.instances[0].start
            for i, inst in enumerate(trace.instances):
                ds = 0 if i == 0 else inst.start - prev_start
                dp = None if inst.end is None else inst.end - inst.start
                rows.append(
                    _Row(inst.activity, i, inst.start, inst.end, ds, dp, PROV_OBSERVED)
                )
                encoded.append(self.encode.get(inst.activity, -1))
                prev_start = inst.start
            self.cases[trace.case_id] = rows
            self.case_encoded[trace.case_id] = encoded
            self.last_start[trace.case_id] = rows[-1].start
            self.suffix_count[trace.case_id] = 0

        self.eligible_heap: list[tuple[int, str]] = [
            (start, cid) for cid, start in self.last_start.items()
        ]
        heapq.heapify(self.eligible_heap)
        self.candidates: list[tuple[int, str]] = []

    # -- query construction -------------------------------------------------

    def _context(self, case_id: str, upto: int) -> tuple[int, ...]:
        encoded = self.case_encoded[case_id][:upto]
        window = encoded[-self.n:]
        ctx = (0,) * (self.n - len(window)) + tuple(window)
        if any(i < 0 for i in ctx):
            raise SuffixSweepError(
                f"case {case_id!r}: activity label unknown to the model vocabulary"
            )
        return ctx

    def _query(self, case_id: str, position: int, t_eval: int, activity: str) -> Query:
        return Query(
            case_id=case_id,
            position=position,
            context=self._context(case_id, position),
            t_eval=t_eval,
            wip=self.index.wip(t_eval),
            utilization=self.index.utilization(t_eval, activity),
            lam=self.index.arrival_rate(t_eval, self.tau),
            last_start=self.last_start[case_id],
        )

    # -- phases -------------------------------------------------------------

    def complete_ongoing(self, eligible: list[str]) -> None:
        for case_id in eligible:
            rows = self.cases[case_id]
            for j, row in enumerate(rows):
                if row.end is not None:
                    continue
                try:
                    query = self._query(case_id, j, row.start, row.activity)
                    act_idx = self.encode[row.activity]
                    dp = self.bundle.completion_proc(query, act_idx, float(row.delta_start))
                except Exception as exc:  # predictor failure: fail the case, keep going
                    self._fail(case_id, f"completion failed: {exc}")
                    break
                row.delta_proc = _clamp_duration(dp, self.warnings)
                row.end = row.start + row.delta_proc
                row.provenance = PROV_COMPLETED
                self.index.close(row.activity, row.end)
                self.completed_events += 1

    def extend_cases(self, eligible: list[str]) -> None:
        for case_id in eligible:
            if case_id in self.failed:
                continue
            rows = self.cases[case_id]
            last = rows[-1]
            try:
                query = self._query(case_id, len(rows), last.start, last.activity)
                dist = self.bundle.next_activity(query)
                next_idx = self.strategy.sample(dist)
                if next_idx == self.vocab.eot_index:
                    self.terminated.add(case_id)
                    continue
                ds = _clamp_duration(
                    self.bundle.inter_start(query, next_idx), self.warnings
                )
                dp = _clamp_duration(
                    self.bundle.proc_time(query, next_idx, float(ds)), self.warnings
                )
                activity = self.vocab.decode(next_idx)
            except Exception as exc:
                self._fail(case_id, f"extension failed: {exc}")
                continue
            start = last.start + ds
            end = start + dp
            rows.append(_Row(activity, len(rows), start, end, ds, dp, PROV_PREDICTED))
            self.case_encoded[case_id].append(next_idx)
            self.index.add(activity, start, end)
            self.last_start[case_id] = start
            heapq.heappush(self.candidates, (start, case_id))
            self.predicted_events += 1
            self.suffix_count[case_id] += 1
            if self.suffix_count[case_id] >= self.max_suffix_len:
                self.terminated.add(case_id)
                self.forced.add(case_id)

    def _fail(self, case_id: str, message: str) -> None:
        self.failed[case_id] = message
        self.terminated.add(case_id)

    def _active(self, case_id: str) -> bool:
        return case_id not in self.terminated

    def pop_eligible(self, t_sweep: int) -> list[str]:
        out = []
        while self.eligible_heap and self.eligible_heap[0][0] <= t_sweep:
            _, case_id = heapq.heappop(self.eligible_heap)
            if self._active(case_id):
                out.append(case_id)
        out.sort()
        return out

    def advance(self, t_sweep: int) -> Optional[int]:
        """Smallest predicted start strictly after the cursor belonging to a
        non-terminated case, or None when the sweep is done."""
        while self.candidates:
            start, case_id = self.candidates[0]
            if start <= t_sweep or not self._active(case_id):
                heapq.heappop(self.candidates)
                continue
            heapq.heappop(self.candidates)
            return start
        return None

    # -- main loop ----------------------------------------------------------

    def run(self, t_cutoff: int) -> SweepResult:
        started = time.perf_counter()
        t_sweep = t_cutoff
        cap_exceeded = False
        while True:
            eligible = self.pop_eligible(t_sweep)
            if eligible:
                self.iterations += 1
                self.complete_ongoing(eligible)
                self.extend_cases(eligible)
                for case_id in eligible:
                    if self._active(case_id):
                        heapq.heappush(
                            self.eligible_heap, (self.last_start[case_id], case_id)
                        )
            if self.predicted_events > self.global_cap:
                cap_exceeded = True
                break
            nxt = self.advance(t_sweep)
            if nxt is not None:
                t_sweep = nxt  # strictly increasing by construction
            elif not eligible:
                break
        elapsed = time.perf_counter() - started
        return self._result(t_cutoff, t_sweep, elapsed, cap_exceeded)

    def _result(self, t_cutoff, t_sweep, elapsed, cap_exceeded) -> SweepResult:
        records: list[PredictedRecord] = []
        suffixes: dict[str, list[PredictedRecord]] = {}
        instances = []
        for case_id in self.cases:
            case_records = [
                PredictedRecord(
                    case_id=case_id,
                    activity=row.activity,
                    start=row.start,
                    end=row.end,
                    delta_start=row.delta_start,
                    delta_proc=row.delta_proc,
                    provenance=row.provenance,
                )
                for row in self.cases[case_id]
            ]
            records.extend(case_records)
            suffixes[case_id] = [
                r for r in case_records if r.provenance == PROV_PREDICTED
            ]
            if case_id not in self.failed:
                instances.extend(
                    ActivityInstance(case_id, r.activity, r.start, r.end)
                    for r in case_records
                )
        unfinished = sorted(
            cid for cid in self.cases if cid not in self.terminated
        )
        report = {
            "cases": len(self.cases),
            "iterations": self.iterations,
            "predicted_events": self.predicted_events,
            "completed_events": self.completed_events,
            "elapsed_seconds": elapsed,
            "events_per_second": (
                (self.predicted_events + self.completed_events) / elapsed
                if elapsed > 0
                else float("inf")
            ),
            "t_cutoff": t_cutoff,
            "t_sweep_final": t_sweep,
            "cap_exceeded": cap_exceeded,
            "forced_terminations": sorted(self.forced),
            "unfinished_cases": unfinished,
            "failures": dict(sorted(self.failed.items())),
            "warnings": self.warnings,
            "bundle_kind": getattr(self.bundle, "kind", "custom"),
            "sampling": self.strategy.kind,
            "max_suffix_len": self.max_suffix_len,
            "tau": self.tau.tau,
        }
        log = build_log(instances, time_format=self.time_format)
        return SweepResult(log=log, records=records, suffixes=suffixes, report=report)


def run_sweep(
    log_prime: ActivityInstanceLog,
    bundle,
    t_cutoff: Timestamp,
    config: Optional[SweepConfig] = None,
) -> SweepResult:
    """Predict the suffix of every case of the censored log in lockstep.

    ``bundle`` is any object implementing the prediction interface (an
    MMBundle, SMBundle, OracleBundle, RemoteBundle or custom predictor).
    """
    if not len(log_prime):
        return SweepResult(
            log=ActivityInstanceLog(traces={}, time_format=log_prime.time_format),
            records=[],
            suffixes={},
            report={
                "cases": 0,
                "iterations": 0,
                "predicted_events": 0,
                "completed_events": 0,
                "cap_exceeded": False,
                "failures": {},
                "unfinished_cases": [],
            },
        )
    engine = _SweepEngine(log_prime, bundle, config or SweepConfig())
    return engine.run(t_cutoff)


def run_sweep_sm(
    log_prime: ActivityInstanceLog,
    sm_bundle,
    t_cutoff: Timestamp,
    config: Optional[SweepConfig] = None,
) -> SweepResult:
    """Single-model variant: same engine, joint predictions per step.

    Instances that were ongoing at the cutoff are still completed (the sweep
    needs their end timestamps) but are excluded from single-model scoring by
    the evaluation layer.
    """
    return run_sweep(log_prime, sm_bundle, t_cutoff, config)


def write_predicted_csv(records, target, time_format: str = "iso") -> Optional[str]:
    if target is None:
        buf = io.StringIO()
        write_predicted_csv(records, buf, time_format)
        return buf.getvalue()
    if isinstance(target, str) or hasattr(target, "__fspath__"):
        with open(target, "w", newline="", encoding="utf-8") as fh:
            write_predicted_csv(records, fh, time_format)
        return None
    writer = csv.writer(target)
    writer.writerow(PREDICTED_CSV_HEADER)
    for r in records:
        writer.writerow(
            [
                r.case_id,
                r.activity,
                format_timestamp(r.start, time_format),
                "" if r.end is None else format_timestamp(r.end, time_format),
                r.delta_start,
                "" if r.delta_proc is None else r.delta_proc,
                r.provenance,
            ]
        )
    return None


def read_predicted_csv(source) -> list[PredictedRecord]:
    if isinstance(source, str) or hasattr(source, "__fspath__"):
        with open(source, newline="", encoding="utf-8") as fh:
            return read_predicted_csv(fh)
    reader = csv.reader(source)
    header = tuple(next(reader))
    if header != PREDICTED_CSV_HEADER:
        raise SuffixSweepError(f"unexpected predicted-log header: {header}")
    records = []
    for row in reader:
        if not row:
            continue
        case_id, activity, start_s, end_s, ds, dp, provenance = row
        fmt = "epoch" if start_s.strip().lstrip("-").isdigit() else "iso"
        records.append(
            PredictedRecord(
                case_id=case_id,
                activity=activity,
                start=parse_timestamp(start_s, fmt),
                end=parse_timestamp(end_s, fmt) if end_s.strip() else None,
                delta_start=int(ds),
                delta_proc=int(dp) if dp.strip() else None,
                provenance=provenance,
            )
        )
    return records

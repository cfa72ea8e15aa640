"""Intra- and inter-case feature extraction.

Intra-case features are per-instance: the inter-start time (seconds since the
previous instance of the same case started) and the processing time.  Inter-
case features describe the whole system at an evaluation time: work in
progress (active instances), per-activity utilization (active instances of one
activity) and the recent case arrival rate.

An instance with a missing end timestamp counts as active at every evaluation
time at or after its start.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from . import kernels
from .errors import LogValidationError
from .event_log import ActivityInstance, ActivityInstanceLog, Timestamp, Trace


@dataclass(frozen=True)
class IntraFeatures:
    delta_start: int  # seconds since the previous instance's start; 0 for the first
    delta_proc: Optional[int]  # end - start; None while the instance is running


@dataclass(frozen=True)
class InterFeatures:
    wip: int
    utilization: int
    lam: float  # cases per second over the trailing window


@dataclass(frozen=True)
class EnhancedInstance:
    base: ActivityInstance
    intra: IntraFeatures
    inter: Optional[InterFeatures]


@dataclass(frozen=True)
class LambdaWindow:
    tau: int  # seconds

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError(f"tau must be positive, got {self.tau}")


def intra_features(prefix: Union[Trace, Sequence[ActivityInstance]]) -> list[IntraFeatures]:
    instances = prefix.instances if isinstance(prefix, Trace) else tuple(prefix)
    if not instances:
        raise LogValidationError("cannot compute intra features of an empty prefix")
    out = []
    prev_start = instances[0].start
    for i, inst in enumerate(instances):
        delta_start = 0 if i == 0 else inst.start - prev_start
        if delta_start < 0:
            raise LogValidationError(
                f"case {inst.case_id}: instances not sorted by start timestamp"
            )
        delta_proc = None if inst.end is None else inst.end - inst.start
        out.append(IntraFeatures(delta_start=delta_start, delta_proc=delta_proc))
        prev_start = inst.start
    return out


class WorkloadIndex:
    """Incremental index answering wip/utilization/arrival-rate queries.

    Sorted arrays of starts and ends give O(log n) point queries; the sweep
    engine keeps the index in sync as it closes and appends instances.  An
    instance is active at t iff start <= t and (end missing or end >= t).
    """

    def __init__(self, log: Optional[ActivityInstanceLog] = None):
        self._starts: list[int] = []
        self._ends: list[int] = []  # non-null ends only
        self._act_starts: dict[str, list[int]] = {}
        self._act_ends: dict[str, list[int]] = {}
        self._first_starts: list[int] = []
        if log is not None:
            # bulk load: append everything, sort once
            for trace in log:
                self._first_starts.append(trace.instances[0].start)
                for inst in trace.instances:
                    self._starts.append(inst.start)
                    self._act_starts.setdefault(inst.activity, []).append(inst.start)
                    self._act_ends.setdefault(inst.activity, [])
                    if inst.end is not None:
                        self._ends.append(inst.end)
                        self._act_ends[inst.activity].append(inst.end)
            self._first_starts.sort()
            self._starts.sort()
            self._ends.sort()
            for values in self._act_starts.values():
                values.sort()
            for values in self._act_ends.values():
                values.sort()

    def add_case(self, first_start: int) -> None:
        bisect.insort(self._first_starts, first_start)

    def add(self, activity: str, start: int, end: Optional[int]) -> None:
        bisect.insort(self._starts, start)
        bisect.insort(self._act_starts.setdefault(activity, []), start)
        self._act_ends.setdefault(activity, [])
        if end is not None:
            self.close(activity, end)

    def close(self, activity: str, end: int) -> None:
        """Record the end timestamp of a previously open instance."""
        bisect.insort(self._ends, end)
        bisect.insort(self._act_ends.setdefault(activity, []), end)

    def wip(self, t: Timestamp) -> int:
        return bisect.bisect_right(self._starts, t) - bisect.bisect_left(self._ends, t)

    def utilization(self, t: Timestamp, activity: str) -> int:
        starts = self._act_starts.get(activity)
        if not starts:
            return 0
        ends = self._act_ends.get(activity, [])
        return bisect.bisect_right(starts, t) - bisect.bisect_left(ends, t)

    def arrival_rate(self, t: Timestamp, tau: LambdaWindow) -> float:
        # cases whose first instance started within (t - tau, t]
        recent = bisect.bisect_right(self._first_starts, t) - bisect.bisect_left(
            self._first_starts, t - tau.tau
        )
        return recent / tau.tau

    def inter_features(self, t: Timestamp, activity: str, tau: LambdaWindow) -> InterFeatures:
        return InterFeatures(
            wip=self.wip(t),
            utilization=self.utilization(t, activity),
            lam=self.arrival_rate(t, tau),
        )


def _interval_arrays(log: ActivityInstanceLog):
    starts, ends = [], []
    for inst in log.instances():
        starts.append(inst.start)
        ends.append(kernels.OPEN_END if inst.end is None else inst.end)
    return np.asarray(starts, dtype=np.int64), np.asarray(ends, dtype=np.int64)


def wip_at(log: ActivityInstanceLog, t_eval: Timestamp) -> int:
    """Instances active at t_eval across the whole log (linear scan)."""
    starts, ends = _interval_arrays(log)
    return kernels.count_active(starts, ends, t_eval)


def utilization_at(log: ActivityInstanceLog, t_eval: Timestamp, activity: str) -> int:
    """Active instances of one activity at t_eval."""
    starts, ends = [], []
    for inst in log.instances():
        if inst.activity == activity:
            starts.append(inst.start)
            ends.append(kernels.OPEN_END if inst.end is None else inst.end)
    if not starts:
        return 0
    return kernels.count_active(
        np.asarray(starts, dtype=np.int64), np.asarray(ends, dtype=np.int64), t_eval
    )


def arrival_rate(log: ActivityInstanceLog, t_eval: Timestamp, tau: LambdaWindow) -> float:
    """Cases whose first instance started within the trailing window, per second."""
    recent = sum(
        1 for trace in log if t_eval - tau.tau <= trace.instances[0].start <= t_eval
    )
    return recent / tau.tau


def _as_index(log_or_index) -> WorkloadIndex:
    if isinstance(log_or_index, WorkloadIndex):
        return log_or_index
    return WorkloadIndex(log_or_index)


def enhance_prefix(
    log_or_index: Union[ActivityInstanceLog, WorkloadIndex],
    prefix: Union[Trace, Sequence[ActivityInstance]],
    tau: LambdaWindow,
) -> list[EnhancedInstance]:
    """Attach intra features to every element of the prefix and inter features
    (evaluated at the last element's start) to the last element only."""
    instances = prefix.instances if isinstance(prefix, Trace) else tuple(prefix)
    intra = intra_features(instances)
    index = _as_index(log_or_index)
    last = instances[-1]
    inter_last = index.inter_features(last.start, last.activity, tau)
    out = []
    for i, (inst, feats) in enumerate(zip(instances, intra)):
        inter = inter_last if i == len(instances) - 1 else None
        out.append(EnhancedInstance(base=inst, intra=feats, inter=inter))
    return out


def enhance_rows(
    log_or_index: Union[ActivityInstanceLog, WorkloadIndex],
    prefix: Union[Trace, Sequence[ActivityInstance]],
    tau: LambdaWindow,
) -> list[EnhancedInstance]:
    """Per-row variant used by the encoder: every element carries inter
    features evaluated at its own start timestamp."""
    instances = prefix.instances if isinstance(prefix, Trace) else tuple(prefix)
    intra = intra_features(instances)
    index = _as_index(log_or_index)
    return [
        EnhancedInstance(
            base=inst,
            intra=feats,
            inter=index.inter_features(inst.start, inst.activity, tau),
        )
        for inst, feats in zip(instances, intra)
    ]


def default_tau(training_log: ActivityInstanceLog, fraction: float = 0.2) -> LambdaWindow:
    """Trailing arrival window: a fraction (default 20%) of the training log
    duration, computed once on the training log and frozen for online use."""
    from .event_log import log_duration

    tau = max(1, int(fraction * log_duration(training_log)))
    return LambdaWindow(tau=tau)

"""Synthetic activity-instance logs with known ground truth.

Control flow is a Markov chain over activities; durations come from
per-activity distributions; cases arrive on a fixed interval or a Poisson
process.  Optionally each activity has a finite server count, in which case
jobs wait in a FIFO queue and waiting times emerge from contention, making the
workload features informative by construction.

Generation is a single-threaded event-calendar simulation, fully determined by
the spec and its seed.
"""

from __future__ import annotations

import heapq
import json
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from .errors import ConfigError
from .event_log import ActivityInstance, ActivityInstanceLog, build_log

END = "__end__"  # transition target marking case completion

_ROW_TOL = 1e-9


@dataclass(frozen=True)
class DurationDist:
    """constant | uniform | exponential, parameterized in seconds."""

    kind: str
    params: tuple[float, ...]

    def __post_init__(self):
        expected = {"constant": 1, "uniform": 2, "exponential": 1}
        if self.kind not in expected:
            raise ConfigError(f"unknown duration distribution: {self.kind!r}")
        if len(self.params) != expected[self.kind]:
            raise ConfigError(f"{self.kind} expects {expected[self.kind]} parameter(s)")
        if any(p < 0 for p in self.params):
            raise ConfigError(f"negative duration parameter in {self.kind}")

    def sample(self, rng: random.Random) -> int:
        if self.kind == "constant":
            value = self.params[0]
        elif self.kind == "uniform":
            value = rng.uniform(self.params[0], self.params[1])
        else:
            value = rng.expovariate(1.0 / self.params[0]) if self.params[0] > 0 else 0.0
        return max(0, int(round(value)))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": list(self.params)}

    @classmethod
    def from_dict(cls, data: dict) -> "DurationDist":
        return cls(kind=data["kind"], params=tuple(data["params"]))


def constant(value: float) -> DurationDist:
    return DurationDist("constant", (value,))


def uniform(low: float, high: float) -> DurationDist:
    return DurationDist("uniform", (low, high))


def exponential(mean: float) -> DurationDist:
    return DurationDist("exponential", (mean,))


@dataclass
class ProcessSpec:
    activities: list[str]
    transitions: dict[str, dict[str, float]]  # rows sum to 1; END ends the case
    durations: dict[str, DurationDist]
    arrival_kind: str = "fixed"  # fixed | poisson
    arrival_param: float = 60.0  # interval seconds | rate (cases per second)
    initial: Optional[dict[str, float]] = None  # default: first activity w.p. 1
    transfer: DurationDist = field(default_factory=lambda: constant(0))
    servers: Optional[dict[str, int]] = None  # absent activity -> unlimited
    start_time: int = 1_700_000_000
    seed: int = 0

    def __post_init__(self):
        if not self.activities:
            raise ConfigError("spec needs at least one activity")
        if self.arrival_kind not in ("fixed", "poisson"):
            raise ConfigError(f"unknown arrival process: {self.arrival_kind!r}")
        if self.arrival_param <= 0:
            raise ConfigError("arrival parameter must be positive")
        rows = dict(self.transitions)
        if self.initial:
            rows["__initial__"] = self.initial
        for name, row in rows.items():
            total = sum(row.values())
            if abs(total - 1.0) > _ROW_TOL:
                raise ConfigError(f"transition row {name!r} sums to {total}, not 1")
            if any(p < 0 for p in row.values()):
                raise ConfigError(f"negative probability in row {name!r}")
            for target in row:
                if target != END and target not in self.activities:
                    raise ConfigError(f"row {name!r} references unknown activity {target!r}")
        for a in self.activities:
            if a not in self.durations:
                raise ConfigError(f"no duration distribution for activity {a!r}")
            if a not in self.transitions:
                raise ConfigError(f"no transition row for activity {a!r}")
        if self.servers:
            for a, c in self.servers.items():
                if c < 1:
                    raise ConfigError(f"server count for {a!r} must be >= 1")

    def to_json(self) -> str:
        return json.dumps(
            {
                "activities": self.activities,
                "transitions": self.transitions,
                "durations": {a: d.to_dict() for a, d in self.durations.items()},
                "arrival": {"kind": self.arrival_kind, "param": self.arrival_param},
                "initial": self.initial,
                "transfer": self.transfer.to_dict(),
                "servers": self.servers,
                "start_time": self.start_time,
                "seed": self.seed,
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "ProcessSpec":
        data = json.loads(text)
        return cls(
            activities=list(data["activities"]),
            transitions={a: dict(row) for a, row in data["transitions"].items()},
            durations={a: DurationDist.from_dict(d) for a, d in data["durations"].items()},
            arrival_kind=data.get("arrival", {}).get("kind", "fixed"),
            arrival_param=data.get("arrival", {}).get("param", 60.0),
            initial=data.get("initial"),
            transfer=DurationDist.from_dict(data["transfer"]) if data.get("transfer") else constant(0),
            servers=data.get("servers"),
            start_time=data.get("start_time", 1_700_000_000),
            seed=data.get("seed", 0),
        )


class _Pool:
    """FIFO queue in front of c servers (c=None means unlimited)."""

    def __init__(self, capacity: Optional[int]):
        self.capacity = capacity
        self.busy = 0
        self.waiting: deque = deque()  # case ids in FIFO order

    def try_acquire(self) -> bool:
        if self.capacity is None or self.busy < self.capacity:
            self.busy += 1
            return True
        return False

    def release(self):
        self.busy -= 1


def _sample_choice(rng: random.Random, row: dict[str, float]) -> str:
    r = rng.random()
    acc = 0.0
    last = None
    for target, p in row.items():
        acc += p
        last = target
        if r < acc:
            return target
    return last


def generate(spec: ProcessSpec, n_cases: int) -> ActivityInstanceLog:
    """Simulate n_cases through the spec; returns a complete log."""
    if n_cases < 1:
        raise ConfigError("n_cases must be >= 1")
    rng = random.Random(spec.seed)

    arrivals = []
    t = float(spec.start_time)
    for i in range(n_cases):
        if i > 0:
            if spec.arrival_kind == "fixed":
                t += spec.arrival_param
            else:
                t += rng.expovariate(spec.arrival_param)
        arrivals.append(int(round(t)))

    initial_row = spec.initial or {spec.activities[0]: 1.0}
    pools = {a: _Pool(spec.servers.get(a) if spec.servers else None) for a in spec.activities}
    instances: list[ActivityInstance] = []

    heap: list = []
    seq = 0
    for i, at in enumerate(arrivals):
        heap.append((at, seq, "ready", (f"case_{i:05d}", _sample_choice(rng, initial_row))))
        seq += 1
    heapq.heapify(heap)

    def start_job(case_id: str, activity: str, now: int):
        nonlocal seq
        duration = spec.durations[activity].sample(rng)
        end = now + duration
        instances.append(ActivityInstance(case_id, activity, now, end))
        heapq.heappush(heap, (end, seq, "finish", (case_id, activity)))
        seq += 1

    while heap:
        now, _, kind, data = heapq.heappop(heap)
        if kind == "ready":
            case_id, activity = data
            pool = pools[activity]
            if pool.try_acquire():
                start_job(case_id, activity, now)
            else:
                pool.waiting.append(case_id)
                # remember which activity the queued job wants via the pool key
                # (each pool serves exactly one activity)
        else:  # finish
            case_id, activity = data
            pool = pools[activity]
            pool.release()
            if pool.waiting:
                nxt_case = pool.waiting.popleft()
                pool.try_acquire()
                start_job(nxt_case, activity, now)
            target = _sample_choice(rng, spec.transitions[activity])
            if target != END:
                ready_at = now + spec.transfer.sample(rng)
                heapq.heappush(heap, (ready_at, seq, "ready", (case_id, target)))
                seq += 1

    return build_log(instances, time_format="epoch")

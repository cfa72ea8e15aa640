"""Prediction contracts and native statistical predictors.

The multi-model architecture trains three separate models: one for the next
activity, one for its inter-start time (conditioned on the chosen next
activity) and one for its processing time.  The single-model baseline predicts
all three jointly from the context alone, so its time estimates are blended
over whatever next activities the context allows.

Native models are n-gram conditional frequency/mean tables with deterministic
backoff: full context window, then shorter context suffixes, then (for the
time models) the next activity alone, then the global statistic.  The
interfaces are duck-typed so neural or remote predictors can be plugged in.
"""

from __future__ import annotations

import json
import subprocess
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

from .encoding import (
    ActivityVocabulary,
    NgramSample,
    NormalizationParams,
    pad_context,
)
from .errors import ConfigError, PredictorError, SuffixSweepError
from .event_log import ActivityInstanceLog

ActivityDistribution = dict[int, float]

MODEL_FORMAT = "suffixsweep-model"
MODEL_VERSION = 1


def validate_distribution(dist: ActivityDistribution, tol: float = 1e-9) -> None:
    total = sum(dist.values())
    if any(p < 0 for p in dist.values()) or abs(total - 1.0) > tol:
        raise PredictorError(f"invalid activity distribution (sum={total})")


@dataclass
class SamplingStrategy:
    """How to pick a next activity from a predicted distribution.

    ``argmax`` is deterministic (ties break to the lowest index),
    ``random_choice`` draws from the distribution with its own seeded
    generator, and ``daemon_hook`` delegates to a user-supplied policy
    callable (its heuristics live outside this package).
    """

    kind: str = "argmax"
    seed: int = 0
    policy: Optional[Callable[[ActivityDistribution], int]] = None

    def __post_init__(self):
        if self.kind not in ("argmax", "random_choice", "daemon_hook"):
            raise ConfigError(f"unknown sampling strategy: {self.kind!r}")
        import random

        self._rng = random.Random(self.seed)

    def sample(self, dist: ActivityDistribution) -> int:
        return sample_activity(dist, self)


def sample_activity(dist: ActivityDistribution, strategy: SamplingStrategy) -> int:
    validate_distribution(dist)
    if strategy.kind == "argmax":
        best_p = max(dist.values())
        return min(i for i, p in dist.items() if p == best_p)
    if strategy.kind == "random_choice":
        r = strategy._rng.random()
        acc = 0.0
        items = sorted(dist.items())
        for idx, p in items:
            acc += p
            if r < acc:
                return idx
        return items[-1][0]
    if strategy.policy is None:
        raise ConfigError("daemon_hook strategy requires a policy callable")
    return strategy.policy(dist)


def _suffix_keys(context: tuple[int, ...], n: int):
    """Backoff keys from the full window down to the empty context."""
    for length in range(n, -1, -1):
        yield context[-length:] if length else ()


class AlphaModel:
    """Next-activity model: context-window frequency tables with backoff."""

    def __init__(self, n: int):
        self.n = n
        self.table: dict[tuple[int, ...], Counter] = {(): Counter()}

    def observe(self, context: tuple[int, ...], target: int) -> None:
        for key in _suffix_keys(context, self.n):
            self.table.setdefault(key, Counter())[target] += 1

    def predict(self, context: Sequence[int]) -> ActivityDistribution:
        context = pad_context(tuple(context), self.n)
        for key in _suffix_keys(context, self.n):
            counts = self.table.get(key)
            if counts:
                total = sum(counts.values())
                return {a: c / total for a, c in sorted(counts.items())}
        raise PredictorError("next-activity model is untrained")

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "entries": [
                [list(ctx), sorted(counts.items())]
                for ctx, counts in sorted(self.table.items())
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AlphaModel":
        model = cls(data["n"])
        for ctx, counts in data["entries"]:
            model.table[tuple(ctx)] = Counter({int(a): int(c) for a, c in counts})
        return model


class _WipAdjustment:
    """Optional workload correction: mean target per observed wip count,
    applied as a multiplicative factor against the global mean."""

    def __init__(self):
        self.buckets: dict[int, list[float]] = {}  # wip -> [sum, count]
        self.total = [0.0, 0]

    def observe(self, wip: int, value: float) -> None:
        cell = self.buckets.setdefault(wip, [0.0, 0])
        cell[0] += value
        cell[1] += 1
        self.total[0] += value
        self.total[1] += 1

    def factor(self, wip: Optional[int]) -> float:
        if wip is None or self.total[1] == 0 or self.total[0] == 0:
            return 1.0
        cell = self.buckets.get(wip)
        if not cell or not cell[1]:
            return 1.0
        global_mean = self.total[0] / self.total[1]
        if global_mean == 0:
            return 1.0
        return (cell[0] / cell[1]) / global_mean

    def to_dict(self) -> dict:
        return {
            "buckets": [[w, s, c] for w, (s, c) in sorted(self.buckets.items())],
            "total": list(self.total),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "_WipAdjustment":
        adj = cls()
        adj.buckets = {int(w): [s, int(c)] for w, s, c in data["buckets"]}
        adj.total = [data["total"][0], int(data["total"][1])]
        return adj


class ConditionalMeanModel:
    """Mean duration keyed by (context suffix, next activity) with backoff to
    shorter suffixes, the next activity alone, and finally the global mean.
    Base class of the inter-start and processing time models."""

    def __init__(self, n: int, use_inter: bool = False):
        self.n = n
        self.use_inter = use_inter
        self.table: dict[tuple[tuple[int, ...], int], list[float]] = {}
        self.total = [0.0, 0]
        self.wip_adjustment = _WipAdjustment()

    def observe(
        self, context: tuple[int, ...], target: int, value: float, wip: int = 0
    ) -> None:
        if value < 0:
            value = 0.0
        for key in _suffix_keys(context, self.n):
            cell = self.table.setdefault((key, target), [0.0, 0])
            cell[0] += value
            cell[1] += 1
        self.total[0] += value
        self.total[1] += 1
        self.wip_adjustment.observe(wip, value)

    def predict(
        self, context: Sequence[int], target: int, wip: Optional[int] = None
    ) -> float:
        if self.total[1] == 0:
            raise PredictorError("duration model is untrained")
        context = pad_context(tuple(context), self.n)
        base = None
        for key in _suffix_keys(context, self.n):
            cell = self.table.get((key, target))
            if cell and cell[1]:
                base = cell[0] / cell[1]
                break
        if base is None:
            base = self.total[0] / self.total[1]
        if self.use_inter:
            base *= self.wip_adjustment.factor(wip)
        return max(0.0, base)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "use_inter": self.use_inter,
            "entries": [
                [list(ctx), act, s, c]
                for (ctx, act), (s, c) in sorted(self.table.items())
            ],
            "total": list(self.total),
            "wip_adjustment": self.wip_adjustment.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ConditionalMeanModel":
        model = cls(data["n"], use_inter=data["use_inter"])
        for ctx, act, s, c in data["entries"]:
            model.table[(tuple(ctx), int(act))] = [s, int(c)]
        model.total = [data["total"][0], int(data["total"][1])]
        model.wip_adjustment = _WipAdjustment.from_dict(data["wip_adjustment"])
        return model


class BetaModel(ConditionalMeanModel):
    """Inter-start time model (seconds from the previous start to the next)."""


class GammaModel(ConditionalMeanModel):
    """Processing time model (seconds from start to end of the next activity)."""


class JointModel:
    """Single-model baseline: one table per context holding the next-activity
    distribution and blended time means, none conditioned on the sampled
    activity (the defining single-model limitation)."""

    def __init__(self, n: int, use_inter: bool = False):
        self.n = n
        self.use_inter = use_inter
        # ctx -> [Counter, ds_sum, ds_cnt, dp_sum, dp_cnt]
        self.table: dict[tuple[int, ...], list] = {(): [Counter(), 0.0, 0, 0.0, 0]}
        self.wip_adjustment = _WipAdjustment()

    def observe(
        self,
        context: tuple[int, ...],
        target: int,
        delta_start: float,
        delta_proc: Optional[float],
        wip: int = 0,
    ) -> None:
        for key in _suffix_keys(context, self.n):
            cell = self.table.setdefault(key, [Counter(), 0.0, 0, 0.0, 0])
            cell[0][target] += 1
            cell[1] += max(0.0, delta_start)
            cell[2] += 1
            if delta_proc is not None:
                cell[3] += max(0.0, delta_proc)
                cell[4] += 1
        self.wip_adjustment.observe(wip, max(0.0, delta_start))

    def predict(
        self, context: Sequence[int], wip: Optional[int] = None
    ) -> tuple[ActivityDistribution, float, float]:
        context = pad_context(tuple(context), self.n)
        for key in _suffix_keys(context, self.n):
            cell = self.table.get(key)
            if cell and cell[0]:
                counts = cell[0]
                total = sum(counts.values())
                dist = {a: c / total for a, c in sorted(counts.items())}
                ds = cell[1] / cell[2] if cell[2] else 0.0
                dp = cell[3] / cell[4] if cell[4] else 0.0
                if self.use_inter:
                    ds *= self.wip_adjustment.factor(wip)
                return dist, max(0.0, ds), max(0.0, dp)
        raise PredictorError("joint model is untrained")

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "use_inter": self.use_inter,
            "entries": [
                [list(ctx), sorted(cell[0].items()), cell[1], cell[2], cell[3], cell[4]]
                for ctx, cell in sorted(self.table.items())
            ],
            "wip_adjustment": self.wip_adjustment.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "JointModel":
        model = cls(data["n"], use_inter=data["use_inter"])
        for ctx, counts, ds_sum, ds_cnt, dp_sum, dp_cnt in data["entries"]:
            model.table[tuple(ctx)] = [
                Counter({int(a): int(c) for a, c in counts}),
                ds_sum,
                int(ds_cnt),
                dp_sum,
                int(dp_cnt),
            ]
        model.wip_adjustment = _WipAdjustment.from_dict(data["wip_adjustment"])
        return model


def train_alpha(samples: Iterable[NgramSample], n: int) -> AlphaModel:
    model = AlphaModel(n)
    seen = False
    for s in samples:
        model.observe(s.context_activities, s.target_activity)
        seen = True
    if not seen:
        raise PredictorError("cannot train on an empty sample stream")
    return model


def train_beta(samples: Iterable[NgramSample], n: int, use_inter: bool = False) -> BetaModel:
    model = BetaModel(n, use_inter=use_inter)
    seen = False
    for s in samples:
        model.observe(
            s.context_activities,
            s.target_activity,
            float(s.target_delta_start_raw),
            wip=s.t_eval_wip,
        )
        seen = True
    if not seen:
        raise PredictorError("cannot train on an empty sample stream")
    return model


def train_gamma(samples: Iterable[NgramSample], n: int, use_inter: bool = False) -> GammaModel:
    model = GammaModel(n, use_inter=use_inter)
    seen = False
    for s in samples:
        if s.target_delta_proc_raw is None:
            continue  # open instances carry no processing-time target
        model.observe(
            s.context_activities,
            s.target_activity,
            float(s.target_delta_proc_raw),
            wip=s.t_eval_wip,
        )
        seen = True
    if not seen:
        raise PredictorError("no processing-time targets in the sample stream")
    return model


def train_joint(samples: Iterable[NgramSample], n: int, use_inter: bool = False) -> JointModel:
    model = JointModel(n, use_inter=use_inter)
    seen = False
    for s in samples:
        model.observe(
            s.context_activities,
            s.target_activity,
            float(s.target_delta_start_raw),
            None if s.target_delta_proc_raw is None else float(s.target_delta_proc_raw),
            wip=s.t_eval_wip,
        )
        seen = True
    if not seen:
        raise PredictorError("cannot train on an empty sample stream")
    return model


def predict_alpha(model: AlphaModel, context: Sequence[int]) -> ActivityDistribution:
    return model.predict(context)


def predict_beta(
    model: BetaModel,
    context: Sequence[int],
    next_activity: int,
    eot_index: Optional[int] = None,
    wip: Optional[int] = None,
) -> float:
    if eot_index is not None and next_activity == eot_index:
        return 0.0
    return model.predict(context, next_activity, wip=wip)


def predict_gamma(
    model: GammaModel,
    context: Sequence[int],
    next_activity: int,
    delta_start: float = 0.0,
    eot_index: Optional[int] = None,
    wip: Optional[int] = None,
) -> float:
    # delta_start is part of the prediction contract; the native table model
    # does not condition on it.
    if eot_index is not None and next_activity == eot_index:
        return 0.0
    return model.predict(context, next_activity, wip=wip)


def predict_joint(
    sm: JointModel, context: Sequence[int], wip: Optional[int] = None
) -> tuple[ActivityDistribution, float, float]:
    return sm.predict(context, wip=wip)


# ---------------------------------------------------------------------------
# Prediction queries and bundles (the interface the sweep engine drives)


@dataclass(frozen=True)
class Query:
    """Everything a predictor may condition on for one prediction step."""

    case_id: str
    position: int  # number of instances before the one being predicted
    context: tuple[int, ...]  # encoded activity window, length = n-gram size
    t_eval: int
    wip: int
    utilization: int
    lam: float
    last_start: int


@dataclass
class MMBundle:
    """The multi-model triple behind a single prediction interface."""

    alpha: AlphaModel
    beta: BetaModel
    gamma: GammaModel
    vocab: ActivityVocabulary
    norm: NormalizationParams
    tau: int
    ngram: int
    max_trace_len: int
    use_inter: bool = False
    kind: str = field(default="mm", init=False)

    def next_activity(self, query: Query) -> ActivityDistribution:
        return self.alpha.predict(query.context)

    def inter_start(self, query: Query, next_index: int) -> float:
        return predict_beta(
            self.beta,
            query.context,
            next_index,
            eot_index=self.vocab.eot_index,
            wip=query.wip if self.use_inter else None,
        )

    def proc_time(self, query: Query, next_index: int, delta_start: float) -> float:
        return predict_gamma(
            self.gamma,
            query.context,
            next_index,
            delta_start,
            eot_index=self.vocab.eot_index,
            wip=query.wip if self.use_inter else None,
        )

    def completion_proc(self, query: Query, activity_index: int, delta_start: float) -> float:
        return predict_gamma(
            self.gamma,
            query.context,
            activity_index,
            delta_start,
            eot_index=self.vocab.eot_index,
            wip=query.wip if self.use_inter else None,
        )


@dataclass
class SMBundle:
    """Single-model baseline behind the same prediction interface."""

    joint: JointModel
    vocab: ActivityVocabulary
    norm: NormalizationParams
    tau: int
    ngram: int
    max_trace_len: int
    use_inter: bool = False
    kind: str = field(default="sm", init=False)

    def _lookup(self, query: Query):
        wip = query.wip if self.use_inter else None
        return self.joint.predict(query.context, wip=wip)

    def next_activity(self, query: Query) -> ActivityDistribution:
        return self._lookup(query)[0]

    def inter_start(self, query: Query, next_index: int) -> float:
        if next_index == self.vocab.eot_index:
            return 0.0
        return self._lookup(query)[1]

    def proc_time(self, query: Query, next_index: int, delta_start: float) -> float:
        if next_index == self.vocab.eot_index:
            return 0.0
        return self._lookup(query)[2]

    def completion_proc(self, query: Query, activity_index: int, delta_start: float) -> float:
        return self._lookup(query)[2]


@dataclass
class OracleBundle:
    """Test oracle: answers every query from a ground-truth complete log."""

    truth: ActivityInstanceLog
    vocab: ActivityVocabulary
    ngram: int = 5
    tau: Optional[int] = None
    max_trace_len: int = 0
    use_inter: bool = False
    kind: str = field(default="oracle", init=False)

    def __post_init__(self):
        if not self.max_trace_len:
            self.max_trace_len = max((len(t) for t in self.truth), default=1)

    def _trace(self, case_id: str):
        trace = self.truth.traces.get(case_id)
        if trace is None:
            raise PredictorError(f"oracle has no ground truth for case {case_id!r}")
        return trace

    def lookup(self, case_id: str, position: int) -> tuple[str, int, int]:
        """True (activity, delta_start, delta_proc) at a trace position;
        the end-of-trace label with zero durations past the end."""
        trace = self._trace(case_id)
        if position >= len(trace):
            return self.vocab.eot_label, 0, 0
        inst = trace.instances[position]
        prev_start = trace.instances[position - 1].start if position else inst.start
        return inst.activity, inst.start - prev_start, inst.end - inst.start

    def next_activity(self, query: Query) -> ActivityDistribution:
        activity, _, _ = self.lookup(query.case_id, query.position)
        if activity == self.vocab.eot_label:
            return {self.vocab.eot_index: 1.0}
        return {self.vocab.encode(activity): 1.0}

    def inter_start(self, query: Query, next_index: int) -> float:
        return float(self.lookup(query.case_id, query.position)[1])

    def proc_time(self, query: Query, next_index: int, delta_start: float) -> float:
        return float(self.lookup(query.case_id, query.position)[2])

    def completion_proc(self, query: Query, activity_index: int, delta_start: float) -> float:
        return float(self.lookup(query.case_id, query.position)[2])


def oracle_predict(oracle: OracleBundle, case_id: str, position: int):
    return oracle.lookup(case_id, position)


# ---------------------------------------------------------------------------
# Serialization


def save_bundle(bundle, path) -> None:
    """Write an MM or SM bundle as a single versioned JSON file."""
    payload = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "kind": bundle.kind,
        "vocab": {"labels": list(bundle.vocab.labels), "eot_label": bundle.vocab.eot_label},
        "normalization": {k: list(v) for k, v in bundle.norm.ranges.items()},
        "tau": bundle.tau,
        "ngram": bundle.ngram,
        "max_trace_len": bundle.max_trace_len,
        "use_inter": bundle.use_inter,
    }
    if bundle.kind == "mm":
        payload["models"] = {
            "alpha": bundle.alpha.to_dict(),
            "beta": bundle.beta.to_dict(),
            "gamma": bundle.gamma.to_dict(),
        }
    elif bundle.kind == "sm":
        payload["models"] = {"joint": bundle.joint.to_dict()}
    else:
        raise ConfigError(f"cannot serialize bundle kind {bundle.kind!r}")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)


def load_bundle(path):
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format") != MODEL_FORMAT:
        raise SuffixSweepError(f"{path}: not a {MODEL_FORMAT} file")
    if payload.get("version") != MODEL_VERSION:
        raise SuffixSweepError(f"{path}: unsupported model version {payload.get('version')}")
    vocab = ActivityVocabulary(
        labels=tuple(payload["vocab"]["labels"]),
        eot_label=payload["vocab"]["eot_label"],
    )
    norm = NormalizationParams(
        ranges={k: (v[0], v[1]) for k, v in payload["normalization"].items()}
    )
    common = dict(
        vocab=vocab,
        norm=norm,
        tau=payload["tau"],
        ngram=payload["ngram"],
        max_trace_len=payload["max_trace_len"],
        use_inter=payload["use_inter"],
    )
    if payload["kind"] == "mm":
        models = payload["models"]
        return MMBundle(
            alpha=AlphaModel.from_dict(models["alpha"]),
            beta=BetaModel.from_dict(models["beta"]),
            gamma=GammaModel.from_dict(models["gamma"]),
            **common,
        )
    if payload["kind"] == "sm":
        return SMBundle(joint=JointModel.from_dict(payload["models"]["joint"]), **common)
    raise SuffixSweepError(f"{path}: unknown bundle kind {payload['kind']!r}")


# ---------------------------------------------------------------------------
# Process-boundary plug-in: an external predictor served over a subprocess's
# stdin/stdout, one JSON object per line.


class RemoteBundle:
    """Drive an external predictor process through a line-based JSON protocol.

    Request: {"op": "next"|"inter_start"|"proc"|"completion_proc",
              "case_id", "position", "context", "t_eval",
              "wip", "utilization", "lambda", "last_start",
              and for time ops "next_activity" (index) plus "delta_start"
              for "proc"/"completion_proc"}.
    Response: {"probabilities": {"<index>": p, ...}} for "next",
              {"seconds": x} for the time ops.
    """

    kind = "remote"

    def __init__(self, command: Sequence[str], vocab: ActivityVocabulary,
                 ngram: int, tau: int, max_trace_len: int = 100,
                 use_inter: bool = True):
        self.vocab = vocab
        self.ngram = ngram
        self.tau = tau
        self.max_trace_len = max_trace_len
        self.use_inter = use_inter
        self._proc = subprocess.Popen(
            list(command),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
        )

    def _call(self, payload: dict) -> dict:
        if self._proc.poll() is not None:
            raise PredictorError("remote predictor process has exited")
        self._proc.stdin.write(json.dumps(payload) + "\n")
        self._proc.stdin.flush()
        line = self._proc.stdout.readline()
        if not line:
            raise PredictorError("remote predictor closed its output stream")
        try:
            return json.loads(line)
        except json.JSONDecodeError as exc:
            raise PredictorError(f"remote predictor sent invalid JSON: {line!r}") from exc

    def _request(self, op: str, query: Query, **extra) -> dict:
        return self._call(
            {
                "op": op,
                "case_id": query.case_id,
                "position": query.position,
                "context": list(query.context),
                "t_eval": query.t_eval,
                "wip": query.wip,
                "utilization": query.utilization,
                "lambda": query.lam,
                "last_start": query.last_start,
                **extra,
            }
        )

    def next_activity(self, query: Query) -> ActivityDistribution:
        resp = self._request("next", query)
        return {int(k): float(v) for k, v in resp["probabilities"].items()}

    def inter_start(self, query: Query, next_index: int) -> float:
        return float(self._request("inter_start", query, next_activity=next_index)["seconds"])

    def proc_time(self, query: Query, next_index: int, delta_start: float) -> float:
        resp = self._request("proc", query, next_activity=next_index, delta_start=delta_start)
        return float(resp["seconds"])

    def completion_proc(self, query: Query, activity_index: int, delta_start: float) -> float:
        resp = self._request(
            "completion_proc", query, next_activity=activity_index, delta_start=delta_start
        )
        return float(resp["seconds"])

    def close(self) -> None:
        if self._proc.poll() is None:
            self._proc.stdin.close()
            self._proc.wait(timeout=5)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

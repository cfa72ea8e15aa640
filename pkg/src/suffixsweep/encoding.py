"""Vocabulary, normalization and fixed-size n-gram sample construction.

Activities are encoded as dense integer indices starting at 1; index 0 is the
left-padding token and the end-of-trace sentinel gets the last index.  Each
prefix position yields one sample whose context is the (left-padded) window of
the n preceding instances and whose targets are the next instance's activity,
inter-start time and processing time.  Complete traces additionally emit a
terminal sample targeting the end-of-trace sentinel with zero durations.

Continuous features are min-max normalized against ranges fitted on training
data; out-of-range values are clamped before normalization.  The native
predictors consume the raw (seconds / counts) targets also carried by each
sample; the normalized values exist for sample export and external model
plug-ins.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import EncodingError, LogValidationError
from .event_log import ActivityInstanceLog
from .features import EnhancedInstance

PAD_INDEX = 0
DEFAULT_NGRAM = 10

# fixed feature order for continuous context vectors and CSV dumps
CONTINUOUS_FEATURES = ("delta_start", "delta_proc", "wip", "utilization", "lambda")


@dataclass(frozen=True)
class ActivityVocabulary:
    """Dense label indexing: pad=0, real labels from 1, end-of-trace last."""

    labels: tuple[str, ...]  # position i holds the label with index i+1
    eot_label: str = "EOT"

    @property
    def pad_index(self) -> int:
        return PAD_INDEX

    @property
    def eot_index(self) -> int:
        return len(self.labels)

    @property
    def size(self) -> int:
        """Number of indices including the pad token."""
        return len(self.labels) + 1

    def encode(self, label: str) -> int:
        try:
            return self.labels.index(label) + 1
        except ValueError:
            raise EncodingError(f"unknown activity label: {label!r}") from None

    def decode(self, index: int) -> str:
        if not 1 <= index <= len(self.labels):
            raise EncodingError(f"activity index out of range: {index}")
        return self.labels[index - 1]

    def to_index_map(self) -> dict[str, int]:
        return {label: i + 1 for i, label in enumerate(self.labels)}


def build_vocabulary(
    train: ActivityInstanceLog, eot_label: str = "EOT"
) -> ActivityVocabulary:
    """Deterministic indexing: labels ordered by first occurrence time, ties
    broken lexicographically; the end-of-trace sentinel is appended last."""
    if not len(train):
        raise LogValidationError("cannot build vocabulary from an empty log")
    first_seen: dict[str, int] = {}
    for inst in train.instances():
        if inst.activity == eot_label:
            raise LogValidationError(
                f"activity label {eot_label!r} is reserved for end-of-trace"
            )
        prev = first_seen.get(inst.activity)
        if prev is None or inst.start < prev:
            first_seen[inst.activity] = inst.start
    ordered = sorted(first_seen, key=lambda a: (first_seen[a], a))
    return ActivityVocabulary(labels=tuple(ordered) + (eot_label,), eot_label=eot_label)


@dataclass(frozen=True)
class NormalizationParams:
    """Per-feature min/max fitted on training data."""

    ranges: dict[str, tuple[float, float]]

    def normalize(self, feature: str, value: float) -> float:
        lo, hi = self.ranges[feature]
        if hi == lo:
            return 0.0
        value = min(max(value, lo), hi)  # clamp out-of-training-range inputs
        return (value - lo) / (hi - lo)

    def denormalize(self, feature: str, value: float) -> float:
        lo, hi = self.ranges[feature]
        return lo + value * (hi - lo)


def fit_normalization(rows: Sequence[EnhancedInstance]) -> NormalizationParams:
    """Fit min/max ranges from enhanced training rows (per-row inter features)."""
    columns: dict[str, list[float]] = {name: [] for name in CONTINUOUS_FEATURES}
    for row in rows:
        columns["delta_start"].append(float(row.intra.delta_start))
        if row.intra.delta_proc is not None:
            columns["delta_proc"].append(float(row.intra.delta_proc))
        if row.inter is not None:
            columns["wip"].append(float(row.inter.wip))
            columns["utilization"].append(float(row.inter.utilization))
            columns["lambda"].append(row.inter.lam)
    ranges = {}
    for name, values in columns.items():
        if not values:
            raise LogValidationError(f"no values to fit normalization for {name!r}")
        ranges[name] = (min(values), max(values))
    return NormalizationParams(ranges=ranges)


@dataclass(frozen=True)
class NgramSample:
    """One training/inference sample.

    ``context_activities`` has length n (left-padded with 0); each row of
    ``context_continuous`` follows CONTINUOUS_FEATURES order, normalized, with
    all-zero vectors at padded positions.  Raw targets are in seconds.
    """

    case_id: str
    position: int  # index of the target instance within its trace; -1 for EOT
    context_activities: tuple[int, ...]
    context_continuous: tuple[tuple[float, ...], ...]
    target_activity: int
    target_delta_start: float  # normalized
    target_delta_proc: Optional[float]  # normalized; None if the target is open
    target_delta_start_raw: int
    target_delta_proc_raw: Optional[int]
    t_eval_wip: int  # raw wip at the last context row's start (0 for all-pad)


def pad_context(indices: Sequence[int], n: int) -> tuple[int, ...]:
    window = tuple(indices[-n:])
    return (PAD_INDEX,) * (n - len(window)) + window


def _row_vector(row: EnhancedInstance, norm: NormalizationParams) -> tuple[float, ...]:
    inter = row.inter
    dp = 0.0 if row.intra.delta_proc is None else float(row.intra.delta_proc)
    return (
        norm.normalize("delta_start", float(row.intra.delta_start)),
        norm.normalize("delta_proc", dp),
        norm.normalize("wip", float(inter.wip)) if inter else 0.0,
        norm.normalize("utilization", float(inter.utilization)) if inter else 0.0,
        norm.normalize("lambda", inter.lam) if inter else 0.0,
    )


def build_ngrams(
    prefix: Sequence[EnhancedInstance],
    n: int,
    vocab: ActivityVocabulary,
    norm: NormalizationParams,
    complete: bool = True,
) -> list[NgramSample]:
    """Samples for every position of the prefix, plus a terminal end-of-trace
    sample when the trace is complete.

    ``prefix`` must carry per-row inter features (see features.enhance_rows).
    """
    if n < 1:
        raise ValueError(f"n-gram size must be >= 1, got {n}")
    if not prefix:
        raise LogValidationError("cannot build n-grams from an empty prefix")

    indices = [vocab.encode(row.base.activity) for row in prefix]
    vectors = [_row_vector(row, norm) for row in prefix]
    zero_row = (0.0,) * len(CONTINUOUS_FEATURES)
    case_id = prefix[0].base.case_id

    samples = []
    for k, row in enumerate(prefix):
        ctx_act = pad_context(indices[:k], n)
        ctx_cont = tuple(
            zero_row if a == PAD_INDEX else vectors[k - (n - i)]
            for i, a in enumerate(ctx_act)
        )
        ds_raw = row.intra.delta_start
        dp_raw = row.intra.delta_proc
        wip = prefix[k - 1].inter.wip if k > 0 and prefix[k - 1].inter else 0
        samples.append(
            NgramSample(
                case_id=case_id,
                position=k,
                context_activities=ctx_act,
                context_continuous=ctx_cont,
                target_activity=indices[k],
                target_delta_start=norm.normalize("delta_start", float(ds_raw)),
                target_delta_proc=(
                    None
                    if dp_raw is None
                    else norm.normalize("delta_proc", float(dp_raw))
                ),
                target_delta_start_raw=ds_raw,
                target_delta_proc_raw=dp_raw,
                t_eval_wip=wip,
            )
        )
    if complete:
        m = len(prefix)
        ctx_act = pad_context(indices, n)
        ctx_cont = tuple(
            zero_row if a == PAD_INDEX else vectors[m - (n - i)]
            for i, a in enumerate(ctx_act)
        )
        samples.append(
            NgramSample(
                case_id=case_id,
                position=-1,
                context_activities=ctx_act,
                context_continuous=ctx_cont,
                target_activity=vocab.eot_index,
                target_delta_start=norm.normalize("delta_start", 0.0),
                target_delta_proc=norm.normalize("delta_proc", 0.0),
                target_delta_start_raw=0,
                target_delta_proc_raw=0,
                t_eval_wip=prefix[-1].inter.wip if prefix[-1].inter else 0,
            )
        )
    return samples


def samples_to_csv(samples: Sequence[NgramSample], target=None) -> Optional[str]:
    """Debug dump, one row per sample.

    Columns: case_id, position, context activities (space-joined), one
    space-joined column per continuous feature (CONTINUOUS_FEATURES order),
    target_activity, target_delta_start, target_delta_proc (raw seconds,
    empty when open).
    """
    if target is None:
        buf = io.StringIO()
        samples_to_csv(samples, buf)
        return buf.getvalue()
    if isinstance(target, str) or hasattr(target, "__fspath__"):
        with open(target, "w", newline="", encoding="utf-8") as fh:
            samples_to_csv(samples, fh)
        return None
    writer = csv.writer(target)
    writer.writerow(
        ["case_id", "position", "context_activities"]
        + [f"context_{name}" for name in CONTINUOUS_FEATURES]
        + ["target_activity", "target_delta_start", "target_delta_proc"]
    )
    for s in samples:
        feature_cols = [
            " ".join(f"{row[i]:.6f}" for row in s.context_continuous)
            for i in range(len(CONTINUOUS_FEATURES))
        ]
        writer.writerow(
            [
                s.case_id,
                s.position,
                " ".join(map(str, s.context_activities)),
                *feature_cols,
                s.target_activity,
                s.target_delta_start_raw,
                "" if s.target_delta_proc_raw is None else s.target_delta_proc_raw,
            ]
        )
    return None

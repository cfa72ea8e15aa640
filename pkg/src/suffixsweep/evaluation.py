"""Scoring predicted suffixes against ground truth.

Control flow is scored with the Damerau-Levenshtein distance over activity
label sequences, normalized by the longer sequence's length.  Times are scored
with the mean absolute error over inter-start and processing times, aligned
position-wise up to the shorter suffix (mismatched tails are counted, not
scored).  Instances that were ongoing at the cutoff contribute their
processing-time error only under the multi-model architecture; the
single-model baseline cannot predict them in isolation and they are excluded
from its score.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

from . import kernels
from .errors import SuffixSweepError
from .event_log import ActivityInstanceLog, Timestamp
from .sweepline import PROV_COMPLETED, PROV_PREDICTED, PredictedRecord


def damerau_levenshtein(a: Sequence, b: Sequence, variant: str = "osa") -> int:
    """Edit distance counting insertions, deletions, substitutions and
    adjacent transpositions.

    The default ``osa`` (optimal string alignment) variant never edits a
    transposed pair again; ``full`` allows it.  OSA violates the triangle
    inequality, which is documented and accepted here.
    """
    if variant == "osa":
        ids: dict = {}
        enc_a = [ids.setdefault(x, len(ids)) for x in a]
        enc_b = [ids.setdefault(x, len(ids)) for x in b]
        return kernels.osa_distance(enc_a, enc_b)
    if variant == "full":
        return _full_damerau_levenshtein(list(a), list(b))
    raise ValueError(f"unknown distance variant: {variant!r}")


def _full_damerau_levenshtein(a: list, b: list) -> int:
    """Unrestricted Damerau-Levenshtein (transposed pairs may be re-edited)."""
    la, lb = len(a), len(b)
    maxdist = la + lb
    da: dict = {}
    d = [[0] * (lb + 2) for _ in range(la + 2)]
    d[0][0] = maxdist
    for i in range(la + 1):
        d[i + 1][0] = maxdist
        d[i + 1][1] = i
    for j in range(lb + 1):
        d[0][j + 1] = maxdist
        d[1][j + 1] = j
    for i in range(1, la + 1):
        db = 0
        for j in range(1, lb + 1):
            k = da.get(b[j - 1], 0)
            l = db
            if a[i - 1] == b[j - 1]:
                cost = 0
                db = j
            else:
                cost = 1
            d[i + 1][j + 1] = min(
                d[i][j] + cost,
                d[i + 1][j] + 1,
                d[i][j + 1] + 1,
                d[k][l] + (i - k - 1) + 1 + (j - l - 1),
            )
        da[a[i - 1]] = i
    return d[la + 1][lb + 1]


def normalized_dl(a: Sequence, b: Sequence, variant: str = "osa") -> float:
    """Distance divided by the longer length; 0 when both sequences are empty."""
    longer = max(len(a), len(b))
    if longer == 0:
        return 0.0
    return damerau_levenshtein(a, b, variant=variant) / longer


def mae(predicted: Sequence[float], actual: Sequence[float]) -> Optional[float]:
    """Mean absolute error over position-wise aligned values (up to the
    shorter length).  None when nothing aligns."""
    n = min(len(predicted), len(actual))
    if n == 0:
        return None
    return sum(abs(predicted[i] - actual[i]) for i in range(n)) / n


@dataclass
class CaseScore:
    case_id: str
    dl: float
    predicted_len: int
    actual_len: int
    abs_errors_delta_start: list[float] = field(default_factory=list)
    abs_errors_delta_proc: list[float] = field(default_factory=list)
    length_mismatch: bool = False


@dataclass
class EvalReport:
    per_case: list[CaseScore]
    mean_normalized_dl: float
    mae_delta_start: Optional[float]
    mae_delta_proc: Optional[float]
    scored_cases: int
    skipped_cases: int
    length_mismatches: int
    config: dict

    def to_dict(self) -> dict:
        return {
            "mean_normalized_dl": self.mean_normalized_dl,
            "mae_delta_start_seconds": self.mae_delta_start,
            "mae_delta_proc_seconds": self.mae_delta_proc,
            "scored_cases": self.scored_cases,
            "skipped_cases": self.skipped_cases,
            "length_mismatches": self.length_mismatches,
            "config": self.config,
            "per_case": [
                {
                    "case_id": s.case_id,
                    "normalized_dl": s.dl,
                    "predicted_len": s.predicted_len,
                    "actual_len": s.actual_len,
                    "length_mismatch": s.length_mismatch,
                }
                for s in self.per_case
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def evaluate_run(
    records: Sequence[PredictedRecord],
    ground_truth: ActivityInstanceLog,
    cutoff: Timestamp,
    include_ongoing: bool = True,
    variant: str = "osa",
) -> EvalReport:
    """Score a predicted log (from the sweep engine or its CSV) against a
    complete ground-truth log.

    ``include_ongoing`` adds the processing-time errors of instances that were
    open at the cutoff (multi-model scoring); disable it for the single-model
    baseline.
    """
    by_case: dict[str, list[PredictedRecord]] = {}
    for r in records:
        by_case.setdefault(r.case_id, []).append(r)

    per_case: list[CaseScore] = []
    ds_errors: list[float] = []
    dp_errors: list[float] = []
    skipped = 0
    for case_id in sorted(by_case):
        rows = by_case[case_id]
        truth = ground_truth.traces.get(case_id)
        if truth is None:
            raise SuffixSweepError(f"case {case_id!r} missing from the ground-truth log")
        prefix_rows = [r for r in rows if r.provenance != PROV_PREDICTED]
        predicted = [r for r in rows if r.provenance == PROV_PREDICTED]
        p = len(prefix_rows)
        actual = truth.instances[p:]
        if any(inst.end is None for inst in truth.instances):
            raise SuffixSweepError(f"ground-truth trace {case_id!r} is incomplete")

        score = CaseScore(
            case_id=case_id,
            dl=normalized_dl(
                [r.activity for r in predicted],
                [inst.activity for inst in actual],
                variant=variant,
            ),
            predicted_len=len(predicted),
            actual_len=len(actual),
            length_mismatch=len(predicted) != len(actual),
        )

        # time errors over aligned suffix positions
        for j in range(min(len(predicted), len(actual))):
            true_inst = actual[j]
            prev_start = (
                truth.instances[p + j - 1].start if p + j > 0 else true_inst.start
            )
            true_ds = true_inst.start - prev_start
            true_dp = true_inst.end - true_inst.start
            score.abs_errors_delta_start.append(abs(predicted[j].delta_start - true_ds))
            if predicted[j].delta_proc is not None:
                score.abs_errors_delta_proc.append(
                    abs(predicted[j].delta_proc - true_dp)
                )

        # processing times filled in for instances open at the cutoff
        if include_ongoing:
            for j, r in enumerate(prefix_rows):
                if r.provenance == PROV_COMPLETED and r.delta_proc is not None:
                    true_inst = truth.instances[j]
                    true_dp = true_inst.end - true_inst.start
                    score.abs_errors_delta_proc.append(abs(r.delta_proc - true_dp))

        per_case.append(score)
        ds_errors.extend(score.abs_errors_delta_start)
        dp_errors.extend(score.abs_errors_delta_proc)

    if not per_case:
        raise SuffixSweepError("nothing to evaluate: no predicted cases")
    return EvalReport(
        per_case=per_case,
        mean_normalized_dl=sum(s.dl for s in per_case) / len(per_case),
        mae_delta_start=(sum(ds_errors) / len(ds_errors)) if ds_errors else None,
        mae_delta_proc=(sum(dp_errors) / len(dp_errors)) if dp_errors else None,
        scored_cases=len(per_case),
        skipped_cases=skipped,
        length_mismatches=sum(1 for s in per_case if s.length_mismatch),
        config={
            "cutoff": cutoff,
            "include_ongoing": include_ongoing,
            "distance_variant": variant,
        },
    )


def per_case_csv(report: EvalReport, target) -> None:
    import csv

    def _write(fh):
        writer = csv.writer(fh)
        writer.writerow(
            ["case_id", "normalized_dl", "predicted_len", "actual_len", "length_mismatch"]
        )
        for s in report.per_case:
            writer.writerow(
                [s.case_id, f"{s.dl:.6f}", s.predicted_len, s.actual_len, int(s.length_mismatch)]
            )

    if isinstance(target, str) or hasattr(target, "__fspath__"):
        with open(target, "w", newline="", encoding="utf-8") as fh:
            _write(fh)
    else:
        _write(target)

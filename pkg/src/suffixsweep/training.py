"""Offline phase: turn a training log into encoded samples and fitted bundles."""

from __future__ import annotations

from typing import Optional

from .encoding import (
    DEFAULT_NGRAM,
    NgramSample,
    build_ngrams,
    build_vocabulary,
    fit_normalization,
)
from .event_log import ActivityInstanceLog
from .features import LambdaWindow, WorkloadIndex, default_tau, enhance_rows
from .predictors import (
    MMBundle,
    SMBundle,
    train_alpha,
    train_beta,
    train_gamma,
    train_joint,
)


def training_samples(
    train_log: ActivityInstanceLog,
    n: int = DEFAULT_NGRAM,
    eot_label: str = "EOT",
    tau: Optional[LambdaWindow] = None,
    tau_fraction: float = 0.2,
):
    """Enhance every training trace and emit its n-gram samples.

    Returns (samples, vocab, norm, tau, max_trace_len).  Inter-case features
    are evaluated against the full training log; tau is fitted on the
    training log and meant to be frozen for online use.
    """
    vocab = build_vocabulary(train_log, eot_label=eot_label)
    if tau is None:
        tau = default_tau(train_log, fraction=tau_fraction)
    index = WorkloadIndex(train_log)
    enhanced = [enhance_rows(index, trace, tau) for trace in train_log]
    all_rows = [row for rows in enhanced for row in rows]
    norm = fit_normalization(all_rows)
    samples: list[NgramSample] = []
    for rows in enhanced:
        samples.extend(build_ngrams(rows, n, vocab, norm, complete=True))
    max_trace_len = max(len(trace) for trace in train_log)
    return samples, vocab, norm, tau, max_trace_len


def fit_mm_bundle(
    train_log: ActivityInstanceLog,
    n: int = DEFAULT_NGRAM,
    use_inter: bool = False,
    eot_label: str = "EOT",
    tau_fraction: float = 0.2,
) -> MMBundle:
    samples, vocab, norm, tau, max_len = training_samples(
        train_log, n=n, eot_label=eot_label, tau_fraction=tau_fraction
    )
    return MMBundle(
        alpha=train_alpha(samples, n),
        beta=train_beta(samples, n, use_inter=use_inter),
        gamma=train_gamma(samples, n, use_inter=use_inter),
        vocab=vocab,
        norm=norm,
        tau=tau.tau,
        ngram=n,
        max_trace_len=max_len,
        use_inter=use_inter,
    )


def fit_sm_bundle(
    train_log: ActivityInstanceLog,
    n: int = DEFAULT_NGRAM,
    use_inter: bool = False,
    eot_label: str = "EOT",
    tau_fraction: float = 0.2,
) -> SMBundle:
    samples, vocab, norm, tau, max_len = training_samples(
        train_log, n=n, eot_label=eot_label, tau_fraction=tau_fraction
    )
    return SMBundle(
        joint=train_joint(samples, n, use_inter=use_inter),
        vocab=vocab,
        norm=norm,
        tau=tau.tau,
        ngram=n,
        max_trace_len=max_len,
        use_inter=use_inter,
    )

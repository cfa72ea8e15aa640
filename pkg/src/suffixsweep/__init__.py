"""Case suffix prediction with activity start and end times.

Given an event log whose records carry both start and end timestamps, this
package predicts how every ongoing case will continue: the remaining activity
instances, their inter-start times and their processing times.  All open
cases are advanced together by a sweep-line over time so that workload
features (work in progress, per-activity utilization, arrival rate) computed
during prediction reflect the other cases' predicted futures.
"""

from .encoding import (
    ActivityVocabulary,
    NgramSample,
    NormalizationParams,
    build_ngrams,
    build_vocabulary,
    fit_normalization,
)
from .errors import (
    ConfigError,
    EncodingError,
    LogParseError,
    LogValidationError,
    PredictorError,
    SuffixSweepError,
)
from .event_log import (
    ActivityInstance,
    ActivityInstanceLog,
    CutoffSplit,
    Trace,
    build_log,
    cutoff_at_fraction,
    extract_test_log,
    extract_training_log,
    parse_log,
    serialize_log,
    temporal_split,
)
from .evaluation import EvalReport, damerau_levenshtein, evaluate_run, normalized_dl
from .features import (
    LambdaWindow,
    WorkloadIndex,
    default_tau,
    enhance_prefix,
    enhance_rows,
    intra_features,
)
from .predictors import (
    MMBundle,
    OracleBundle,
    Query,
    RemoteBundle,
    SamplingStrategy,
    SMBundle,
    load_bundle,
    save_bundle,
)
from .sweepline import (
    PredictedRecord,
    SweepConfig,
    SweepResult,
    run_sweep,
    run_sweep_sm,
)
from .training import fit_mm_bundle, fit_sm_bundle, training_samples

__version__ = "0.1.0"

__all__ = [
    "ActivityInstance",
    "ActivityInstanceLog",
    "ActivityVocabulary",
    "ConfigError",
    "CutoffSplit",
    "EncodingError",
    "EvalReport",
    "LambdaWindow",
    "LogParseError",
    "LogValidationError",
    "MMBundle",
    "NgramSample",
    "NormalizationParams",
    "OracleBundle",
    "PredictedRecord",
    "PredictorError",
    "Query",
    "RemoteBundle",
    "SMBundle",
    "SamplingStrategy",
    "SuffixSweepError",
    "SweepConfig",
    "SweepResult",
    "Trace",
    "WorkloadIndex",
    "build_log",
    "build_ngrams",
    "build_vocabulary",
    "cutoff_at_fraction",
    "damerau_levenshtein",
    "default_tau",
    "enhance_prefix",
    "enhance_rows",
    "evaluate_run",
    "extract_test_log",
    "extract_training_log",
    "fit_mm_bundle",
    "fit_normalization",
    "fit_sm_bundle",
    "intra_features",
    "load_bundle",
    "normalized_dl",
    "parse_log",
    "run_sweep",
    "run_sweep_sm",
    "save_bundle",
    "serialize_log",
    "temporal_split",
    "training_samples",
]

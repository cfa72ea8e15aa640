import json
import random
import sys

import pytest

from suffixsweep import synth, training
from suffixsweep.encoding import build_vocabulary
from suffixsweep.errors import ConfigError, PredictorError
from suffixsweep.event_log import extract_training_log, cutoff_at_fraction
from suffixsweep.predictors import (
    AlphaModel,
    OracleBundle,
    Query,
    RemoteBundle,
    SamplingStrategy,
    load_bundle,
    sample_activity,
    save_bundle,
    validate_distribution,
)

from conftest import branch_spec, chain_spec


def make_query(context, case_id="x", position=0, wip=0):
    return Query(
        case_id=case_id,
        position=position,
        context=tuple(context),
        t_eval=0,
        wip=wip,
        utilization=0,
        lam=0.0,
        last_start=0,
    )


# -- sampling ---------------------------------------------------------------


def test_argmax_breaks_ties_to_lowest_index():
    strategy = SamplingStrategy(kind="argmax")
    assert sample_activity({3: 0.4, 1: 0.4, 2: 0.2}, strategy) == 1


def test_random_choice_is_seeded_and_reproducible():
    dist = {1: 0.3, 2: 0.5, 3: 0.2}
    draws_a = [sample_activity(dist, SamplingStrategy("random_choice", seed=5)) for _ in range(1)]
    s1 = SamplingStrategy("random_choice", seed=5)
    s2 = SamplingStrategy("random_choice", seed=5)
    seq1 = [sample_activity(dist, s1) for _ in range(50)]
    seq2 = [sample_activity(dist, s2) for _ in range(50)]
    assert seq1 == seq2
    assert set(seq1) <= {1, 2, 3}
    assert draws_a[0] in dist


def test_random_choice_matches_distribution_roughly():
    dist = {1: 0.8, 2: 0.2}
    s = SamplingStrategy("random_choice", seed=11)
    draws = [sample_activity(dist, s) for _ in range(2000)]
    assert 0.7 < draws.count(1) / len(draws) < 0.9


def test_daemon_hook_requires_policy():
    with pytest.raises(ConfigError):
        sample_activity({1: 1.0}, SamplingStrategy("daemon_hook"))
    s = SamplingStrategy("daemon_hook", policy=lambda dist: max(dist))
    assert sample_activity({1: 0.9, 7: 0.1}, s) == 7


def test_unknown_strategy_rejected():
    with pytest.raises(ConfigError):
        SamplingStrategy(kind="greedy")


def test_invalid_distribution_rejected():
    with pytest.raises(PredictorError):
        validate_distribution({1: 0.5, 2: 0.6})
    with pytest.raises(PredictorError):
        validate_distribution({1: -0.5, 2: 1.5})
    validate_distribution({1: 0.25, 2: 0.75})


# -- native models on the support log ---------------------------------------


@pytest.fixture
def support_bundles(support_log):
    cutoff = cutoff_at_fraction(support_log, 0.8)
    train = extract_training_log(support_log, cutoff)  # only c1
    mm = training.fit_mm_bundle(train, n=3)
    sm = training.fit_sm_bundle(train, n=3)
    return mm, sm


def test_mm_conditional_means_match_hand_computation(support_bundles):
    mm, _ = support_bundles
    vocab = mm.vocab
    q = make_query((1, 2, 0))  # padded on the right never happens; use real ctx below
    ctx = (0, 1, 2)  # pad, Receive, Assign
    q = make_query(ctx, position=2)
    dist = mm.next_activity(q)
    assert dist == {vocab.encode("Resolve"): 1.0}
    resolve = vocab.encode("Resolve")
    assert mm.inter_start(q, resolve) == 600.0  # Assign 08:10 -> Resolve 08:20
    assert mm.proc_time(q, resolve, 600.0) == 2400.0  # Resolve takes 40 min
    # end-of-trace carries zero durations
    assert mm.inter_start(q, vocab.eot_index) == 0.0
    assert mm.proc_time(q, vocab.eot_index, 0.0) == 0.0


def test_alpha_backoff_to_shorter_context(support_bundles):
    mm, _ = support_bundles
    vocab = mm.vocab
    # unseen full context (Notify, Notify, Assign) backs off to the suffix
    # (Assign,) which was followed by Resolve in training
    dist = mm.next_activity(make_query((4, 4, 2)))
    assert dist == {vocab.encode("Resolve"): 1.0}


def test_alpha_untrained_context_falls_back_to_global():
    model = AlphaModel(2)
    model.observe((0, 1), 2)
    dist = model.predict((9, 9))  # nothing matches: global table answers
    assert dist == {2: 1.0}


def test_sm_blends_instead_of_conditioning(support_bundles):
    _, sm = support_bundles
    vocab = sm.vocab
    # context (pad, pad, Receive): next is Assign (ds 600, dp 300)
    q = make_query((0, 0, 1), position=1)
    dist = sm.next_activity(q)
    assert dist == {vocab.encode("Assign"): 1.0}
    assert sm.inter_start(q, vocab.encode("Assign")) == 600.0
    assert sm.proc_time(q, vocab.encode("Assign"), 600.0) == 300.0
    # the blended value ignores which next activity was sampled
    assert sm.proc_time(q, vocab.encode("Resolve"), 600.0) == 300.0


def test_blend_mixes_branch_durations():
    spec = branch_spec(p_short=0.7, seed=3)
    log = synth.generate(spec, 400)
    cutoff = cutoff_at_fraction(log, 0.8)
    train = extract_training_log(log, cutoff)
    mm = training.fit_mm_bundle(train, n=3)
    sm = training.fit_sm_bundle(train, n=3)
    b, c = mm.vocab.encode("B"), mm.vocab.encode("C")
    ctx = (0, 0, mm.vocab.encode("A"))
    q = make_query(ctx, position=1)
    assert mm.proc_time(q, b, 0.0) == 60.0
    assert mm.proc_time(q, c, 0.0) == 600.0
    blended = sm.proc_time(q, b, 0.0)
    assert 60.0 < blended < 600.0
    # conditioning beats blending in expectation when branches differ
    dist = mm.next_activity(q)
    p_b = dist[b]
    mm_mae = p_b * abs(60 - 60) + (1 - p_b) * abs(600 - 600)
    sm_mae = p_b * abs(blended - 60) + (1 - p_b) * abs(blended - 600)
    assert mm_mae < sm_mae


# -- serialization ----------------------------------------------------------


def test_bundle_roundtrip_mm(support_bundles, tmp_path):
    mm, _ = support_bundles
    path = tmp_path / "mm.json"
    save_bundle(mm, path)
    loaded = load_bundle(path)
    assert loaded.kind == "mm"
    assert loaded.vocab == mm.vocab
    assert loaded.tau == mm.tau
    q = make_query((0, 1, 2), position=2)
    assert loaded.next_activity(q) == mm.next_activity(q)
    r = mm.vocab.encode("Resolve")
    assert loaded.inter_start(q, r) == mm.inter_start(q, r)
    assert loaded.proc_time(q, r, 0.0) == mm.proc_time(q, r, 0.0)


def test_bundle_roundtrip_sm(support_bundles, tmp_path):
    _, sm = support_bundles
    path = tmp_path / "sm.json"
    save_bundle(sm, path)
    loaded = load_bundle(path)
    assert loaded.kind == "sm"
    q = make_query((0, 0, 1), position=1)
    assert loaded.next_activity(q) == sm.next_activity(q)
    assert loaded.inter_start(q, 2) == sm.inter_start(q, 2)


def test_load_rejects_foreign_files(tmp_path):
    path = tmp_path / "bogus.json"
    path.write_text(json.dumps({"format": "something-else"}), encoding="utf-8")
    with pytest.raises(Exception, match="not a"):
        load_bundle(path)


# -- oracle ------------------------------------------------------------------


def test_oracle_answers_from_ground_truth(support_log):
    vocab = build_vocabulary(support_log)
    oracle = OracleBundle(truth=support_log, vocab=vocab)
    act, ds, dp = oracle.lookup("c1", 2)
    assert (act, ds, dp) == ("Resolve", 600, 2400)
    act, ds, dp = oracle.lookup("c1", 4)  # past the end
    assert (act, ds, dp) == ("EOT", 0, 0)
    q = make_query((0, 1, 2), case_id="c1", position=2)
    assert oracle.next_activity(q) == {vocab.encode("Resolve"): 1.0}
    assert oracle.inter_start(q, 3) == 600.0
    with pytest.raises(PredictorError):
        oracle.lookup("nope", 0)


# -- remote predictor protocol ----------------------------------------------


REMOTE_SCRIPT = """\
import json
import sys

for line in sys.stdin:
    req = json.loads(line)
    if req["op"] == "next":
        resp = {"probabilities": {"1": 0.25, "2": 0.75}}
    elif req["op"] == "inter_start":
        resp = {"seconds": req["next_activity"] * 10}
    else:
        resp = {"seconds": req["delta_start"] + 42}
    sys.stdout.write(json.dumps(resp) + "\\n")
    sys.stdout.flush()
"""


def test_remote_bundle_roundtrip(support_log, tmp_path):
    script = tmp_path / "predictor.py"
    script.write_text(REMOTE_SCRIPT, encoding="utf-8")
    vocab = build_vocabulary(support_log)
    with RemoteBundle([sys.executable, str(script)], vocab, ngram=3, tau=2160) as remote:
        q = make_query((0, 1, 2), position=2, wip=4)
        assert remote.next_activity(q) == {1: 0.25, 2: 0.75}
        assert remote.inter_start(q, 2) == 20.0
        assert remote.proc_time(q, 2, 7.0) == 49.0
        assert remote.completion_proc(q, 1, 3.0) == 45.0
    # after close the process is gone and further calls fail
    with pytest.raises(PredictorError):
        remote.next_activity(q)

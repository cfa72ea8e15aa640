import random

import pytest

from suffixsweep import synth
from suffixsweep.errors import ConfigError

from conftest import branch_spec, chain_spec, random_spec


def test_generation_is_deterministic():
    a = synth.generate(chain_spec(seed=9), 50)
    b = synth.generate(chain_spec(seed=9), 50)
    assert [(i.case_id, i.activity, i.start, i.end) for i in a.instances()] == [
        (i.case_id, i.activity, i.start, i.end) for i in b.instances()
    ]
    # the seed matters once the process is stochastic
    c = synth.generate(branch_spec(seed=10), 50)
    d = synth.generate(branch_spec(seed=11), 50)
    assert [(i.activity, i.start) for i in c.instances()] != [
        (i.activity, i.start) for i in d.instances()
    ]


def test_chain_timestamps_are_exact():
    spec = chain_spec(durations=(30, 60, 45), arrival=120, transfer=10, seed=0)
    log = synth.generate(spec, 5)
    assert len(log) == 5
    t0 = spec.start_time
    for k, trace in enumerate(log):
        assert [i.activity for i in trace.instances] == ["A", "B", "C"]
        arrive = t0 + 120 * k
        a, b, c = trace.instances
        assert (a.start, a.end) == (arrive, arrive + 30)
        assert (b.start, b.end) == (a.end + 10, a.end + 10 + 60)
        assert (c.start, c.end) == (b.end + 10, b.end + 10 + 45)


def test_branch_probabilities_roughly_respected():
    log = synth.generate(branch_spec(p_short=0.7, seed=2), 1000)
    branches = [t.instances[1].activity for t in log]
    assert 0.65 < branches.count("B") / len(branches) < 0.75


def test_duration_distributions():
    rng = random.Random(0)
    assert synth.constant(30).sample(rng) == 30
    u = [synth.uniform(10, 20).sample(rng) for _ in range(200)]
    assert all(10 <= x <= 20 for x in u)
    e = [synth.exponential(50).sample(rng) for _ in range(2000)]
    assert all(x >= 0 for x in e)
    assert 40 < sum(e) / len(e) < 60
    with pytest.raises(ConfigError):
        synth.DurationDist("normal", (1.0,))
    with pytest.raises(ConfigError):
        synth.constant(-5)


def test_spec_validation():
    with pytest.raises(ConfigError, match="sums to"):
        synth.ProcessSpec(
            activities=["A"],
            transitions={"A": {synth.END: 0.5}},
            durations={"A": synth.constant(10)},
        )
    with pytest.raises(ConfigError, match="unknown activity"):
        synth.ProcessSpec(
            activities=["A"],
            transitions={"A": {"Z": 1.0}},
            durations={"A": synth.constant(10)},
        )
    with pytest.raises(ConfigError, match="no duration"):
        synth.ProcessSpec(
            activities=["A", "B"],
            transitions={"A": {"B": 1.0}, "B": {synth.END: 1.0}},
            durations={"A": synth.constant(10)},
        )
    with pytest.raises(ConfigError, match="arrival"):
        synth.ProcessSpec(
            activities=["A"],
            transitions={"A": {synth.END: 1.0}},
            durations={"A": synth.constant(10)},
            arrival_kind="burst",
        )


def test_spec_json_roundtrip():
    spec = branch_spec(p_short=0.6, seed=4)
    again = synth.ProcessSpec.from_json(spec.to_json())
    assert again.activities == spec.activities
    assert again.transitions == spec.transitions
    assert again.durations == spec.durations
    assert again.seed == spec.seed
    assert [
        (i.start, i.end) for i in synth.generate(again, 20).instances()
    ] == [(i.start, i.end) for i in synth.generate(spec, 20).instances()]


def test_single_server_serializes_instances():
    spec = synth.ProcessSpec(
        activities=["A"],
        transitions={"A": {synth.END: 1.0}},
        durations={"A": synth.exponential(80)},
        arrival_kind="poisson",
        arrival_param=1 / 60,
        servers={"A": 1},
        seed=5,
    )
    log = synth.generate(spec, 200)
    intervals = sorted((i.start, i.end) for i in log.instances())
    for (s1, e1), (s2, e2) in zip(intervals, intervals[1:]):
        assert e1 <= s2  # one server: never two instances in service at once


def test_busy_fraction_matches_offered_load():
    # one unlimited-server activity: time-average busy instances must equal
    # arrival rate x mean service time (within sampling error)
    interval, mean_service = 50, 100
    spec = synth.ProcessSpec(
        activities=["A"],
        transitions={"A": {synth.END: 1.0}},
        durations={"A": synth.exponential(mean_service)},
        arrival_kind="fixed",
        arrival_param=interval,
        seed=6,
    )
    log = synth.generate(spec, 3000)
    starts = [i.start for i in log.instances()]
    total_busy = sum(i.end - i.start for i in log.instances())
    span = max(i.end for i in log.instances()) - min(starts)
    expected = mean_service / interval
    assert total_busy / span == pytest.approx(expected, rel=0.1)


def test_random_specs_always_generate(support_log):
    rng = random.Random(123)
    for _ in range(10):
        spec = random_spec(rng)
        log = synth.generate(spec, 20)
        assert len(log) == 20
        for trace in log:
            starts = [i.start for i in trace.instances]
            assert starts == sorted(starts)
            assert all(i.end is not None for i in trace.instances)

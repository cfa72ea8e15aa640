"""Shared fixtures: a small hand-checked support log and synthetic specs."""

from __future__ import annotations

import io

import pytest

from suffixsweep import synth
from suffixsweep.event_log import parse_log, parse_timestamp

# --------------------------------------------------------------------------
# A three-case support-desk log, small enough to verify every number by hand.
#
#   case 1: Receive 08:00-08:05, Assign 08:10-08:15,
#           Resolve 08:20-09:00, Notify 09:05-09:10     (complete)
#   case 2: Receive 09:15-09:20, Assign 09:25-(open)
#   case 3: Receive 10:00-10:05, Assign 10:10-10:15, Resolve 10:20-11:00
#
# Log duration: 08:00 -> 11:00 = 10800 s.  The 80% cutoff lands at 10:24.

SUPPORT_CSV = """\
case_id,activity,start,end
c1,Receive,2024-01-01T08:00:00Z,2024-01-01T08:05:00Z
c1,Assign,2024-01-01T08:10:00Z,2024-01-01T08:15:00Z
c1,Resolve,2024-01-01T08:20:00Z,2024-01-01T09:00:00Z
c1,Notify,2024-01-01T09:05:00Z,2024-01-01T09:10:00Z
c2,Receive,2024-01-01T09:15:00Z,2024-01-01T09:20:00Z
c2,Assign,2024-01-01T09:25:00Z,
c3,Receive,2024-01-01T10:00:00Z,2024-01-01T10:05:00Z
c3,Assign,2024-01-01T10:10:00Z,2024-01-01T10:15:00Z
c3,Resolve,2024-01-01T10:20:00Z,2024-01-01T11:00:00Z
"""


def at(hh: int, mm: int) -> int:
    """Epoch seconds for hh:mm on the support log's day (UTC)."""
    return parse_timestamp(f"2024-01-01T{hh:02d}:{mm:02d}:00Z", "iso")


@pytest.fixture
def support_log():
    return parse_log(io.StringIO(SUPPORT_CSV))


@pytest.fixture
def support_csv(tmp_path):
    path = tmp_path / "support.csv"
    path.write_text(SUPPORT_CSV, encoding="utf-8")
    return path


# --------------------------------------------------------------------------
# Synthetic process builders


def chain_spec(durations=(30, 60, 45), arrival=120, seed=0, transfer=10):
    """Deterministic A -> B -> C chain with constant durations."""
    names = [chr(ord("A") + i) for i in range(len(durations))]
    transitions = {a: {b: 1.0} for a, b in zip(names, names[1:])}
    transitions[names[-1]] = {synth.END: 1.0}
    return synth.ProcessSpec(
        activities=names,
        transitions=transitions,
        durations={a: synth.constant(d) for a, d in zip(names, durations)},
        arrival_kind="fixed",
        arrival_param=arrival,
        transfer=synth.constant(transfer),
        seed=seed,
    )


def branch_spec(p_short=0.5, short=60, long=600, arrival=30, seed=0, dur_a=50):
    """A then one of two branch activities with very different durations."""
    return synth.ProcessSpec(
        activities=["A", "B", "C"],
        transitions={
            "A": {"B": p_short, "C": 1.0 - p_short},
            "B": {synth.END: 1.0},
            "C": {synth.END: 1.0},
        },
        durations={
            "A": synth.constant(dur_a),
            "B": synth.constant(short),
            "C": synth.constant(long),
        },
        arrival_kind="fixed",
        arrival_param=arrival,
        seed=seed,
    )


def random_spec(rng):
    """A randomized stochastic process for termination/sanity sweeps."""
    n_act = rng.randint(2, 5)
    names = [chr(ord("A") + i) for i in range(n_act)]
    transitions = {}
    for i, a in enumerate(names):
        row = {}
        # forward edges plus a chance to loop back or stop
        targets = names[i + 1:] or []
        p_end = rng.uniform(0.2, 0.6) if not targets else rng.uniform(0.05, 0.3)
        row[synth.END] = p_end
        rest = 1.0 - p_end
        choices = targets + ([names[rng.randrange(n_act)]] if rng.random() < 0.5 else [])
        if not choices:
            row[synth.END] = 1.0
        else:
            share = rest / len(choices)
            for t in choices:
                row[t] = row.get(t, 0.0) + share
        transitions[a] = row
    durations = {}
    for a in names:
        kind = rng.choice(["constant", "uniform", "exponential"])
        if kind == "constant":
            durations[a] = synth.constant(rng.randint(10, 300))
        elif kind == "uniform":
            lo = rng.randint(5, 100)
            durations[a] = synth.uniform(lo, lo + rng.randint(1, 200))
        else:
            durations[a] = synth.exponential(rng.randint(20, 200))
    arrival_kind = rng.choice(["fixed", "poisson"])
    arrival_param = rng.randint(20, 200) if arrival_kind == "fixed" else 1.0 / rng.randint(20, 200)
    return synth.ProcessSpec(
        activities=names,
        transitions=transitions,
        durations=durations,
        arrival_kind=arrival_kind,
        arrival_param=arrival_param,
        seed=rng.randrange(2**31),
    )

import random
from fractions import Fraction

import pytest

from oracles import NaiveMachine, brute_force_events, brute_force_omega
from ait_workbench.encodings import lex_string
from ait_workbench.enumerator import (
    PLAIN,
    PREFIX,
    EnumerationState,
    advance,
    counting_matrix,
    counting_report,
    dumps,
    enumerate_to,
    implied_constant,
    loads,
    plain_prefix_overhead,
    query_C,
    query_K,
    restore,
    snapshot,
    table_csv,
)
from ait_workbench.errors import CorruptLedger, FingerprintMismatch, ResourceLimit
from ait_workbench.machine import DEFAULT_PROFILE, Halted, run_plain, run_prefix

# frozen from the naive interpreter's brute force over all 2^23 - 1 strings
OMEGA_22 = Fraction(10553, 524288)


def antichain(words):
    words = sorted(words)
    return all(not b.startswith(a) for a, b in zip(words, words[1:]))


def test_stage_zero_is_empty():
    st = enumerate_to(DEFAULT_PROFILE, 0)
    assert st.events == {} and len(st.K) == 0 and st.omega() == 0


def test_omega_22_frozen(state22):
    assert state22.omega() == OMEGA_22
    assert 0 < state22.omega() < 1


@pytest.mark.slow
def test_omega_22_brute_force():
    assert brute_force_omega(NaiveMachine(), 22) == OMEGA_22


@pytest.mark.parametrize("stage", [8, 12, 16])
def test_events_match_brute_force(stage):
    st = enumerate_to(DEFAULT_PROFILE, stage)
    mine = {(e.mode, e.p, e.x, e.t) for e in st.events.values()}
    assert mine == brute_force_events(NaiveMachine(), stage)


def test_monotone_and_stage_independent(state22):
    prev = None
    for s in range(1, 23):
        st = enumerate_to(DEFAULT_PROFILE, s)
        assert st.omega() == state22.omega(s)
        assert st.kraft_sum() <= st.omega() <= 1
        if prev is not None:
            assert prev.omega() <= st.omega()
            for x, k in prev.K.items():
                assert st.K.get(x) <= k
        prev = st
    hist = state22.omega_history()
    assert all(a <= b for a, b in zip(hist, hist[1:]))


def test_advance_granularity_does_not_matter(state16):
    st = EnumerationState(DEFAULT_PROFILE)
    for s in (3, 7, 7, 11, 16):
        st = advance(st, s)
    assert dumps(st) == dumps(state16)


def test_prefix_domain_is_antichain(state22):
    assert antichain(e.p for e in state22.events.values() if e.mode == PREFIX)


def test_replay_sampled_events(state22):
    rng = random.Random(3)
    events = sorted(state22.events.values())
    for ev in rng.sample(events, 100):
        run = run_prefix if ev.mode == PREFIX else run_plain
        res = run(DEFAULT_PROFILE, ev.p, ev.t)
        assert isinstance(res, Halted) and (res.output, res.steps) == (ev.x, ev.t)
        assert res.consumed == len(ev.p)
        assert ev.stage == max(len(ev.p), ev.t)


def test_witnesses_replay(state22):
    for x, k in state22.K.items():
        ev = state22.K.witness(x)
        assert len(ev.p) == k
        assert run_prefix(DEFAULT_PROFILE, ev.p, ev.t).output == x


def test_queries(state22):
    assert query_K(state22, "1" * 30) is None
    assert query_C(state22, "1" * 30) is None
    assert query_K(state22, "") == 9
    assert query_K(state22, "0") == 11


def test_print_101_found_by_stage_25(state26):
    assert query_K(state26, "101") <= 25


def test_plain_prefix_overhead(state22):
    c = plain_prefix_overhead(state22)
    assert c is not None
    for x, k in state22.K.items():
        assert k >= state22.C.get(x) - c


def test_counting_report(state22):
    for n in range(6):
        total = len(state22.K.outputs_of_length(n))
        assert counting_report(state22, n, 10 ** 6) == total
    assert counting_report(state22, 40, 0) == 0
    rows = counting_matrix(state22, 10, 4)
    assert len(rows) == 11 * 5
    assert max(r[3] for r in rows) <= int(DEFAULT_PROFILE.note("counting_constant"))


def test_implied_constant():
    assert implied_constant(0, 0) == 0
    assert implied_constant(1, 2) == -2
    assert implied_constant(8, 4) == -1
    assert implied_constant(9, 0) == 4


def test_snapshot_round_trip(tmp_path, state16):
    path = tmp_path / "ledger.txt"
    snapshot(state16, path)
    back = restore(path, DEFAULT_PROFILE)
    assert dumps(back) == dumps(state16)
    assert back.omega() == state16.omega() and back.watermark == 16
    assert list(back.K.items()) == list(state16.K.items())


def test_snapshot_then_advance_equals_direct(tmp_path):
    mid = enumerate_to(DEFAULT_PROFILE, 10)
    snapshot(mid, tmp_path / "l.txt")
    resumed = advance(restore(tmp_path / "l.txt", DEFAULT_PROFILE), 16)
    assert dumps(resumed) == dumps(enumerate_to(DEFAULT_PROFILE, 16))


def test_empty_state_round_trips():
    st = EnumerationState(DEFAULT_PROFILE)
    assert dumps(loads(dumps(st), DEFAULT_PROFILE)) == dumps(st)


def test_restore_under_other_profile(state16):
    other = DEFAULT_PROFILE.without_builtins()
    with pytest.raises(FingerprintMismatch):
        loads(dumps(state16), other)


@pytest.mark.parametrize("mutate", [
    lambda t: "garbage\n" + t,
    lambda t: t.replace("watermark=16", "watermark=x"),
    lambda t: t + "prefix 0101 1 3\n",
    lambda t: t + "prefix 0a01 1 3 4\n",
    lambda t: t + "prefix 0101 1 3 9\n",
    lambda t: t + "prefix 010101010101010101 1 3 18\n",
])
def test_corrupt_ledgers(state16, mutate):
    with pytest.raises(CorruptLedger):
        loads(mutate(dumps(state16)), DEFAULT_PROFILE)


def test_resource_limit_and_watermark():
    with pytest.raises(ResourceLimit):
        enumerate_to(DEFAULT_PROFILE, 30, work_cap=10 ** 6)
    st = enumerate_to(DEFAULT_PROFILE, 5)
    with pytest.raises(ValueError):
        advance(st, 4)


def test_table_csv_header(state16):
    text = table_csv(state16)
    assert text.startswith(f"# profile={DEFAULT_PROFILE.fingerprint} stage=16\n")
    assert "x,K_s,C_s" in text
    assert "\nε,9,9\n" in text

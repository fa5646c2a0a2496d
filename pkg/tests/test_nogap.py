import random
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from ait_workbench.enumerator import enumerate_to
from ait_workbench.errors import NonIncreasingSchedule, OracleDisagreement
from ait_workbench.machine import DEFAULT_PROFILE
from ait_workbench.nogap import (
    PAD_STRICT,
    PHI_NAMES,
    Faulty,
    Immediate,
    LinearDelay,
    NondecreasingFn,
    Oracle,
    OracleMachine,
    OracleReading,
    beta_source,
    bias_report,
    build_schedule,
    coded_alpha,
    complexity_consistency,
    delete_positions,
    dual_compose,
    exact_recovery,
    h_by_name,
    h_constant,
    h_half,
    h_identity,
    h_log,
    h_sqrt,
    insert_zeros,
    phi_by_name,
    schedule_constant,
    selection_rule_S,
    settling_schedule,
)
from ait_workbench import sources

DATA = Path(__file__).parent / "data"
H_NAMES = ("identity", "half", "sqrt", "log")


def alpha_for(phi_name, h, base):
    return coded_alpha(h, base) if phi_name == "coded" else base


def covering_schedule(h, phi, alpha, N, pad="max"):
    K = 1
    while True:
        sched = build_schedule(h, phi, alpha, K, pad=pad)
        if sched.positions[-1] >= N:
            return sched
        K *= 2


def bases():
    return [sources.from_file(DATA / "coinflips_a.txt"), sources.from_file(DATA / "coinflips_b.txt"),
            sources.thue_morse(), sources.ones()]


@pytest.mark.parametrize("name", H_NAMES)
def test_h_inverse_matches_definition(name):
    h = h_by_name(name)
    assert h.monotone_on(2000)
    for k in range(12):
        assert h.inverse(k) == min(n for n in range(5000) if h(n) >= k)
    generic = NondecreasingFn("generic", h._rule)
    assert [generic.inverse(k) for k in range(12)] == [h.inverse(k) for k in range(12)]


def test_h_examples():
    assert [h_sqrt()(n) for n in range(6)] == [0, 1, 2, 2, 2, 3]
    assert [h_log()(n) for n in range(7)] == [1, 2, 2, 3, 3, 3, 3]
    assert h_log().inverse(0) == h_log().inverse(1) == 0


def test_dual_compose():
    h = dual_compose(h_identity())
    assert [h(n) for n in range(10)] == [h_log()(n) for n in range(10)]
    flat = dual_compose(h_constant(5))
    assert flat.looks_bounded(1000) and flat(0) == 3
    assert dual_compose(h_sqrt()).monotone_on(5000)


def test_identity_immediate_schedule():
    h = h_identity()
    sched = build_schedule(h, Immediate(h), sources.ones(), 20)
    assert sched.positions == [k + 1 for k in range(20)]


def test_half_oracle_reading_schedule():
    h = h_half()
    sched = build_schedule(h, OracleReading(h), sources.ones(), 30)
    assert sched.positions == [4 * k + 1 for k in range(30)]
    assert sched.uses == [2 * k for k in range(30)]


def test_faulty_machine():
    h = h_identity()
    with pytest.raises(OracleDisagreement):
        build_schedule(h, Faulty(Immediate(h), 3), sources.ones(), 10)
    assert len(build_schedule(h, Faulty(Immediate(h), 3), sources.ones(), 3)) == 3


def test_log_immediate_needs_strict_padding():
    h = h_log()
    with pytest.raises(NonIncreasingSchedule):
        build_schedule(h, Immediate(h), sources.ones(), 5)
    sched = build_schedule(h, Immediate(h), sources.ones(), 5, pad=PAD_STRICT)
    assert all(a < b for a, b in zip(sched.positions, sched.positions[1:]))
    assert sched.provenance["pad"] == "strict"


def test_insert_zeros_examples():
    assert insert_zeros(sources.thue_morse(), [], 16) == sources.thue_morse().prefix(16)
    assert insert_zeros(sources.ones(), [0, 2, 4], 10) == "0101011111"


def test_insert_delete_round_trip():
    rng = random.Random(11)
    for _ in range(100):
        N = rng.randrange(1, 80)
        alpha = sources.seeded(rng.randrange(10 ** 6))
        positions = sorted(rng.sample(range(N), rng.randrange(N + 1)))
        beta = insert_zeros(alpha, positions, N)
        assert delete_positions(beta, positions) == alpha.prefix(N - len(positions))
        assert all(beta[p] == "0" for p in positions)


def _matrix():
    for h_name in H_NAMES:
        for phi_name in PHI_NAMES:
            for i in range(4):
                yield h_name, phi_name, i


@pytest.mark.parametrize("h_name,phi_name,i", list(_matrix()))
def test_exact_recovery_matrix(h_name, phi_name, i):
    h = h_by_name(h_name)
    phi = phi_by_name(phi_name, h)
    alpha = alpha_for(phi_name, h, bases()[i])
    pad = PAD_STRICT if (h_name, phi_name) == ("log", "immediate") else "max"
    N = 400
    sched = covering_schedule(h, phi, alpha, N, pad)
    beta = beta_source(h, phi, alpha, pad)
    trace = selection_rule_S(beta, sched.machine, N)
    assert trace.arithmetic_ok()
    assert exact_recovery(sched, trace, N)
    assert trace.x == alpha.prefix(len(trace.x))
    assert bias_report(trace).flag == "all selected bits are 0"
    assert bias_report(trace).frequency_of_one == 0


def test_randomized_configurations():
    rng = random.Random(20261019)
    for _ in range(200):
        h_name = rng.choice(H_NAMES)
        phi_name = rng.choice(PHI_NAMES)
        h = h_by_name(h_name)
        phi = phi_by_name(phi_name, h)
        alpha = alpha_for(phi_name, h, sources.seeded(rng.randrange(10 ** 9)))
        N = rng.randrange(1, 200)
        sched = covering_schedule(h, phi, alpha, N, PAD_STRICT)
        trace = selection_rule_S(beta_source(h, phi, alpha, PAD_STRICT), sched.machine, N)
        assert trace.arithmetic_ok()
        assert exact_recovery(sched, trace, N)


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(PHI_NAMES), st.sampled_from(H_NAMES), st.integers(0, 25), st.integers(0, 10 ** 6))
def test_oracle_use_soundness(phi_name, h_name, k, seed):
    h = h_by_name(h_name)
    phi = phi_by_name(phi_name, h)
    alpha = alpha_for(phi_name, h, sources.seeded(seed))
    full = phi.run(Oracle(source=alpha), k)
    cut = phi.run(Oracle(alpha.prefix(full.use)), k)
    assert cut is not None and (cut.value, cut.steps) == (full.value, full.steps)
    if full.use:
        assert phi.run(Oracle(alpha.prefix(full.use - 1)), k) is None


def test_trace_determinism_and_no_answer():
    class Slow(OracleMachine):
        name = "slow"

        def compute(self, oracle, k):
            return 0, 10 ** 9

    never = Slow()
    xi = sources.thue_morse()
    trace = selection_rule_S(xi, never, 50)
    assert trace.selected == [] and trace.x == xi.prefix(50)
    assert bias_report(trace).flag == "no selection"
    assert bias_report(trace).frequency_of_one is None
    again = selection_rule_S(xi, never, 50)
    assert again.serialize() == trace.serialize()


def test_unmodified_alpha_with_delay():
    h = h_identity()
    alpha = sources.from_file(DATA / "coinflips_a.txt")
    trace = selection_rule_S(alpha, LinearDelay(h), 300)
    rep = bias_report(trace)
    # on alpha itself the rule selects the would-be insertion points, which hold alpha's bits
    assert trace.arithmetic_ok()
    assert rep.selected == len(trace.selected) < 300


def test_schedule_constant_bounded():
    for h_name in H_NAMES:
        h = h_by_name(h_name)
        for phi_name in ("immediate", "linear-delay", "oracle-reading"):
            phi = phi_by_name(phi_name, h)
            N = 2000
            sched = covering_schedule(h, phi, sources.ones(), N, PAD_STRICT)
            c = schedule_constant(sched, h, N)
            for n in range(N + 1):
                assert sched.insertions_below(n) <= h(n) + c
            assert c <= 1


def test_complexity_consistency(state22):
    h = h_identity()
    beta = beta_source(h, Immediate(h), sources.from_file(DATA / "coinflips_a.txt"))
    a = complexity_consistency(beta, state22, h, 30)
    b = complexity_consistency(beta, state22, h, 30)
    assert a.rows == b.rows and a.undiscovered > 0
    big = h_constant(100)
    rep = complexity_consistency(sources.zeros(), state22, big, 6)
    assert all(c <= 0 for _, c, _ in rep.rows if c is not None)


def test_schedule_serialization():
    h = h_half()
    text = build_schedule(h, OracleReading(h), sources.ones(), 3).serialize()
    assert text.splitlines()[2:] == ["0 1 0 1 0", "1 5 2 3 2", "2 9 4 5 4"]
    assert "phi=oracle-reading" in text.splitlines()[0]


def test_settling_schedule(state22):
    assert settling_schedule(enumerate_to(DEFAULT_PROFILE, 0), 5).rows == []
    rep = settling_schedule(state22, 30)
    assert all(flag == "beyond-precision" for n, _, p, flag in rep.rows if n > 22)
    assert all(p is None for n, _, p, _ in rep.rows if n > 22)
    assert all(flag == "unstable" for n, _, _, flag in rep.rows if n <= 22)
    prev = None
    for s in (10, 14, 18, 22):
        cur = {n: t for n, t, _, _ in settling_schedule(enumerate_to(DEFAULT_PROFILE, s), 10).rows
               if t is not None}
        if prev is not None:
            for n, t in prev.items():
                assert cur[n] >= t
        prev = cur

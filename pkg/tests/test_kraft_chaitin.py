import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from oracles import is_antichain, rational_kraft_oracle
from ait_workbench.codetree import CodeTree
from ait_workbench.encodings import lex_string
from ait_workbench.enumerator import enumerate_to, query_K
from ait_workbench.errors import InsufficientBudget
from ait_workbench.functions import UpperBoundFunction, constant, twice_length_plus_two
from ait_workbench.kraft_chaitin import Allocator, compile_function, exact_weight
from ait_workbench.machine import DEFAULT_PROFILE, Halted, MachineProfile, run_prefix


def allocate(lengths):
    alloc = Allocator()
    verdicts = []
    for i, k in enumerate(lengths):
        try:
            alloc.request(k, i)
            verdicts.append(True)
        except InsufficientBudget:
            verdicts.append(False)
    return alloc, verdicts


def test_hand_simulated_example():
    alloc = Allocator()
    assert [alloc.request(k, i) for i, k in enumerate([1, 2, 3, 3])] == ["0", "10", "110", "111"]
    assert alloc.free_weight() == 0
    with pytest.raises(InsufficientBudget):
        alloc.request(30, 9)


def test_empty_codeword_takes_everything():
    alloc = Allocator()
    assert alloc.request(0, 0) == ""
    with pytest.raises(InsufficientBudget):
        alloc.request(0, 1)
    with pytest.raises(InsufficientBudget):
        alloc.request(5, 1)


def test_negative_length():
    with pytest.raises(ValueError):
        Allocator().request(-1, 0)


def test_left_half_policy():
    alloc = Allocator()
    assert alloc.request(3, 0) == "000"
    assert alloc.request(1, 1) == "1"
    assert alloc.request(2, 2) == "01"
    assert alloc.request(3, 3) == "001"


def test_thousand_random_streams():
    rng = random.Random(20261019)
    for _ in range(1000):
        lengths = [rng.randrange(9) for _ in range(rng.randrange(1, 40))]
        alloc, verdicts = allocate(lengths)
        assert verdicts == rational_kraft_oracle(lengths)
        words = [w for w, _ in alloc.issued]
        assert is_antichain(words)
        assert alloc.free_weight() + alloc.issued_weight() == 1


@settings(max_examples=300, deadline=None)
@given(st.lists(st.integers(0, 12), max_size=60))
def test_allocator_properties(lengths):
    alloc, verdicts = allocate(lengths)
    assert verdicts == rational_kraft_oracle(lengths)
    issued = [w for w, _ in alloc.issued]
    assert [len(w) for w in issued] == [k for k, ok in zip(lengths, verdicts) if ok]
    assert is_antichain(issued)
    assert alloc.free_weight() + alloc.issued_weight() == 1
    # free sizes strictly increase left to right, so leftmost-fit is smallest-fit
    sizes = [e for _, e in alloc.free]
    assert all(a > b for a, b in zip(sizes, sizes[1:]))
    starts = [Fraction(a, 1 << e) for a, e in alloc.free]
    assert starts == sorted(starts)
    again, _ = allocate(lengths)
    assert again.issued == alloc.issued


def test_tree_round_trip():
    alloc, _ = allocate([3, 1, 4, 4, 2, 5])
    tree = alloc.tree()
    assert CodeTree.parse(tree.serialize()) == tree
    for word, payload in alloc.issued:
        assert tree.decode(word) == payload
    assert sorted(tree.codewords()) == sorted(alloc.issued)


def test_exact_weight():
    f = twice_length_plus_two()
    assert exact_weight(f, 0) == Fraction(1, 4)
    assert exact_weight(f, 2) == Fraction(1, 4) + 2 * Fraction(1, 16)
    assert exact_weight(constant(2), 3) == 1


@pytest.fixture(scope="module")
def compiled():
    return compile_function(twice_length_plus_two(), 0, 62)


def test_compile_62(compiled):
    f = twice_length_plus_two()
    assert len(compiled.tree) == 63
    for n in range(63):
        word = compiled.codewords[n]
        assert len(word) == f(n)
        assert compiled.tree.decode(word) == n
        prog = compiled.program(n)
        assert len(prog) == f(n) + compiled.overhead
        res = run_prefix(compiled.profile, prog, 10)
        assert isinstance(res, Halted)
        assert (res.output, res.consumed) == (lex_string(n), len(prog))


def test_compiled_profile_survives_serialization(compiled):
    back = MachineProfile.parse(compiled.profile.serialize())
    assert back.fingerprint == compiled.profile.fingerprint
    assert back.fingerprint != DEFAULT_PROFILE.fingerprint


def test_enumerator_confirms_compiled_bound(compiled):
    f = twice_length_plus_two()
    stage = 24
    st = enumerate_to(compiled.profile, stage)
    checked = 0
    for n in range(63):
        if f(n) + compiled.overhead <= stage:
            assert query_K(st, lex_string(n)) <= f(n) + compiled.overhead
            checked += 1
    assert checked >= 7


def test_single_leaf():
    code = compile_function(twice_length_plus_two(), 0, 0)
    assert len(code.tree) == 1
    assert code.codewords == {0: "00"}


def test_compile_errors():
    f = UpperBoundFunction("one", lambda n: 1)
    with pytest.raises(InsufficientBudget):
        compile_function(f, 0, 2)
    assert len(compile_function(f, 1, 3).tree) == 4
    with pytest.raises(ValueError):
        compile_function(f, -1, 2)

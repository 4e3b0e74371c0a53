import pytest
from hypothesis import given
from hypothesis import strategies as st

from reinhardt.seqcore import (
    EvenComposition,
    OddComposition,
    TernarySeq,
    alphabet_index,
    alphabet_size,
    composition_period,
    concat,
    even_compositions,
    gen_S_e,
    gen_S_o,
    in_s_e,
    in_s_o,
    odd_compositions,
    s_e_at,
    s_o_at,
    shift_left_negate,
    shift_right_negate,
    zero_block,
)

ternary = st.lists(st.sampled_from([-1, 0, 1]), max_size=40).map(lambda v: TernarySeq(tuple(v)))


@given(ternary)
def test_parse_str_roundtrip(seq):
    assert TernarySeq.parse(str(seq)) == seq


def test_parse_ignores_separators():
    assert TernarySeq.parse("+0|00|-+0|0") == TernarySeq((1, 0, 0, 0, -1, 1, 0, 0))
    with pytest.raises(ValueError):
        TernarySeq.parse("+x-")
    with pytest.raises(ValueError):
        TernarySeq((2,))


def test_empty_sequence_allowed():
    assert len(zero_block(0)) == 0
    assert str(concat([zero_block(0), TernarySeq.parse("+-")])) == "+-"


@given(ternary)
def test_negate_and_reverse_are_involutions(seq):
    assert -(-seq) == seq
    assert seq.reversed().reversed() == seq


@given(ternary.filter(lambda s: len(s) > 0))
def test_shifts_are_inverse(seq):
    assert shift_left_negate(shift_right_negate(seq)) == seq
    assert shift_right_negate(shift_left_negate(seq)) == seq


def test_shift_right_negate_example():
    assert str(shift_right_negate(TernarySeq.parse("+0-0+"))) == "-+0-0"


@pytest.mark.parametrize("k", range(1, 9))
@pytest.mark.parametrize("b", [1, -1])
def test_alphabets_are_exactly_the_right_sets(k, b):
    from itertools import product

    odd = [TernarySeq(v) for v in product((-1, 0, 1), repeat=k) if in_s_o(TernarySeq(v), b)]
    even = [TernarySeq(v) for v in product((-1, 0, 1), repeat=k) if in_s_e(TernarySeq(v), b)]
    assert len(odd) == len(even) == alphabet_size(k) == 2 ** (k - 1)
    assert sorted(map(str, gen_S_o(k, b))) == sorted(map(str, odd))
    assert sorted(map(str, gen_S_e(k, b))) == sorted(map(str, even))


@pytest.mark.parametrize("k", range(1, 8))
def test_alphabet_index_roundtrip(k):
    for i in range(alphabet_size(k)):
        assert alphabet_index(s_o_at(k, 1, i)) == i
        assert alphabet_index(s_e_at(k, -1, i)) == i


def test_even_alphabet_contains_zero_block():
    assert str(s_e_at(3, 1, 0)) == "000"
    assert {str(x) for x in gen_S_e(3, -1)} == {"000", "-+0", "-0+", "0-+"}


@pytest.mark.parametrize("r", range(2, 11))
def test_even_composition_count(r):
    comps = list(even_compositions(r))
    assert len(comps) == 2 ** (r - 2)
    assert len({c.parts for c in comps}) == len(comps)
    assert all(c.total == r and len(c.parts) % 2 == 0 for c in comps)


def test_odd_compositions_and_caps():
    assert len(list(odd_compositions(7))) == 2 ** 5
    assert all(max(c.parts) <= 2 for c in odd_compositions(9, max_part=2))


def test_r_e_r_o():
    c = EvenComposition.parse("1,3,2,2")
    assert (c.r_o, c.r_e, c.half_count, c.total) == (3, 5, 2, 8)
    assert c.reversed().parts == (2, 2, 3, 1)


def test_composition_period():
    assert composition_period(EvenComposition((1, 1, 1, 1))) == 2
    assert composition_period(EvenComposition((1, 2, 1, 2))) == 2
    assert composition_period(EvenComposition((1, 1, 1, 2))) == 4
    assert composition_period(EvenComposition((2, 1, 2, 1, 2, 1))) == 2


def test_composition_validation():
    with pytest.raises(ValueError):
        EvenComposition((1, 2, 3))
    with pytest.raises(ValueError):
        OddComposition((1, 1))
    with pytest.raises(ValueError):
        EvenComposition((0, 2))

import itertools
from collections import Counter

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import chisquare

from coding import (
    Dibit,
    Message,
    Permutation,
    apply_permutation,
    chunk_message,
    compose_dibits,
    compose_permutations,
    decode_outcome,
    decode_relative,
    dibit_to_pauli,
    dibits_to_message,
    invert_permutation,
    outcome_of,
    pauli_to_dibit,
    random_permutation,
    same_bell_class,
)
from errors import ProtocolFault
from qsim import PAULI_MATRICES, BellOutcome, PauliLabel, bell_transform_of


@pytest.mark.parametrize("dibit,op", [(0b00, PauliLabel.I), (0b11, PauliLabel.Z), (0b01, PauliLabel.X), (0b10, PauliLabel.Y)])
def test_dibit_table(dibit, op):
    assert dibit_to_pauli(dibit) is op
    assert pauli_to_dibit(op) == dibit
    assert decode_outcome(bell_transform_of(op)) == dibit
    assert outcome_of(dibit) is bell_transform_of(op)


@pytest.mark.parametrize("a,b", list(itertools.product(range(4), repeat=2)))
def test_composition_matches_matrix_product(a, b):
    product = PAULI_MATRICES[dibit_to_pauli(b)] @ PAULI_MATRICES[dibit_to_pauli(a)]
    expected = PAULI_MATRICES[dibit_to_pauli(compose_dibits(a, b))]
    # Equal up to a global phase.
    assert abs(np.trace(expected.conj().T @ product)) == pytest.approx(2.0)


def test_dialogue_example_xor():
    assert compose_dibits(0b11, 0b01) == 0b10
    assert compose_dibits(0b10, 0b11) == 0b01
    assert compose_dibits(0b10, 0b01) == 0b11


@pytest.mark.parametrize("initial", list(BellOutcome))
def test_decode_relative_removes_initial_state(initial):
    for d in range(4):
        measured = outcome_of(compose_dibits(d, decode_outcome(initial)))
        assert decode_relative(measured, initial) == d


def test_same_bell_class():
    assert [same_bell_class(d) for d in range(4)] == [True, False, False, True]


def test_invalid_dibit():
    with pytest.raises(ProtocolFault):
        dibit_to_pauli(4)


class TestMessage:
    def test_from_hex(self):
        assert Message.from_hex("a5").bits == (1, 0, 1, 0, 0, 1, 0, 1)
        assert Message.from_hex("0xF").bits == (1, 1, 1, 1)
        assert Message.from_hex("").length == 0

    def test_from_hex_rejects_garbage(self):
        with pytest.raises(ValueError):
            Message.from_hex("xyz")

    def test_chunking_is_msb_first(self):
        assert chunk_message(Message.from_hex("a5")) == [0b10, 0b10, 0b01, 0b01]

    def test_odd_length_gets_trailing_zero(self):
        message = Message((1, 1, 1))
        chunks = chunk_message(message)
        assert chunks == [0b11, 0b10]
        assert dibits_to_message(chunks, 3) == message

    def test_dibits_to_message_checks_length(self):
        with pytest.raises(ProtocolFault):
            dibits_to_message([Dibit(0)], 3)

    def test_to_hex(self):
        assert Message.from_hex("c0ffee").to_hex() == "c0ffee"
        assert Message((1,)).to_hex() == "8"

    def test_random_message_has_requested_length(self, rng):
        message = Message.random(37, rng)
        assert message.length == 37
        assert set(message.bits) <= {0, 1}


class TestPermutation:
    def test_rejects_non_bijection(self):
        with pytest.raises(ProtocolFault):
            Permutation((0, 0, 1))

    def test_length_mismatch(self):
        with pytest.raises(ProtocolFault):
            apply_permutation(Permutation.identity(3), [1, 2])

    def test_empty_permutation(self, rng):
        assert random_permutation(0, rng).n == 0

    @given(st.permutations(list(range(8))), st.lists(st.integers(), min_size=8, max_size=8))
    def test_inverse_restores_order(self, mapping, seq):
        perm = Permutation(tuple(mapping))
        shuffled = apply_permutation(perm, seq)
        assert apply_permutation(invert_permutation(perm), shuffled) == seq

    @given(st.permutations(list(range(8))))
    def test_position_of_matches_inverse(self, mapping):
        perm = Permutation(tuple(mapping))
        shuffled = apply_permutation(perm, list(range(8)))
        inverse = invert_permutation(perm)
        for item in range(8):
            assert shuffled[inverse.mapping[item]] == item
            assert perm.position_of(item) == inverse.mapping[item]

    @given(st.permutations(list(range(6))), st.permutations(list(range(6))))
    def test_composition_applies_first_then_second(self, a, b):
        first, second = Permutation(tuple(a)), Permutation(tuple(b))
        seq = list("abcdef")
        expected = apply_permutation(second, apply_permutation(first, seq))
        assert apply_permutation(compose_permutations(first, second), seq) == expected

    def test_random_permutation_is_uniform(self, rng):
        draws = 6000
        counts = Counter(random_permutation(3, rng).mapping for _ in range(draws))
        assert len(counts) == 6
        _, p_value = chisquare(list(counts.values()))
        assert p_value > 1e-3

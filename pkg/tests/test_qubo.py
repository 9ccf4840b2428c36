import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from l1qubo.errors import DimensionError, DomainError
from l1qubo.qubo import (
    IsingModel,
    QuboBuilder,
    QuboModel,
    all_states,
    evaluate_ising,
    evaluate_qubo,
    ising_to_qubo,
    qubo_to_ising,
)

coef = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


@st.composite
def qubo_models(draw, max_n=8):
    n = draw(st.integers(0, max_n))
    pairs = list(itertools.combinations(range(n), 2))
    quad = draw(st.dictionaries(st.sampled_from(pairs), coef) if pairs else st.just({}))
    lin = draw(st.dictionaries(st.integers(0, n - 1), coef) if n else st.just({}))
    return QuboModel(n, lin, quad, draw(coef))


@st.composite
def ising_models(draw, max_n=8):
    q = draw(qubo_models(max_n))
    return IsingModel(q.num_vars, dict(q.quadratic), dict(q.linear), q.offset)


class TestEvaluateQubo:
    def test_empty_model(self):
        assert evaluate_qubo(QuboModel(), []) == 0

    def test_single_linear(self):
        assert evaluate_qubo(QuboModel(1, {0: -2}, offset=1), [1]) == -1

    def test_pair(self):
        model = QuboModel(2, {0: -2, 1: -2}, {(0, 1): 4}, offset=1)
        # hand enumeration: 00 -> 1, 10 -> -1, 01 -> -1, 11 -> 1
        expected = {(0, 0): 1, (1, 0): -1, (0, 1): -1, (1, 1): 1}
        for a, e in expected.items():
            assert evaluate_qubo(model, list(a)) == e

    def test_length_mismatch(self):
        with pytest.raises(DimensionError):
            evaluate_qubo(QuboModel(2), [0])

    def test_non_binary(self):
        with pytest.raises(DomainError):
            evaluate_qubo(QuboModel(2), [0, 2])

    def test_vectorized_energies_match(self):
        model = QuboModel(3, {0: 1.5, 2: -1}, {(0, 1): 2, (1, 2): -3}, 0.25)
        states = np.array(list(all_states(3)))
        expected = [evaluate_qubo(model, s) for s in states]
        np.testing.assert_allclose(model.energies(states), expected)


class TestEvaluateIsing:
    def test_single_field(self):
        assert evaluate_ising(IsingModel(1, fields={0: 1}), [1]) == -1

    def test_single_coupling(self):
        assert evaluate_ising(IsingModel(2, {(0, 1): 1}), [1, -1]) == 1

    def test_enumerated(self):
        model = IsingModel(2, {(0, 1): 1}, {0: 0.5, 1: -0.5})
        # -J s0 s1 - h0 s0 - h1 s1 over the four states
        expected = {(1, 1): -1, (1, -1): 0, (-1, 1): 2, (-1, -1): -1}
        for s, e in expected.items():
            assert evaluate_ising(model, list(s)) == e

    def test_rejects_binary_values(self):
        with pytest.raises(DomainError):
            evaluate_ising(IsingModel(1), [0])


class TestConversion:
    def test_field_to_qubo(self):
        q = ising_to_qubo(IsingModel(1, fields={0: 1}))
        assert q.equals(QuboModel(1, {0: -2}, offset=1))

    def test_zero_ising(self):
        q = ising_to_qubo(IsingModel(3))
        assert q.equals(QuboModel(3)) and q.offset == 0

    def test_coupling_to_qubo(self):
        q = ising_to_qubo(IsingModel(2, {(0, 1): 1}))
        assert q.equals(QuboModel(2, {0: 2, 1: 2}, {(0, 1): -4}, -1))

    def test_linear_to_ising(self):
        s = qubo_to_ising(QuboModel(1, {0: 1}))
        assert s.fields[0] == -0.5 and s.offset == 0.5 and not s.couplings

    def test_zero_qubo(self):
        s = qubo_to_ising(QuboModel(2))
        assert not s.couplings and not s.fields and s.offset == 0

    @settings(max_examples=60, deadline=None)
    @given(ising_models())
    def test_ising_to_qubo_energies(self, ising):
        qubo = ising_to_qubo(ising)
        for q in all_states(ising.num_spins):
            assert evaluate_qubo(qubo, q) == pytest.approx(evaluate_ising(ising, 2 * q - 1), abs=1e-9)

    @settings(max_examples=60, deadline=None)
    @given(qubo_models())
    def test_roundtrip(self, qubo):
        back = ising_to_qubo(qubo_to_ising(qubo))
        ising = qubo_to_ising(qubo)
        for q in all_states(qubo.num_vars):
            e = evaluate_qubo(qubo, q)
            assert evaluate_ising(ising, 2 * q - 1) == pytest.approx(e, abs=1e-9)
            assert evaluate_qubo(back, q) == pytest.approx(e, abs=1e-9)


class TestProperties:
    @settings(max_examples=40, deadline=None)
    @given(qubo_models(6), coef)
    def test_offset_shift(self, model, c):
        shifted = model.shifted(c)
        energies = [evaluate_qubo(model, q) for q in all_states(model.num_vars)]
        moved = [evaluate_qubo(shifted, q) for q in all_states(model.num_vars)]
        assert np.allclose(np.array(moved) - energies, c, atol=1e-9)
        assert np.argmin(moved) == np.argmin(energies)

    @settings(max_examples=40, deadline=None)
    @given(qubo_models(6), qubo_models(6))
    def test_addition_is_linear(self, a, b):
        total = a + b
        n = total.num_vars
        pad = lambda m, q: evaluate_qubo(m, q[: m.num_vars])
        for q in all_states(n):
            assert evaluate_qubo(total, q) == pytest.approx(pad(a, q) + pad(b, q), abs=1e-9)


class TestModelInvariants:
    def test_keys_normalized(self):
        m = QuboModel(3, quadratic={(2, 0): 1.5})
        assert dict(m.quadratic) == {(0, 2): 1.5}

    def test_self_pair_rejected(self):
        with pytest.raises(ValueError):
            QuboModel(2, quadratic={(1, 1): 1})

    def test_both_orientations_rejected(self):
        with pytest.raises(ValueError):
            QuboModel(2, quadratic={(0, 1): 1, (1, 0): 2})

    def test_index_out_of_range(self):
        with pytest.raises(DimensionError):
            QuboModel(2, {2: 1.0})

    def test_non_finite_rejected(self):
        with pytest.raises(DomainError):
            QuboModel(1, {0: float("nan")})

    def test_immutable(self):
        m = QuboModel(1, {0: 1.0})
        with pytest.raises(TypeError):
            m.linear[0] = 2.0
        with pytest.raises(AttributeError):
            m.offset = 3.0


class TestBuilder:
    def test_set_overwrites(self):
        b = QuboBuilder()
        b.set_linear(0, 1.0)
        b.set_linear(0, 2.0)
        b.set_quadratic(1, 0, 3.0)
        b.set_quadratic(0, 1, 4.0)
        m = b.build()
        assert m.linear[0] == 2.0 and m.quadratic[(0, 1)] == 4.0 and m.num_vars == 2

    def test_add_accumulates(self):
        b = QuboBuilder()
        b.add_linear(0, 1.0)
        b.add_linear(0, 2.0)
        b.add_quadratic(1, 0, 3.0)
        b.add_quadratic(0, 1, 4.0)
        m = b.build()
        assert m.linear[0] == 3.0 and m.quadratic[(0, 1)] == 7.0

    def test_drop_zeros(self):
        b = QuboBuilder(2)
        b.add_linear(0, 1.0)
        b.add_linear(0, -1.0)
        assert not b.build(drop_zeros=True).linear
        assert b.build().num_vars == 2

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from momentsep.errors import DomainError
from momentsep.polynomial import Polynomial
from momentsep.tms import monomial_basis


def test_zero_coefficients_are_dropped():
    p = Polynomial(2, {(1, 0): 0.0, (0, 1): 2.0})
    assert p.terms == {(0, 1): 2.0}
    assert p.degree == 1


def test_wrong_exponent_length_rejected():
    with pytest.raises(DomainError):
        Polynomial(3, {(1, 0): 1.0})


def test_coefficient_vector_in_degree_lex_basis():
    x = [Polynomial.variable(3, i) for i in range(3)]
    p = x[2] * 7.0 - x[1] * x[1] * 3.0 + Polynomial.constant(3, 2.0)
    vec = p.coefficient_vector(monomial_basis(3, 2))
    np.testing.assert_array_equal(vec, [2, 0, 0, 7, 0, 0, 0, -3, 0, 0])


def test_embed_shifts_variables():
    p = Polynomial(3, {(2, 0, 0): 1.0, (0, 0, 0): -1.0})
    q = p.embed(6, 3)
    assert q.terms == {(0, 0, 0, 2, 0, 0): 1.0, (0, 0, 0, 0, 0, 0): -1.0}


def test_json_round_trip():
    p = Polynomial(3, {(1, 2, 0): 0.5, (0, 0, 3): -2.0})
    assert Polynomial.from_json(p.to_json()) == p


coef = st.floats(-5, 5, allow_nan=False)
point = st.tuples(coef, coef)


@settings(max_examples=60, deadline=None)
@given(a=st.dictionaries(st.tuples(st.integers(0, 3), st.integers(0, 3)), coef, max_size=5),
       b=st.dictionaries(st.tuples(st.integers(0, 3), st.integers(0, 3)), coef, max_size=5),
       x=point)
def test_ring_operations_match_evaluation(a, b, x):
    p, q = Polynomial(2, a), Polynomial(2, b)
    x = np.array(x)
    assert (p + q)(x) == pytest.approx(p(x) + q(x), abs=1e-8)
    assert (p * q)(x) == pytest.approx(p(x) * q(x), rel=1e-9, abs=1e-6)
    assert (-p)(x) == pytest.approx(-p(x))


def test_evaluate_many_matches_scalar_calls(rng):
    p = Polynomial(3, {(1, 1, 0): 2.0, (0, 0, 2): -1.0, (0, 0, 0): 0.5})
    pts = rng.standard_normal((7, 3))
    np.testing.assert_allclose(p.evaluate_many(pts), [p(x) for x in pts])

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from horoflow.poly import Poly


def test_constructor_drops_zeros_and_merges():
    p = Poly(2, {(1, 0): 1, (0, 0): 0})
    assert p.terms == {(1, 0): Fraction(1)}
    q = Poly(2, {(1, 0): 1}) + Poly(2, {(1, 0): -1})
    assert q.is_zero


def test_ring_identities():
    x = Poly.variable(2, 0)
    y = Poly.variable(2, 1)
    p = (x + y) * (x - y)
    assert p == x * x - y * y
    assert (x + 1) ** 3 == x**3 + 3 * x**2 + 3 * x + 1


def test_diff_and_substitute():
    x = Poly.variable(3, 0)
    z = Poly.variable(3, 2)
    p = x**2 * z + 5 * z
    assert p.diff(0) == 2 * x * z
    assert p.diff(2) == x**2 + 5
    assert p.substitute({2: 0}).is_zero
    assert p.substitute({0: 2}) == 9 * z


def test_project_rejects_foreign_support():
    p = Poly.variable(4, 3)
    with pytest.raises(ValueError):
        p.project([0, 1])
    q = Poly(4, {(2, 0, 0, 0): 7}).project([0, 1])
    assert q == Poly(4, {(2, 0, 0, 0): 7}).project([0, 1])
    assert q.nvars == 2


def test_exact_fraction_arithmetic():
    p = Poly(1, {(1,): Fraction(1, 3)}) * 3
    assert p == Poly.variable(1, 0)
    # binary floats convert exactly
    assert Poly.constant(1, 0.5).terms == {(0,): Fraction(1, 2)}


@given(
    st.lists(st.integers(-5, 5), min_size=2, max_size=2),
    st.floats(-3, 3),
    st.floats(-3, 3),
)
def test_evaluate_matches_direct_formula(coeffs, a, b):
    c0, c1 = coeffs
    p = c0 * Poly.variable(2, 0) ** 2 + c1 * Poly.variable(2, 1)
    direct = c0 * a * a + c1 * b
    assert p.evaluate([a, b]) == pytest.approx(direct, abs=1e-12)
    assert p.compiled()([a, b]) == pytest.approx(direct, abs=1e-12)


def test_batch_evaluation_agrees_with_scalar(rng):
    p = Poly(3, {(2, 1, 0): 1.5, (0, 0, 1): -2, (0, 0, 0): 0.25})
    X = rng.uniform(-2, 2, size=(40, 3))
    batch = p.batch(X)
    for row, val in zip(X, batch):
        assert val == pytest.approx(p.evaluate(row), rel=1e-14, abs=1e-14)


def test_weighted_degrees():
    p = Poly(3, {(1, 1, 0): 2, (0, 0, 1): -1})
    assert p.weighted_degrees((1, 1, 2)) == frozenset({2})
    assert p.weighted_degrees((1, 2, 3)) == frozenset({3})
    assert Poly.zero(3).weighted_degrees((1, 1, 2)) == frozenset()

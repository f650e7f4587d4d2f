from fractions import Fraction

import numpy as np
import pytest
import sympy

from magicpoly.rational import RationalMatrix, independent_rows, integer_scale


def _random_int_matrix(rng, rows, cols, rank):
    a = rng.integers(-3, 4, size=(rows, rank)) @ rng.integers(-3, 4, size=(rank, cols))
    return a.tolist()


def test_rref_matches_sympy(rng):
    for _ in range(40):
        r, c = rng.integers(1, 6, size=2)
        rows = _random_int_matrix(rng, r, c, rng.integers(1, min(r, c) + 1))
        ours, pivots = RationalMatrix(rows).rref()
        ref, ref_piv = sympy.Matrix(rows).rref()
        assert pivots == list(ref_piv)
        assert [[Fraction(int(x.p), int(x.q)) for x in ref.row(i)] for i in range(r)] == ours.rows


def test_nullspace_and_solve(rng):
    for _ in range(40):
        rows = _random_int_matrix(rng, 4, 6, 3)
        m = RationalMatrix(rows)
        null = m.nullspace()
        assert len(null) == 6 - m.rank()
        for x in null:
            assert all(v == 0 for v in m @ x)
        rhs = m @ [1, 2, 0, -1, 3, 1]
        x = m.solve(rhs)
        assert m @ x == rhs


def test_inconsistent_solve_and_singular_inverse():
    m = RationalMatrix([[1, 1], [2, 2]])
    assert m.solve([1, 3]) is None
    with pytest.raises(ZeroDivisionError):
        m.inverse()


def test_inverse_exact():
    m = RationalMatrix([[2, 1], [7, 4]])
    assert m @ m.inverse() == RationalMatrix.identity(2)
    assert m.inverse().rows == [[4, -1], [-7, 2]]


def test_independent_rows_and_scaling():
    rows = [[1, 0, 1], [2, 0, 2], [0, 1, 0], [1, 1, 1]]
    assert independent_rows(rows) == [0, 2]
    assert integer_scale([Fraction(1, 2), Fraction(-3, 4), 0]) == [2, -3, 0]
    assert integer_scale([Fraction(4), Fraction(6)]) == [2, 3]
    with pytest.raises(ValueError):
        RationalMatrix([[1, 2], [3]])

"""Tests for exact integer matrix algebra.

The Smith form is checked against an independent determinantal-divisor
oracle: the product d_1 ... d_k of invariant factors equals the gcd of all
k x k minors, for every k up to the rank.
"""

import itertools
import random

import pytest

from filtk.intlin import (
    IntMatrix,
    Infeasible,
    Solution,
    gcd_of,
    hermite_normal_form,
    in_column_span,
    kernel_basis,
    smith_normal_form,
    solve_linear,
)


def minor_gcds(m: IntMatrix):
    """gcd of all k x k minors for k = 1..min(rows, cols); the oracle."""
    out = []
    for k in range(1, min(m.rows, m.cols) + 1):
        g = 0
        for ri in itertools.combinations(range(m.rows), k):
            for ci in itertools.combinations(range(m.cols), k):
                g = gcd_of([g, m.submatrix(ri, ci).determinant()])
        out.append(g)
    return out


def oracle_invariant_factors(m: IntMatrix):
    gs = minor_gcds(m)
    factors = []
    prev = 1
    for g in gs:
        if g == 0:
            break
        factors.append(g // prev)
        prev = g
    return factors


def random_matrix(rng, rows, cols, lo=-9, hi=9):
    return IntMatrix(rows, cols, [[rng.randint(lo, hi) for _ in range(cols)] for _ in range(rows)])


def assert_valid_decomposition(m):
    dec = smith_normal_form(m)
    assert dec.U @ m @ dec.V == dec.S
    assert abs(dec.U.determinant()) == 1
    assert abs(dec.V.determinant()) == 1
    diag = dec.diagonal()
    for i in range(m.rows):
        for j in range(m.cols):
            if i != j:
                assert dec.S.data[i][j] == 0
    seen_zero = False
    for i, d in enumerate(diag):
        assert d >= 0
        if d == 0:
            seen_zero = True
        else:
            assert not seen_zero, "zero invariant factor before a nonzero one"
            if i + 1 < len(diag) and diag[i + 1] != 0:
                assert diag[i + 1] % d == 0
    return dec


class TestSmithNormalForm:
    def test_identity(self):
        m = IntMatrix.identity(3)
        dec = assert_valid_decomposition(m)
        assert dec.S == IntMatrix.identity(3)

    def test_rank_one_example(self):
        # oracle: d1 = gcd of entries = 1, d2 = |det| = 0
        m = IntMatrix.from_rows([[-1, -1], [-1, -1]])
        dec = assert_valid_decomposition(m)
        assert dec.diagonal() == [1, 0]

    def test_divisibility_example(self):
        # oracle: d1 = 2, d1*d2 = |det| = 8
        m = IntMatrix.from_rows([[2, 4], [6, 8]])
        dec = assert_valid_decomposition(m)
        assert dec.diagonal() == [2, 4]

    def test_empty_and_degenerate(self):
        for rows, cols in [(0, 0), (0, 3), (3, 0)]:
            dec = assert_valid_decomposition(IntMatrix.zeros(rows, cols))
            assert dec.S == IntMatrix.zeros(rows, cols)

    def test_zero_matrix(self):
        dec = assert_valid_decomposition(IntMatrix.zeros(2, 3))
        assert dec.invariant_factors() == []

    def test_against_minor_oracle_randomized(self):
        rng = random.Random(20240811)
        for _ in range(200):
            rows = rng.randint(1, 5)
            cols = rng.randint(1, 5)
            m = random_matrix(rng, rows, cols)
            dec = assert_valid_decomposition(m)
            assert dec.invariant_factors() == oracle_invariant_factors(m)


class TestHermiteNormalForm:
    def test_identity(self):
        assert hermite_normal_form(IntMatrix.identity(4)) == IntMatrix.identity(4)

    def test_zero(self):
        z = IntMatrix.zeros(3, 2)
        assert hermite_normal_form(z) == z

    def test_same_lattice_and_index(self):
        m = IntMatrix.from_rows([[2, 4], [6, 8]])
        h = hermite_normal_form(m)
        # lattice-index oracle: |det| preserved for full-rank square input
        assert abs(h.determinant()) == abs(m.determinant()) == 8
        assert h.data[0][1] == 0, "column-style HNF is lower triangular"
        assert in_column_span(h, m) and in_column_span(m, h)

    def test_span_preserved_randomized(self):
        rng = random.Random(77)
        for _ in range(100):
            m = random_matrix(rng, rng.randint(1, 4), rng.randint(1, 4), -6, 6)
            h = hermite_normal_form(m)
            assert in_column_span(h, m) and in_column_span(m, h)
            # staircase shape: pivot rows weakly increase left to right
            pivots = []
            for j in range(h.cols):
                nz = [i for i in range(h.rows) if h.data[i][j] != 0]
                pivots.append(nz[0] if nz else None)
            seen = [p for p in pivots if p is not None]
            assert seen == sorted(seen)


class TestSolveLinear:
    def test_scalar_division(self):
        res = solve_linear(IntMatrix.from_rows([[2]]), IntMatrix.from_rows([[4]]))
        assert isinstance(res, Solution)
        assert res.particular == IntMatrix.from_rows([[2]])

    def test_scalar_infeasible(self):
        res = solve_linear(IntMatrix.from_rows([[2]]), IntMatrix.from_rows([[1]]))
        assert isinstance(res, Infeasible)
        assert res.divisor == 2 and res.value in (1, -1)
        assert "divisibility fails" in res.describe()

    def test_counterexample_column_system(self):
        # no integer vector X satisfies (0,2,0)^t-shaped constraint X*2 = 1 in row 1;
        # this is the shape of the non-lifting obstruction
        a = IntMatrix.column([0, 2, 0])
        b = IntMatrix.column([1, 2, 0])
        res = solve_linear(a, b)
        assert isinstance(res, Infeasible)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            solve_linear(IntMatrix.zeros(2, 2), IntMatrix.zeros(3, 1))

    def test_soundness_and_completeness_randomized(self):
        rng = random.Random(13)
        for _ in range(150):
            rows = rng.randint(1, 3)
            cols = rng.randint(1, 4)
            a = random_matrix(rng, rows, cols, -4, 4)
            x0 = random_matrix(rng, cols, 1, -4, 4)
            b = a @ x0
            res = solve_linear(a, b)
            assert isinstance(res, Solution), "a @ x0 must be solvable"
            assert a @ res.particular == b
            for h in res.kernel_basis:
                assert all(v == 0 for v in a.apply(h))

    def test_kernel_basis_spans(self):
        a = IntMatrix.from_rows([[1, 2, 3]])
        basis = kernel_basis(a)
        assert len(basis) == 2
        for h in basis:
            assert all(v == 0 for v in a.apply(h))

    def test_matrix_right_hand_side(self):
        a = IntMatrix.from_rows([[2, 0], [0, 3]])
        b = IntMatrix.from_rows([[4, 2], [9, 3]])
        res = solve_linear(a, b)
        assert isinstance(res, Solution)
        assert a @ res.particular == b

import random
from fractions import Fraction
from itertools import permutations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hypertrees.determinantal import kernel_P
from hypertrees.exact_linalg import (ConditioningError, NonSquareError, RatMatrix, determinant, matmul,
                                     principal_minor, rank, schur_condition, smith_normal_form, transpose)
from hypertrees.simplicial_core import boundary_matrix, hat_boundary


def leibniz(M):
    """Permutation-expansion determinant: an independent oracle for tiny matrices."""
    n = len(M)
    total = 0
    for p in permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if p[i] > p[j])
        term = (-1) ** inv
        for i in range(n):
            term *= M[i][p[i]]
        total += term
    return total


def minors_gcd(M, r):
    from math import gcd
    from itertools import combinations
    g = 0
    for rows in combinations(range(len(M)), r):
        for cols in combinations(range(len(M[0])), r):
            g = gcd(g, leibniz([[M[i][j] for j in cols] for i in rows]))
    return g


def snf_oracle(M):
    """Invariant factors as ratios of determinantal divisors."""
    out = []
    prev = 1
    for r in range(1, min(len(M), len(M[0])) + 1):
        g = minors_gcd(M, r)
        if g == 0:
            break
        out.append(g // prev)
        prev = g
    return tuple(out)


def test_snf_examples():
    assert smith_normal_form([[2, 0], [0, 3]]).factors == (1, 6)
    assert smith_normal_form([[2, 4], [6, 8]]).factors == (2, 4)
    assert smith_normal_form([[1, 0, 0], [0, 1, 0], [0, 0, 1]]).factors == (1, 1, 1)


def test_snf_zero_matrix():
    r = smith_normal_form([[0, 0], [0, 0]])
    assert r.factors == () and r.rank == 0


def test_determinant_examples():
    H = hat_boundary(3, 1)
    assert determinant(matmul(H, transpose(H))) == 3
    H = hat_boundary(4, 1)
    assert determinant(matmul(H, transpose(H))) == 16
    assert determinant([[1, 0], [0, 1]]) == 1
    assert determinant([[2, 4], [6, 8]]) == -8


def test_determinant_non_square():
    with pytest.raises(NonSquareError):
        determinant([[1, 2, 3], [4, 5, 6]])


@pytest.mark.parametrize("n", range(2, 9))
def test_rank_of_graph_boundary(n):
    assert rank(boundary_matrix(n, 1)) == n - 1


def test_principal_minor_examples():
    P = kernel_P(3, 1).matrix
    assert principal_minor(P, [0]) == Fraction(2, 3)
    assert principal_minor(P, [0, 1]) == Fraction(1, 3)
    assert principal_minor(P, []) == 1


def test_schur_zero_probability():
    K = RatMatrix(((1, 0), (0, 0)), 1)
    with pytest.raises(ConditioningError):
        schur_condition(K, 0, keep=False)
    with pytest.raises(ConditioningError):
        schur_condition(K, 1, keep=True)


def test_ratmatrix_normalizes_sign_and_equality():
    a = RatMatrix(((2, 4),), -4)
    assert a.denom == 4 and a.numer == ((-2, -4),)
    assert a == RatMatrix(((-1, -2),), 2)
    assert a.to_fractions() == [[Fraction(-1, 2), Fraction(-1)]]


small = st.lists(st.lists(st.integers(-9, 9), min_size=4, max_size=4), min_size=4, max_size=4)


@given(small)
def test_determinant_matches_leibniz(M):
    assert determinant(M) == leibniz(M)


@given(st.lists(st.lists(st.integers(-5, 5), min_size=5, max_size=5), min_size=3, max_size=5))
def test_rank_matches_numpy(M):
    assert rank(M) == np.linalg.matrix_rank(np.array(M, dtype=float))


@given(st.lists(st.lists(st.integers(-6, 6), min_size=3, max_size=3), min_size=2, max_size=3))
def test_snf_matches_determinantal_divisors(M):
    assert smith_normal_form(M).factors == snf_oracle(M)


def _unimodular_ops(M, rnd, ops=20):
    M = [list(r) for r in M]
    n, m = len(M), len(M[0])
    for _ in range(ops):
        kind = rnd.randrange(3)
        if kind == 0:  # add multiple of a row
            i, j = rnd.sample(range(n), 2)
            c = rnd.randint(-3, 3)
            M[i] = [a + c * b for a, b in zip(M[i], M[j])]
        elif kind == 1:  # add multiple of a column
            i, j = rnd.sample(range(m), 2)
            c = rnd.randint(-3, 3)
            for r in M:
                r[i] += c * r[j]
        else:  # swap and negate
            i, j = rnd.sample(range(n), 2)
            M[i], M[j] = [-x for x in M[j]], M[i]
    return M


@given(st.lists(st.lists(st.integers(-9, 9), min_size=5, max_size=5), min_size=5, max_size=5),
       st.integers(0, 2 ** 32))
def test_snf_unimodular_invariance(M, seed):
    N = _unimodular_ops(M, random.Random(seed))
    assert smith_normal_form(N) == smith_normal_form(M)


def test_snf_factors_divide_and_multiply_to_det():
    rnd = random.Random(1)
    for _ in range(100):
        M = [[rnd.randint(-9, 9) for _ in range(4)] for _ in range(4)]
        d = determinant(M)
        f = smith_normal_form(M).factors
        for a, b in zip(f, f[1:]):
            assert b % a == 0
        if d:
            prod = 1
            for x in f:
                prod *= x
            assert prod == abs(d)


@given(st.integers(0, 2 ** 32), st.booleans())
def test_schur_condition_minor_identity(seed, keep):
    rnd = random.Random(seed)
    K = kernel_P(5, 1).matrix
    i = rnd.randrange(K.size)
    rest = [j for j in range(K.size) if j != i]
    S = rnd.sample(rest, rnd.randint(0, 3))
    Kc = schur_condition(K, i, keep)
    pos = [rest.index(j) for j in S]
    kii = K.entry(i, i)
    if keep:
        assert principal_minor(K, S + [i]) == kii * principal_minor(Kc, pos)
    else:
        # drop: det (K - E_ii)_{S+i} = (K_ii - 1) det K'_S
        M = K.to_fractions()
        M[i][i] -= 1
        sub = RatMatrix.from_fractions([[M[a][b] for b in sorted(S + [i])] for a in sorted(S + [i])])
        assert principal_minor(sub, range(sub.size)) == (kii - 1) * principal_minor(Kc, pos)

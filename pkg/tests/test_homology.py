import random

import pytest
from hypothesis import given, strategies as st

from hypertrees.homology import (HomologyError, chain_check, euler_check, homology_summary, hodge_check,
                                 les_defect, reduced_homology, relative_homology, sparse_boundary)
from hypertrees.simplicial_core import Complex, cone, faces
from hypertrees.trees_forests import tree_list

RP2 = [(1, 2, 3), (1, 3, 4), (1, 4, 5), (1, 5, 6), (1, 2, 6),
       (2, 3, 5), (2, 4, 5), (2, 4, 6), (3, 4, 6), (3, 5, 6)]


def test_tree_is_acyclic():
    assert reduced_homology(Complex(3, 1, frozenset({(1, 2), (1, 3)})), 0) == (0, 1)


def test_triangle_has_a_cycle():
    assert reduced_homology(Complex.full(3, 1), 1) == (1, 1)


def test_rp2_torsion():
    X = Complex.from_faces(6, 2, RP2)
    assert reduced_homology(X, 1) == (0, 2)
    assert reduced_homology(X, 2) == (0, 1)


def test_minus_one_betti_zero():
    assert reduced_homology(Complex(4, 1), -1)[0] == 0


def test_dimension_range():
    with pytest.raises(HomologyError):
        reduced_homology(Complex.full(3, 1), 2)


def test_relative_to_contractible_vertex():
    X = Complex(3, 1, frozenset({(1, 2), (1, 3)}))
    assert relative_homology(X, [(1,)], 0) == (0, 1)


def test_relative_rooted_pair():
    F = Complex(3, 1, frozenset({(1, 2), (1, 3)}))
    R = Complex(3, 0, frozenset({(1,)}))
    assert relative_homology(F, R, 0) == (0, 1)


def test_relative_infinite_group_flagged():
    F = Complex(3, 1, frozenset({(1, 2)}))
    R = Complex(3, 0, frozenset({(1,)}))
    betti, torsion = relative_homology(F, R, 0)
    assert betti == 1 and torsion == 1


def test_relative_requires_containment():
    with pytest.raises(HomologyError):
        relative_homology([(1, 2)], [(1, 3)], 0)


def test_euler_examples():
    assert euler_check(Complex.full(3, 1))
    assert euler_check([(1,)])
    T = tree_list(6, 2)[17][0]
    assert euler_check(T)


def test_hodge_examples():
    assert hodge_check(3, 1)
    assert hodge_check(5, 0) and hodge_check(5, 1)
    assert hodge_check(8, 3)


def test_hodge_graph_case_matrices():
    d0 = sparse_boundary(5, 0).toarray()
    d1 = sparse_boundary(5, 1).toarray()
    assert (d0.T @ d0 == 1).all()
    assert ((d1 @ d1.T) + 1 == 5 * __import__("numpy").eye(5)).all()


@pytest.mark.parametrize("n", range(1, 13))
def test_hodge_and_chain_all(n):
    for k in range(n):
        assert hodge_check(n, k)
        assert chain_check(n, k)


@pytest.mark.parametrize("n,k", [(4, 1), (5, 1), (5, 2), (6, 3), (5, 3)])
def test_two_of_three_on_trees(n, k):
    from math import comb
    for T, t in tree_list(n, k):
        s = homology_summary(T)
        assert s[k][0] == 0 and s[k - 1][0] == 0 and len(T) == comb(n - 1, k)
        assert s[k - 1][1] == t


@st.composite
def triples(draw):
    n = draw(st.integers(3, 6))
    k = draw(st.integers(1, min(3, n - 1)))
    fs = list(faces(n, k))
    X = draw(st.lists(st.sampled_from(fs), unique=True))
    Y = draw(st.lists(st.sampled_from(X), unique=True)) if X else []
    return n, k, X, Y


@given(triples())
def test_long_exact_sequence(tr):
    n, k, X, Y = tr
    delta = Complex.full(n, k)
    Xc, Yc = Complex(n, k, frozenset(X)), Complex(n, k, frozenset(Y))
    assert les_defect(delta, Xc, Yc, k) == 0


@given(triples())
def test_euler_for_complexes_and_pairs(tr):
    n, k, X, Y = tr
    Xc, Yc = Complex(n, k, frozenset(X)), Complex(n, k, frozenset(Y))
    assert euler_check(Xc) and euler_check(Xc, Yc)


@given(st.integers(0, 2 ** 32))
def test_excision_for_cones(seed):
    rnd = random.Random(seed)
    n = rnd.randint(3, 5)
    k = rnd.randint(1, n - 1)
    F = Complex(n, k, frozenset(f for f in faces(n, k) if rnd.random() < 0.5))
    R = Complex(n, k - 1, frozenset(f for f in faces(n, k - 1) if rnd.random() < 0.5))
    T = Complex(n + 1, k, F.kfaces | cone(n + 1, R).kfaces)
    for j in range(-1, k + 1):
        assert relative_homology(T, _cone_complex(n, k, R), j) == relative_homology(F, R, j)
        assert reduced_homology(T, j) == relative_homology(F, R, j)


def _cone_complex(n, k, R):
    """Faces of Cone(n+1, R) where R carries the full (k-2)-skeleton on [n]."""
    apex = n + 1
    out = [(apex,)] + list(R.kfaces) + [f + (apex,) for f in R.kfaces]
    for j in range(0, k - 1):
        out += list(faces(n, j)) + [f + (apex,) for f in faces(n, j)]
    return out

import pytest
from hypothesis import given, strategies as st

from hypertrees.simplicial_core import (Complex, ComplexError, FaceError, boundary_matrix, colex_rank,
                                        cone, faces, hat_boundary, link, make_face, proj)
from hypertrees.trees_forests import phi_inverse


def test_make_face_sorts():
    assert make_face([3, 1, 2]) == (1, 2, 3)


def test_make_face_empty_is_minus_one_face():
    assert make_face([]) == ()


@pytest.mark.parametrize("bad", [[2, 2], [0, 1], [-3]])
def test_make_face_rejects(bad):
    with pytest.raises(FaceError):
        make_face(bad)


def test_make_face_range():
    with pytest.raises(FaceError):
        make_face([1, 5], n=4)


def test_colex_order_and_rank():
    assert faces(4, 1) == ((1, 2), (1, 3), (2, 3), (1, 4), (2, 4), (3, 4))
    for j in range(4):
        for i, f in enumerate(faces(6, j)):
            assert colex_rank(f) == i


def test_boundary_k0_all_ones():
    B = boundary_matrix(3, 0)
    assert B.rows == ((),)
    assert B.to_lists() == [[1, 1, 1]]


def test_boundary_n3_k1_columns():
    B = boundary_matrix(3, 1)
    assert B.cols == ((1, 2), (1, 3), (2, 3))
    cols = [list(c) for c in zip(*B.to_lists())]
    assert cols == [[-1, 1, 0], [-1, 0, 1], [0, -1, 1]]


def test_boundary_entry_sign():
    assert boundary_matrix(3, 2).entry((1, 3), (1, 2, 3)) == -1
    assert boundary_matrix(3, 2).entry((2, 3), (1, 2, 3)) == 1


@pytest.mark.parametrize("n,k", [(3, -1), (3, 3), (0, 0)])
def test_boundary_range(n, k):
    with pytest.raises(ValueError):
        boundary_matrix(n, k)


def test_hat_boundary_n3_k1():
    H = hat_boundary(3, 1)
    assert H.rows == ((1,), (2,))
    assert H.to_lists() == [[-1, -1, 0], [1, 0, -1]]


def test_hat_boundary_k0_equals_boundary():
    assert hat_boundary(3, 0) == boundary_matrix(3, 0)


@pytest.mark.parametrize("n", range(1, 12))
def test_chain_complex_identity(n):
    for k in range(1, n):
        A = boundary_matrix(n, k - 1).to_numpy()
        B = boundary_matrix(n, k).to_numpy()
        assert not (A @ B).any()


def test_cone_of_vertices():
    X = Complex(2, 0, frozenset({(1,), (2,)}))
    assert cone(3, X).kfaces == {(1, 3), (2, 3)}


def test_cone_empty():
    assert cone(4, Complex(3, 1)).kfaces == frozenset()


def test_cone_needs_fresh_apex():
    with pytest.raises(ComplexError):
        cone(5, Complex(3, 1))


def test_cone_of_full_skeleton_matches_phi_inverse():
    R = Complex.full(3, 1)
    F = Complex(3, 2, frozenset({(1, 2, 3)}))
    assert phi_inverse(F, R).kfaces == F.kfaces | cone(4, R).kfaces


def test_link_and_proj_small():
    X = Complex(3, 1, frozenset({(1, 2), (1, 3)}))
    assert link(3, X).kfaces == {(1,)}
    assert proj(3, X).kfaces == {(1, 2)}


def test_link_and_proj_full_triangles():
    X = Complex.full(4, 2)
    assert link(4, X).kfaces == {(1, 2), (1, 3), (2, 3)}
    assert proj(4, X).kfaces == {(1, 2, 3)}


def test_link_requires_last_vertex():
    with pytest.raises(ComplexError):
        link(2, Complex.full(3, 1))


def test_complex_rejects_wrong_dimension():
    with pytest.raises(ComplexError):
        Complex(4, 1, frozenset({(1, 2, 3)}))


@st.composite
def complexes(draw, max_n=8):
    n = draw(st.integers(2, max_n))
    k = draw(st.integers(1, n - 1))
    fs = faces(n, k)
    chosen = draw(st.lists(st.sampled_from(fs), unique=True, max_size=len(fs)))
    return Complex(n, k, frozenset(chosen))


@given(complexes())
def test_link_proj_partition(X):
    L, P = link(X.n, X), proj(X.n, X)
    assert len(L) + len(P) == len(X)
    assert P.kfaces | {f + (X.n,) for f in L.kfaces} == X.kfaces
    assert phi_inverse(P, L) == X


@given(complexes())
def test_record_roundtrip(X):
    assert Complex.from_record(X.to_record()) == X

"""Faces, k-complexes on ``[n]`` and integer boundary matrices.

A face is a strictly ascending tuple of vertices in ``1..n``; the empty tuple
is the unique (-1)-face.  A :class:`Complex` stores only its top faces; the
full lower skeleton on ``[n]`` is implicit.

Faces are ordered colexicographically everywhere (compare the reversed
tuples), so ``faces(n, j)`` and every boundary matrix share one ordering.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from math import comb
from typing import Iterable, Sequence

Face = tuple[int, ...]


class FaceError(ValueError):
    """Invalid vertex list for a face."""


class ComplexError(ValueError):
    """Malformed complex or mismatched complex arguments."""


def make_face(vertices: Iterable[int], n: int | None = None) -> Face:
    """Canonical (sorted) face from an iterable of vertices.

    >>> make_face([3, 1, 2])
    (1, 2, 3)
    """
    vs = sorted(int(v) for v in vertices)
    for a, b in zip(vs, vs[1:]):
        if a == b:
            raise FaceError(f"duplicate vertex {a}")
    if vs and vs[0] < 1:
        raise FaceError(f"vertex {vs[0]} out of range")
    if n is not None and vs and vs[-1] > n:
        raise FaceError(f"vertex {vs[-1]} exceeds n={n}")
    return tuple(vs)


def colex_key(face: Face) -> Face:
    return face[::-1]


def colex_sorted(faces: Iterable[Face]) -> list[Face]:
    return sorted(faces, key=colex_key)


@lru_cache(maxsize=None)
def faces(n: int, j: int) -> tuple[Face, ...]:
    """All j-faces of the simplex on ``[n]`` in colex order."""
    if j < -1 or j + 1 > n:
        return ()
    return tuple(colex_sorted(combinations(range(1, n + 1), j + 1)))


@lru_cache(maxsize=None)
def face_index(n: int, j: int) -> dict[Face, int]:
    return {f: i for i, f in enumerate(faces(n, j))}


def colex_rank(face: Face) -> int:
    """Position of ``face`` in the colex order of faces of its size."""
    return sum(comb(v - 1, i + 1) for i, v in enumerate(face))


def facets_with_signs(tau: Face):
    """Yield ``(sigma, sign)`` with ``sigma = tau minus tau[j]`` and sign ``(-1)**j``."""
    for j in range(len(tau)):
        yield tau[:j] + tau[j + 1:], (-1) ** j


@dataclass(frozen=True)
class Complex:
    """A k-complex on ``[n]``: its k-faces atop the implicit full (k-1)-skeleton."""

    n: int
    k: int
    kfaces: frozenset[Face] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.n < 0 or self.k < -1:
            raise ComplexError(f"bad parameters n={self.n}, k={self.k}")
        canon = frozenset(make_face(f, self.n) for f in self.kfaces)
        for f in canon:
            if len(f) != self.k + 1:
                raise ComplexError(f"face {f} is not a {self.k}-face")
        object.__setattr__(self, "kfaces", canon)

    @classmethod
    def from_faces(cls, n: int, k: int, kfaces: Iterable[Sequence[int]]) -> "Complex":
        return cls(n, k, frozenset(tuple(f) for f in kfaces))

    @classmethod
    def full(cls, n: int, k: int) -> "Complex":
        return cls(n, k, frozenset(faces(n, k)))

    def sorted_faces(self) -> list[Face]:
        return colex_sorted(self.kfaces)

    def complement(self) -> "Complex":
        """Same skeleton, complementary set of k-faces."""
        return Complex(self.n, self.k, frozenset(faces(self.n, self.k)) - self.kfaces)

    def __len__(self) -> int:
        return len(self.kfaces)

    def __contains__(self, face) -> bool:
        return tuple(face) in self.kfaces

    def key(self) -> tuple:
        """Canonical hashable key: ``(n, k, colex-sorted faces)``."""
        return (self.n, self.k, tuple(self.sorted_faces()))

    def to_record(self) -> dict:
        return {"n": self.n, "k": self.k, "faces": [list(f) for f in self.sorted_faces()]}

    @classmethod
    def from_record(cls, record: dict) -> "Complex":
        return cls.from_faces(int(record["n"]), int(record["k"]), record["faces"])


@dataclass(frozen=True)
class LabeledIntMatrix:
    """Dense integer matrix with face labels on rows and columns."""

    rows: tuple[Face, ...]
    cols: tuple[Face, ...]
    entries: tuple[tuple[int, ...], ...]

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.cols)

    def entry(self, sigma: Sequence[int], tau: Sequence[int]) -> int:
        return self.entries[self.rows.index(tuple(sigma))][self.cols.index(tuple(tau))]

    def submatrix(self, rows: Iterable[Face] | None = None,
                  cols: Iterable[Face] | None = None) -> "LabeledIntMatrix":
        rows = self.rows if rows is None else tuple(rows)
        cols = self.cols if cols is None else tuple(cols)
        ri = {f: i for i, f in enumerate(self.rows)}
        ci = {f: i for i, f in enumerate(self.cols)}
        r_idx = [ri[f] for f in rows]
        c_idx = [ci[f] for f in cols]
        return LabeledIntMatrix(rows, cols, tuple(
            tuple(self.entries[i][j] for j in c_idx) for i in r_idx))

    def to_lists(self) -> list[list[int]]:
        return [list(r) for r in self.entries]

    def to_numpy(self):
        import numpy as np
        return np.array(self.entries, dtype=np.int64).reshape(self.shape)


def boundary_submatrix(rows: Sequence[Face], cols: Sequence[Face]) -> LabeledIntMatrix:
    """Boundary matrix restricted to explicit row and column face lists.

    This is the general-ambient entry point: callers choose the faces.
    """
    rows = tuple(rows)
    cols = tuple(cols)
    ri = {f: i for i, f in enumerate(rows)}
    data = [[0] * len(cols) for _ in rows]
    for c, tau in enumerate(cols):
        for sigma, sign in facets_with_signs(tau):
            r = ri.get(sigma)
            if r is not None:
                data[r][c] = sign
    return LabeledIntMatrix(rows, cols, tuple(tuple(r) for r in data))


def _check_range(n: int, k: int) -> None:
    if not 0 <= k <= n - 1:
        raise ValueError(f"need 0 <= k <= n-1, got n={n}, k={k}")


@lru_cache(maxsize=64)
def boundary_matrix(n: int, k: int) -> LabeledIntMatrix:
    """The map from k-faces to (k-1)-faces of the simplex on ``[n]``.

    Rows are the ``C(n, k)`` (k-1)-faces, columns the ``C(n, k+1)`` k-faces.
    Entry ``(sigma, tau)`` is ``(-1)**j`` when ``sigma = tau minus tau[j]``.
    """
    _check_range(n, k)
    return boundary_submatrix(faces(n, k - 1), faces(n, k))


@lru_cache(maxsize=64)
def hat_boundary(n: int, k: int) -> LabeledIntMatrix:
    """Boundary matrix with every row whose face contains vertex ``n`` deleted."""
    _check_range(n, k)
    rows = tuple(f for f in faces(n, k - 1) if n not in f)
    return boundary_submatrix(rows, faces(n, k))


def cone(apex: int, X: Complex) -> Complex:
    """Cone the top faces of ``X`` to a fresh largest vertex.

    Returns the (k+1)-faces ``sigma + (apex,)``; lower faces of the cone are
    left to the implicit skeleton, so the result is meant to be united with a
    k-complex (see :func:`hypertrees.trees_forests.phi_inverse`).
    """
    if apex != X.n + 1:
        raise ComplexError(f"apex must be the fresh vertex {X.n + 1}, got {apex}")
    return Complex(apex, X.k + 1, frozenset(f + (apex,) for f in X.kfaces))


def _check_last_vertex(v: int, X: Complex) -> None:
    if v != X.n:
        raise ComplexError(f"designated vertex must be n={X.n}, got {v}")


def link(v: int, X: Complex) -> Complex:
    """``{sigma : sigma + (v,) in X}`` as a (k-1)-complex on ``[n-1]``."""
    _check_last_vertex(v, X)
    return Complex(X.n - 1, X.k - 1, frozenset(f[:-1] for f in X.kfaces if f[-1] == v))


def proj(v: int, X: Complex) -> Complex:
    """The k-faces of ``X`` avoiding ``v``, as a k-complex on ``[n-1]``."""
    _check_last_vertex(v, X)
    return Complex(X.n - 1, X.k, frozenset(f for f in X.kfaces if f[-1] != v))

"""Reduced and relative homology summaries, plus identity checks.

Homology is reported as ``(betti, torsion_order)`` per dimension.  A
:class:`~hypertrees.simplicial_core.Complex` contributes its implicit full
skeleton; any other iterable of faces is closed downward (and always
contains the empty face).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Union

import numpy as np
from scipy import sparse

from .exact_linalg import rank, smith_normal_form
from .simplicial_core import Complex, Face, boundary_submatrix, colex_sorted, face_index, faces

FaceSetLike = Union[Complex, Iterable[Iterable[int]]]
Layers = dict[int, frozenset[Face]]


class HomologyError(ValueError):
    pass


def closure(face_set: Iterable[Iterable[int]]) -> frozenset[Face]:
    """Downward closure of a collection of faces, including the empty face."""
    out: set[Face] = {()}
    for f in face_set:
        f = tuple(sorted(f))
        if f in out:
            continue
        for r in range(1, len(f) + 1):
            out.update(combinations(f, r))
    return frozenset(out)


def layers(X: FaceSetLike) -> Layers:
    """Faces of ``X`` grouped by dimension."""
    if isinstance(X, Complex):
        out = {j: frozenset(faces(X.n, j)) for j in range(-1, X.k)}
        out[X.k] = X.kfaces
        return out
    by_dim: dict[int, set[Face]] = {}
    for f in closure(X):
        by_dim.setdefault(len(f) - 1, set()).add(f)
    return {j: frozenset(v) for j, v in by_dim.items()}


def _is_full(layer: frozenset[Face], n: int, j: int) -> bool:
    return len(layer) == len(faces(n, j))


@lru_cache(maxsize=None)
def _full_rank(n: int, j: int) -> int:
    return rank(boundary_submatrix(faces(n, j - 1), faces(n, j)))


@lru_cache(maxsize=None)
def _full_torsion(n: int, j: int) -> int:
    return smith_normal_form(boundary_submatrix(faces(n, j - 1), faces(n, j))).torsion_order


@dataclass
class _ChainPair:
    """Relative chain groups ``C_j = X_j minus Y_j``."""

    cells: dict[int, list[Face]]
    full_n: int | None = None
    _ranks: dict[int, int] = field(default_factory=dict)

    def dim_range(self) -> range:
        dims = [j for j, c in self.cells.items() if c]
        if not dims:
            return range(0)
        return range(min(dims), max(dims) + 1)

    def boundary(self, j: int):
        return boundary_submatrix(self.cells.get(j - 1, []), self.cells.get(j, []))

    def rank(self, j: int) -> int:
        if j not in self._ranks:
            rows, cols = self.cells.get(j - 1, []), self.cells.get(j, [])
            if not rows or not cols:
                r = 0
            elif self._full_block(j):
                r = _full_rank(self.full_n, j)
            else:
                r = rank(self.boundary(j))
            self._ranks[j] = r
        return self._ranks[j]

    def betti(self, j: int) -> int:
        return len(self.cells.get(j, [])) - self.rank(j) - self.rank(j + 1)

    def _full_block(self, j: int) -> bool:
        rows, cols = self.cells.get(j - 1, []), self.cells.get(j, [])
        return self.full_n is not None and _is_full(frozenset(cols), self.full_n, j) \
            and _is_full(frozenset(rows), self.full_n, j - 1)

    def torsion_order(self, j: int) -> int:
        rows, cols = self.cells.get(j, []), self.cells.get(j + 1, [])
        if not rows or not cols:
            return 1
        if self._full_block(j + 1):
            return _full_torsion(self.full_n, j + 1)
        return smith_normal_form(self.boundary(j + 1)).torsion_order


def _chain_pair(X: FaceSetLike, Y: FaceSetLike | None) -> _ChainPair:
    lx = layers(X)
    ly = layers(Y) if Y is not None else {}
    for j, fs in ly.items():
        if not fs <= lx.get(j, frozenset()):
            raise HomologyError(f"Y is not contained in X in dimension {j}")
    cells = {j: colex_sorted(fs - ly.get(j, frozenset())) for j, fs in lx.items()}
    full_n = X.n if isinstance(X, Complex) and Y is None else None
    return _ChainPair(cells, full_n)


def _top_dim(X: FaceSetLike) -> int:
    return X.k if isinstance(X, Complex) else max(layers(X))


def reduced_homology(X: Complex, j: int) -> tuple[int, int]:
    """``(betti_j, |torsion of H_j|)`` of the reduced homology of ``X``."""
    if not -1 <= j <= X.k:
        raise HomologyError(f"dimension {j} outside -1..{X.k}")
    cp = _chain_pair(X, None)
    return cp.betti(j), cp.torsion_order(j)


def relative_homology(X: FaceSetLike, Y: FaceSetLike, j: int) -> tuple[int, int]:
    """``(betti_j, |torsion of H_j(X, Y)|)``; ``Y`` may be a k- or (k-1)-complex."""
    top = _top_dim(X)
    if not -1 <= j <= top:
        raise HomologyError(f"dimension {j} outside -1..{top}")
    cp = _chain_pair(X, Y)
    return cp.betti(j), cp.torsion_order(j)


@dataclass(frozen=True)
class HomologySummary:
    betti: dict[int, int]
    torsion_order: dict[int, int]

    def __getitem__(self, j: int) -> tuple[int, int]:
        return self.betti.get(j, 0), self.torsion_order.get(j, 1)


def homology_summary(X: FaceSetLike, Y: FaceSetLike | None = None) -> HomologySummary:
    """Betti numbers and torsion orders in every dimension ``-1..top``."""
    cp = _chain_pair(X, Y)
    dims = range(-1, _top_dim(X) + 1)
    return HomologySummary({j: cp.betti(j) for j in dims},
                           {j: cp.torsion_order(j) for j in dims})


def euler_check(X: FaceSetLike, Y: FaceSetLike | None = None) -> bool:
    """Alternating face counts equal alternating Betti numbers."""
    cp = _chain_pair(X, Y)
    dims = range(-1, _top_dim(X) + 1)
    faces_side = sum((-1) ** j * len(cp.cells.get(j, [])) for j in dims)
    betti_side = sum((-1) ** j * cp.betti(j) for j in dims)
    return faces_side == betti_side


def sparse_boundary(n: int, k: int) -> sparse.csr_matrix:
    """``boundary_matrix(n, k)`` as an int64 sparse matrix; empty for k outside range."""
    rows = faces(n, k - 1)
    cols = faces(n, k)
    if not rows or not cols:
        return sparse.csr_matrix((len(rows), len(cols)), dtype=np.int64)
    ri = face_index(n, k - 1)
    r_idx, c_idx, vals = [], [], []
    for c, tau in enumerate(cols):
        for j in range(len(tau)):
            r_idx.append(ri[tau[:j] + tau[j + 1:]])
            c_idx.append(c)
            vals.append(-1 if j % 2 else 1)
    return sparse.csr_matrix((vals, (r_idx, c_idx)), shape=(len(rows), len(cols)), dtype=np.int64)


def hodge_check(n: int, k: int) -> bool:
    """Whether ``d_k d_k^T + d_{k-1}^T d_{k-1} == n * Id`` exactly."""
    if not 0 <= k <= n - 1:
        raise ValueError(f"need 0 <= k <= n-1, got n={n}, k={k}")
    up = sparse_boundary(n, k)
    down = sparse_boundary(n, k - 1)
    size = len(faces(n, k - 1))
    lhs = (up @ up.T).tocsr()
    if down.shape[1]:
        lhs = lhs + (down.T @ down).tocsr()
    diff = lhs - n * sparse.identity(size, dtype=np.int64, format="csr")
    return diff.count_nonzero() == 0


def chain_check(n: int, k: int) -> bool:
    """``d_{k-1} d_k == 0`` for the simplex on ``[n]``."""
    prod = sparse_boundary(n, k - 1) @ sparse_boundary(n, k)
    return prod.count_nonzero() == 0


def les_defect(delta: FaceSetLike, X: FaceSetLike, Y: FaceSetLike, k: int) -> int:
    """Alternating Betti sum from the long exact sequence of ``Y <= X <= delta``.

    Zero whenever the sequence is exact; used as an executable identity.
    """
    b = lambda A, B, j: relative_homology(A, B, j)[0] if j <= _top_dim(A) else 0  # noqa: E731
    middle = b(delta, Y, k + 1) - b(delta, X, k + 1) - b(delta, Y, k) + b(delta, X, k)
    return b(X, Y, k) + middle - (b(X, Y, k - 1) - b(delta, Y, k - 1))

"""Trees, rooted and relative forests, the binomial correspondence, enumeration."""

from __future__ import annotations

import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from math import comb
from typing import Iterator

from .exact_linalg import determinant, rank
from .homology import FaceSetLike, _chain_pair, layers, reduced_homology, relative_homology
from .simplicial_core import (Complex, ComplexError, Face, boundary_submatrix, cone, faces,
                              hat_boundary, link, proj)

DEFAULT_BUDGET = 10 ** 7


class BudgetExceeded(RuntimeError):
    """Enumeration would visit more candidate subsets than allowed."""


def tree_size(n: int, k: int) -> int:
    """Number of top faces of every k-hypertree on ``[n]``."""
    return comb(n - 1, k)


def is_tree(X: Complex, cross_check: bool = False) -> bool:
    """Whether ``X`` is a k-hypertree: ``C(n-1, k)`` faces and no k-cycles.

    With ``cross_check`` the remaining condition (``beta_{k-1} = 0``) is
    asserted as well.
    """
    if len(X) != tree_size(X.n, X.k):
        return False
    cols = X.sorted_faces()
    ok = rank(boundary_submatrix(faces(X.n, X.k - 1), cols)) == len(cols)
    if cross_check and ok:
        assert reduced_homology(X, X.k - 1)[0] == 0, "two-of-three violated"
    return ok


@dataclass(frozen=True)
class RootedForestResult:
    is_forest: bool
    count_ok: bool
    betti_top: int
    betti_below: int
    torsion: int | None = None

    def __bool__(self) -> bool:
        return self.is_forest


def is_rooted_forest(F: Complex, R: Complex) -> RootedForestResult:
    """Test whether ``(F, R)`` is a rooted forest.

    ``F`` is a k-complex and ``R`` a (k-1)-complex on the same vertex set.
    Since ``R`` carries the full (k-2)-skeleton, the relative chain complex is
    the single map from ``F``'s k-faces to the (k-1)-faces outside ``R``.
    When that map is square its absolute determinant is the order of
    ``H_{k-1}(F, R)`` and is reported as ``torsion``.
    """
    if F.n != R.n or R.k != F.k - 1:
        raise ComplexError("need a k-complex and a (k-1)-complex on the same [n]")
    rbar = [f for f in faces(F.n, R.k) if f not in R.kfaces]
    cols = F.sorted_faces()
    M = boundary_submatrix(rbar, cols)
    r = rank(M) if rbar and cols else 0
    count_ok = len(cols) == len(rbar)
    b_top = len(cols) - r
    b_below = len(rbar) - r
    verdict = sum((count_ok, b_top == 0, b_below == 0)) >= 2
    torsion = abs(determinant(M)) if count_ok else None
    return RootedForestResult(verdict, count_ok, b_top, b_below, torsion)


@dataclass(frozen=True)
class RelativeForestResult:
    is_forest: bool
    rank_ok: bool
    betti_below_ok: bool
    betti_top_ok: bool

    def __bool__(self) -> bool:
        return self.is_forest


def is_relative_forest(X: FaceSetLike, Y: FaceSetLike, ambient: FaceSetLike | None = None,
                       k: int | None = None) -> RelativeForestResult:
    """Two-of-three test for a relative forest ``(X, Y)`` of ``ambient``.

    ``ambient`` defaults to the complete k-complex on ``X``'s vertex set.
    """
    if k is None:
        k = X.k if isinstance(X, Complex) else max(layers(X))
    if ambient is None:
        if not isinstance(X, Complex):
            raise ComplexError("an explicit ambient is required for face-set input")
        ambient = Complex.full(X.n, k)
    lx, ly, la = layers(X), layers(Y), layers(ambient)
    for j, fs in ly.items():
        if not fs <= lx.get(j, frozenset()):
            raise ComplexError(f"Y is not inside X in dimension {j}")
    for j, fs in lx.items():
        if not fs <= la.get(j, frozenset()):
            raise ComplexError(f"X is not inside the ambient complex in dimension {j}")
    if lx.get(k - 1, frozenset()) != la.get(k - 1, frozenset()):
        raise ComplexError("X must contain the (k-1)-skeleton of the ambient complex")
    xy = _chain_pair(X, Y)
    ay = _chain_pair(ambient, Y)
    rank_ok = len(lx.get(k, ())) - len(ly.get(k, ())) == ay.rank(k)
    below_ok = xy.betti(k - 1) == ay.betti(k - 1)
    top_ok = xy.betti(k) == 0
    return RelativeForestResult(sum((rank_ok, below_ok, top_ok)) >= 2, rank_ok, below_ok, top_ok)


def phi(X: Complex) -> tuple[Complex, Complex]:
    """Split ``X`` at vertex ``n`` into ``(Proj(n, X), Link(n, X))``."""
    return proj(X.n, X), link(X.n, X)


def phi_inverse(F: Complex, R: Complex) -> Complex:
    """``F`` united with the cone of ``R`` to the new vertex ``n + 1``."""
    if F.n != R.n or R.k != F.k - 1:
        raise ComplexError(f"dimension mismatch: F is ({F.n},{F.k}), R is ({R.n},{R.k})")
    coned = cone(F.n + 1, R)
    return Complex(F.n + 1, F.k, F.kfaces | coned.kfaces)


def rooted_forests(n: int, k: int, size: int | None = None) -> Iterator[tuple[Complex, Complex, int]]:
    """All rooted forests ``(F, R)`` on ``[n]`` in dimension k, with ``|H_{k-1}(F, R)|``.

    ``size`` restricts to ``|F| = size``.  Uses the determinant criterion:
    a square relative boundary block is nonsingular exactly for rooted forests.
    """
    top = faces(n, k)
    below = faces(n, k - 1)
    sizes = range(min(len(top), len(below)) + 1) if size is None else [size]
    for s in sizes:
        for fcols in combinations(top, s):
            for rbar in combinations(below, s):
                d = determinant(boundary_submatrix(rbar, fcols))
                if d:
                    rset = frozenset(below) - frozenset(rbar)
                    yield Complex(n, k, frozenset(fcols)), Complex(n, k - 1, rset), abs(d)


# --- enumeration of hypertrees ------------------------------------------------

def _bases_from(columns: list[list[int]], r: int, first: int) -> list[tuple[tuple[int, ...], int]]:
    """Column subsets of size ``r`` whose smallest index is ``first`` and whose
    ``r x r`` block is nonsingular, with ``|det|``.

    Depth-first in index order; each added column is reduced against the
    fraction-free (Bareiss) steps of the current prefix, so a dependent prefix
    is pruned immediately and the last pivot is the determinant.
    """
    nrows = len(columns[0]) if columns else 0
    ncols = len(columns)
    out: list[tuple[tuple[int, ...], int]] = []
    # step: (pivot_row, pivot_value, reduced column, rows still free afterwards)
    steps: list[tuple[int, int, list[int], list[int]]] = []
    chosen: list[int] = []

    def reduce(col: list[int]) -> list[int]:
        x = list(col)
        prev = 1
        for pr, pv, lcol, free_after in steps:
            xp = x[pr]
            if xp:
                for i in free_after:
                    x[i] = (pv * x[i] - lcol[i] * xp) // prev
            else:
                for i in free_after:
                    x[i] = (pv * x[i]) // prev
            prev = pv
        return x

    def push(c: int) -> bool:
        x = reduce(columns[c])
        free = steps[-1][3] if steps else list(range(nrows))
        piv = next((i for i in free if x[i]), None)
        if piv is None:
            return False
        steps.append((piv, x[piv], x, [i for i in free if i != piv]))
        chosen.append(c)
        return True

    def pop() -> None:
        steps.pop()
        chosen.pop()

    def dfs(start: int) -> None:
        t = len(chosen)
        if t == r:
            out.append((tuple(chosen), abs(steps[-1][1]) if steps else 1))
            return
        for c in range(start, ncols - (r - t) + 1):
            if push(c):
                dfs(c + 1)
                pop()

    if r == 0:
        return [((), 1)] if first == 0 else []
    if push(first):
        dfs(first + 1)
    return out


@lru_cache(maxsize=8)
def _hat_columns(n: int, k: int) -> tuple[tuple[Face, ...], list[list[int]]]:
    H = hat_boundary(n, k)
    return H.cols, [list(c) for c in zip(*H.entries)] if H.rows else [[] for _ in H.cols]


def _worker(args):
    n, k, first = args
    cols, columns = _hat_columns(n, k)
    return _bases_from(columns, tree_size(n, k), first)


def _workers(workers: int | None) -> int:
    if workers is not None:
        return max(1, workers)
    try:
        return max(1, int(os.environ.get("HYPERTREE_THREADS", "1")))
    except ValueError:
        return 1


def enumeration_size(n: int, k: int) -> int:
    """Number of candidate subsets an unpruned enumeration would examine."""
    return comb(comb(n, k + 1), tree_size(n, k))


def tree_bases(n: int, k: int, budget: int = DEFAULT_BUDGET,
               workers: int | None = None) -> Iterator[tuple[tuple[int, ...], int]]:
    """Column-index subsets of the hat boundary that form hypertrees, with ``|det|``."""
    if not 0 <= k <= n - 1:
        raise ValueError(f"need 0 <= k <= n-1, got n={n}, k={k}")
    size = enumeration_size(n, k)
    if size > budget:
        raise BudgetExceeded(f"C(C({n},{k + 1}), C({n - 1},{k})) = {size} exceeds budget {budget}")
    cols, columns = _hat_columns(n, k)
    r = tree_size(n, k)
    firsts = range(len(cols) - r + 1) if r else range(1)
    jobs = [(n, k, f) for f in firsts]
    w = _workers(workers)
    if w > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=w) as pool:
            for chunk in pool.map(_worker, jobs):
                yield from chunk
    else:
        for job in jobs:
            yield from _worker(job)


def enumerate_trees(n: int, k: int, budget: int = DEFAULT_BUDGET,
                    workers: int | None = None) -> Iterator[tuple[Complex, int]]:
    """Every k-hypertree on ``[n]`` with the order of its torsion ``H_{k-1}``.

    The torsion is ``|det|`` of the tree's hat-boundary block; squared torsions
    sum to ``n ** C(n-2, k)``.
    """
    cols, _ = _hat_columns(n, k)
    for idx, det in tree_bases(n, k, budget, workers):
        yield Complex(n, k, frozenset(cols[i] for i in idx)), det


@lru_cache(maxsize=32)
def tree_list(n: int, k: int, budget: int = DEFAULT_BUDGET) -> tuple[tuple[Complex, int], ...]:
    """Cached, fully materialised :func:`enumerate_trees`."""
    return tuple(enumerate_trees(n, k, budget))



# --- structural identities ----------------------------------------------------

@dataclass(frozen=True)
class BijectionReport:
    ok: bool
    trees: int
    rooted: int
    failures: tuple = ()


def submain_bijection_check(n: int, k: int, budget: int = DEFAULT_BUDGET) -> BijectionReport:
    """Element-wise check that ``phi`` maps the k-hypertrees on ``[n]`` onto the
    rooted forests on ``[n-1]``, with matching homology in the top two degrees.
    """
    forests = {(F.key(), R.key()): t for F, R, t in rooted_forests(n - 1, k)}
    seen: set = set()
    failures = []
    for T, t in tree_list(n, k, budget):
        F, R = phi(T)
        key = (F.key(), R.key())
        ok = key in forests and key not in seen and phi_inverse(F, R) == T
        ok = ok and forests[key] == t and bool(is_rooted_forest(F, R))
        ok = ok and all(reduced_homology(T, j) == relative_homology(F, R, j) for j in (k - 1, k))
        if not ok:
            failures.append(T.key())
        seen.add(key)
    ok = not failures and seen == set(forests)
    return BijectionReport(ok, len(seen), len(forests), tuple(failures))


def split_candidates(n: int, k: int) -> int:
    s = tree_size(n, k)
    return comb(comb(n, k + 1), s) * comb(comb(n, k), s)


def split_set_check(n: int, k: int, budget: int = DEFAULT_BUDGET) -> BijectionReport:
    """Rooted forests ``(F, E)`` with ``|F| = C(n-1, k)`` are exactly the pairs in
    ``T_{n,k} x T_{n,k-1}``, and ``|H_{k-1}(F, E)|`` is the product of torsions.
    """
    size = split_candidates(n, k)
    if size > budget:
        raise BudgetExceeded(f"{size} candidate pairs exceed budget {budget}")
    top = {T.kfaces: t for T, t in tree_list(n, k, budget)}
    low = {T.kfaces: t for T, t in tree_list(n, k - 1, budget)}
    failures = []
    count = 0
    for F, E, t in rooted_forests(n, k, size=tree_size(n, k)):
        count += 1
        if F.kfaces not in top or E.kfaces not in low or t != top[F.kfaces] * low[E.kfaces]:
            failures.append((F.key(), E.key()))
    ok = not failures and count == len(top) * len(low)
    return BijectionReport(ok, len(top) * len(low), count, tuple(failures))


def split_torsion_check(n: int, k: int, samples: int | None = None, seed: int = 0,
                        budget: int = DEFAULT_BUDGET) -> BijectionReport:
    """``|H_{k-1}(T, T')| = |H_{k-1}(T)| |H_{k-2}(T')|`` by Smith normal form.

    Exhaustive over all pairs unless ``samples`` is given, in which case that
    many uniformly chosen pairs are checked.
    """
    top = tree_list(n, k, budget)
    low = tree_list(n, k - 1, budget)
    if samples is None:
        pairs = ((a, b) for a in top for b in low)
    else:
        rnd = random.Random(seed)
        pairs = ((rnd.choice(top), rnd.choice(low)) for _ in range(samples))
    failures = []
    count = 0
    for (T, t), (S, s) in pairs:
        count += 1
        if relative_homology(T, S, k - 1) != (0, t * s):
            failures.append((T.key(), S.key()))
    return BijectionReport(not failures, count, count, tuple(failures))

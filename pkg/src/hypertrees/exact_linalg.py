"""Exact integer and rational matrix kernels.

Matrices are plain row lists of Python ints (arbitrary precision), or
anything exposing ``.entries`` / iterable rows such as
:class:`~hypertrees.simplicial_core.LabeledIntMatrix`.  A :class:`RatMatrix`
is an integer numerator over one positive common denominator.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

IntRows = list[list[int]]


class NonSquareError(ValueError):
    pass


class ConditioningError(ZeroDivisionError):
    """Conditioning on an event of probability zero."""


def as_rows(M) -> IntRows:
    rows = getattr(M, "entries", M)
    return [list(r) for r in rows]


def transpose(M) -> IntRows:
    rows = as_rows(M)
    return [list(c) for c in zip(*rows)] if rows else []


def matmul(A, B) -> IntRows:
    a, b = as_rows(A), as_rows(B)
    bt = list(zip(*b))
    return [[sum(x * y for x, y in zip(r, c) if x and y) for c in bt] for r in a]


def determinant(M) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    a = as_rows(M)
    n = len(a)
    if any(len(r) != n for r in a):
        raise NonSquareError(f"determinant of a non-square {n}x{len(a[0])} matrix")
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k]:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        pivot = a[k][k]
        row_k = a[k]
        for i in range(k + 1, n):
            row_i = a[i]
            aik = row_i[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * pivot - aik * row_k[j]) // prev
        prev = pivot
    return sign * a[n - 1][n - 1]


def rank(M) -> int:
    """Exact rank over the rationals (fraction-free elimination)."""
    a = [r for r in as_rows(M) if any(r)]
    if not a:
        return 0
    ncols = len(a[0])
    r = 0
    prev = 1
    for c in range(ncols):
        piv = next((i for i in range(r, len(a)) if a[i][c]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        p = a[r][c]
        row_r = a[r]
        for i in range(r + 1, len(a)):
            row_i = a[i]
            aic = row_i[c]
            for j in range(c + 1, ncols):
                row_i[j] = (row_i[j] * p - aic * row_r[j]) // prev
            row_i[c] = 0
        prev = p
        r += 1
        if r == len(a):
            break
    return r


@dataclass(frozen=True)
class SNFResult:
    factors: tuple[int, ...]
    rank: int

    @property
    def torsion(self) -> tuple[int, ...]:
        return tuple(d for d in self.factors if d > 1)

    @property
    def torsion_order(self) -> int:
        out = 1
        for d in self.factors:
            out *= d
        return out


def _divisor_chain(diag: list[int]) -> tuple[int, ...]:
    """Invariant factors of a diagonal integer matrix."""
    ones = [d for d in diag if d == 1]
    rest = sorted(d for d in diag if d != 1)
    for i in range(len(rest)):
        for j in range(i + 1, len(rest)):
            a, b = rest[i], rest[j]
            g = gcd(a, b)
            rest[i], rest[j] = g, a // g * b
    return tuple(ones + sorted(rest))


def smith_normal_form(M) -> SNFResult:
    """Invariant factors ``d1 | d2 | ...`` of an integer matrix.

    Pivots on the smallest nonzero magnitude and clears its row and column by
    integer division; leftover remainders become the next, smaller pivot.
    The resulting diagonal is then put into divisor-chain form.
    """
    a = as_rows(M)
    active_rows = [i for i, r in enumerate(a) if any(r)]
    active_cols = set(range(len(a[0]) if a else 0))
    diag: list[int] = []
    while True:
        best = None
        for i in active_rows:
            row = a[i]
            for j in active_cols:
                v = row[j]
                if v and (best is None or abs(v) < best[0]):
                    best = (abs(v), i, j)
                    if best[0] == 1:
                        break
            if best is not None and best[0] == 1:
                break
        if best is None:
            break
        _, pi, pj = best
        while True:
            prow = a[pi]
            p = prow[pj]
            dirty = False
            for i in active_rows:
                if i == pi:
                    continue
                row = a[i]
                v = row[pj]
                if v:
                    q = v // p
                    for j in active_cols:
                        x = prow[j]
                        if x:
                            row[j] -= q * x
                    if row[pj]:
                        dirty = True
            for j in active_cols:
                if j == pj:
                    continue
                v = prow[j]
                if v:
                    q = v // p
                    for i in active_rows:
                        x = a[i][pj]
                        if x:
                            a[i][j] -= q * x
                    if prow[j]:
                        dirty = True
            if not dirty:
                break
            cands = [(abs(a[i][pj]), i, pj) for i in active_rows if i != pi and a[i][pj]]
            cands += [(abs(prow[j]), pi, j) for j in active_cols if j != pj and prow[j]]
            _, pi, pj = min(cands)
        diag.append(abs(a[pi][pj]))
        active_rows.remove(pi)
        active_cols.discard(pj)
        active_rows = [i for i in active_rows if any(a[i][j] for j in active_cols)]
    return SNFResult(_divisor_chain(diag), len(diag))


@dataclass(frozen=True)
class RatMatrix:
    """Rational matrix ``numer / denom`` with ``denom >= 1``."""

    numer: tuple[tuple[int, ...], ...]
    denom: int = 1

    def __post_init__(self):
        if self.denom == 0:
            raise ZeroDivisionError("zero denominator")
        numer = tuple(tuple(int(x) for x in r) for r in self.numer)
        d = int(self.denom)
        if d < 0:
            numer = tuple(tuple(-x for x in r) for r in numer)
            d = -d
        object.__setattr__(self, "numer", numer)
        object.__setattr__(self, "denom", d)

    @classmethod
    def from_fractions(cls, rows: Iterable[Iterable]) -> "RatMatrix":
        rows = [[Fraction(x) for x in r] for r in rows]
        d = 1
        for r in rows:
            for x in r:
                d = d * x.denominator // gcd(d, x.denominator)
        return cls(tuple(tuple(int(x * d) for x in r) for r in rows), d)

    @property
    def size(self) -> int:
        return len(self.numer)

    def entry(self, i: int, j: int) -> Fraction:
        return Fraction(self.numer[i][j], self.denom)

    def to_fractions(self) -> list[list[Fraction]]:
        return [[Fraction(x, self.denom) for x in r] for r in self.numer]

    def reduced(self) -> "RatMatrix":
        g = self.denom
        for r in self.numer:
            for x in r:
                if x:
                    g = gcd(g, x)
                    if g == 1:
                        return self
        return RatMatrix(tuple(tuple(x // g for x in r) for r in self.numer), self.denom // g)

    def restrict(self, idx: Sequence[int]) -> "RatMatrix":
        return RatMatrix(tuple(tuple(self.numer[i][j] for j in idx) for i in idx), self.denom)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RatMatrix):
            return NotImplemented
        a, b = self.reduced(), other.reduced()
        return a.numer == b.numer and a.denom == b.denom

    def __hash__(self) -> int:
        r = self.reduced()
        return hash((r.numer, r.denom))


def principal_minor(K: RatMatrix, S: Iterable[int]) -> Fraction:
    """``det K[S, S]`` as an exact fraction (1 for empty ``S``)."""
    idx = sorted(set(S))
    for i in idx:
        if not 0 <= i < K.size:
            raise IndexError(f"index {i} outside 0..{K.size - 1}")
    det = determinant([[K.numer[i][j] for j in idx] for i in idx])
    return Fraction(det, K.denom ** len(idx))


def schur_condition(K: RatMatrix, i: int, keep: bool) -> RatMatrix:
    """Condition a determinantal kernel on item ``i`` being kept or dropped.

    Keep: ``K - K[:, i] K[i, :] / K[i, i]``.  Drop: same with ``K[i, i] - 1``
    in the denominator.  Row and column ``i`` are removed from the result, so
    later indices shift down by one.
    """
    N, d = K.numer, K.denom
    nii = N[i][i]
    pivot = nii if keep else nii - d
    if pivot == 0:
        what = "keeping" if keep else "dropping"
        raise ConditioningError(f"{what} item {i} has probability zero")
    col = [N[r][i] for r in range(len(N))]
    rest = [r for r in range(len(N)) if r != i]
    numer = []
    for r in rest:
        cr = col[r]
        Nr = N[r]
        if cr:
            numer.append(tuple(Nr[c] * pivot - cr * col[c] for c in rest))
        else:
            numer.append(tuple(Nr[c] * pivot for c in rest))
    return RatMatrix(tuple(numer), d * pivot).reduced()

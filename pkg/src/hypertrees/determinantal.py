"""The determinantal measure on k-hypertrees of the simplex on ``[n]``.

``nu(T) = |H_{k-1}(T)|^2 / n^C(n-2, k)``.  Its kernel, indexed by k-faces,
is the projection ``P = (1/n) d_k^T d_k``; ``Q = Id - P = (1/n) d_{k+1} d_{k+1}^T``.

Samplers walk the k-faces in colex order and keep each face with its current
conditional probability (a diagonal entry of the conditioned kernel).  Random
streams come from ``numpy.random.SeedSequence([seed, draw_index])`` feeding
PCG64, so every draw is reproducible on any platform.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import comb
from typing import Iterable, Sequence

import numpy as np

from .exact_linalg import (RatMatrix, determinant, matmul, principal_minor, schur_condition,
                           transpose)
from .homology import reduced_homology, sparse_boundary
from .simplicial_core import Complex, Face, boundary_submatrix, face_index, faces, hat_boundary
from .trees_forests import DEFAULT_BUDGET, is_tree, tree_bases, tree_list, tree_size

EXACT_LIMIT = 300
FLOAT_LIMIT = 20000
FLOAT_EPS = 1e-8
METHODS = ("exact", "float", "ust")


class SamplerBreakdown(ArithmeticError):
    """Floating-point conditional probability left ``[-eps, 1 + eps]``."""


@dataclass(frozen=True)
class Kernel:
    n: int
    k: int
    faces: tuple[Face, ...]
    matrix: RatMatrix

    def entry(self, f: Face, g: Face) -> Fraction:
        idx = face_index(self.n, self.k)
        return self.matrix.entry(idx[tuple(f)], idx[tuple(g)])

    def to_numpy(self) -> np.ndarray:
        return np.array(self.matrix.numer, dtype=float).reshape(len(self.faces), -1) / self.matrix.denom


def _gram(n: int, k: int, up: bool) -> list[list[int]]:
    if up:
        B = sparse_boundary(n, k + 1)
        G = (B @ B.T).toarray()
    else:
        B = sparse_boundary(n, k)
        G = (B.T @ B).toarray()
    size = comb(n, k + 1)
    if G.size == 0:
        return [[0] * size for _ in range(size)]
    return [[int(x) for x in row] for row in G]


def _check(n: int, k: int) -> None:
    if not 0 <= k <= n - 1:
        raise ValueError(f"need 1 <= k+1 <= n, got n={n}, k={k}")


@lru_cache(maxsize=32)
def kernel_P(n: int, k: int) -> Kernel:
    """``(1/n) d_k^T d_k`` over the k-faces, exactly."""
    _check(n, k)
    return Kernel(n, k, faces(n, k), RatMatrix(tuple(map(tuple, _gram(n, k, up=False))), n))


@lru_cache(maxsize=32)
def kernel_Q(n: int, k: int) -> Kernel:
    """``(1/n) d_{k+1} d_{k+1}^T`` over the k-faces, exactly."""
    _check(n, k)
    return Kernel(n, k, faces(n, k), RatMatrix(tuple(map(tuple, _gram(n, k, up=True))), n))


def normalizer(n: int, k: int) -> int:
    return n ** comb(n - 2, k) if n >= 2 else 1


def nu_mass(T: Complex) -> Fraction:
    """Exact mass of ``T``; zero when ``T`` is not a hypertree."""
    n, k = T.n, T.k
    if len(T) != tree_size(n, k):
        return Fraction(0)
    H = hat_boundary(n, k)
    d = determinant(boundary_submatrix(H.rows, T.sorted_faces()))
    return Fraction(d * d, normalizer(n, k))


def nu_mass_homological(T: Complex) -> Fraction:
    """Mass from the torsion of ``H_{k-1}(T)`` (independent of the determinant route)."""
    if not is_tree(T):
        return Fraction(0)
    t = reduced_homology(T, T.k - 1)[1]
    return Fraction(t * t, normalizer(T.n, T.k))


def _indices(n: int, k: int, face_set: Iterable[Sequence[int]]) -> list[int]:
    idx = face_index(n, k)
    return sorted(idx[tuple(sorted(f))] for f in face_set)


def inclusion_prob(B: Iterable[Sequence[int]], n: int, k: int) -> Fraction:
    """``nu(T contains B) = det P[B, B]``."""
    return principal_minor(kernel_P(n, k).matrix, _indices(n, k, B))


def exclusion_prob(A: Iterable[Sequence[int]], n: int, k: int) -> Fraction:
    """``nu(T avoids A) = det Q[A, A]``."""
    return principal_minor(kernel_Q(n, k).matrix, _indices(n, k, A))


@dataclass(frozen=True)
class BridgeReport:
    ok: bool
    values: dict[str, tuple[Fraction, Fraction, Fraction]]


def bridge_check(n: int, k: int, A: Iterable[Sequence[int]] | None = None,
                 B: Iterable[Sequence[int]] | None = None,
                 budget: int = DEFAULT_BUDGET) -> BridgeReport:
    """Check both kernel/rooted-forest identities by explicit summation.

    ``A`` is a set of (k-1)-faces, ``B`` a set of k-faces.  For each given
    argument three quantities must agree: the enumerated probability, the
    principal minor, and ``n^-|A|`` (resp. ``n^-|B|``) times the sum of
    squared boundary minors over the rooted forests pairing ``A`` with ``B``.
    """
    values = {}
    if A is not None:
        A = [tuple(sorted(f)) for f in A]
        Aset = frozenset(A)
        enum = sum((Fraction(t * t, normalizer(n, k - 1)) for T, t in tree_list(n, k - 1, budget)
                    if not (T.kfaces & Aset)), Fraction(0))
        minor = exclusion_prob(A, n, k - 1)
        rows = sorted(Aset, key=lambda f: f[::-1])
        total = 0
        for Bc in combinations(faces(n, k), len(rows)):
            d = determinant(boundary_submatrix(rows, Bc))
            total += d * d
        values["exclusion"] = (enum, minor, Fraction(total, n ** len(rows)))
    if B is not None:
        B = [tuple(sorted(f)) for f in B]
        Bset = frozenset(B)
        enum = sum((Fraction(t * t, normalizer(n, k)) for T, t in tree_list(n, k, budget)
                    if Bset <= T.kfaces), Fraction(0))
        minor = inclusion_prob(B, n, k)
        cols = sorted(Bset, key=lambda f: f[::-1])
        total = 0
        for Ac in combinations(faces(n, k - 1), len(cols)):
            d = determinant(boundary_submatrix(Ac, cols))
            total += d * d
        values["inclusion"] = (enum, minor, Fraction(total, n ** len(cols)))
    ok = all(a == b == c for a, b, c in values.values())
    return BridgeReport(ok, values)


# --- sampling -----------------------------------------------------------------

@dataclass(frozen=True)
class SampleRecord:
    complex: Complex
    torsion_order: int | None
    seed: int
    index: int
    method: str
    probability: Fraction | None = None

    def to_record(self) -> dict:
        rec = self.complex.to_record()
        rec.update(torsion=self.torsion_order, seed=self.seed, index=self.index, method=self.method)
        if self.probability is not None:
            rec["probability"] = str(self.probability)
        return rec


def draw_rng(seed: int, index: int) -> np.random.Generator:
    """Independent generator for draw ``index`` of a run seeded with ``seed``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(index)])))


def bernoulli(rng: np.random.Generator, p: Fraction) -> bool:
    """Exact Bernoulli(p) for rational p, consuming 64 random bits at a time."""
    if p <= 0:
        return False
    if p >= 1:
        return True
    num, den = p.numerator, p.denominator
    while True:
        u = int(rng.bit_generator.random_raw())
        scaled = num << 64
        c, num = divmod(scaled, den)
        if u != c:
            return u < c


class ExactSampler:
    """Chain-rule sampler with exact rational conditioning.

    Conditioned kernels are memoised by decision prefix (up to ``cache_size``
    entries), so repeated draws on small ground sets only pay for lookups.
    """

    def __init__(self, n: int, k: int, cache_size: int = 1 << 15):
        _check(n, k)
        if comb(n, k + 1) > EXACT_LIMIT:
            raise ValueError(f"exact sampler limited to {EXACT_LIMIT} faces")
        self.n, self.k = n, k
        self.faces = faces(n, k)
        self.r = tree_size(n, k)
        self.cache_size = cache_size
        self._cache: dict[tuple[bool, ...], RatMatrix] = {(): kernel_P(n, k).matrix}

    def _kernel(self, prefix: tuple[bool, ...], parent: RatMatrix) -> RatMatrix:
        K = self._cache.get(prefix)
        if K is None:
            K = schur_condition(parent, 0, prefix[-1])
            if len(self._cache) < self.cache_size:
                self._cache[prefix] = K
        return K

    def draw(self, rng: np.random.Generator) -> tuple[frozenset[Face], Fraction]:
        prefix: tuple[bool, ...] = ()
        K = self._cache[()]
        chosen: list[Face] = []
        prob = Fraction(1)
        for i, f in enumerate(self.faces):
            if len(chosen) == self.r:
                break
            p = Fraction(K.numer[0][0], K.denom)
            keep = bernoulli(rng, p)
            prob *= p if keep else 1 - p
            if keep:
                chosen.append(f)
            prefix += (keep,)
            if i + 1 < len(self.faces) and len(chosen) < self.r:
                K = self._kernel(prefix, K)
        return frozenset(chosen), prob

    def trajectory_law(self) -> dict[tuple, Fraction]:
        """Probability of every reachable output, summed over decision branches."""
        law: dict[tuple, Fraction] = {}

        def walk(i: int, K: RatMatrix | None, chosen: tuple[Face, ...], prob: Fraction):
            if len(chosen) == self.r or i == len(self.faces):
                key = tuple(sorted(chosen, key=lambda f: f[::-1]))
                law[key] = law.get(key, Fraction(0)) + prob
                return
            p = Fraction(K.numer[0][0], K.denom)
            for keep, q in ((True, p), (False, 1 - p)):
                if q == 0:
                    continue
                nxt = chosen + (self.faces[i],) if keep else chosen
                last = i + 1 == len(self.faces) or len(nxt) == self.r
                walk(i + 1, None if last else schur_condition(K, 0, keep), nxt, prob * q)

        walk(0, self._cache[()], (), Fraction(1))
        return law


@lru_cache(maxsize=16)
def exact_sampler(n: int, k: int) -> ExactSampler:
    return ExactSampler(n, k)


@lru_cache(maxsize=8)
def _row_basis(n: int, k: int) -> np.ndarray:
    """Orthonormal basis (as rows of an N x r array) of the row space of the hat boundary."""
    H = hat_boundary(n, k)
    if not H.rows:
        return np.zeros((len(H.cols), 0))
    q, _ = np.linalg.qr(H.to_numpy().astype(float).T)
    return q


def float_draw(n: int, k: int, rng: np.random.Generator, eps: float = FLOAT_EPS) -> frozenset[Face]:
    """Chain-rule draw in float64.

    With ``P = V V^T`` for an orthonormal ``V``, every conditioned kernel has
    the form ``V H V^T`` for a symmetric r x r matrix ``H``; keeping or dropping
    face ``i`` is a rank-one update of ``H``, which is re-symmetrised after
    each step.  Same conditioning order and law as the exact sampler.
    """
    fs = faces(n, k)
    if len(fs) > FLOAT_LIMIT:
        raise ValueError(f"float sampler limited to {FLOAT_LIMIT} faces")
    r = tree_size(n, k)
    V = _row_basis(n, k)
    H = np.eye(r)
    chosen: list[Face] = []
    for i, f in enumerate(fs):
        if len(chosen) == r:
            break
        v = V[i]
        Hv = H @ v
        p = float(v @ Hv)
        if not -eps <= p <= 1 + eps:
            raise SamplerBreakdown(f"conditional probability {p!r} at face {f}")
        p = min(max(p, 0.0), 1.0)
        keep = rng.random() < p
        pivot = p if keep else p - 1.0
        if keep:
            chosen.append(f)
        if pivot == 0.0:
            raise SamplerBreakdown(f"degenerate pivot at face {f}")
        H = H - np.outer(Hv, Hv) / pivot
        H = 0.5 * (H + H.T)
    if len(chosen) != r:
        raise SamplerBreakdown(f"drew {len(chosen)} faces, expected {r}")
    return frozenset(chosen)


def ust_edges(n: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    """Uniform spanning tree of the complete graph on ``[n]`` (Wilson's algorithm).

    Loop-erased random walks toward the growing tree, rooted at vertex ``n``;
    the walk on the complete graph steps to a uniform other vertex.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    in_tree = [False] * (n + 1)
    nxt = [0] * (n + 1)
    in_tree[n] = True
    buf = rng.integers(1, n, size=4 * n + 16)
    pos = 0
    for start in range(1, n):
        u = start
        while not in_tree[u]:
            if pos == len(buf):
                buf = rng.integers(1, n, size=4 * n + 16)
                pos = 0
            v = int(buf[pos])
            pos += 1
            if v >= u:
                v += 1
            nxt[u] = v
            u = v
        u = start
        while not in_tree[u]:
            in_tree[u] = True
            u = nxt[u]
    return sorted((min(u, nxt[u]), max(u, nxt[u])) for u in range(1, n))


def _torsion(n: int, k: int, kfaces: Iterable[Face], limit: int = 100) -> int | None:
    if tree_size(n, k) > limit:
        return None
    H = hat_boundary(n, k)
    cols = sorted(kfaces, key=lambda f: f[::-1])
    return abs(determinant(boundary_submatrix(H.rows, cols)))


def _float_rank_ok(n: int, k: int, kfaces: frozenset[Face]) -> bool:
    H = hat_boundary(n, k)
    M = boundary_submatrix(H.rows, sorted(kfaces, key=lambda f: f[::-1])).to_numpy()
    return np.linalg.matrix_rank(M.astype(float)) == len(kfaces)


def sample(n: int, k: int, seed: int, method: str = "exact", index: int = 0) -> SampleRecord:
    """One draw from the determinantal measure.

    ``exact`` returns the trajectory probability (equal to the mass of the
    output); ``ust`` requires ``k == 1``.  ``float`` records the torsion only
    for trees with at most 100 faces and otherwise checks the output by a
    floating-point rank test.
    """
    rng = draw_rng(seed, index)
    prob = None
    if method == "exact":
        kf, prob = exact_sampler(n, k).draw(rng)
        torsion = _torsion(n, k, kf, limit=10 ** 9)
    elif method == "float":
        kf = float_draw(n, k, rng)
        torsion = _torsion(n, k, kf)
        if torsion == 0 or (torsion is None and not _float_rank_ok(n, k, kf)):
            raise SamplerBreakdown("float sampler produced a non-tree")
    elif method == "ust":
        if k != 1:
            raise ValueError("the ust method samples 1-trees only")
        kf = frozenset(ust_edges(n, rng))
        torsion = 1
    else:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
    return SampleRecord(Complex(n, k, kf), torsion, seed, index, method, prob)


def sample_many(n: int, k: int, count: int, seed: int, method: str = "exact") -> list[SampleRecord]:
    return [sample(n, k, seed, method, i) for i in range(count)]


@dataclass(frozen=True)
class KalaiReport:
    n: int
    k: int
    determinant: int
    cauchy_binet: int | None
    torsion_sum: int | None
    power: int
    trees: int | None = None

    @property
    def equal(self) -> bool:
        vals = [self.determinant, self.power]
        vals += [v for v in (self.cauchy_binet, self.torsion_sum) if v is not None]
        return len(set(vals)) == 1


def kalai_sum_verify(n: int, k: int, budget: int = DEFAULT_BUDGET, sums: bool = True) -> KalaiReport:
    """``n^C(n-2,k)`` three ways: determinant of the hat Gram matrix, the
    Cauchy-Binet sum of squared maximal minors, and the sum of squared
    torsion orders computed by Smith normal form.
    """
    H = hat_boundary(n, k)
    det = determinant(matmul(H, transpose(H))) if H.rows else 1
    cb = ts = count = None
    if sums:
        cb = 0
        ts = 0
        count = 0
        cols = H.cols
        for idx, d in tree_bases(n, k, budget):
            cb += d * d
            t = reduced_homology(Complex(n, k, frozenset(cols[i] for i in idx)), k - 1)[1]
            ts += t * t
            count += 1
    return KalaiReport(n, k, det, cb, ts, normalizer(n, k), count)

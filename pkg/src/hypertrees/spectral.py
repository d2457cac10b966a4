"""Spectral gaps of random link graphs and local-to-global checks.

The link-union graph ``L(n, k, m)`` is the union of ``m`` uniform spanning
trees of ``K_n`` and one binomial graph ``G(n, p)`` with
``p = 1 - (1 - (k-1)/(n+k-1))^m``.  This is the law of the link of a
(k-2)-simplex in a union of ``m`` independent k-hypertrees on ``n+k-1``
vertices, sampled without ever building the hypertrees.
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence, TextIO

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from .determinantal import draw_rng, ust_edges
from .exact_linalg import rank
from .homology import closure
from .simplicial_core import Complex, Face, boundary_submatrix, colex_sorted

RESIDUAL_TOL = 1e-9
ZERO_TOL = 1e-9
UPDOWN_LIMIT = 3000
CSV_FIELDS = ("n", "k", "m", "seed", "lambda2", "min_deg", "avg_deg", "connected", "residual")


class IsolatedVertexError(ValueError):
    """The normalized Laplacian needs every degree to be positive."""


class ConvergenceError(ArithmeticError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


class PurityError(ValueError):
    pass


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices ``1..n``."""

    n: int
    edges: frozenset[tuple[int, int]] = frozenset()

    def __post_init__(self):
        canon = set()
        for u, v in self.edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"self-loop at {u}")
            if not (1 <= u <= self.n and 1 <= v <= self.n):
                raise ValueError(f"edge ({u}, {v}) outside 1..{self.n}")
            canon.add((min(u, v), max(u, v)))
        object.__setattr__(self, "edges", frozenset(canon))

    def adjacency(self) -> sparse.csr_matrix:
        if not self.edges:
            return sparse.csr_matrix((self.n, self.n))
        e = np.array(sorted(self.edges)) - 1
        rows = np.concatenate([e[:, 0], e[:, 1]])
        cols = np.concatenate([e[:, 1], e[:, 0]])
        return sparse.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(self.n, self.n))

    def degrees(self) -> np.ndarray:
        d = np.zeros(self.n, dtype=np.int64)
        for u, v in self.edges:
            d[u - 1] += 1
            d[v - 1] += 1
        return d


# --- generators ---------------------------------------------------------------

def link_union_p(n: int, k: int, m: int) -> Fraction:
    return 1 - (1 - Fraction(k - 1, n + k - 1)) ** m


def link_union_edge_probability(n: int, k: int, m: int) -> Fraction:
    """Exact marginal probability that a given edge appears in ``L(n, k, m)``."""
    return 1 - (1 - link_union_p(n, k, m)) * (1 - Fraction(2, n)) ** m


def _binomial_edges(n: int, p: float, rng: np.random.Generator) -> set[tuple[int, int]]:
    if p <= 0:
        return set()
    iu, ju = np.triu_indices(n, k=1)
    mask = rng.random(len(iu)) < p
    return set(zip((iu[mask] + 1).tolist(), (ju[mask] + 1).tolist()))


def sample_link_union(n: int, k: int, m: int, seed: int) -> Graph:
    if n < 3 or m < 1 or k < 2:
        raise ValueError(f"need n >= 3, m >= 1, k >= 2; got n={n}, k={k}, m={m}")
    rng = draw_rng(seed, 0)
    edges: set[tuple[int, int]] = set()
    for _ in range(m):
        edges.update(ust_edges(n, rng))
    edges |= _binomial_edges(n, float(link_union_p(n, k, m)), rng)
    return Graph(n, frozenset(edges))


def er_baseline(n: int, p: float, seed: int) -> Graph:
    """Erdos-Renyi graph ``G(n, p)``."""
    return Graph(n, frozenset(_binomial_edges(n, float(p), draw_rng(seed, 0))))


# --- normalized Laplacian -----------------------------------------------------

@dataclass(frozen=True)
class SpectralReport:
    lambda2: float
    min_degree: int
    avg_degree: float
    connected: bool
    residual: float
    method: str
    n: int = 0

    def to_record(self) -> dict:
        return asdict(self)


def normalized_laplacian(G: Graph) -> sparse.csr_matrix:
    """``I - D^{-1/2} A D^{-1/2}`` as a sparse matrix."""
    d = G.degrees()
    if G.n and d.min() == 0:
        raise IsolatedVertexError(f"vertex {int(np.argmin(d)) + 1} is isolated")
    s = sparse.diags(1.0 / np.sqrt(d))
    return (sparse.identity(G.n) - s @ G.adjacency() @ s).tocsr()


def _residual(L: sparse.csr_matrix, lam: float, v: np.ndarray) -> float:
    return float(np.linalg.norm(L @ v - lam * v) / np.linalg.norm(v))


def lambda2(G: Graph, method: str = "auto", tol: float = RESIDUAL_TOL, maxiter: int | None = None) -> SpectralReport:
    """Second smallest eigenvalue of the normalized Laplacian, with a residual certificate.

    ``iterative`` runs Lanczos on ``D^{-1/2} A D^{-1/2}`` with the known top
    eigenvector ``D^{1/2} 1`` shifted to the bottom of the spectrum.
    ``dense`` diagonalizes the full matrix.  ``auto`` uses dense for n < 10.
    """
    L = normalized_laplacian(G)
    d = G.degrees()
    n = G.n
    ncomp, labels = connected_components(G.adjacency(), directed=False)
    stats = dict(min_degree=int(d.min()), avg_degree=float(d.mean()), n=n)
    if n < 2:
        raise ValueError("lambda2 needs at least two vertices")
    if ncomp > 1:
        # D^{1/2} times a component indicator spans part of the kernel
        sq = np.sqrt(d)
        v = np.where(labels == labels[0], sq, 0.0)
        return SpectralReport(0.0, connected=False, residual=_residual(L, 0.0, v), method="components", **stats)
    if method == "auto":
        method = "dense" if n < 10 else "iterative"
    if method == "dense":
        w, V = np.linalg.eigh(L.toarray())
        lam, v = float(w[1]), V[:, 1]
    elif method == "iterative":
        lam, v = _lanczos(G, d, tol, maxiter)
    else:
        raise ValueError(f"unknown method {method!r}")
    res = _residual(L, lam, v)
    if res > tol:
        raise ConvergenceError("eigensolver did not reach the residual target", res)
    return SpectralReport(lam, connected=True, residual=res, method=method, **stats)


def _lanczos(G: Graph, d: np.ndarray, tol: float, maxiter: int | None) -> tuple[float, np.ndarray]:
    n = G.n
    s = 1.0 / np.sqrt(d)
    M = sparse.diags(s) @ G.adjacency() @ sparse.diags(s)
    u = np.sqrt(d) / np.linalg.norm(np.sqrt(d))

    def matvec(x):
        x = np.ravel(x)
        return M @ x - 2.0 * u * (u @ x)

    op = LinearOperator((n, n), matvec=matvec, dtype=float)
    v0 = np.random.default_rng(0).standard_normal(n)
    best = None
    for ncv in (None, min(n - 1, 64), min(n - 1, 160)):
        try:
            w, V = eigsh(op, k=1, which="LA", tol=tol * 1e-3, v0=v0, ncv=ncv,
                         maxiter=maxiter or 20 * n)
        except ArpackNoConvergence as exc:
            if exc.eigenvalues.size:
                w, V = exc.eigenvalues, exc.eigenvectors
            else:
                continue
        v = V[:, 0] - u * (u @ V[:, 0])
        lam = 1.0 - float(w[0])
        res = _residual(sparse.identity(n) - M, lam, v)
        if best is None or res < best[2]:
            best = (lam, v, res)
        if res <= tol:
            break
    if best is None:
        raise ConvergenceError("Lanczos produced no eigenpair", math.inf)
    return best[0], best[1]


# --- complexes: links, Garland, Zuk -------------------------------------------

def _top_faces(X: Complex | Iterable[Sequence[int]]) -> tuple[int, list[Face]]:
    """Dimension and top faces of a pure complex, checking purity of a :class:`Complex`."""
    if isinstance(X, Complex):
        covered = {f[:j] + f[j + 1:] for f in X.kfaces for j in range(len(f))}
        missing = [f for f in _faces_of_skeleton(X) if f not in covered]
        if missing:
            raise PurityError(f"(k-1)-face {missing[0]} lies in no top face")
        return X.k, colex_sorted(X.kfaces)
    tops = colex_sorted({tuple(sorted(f)) for f in X})
    sizes = {len(f) for f in tops}
    if len(sizes) != 1:
        raise PurityError(f"top faces of several dimensions: {sorted(s - 1 for s in sizes)}")
    return sizes.pop() - 1, tops


def _faces_of_skeleton(X: Complex) -> list[Face]:
    return list(combinations(range(1, X.n + 1), X.k))


def link_graph(tau: Face, tops: Iterable[Face]) -> tuple[list[int], set[tuple[int, int]]]:
    """Vertices and edges of the link of a (k-2)-face inside the top faces."""
    t = set(tau)
    verts: set[int] = set()
    edges: set[tuple[int, int]] = set()
    for f in tops:
        if t <= set(f):
            rest = tuple(v for v in f if v not in t)
            if len(rest) == 2:
                edges.add(rest)
                verts.update(rest)
    return sorted(verts), edges


def _graph_gap(verts: list[int], edges: set[tuple[int, int]]) -> tuple[bool, float]:
    if len(verts) < 2:
        return False, 0.0
    relabel = {v: i + 1 for i, v in enumerate(verts)}
    G = Graph(len(verts), frozenset((relabel[a], relabel[b]) for a, b in edges))
    rep = lambda2(G, method="dense")
    return rep.connected, rep.lambda2


@dataclass(frozen=True)
class GarlandReport:
    k: int
    epsilon: float
    bound: float
    actual: float | None
    consistent: bool | None
    vacuous: bool
    worst_link: Face | None
    link_gaps: dict = field(default_factory=dict, repr=False)


def updown_gap(X: Complex | Iterable[Sequence[int]], limit: int = UPDOWN_LIMIT) -> float:
    """Smallest nonzero eigenvalue of the weighted top up-down Laplacian, past coboundaries.

    The operator on (k-1)-cochains is ``W^{-1/2} B B^T W^{-1/2}`` with ``B`` the
    boundary from top faces to (k-1)-faces and ``W`` counting the top faces
    containing each (k-1)-face.  Its kernel always contains the coboundaries;
    any further zero eigenvalue is nontrivial cohomology and gives gap 0.
    """
    k, tops = _top_faces(X)
    if len(tops) > limit:
        raise ValueError(f"{len(tops)} top faces exceeds the dense limit {limit}")
    layers: dict[int, list[Face]] = {}
    for f in closure(tops):
        layers.setdefault(len(f) - 1, []).append(f)
    lows = colex_sorted(layers[k - 1])
    B = np.array(boundary_submatrix(lows, tops).entries, dtype=float).reshape(len(lows), len(tops))
    w = np.abs(B).sum(axis=1)
    s = 1.0 / np.sqrt(w)
    A = (s[:, None] * (B @ B.T)) * s[None, :]
    ev = np.linalg.eigvalsh(A)
    below = colex_sorted(layers.get(k - 2, [()]))
    cobound = rank(boundary_submatrix(below, lows)) if below else 0
    zeros = int(np.sum(np.abs(ev) < ZERO_TOL * max(1.0, ev[-1])))
    if zeros > cobound:
        return 0.0
    return float(ev[cobound])


def garland_report(X: Complex | Iterable[Sequence[int]], actual: bool = True) -> GarlandReport:
    """Local link gaps, the implied global bound ``1 - k eps``, and optionally the true gap."""
    k, tops = _top_faces(X)
    if k < 2:
        raise ValueError("Garland's bound needs k >= 2")
    taus = {tau for f in tops for tau in combinations(f, k - 1)}
    gaps = {}
    for tau in colex_sorted(taus):
        conn, lam = _graph_gap(*link_graph(tau, tops))
        gaps[tau] = lam if conn else 0.0
    worst = min(gaps, key=gaps.get)
    eps = 1.0 - gaps[worst]
    bound = 1.0 - k * eps
    vacuous = bound <= 0
    gap = updown_gap(tops) if actual else None
    consistent = None if gap is None else gap >= bound - 1e-8
    return GarlandReport(k, eps, bound, gap, consistent, vacuous, worst, gaps)


@dataclass(frozen=True)
class ZukReport:
    verdict: bool
    links: dict  # vertex -> (connected, lambda0)


def zuk_report(X: Complex | Iterable[Sequence[int]]) -> ZukReport:
    """Every vertex link connected with normalized gap above 1/2."""
    k, tops = _top_faces(X)
    if k != 2:
        raise ValueError("the criterion applies to 2-dimensional complexes")
    table = {}
    for v in sorted({v for f in tops for v in f}):
        table[v] = _graph_gap(*link_graph((v,), tops))
    verdict = all(c and lam > 0.5 for c, lam in table.values())
    return ZukReport(verdict, table)


# --- sweeps and I/O -----------------------------------------------------------

@dataclass
class SweepConfig:
    ns: Sequence[int]
    k: int = 2
    ms: Sequence[int] | None = None  # None: ceil(2 ln n)
    runs: int = 20
    seed: int = 0


def default_m(n: int) -> int:
    return math.ceil(2 * math.log(n))


def sweep(config: SweepConfig) -> list[dict]:
    """One row per (n, m, run) with the fields of :data:`CSV_FIELDS`."""
    rows = []
    for n in config.ns:
        for m in (config.ms or [default_m(n)]):
            for r in range(config.runs):
                seed = config.seed + r
                rep = lambda2(sample_link_union(n, config.k, m, seed))
                rows.append(dict(n=n, k=config.k, m=m, seed=seed, lambda2=rep.lambda2,
                                 min_deg=rep.min_degree, avg_deg=rep.avg_degree,
                                 connected=int(rep.connected), residual=rep.residual))
    return rows


def write_csv(rows: Iterable[dict], fh: TextIO) -> None:
    w = csv.DictWriter(fh, fieldnames=CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({key: (repr(v) if isinstance(v, float) else v) for key, v in row.items()})


def write_edge_list(G: Graph, fh: TextIO) -> None:
    fh.write(f"# n {G.n}\n")
    for u, v in sorted(G.edges):
        fh.write(f"{u} {v}\n")


def read_edge_list(fh: TextIO, n: int | None = None) -> Graph:
    """Parse ``u v`` lines; ``# n N`` sets the vertex count, else the largest label."""
    edges = []
    header_n = None
    for line in fh:
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) == 2 and parts[0] == "n":
                header_n = int(parts[1])
            continue
        u, v = line.split()[:2]
        edges.append((int(u), int(v)))
    if n is None:
        n = header_n if header_n is not None else max((max(e) for e in edges), default=0)
    return Graph(n, frozenset(edges))

"""Exact checks of the vertex-splitting structure of the determinantal measure.

Every law here is a :class:`LawTable` of exact fractions, built by
enumerating hypertrees and pushing their masses forward.  Model laws are
built independently from smaller hypertree measures and product Bernoulli
laws, so each comparison is between two separately computed tables.

Notation: ``nu(n, k)`` is the hypertree measure; ``mu(n-1, j)`` is the
product law on j-faces of ``[n-1]`` with inclusion probability ``1/n``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Callable, Iterable, Mapping

from .determinantal import bridge_check, kernel_P, normalizer
from .exact_linalg import determinant
from .homology import relative_homology
from .simplicial_core import Complex, Face, boundary_submatrix, colex_sorted, faces, link, proj
from .trees_forests import DEFAULT_BUDGET, tree_list, tree_size

Key = tuple


# --- laws ---------------------------------------------------------------------

@dataclass
class LawTable:
    """Finite law on complexes, keyed by :meth:`Complex.key`."""

    mass: dict[Key, Fraction] = field(default_factory=dict)

    def add(self, key: Key, p: Fraction) -> None:
        if p:
            self.mass[key] = self.mass.get(key, Fraction(0)) + p

    @property
    def support(self) -> list[Complex]:
        return [Complex.from_faces(n, k, fs) for n, k, fs in sorted(self.mass)]

    def total(self) -> Fraction:
        return sum(self.mass.values(), Fraction(0))

    def __getitem__(self, key: Key) -> Fraction:
        return self.mass.get(key, Fraction(0))

    def __eq__(self, other) -> bool:
        if not isinstance(other, LawTable):
            return NotImplemented
        return self.mass == other.mass

    def discrepancy(self, other: "LawTable") -> Fraction:
        keys = set(self.mass) | set(other.mass)
        return max((abs(self[x] - other[x]) for x in keys), default=Fraction(0))


def subsets(items) -> Iterable[tuple]:
    items = tuple(items)
    for r in range(len(items) + 1):
        yield from combinations(items, r)


def lm_mass(n: int, k: int, p: Fraction, Y: Iterable[Face]) -> Fraction:
    """Product Bernoulli(p) mass of the k-face set ``Y`` on ``[n]``."""
    p = Fraction(p)
    m = len(set(map(tuple, Y)))
    return p ** m * (1 - p) ** (comb(n, k + 1) - m)


def lm_law(n: int, k: int, p: Fraction) -> LawTable:
    """Full table of the k-dimensional complex on ``[n]`` with independent faces."""
    law = LawTable()
    for Y in subsets(faces(n, k)):
        law.add(Complex(n, k, frozenset(Y)).key(), lm_mass(n, k, p, Y))
    return law


def nu_law(n: int, k: int, budget: int = DEFAULT_BUDGET) -> LawTable:
    law = LawTable()
    for T, t in tree_list(n, k, budget):
        law.add(T.key(), Fraction(t * t, normalizer(n, k)))
    return law


def merge_probability(p: Fraction, q: Fraction) -> Fraction:
    """Inclusion probability of a face in the union of two independent layers."""
    return p + q - p * q


def tv_distance(empirical: Mapping[Key, float | int], law: LawTable | Mapping[Key, Fraction]) -> float:
    """Total variation between a histogram (counts or frequencies) and a law."""
    ref = law.mass if isinstance(law, LawTable) else law
    total = sum(empirical.values())
    if total == 0:
        raise ValueError("empty histogram")
    keys = set(empirical) | set(ref)
    return 0.5 * sum(abs(empirical.get(x, 0) / total - float(ref.get(x, 0))) for x in keys)


# --- pushforwards and models --------------------------------------------------

def _pushforward(n: int, k: int, f: Callable[[Complex], Complex], budget: int) -> LawTable:
    law = LawTable()
    for T, t in tree_list(n, k, budget):
        law.add(f(T).key(), Fraction(t * t, normalizer(n, k)))
    return law


def link_law_exact(n: int, k: int, budget: int = DEFAULT_BUDGET) -> LawTable:
    return _pushforward(n, k, lambda T: link(n, T), budget)


def proj_law_exact(n: int, k: int, budget: int = DEFAULT_BUDGET) -> LawTable:
    return _pushforward(n, k, lambda T: proj(n, T), budget)


def union_model(m: int, j: int, p: Fraction, base: LawTable) -> LawTable:
    """Law of ``B`` united with independent Bernoulli(p) j-faces on ``[m]``."""
    all_faces = frozenset(faces(m, j))
    law = LawTable()
    for (_, _, fs), w in base.mass.items():
        B = frozenset(fs)
        missing = colex_sorted(all_faces - B)
        for extra in subsets(missing):
            law.add(Complex(m, j, B | frozenset(extra)).key(),
                    w * p ** len(extra) * (1 - p) ** (len(missing) - len(extra)))
    return law


def thinning_model(m: int, j: int, q: Fraction, base: LawTable) -> LawTable:
    """Law of ``B`` with each face deleted independently with probability ``q``."""
    law = LawTable()
    for (_, _, fs), w in base.mass.items():
        for kept in subsets(fs):
            law.add(Complex(m, j, frozenset(kept)).key(),
                    w * (1 - q) ** len(kept) * q ** (len(fs) - len(kept)))
    return law


def model_link_law(n: int, k: int, budget: int = DEFAULT_BUDGET) -> LawTable:
    return union_model(n - 1, k - 1, Fraction(1, n), nu_law(n - 1, k - 1, budget))


def model_proj_law(n: int, k: int, budget: int = DEFAULT_BUDGET) -> LawTable:
    return thinning_model(n - 1, k, Fraction(1, n), nu_law(n - 1, k, budget))


def simplex_link(X: Complex, j: int) -> Complex:
    """Link of the simplex ``{n-j+1, ..., n}`` as a (k-j)-complex on ``[n-j]``."""
    n = X.n
    sigma = tuple(range(n - j + 1, n + 1))
    return Complex(n - j, X.k - j, frozenset(f[:-j] for f in X.kfaces if f[-j:] == sigma))


def simplex_link_law(n: int, k: int, j: int, budget: int = DEFAULT_BUDGET) -> LawTable:
    return _pushforward(n, k, lambda T: simplex_link(T, j), budget)


def model_simplex_link_law(n: int, k: int, j: int, budget: int = DEFAULT_BUDGET) -> LawTable:
    return union_model(n - j, k - j, Fraction(j, n), nu_law(n - j, k - j, budget))


# --- reports ------------------------------------------------------------------

@dataclass(frozen=True)
class VerificationReport:
    identity: str
    n: int
    k: int
    method: str
    verdict: bool
    max_discrepancy: Fraction | float
    detail: str = ""

    def to_record(self) -> dict:
        d = self.max_discrepancy
        return {"identity": self.identity, "n": self.n, "k": self.k, "method": self.method,
                "verdict": "pass" if self.verdict else "fail",
                "max_discrepancy": str(d) if isinstance(d, Fraction) else d,
                "detail": self.detail}


def _law_report(name: str, n: int, k: int, a: LawTable, b: LawTable, detail: str = "") -> VerificationReport:
    disc = a.discrepancy(b)
    ok = a == b and a.total() == 1
    return VerificationReport(name, n, k, "exact", ok, disc, detail)


def link_law_check(n: int, k: int, budget: int = DEFAULT_BUDGET) -> VerificationReport:
    return _law_report("link-law", n, k, link_law_exact(n, k, budget), model_link_law(n, k, budget))


def proj_law_check(n: int, k: int, budget: int = DEFAULT_BUDGET) -> VerificationReport:
    return _law_report("proj-law", n, k, proj_law_exact(n, k, budget), model_proj_law(n, k, budget))


def simplex_link_law_check(n: int, k: int, j: int, budget: int = DEFAULT_BUDGET) -> VerificationReport:
    if not 1 <= j <= k:
        raise ValueError(f"need 1 <= j <= k, got j={j}, k={k}")
    return _law_report("simplex-link", n, k, simplex_link_law(n, k, j, budget),
                       model_simplex_link_law(n, k, j, budget), f"j={j}")


def incr_identity_check(n: int, k: int, budget: int = DEFAULT_BUDGET) -> VerificationReport:
    """Projection and link masses against containment probabilities one level down.

    ``nu(Proj = F) = nu'(T' >= F) (1 - 1/n)^|F| n^(|F| - C(n-2,k))`` for every k-face
    set ``F`` on ``[n-1]``, and
    ``nu(Link = E) = nu''(T'' <= E) (1 - 1/n)^|Ebar| n^(|Ebar| - C(n-2,k))`` for every
    (k-1)-face set ``E``, where ``Ebar`` is the complement of ``E`` on ``[n-1]``.
    """
    m = n - 1
    c = comb(n - 2, k)
    shrink = 1 - Fraction(1, n)
    projs = proj_law_exact(n, k, budget)
    links = link_law_exact(n, k, budget)
    upper = tree_list(m, k, budget)
    lower = tree_list(m, k - 1, budget)
    worst = Fraction(0)
    ok = True
    for F in subsets(faces(m, k)):
        Fs = frozenset(F)
        contain = sum((Fraction(t * t, normalizer(m, k)) for T, t in upper if Fs <= T.kfaces), Fraction(0))
        rhs = contain * shrink ** len(F) * Fraction(n) ** (len(F) - c)
        lhs = projs[Complex(m, k, Fs).key()]
        worst = max(worst, abs(lhs - rhs))
        ok &= lhs == rhs
    low_faces = frozenset(faces(m, k - 1))
    for E in subsets(faces(m, k - 1)):
        Es = frozenset(E)
        ebar = len(low_faces) - len(Es)
        inside = sum((Fraction(t * t, normalizer(m, k - 1)) for T, t in lower if T.kfaces <= Es), Fraction(0))
        rhs = inside * shrink ** ebar * Fraction(n) ** (ebar - c)
        lhs = links[Complex(m, k - 1, Es).key()]
        worst = max(worst, abs(lhs - rhs))
        ok &= lhs == rhs
    return VerificationReport("incr", n, k, "exact", ok, worst)


def split_product_check(n: int, k: int, budget: int = DEFAULT_BUDGET) -> VerificationReport:
    """Two formulas for the mass of each hypertree, from its projection and link.

    For every T: ``nu(T) = det(d[Ebar, F])^2 / n^C(n-2,k) = |H_{k-1}(F, E)|^2 / n^C(n-2,k)``
    with ``d`` the boundary map on ``[n-1]``.  When both pieces are hypertrees,
    also ``nu(T) = nu'(F) nu''(E) (1 - 1/n)^C(n-2,k)``.
    """
    m = n - 1
    c = comb(n - 2, k)
    upper = {T.kfaces: t for T, t in tree_list(m, k, budget)}
    lower = {T.kfaces: t for T, t in tree_list(m, k - 1, budget)}
    low_faces = faces(m, k - 1)
    worst = Fraction(0)
    ok = True
    qualifying = 0
    for T, t in tree_list(n, k, budget):
        mass = Fraction(t * t, normalizer(n, k))
        F, E = proj(n, T), link(n, T)
        ebar = [f for f in low_faces if f not in E.kfaces]
        d = determinant(boundary_submatrix(ebar, F.sorted_faces()))
        rel = relative_homology(F, E, k - 1)
        values = [Fraction(d * d, n ** c), Fraction(rel[1] ** 2, n ** c) if rel[0] == 0 else Fraction(0)]
        if F.kfaces in upper and E.kfaces in lower:
            qualifying += 1
            a, b = upper[F.kfaces], lower[E.kfaces]
            values.append(Fraction(a * a, normalizer(m, k)) * Fraction(b * b, normalizer(m, k - 1))
                          * (1 - Fraction(1, n)) ** c)
        for v in values:
            worst = max(worst, abs(v - mass))
            ok &= v == mass
    return VerificationReport("split", n, k, "exact", ok, worst, f"qualifying={qualifying}")


# --- couplings ----------------------------------------------------------------

class _CouplingData:
    """Precomputed marginals for the pi / lambda densities at ``(n, k)``."""

    def __init__(self, n: int, k: int, budget: int):
        self.n, self.k, self.m = n, k, n - 1
        self.p = Fraction(1, n)
        self.trees = [(T, Fraction(t * t, normalizer(n, k))) for T, t in tree_list(n, k, budget)]
        self.upper = [(T, Fraction(t * t, normalizer(n - 1, k))) for T, t in tree_list(n - 1, k, budget)]
        self.lower = [(T, Fraction(t * t, normalizer(n - 1, k - 1))) for T, t in tree_list(n - 1, k - 1, budget)]
        self.proj_mass = proj_law_exact(n, k, budget)
        self.link_mass = link_law_exact(n, k, budget)

    def pi(self, T: Complex, nuT: Fraction, Tp: Complex, nuTp: Fraction, Yp: frozenset) -> Fraction:
        target = Complex(self.m, self.k, Tp.kfaces - Yp)
        if proj(self.n, T) != target:
            return Fraction(0)
        denom = self.proj_mass[target.key()]
        return lm_mass(self.m, self.k, self.p, Yp) * nuTp * nuT / denom

    def lam(self, T: Complex, nuT: Fraction, Tpp: Complex, nuTpp: Fraction, Ypp: frozenset) -> Fraction:
        target = Complex(self.m, self.k - 1, Tpp.kfaces | Ypp)
        if link(self.n, T) != target:
            return Fraction(0)
        denom = self.link_mass[target.key()]
        return lm_mass(self.m, self.k - 1, self.p, Ypp) * nuTpp * nuT / denom


def _mass_of(pairs, X: Complex) -> Fraction:
    for Y, w in pairs:
        if Y == X:
            return w
    return Fraction(0)


def coupling_density_eval(kind: str, T: Complex, sub: Complex, Y: Iterable[Face],
                          budget: int = DEFAULT_BUDGET) -> Fraction:
    """``pi(T, T', Y')`` (kind ``"pi"``) or ``lambda(T, T'', Y'')`` (kind ``"lambda"``)."""
    n, k = T.n, T.k
    data = _CouplingData(n, k, budget)
    Y = frozenset(tuple(f) for f in Y)
    nuT = _mass_of(data.trees, T)
    if kind == "pi":
        return data.pi(T, nuT, sub, _mass_of(data.upper, sub), Y) if nuT else Fraction(0)
    if kind == "lambda":
        return data.lam(T, nuT, sub, _mass_of(data.lower, sub), Y) if nuT else Fraction(0)
    raise ValueError(f"unknown density {kind!r}")


@dataclass
class JointTables:
    """Marginals of the five-way density accumulated over its support."""

    total: Fraction = Fraction(0)
    event: Fraction = Fraction(0)
    T: LawTable = field(default_factory=LawTable)
    Tp: LawTable = field(default_factory=LawTable)
    Tpp: LawTable = field(default_factory=LawTable)
    Yp: LawTable = field(default_factory=LawTable)
    Ypp: LawTable = field(default_factory=LawTable)
    TpYp: LawTable = field(default_factory=LawTable)
    TppYpp: LawTable = field(default_factory=LawTable)
    TTp: LawTable = field(default_factory=LawTable)
    TTpp: LawTable = field(default_factory=LawTable)
    TTpTpp: LawTable = field(default_factory=LawTable)
    faces_ok: bool = True


def joint_tables(n: int, k: int, budget: int = DEFAULT_BUDGET) -> JointTables:
    """Accumulate ``pi * lambda / nu`` over every (T, T', T'', Y', Y'')."""
    if not 1 <= k < n - 1:
        raise ValueError(f"need 1 <= k < n-1, got n={n}, k={k}")
    d = _CouplingData(n, k, budget)
    m = d.m
    out = JointTables()
    up_sets = list(subsets(faces(m, k)))
    low_sets = list(subsets(faces(m, k - 1)))
    for T, nuT in d.trees:
        P = proj(n, T).kfaces
        L = link(n, T).kfaces
        # only terms with a nonzero indicator contribute
        pis = [(Tp, frozenset(Y), d.pi(T, nuT, Tp, w, frozenset(Y)))
               for Tp, w in d.upper if P <= Tp.kfaces
               for Y in up_sets if Tp.kfaces - frozenset(Y) == P]
        lams = [(Tpp, frozenset(Y), d.lam(T, nuT, Tpp, w, frozenset(Y)))
                for Tpp, w in d.lower if Tpp.kfaces <= L
                for Y in low_sets if Tpp.kfaces | frozenset(Y) == L]
        for Tp, Yp, a in pis:
            for Tpp, Ypp, b in lams:
                w = a * b / nuT
                if not w:
                    continue
                out.total += w
                rebuilt = (Tp.kfaces - Yp) | frozenset(f + (n,) for f in Tpp.kfaces | Ypp)
                if rebuilt == T.kfaces:
                    out.event += w
                out.faces_ok &= len(rebuilt) == tree_size(n, k)
                out.T.add(T.key(), w)
                out.Tp.add(Tp.key(), w)
                out.Tpp.add(Tpp.key(), w)
                out.Yp.add(Complex(m, k, Yp).key(), w)
                out.Ypp.add(Complex(m, k - 1, Ypp).key(), w)
                out.TpYp.add((Tp.key(), Complex(m, k, Yp).key()), w)
                out.TppYpp.add((Tpp.key(), Complex(m, k - 1, Ypp).key()), w)
                out.TTp.add((T.key(), Tp.key()), w)
                out.TTpp.add((T.key(), Tpp.key()), w)
                out.TTpTpp.add((T.key(), Tp.key(), Tpp.key()), w)
    return out


def coupling_marginals_check(n: int, k: int, budget: int = DEFAULT_BUDGET) -> VerificationReport:
    """The five one-dimensional marginals and the two independence claims."""
    J = joint_tables(n, k, budget)
    m = n - 1
    p = Fraction(1, n)
    refs = [
        (J.T, nu_law(n, k, budget)),
        (J.Tp, nu_law(m, k, budget)),
        (J.Tpp, nu_law(m, k - 1, budget)),
        (J.Yp, lm_law(m, k, p)),
        (J.Ypp, lm_law(m, k - 1, p)),
    ]
    worst = max(a.discrepancy(b) for a, b in refs)
    ok = J.total == 1 and all(a == b for a, b in refs)
    for joint, A, B in ((J.TpYp, J.Tp, J.Yp), (J.TppYpp, J.Tpp, J.Ypp)):
        for (x, y), w in joint.mass.items():
            gap = abs(w - A[x] * B[y])
            worst = max(worst, gap)
            ok &= gap == 0
        ok &= len(joint.mass) == len(A.mass) * len(B.mass)
    return VerificationReport("coupling-marginals", n, k, "exact", ok, worst)


def joint_density_check(n: int, k: int, budget: int = DEFAULT_BUDGET) -> VerificationReport:
    """Total mass 1, the splitting event almost surely, marginals, and conditional
    independence of T' and T'' given T."""
    J = joint_tables(n, k, budget)
    marg = coupling_marginals_check(n, k, budget)
    worst = max(Fraction(marg.max_discrepancy), abs(J.total - 1), abs(J.event - 1))
    ok = marg.verdict and J.total == 1 and J.event == 1 and J.faces_ok
    for (t, a, b), w in J.TTpTpp.mass.items():
        gap = abs(w * J.T[t] - J.TTp[(t, a)] * J.TTpp[(t, b)])
        worst = max(worst, gap)
        ok &= gap == 0
    return VerificationReport("coupling-joint", n, k, "exact", ok, worst)


# --- negative association -----------------------------------------------------

def negative_association_check(n: int, k: int, budget: int = DEFAULT_BUDGET) -> VerificationReport:
    """``nu(f, g in T) <= nu(f in T) nu(g in T)`` for all face pairs, by enumeration.

    Pair probabilities are also compared with the 2x2 kernel minors.
    """
    fs = faces(n, k)
    idx = {f: i for i, f in enumerate(fs)}
    single = [Fraction(0)] * len(fs)
    pair: dict[tuple[int, int], Fraction] = {}
    for T, t in tree_list(n, k, budget):
        w = Fraction(t * t, normalizer(n, k))
        ids = sorted(idx[f] for f in T.kfaces)
        for i in ids:
            single[i] += w
        for i, j in combinations(ids, 2):
            pair[(i, j)] = pair.get((i, j), Fraction(0)) + w
    K = kernel_P(n, k).matrix
    ok = True
    worst = Fraction(0)
    for i, j in combinations(range(len(fs)), 2):
        both = pair.get((i, j), Fraction(0))
        minor = K.entry(i, i) * K.entry(j, j) - K.entry(i, j) * K.entry(j, i)
        ok &= both <= single[i] * single[j] and both == minor
        worst = max(worst, both - single[i] * single[j])
    return VerificationReport("negassoc", n, k, "exact", ok, worst)


def bridge_suite(n: int, k: int, samples: int = 12, seed: int = 0,
                 budget: int = DEFAULT_BUDGET) -> VerificationReport:
    """:func:`~hypertrees.determinantal.bridge_check` on seeded random face sets of size 1 and 2."""
    rnd = random.Random(seed)
    lows, tops = faces(n, k - 1), faces(n, k)
    ok = True
    worst = Fraction(0)
    for _ in range(samples):
        A = rnd.sample(lows, min(len(lows), rnd.choice((1, 2))))
        B = rnd.sample(tops, min(len(tops), rnd.choice((1, 2))))
        rep = bridge_check(n, k, A=A, B=B, budget=budget)
        ok &= rep.ok
        for vals in rep.values.values():
            worst = max(worst, max(vals) - min(vals))
    return VerificationReport("bridge", n, k, "exact", ok, worst)

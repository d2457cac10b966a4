"""Command-line interface: ``hypertrees {enumerate,sample,verify,linkgraph,spectral}``.

Complex records are JSON lines ``{"n":..,"k":..,"faces":[[..],..], ...}``.
Exit codes: 0 ok, 1 verification failure, 2 usage error, 3 budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import json
import random
import sys
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Callable, Iterator, TextIO

from . import coupling_lab as lab
from . import spectral
from .determinantal import METHODS, SamplerBreakdown, kalai_sum_verify, sample_many
from .homology import chain_check, euler_check, hodge_check
from .simplicial_core import Complex, faces
from .trees_forests import (DEFAULT_BUDGET, BudgetExceeded, enumerate_trees, split_candidates,
                            split_set_check, split_torsion_check, submain_bijection_check,
                            tree_list)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3
SUITES = ("kalai-sum", "hodge", "euler", "submain-bijection", "split", "bridge", "incr",
          "link-law", "proj-law", "simplex-link", "coupling-joint", "negassoc")


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    n: list[int] | int | None = None
    k: int | None = None
    m: int | None = None
    j: int | None = None
    count: int = 1
    seed: int | None = None
    method: str | None = None
    budget: int = DEFAULT_BUDGET
    out: str | None = None
    format: str = "lines"

    def need(self, *names: str) -> None:
        for name in names:
            if getattr(self, name) is None:
                raise UsageError(f"{self.command} requires --{name}")

    def validate(self) -> None:
        if self.budget < 1:
            raise UsageError("--budget must be positive")
        if self.count < 0:
            raise UsageError("--count must be nonnegative")
        ns = self.n if isinstance(self.n, list) else [self.n]
        for n in ns:
            if n is not None and n < 1:
                raise UsageError("--n must be positive")
            if n is not None and self.k is not None and not 0 <= self.k <= n - 1:
                raise UsageError(f"--k must lie in 0..{n - 1}")


def _dump(rec: dict) -> str:
    return json.dumps(rec, sort_keys=True, separators=(",", ":"))


@contextmanager
def _output(path: str | None) -> Iterator[TextIO]:
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _faces_str(rec: dict) -> str:
    return ";".join("-".join(map(str, f)) for f in rec["faces"])


def _write_records(records: list[dict], cfg: RunConfig, fields: tuple[str, ...]) -> None:
    with _output(cfg.out) as fh:
        if cfg.format == "csv":
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(fields)
            for rec in records:
                w.writerow([_faces_str(rec) if f == "faces" else rec.get(f, "") for f in fields])
        else:
            for rec in records:
                fh.write(_dump(rec) + "\n")


# --- commands -----------------------------------------------------------------

def cmd_enumerate(cfg: RunConfig) -> int:
    cfg.need("n", "k")
    trees = sorted(enumerate_trees(cfg.n, cfg.k, cfg.budget), key=lambda p: p[0].key())
    records = [dict(T.to_record(), torsion=t) for T, t in trees]
    _write_records(records, cfg, ("n", "k", "torsion", "faces"))
    total = sum(t * t for _, t in trees)
    power = cfg.n ** comb(cfg.n - 2, cfg.k) if cfg.n >= 2 else 1
    ok = total == power
    print(f"{len(trees)} trees; sum of squared torsion {total} {'=' if ok else '!='} {power}",
          file=sys.stderr)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_sample(cfg: RunConfig) -> int:
    cfg.need("n", "k", "seed")
    method = cfg.method or "exact"
    if method not in METHODS:
        raise UsageError(f"--method must be one of {', '.join(METHODS)}")
    try:
        recs = sample_many(cfg.n, cfg.k, cfg.count, cfg.seed, method)
    except SamplerBreakdown as exc:
        print(f"sampler breakdown: {exc}", file=sys.stderr)
        return EXIT_FAIL
    _write_records([r.to_record() for r in recs], cfg,
                   ("n", "k", "seed", "index", "method", "torsion", "probability", "faces"))
    return EXIT_OK


def _report(cfg: RunConfig, reports: list[lab.VerificationReport]) -> int:
    with _output(cfg.out) as fh:
        if cfg.format == "csv":
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("identity", "n", "k", "method", "verdict", "max_discrepancy", "detail"))
            for r in reports:
                rec = r.to_record()
                w.writerow([rec[c] for c in ("identity", "n", "k", "method", "verdict",
                                             "max_discrepancy", "detail")])
        else:
            for r in reports:
                fh.write(_dump(r.to_record()) + "\n")
    return EXIT_OK if all(r.verdict for r in reports) else EXIT_FAIL


def _verify_kalai(cfg: RunConfig) -> int:
    rep = kalai_sum_verify(cfg.n, cfg.k, cfg.budget)
    with _output(cfg.out) as fh:
        fh.write(f"{rep.determinant} = {rep.cauchy_binet} = {rep.torsion_sum}\n")
    if rep.power != rep.determinant:
        print(f"n^C(n-2,k) = {rep.power}", file=sys.stderr)
    return EXIT_OK if rep.equal else EXIT_FAIL


def _verify_hodge(cfg: RunConfig) -> list[lab.VerificationReport]:
    ks = [cfg.k] if cfg.k is not None else list(range(cfg.n))
    out = []
    for k in ks:
        ok = hodge_check(cfg.n, k) and chain_check(cfg.n, k)
        out.append(lab.VerificationReport("hodge", cfg.n, k, "exact", ok, Fraction(0) if ok else Fraction(1)))
    return out


def _verify_euler(cfg: RunConfig) -> list[lab.VerificationReport]:
    rnd = random.Random(cfg.seed or 0)
    n, k = cfg.n, cfg.k
    bad = sum(not euler_check(T) for T, _ in tree_list(n, k, cfg.budget))
    top = faces(n, k)
    for _ in range(200):
        X = Complex(n, k, frozenset(f for f in top if rnd.random() < 0.5))
        Y = Complex(n, k, frozenset(f for f in X.kfaces if rnd.random() < 0.5))
        bad += (not euler_check(X)) + (not euler_check(X, Y))
    return [lab.VerificationReport("euler", n, k, "exact", bad == 0, Fraction(bad))]


def _as_report(name: str, n: int, k: int, rep) -> lab.VerificationReport:
    return lab.VerificationReport(name, n, k, "exact", rep.ok, Fraction(len(rep.failures)),
                                  f"lhs={rep.trees} rhs={rep.rooted}")


def _verify_split(cfg: RunConfig) -> list[lab.VerificationReport]:
    n, k = cfg.n, cfg.k
    out = [lab.split_product_check(n, k, cfg.budget)]
    if split_candidates(n, k) <= cfg.budget:
        out.append(_as_report("split-set", n, k, split_set_check(n, k, cfg.budget)))
    pairs = len(tree_list(n, k, cfg.budget)) * len(tree_list(n, k - 1, cfg.budget))
    samples = None if pairs <= 10 ** 5 else 1000
    rep = split_torsion_check(n, k, samples, seed=cfg.seed or 0, budget=cfg.budget)
    out.append(_as_report("split-torsion", n, k, rep))
    return out


def cmd_verify(cfg: RunConfig, suite: str) -> int:
    cfg.need("n")
    if suite not in ("hodge",):
        cfg.need("k")
    if suite == "kalai-sum":
        return _verify_kalai(cfg)
    n, k, b = cfg.n, cfg.k, cfg.budget
    table: dict[str, Callable[[], list[lab.VerificationReport]]] = {
        "hodge": lambda: _verify_hodge(cfg),
        "euler": lambda: _verify_euler(cfg),
        "submain-bijection": lambda: [_as_report("submain-bijection", n, k, submain_bijection_check(n, k, b))],
        "split": lambda: _verify_split(cfg),
        "bridge": lambda: [lab.bridge_suite(n, k, seed=cfg.seed or 0, budget=b)],
        "incr": lambda: [lab.incr_identity_check(n, k, b)],
        "link-law": lambda: [lab.link_law_check(n, k, b)],
        "proj-law": lambda: [lab.proj_law_check(n, k, b)],
        "simplex-link": lambda: [lab.simplex_link_law_check(n, k, cfg.j if cfg.j is not None else 1, b)],
        "coupling-joint": lambda: [lab.joint_density_check(n, k, b)],
        "negassoc": lambda: [lab.negative_association_check(n, k, b)],
    }
    if suite in ("split", "bridge", "incr", "link-law", "submain-bijection") and k < 1:
        raise UsageError(f"{suite} needs k >= 1")
    return _report(cfg, table[suite]())


def cmd_linkgraph(cfg: RunConfig) -> int:
    cfg.need("n", "k", "m", "seed")
    G = spectral.sample_link_union(cfg.n, cfg.k, cfg.m, cfg.seed)
    with _output(cfg.out) as fh:
        spectral.write_edge_list(G, fh)
    return EXIT_OK


def _read_input(path: str) -> TextIO:
    return sys.stdin if path == "-" else open(path, encoding="utf-8")


def cmd_spectral(cfg: RunConfig, args: argparse.Namespace) -> int:
    if args.garland or args.zuk:
        if args.input is None:
            raise UsageError("--garland/--zuk read complex records from --input")
        fh = _read_input(args.input)
        recs = []
        for line in fh:
            if line.strip():
                X = Complex.from_record(json.loads(line))
                rec = {"n": X.n, "k": X.k}
                if args.garland:
                    g = spectral.garland_report(X.kfaces)
                    rec.update(epsilon=g.epsilon, bound=g.bound, actual=g.actual,
                               consistent=g.consistent, vacuous=g.vacuous)
                if args.zuk:
                    z = spectral.zuk_report(X.kfaces)
                    rec.update(zuk=z.verdict, min_link_gap=min(lam for _, lam in z.links.values()))
                recs.append(rec)
        with _output(cfg.out) as out:
            for rec in recs:
                out.write(_dump(rec) + "\n")
        return EXIT_OK if all(r.get("consistent", True) is not False for r in recs) else EXIT_FAIL
    if args.input is not None:
        G = spectral.read_edge_list(_read_input(args.input))
        rep = spectral.lambda2(G, method=args.eigen)
        with _output(cfg.out) as out:
            if cfg.format == "csv":
                row = dict(n=G.n, k="", m="", seed="", lambda2=rep.lambda2, min_deg=rep.min_degree,
                           avg_deg=rep.avg_degree, connected=int(rep.connected), residual=rep.residual)
                spectral.write_csv([row], out)
            else:
                out.write(_dump(rep.to_record()) + "\n")
        return EXIT_OK
    cfg.need("n", "seed")
    k = cfg.k if cfg.k is not None else 2
    ms = [cfg.m] if cfg.m is not None else None
    conf = spectral.SweepConfig(ns=cfg.n, k=k, ms=ms, runs=args.runs, seed=cfg.seed)
    rows = spectral.sweep(conf)
    with _output(cfg.out) as out:
        if cfg.format == "csv":
            spectral.write_csv(rows, out)
        else:
            for row in rows:
                out.write(_dump(row) + "\n")
    return EXIT_OK


# --- parser -------------------------------------------------------------------

def _common(p: argparse.ArgumentParser, multi_n: bool = False) -> None:
    if multi_n:
        p.add_argument("--n", type=int, nargs="+")
    else:
        p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--format", choices=("lines", "csv"), default="lines")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hypertrees", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enumerate", help="all k-hypertrees on [n] with torsion orders")
    _common(p)

    p = sub.add_parser("sample", help="draws from the determinantal hypertree measure")
    _common(p)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int)
    p.add_argument("--method", choices=METHODS, default="exact")

    p = sub.add_parser("verify", help="exact identity suites")
    p.add_argument("suite", choices=SUITES)
    _common(p)
    p.add_argument("--j", type=int)
    p.add_argument("--seed", type=int)

    p = sub.add_parser("linkgraph", help="edge list of a link-union graph")
    _common(p)
    p.add_argument("--m", type=int)
    p.add_argument("--seed", type=int)

    p = sub.add_parser("spectral", help="normalized Laplacian gaps and link criteria")
    _common(p, multi_n=True)
    p.add_argument("--m", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--input", help="edge list, or complex records with --garland/--zuk ('-' = stdin)")
    p.add_argument("--garland", action="store_true")
    p.add_argument("--zuk", action="store_true")
    p.add_argument("--eigen", choices=("auto", "dense", "iterative"), default="auto")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = RunConfig(**{f: getattr(args, f, None) for f in
                       ("command", "n", "k", "m", "j", "seed", "method", "out")},
                    count=getattr(args, "count", 1), budget=args.budget, format=args.format)
    try:
        cfg.validate()
        if args.command == "enumerate":
            return cmd_enumerate(cfg)
        if args.command == "sample":
            return cmd_sample(cfg)
        if args.command == "verify":
            return cmd_verify(cfg, args.suite)
        if args.command == "linkgraph":
            return cmd_linkgraph(cfg)
        return cmd_spectral(cfg, args)
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (UsageError, ValueError) as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

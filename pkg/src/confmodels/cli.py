"""Command-line interface: ``confmodels validate | betti | verify | catalog``.

Exit codes: 0 success, 1 a mathematical check failed, 2 bad input,
3 the size guard refused the job.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
from pathlib import Path
from typing import List, Optional, Sequence

from . import catalog
from .algebra import (
    AlgebraError,
    DimensionMismatch,
    ParseError,
    PDAlgebra,
    ValidationError,
    algebra_to_json,
    validate_algebra,
)
from .cohomology import Poly, betti, column_acyclicity, induced_rank
from .linalg import rank
from .model import (
    IsoViolation,
    ModelError,
    build_model,
    predicted_dim,
    psi,
    reduce_over_H,
)
from . import structure

ENGINE_VERSION = "1"
DEFAULT_LIMIT = 2_000_000
CACHE_ENV = "CONFIG_MODELS_CACHE"

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_SIZE = 0, 1, 2, 3


class InputError(Exception):
    pass


class TooLarge(Exception):
    def __init__(self, estimate: int, limit: int):
        super().__init__(f"predicted basis size {estimate} exceeds the limit {limit} (use --force)")
        self.estimate = estimate
        self.limit = limit


# ------------------------------------------------------------ input

def load_algebra(words: Sequence[str]) -> PDAlgebra:
    """``catalog:key params...`` or a path to an algebra JSON file."""
    text = " ".join(words).strip()
    if text.startswith("catalog:"):
        try:
            return catalog.get(*catalog.parse_catalog_spec(text[len("catalog:"):]))
        except (catalog.UnknownKey, catalog.BadParams) as exc:
            raise InputError(f"catalog: {exc}") from None
    path = Path(text)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ParseError("$", f"invalid JSON: {exc}") from None
    return validate_algebra(data)


def canonical_json(H: PDAlgebra) -> str:
    return json.dumps(algebra_to_json(H), sort_keys=True, separators=(",", ":"))


def cache_key(H: PDAlgebra, kind: str, n: int) -> str:
    blob = "\n".join([canonical_json(H), kind, str(n), ENGINE_VERSION])
    return hashlib.sha256(blob.encode()).hexdigest()


def guard(kind: str, H: PDAlgebra, n: int, limit: int, force: bool) -> int:
    estimate = predicted_dim(kind, H.dim, n)
    if estimate > limit and not force:
        raise TooLarge(estimate, limit)
    return estimate


# ------------------------------------------------------------ cache

def cache_dir(flag: Optional[str]) -> Optional[Path]:
    value = flag or os.environ.get(CACHE_ENV)
    return Path(value) if value else None


def cache_read(directory: Optional[Path], key: str) -> Optional[dict]:
    if directory is None:
        return None
    path = directory / f"{key}.json"
    try:
        return json.loads(path.read_text())
    except (OSError, json.JSONDecodeError):
        return None


def cache_write(directory: Optional[Path], key: str, payload: dict) -> None:
    if directory is None:
        return
    directory.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    with os.fdopen(fd, "w") as fh:
        json.dump(payload, fh, sort_keys=True)
    os.replace(tmp, directory / f"{key}.json")


# ------------------------------------------------------------ betti

def betti_payload(kind: str, H: PDAlgebra, n: int) -> dict:
    M = build_model(kind, H, n)
    table = betti(M).nonzero()
    poly = Poly(table)
    return {
        "model": kind,
        "algebra": H.name,
        "n": n,
        "betti": [{"p": p, "q": q, "dim": v} for (p, q), v in sorted(table.items())],
        "poincare_st": poly.format(),
        "poincare_t": poly.at_s(1).format(),
    }


def latex_poly(poly: Poly) -> str:
    """Factored form when every factor is at most linear in ``s``, else expanded."""
    import sympy

    expr = poly.to_sympy()
    s = sympy.Symbol("s")
    const, factors = sympy.factor_list(expr)
    if len(factors) > 1 or (factors and factors[0][1] > 1):
        if all(sympy.degree(f, s) <= 1 for f, _ in factors):
            return sympy.latex(sympy.factor(expr))
    return sympy.latex(sympy.expand(expr))


def render_betti(payload: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(payload, sort_keys=True, indent=2)
    poly = Poly({(e["p"], e["q"]): e["dim"] for e in payload["betti"]})
    if fmt == "latex":
        return f"P(s,t) = {latex_poly(poly)}"
    lines = [f"{payload['model']} model of {payload['algebra']}, n = {payload['n']}", "  p  q  dim"]
    lines += [f"{e['p']:3d}{e['q']:3d}{e['dim']:5d}" for e in payload["betti"]]
    lines.append(f"P(s,t) = {payload['poincare_st']}")
    lines.append(f"P(t)   = {payload['poincare_t']}")
    return "\n".join(lines)


def cmd_betti(args) -> int:
    H = load_algebra(args.algebra)
    kind = args.model
    guard(kind, H, args.n, args.max_basis, args.force)
    directory = cache_dir(args.cache_dir)
    key = cache_key(H, kind, args.n)
    payload = cache_read(directory, key)
    if payload is None:
        payload = betti_payload(kind, H, args.n)
        cache_write(directory, key, payload)
    print(render_betti(payload, args.format))
    return EXIT_OK


# ------------------------------------------------------------ validate

def cmd_validate(args) -> int:
    try:
        data = json.loads(Path(args.path).read_text())
    except OSError as exc:
        raise InputError(f"{args.path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ParseError("$", f"invalid JSON: {exc}") from None
    try:
        H = validate_algebra(data)
    except ValidationError as exc:
        report = {"valid": False,
                  "violations": [{"kind": type(v).__name__, "message": str(v)} for v in exc.violations]}
        if args.format == "json":
            print(json.dumps(report, indent=2))
        else:
            print("invalid Poincaré duality algebra:")
            for v in report["violations"]:
                print(f"  {v['kind']}: {v['message']}")
        return EXIT_FAIL
    alg = H.algebra
    duals = {alg.labels[i]: {alg.labels[k]: str(c) for k, c in H.dual[i].items()} for i in range(alg.dim)}
    if args.format == "json":
        print(json.dumps({"valid": True, "name": H.name, "dim": H.dim,
                          "formal_dimension": H.formal_dimension, "dual_basis": duals}, indent=2))
        return EXIT_OK
    print(f"valid: {H.name}, dim {H.dim}, formal dimension {H.formal_dimension}")
    for label, dual in duals.items():
        print(f"  {label}* = {dual}")
    return EXIT_OK


# ------------------------------------------------------------ verify

Finding = structure.Finding


def verify_psi(H: PDAlgebra, n: int) -> List[Finding]:
    inst = f"{H.name} n={n}"
    f = psi(H, n)
    out = [structure.check_chain(f, inst)]
    if not out[0].ok:
        return out
    bs, bt = betti(f.source).betti, betti(f.target).betti
    for bd in sorted(set(bs) | set(bt)):
        a, b = bs.get(bd, 0), bt.get(bd, 0)
        if a != b:
            out.append(Finding("psi iso", inst, "fail", f"H^{bd}: {a} vs {b}"))
        elif a and induced_rank(f, *bd) != a:
            out.append(Finding("psi iso", inst, "fail", f"H^{bd} map not invertible"))
    for bd, idx in f.source.bidegree_blocks().items():
        if rank(f(i) for i in idx) != len(f.target.block(*bd)):
            out.append(Finding("psi surjective", inst, "fail", f"bidegree {bd}"))
    if len(out) == 1:
        out.append(Finding("psi iso", inst, "pass"))
    return out


def verify_prop6(H: PDAlgebra, n: int) -> List[Finding]:
    out = []
    for k in range(2, n + 1):
        try:
            reduce_over_H(H, k)
            out.append(Finding("reduction iso", f"{H.name} n={k}", "pass"))
        except IsoViolation as exc:
            out.append(Finding("reduction iso", f"{H.name} n={k}", "fail", str(exc)))
    return out


def verify_simplicial(H: PDAlgebra, n_max: int, closed: bool) -> List[Finding]:
    if not closed:
        return structure.simplicial_suite(H, n_max)
    out = []
    for n in range(1, n_max):
        out.extend(structure.closed_negative_controls(H, n))
    return out


def verify_coaction(H: PDAlgebra, n: int) -> List[Finding]:
    out = []
    for part in structure.all_partitions(n):
        f = structure.coaction(part, H)
        inst = f"{H.name}° T={part.blocks}"
        out.append(structure.check_chain(f, inst))
        out.append(structure.check_multiplicative(f, inst, 50))
    if n >= 2:
        out.append(structure.coaction_matches_last_face(H, n - 1))
    return out


def verify_connected_sum(H: PDAlgebra, K: PDAlgebra, n: int) -> List[Finding]:
    out = []
    for r in range(n + 1):
        f = structure.connected_sum_map(H, K, r, n - r)
        inst = f"{H.name}#{K.name} r={r} s={n - r}"
        out.append(structure.check_chain(f, inst))
        out.append(structure.check_multiplicative(f, inst, 50))
    return out


def verify_lemma13(H: PDAlgebra, n: int) -> List[Finding]:
    rep = column_acyclicity(H, n)
    inst = f"{H.name} n={n}"
    if rep.ok:
        return [Finding("column acyclicity", inst, "pass")]
    return [Finding("column acyclicity", inst, "fail", v) for v in rep.violations]


SUITES = ("psi", "prop6", "simplicial", "coaction", "connected-sum", "lemma13")


def run_suite(suite: str, H: PDAlgebra, args) -> List[Finding]:
    n = args.n
    if suite == "psi":
        guard("kriz", H, n, args.max_basis, args.force)
        return verify_psi(H, n)
    if suite == "prop6":
        guard("j", H, n, args.max_basis, args.force)
        return verify_prop6(H, n)
    if suite == "simplicial":
        guard("kriz" if args.closed else "punctured", H, args.n_max, args.max_basis, args.force)
        return verify_simplicial(H, args.n_max, args.closed)
    if suite == "coaction":
        guard("punctured", H, n, args.max_basis, args.force)
        return verify_coaction(H, n)
    if suite == "connected-sum":
        K = load_algebra(args.other) if args.other else H
        guard("kriz", H, n, args.max_basis, args.force)
        return verify_connected_sum(H, K, n)
    if suite == "lemma13":
        guard("kriz", H, n, args.max_basis, args.force)
        return verify_lemma13(H, n)
    raise InputError(f"unknown suite {suite}")


def cmd_verify(args) -> int:
    if args.algebra:
        algebras = [load_algebra(args.algebra)]
    else:
        algebras = [H for _, H in catalog.standard_algebras()]
    suites = SUITES if args.suite == "all" else (args.suite,)
    findings: List[Finding] = []
    for suite in suites:
        for H in algebras:
            findings.extend(run_suite(suite, H, args))
    ok = all(f.ok for f in findings)
    if args.format == "json":
        print(json.dumps(structure.report(findings), indent=2))
    else:
        failed = [f for f in findings if not f.ok]
        expected = [f for f in findings if f.status == "expected-failure"]
        for f in failed + expected:
            print(f"{f.status.upper()}: {f.check} [{f.instance}] witness {f.witness}")
        print(f"{len(findings)} checks, {len(failed)} failed, {len(expected)} expected failures")
    return EXIT_OK if ok else EXIT_FAIL


# ------------------------------------------------------------ catalog

def cmd_catalog(args) -> int:
    rows = []
    for spec in catalog.STANDARD:
        H = catalog.get(*spec)
        entry = catalog.ENTRIES[spec[0]]
        rows.append({
            "key": catalog.spec_name(spec),
            "params": list(entry.params),
            "dim": H.dim,
            "formal_dimension": H.formal_dimension,
            "provenance": entry.provenance,
        })
    if args.format == "json":
        print(json.dumps(rows, indent=2))
    else:
        for r in rows:
            print(f"{r['key']:<28} params={','.join(r['params']) or '-':<8} dim={r['dim']:<3} "
                  f"2m={r['formal_dimension']:<3} {r['provenance']}")
    return EXIT_OK


# ------------------------------------------------------------ main

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="confmodels", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate an algebra JSON file")
    p.add_argument("path")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_validate)

    def common(p):
        p.add_argument("--max-basis", type=int, default=DEFAULT_LIMIT,
                       help="size guard on the predicted basis count")
        p.add_argument("--force", action="store_true", help="ignore the size guard")

    p = sub.add_parser("betti", help="bigraded Betti numbers of a model")
    p.add_argument("--model", choices=("kriz", "j", "punctured"), default="j")
    p.add_argument("--algebra", nargs="+", required=True, metavar="SPEC",
                   help="algebra JSON path or catalog:key [params]")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--format", choices=("text", "json", "latex"), default="text")
    p.add_argument("--cache-dir", help=f"result cache directory (default ${CACHE_ENV})")
    common(p)
    p.set_defaults(func=cmd_betti)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("suite", choices=SUITES + ("all",))
    p.add_argument("--algebra", nargs="+", metavar="SPEC", help="default: every catalog algebra")
    p.add_argument("--other", nargs="+", metavar="SPEC", help="second summand for connected-sum")
    p.add_argument("-n", type=int, default=3)
    p.add_argument("--n-max", type=int, default=3)
    p.add_argument("--closed", action="store_true", help="simplicial negative controls on closed models")
    p.add_argument("--format", choices=("text", "json"), default="text")
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("catalog", help="built-in algebras")
    p.add_argument("action", choices=("list",))
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_catalog)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TooLarge as exc:
        print(f"too large: {exc}", file=sys.stderr)
        return EXIT_SIZE
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValidationError as exc:
        print("invalid algebra: " + "; ".join(f"{type(v).__name__}: {v}" for v in exc.violations),
              file=sys.stderr)
        return EXIT_INPUT
    except (InputError, ModelError, DimensionMismatch, AlgebraError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

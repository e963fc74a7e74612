"""Command-line entry point.

Exit codes: 0 success or accepted, 1 property violated (witness on stdout),
2 usage or input error, 3 resource budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Sequence

from . import formats
from .circuit import CircuitError, evaluate, expand, validate
from .compiler import CompileError, compile_pgc_to_smlpc
from .compose import ScopedDistributionCircuit, generating_pgc, hierarchical, mixture, product
from .corpus import random_point
from .dpp import abp_to_dpp, formula_eval, formula_to_dpp, psd_shift
from .field import P, stream
from .hardness import (
    RegularityError,
    count_perfect_matchings,
    quaternary_pgc_from_graph,
    random_regular_bipartite,
    rmatch,
    rmatch_poly,
    ternary_pgc_from_graph,
    verify_quaternary_identity,
    verify_ternary_identity,
)
from .marginal import NotSetMultilinear, marginalize_smlpc
from .pgc import Pgc, check_distribution
from .poly import BudgetExceeded
from .smltest import DegreeTooLarge, test_set_multilinear

OK, VIOLATION, USAGE, BUDGET = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Out:
    """Result sink: ``--out`` file if given, else stdout."""

    def __init__(self, args):
        self.path = args.out
        self.chunks: list[str] = []

    def emit(self, text: str) -> None:
        if not text.endswith("\n"):
            text += "\n"
        self.chunks.append(text)

    def close(self) -> None:
        text = "".join(self.chunks)
        if self.path:
            formats.write(self.path, text)
        else:
            sys.stdout.write(text)


def _rational(x: Fraction, args) -> str:
    s = str(Fraction(x))
    if args.decimal is not None:
        with localcontext() as ctx:
            ctx.prec = max(args.decimal + 30, 50)
            approx = Decimal(x.numerator) / Decimal(x.denominator)
            s += f"  (approx {approx:.{args.decimal}f})"
    return s


def _read(path: str) -> str:
    try:
        return formats.read_text(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc


def _parse_assignments(items: Sequence[str]) -> dict[str, Fraction]:
    point = {}
    for item in items:
        for piece in item.split(","):
            if not piece.strip():
                continue
            m = re.match(r"^\s*([^=\s]+)\s*=\s*(\S+)\s*$", piece)
            if not m:
                raise UsageError(f"expected name=value, got {piece!r}")
            point[m.group(1)] = formats.parse_rational(m.group(2))
    return point


# ------------------------------------------------------------------ commands


def cmd_validate(args, out: _Out) -> int:
    c = formats.loads_circuit(_read(args.circuit))
    try:
        rep = validate(c, require_division_free=args.division_free)
    except CircuitError as exc:
        out.emit(f"invalid {exc}")
        return VIOLATION
    out.emit(
        f"valid nodes={rep.n_nodes} edges={rep.n_edges} size={rep.size} "
        f"division-free={'yes' if rep.division_free else 'no'}"
    )
    return OK


def cmd_eval(args, out: _Out) -> int:
    c = formats.loads_circuit(_read(args.circuit))
    point = _parse_assignments(args.assignment)
    if args.field == "fp":
        out.emit(str(evaluate(c, point, field=P)))
    else:
        out.emit(_rational(evaluate(c, point), args))
    return OK


def cmd_expand(args, out: _Out) -> int:
    c = formats.loads_circuit(_read(args.circuit))
    poly = expand(c, args.budget)
    for m, coef in poly.items():
        out.emit(f"{coef} {'*'.join(v if e == 1 else f'{v}^{e}' for v, e in m) or '1'}")
    return OK


def cmd_compile(args, out: _Out) -> int:
    pgc = formats.loads_pgc(_read(args.pgc))
    compiled = compile_pgc_to_smlpc(pgc, check=args.check, monomial_budget=args.budget)
    out.emit(formats.dumps_circuit(compiled.circuit))
    if args.parts:
        formats.write(args.parts, formats.dumps_partition(compiled.partition))
    return OK


def cmd_marginalize(args, out: _Out) -> int:
    c = formats.loads_circuit(_read(args.circuit))
    part = formats.loads_partition(_read(args.parts))
    query = formats.loads_query(_read(args.query))
    try:
        value = marginalize_smlpc(c, part, query, paranoid=args.paranoid, seed=args.seed)
    except NotSetMultilinear as exc:
        out.emit(f"rejected {exc}")
        return VIOLATION
    out.emit(_rational(value, args))
    return OK


def cmd_test_sml(args, out: _Out) -> int:
    c = formats.loads_circuit(_read(args.circuit))
    part = formats.loads_partition(_read(args.parts))
    verdict = test_set_multilinear(c, part, seed=args.seed, trials=args.trials, repetitions=args.repetitions)
    if verdict.accepted:
        out.emit(f"accepted tests={verdict.n_tests} degree={verdict.degree} failure-bound={verdict.failure_bound}")
        return OK
    w = verdict.witness
    out.emit(f"rejected {w.describe()}")
    out.emit(json.dumps({"kind": w.kind, "part": w.part + 1, "variables": list(w.variables),
                         "exponents": list(w.exponents), "point": w.point or {}}, sort_keys=True))
    return VIOLATION


def cmd_check_dist(args, out: _Out) -> int:
    if args.slots:
        pgc = generating_pgc(_scoped(args.circuit, args.arity))
    else:
        pgc = formats.loads_pgc(_read(args.circuit), arity=args.arity)
    res = check_distribution(pgc, args.budget)
    if not res.valid:
        out.emit(f"invalid {res.witness}")
        return VIOLATION
    out.emit(formats.dumps_table(res.table))
    return OK


_SLOT = re.compile(r"^z(\d+)_(\d+)$")


def _scoped(path: str, arity: int | None) -> ScopedDistributionCircuit:
    text = _read(path)
    doc = json.loads(text)
    c = formats.circuit_from_dict(doc)
    scope, top = set(), 1
    for v in c.variables:
        m = _SLOT.match(v)
        if not m:
            raise UsageError(f"{path}: variable {v!r} is not a z<i>_<j> slot")
        scope.add(int(m.group(1)))
        top = max(top, int(m.group(2)))
    d = arity or doc.get("arity") or top + 1
    if not isinstance(d, int):
        d = max(d)
    return ScopedDistributionCircuit(c, tuple(sorted(scope)), max(d, 2))


def cmd_compose(args, out: _Out) -> int:
    if args.op == "mix":
        if args.alpha is None or len(args.inputs) != 2:
            raise UsageError("compose mix needs two circuits and --alpha")
        f, g = (_scoped(p, args.arity) for p in args.inputs)
        res = mixture(f, g, formats.parse_rational(args.alpha))
    elif args.op == "prod":
        if len(args.inputs) != 2:
            raise UsageError("compose prod needs two circuits")
        f, g = (_scoped(p, args.arity) for p in args.inputs)
        res = product(f, g)
    else:
        if len(args.inputs) < 2:
            raise UsageError("compose hier needs an outer circuit and at least one inner circuit")
        f = _scoped(args.inputs[0], 2)
        gs = [_scoped(p, args.arity) for p in args.inputs[1:]]
        res = hierarchical(f, gs)
    out.emit(formats.dumps_circuit(res.circuit, arity=res.arity))
    if args.parts:
        formats.write(args.parts, formats.dumps_partition(res.partition))
    return OK


def _emit_dpp(rep, args, out: _Out) -> None:
    if args.psd is not None:
        rep = psd_shift(rep, formats.parse_rational(args.psd))
    matrix, projection = formats.dumps_dpp(rep)
    out.emit(matrix)
    if args.projection:
        formats.write(args.projection, projection)
    else:
        out.emit("# projection")
        out.emit(projection or "\n")


def cmd_formula2dpp(args, out: _Out) -> int:
    _emit_dpp(formula_to_dpp(formats.loads_formula(_read(args.formula))), args, out)
    return OK


def cmd_abp2dpp(args, out: _Out) -> int:
    _emit_dpp(abp_to_dpp(formats.loads_abp(_read(args.abp))), args, out)
    return OK


def cmd_verify_dpp(args, out: _Out) -> int:
    rep = formats.loads_dpp(_read(args.matrix), _read(args.projection))
    if bool(args.formula) == bool(args.abp):
        raise UsageError("give exactly one of --formula or --abp")
    if args.formula:
        f = formats.loads_formula(_read(args.formula))
        source = lambda p: formula_eval(f, p)  # noqa: E731
    else:
        a = formats.loads_abp(_read(args.abp))
        source = a.evaluate
    if not rep.diagonal_confined():
        out.emit("violation variables off the diagonal")
        return VIOLATION
    names = sorted(set(rep.source_variables()) | _source_names(args))
    for t in range(args.points):
        p = random_point(stream(args.seed, t), names)
        got, want = rep.determinant_at(p), source(p)
        if got != want:
            out.emit(f"violation determinant {got} != {want}")
            out.emit(json.dumps({k: str(v) for k, v in p.items()}, sort_keys=True))
            return VIOLATION
    out.emit(f"verified points={args.points} size={rep.n}")
    return OK


def _source_names(args) -> set[str]:
    from .dpp import formula_variables

    if args.formula:
        return set(formula_variables(formats.loads_formula(_read(args.formula))))
    a = formats.loads_abp(_read(args.abp))
    return {w for _, _, w in a.edges if isinstance(w, str)}


def cmd_graph2pgc(args, out: _Out) -> int:
    g = formats.loads_graph(_read(args.graph))
    if args.kind == "quaternary":
        pgc, norm = quaternary_pgc_from_graph(g)
    else:
        pgc, norm = ternary_pgc_from_graph(g, _lambda(args))
    if out.path:
        formats.write(out.path, formats.dumps_pgc(pgc))
        out.path = None
        out.emit(f"normalization {norm}")
    else:
        out.emit(formats.dumps_pgc(pgc))
        print(f"normalization {norm}", file=sys.stderr)
    return OK


def _lambda(args) -> Fraction:
    if args.lam is None:
        raise UsageError("--lambda is required")
    return formats.parse_rational(args.lam)


def cmd_verify_reduction(args, out: _Out) -> int:
    g = formats.loads_graph(_read(args.graph))
    if args.kind == "quaternary":
        rep = verify_quaternary_identity(g, monomial_budget=args.budget)
        label = "pm-count"
    else:
        rep = verify_ternary_identity(g, _lambda(args), monomial_budget=args.budget)
        label = "rmatch"
    out.emit(f"marginal {_rational(rep.marginal, args)}")
    out.emit(f"expected {_rational(rep.expected, args)}")
    out.emit(f"{label} {rep.count}")
    out.emit(f"normalization {rep.normalization}")
    out.emit("holds" if rep.holds else "violated")
    return OK if rep.holds else VIOLATION


def cmd_oracle(args, out: _Out) -> int:
    g = formats.loads_graph(_read(args.graph))
    if args.which == "pm-count":
        out.emit(str(count_perfect_matchings(g)))
    elif args.lam is not None:
        out.emit(_rational(rmatch(g, _lambda(args)), args))
    else:
        out.emit(str(rmatch_poly(g)))
    return OK


def cmd_gen_graph(args, out: _Out) -> int:
    out.emit(formats.dumps_graph(random_regular_bipartite(args.kind, args.n, args.seed)))
    return OK


# ------------------------------------------------------------------ parser


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    S = argparse.SUPPRESS
    p.add_argument("--seed", type=int, default=S, help="seed for randomized steps")
    p.add_argument("--field", choices=("rat", "fp"), default=S, help="evaluation field")
    p.add_argument("--budget", type=int, default=S, help="monomial budget for expansions")
    p.add_argument("--out", default=S, help="write the result here instead of stdout")
    p.add_argument("--decimal", type=int, default=S, metavar="K", help="also print K approximate digits")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="pgcirc", description="Exact tools for probabilistic generating circuits.")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--field", choices=("rat", "fp"), default="rat")
    parser.add_argument("--budget", type=int, default=200_000)
    parser.add_argument("--out", default=None)
    parser.add_argument("--decimal", type=int, default=None, metavar="K")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help):
        p = sub.add_parser(name, parents=[common], help=help)
        p.set_defaults(fn=fn)
        return p

    p = add("validate", cmd_validate, "check circuit structure")
    p.add_argument("circuit")
    p.add_argument("--division-free", action="store_true", help="reject division nodes")

    p = add("eval", cmd_eval, "evaluate a circuit at a point")
    p.add_argument("circuit")
    p.add_argument("assignment", nargs="*", help="name=value pairs")

    p = add("expand", cmd_expand, "expand into monomials")
    p.add_argument("circuit")

    p = add("compile", cmd_compile, "compile a binary PGC into a set-multilinear PC")
    p.add_argument("pgc")
    p.add_argument("--parts", help="write the variable partition here")
    p.add_argument("--check", action="store_true", help="refuse inputs that are not distributions")

    p = add("marginalize", cmd_marginalize, "marginal probability by one evaluation")
    p.add_argument("circuit")
    p.add_argument("parts")
    p.add_argument("query")
    p.add_argument("--paranoid", action="store_true", help="run the set-multilinearity test first")

    p = add("test-sml", cmd_test_sml, "randomized set-multilinearity test")
    p.add_argument("circuit")
    p.add_argument("parts")
    p.add_argument("--trials", type=int, default=8)
    p.add_argument("--repetitions", type=int, default=3)

    p = add("check-dist", cmd_check_dist, "brute-force distribution check")
    p.add_argument("circuit")
    p.add_argument("--arity", type=int, default=None)
    p.add_argument("--slots", action="store_true", help="read z<i>_<j> slot variables as exponents")

    p = add("compose", cmd_compose, "mixture, product or hierarchical composition")
    p.add_argument("op", choices=("mix", "prod", "hier"))
    p.add_argument("inputs", nargs="+")
    p.add_argument("--alpha")
    p.add_argument("--arity", type=int, default=None)
    p.add_argument("--parts", help="write the output partition here")

    for name, fn, arg, what in (
        ("formula2dpp", cmd_formula2dpp, "formula", "a formula"),
        ("abp2dpp", cmd_abp2dpp, "abp", "an algebraic branching program"),
    ):
        p = add(name, fn, f"determinantal embedding of {what}")
        p.add_argument(arg)
        p.add_argument("--projection", help="write the projection file here")
        p.add_argument("--psd", metavar="M", help="apply a diagonal shift by M")

    p = add("verify-dpp", cmd_verify_dpp, "compare a DPP embedding with its source")
    p.add_argument("matrix")
    p.add_argument("projection")
    p.add_argument("--formula")
    p.add_argument("--abp")
    p.add_argument("--points", type=int, default=20)

    p = add("graph2pgc", cmd_graph2pgc, "hardness reduction from a bipartite graph")
    p.add_argument("graph")
    p.add_argument("--kind", choices=("quaternary", "ternary"), required=True)
    p.add_argument("--lambda", dest="lam")

    p = add("verify-reduction", cmd_verify_reduction, "check the reduction's marginal identity")
    p.add_argument("graph")
    p.add_argument("--kind", choices=("quaternary", "ternary"), required=True)
    p.add_argument("--lambda", dest="lam")

    p = add("oracle", cmd_oracle, "brute-force matching oracles")
    p.add_argument("which", choices=("pm-count", "rmatch"))
    p.add_argument("graph")
    p.add_argument("--lambda", dest="lam")

    p = add("gen-graph", cmd_gen_graph, "random regular bipartite graph")
    p.add_argument("--kind", choices=("3-regular", "(2,3)"), required=True)
    p.add_argument("--n", type=int, required=True)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else USAGE
    out = _Out(args)
    try:
        code = args.fn(args, out)
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return BUDGET
    except DegreeTooLarge as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return BUDGET
    except (UsageError, formats.FormatError, CircuitError, CompileError, RegularityError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    except (ValueError, KeyError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    out.close()
    return code


if __name__ == "__main__":
    sys.exit(main())

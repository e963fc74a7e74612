"""Text file formats. Every writer's output re-parses to an equal object.

Rationals are written ``p/q`` (``q`` omitted when 1).

* circuit: JSON ``{"variables": [...], "nodes": [...], "output": k}``, optional ``"arity"``
* partition: one part per line, variable names separated by spaces
* query: ``i: j1 j2 ...`` per line, ``i`` 1-based, values 0-based
* table: header ``n d``, then ``j1 ... jn p/q``
* graph: header ``m n``, then 1-based ``u v`` edge lines
* formula: fully parenthesized infix
* ABP: ``nodes k a b ...`` per layer, then ``layer u v label`` per edge
* DPP: matrix file (``N`` then rows; variable diagonals ``X<i>+c``) and
  projection file (``X<i> = c*var + ... + c``)

Lines starting with ``#`` and blank lines are ignored everywhere except JSON.
"""

from __future__ import annotations

import json
import re
from fractions import Fraction
from pathlib import Path
from typing import Iterable

from .circuit import Circuit, Node
from .dpp import Abp, AffineForm, DppRepresentation, Formula, format_formula, parse_formula
from .hardness import BipartiteGraph
from .marginal import MarginalQuery, VariablePartition
from .pgc import DistributionTable, Pgc


class FormatError(ValueError):
    pass


def fmt_rational(x) -> str:
    return str(Fraction(x))


def parse_rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise FormatError(f"not a rational: {text!r}") from exc


def _lines(text: str) -> list[str]:
    out = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append(line)
    return out


def read_text(path) -> str:
    return Path(path).read_text()


# ------------------------------------------------------------------ circuits


def circuit_to_dict(c: Circuit) -> dict:
    nodes = []
    for n in c.nodes:
        d: dict = {"kind": n.kind}
        if n.kind == "const":
            d["value"] = fmt_rational(n.value)
        elif n.kind == "var":
            d["var"] = n.var
        else:
            d["children"] = list(n.children)
            if n.kind == "sum":
                d["weights"] = [fmt_rational(w) for w in n.weights]
        nodes.append(d)
    return {"variables": list(c.variables), "nodes": nodes, "output": c.output}


def circuit_from_dict(d: dict) -> Circuit:
    try:
        nodes = []
        for raw in d["nodes"]:
            kind = raw["kind"]
            if kind == "const":
                nodes.append(Node("const", value=parse_rational(str(raw["value"]))))
            elif kind == "var":
                nodes.append(Node("var", var=str(raw["var"])))
            elif kind in ("sum", "prod", "div"):
                children = tuple(int(c) for c in raw["children"])
                weights = ()
                if kind == "sum":
                    weights = tuple(parse_rational(str(w)) for w in raw.get("weights", ["1"] * len(children)))
                    if len(weights) != len(children):
                        raise FormatError("weights and children differ in length")
                nodes.append(Node(kind, children=children, weights=weights))
            else:
                raise FormatError(f"unknown node kind {kind!r}")
        return Circuit(tuple(nodes), int(d["output"]), tuple(d.get("variables", ())))
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed circuit document: {exc}") from exc


def _dump_doc(d: dict) -> str:
    """JSON with one node per line."""
    lines = ["{", f' "variables": {json.dumps(d["variables"])},']
    if "arity" in d:
        lines.append(f' "arity": {json.dumps(d["arity"])},')
    lines.append(' "nodes": [')
    lines.append(",\n".join("  " + json.dumps(n) for n in d["nodes"]))
    lines.append(" ],")
    lines.append(f' "output": {d["output"]}')
    lines.append("}")
    return "\n".join(lines) + "\n"


def dumps_circuit(c: Circuit, arity=None) -> str:
    d = circuit_to_dict(c)
    if arity is not None:
        d["arity"] = arity if isinstance(arity, int) else list(arity)
    return _dump_doc(d)


def loads_circuit(text: str) -> Circuit:
    try:
        return circuit_from_dict(json.loads(text))
    except json.JSONDecodeError as exc:
        raise FormatError(f"circuit file is not valid JSON: {exc}") from exc


def dumps_pgc(pgc: Pgc) -> str:
    arity = pgc.arity[0] if len(set(pgc.arity)) == 1 else list(pgc.arity)
    d = circuit_to_dict(pgc.circuit)
    d["variables"] = list(pgc.variables)
    d["arity"] = arity if pgc.arity else 2
    return _dump_doc(d)


def loads_pgc(text: str, arity=None) -> Pgc:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"circuit file is not valid JSON: {exc}") from exc
    c = circuit_from_dict(d)
    ar = arity if arity is not None else d.get("arity", 2)
    return Pgc(c, c.variables, ar)


# ------------------------------------------------------------------ partitions and queries


def dumps_partition(p: VariablePartition) -> str:
    return "".join(" ".join(part) + "\n" for part in p.parts)


def loads_partition(text: str) -> VariablePartition:
    return VariablePartition(tuple(tuple(line.split()) for line in _lines(text)))


def dumps_query(q: MarginalQuery) -> str:
    return "".join(f"{i + 1}: {' '.join(str(j) for j in sorted(s))}\n" for i, s in enumerate(q.sets))


def loads_query(text: str) -> MarginalQuery:
    sets: dict[int, list[int]] = {}
    for k, line in enumerate(_lines(text)):
        if ":" in line:
            head, rest = line.split(":", 1)
            i = int(head) - 1
        else:
            i, rest = k, line
        if i < 0 or i in sets:
            raise FormatError(f"bad or repeated query index in line {line!r}")
        sets[i] = [int(t) for t in rest.split()]
    if sorted(sets) != list(range(len(sets))):
        raise FormatError("query indices must be 1..n without gaps")
    return MarginalQuery([sets[i] for i in range(len(sets))])


# ------------------------------------------------------------------ tables


def dumps_table(t: DistributionTable) -> str:
    lines = [f"{t.n} {t.d}"]
    lines += [" ".join(map(str, k)) + f" {fmt_rational(p)}" for k, p in t.items()]
    return "\n".join(lines) + "\n"


def loads_table(text: str) -> DistributionTable:
    lines = _lines(text)
    if not lines:
        raise FormatError("empty table file")
    n, d = (int(x) for x in lines[0].split())
    probs = {}
    for line in lines[1:]:
        parts = line.split()
        if len(parts) != n + 1:
            raise FormatError(f"expected {n} values and a probability: {line!r}")
        probs[tuple(int(x) for x in parts[:n])] = parse_rational(parts[n])
    try:
        return DistributionTable(n, d, probs)
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


# ------------------------------------------------------------------ graphs


def dumps_graph(g: BipartiteGraph) -> str:
    return f"{g.left} {g.right}\n" + "".join(f"{u + 1} {v + 1}\n" for u, v in g.edges)


def loads_graph(text: str) -> BipartiteGraph:
    lines = _lines(text)
    if not lines:
        raise FormatError("empty graph file")
    m, n = (int(x) for x in lines[0].split())
    edges = []
    for line in lines[1:]:
        u, v = (int(x) for x in line.split())
        edges.append((u - 1, v - 1))
    return BipartiteGraph(m, n, tuple(edges))


# ------------------------------------------------------------------ formulas and ABPs


def dumps_formula(f: Formula) -> str:
    return format_formula(f) + "\n"


def loads_formula(text: str) -> Formula:
    return parse_formula(" ".join(_lines(text)))


def _fmt_label(w) -> str:
    return w if isinstance(w, str) else fmt_rational(w)


def _parse_label(tok: str):
    return tok if re.match(r"^[A-Za-z_]", tok) else parse_rational(tok)


def dumps_abp(a: Abp) -> str:
    lines = [f"source {a.source}", f"sink {a.sink}"]
    lines += [f"nodes {k} " + " ".join(layer) for k, layer in enumerate(a.layers)]
    lines += [f"{a.layer_of(u)} {u} {v} {_fmt_label(w)}" for u, v, w in a.edges]
    return "\n".join(lines) + "\n"


def loads_abp(text: str) -> Abp:
    source, sink = "s", "t"
    declared: dict[int, list[str]] = {}
    edges = []
    for line in _lines(text):
        parts = line.split()
        if parts[0] == "source":
            source = parts[1]
        elif parts[0] == "sink":
            sink = parts[1]
        elif parts[0] == "nodes":
            declared[int(parts[1])] = parts[2:]
        else:
            if len(parts) != 4:
                raise FormatError(f"expected 'layer u v label': {line!r}")
            edges.append((int(parts[0]), parts[1], parts[2], _parse_label(parts[3])))
    if declared:
        layers = [declared.get(k, []) for k in range(max(declared) + 1)]
    else:
        layers = []
        placed: set[str] = set()

        def put(k, v):
            while len(layers) <= k:
                layers.append([])
            if v not in placed:
                layers[k].append(v)
                placed.add(v)

        for k, u, v, _ in edges:
            put(k, u)
            put(k + 1, v)
    return Abp(tuple(tuple(l) for l in layers), tuple((u, v, w) for _, u, v, w in edges), source, sink)


# ------------------------------------------------------------------ DPP matrices


def _diag_entry(i: int, c: Fraction) -> str:
    return f"X{i + 1}+{c}" if c >= 0 else f"X{i + 1}-{-c}"


def dumps_dpp(rep: DppRepresentation) -> tuple[str, str]:
    """Matrix file and projection file."""
    mat = [str(rep.n)]
    proj = []
    for i, row in enumerate(rep.kernel):
        cells = []
        for j, x in enumerate(row):
            if i == j and rep.projection[i] != AffineForm():
                cells.append(_diag_entry(i, x))
            else:
                cells.append(fmt_rational(x))
        mat.append(" ".join(cells))
        a = rep.projection[i]
        if a != AffineForm():
            terms = [f"{fmt_rational(c)}*{v}" for v, c in a.coeffs] + [fmt_rational(a.const)]
            proj.append(f"X{i + 1} = " + " + ".join(terms))
    return "\n".join(mat) + "\n", "\n".join(proj) + ("\n" if proj else "")


_DIAG = re.compile(r"^X(\d+)([+-].+)?$")


def loads_dpp(matrix_text: str, projection_text: str) -> DppRepresentation:
    lines = _lines(matrix_text)
    n = int(lines[0])
    if len(lines) != n + 1:
        raise FormatError(f"expected {n} matrix rows")
    K = []
    variable_rows = set()
    for i, line in enumerate(lines[1:]):
        cells = line.split()
        if len(cells) != n:
            raise FormatError(f"row {i + 1} has {len(cells)} entries, expected {n}")
        row = []
        for j, cell in enumerate(cells):
            m = _DIAG.match(cell)
            if m:
                if i != j or int(m.group(1)) != i + 1:
                    raise FormatError(f"variable entry {cell!r} off the diagonal or misnumbered")
                variable_rows.add(i)
                row.append(parse_rational(m.group(2) or "0"))
            else:
                row.append(parse_rational(cell))
        K.append(tuple(row))
    proj = [AffineForm() for _ in range(n)]
    for line in _lines(projection_text):
        lhs, rhs = line.split("=", 1)
        m = re.match(r"^X(\d+)$", lhs.strip())
        if not m:
            raise FormatError(f"bad projection target {lhs!r}")
        i = int(m.group(1)) - 1
        const = Fraction(0)
        coeffs: dict[str, Fraction] = {}
        for term in rhs.split("+"):
            term = term.strip()
            if "*" in term:
                c, v = term.split("*", 1)
                coeffs[v.strip()] = coeffs.get(v.strip(), Fraction(0)) + parse_rational(c)
            else:
                const += parse_rational(term)
        proj[i] = AffineForm.of(const, coeffs)
    if {i for i, a in enumerate(proj) if a != AffineForm()} != variable_rows:
        raise FormatError("projection lines do not match the variable diagonal entries")
    return DppRepresentation(tuple(K), tuple(proj))


def write(path, text: str) -> None:
    Path(path).write_text(text)


def write_many(pairs: Iterable[tuple[str, str]]) -> None:
    for path, text in pairs:
        write(path, text)

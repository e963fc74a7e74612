from __future__ import annotations

from fractions import Fraction

import pytest

from pgcirc.compiler import compile_pgc_to_smlpc
from pgcirc.corpus import random_abp, random_binary_pgc, random_binary_query, random_formula, slot_partition
from pgcirc.dpp import abp_to_dpp, format_formula, formula_to_dpp, imm_abp, psd_shift
from pgcirc.field import stream
from pgcirc.formats import (
    FormatError,
    dumps_abp,
    dumps_circuit,
    dumps_dpp,
    dumps_formula,
    dumps_graph,
    dumps_partition,
    dumps_pgc,
    dumps_query,
    dumps_table,
    loads_abp,
    loads_circuit,
    loads_dpp,
    loads_formula,
    loads_graph,
    loads_partition,
    loads_pgc,
    loads_query,
    loads_table,
    parse_rational,
)
from pgcirc.gallery import two_coin_pc, two_coin_pgc, two_coin_table
from pgcirc.hardness import small_cubic_graph, quaternary_pgc_from_graph, random_regular_bipartite
from pgcirc.marginal import MarginalQuery


def test_rationals():
    assert parse_rational(" 3/6 ") == Fraction(1, 2)
    assert parse_rational("-2") == -2
    for bad in ("1/0", "x", ""):
        with pytest.raises(FormatError):
            parse_rational(bad)


def test_circuit_and_pgc_round_trips():
    assert loads_circuit(dumps_circuit(two_coin_pc())) == two_coin_pc()
    for k in range(20):
        rng = stream(71, k)
        pgc = random_binary_pgc(rng, int(rng.integers(1, 7)))
        assert loads_pgc(dumps_pgc(pgc)) == pgc
        pc, part = compile_pgc_to_smlpc(pgc)
        assert loads_circuit(dumps_circuit(pc)) == pc
        assert loads_partition(dumps_partition(part)) == part
        q = random_binary_query(rng, pgc.n)
        assert loads_query(dumps_query(q)) == q
    pgc, _ = quaternary_pgc_from_graph(small_cubic_graph())
    assert loads_pgc(dumps_pgc(pgc)) == pgc


def test_malformed_circuit_files():
    with pytest.raises(FormatError):
        loads_circuit("not json")
    with pytest.raises(FormatError):
        loads_circuit('{"variables": [], "nodes": [{"op": "frobnicate"}], "output": 0}')


def test_query_file_format():
    q = loads_query("1: 1\n2: 0 1\n")
    assert q == MarginalQuery([[1], [0, 1]])
    assert loads_query("# comment\n1:\n2: 0\n").empty_parts == (0,)


def test_table_round_trip():
    text = dumps_table(two_coin_table())
    assert text.splitlines()[0] == "2 2"
    assert loads_table(text) == two_coin_table()
    with pytest.raises(FormatError):
        loads_table("1 2\n0 1/2\n")


def test_graph_round_trip():
    assert loads_graph(dumps_graph(small_cubic_graph())) == small_cubic_graph()
    for seed in range(5):
        g = random_regular_bipartite("(2,3)", 4, seed)
        assert loads_graph(dumps_graph(g)) == g
    assert loads_graph("2 2\n1 1\n2 2\n").edges == ((0, 0), (1, 1))


def test_formula_and_abp_round_trips():
    for k in range(20):
        rng = stream(72, k)
        f = random_formula(rng)
        assert format_formula(loads_formula(dumps_formula(f))) == format_formula(f)
        a = random_abp(rng)
        assert loads_abp(dumps_abp(a)) == a
    assert loads_abp(dumps_abp(imm_abp(2, 3))) == imm_abp(2, 3)


def test_dpp_round_trip():
    reps = [formula_to_dpp(random_formula(stream(73, k))) for k in range(10)]
    reps.append(abp_to_dpp(imm_abp(2, 2)))
    reps.append(psd_shift(reps[0], 50))
    for rep in reps:
        mat, proj = dumps_dpp(rep)
        assert loads_dpp(mat, proj) == rep
    mat, proj = dumps_dpp(formula_to_dpp(random_formula(stream(73, 0))))
    with pytest.raises(FormatError):
        loads_dpp(mat, "")


def test_slot_partition_round_trip():
    part = slot_partition(3, 4)
    assert loads_partition(dumps_partition(part)) == part

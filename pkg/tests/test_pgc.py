from __future__ import annotations

import itertools
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pgcirc.circuit import CircuitBuilder, evaluate, expand
from pgcirc.corpus import random_binary_pgc
from pgcirc.field import stream
from pgcirc.gallery import constant_pgc, two_coin_pgc, two_coin_table
from pgcirc.hardness import BipartiteGraph, ternary_pgc_from_graph
from pgcirc.pgc import (
    DistributionTable,
    Pgc,
    check_distribution,
    check_polynomial,
    normalize,
    selective_marginal_oracle,
    table_to_pgc,
)
from pgcirc.poly import BudgetExceeded, SparsePolynomial

F = Fraction


def test_two_coin_pgc_is_the_two_coin_table():
    res = check_distribution(two_coin_pgc())
    assert res.valid
    assert res.table == two_coin_table()
    assert [res.table[k] for k in [(0, 0), (1, 0), (0, 1), (1, 1)]] == [F(1, 6), F(1, 6), F(1, 3), F(1, 3)]


def _pgc_of(coeffs, arity=2):
    b = CircuitBuilder(["z1"])
    terms, ws = [], []
    for k, c in coeffs.items():
        if k == "1":
            terms.append(b.const(1))
        else:
            terms.append(b.mul([b.var(v) for v in k.split("*")]))
        ws.append(c)
    return Pgc(b.build(b.add(terms, ws), ["z1"]), ["z1"], arity)


def test_invalid_polynomials_give_witnesses():
    neg = check_distribution(_pgc_of({"z1": 1, "1": -1}))
    assert not neg.valid and neg.witness.kind == "negative coefficient"
    sq = check_distribution(_pgc_of({"z1*z1": 1}))
    assert not sq.valid and sq.witness.kind == "exponent >= arity"
    half = check_distribution(_pgc_of({"z1": F(1, 2)}))
    assert not half.valid and half.witness.kind == "coefficients do not sum to 1"
    unknown = check_polynomial(SparsePolynomial.from_dict({"y": 1}), ["z1"], 2)
    assert unknown.witness.kind == "unknown variable"


def test_budget_error_message():
    pgc, _ = ternary_pgc_from_graph(BipartiteGraph.complete(3, 2), 1)
    with pytest.raises(BudgetExceeded, match="instance too large for brute force"):
        check_distribution(pgc, monomial_budget=3)


def test_table_to_pgc_golden():
    pgc = table_to_pgc(two_coin_table())
    assert expand(pgc.circuit) == SparsePolynomial.from_dict(
        {"1": F(1, 6), "z1": F(1, 6), "z2": F(1, 3), "z1*z2": F(1, 3)}
    )
    point = table_to_pgc(DistributionTable(3, 2, {(0, 0, 0): 1}))
    assert [n.kind for n in point.circuit.nodes] == ["const"]
    uniform = table_to_pgc(DistributionTable(2, 2, {k: F(1, 4) for k in itertools.product((0, 1), repeat=2)}))
    assert all(c == F(1, 4) for _, c in expand(uniform.circuit).items())


def test_table_validation():
    with pytest.raises(ValueError, match="sum to 1"):
        DistributionTable(1, 2, {(0,): F(1, 2)})
    with pytest.raises(ValueError, match="negative"):
        DistributionTable(1, 2, {(0,): F(3, 2), (1,): F(-1, 2)})
    with pytest.raises(ValueError, match="outside"):
        DistributionTable(1, 2, {(2,): 1})


@st.composite
def tables(draw):
    n = draw(st.integers(1, 3))
    d = draw(st.integers(2, 3))
    keys = list(itertools.product(range(d), repeat=n))
    raw = draw(st.lists(st.integers(0, 5), min_size=len(keys), max_size=len(keys)).filter(any))
    total = sum(raw)
    return DistributionTable(n, d, {k: F(r, total) for k, r in zip(keys, raw)})


@given(tables())
def test_table_round_trip(table):
    res = check_distribution(table_to_pgc(table))
    assert res.valid
    assert res.table.probabilities == table.probabilities


@given(tables())
def test_singleton_marginals_are_entries(table):
    for key, p in table.dense():
        assert selective_marginal_oracle(table, [[j] for j in key]) == p
    assert selective_marginal_oracle(table, [list(range(table.d))] * table.n) == 1


def test_selective_marginal_golden():
    assert selective_marginal_oracle(two_coin_table(), [[1], [0, 1]]) == F(1, 2)
    pgc, _ = ternary_pgc_from_graph(BipartiteGraph.complete(3, 2), 1)
    table = check_distribution(pgc).table
    assert selective_marginal_oracle(table, [[0, 1]] * 3) == F(13, 16)


def test_corpus_pgcs_sum_to_one():
    for k in range(30):
        rng = stream(11, k)
        pgc = random_binary_pgc(rng, int(rng.integers(1, 7)))
        assert evaluate(pgc.circuit, {v: 1 for v in pgc.variables}) == 1
        assert check_distribution(pgc).valid


def test_normalize_and_arity_broadcast():
    b = CircuitBuilder(["z1"])
    c = b.build(b.add([b.const(1), b.var("z1")], [2, 6]))
    pgc, total = normalize(Pgc(c, ["z1"], 2))
    assert total == 8
    assert expand(pgc.circuit) == SparsePolynomial.from_dict({"1": F(1, 4), "z1": F(3, 4)})
    assert Pgc(c, ["z1"], 3).arity == (3,)
    with pytest.raises(ValueError):
        Pgc(c, ["z1"], 1)
    assert constant_pgc(3).n == 3

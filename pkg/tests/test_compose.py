from __future__ import annotations

import itertools
from fractions import Fraction

import pytest

from pgcirc.circuit import evaluate, expand
from pgcirc.compose import (
    ScopedDistributionCircuit,
    ScopeError,
    extend_smooth,
    generating_pgc,
    hierarchical,
    leaf_distribution,
    mixture,
    product,
    slot,
    table_distribution,
)
from pgcirc.field import stream
from pgcirc.gallery import two_coin_table
from pgcirc.marginal import MarginalQuery, marginalize_smlpc
from pgcirc.pgc import DistributionTable, check_distribution
from pgcirc.poly import SparsePolynomial
from pgcirc.smltest import test_set_multilinear

F = Fraction


def coefficients(f: ScopedDistributionCircuit) -> dict[tuple[int, ...], Fraction]:
    """Outcome table read off the expansion; fails on non-set-multilinear monomials."""
    out = {}
    for m, c in expand(f.circuit).items():
        exps = dict(m)
        assert all(e == 1 for e in exps.values())
        key = []
        for i in f.scope:
            hit = [j for j in range(f.arity) if slot(i, j) in exps]
            assert len(hit) == 1
            key.append(hit[0])
        out[tuple(key)] = c
    return out


def random_table(rng, n, d) -> DistributionTable:
    keys = list(itertools.product(range(d), repeat=n))
    raw = [int(rng.integers(0, 6)) for _ in keys]
    raw[0] += 1
    total = sum(raw)
    return DistributionTable(n, d, {k: F(r, total) for k, r in zip(keys, raw) if r})


def marginal(f: ScopedDistributionCircuit, sets) -> Fraction:
    return marginalize_smlpc(f.circuit, f.partition, MarginalQuery(sets))


# ------------------------------------------------------------------ leaves and smoothing


def test_leaf_distributions():
    coin = leaf_distribution(1, [F(1, 2), F(1, 2)])
    assert coefficients(coin) == {(0,): F(1, 2), (1,): F(1, 2)}
    point = leaf_distribution(1, [1, 0, 0])
    assert coefficients(point) == {(0,): 1}
    three = leaf_distribution(4, [F(1, 6), F(1, 3), F(1, 2)])
    assert evaluate(three.circuit, {"z4_0": 0, "z4_1": 1, "z4_2": 0}) == F(1, 3)
    for bad in ([F(1, 2)], [F(1, 2), F(1, 3)], [F(3, 2), F(-1, 2)]):
        with pytest.raises(ValueError):
            leaf_distribution(1, bad)


def test_extend_smooth_examples():
    coin = leaf_distribution(1, [F(1, 2), F(1, 2)])
    ext = extend_smooth(coin, [1, 2])
    assert coefficients(ext) == {k: F(1, 4) for k in itertools.product((0, 1), repeat=2)}
    assert extend_smooth(coin, [1]) is coin
    f = table_distribution(two_coin_table(), (1, 2))
    ext = coefficients(extend_smooth(f, [1, 2, 3]))
    for key, p in two_coin_table().items():
        assert ext[key + (0,)] == ext[key + (1,)] == p / 2
    with pytest.raises(ScopeError):
        extend_smooth(f, [1, 3])


# ------------------------------------------------------------------ mixture


def test_mixture_examples():
    f = table_distribution(two_coin_table(), (1, 2))
    uniform = extend_smooth(leaf_distribution(1, [F(1, 2), F(1, 2)]), [1, 2])
    assert coefficients(mixture(f, uniform, 1)) == two_coin_table().probabilities
    zero = leaf_distribution(1, [1, 0])
    one = leaf_distribution(1, [0, 1])
    assert coefficients(mixture(zero, one, F(1, 2))) == {(0,): F(1, 2), (1,): F(1, 2)}
    mix = coefficients(mixture(f, uniform, F(1, 3)))
    for key, p in two_coin_table().items():
        assert mix[key] == F(1, 3) * p + F(2, 3) * F(1, 4)
    with pytest.raises(ValueError):
        mixture(f, uniform, F(4, 3))


# ------------------------------------------------------------------ product


def test_product_examples():
    c1 = leaf_distribution(1, [F(1, 2), F(1, 2)])
    c2 = leaf_distribution(2, [F(1, 2), F(1, 2)])
    assert coefficients(product(c1, c2)) == {k: F(1, 4) for k in itertools.product((0, 1), repeat=2)}
    f = table_distribution(two_coin_table(), (1, 2))
    pinned = coefficients(product(f, leaf_distribution(3, [0, 1])))
    assert pinned == {k + (1,): p for k, p in two_coin_table().items()}
    halved = coefficients(product(f, leaf_distribution(3, [F(1, 2), F(1, 2)])))
    assert len(halved) == 8
    assert all(halved[k[:2] + (j,)] == two_coin_table()[k[:2]] / 2 for k in halved for j in (0, 1))
    with pytest.raises(ScopeError, match="scopes not disjoint"):
        product(f, c1)


# ------------------------------------------------------------------ hierarchical


def outer(expr_terms, scope=(1, 2)) -> ScopedDistributionCircuit:
    """Binary outer distribution from {(a1..an): p}."""
    return table_distribution(DistributionTable(len(scope), 2, expr_terms), scope)


def test_hierarchical_examples():
    g = table_distribution(two_coin_table(), (5, 6))
    uniform = coefficients(hierarchical(outer({(0,): 1}, (1,)), [g]))
    assert uniform == {k: F(1, 4) for k in itertools.product((0, 1), repeat=2)}
    assert coefficients(hierarchical(outer({(1,): 1}, (1,)), [g])) == two_coin_table().probabilities
    f = table_distribution(two_coin_table(), (1, 2))
    h = hierarchical(f, [leaf_distribution(7, [F(1, 3), F(2, 3)]), leaf_distribution(8, [F(1, 5), F(4, 5)])])
    direct = coefficients(h)
    # mixture over outer outcomes a: component i is g_i when a_i = 1, uniform otherwise
    comps = [{0: F(1, 3), 1: F(2, 3)}, {0: F(1, 5), 1: F(4, 5)}]
    for y in itertools.product((0, 1), repeat=2):
        want = sum(
            p * (comps[0][y[0]] if a[0] else F(1, 2)) * (comps[1][y[1]] if a[1] else F(1, 2))
            for a, p in two_coin_table().items()
        )
        assert direct[y] == want
    with pytest.raises(ScopeError):
        hierarchical(f, [leaf_distribution(7, [1, 0]), leaf_distribution(7, [0, 1])])
    with pytest.raises(ScopeError):
        hierarchical(f, [leaf_distribution(7, [1, 0])])


# ------------------------------------------------------------------ closure, identities and sizes


def _closed(f: ScopedDistributionCircuit) -> bool:
    return check_distribution(generating_pgc(f)).valid and test_set_multilinear(f.circuit, f.partition).accepted


def test_closure_identities_and_sizes():
    for k in range(12):
        rng = stream(51, k)
        d = int(rng.integers(2, 4))
        n1, n2 = int(rng.integers(1, 3)), int(rng.integers(1, 3))
        f = table_distribution(random_table(rng, n1, d), tuple(range(1, n1 + 1)))
        g = table_distribution(random_table(rng, n2, d), tuple(range(n1 + 1, n1 + n2 + 1)))
        alpha = F(int(rng.integers(0, 8)), 7)

        prod = product(f, g)
        assert _closed(prod)
        assert prod.size <= f.size + g.size + 3
        qf = [sorted(set(int(x) for x in rng.choice(d, size=int(rng.integers(1, d + 1)), replace=False))) for _ in f.scope]
        qg = [sorted(set(int(x) for x in rng.choice(d, size=int(rng.integers(1, d + 1)), replace=False))) for _ in g.scope]
        assert marginal(prod, qf + qg) == marginal(f, qf) * marginal(g, qg)

        mix = mixture(f, g, alpha)
        assert _closed(mix)
        n = len(mix.scope)
        assert mix.size <= f.size + g.size + MIX_SIZE_CONSTANT * n * d
        q = qf + qg
        fe, ge = extend_smooth(f, mix.scope), extend_smooth(g, mix.scope)
        assert marginal(mix, q) == alpha * marginal(fe, q) + (1 - alpha) * marginal(ge, q)

        outer_f = table_distribution(random_table(rng, 2, 2), (1, 2))
        m = int(rng.integers(1, 3))
        gs = [table_distribution(random_table(rng, m, d), tuple(range(10 + m * t, 10 + m * (t + 1)))) for t in range(2)]
        h = hierarchical(outer_f, gs)
        assert _closed(h)
        assert h.size <= HIER_SIZE_CONSTANT * (outer_f.size + sum(x.size for x in gs) + 2 * m * d)


# measured on the corpus above; pinned
MIX_SIZE_CONSTANT = 4
HIER_SIZE_CONSTANT = 3

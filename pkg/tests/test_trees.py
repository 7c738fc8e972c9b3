import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tropmoment.corpus import random_graph
from tropmoment.errors import EnumerationCapError, TreeError
from tropmoment.graph import parse_graph
from tropmoment.kernel import build_kernel
from tropmoment.trees import (
    center_norm_average,
    edge_probability,
    energy_level,
    energy_level_average,
    enumerate_spanning_trees,
    pair_probability,
    rooted_orientation,
    star_s,
    star_t,
    tree_center,
    tree_count_weighted,
    unweighted_tree_count,
)

from conftest import banana

TOL = 1e-9


def test_triangle_enumeration(triangle):
    ens = enumerate_spanning_trees(triangle)
    assert [t.edges for t in ens] == [(0, 1), (0, 2), (1, 2)]
    assert [t.weight for t in ens] == [1.0, 1.0, 1.0]
    assert ens.weight_total == 3.0
    g = triangle.with_lengths([1.0, 2.0, 3.0])
    ens = enumerate_spanning_trees(g)
    # each tree weighs the length of the edge it leaves out
    assert [t.weight for t in ens] == [3.0, 2.0, 1.0]
    assert tree_count_weighted(g)[0] == pytest.approx(6.0)


def test_weighted_counts_examples():
    g = parse_graph("a b 1\nb c 2\nc a 3\n")
    # w(T) multiplies the lengths left out of T, so w(G) = 3 + 1 + 2
    assert tree_count_weighted(g)[0] == pytest.approx(6.0)
    # 11 = 2*3 + 1*3 + 1*2 is the sum over trees of the in-tree products
    ens = enumerate_spanning_trees(g)
    assert math.fsum(1 / t.coweight for t in ens) == pytest.approx(11.0)
    w, wp = tree_count_weighted(banana([1, 1, 1]))
    assert (w, wp) == (pytest.approx(3.0), pytest.approx(3.0))
    path = parse_graph("a b 2\nb c 5\n")
    w, wp = tree_count_weighted(path)
    assert w == pytest.approx(1.0) and wp == pytest.approx(0.1)


def test_banana_trees():
    ens = enumerate_spanning_trees(banana([2, 3, 5]))
    assert [t.edges for t in ens] == [(0,), (1,), (2,)]
    assert [t.weight for t in ens] == [15.0, 10.0, 6.0]


def test_cap():
    g = banana([1] * 6)
    with pytest.raises(EnumerationCapError) as info:
        enumerate_spanning_trees(g, cap=5)
    assert info.value.estimate == 6 and info.value.cap == 5
    assert len(enumerate_spanning_trees(g, cap=6)) == 6


def test_ensemble_totals_match_determinants(corpus_random):
    for g in corpus_random:
        ens = enumerate_spanning_trees(g)
        assert len(ens) == unweighted_tree_count(g)
        w, wp = tree_count_weighted(g)
        assert ens.weight_total == pytest.approx(w, rel=TOL)
        assert ens.coweight_total == pytest.approx(wp, rel=TOL)
        assert ens.weight_total == pytest.approx(ens.coweight_total * math.prod(g.lengths), rel=TOL)
        keys = [t.edges for t in ens]
        assert keys == sorted(keys) and len(set(keys)) == len(keys)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_matrix_tree_random(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(int(rng.integers(2, 9)), int(rng.integers(0, 5)), rng)
    ens = enumerate_spanning_trees(g)
    w, wp = tree_count_weighted(g)
    assert ens.weight_total == pytest.approx(w, rel=TOL)
    assert ens.coweight_total == pytest.approx(wp, rel=TOL)


def test_probability_examples(triangle):
    k = build_kernel(triangle)
    assert edge_probability(k, 0) == pytest.approx(2 / 3)
    assert pair_probability(triangle, k, 0, 1) == pytest.approx(1 / 3)
    b = banana([1, 1, 1, 1])
    kb = build_kernel(b)
    assert edge_probability(kb, 2) == pytest.approx(1 / 4)
    assert pair_probability(b, kb, 0, 3) == 0.0
    g = parse_graph("a b 1\nb c 1\nc a 1\nc d 2\n")
    kg = build_kernel(g)
    assert edge_probability(kg, 3) == pytest.approx(1.0)
    assert pair_probability(g, kg, 3, 1) == pytest.approx(edge_probability(kg, 1))
    with pytest.raises(IndexError):
        pair_probability(g, kg, 0, 9)


def test_probabilities_match_enumeration(corpus_random):
    for g in corpus_random[::2]:
        k = build_kernel(g)
        ens = enumerate_spanning_trees(g)
        probs = ens.probabilities
        member = np.zeros((len(ens), g.m), dtype=bool)
        for i, t in enumerate(ens):
            member[i, list(t.edges)] = True
        for e in range(g.m):
            assert edge_probability(k, e) == pytest.approx(probs @ member[:, e], abs=TOL)
        for e, f in itertools.combinations(range(g.m), 2):
            want = probs @ (member[:, e] & member[:, f])
            got = pair_probability(g, k, e, f)
            assert got == pytest.approx(want, abs=TOL)
            assert got == pytest.approx(pair_probability(g, k, f, e), abs=TOL)


def test_star_examples(triangle):
    k = build_kernel(triangle, "a")
    assert star_s(k, "a") == pytest.approx(4 / 3)
    assert star_s(k, "a", method="sum") == pytest.approx(4 / 3)
    # edge 1 is b-c
    assert star_t(triangle, k, "a", 1) == pytest.approx(2 / 3)
    assert star_t(triangle, k, "b", 1) == pytest.approx(1.0)
    assert star_t(triangle, k, "b", 1, include_self=False) == pytest.approx(1 / 3)
    star = parse_graph("o a 1\no b 2\no c 3\n")
    assert star_s(build_kernel(star, "a"), "o") == pytest.approx(3.0)
    with pytest.raises(ValueError):
        star_s(k, "a", method="other")


def test_star_identities(corpus_random):
    for g in corpus_random[::2]:
        for q in g.vertices:
            k = build_kernel(g, q)
            s = [star_s(k, p) for p in g.vertices]
            assert math.fsum(s) == pytest.approx(2 * (g.n - 1), abs=TOL)
            for p in g.vertices:
                assert star_s(k, p) == pytest.approx(star_s(k, p, method="sum"), abs=TOL)
                for e in range(g.m):
                    for inc in (True, False):
                        a = star_t(g, k, p, e, include_self=inc)
                        b = star_t(g, k, p, e, method="sum", include_self=inc)
                        assert a == pytest.approx(b, abs=TOL)
                    if g.is_bridge(e):
                        assert star_t(g, k, p, e) == pytest.approx(star_s(k, p), abs=TOL)


def test_rooted_orientation_examples():
    path = parse_graph("a b 1\nb c 1\n")
    assert rooted_orientation(path, [0, 1], "b") == ((0, -1), (1, 1))
    star = parse_graph("o a 1\nb o 1\no c 1\n")
    assert rooted_orientation(star, [0, 1, 2], "o") == ((0, 1), (1, -1), (2, 1))
    tri = parse_graph("a b 1\nb c 1\nc a 1\n")
    with pytest.raises(TreeError):
        rooted_orientation(tri, [0, 1, 2], "a")
    with pytest.raises(TreeError):
        rooted_orientation(tri, [0], "a")
    g = parse_graph("a b 1\na b 1\nb c 1\n")
    with pytest.raises(TreeError):
        rooted_orientation(g, [0, 1], "a")


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_rooted_orientation_indegrees(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(int(rng.integers(2, 12)), int(rng.integers(0, 6)), rng)
    ens = enumerate_spanning_trees(g, cap=10**4) if g.m < 16 else None
    trees = [t.edges for t in ens.trees[:5]] if ens else []
    q = g.vertices[int(rng.integers(g.n))]
    for t in trees:
        indeg = {v: 0 for v in g.vertices}
        for e, s in rooted_orientation(g, t, q):
            a, b = g.endpoints(e)
            indeg[b if s == 1 else a] += 1
        assert indeg.pop(q) == 0
        assert set(indeg.values()) <= {1}


def test_energy_level_two_ways(corpus_random):
    for g in corpus_random[::4]:
        for q in g.vertices:
            k = build_kernel(g, q)
            for t in enumerate_spanning_trees(g):
                a = energy_level(k, t.edges, q)
                b = energy_level(k, t.edges, q, method="double_sum")
                assert a == pytest.approx(b, abs=TOL * max(1.0, abs(a)))
                assert a > -TOL


def test_energy_level_on_tree_graph():
    g = parse_graph("a b 1\nb c 2\nb d 3\n")
    k = build_kernel(g, "c")
    assert energy_level(k, [0, 1, 2], "c") == pytest.approx(energy_level(k, [0, 1, 2], "c", "double_sum"))
    assert np.allclose(tree_center(k, [0, 1, 2], "c").coefficients, 0)


def test_center_examples():
    g = banana([1, 1])
    k = build_kernel(g, "u")
    sigma = tree_center(k, [0], "u").coefficients
    assert np.allclose(sigma, [0.25, -0.25])
    P = k.projection_matrices()[0]
    assert np.allclose(P @ sigma, sigma)


def test_rooted_ensemble_matches_single_calls(triangle):
    k = build_kernel(triangle, "b")
    ens = enumerate_spanning_trees(triangle).rooted_at(k, "b")
    for t in ens:
        assert t.root == "b"
        assert t.energy == pytest.approx(energy_level(k, t.edges, "b"))
        assert np.allclose(t.center.coefficients, tree_center(k, t.edges, "b").coefficients)


def test_averages_match_enumeration(corpus_random):
    for g in corpus_random[::3]:
        ens = enumerate_spanning_trees(g)
        for q in g.vertices:
            k = build_kernel(g, q)
            r = ens.rooted_at(k, q)
            en = r.average(t.energy for t in r)
            assert en == pytest.approx(energy_level_average(k), abs=TOL * max(1.0, en))
            cn = r.average(t.center.pairing(t.center, g.lengths) for t in r)
            assert cn == pytest.approx(center_norm_average(k), abs=TOL * max(1.0, cn))
            # q argument rebases a kernel built elsewhere
            k0 = build_kernel(g)
            assert energy_level_average(k0, q) == pytest.approx(energy_level_average(k), abs=TOL * max(1.0, en))

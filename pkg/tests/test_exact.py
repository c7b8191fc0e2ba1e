"""Brute-force oracles, forest DP, leaf removal and matching structure."""

import itertools

import numpy as np
import pytest

from lexmatch import exact, randgraph
from lexmatch.exact import (
    BLOCKING,
    FREE,
    MANDATORY,
    CycleError,
    EnumerationLimitError,
    Matching,
    NotAMatchingError,
    brute_force_opt,
    leaf_removal,
    mandatory_blocking,
    perf_of,
    tree_opt_dp,
    uniform_max_matching,
)
from lexmatch.genfn import OffspringLaw
from lexmatch.randgraph import RngSeed, VertexRoot, WeightLaw, assign_weights, ubgw_tree


def graph_of(n, edge_weights, root=0):
    return randgraph._build(n, dict(edge_weights), VertexRoot(root))


def path(weights):
    return graph_of(len(weights) + 1, {(i, i + 1): w for i, w in enumerate(weights)})


def exhaustive_best(g, lex=True):
    """Independent oracle: scan all 2^m edge subsets for the best matching."""
    edges = g.edges()
    best = None
    for r in range(len(edges) + 1):
        for combo in itertools.combinations(edges, r):
            seen = set()
            ok = True
            for u, v in combo:
                if u in seen or v in seen:
                    ok = False
                    break
                seen.update((u, v))
            if not ok:
                continue
            w = sum(g.weights[e] for e in combo)
            key = (len(combo), w) if lex else w
            if best is None or key > best[0]:
                best = (key, frozenset(combo))
    return best


def random_small_tree(i, max_depth=4):
    g = ubgw_tree(OffspringLaw.poisson(2.0), "vertex", 1 + i % max_depth, RngSeed(1234, i))
    return assign_weights(g, WeightLaw.uniform(0, 1), RngSeed(4321, i))


class TestBruteForce:
    def test_single_edge(self):
        g = graph_of(2, {(0, 1): 0.7})
        m = brute_force_opt(g)
        assert m.edges == frozenset({(0, 1)}) and m.weight == pytest.approx(0.7)
        pv, _ = perf_of(g, m)
        assert pv.as_tuple() == pytest.approx((1.0, 0.7))

    def test_two_edge_path_takes_heavier(self):
        m = brute_force_opt(path([0.3, 0.9]))
        assert m.edges == frozenset({(1, 2)})

    def test_size_beats_weight(self):
        m = brute_force_opt(path([0.5, 0.9, 0.5]))
        assert m.edges == frozenset({(0, 1), (2, 3)})
        assert m.weight == pytest.approx(1.0)

    def test_against_subset_scan(self):
        for i in range(40):
            g = random_small_tree(i, max_depth=3)
            if g.m > 12:
                continue
            best = exhaustive_best(g)
            m = brute_force_opt(g)
            assert (m.size, m.weight) == pytest.approx(best[0])
            assert m.edges == best[1]

    def test_cap(self):
        g = graph_of(28, {(i, i + 1): 1.0 for i in range(27)})
        with pytest.raises(EnumerationLimitError):
            brute_force_opt(g)

    def test_no_single_swap_improvement(self):
        for i in range(25):
            g = random_small_tree(i)
            if g.m > 20:
                continue
            m = brute_force_opt(g)
            covered = {v for e in m.edges for v in e}
            # no exposed edge can be added
            for u, v in g.edges():
                if (u, v) not in m.edges:
                    assert u in covered or v in covered
            # no swap of one matched edge for a heavier incident edge
            for u, v in m.edges:
                for x, y in g.edges():
                    if (x, y) in m.edges:
                        continue
                    touching = {x, y} & {u, v}
                    others = covered - {u, v}
                    if touching and not ({x, y} & others):
                        assert g.weights[(x, y)] <= g.weights[(u, v)] + 1e-12


class TestTreeDp:
    def test_empty_forest(self):
        g = graph_of(3, {})
        m, gains = tree_opt_dp(g)
        assert m.size == 0 and gains == {}

    def test_matches_brute_force(self):
        for i in range(300):
            g = random_small_tree(i)
            if g.m > 26:
                continue
            dp, _ = tree_opt_dp(g)
            bf = brute_force_opt(g)
            assert dp.size == bf.size
            assert dp.weight == pytest.approx(bf.weight, abs=1e-9)

    def test_scalar_gain_criterion(self):
        # weight-only mode: edge is matched iff w(u,v) > gain(u,v) + gain(v,u)
        for i in range(60):
            g = random_small_tree(i, max_depth=3)
            if g.m > 12 or g.m == 0:
                continue
            m, gains = tree_opt_dp(g, objective="weight")
            best = exhaustive_best(g, lex=False)
            assert m.weight == pytest.approx(best[0], abs=1e-9)
            for u, v in g.edges():
                in_m = (u, v) in m.edges
                criterion = g.weights[(u, v)] > gains[(u, v)] + gains[(v, u)]
                assert in_m == criterion

    def test_lex_gain_criterion(self):
        # lex mode: gains are (size, weight) pairs and the decision rule is
        # gains(u,v) + gains(v,u) < (1, w) lexicographically
        for i in range(60):
            g = random_small_tree(i, max_depth=3)
            if g.m > 14 or g.m == 0:
                continue
            m, gains = tree_opt_dp(g)
            for u, v in g.edges():
                a = gains[(u, v)]
                b = gains[(v, u)]
                decided = (a[0] + b[0], a[1] + b[1]) < (1, g.weights[(u, v)])
                assert ((u, v) in m.edges) == decided

    def test_cycle_rejected(self):
        g = graph_of(3, {(0, 1): 1.0, (1, 2): 1.0, (0, 2): 1.0})
        with pytest.raises(CycleError):
            tree_opt_dp(g)


class TestLeafRemoval:
    def test_forest_exact(self):
        for i in range(50):
            g = random_small_tree(i)
            if g.m > 26:
                continue
            m, is_exact, core = leaf_removal(g, RngSeed(9, i))
            assert is_exact and core == 0
            assert m.size == brute_force_opt(g).size

    def test_triangle(self):
        g = graph_of(3, {(0, 1): 1.0, (1, 2): 1.0, (0, 2): 1.0})
        m, is_exact, core = leaf_removal(g, RngSeed(1))
        assert not is_exact and m.size == 1 and core == 2

    def test_er_critical_mostly_certified(self):
        law_density = 0.544062
        n = 5000
        hits = 0
        fracs = []
        for i in range(4):
            g = randgraph.erdos_renyi(n, 1.0, RngSeed(77, i))
            m, is_exact, _ = leaf_removal(g, RngSeed(78, i))
            if is_exact:
                hits += 1
                fracs.append(2.0 * m.size / n)
        assert hits >= 3
        assert abs(np.mean(fracs) - law_density) < 0.02

    def test_matching_valid(self):
        g = randgraph.erdos_renyi(500, 2.5, RngSeed(5))
        m, _, _ = leaf_removal(g, RngSeed(6))
        Matching.from_edges(g, m.edges)  # raises if not vertex-disjoint


class TestMandatoryBlocking:
    def test_single_edge(self):
        g = graph_of(2, {(0, 1): 1.0})
        assert mandatory_blocking(g) == {(0, 1): MANDATORY}

    def test_two_edge_path_both_free(self):
        cls = mandatory_blocking(path([1.0, 1.0]))
        assert set(cls.values()) == {FREE}

    def test_star_all_free(self):
        g = graph_of(4, {(0, 1): 1.0, (0, 2): 1.0, (0, 3): 1.0})
        assert set(mandatory_blocking(g).values()) == {FREE}

    def test_three_edge_path(self):
        cls = mandatory_blocking(path([1.0, 1.0, 1.0]))
        assert cls[(0, 1)] == MANDATORY
        assert cls[(1, 2)] == BLOCKING
        assert cls[(2, 3)] == MANDATORY

    def test_mandatory_in_every_maximum(self):
        for i in range(30):
            g = random_small_tree(i, max_depth=3)
            if g.m > 14:
                continue
            cls = mandatory_blocking(g)
            size, _, inter, union, sets = exact._enumerate_max_matchings(g)
            for e, label in cls.items():
                if label == MANDATORY:
                    assert all(e in s for s in sets)
                elif label == BLOCKING:
                    assert all(e not in s for s in sets)


class TestUniformMaxMatching:
    def test_single_edge(self):
        g = graph_of(2, {(0, 1): 1.0})
        m = uniform_max_matching(g, RngSeed(3))
        assert m.edges == frozenset({(0, 1)})

    def test_two_edge_path_even_split(self):
        g = path([1.0, 1.0])
        counts = {}
        for i in range(10_000):
            m = uniform_max_matching(g, RngSeed(10, i))
            e = next(iter(m.edges))
            counts[e] = counts.get(e, 0) + 1
        assert abs(counts[(0, 1)] / 10_000 - 0.5) < 0.02

    def test_star_of_stars_root_matched(self):
        # root 0 with neighbours 1,2; leaves 3 under 1 and 4 under 2;
        # 3 maximum matchings, 2 of which match the root
        g = graph_of(5, {(0, 1): 1.0, (0, 2): 1.0, (1, 3): 1.0, (2, 4): 1.0})
        hits = 0
        n = 10_000
        for i in range(n):
            m = uniform_max_matching(g, RngSeed(20, i))
            if m.covers(0):
                hits += 1
        assert abs(hits / n - 2.0 / 3.0) < 0.02


class TestPerf:
    def test_empty(self):
        g = path([1.0])
        pv, pe = perf_of(g, Matching(frozenset(), 0.0))
        assert pv.as_tuple() == (0.0, 0.0) and pe.as_tuple() == (0.0, 0.0)

    def test_perfect(self):
        g = path([0.8])
        m = brute_force_opt(g)
        pv, _ = perf_of(g, m)
        assert pv.as_tuple() == pytest.approx((1.0, 0.8))

    def test_proportionality_identity(self):
        for i in range(40):
            g = random_small_tree(i)
            if g.m == 0 or g.m > 26:
                continue
            m = brute_force_opt(g)
            pv, pe = perf_of(g, m)
            ratio = 2.0 * g.m / g.n
            assert pv.match_prob == pytest.approx(ratio * pe.match_prob, abs=1e-12)
            assert pv.expected_weight == pytest.approx(ratio * pe.expected_weight, abs=1e-12)

    def test_rejects_non_matching(self):
        g = path([1.0, 1.0])
        with pytest.raises(NotAMatchingError):
            perf_of(g, Matching(frozenset({(0, 1), (1, 2)}), 2.0))

from functools import lru_cache

import networkx as nx
import numpy as np
import pytest

from conftest import digraph, random_digraph
from firmcontrol import DirectedGraph, maximum_matching, minimum_driver_count, split_bipartite
from firmcontrol.matching import Matching, has_augmenting_path, is_valid_matching, write_matching_csv


def brute_force_matching_size(n, edges):
    """Largest set of edges sharing no out-copy and no in-copy, by memoised exhaustive search."""
    edges = sorted(set(edges))

    @lru_cache(maxsize=None)
    def best(i, used_u, used_w):
        if i == len(edges):
            return 0
        u, w = edges[i]
        skip = best(i + 1, used_u, used_w)
        if used_u >> u & 1 or used_w >> w & 1:
            return skip
        return max(skip, 1 + best(i + 1, used_u | 1 << u, used_w | 1 << w))

    return best(0, 0, 0)


def test_split_examples(dilation, cycle3):
    sp = split_bipartite(dilation)
    assert sorted(sp.edges()) == [(0, 1), (0, 2)]
    empty = split_bipartite(DirectedGraph.from_edges(4, [], []))
    assert np.all(empty.w_degree() == 0)
    sp = split_bipartite(cycle3)
    assert sp.edge_count == 3
    assert np.all(sp.w_degree() == 1)


def test_isolated_w_iff_zero_in_degree():
    rng = np.random.default_rng(5)
    for _ in range(50):
        g = random_digraph(rng, 10, 0.15)
        sp = split_bipartite(g)
        assert np.array_equal(sp.w_degree() == 0, g.in_degree() == 0)
        assert sp.edge_count == g.edge_count


def test_chain_matching(chain):
    m = maximum_matching(split_bipartite(chain))
    assert m.size == 2
    assert m.pairs() == [(0, 1), (1, 2)]


def test_dilation_matching(dilation):
    assert maximum_matching(split_bipartite(dilation)).size == 1


@pytest.mark.parametrize("graph,count", [
    ("chain", 1),
    ("cycle3", 1),
])
def test_minimum_driver_count_examples(graph, count, request):
    assert minimum_driver_count(request.getfixturevalue(graph)) == count


def test_out_star_needs_five_drivers():
    star = digraph(6, [(0, i) for i in range(1, 6)])
    assert brute_force_matching_size(6, [(0, i) for i in range(1, 6)]) == 1
    assert minimum_driver_count(star) == 5


def test_against_brute_force():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        n = int(rng.integers(1, 9))
        g = random_digraph(rng, n, 0.3)
        sp = split_bipartite(g)
        m = maximum_matching(sp)
        assert m.size == brute_force_matching_size(n, sp.edges())
        assert is_valid_matching(sp, m)
        assert not has_augmenting_path(sp, m)


def test_against_networkx_medium_graphs():
    rng = np.random.default_rng(11)
    for _ in range(20):
        n = int(rng.integers(50, 400))
        g = random_digraph(rng, n, 2.0 / n)
        B = nx.Graph()
        B.add_nodes_from((("u", i) for i in range(n)), bipartite=0)
        B.add_nodes_from((("w", i) for i in range(n)), bipartite=1)
        B.add_edges_from((("u", a), ("w", b)) for a, b in g.edge_set())
        ref = nx.bipartite.hopcroft_karp_matching(B, top_nodes=[("u", i) for i in range(n)])
        assert maximum_matching(split_bipartite(g)).size == len(ref) // 2


def test_invariances():
    rng = np.random.default_rng(3)
    for _ in range(100):
        n = int(rng.integers(2, 30))
        g = random_digraph(rng, n, 0.1)
        size = maximum_matching(split_bipartite(g)).size
        perm = rng.permutation(n)
        s, t = g.edges()
        h = DirectedGraph.from_edges(n, perm[s], perm[t])
        assert maximum_matching(split_bipartite(h)).size == size
        assert maximum_matching(split_bipartite(g.reverse())).size == size


def test_deterministic():
    rng = np.random.default_rng(8)
    g = random_digraph(rng, 200, 0.02)
    a = maximum_matching(split_bipartite(g))
    b = maximum_matching(split_bipartite(g))
    assert np.array_equal(a.match_w, b.match_w)


def test_checker_detects_non_maximum(chain):
    sp = split_bipartite(chain)
    mw = np.array([-1, 0, -1])
    mu = np.array([1, -1, -1])
    partial = Matching(mw, mu)
    assert is_valid_matching(sp, partial)
    assert has_augmenting_path(sp, partial)
    bogus = Matching(np.array([-1, 2, -1]), np.array([-1, -1, 1]))
    assert not is_valid_matching(sp, bogus)


def test_matching_dump(tmp_path, chain):
    p = tmp_path / "m.csv"
    write_matching_csv(chain, maximum_matching(split_bipartite(chain)), p)
    assert p.read_text().splitlines() == ["node_id,matched_parent_id", "a,", "b,a", "c,b"]

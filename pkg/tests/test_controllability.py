import itertools

import numpy as np
import pytest

from conftest import digraph, random_digraph
from firmcontrol import (DirectedGraph, NodeClass, classify_nodes, extract_driver_set,
                         minimum_driver_count, oracle_classify)
from firmcontrol.controllability import OracleSizeError, enumerate_maximum_matchings
from firmcontrol.graph import FirmTable

ND, NF, OD = NodeClass.NECESSARY_DRIVER, NodeClass.NECESSARY_FOLLOWER, NodeClass.ORDINARY


def test_chain(chain):
    rep = classify_nodes(chain)
    assert rep.labels.tolist() == [ND, NF, NF]
    assert rep.driver_count == 1
    assert extract_driver_set(chain).tolist() == [0]


def test_dilation(dilation):
    assert classify_nodes(dilation).labels.tolist() == [ND, OD, OD]
    # both maximum matchings, each leaving one leaf exposed
    best, masks = enumerate_maximum_matchings(dilation)
    assert best == 1
    assert sorted(masks) == [0b011, 0b101]
    drivers = extract_driver_set(dilation).tolist()
    assert drivers in ([0, 1], [0, 2])
    assert extract_driver_set(dilation).tolist() == drivers


def test_cycle_all_ordinary(cycle3):
    rep = classify_nodes(cycle3)
    assert rep.labels.tolist() == [OD, OD, OD]
    assert rep.driver_count == 1
    assert extract_driver_set(cycle3).tolist() == [0]
    assert oracle_classify(cycle3).labels.tolist() == [OD, OD, OD]


def test_isolated_nodes_are_drivers():
    g = DirectedGraph.from_edges(5, [], [])
    assert classify_nodes(g).labels.tolist() == [ND] * 5
    assert classify_nodes(g).driver_count == 5


def test_oracle_matches_examples(chain, dilation):
    for g in (chain, dilation):
        assert np.array_equal(oracle_classify(g).labels, classify_nodes(g).labels)


def test_oracle_size_guard():
    with pytest.raises(OracleSizeError):
        oracle_classify(DirectedGraph.from_edges(13, [], []))


def test_report_shares_and_capital():
    g = digraph(3, [(0, 1), (1, 2)])
    g = g.with_attributes(FirmTable(np.array([10.0, np.nan, 30.0]), np.array([0, 0, 0], dtype=np.int16)))
    rep = classify_nodes(g)
    assert sum(rep.shares.values()) == pytest.approx(1, abs=1e-9)
    assert rep.counts == {"ND": 1, "NF": 2, "OD": 0}
    assert rep.capital_shares == {"ND": 0.25, "NF": 0.75, "OD": 0.0}
    assert rep.unknown_capital_nodes == 1
    assert rep.total_known_capital == 40.0


def test_random_against_oracle_and_invariants():
    rng = np.random.default_rng(77)
    for _ in range(1000):
        n = int(rng.integers(1, 9))
        g = random_digraph(rng, n, 0.3)
        rep = classify_nodes(g)
        ref = oracle_classify(g)
        assert rep.labels.tolist() == ref.labels.tolist()
        nd = set(rep.members(ND).tolist())
        assert nd == set(np.flatnonzero(g.in_degree() == 0).tolist())
        assert len(nd) <= rep.driver_count <= len(nd) + len(rep.members(OD))
        drivers = set(extract_driver_set(g).tolist())
        assert len(drivers) == rep.driver_count == minimum_driver_count(g)
        assert nd <= drivers
        assert not drivers & set(rep.members(NF).tolist())


def test_every_minimum_driver_set_respects_labels():
    # drivers of a maximum matching are exactly its exposed in-copies
    rng = np.random.default_rng(4)
    for _ in range(200):
        n = int(rng.integers(2, 8))
        g = random_digraph(rng, n, 0.35)
        labels = classify_nodes(g).labels
        best, masks = enumerate_maximum_matchings(g)
        if best == n:
            continue
        for m in masks:
            chosen = {v for v in range(n) if m >> v & 1}
            assert all(v in chosen for v in np.flatnonzero(labels == ND))
            assert not any(v in chosen for v in np.flatnonzero(labels == NF))


def test_permutation_invariance():
    rng = np.random.default_rng(19)
    for _ in range(100):
        n = int(rng.integers(2, 40))
        g = random_digraph(rng, n, 0.08)
        labels = classify_nodes(g).labels
        perm = rng.permutation(n)
        s, t = g.edges()
        h = DirectedGraph.from_edges(n, perm[s], perm[t])
        assert np.array_equal(classify_nodes(h).labels[perm], labels)


def test_large_graph_identity():
    rng = np.random.default_rng(0)
    n = 20000
    s = rng.integers(0, n, 60000)
    t = rng.integers(0, n, 60000)
    g = DirectedGraph.from_edges(n, s, t)
    for view in (g, g.reverse()):
        rep = classify_nodes(view)
        assert np.array_equal(rep.members(ND), np.flatnonzero(view.in_degree() == 0))


def test_exhaustive_small_graphs():
    # every digraph on 3 nodes
    pairs = [(a, b) for a, b in itertools.permutations(range(3), 2)]
    for mask in range(1 << len(pairs)):
        edges = [e for i, e in enumerate(pairs) if mask >> i & 1]
        g = digraph(3, edges)
        assert classify_nodes(g).labels.tolist() == oracle_classify(g).labels.tolist()


def test_classification_csv(tmp_path, chain):
    p = tmp_path / "c.csv"
    classify_nodes(chain).write_csv(chain, p)
    assert p.read_text().splitlines() == ["node_id,class", "a,ND", "b,NF", "c,NF"]

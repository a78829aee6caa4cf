import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rdcsim.engine import RngStreams
from rdcsim.medium import Position, RadioGeometry, distance
from rdcsim.routing import (CENTER, DisconnectedTopology, StarTopology, build_collect_tree,
                            random_collect_topology, star_pairs, star_positions)

GEO = RadioGeometry()


def test_fourteen_node_star_pairs():
    assert star_pairs(14) == [(2, 9), (4, 11), (6, 13), (8, 15), (10, 3), (12, 5), (14, 7)]


def test_small_star_pairs():
    assert star_pairs(2) == [(2, 3)]
    assert star_pairs(4) == [(2, 4), (4, 2)]


@pytest.mark.parametrize("n", [0, 3, 13])
def test_odd_or_empty_star_rejected(n):
    with pytest.raises(ValueError):
        star_pairs(n)


@pytest.mark.parametrize("n", [2, 4, 6, 8, 10, 12, 14])
def test_star_neighbours_are_one_hop_from_center(n):
    pos = star_positions(n)
    assert set(pos) == set(range(1, n + 2))
    for node in range(2, n + 2):
        assert distance(pos[CENTER], pos[node]) <= GEO.tx_range
    for s, d in star_pairs(n):
        assert s % 2 == 0 and s != CENTER and d != CENTER


def test_star_next_hop():
    topo = StarTopology.build(14)
    assert topo.next_hop(2, 9) == CENTER
    assert topo.next_hop(CENTER, 9) == 9
    assert topo.next_hop(9, 9) == 9
    with pytest.raises(KeyError):
        topo.next_hop(2, 99)


def test_every_star_route_is_two_hops():
    topo = StarTopology.build(14)
    for s, d in topo.pairs:
        hops, node = 0, s
        while node != d:
            node = topo.next_hop(node, d)
            hops += 1
        assert hops == 2


def test_two_nodes_in_range():
    tree = build_collect_tree({1: Position(0, 0), 2: Position(30, 0)}, GEO, 1)
    assert tree.parent == {2: 1} and tree.rank == {1: 0, 2: 1}


def test_line_of_seven_has_ranks_zero_to_six():
    pos = {i + 1: Position(0.9 * GEO.tx_range * i, 0.0) for i in range(7)}
    tree = build_collect_tree(pos, GEO, 1)
    assert [tree.rank[i + 1] for i in range(7)] == list(range(7))
    assert tree.path(7) == [7, 6, 5, 4, 3, 2, 1]


def test_ties_go_to_the_lowest_id():
    # nodes 2 and 3 are both one hop from the sink and both reach node 4
    pos = {1: Position(0, 0), 3: Position(40, 10), 2: Position(40, -10), 4: Position(80, 0)}
    assert build_collect_tree(pos, GEO, 1).parent[4] == 2


def test_disconnected_topology_is_reported():
    with pytest.raises(DisconnectedTopology):
        build_collect_tree({1: Position(0, 0), 2: Position(200, 0)}, GEO, 1)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_collect_tree_is_acyclic_and_rank_consistent(seed):
    rngs = RngStreams(seed)
    pos, tree, _ = random_collect_topology(rngs.topology, 49)
    for node in pos:
        path = tree.path(node)
        assert len(path) == tree.rank[node] + 1
        assert len(set(path)) == len(path)
        if node != tree.sink:
            p = tree.parent[node]
            assert tree.rank[p] == tree.rank[node] - 1
            assert distance(pos[node], pos[p]) <= GEO.tx_range


def test_collect_mean_rank_is_about_six_hops():
    ranks = [random_collect_topology(RngStreams(s).topology, 49)[1].mean_rank() for s in range(30)]
    assert 5 <= np.mean(ranks) <= 7

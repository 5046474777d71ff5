import networkx as nx
import pytest

from src.components.combinat import enumerate_pair_partitions, genus
from src.components.quotient import (build_quotient, is_double_tree, spanning_tree,
                                     to_adjacency_text, twin_edges_opposite, underlying_simple)
from src.entity.graph import SimpleGraph
from src.entity.partition import PairPartition
from src.exception import DomainError


def test_worked_quotient(worked_partition):
    qg = build_quotient(worked_partition)
    assert qg.vertices == (1, 3, 4)
    assert qg.absorbed[1] == frozenset({1, 2, 5, 6})
    assert qg.edges == ((1, 1, 1), (1, 3, 2), (3, 4, 3), (4, 1, 4),
                        (1, 1, 5), (1, 4, 6), (4, 3, 7), (3, 1, 8))
    assert [e[2] for e in qg.loops] == [1, 5]
    assert 7 in qg.absorbed[4]

    sg = underlying_simple(qg)
    assert sg.simple_edges == {(1, 3): 2, (1, 4): 2, (3, 4): 2}
    assert sg.loop_count == 2
    assert not is_double_tree(qg)


def test_vertex_count_tracks_cycle_count():
    for ell in range(1, 5):
        for pp in enumerate_pair_partitions(ell):
            assert len(build_quotient(pp).vertices) == genus(pp).cycle_count


def test_double_trees_are_exactly_the_noncrossing_partitions():
    for ell in range(1, 5):
        for pp in enumerate_pair_partitions(ell):
            assert is_double_tree(build_quotient(pp)) == (genus(pp).genus == 0)


def test_twin_edges_run_opposite_for_every_partition():
    for ell in range(1, 5):
        for pp in enumerate_pair_partitions(ell):
            assert twin_edges_opposite(build_quotient(pp), pp)


def test_crossing_pair_collapses_to_one_vertex(crossing_pair):
    qg = build_quotient(crossing_pair)
    assert qg.vertices == (1,)
    assert len(qg.loops) == 4
    assert underlying_simple(qg).simple_edges == {}


def test_spanning_tree_is_lexicographic_kruskal(worked_partition):
    sg = underlying_simple(build_quotient(worked_partition))
    tree = spanning_tree(sg)
    assert tree == ((1, 3), (1, 4))
    assert nx.is_tree(nx.Graph(tree))


def test_spanning_tree_rejects_disconnected_graph():
    sg = SimpleGraph(vertices=(1, 2, 3), simple_edges={(1, 2): 1}, loop_count=0)
    with pytest.raises(DomainError):
        spanning_tree(sg)


def test_adjacency_text(worked_partition):
    text = to_adjacency_text(build_quotient(worked_partition))
    assert text == "1 3 2 0\n1 4 2 0\n3 4 2 0\n1 1 2 1\n"

    planar = PairPartition.from_blocks([(1, 2), (3, 4)])
    assert to_adjacency_text(build_quotient(planar)) == "1 2 2 0\n1 4 2 0\n"

from collections import Counter

import networkx as nx
import pytest

from fiapower.topology import (AccessTreeSpec, DisconnectedGraphError, Pop, PopGraph,
                               TopologyError, TopologyParseError, assign_origins,
                               attach_access_trees, load_pop_graph, parse_pop_graph,
                               synth_pop_graph, write_pop_graph)


def test_parse_two_pops(tmp_path):
    f = tmp_path / "two.txt"
    f.write_text("# tiny\npop a Boston 10\npop b NYC 20  # big\nlink a b 40e9\n")
    g = load_pop_graph(f)
    assert [p.id for p in g.pops] == ["a", "b"]
    assert g.links == [("a", "b", 40e9)]


def test_parse_duplicate_edge_reports_line():
    with pytest.raises(TopologyParseError) as err:
        parse_pop_graph(["pop a x 1", "pop b y 1", "link a b 1", "link b a 1"])
    assert err.value.lineno == 4


@pytest.mark.parametrize("lines", [
    ["pop a x"],
    ["pop a x many"],
    ["pop a x 1", "link a b 1"],
    ["pop a x 1", "link a a 1"],
    ["router a"],
    [],
])
def test_parse_errors(lines):
    with pytest.raises(TopologyParseError):
        parse_pop_graph(lines)


def test_disconnected_lists_components():
    with pytest.raises(DisconnectedGraphError) as err:
        parse_pop_graph(["pop a x 1", "pop b x 1", "pop c x 1", "link a b 1"])
    assert err.value.components == [["a", "b"], ["c"]]


def test_write_load_round_trip(tmp_path):
    g = synth_pop_graph(12, 2.5, seed=4)
    write_pop_graph(g, tmp_path / "g.txt")
    assert load_pop_graph(tmp_path / "g.txt") == g


def test_synth_small_and_deterministic():
    g = synth_pop_graph(2, 1, seed=0)
    assert len(g.pops) == 2 and len(g.links) == 1
    assert synth_pop_graph(30, 3, seed=9) == synth_pop_graph(30, 3, seed=9)
    assert synth_pop_graph(30, 3, seed=9) != synth_pop_graph(30, 3, seed=10)


def test_synth_fifty_pops():
    g = synth_pop_graph(50, 3, seed=2)
    G = nx.Graph([(a, b) for a, b, _ in g.links])
    assert G.number_of_nodes() == 50 and G.number_of_edges() == 75
    assert nx.is_connected(G)


def test_synth_infeasible_degree():
    with pytest.raises(TopologyError):
        synth_pop_graph(4, 5, seed=0)
    with pytest.raises(TopologyError):
        synth_pop_graph(1, 1, seed=0)


@pytest.mark.parametrize("depth, arity, new, leaves", [(3, 3, 39, 27), (1, 1, 1, 1), (2, 4, 20, 16)])
def test_tree_sizes(depth, arity, new, leaves):
    g = synth_pop_graph(5, 2, seed=1)
    m = attach_access_trees(g, AccessTreeSpec(depth, arity))
    assert m.num_nodes == 5 * (1 + new)
    assert len(m.leaves) == 5 * leaves
    roles = Counter(m.roles)
    assert roles["core"] == 5 and roles["edge"] == 5 * (new - leaves)
    for p in range(5):
        assert len(m.leaves_of_pop(p)) == leaves


def test_bad_tree_spec():
    with pytest.raises(TopologyError):
        AccessTreeSpec(0, 3)


def _default_model():
    return attach_access_trees(synth_pop_graph(10, 3, seed=5))


def test_leaf_to_own_core_is_three_hops():
    m = _default_model()
    leaf = m.leaves_of_pop(3)[0]
    path = m.shortest_path(leaf, 3)
    assert len(path) == 4 and path[0] == leaf and path[-1] == 3
    assert m.shortest_path(leaf, leaf) == (leaf,)


def test_tie_break_smallest_next_hop():
    # square a-b-d, a-c-d: two equal routes from a to d
    g = PopGraph([Pop(x, x, 1) for x in "abcd"],
                 [("a", "b", 1), ("a", "c", 1), ("b", "d", 1), ("c", "d", 1)])
    m = attach_access_trees(g, AccessTreeSpec(1, 1))
    assert m.shortest_path(0, 3) == (0, 1, 3)
    assert m.shortest_path(3, 0) == (3, 1, 0)


def test_paths_match_networkx_oracle():
    m = _default_model()
    G = nx.Graph()
    for u, nbrs in enumerate(m.adjacency):
        G.add_edges_from((u, v) for v in nbrs)
    for src in m.leaves[::13]:
        lengths = nx.single_source_shortest_path_length(G, src)
        for dst in range(0, m.num_nodes, 7):
            path = m.shortest_path(src, dst)
            assert len(path) - 1 == lengths[dst]
            assert all(G.has_edge(a, b) for a, b in zip(path, path[1:]))
            # lexicographically smallest among all shortest paths
            assert list(path) == min(nx.all_shortest_paths(G, src, dst))


def test_every_leaf_reaches_every_core():
    m = _default_model()
    for c in m.core_nodes:
        d = m.distances_to(c)
        assert all(d[l] >= 0 for l in m.leaves)


def test_origins_uniform_over_pops():
    m = attach_access_trees(synth_pop_graph(25, 3, seed=1))
    m = assign_origins(m, 25_000, seed=3)
    counts = Counter(m.origin_of)
    assert set(counts) == set(m.core_nodes)
    assert all(850 <= v <= 1150 for v in counts.values())
    assert assign_origins(m, 100, seed=3).origin_of == assign_origins(m, 100, seed=3).origin_of
    with pytest.raises(ValueError):
        assign_origins(m, 0, seed=3)

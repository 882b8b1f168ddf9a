import random

import pytest
from oracles import lru_mismatches

from fiapower.cache_sim import (CacheConfigError, CacheDeployment, CacheNetwork, LruCache,
                                check_strategy, lru_get, lru_put, place_caches, resolve_query)
from fiapower.topology import assign_origins, attach_access_trees, synth_pop_graph
from fiapower.workload import Catalog, ZipfSpec, generate_trace


def test_lru_matches_reference_on_random_sequences():
    assert lru_mismatches(100_000, seed=2024) == 0


def test_lru_examples():
    c = LruCache(2)
    assert not lru_get(c, "A")
    assert lru_put(c, "A", 1) == []
    lru_put(c, "B", 1)
    assert lru_get(c, "A")
    assert lru_put(c, "C", 1) == ["B"]
    d = LruCache(3)
    evicted = [lru_put(d, x, 1) for x in "ABCD"]
    assert evicted[-1] == ["A"]
    assert lru_get(d, "D") and lru_get(d, "D")


def test_uncacheable_is_noop():
    c = LruCache(5)
    c.put(1, 3)
    assert c.put(2, 6) is None
    assert c.uncacheable == 1 and list(c.entries) == [1] and c.occupancy == 3


def test_occupancy_never_exceeds_capacity():
    rng = random.Random(1)
    c = LruCache(100)
    for _ in range(5000):
        c.put(rng.randrange(50), rng.randint(1, 40))
        assert c.occupancy <= 100
        assert c.occupancy == sum(c.entries.values())


@pytest.fixture(scope="module")
def model():
    m = attach_access_trees(synth_pop_graph(6, 2, seed=3))
    return assign_origins(m, 1000, seed=3)


def test_per_node_capacity_example():
    from fiapower.topology import AccessTreeSpec, Pop, PopGraph
    # 4 PoPs with 25 leaves each: R = 100 edge caches
    g = PopGraph([Pop(f"p{i}", "x", 1) for i in range(4)],
                 [("p0", "p1", 1), ("p1", "p2", 1), ("p2", "p3", 1)])
    m = attach_access_trees(g, AccessTreeSpec(1, 25))
    cat = Catalog(1_000_000, 1_000_000)
    dep = CacheDeployment("edge_leaf_only", 0.05)
    assert len(dep.caching_nodes(m)) == 100
    assert dep.per_node_capacity(m, cat) == 500_000_000


def test_placement(model):
    cat = Catalog(1000, 1_000_000)
    assert place_caches(model, CacheDeployment("edge_leaf_only", 0.0), cat).caches == {}
    assert place_caches(model, CacheDeployment("none", 0.5), cat).caches == {}
    full = place_caches(model, CacheDeployment("pervasive_all_routers", 1.0), cat)
    assert set(full.caches) == set(range(model.num_nodes))
    total = sum(c.capacity for c in full.caches.values())
    assert cat.total_bytes - len(full) < total <= cat.total_bytes
    edge = place_caches(model, CacheDeployment("edge_leaf_only", 1.0), cat)
    assert set(edge.caches) == set(model.leaves)


def test_deployment_validation():
    with pytest.raises(CacheConfigError):
        CacheDeployment("edge_leaf_only", 1.5)
    with pytest.raises(CacheConfigError):
        CacheDeployment("everywhere", 0.1)
    with pytest.raises(CacheConfigError):
        check_strategy(CacheDeployment("edge_leaf_only", 0.1), "on_path")
    with pytest.raises(CacheConfigError):
        check_strategy(CacheDeployment("pervasive_all_routers", 0.1), "simple_edge")
    check_strategy(CacheDeployment("none"), None)


@pytest.mark.parametrize("strategy, placement", [
    ("simple_edge", "edge_leaf_only"), ("cooperative_edge", "edge_leaf_only"),
    ("on_path", "pervasive_all_routers"), ("nearest_copy", "pervasive_all_routers")])
def test_cold_cache_serves_from_origin(model, strategy, placement):
    caches = place_caches(model, CacheDeployment(placement, 0.5), Catalog(1000, 1000))
    leaf = model.leaves[5]
    d = resolve_query(strategy, model, caches, leaf, 7, 1000)
    assert d.serving_node == model.origin_of[7] and not d.cache_hit
    assert d.query_path == model.shortest_path(leaf, model.origin_of[7])
    assert d.response_path == d.query_path[::-1]


def test_on_path_second_query_hits_leaf(model):
    caches = place_caches(model, CacheDeployment("pervasive_all_routers", 0.5), Catalog(1000, 1000))
    leaf = model.leaves[0]
    first = resolve_query("on_path", model, caches, leaf, 3, 1000)
    assert set(first.inserted_at) == set(first.response_path)
    second = resolve_query("on_path", model, caches, leaf, 3, 1000)
    assert second.serving_node == leaf and second.query_path == (leaf,)


def test_on_path_hits_shared_router(model):
    caches = place_caches(model, CacheDeployment("pervasive_all_routers", 0.5), Catalog(1000, 1000))
    a, b = model.leaves_of_pop(0)[:2]   # siblings share a parent
    resolve_query("on_path", model, caches, a, 3, 1000)
    d = resolve_query("on_path", model, caches, b, 3, 1000)
    assert d.cache_hit and len(d.query_path) == 2


def test_edge_strategies(model):
    caches = place_caches(model, CacheDeployment("edge_leaf_only", 0.5), Catalog(1000, 1000))
    a, b = model.leaves_of_pop(0)[0], model.leaves_of_pop(0)[1]
    first = resolve_query("simple_edge", model, caches, a, 9, 1000)
    assert first.inserted_at == [a]
    d = resolve_query("simple_edge", model, caches, a, 9, 1000)
    assert d.cache_hit and d.query_path == (a,)
    coop = resolve_query("cooperative_edge", model, caches, b, 9, 1000)
    # the sibling leaf is 2 hops away, the origin at least 2 (tie goes to the cache)
    if model.hop_distance(b, model.origin_of[9]) >= 2:
        assert coop.serving_node == a and coop.cache_hit
    assert coop.inserted_at == [b]


def _check_strategy_properties(model, strategy, placement):
    cat = Catalog(1000, 1000)
    trace = generate_trace(model, cat, ZipfSpec(0.9, 1000), 3000, seed=4)
    caches = place_caches(model, CacheDeployment(placement, 0.1), cat)
    for leaf, content in trace.events():
        origin = model.origin_of[content]
        d = resolve_query(strategy, model, caches, leaf, content, cat.content_size)
        assert d.query_path[0] == leaf and d.query_path[-1] == d.serving_node
        assert d.response_path == d.query_path[::-1]
        assert len(d.response_path) <= len(model.shortest_path(leaf, origin))
        if d.serving_node != origin:
            assert d.cache_hit


@pytest.mark.parametrize("strategy, placement", [
    ("simple_edge", "edge_leaf_only"), ("cooperative_edge", "edge_leaf_only"),
    ("on_path", "pervasive_all_routers"), ("nearest_copy", "pervasive_all_routers")])
def test_response_never_longer_than_origin_path(model, strategy, placement):
    _check_strategy_properties(model, strategy, placement)


def test_nearest_no_longer_than_on_path_same_state(model):
    import copy
    cat = Catalog(1000, 1000)
    trace = generate_trace(model, cat, ZipfSpec(0.9, 1000), 2000, seed=6)
    caches = place_caches(model, CacheDeployment("pervasive_all_routers", 0.1), cat)
    for i, (leaf, content) in enumerate(trace.events()):
        if i % 50 == 0:
            probe = copy.deepcopy(caches)
            near = resolve_query("nearest_copy", model, probe, leaf, content, 1000)
            probe = copy.deepcopy(caches)
            onp = resolve_query("on_path", model, probe, leaf, content, 1000)
            assert len(near.response_path) <= len(onp.response_path)
        resolve_query("on_path", model, caches, leaf, content, 1000)


def test_single_leaf_full_budget_hits_everything():
    from fiapower.topology import AccessTreeSpec, Pop, PopGraph
    g = PopGraph([Pop("a", "x", 1)], [])
    m = assign_origins(attach_access_trees(g, AccessTreeSpec(1, 1)), 50, seed=0)
    cat = Catalog(50, 100)
    # one leaf is the only caching node, so it holds the whole catalog
    caches = place_caches(m, CacheDeployment("edge_leaf_only", 1.0), cat)
    trace = generate_trace(m, cat, ZipfSpec(0.8, 50), 5000, seed=1)
    hits = [resolve_query("simple_edge", m, caches, l, c, 100).cache_hit
            for l, c in trace.events()]
    assert sum(hits[2500:]) / 2500 > 0.99


def test_missing_origins_rejected(model):
    from dataclasses import replace
    bare = replace(model, origin_of=None)
    with pytest.raises(ValueError):
        resolve_query("on_path", bare, CacheNetwork({}), model.leaves[0], 1, 1)

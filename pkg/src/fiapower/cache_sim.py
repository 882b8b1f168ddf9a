"""LRU content stores, cache-budget placement and cache discovery."""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple

from .topology import NetworkModel
from .workload import Catalog

PLACEMENTS = ("none", "edge_leaf_only", "pervasive_all_routers")
STRATEGIES = ("simple_edge", "cooperative_edge", "on_path", "nearest_copy")
EDGE_STRATEGIES = ("simple_edge", "cooperative_edge")
PERVASIVE_STRATEGIES = ("on_path", "nearest_copy")


class CacheConfigError(ValueError):
    pass


class LruCache:
    """Byte-capacity LRU store.  ``entries`` runs least- to most-recent."""

    __slots__ = ("capacity", "entries", "occupancy", "hits", "misses", "evictions",
                 "uncacheable", "bytes_served", "bytes_written")

    def __init__(self, capacity: int):
        if capacity < 0:
            raise CacheConfigError("capacity must be >= 0")
        self.capacity = capacity
        self.entries: "OrderedDict[int, int]" = OrderedDict()
        self.occupancy = 0
        self.hits = 0
        self.misses = 0
        self.evictions = 0
        self.uncacheable = 0
        self.bytes_served = 0
        self.bytes_written = 0

    def __contains__(self, content_id: int) -> bool:
        return content_id in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def get(self, content_id: int) -> bool:
        if content_id in self.entries:
            self.entries.move_to_end(content_id)
            self.hits += 1
            return True
        self.misses += 1
        return False

    def put(self, content_id: int, size: int) -> Optional[List[int]]:
        """Insert as most recent; returns evicted ids, or None if it can never fit."""
        if size > self.capacity:
            self.uncacheable += 1
            return None
        entries = self.entries
        if content_id in entries:
            self.occupancy -= entries.pop(content_id)
        evicted = []
        while self.occupancy + size > self.capacity:
            old, old_size = entries.popitem(last=False)
            self.occupancy -= old_size
            evicted.append(old)
        entries[content_id] = size
        self.occupancy += size
        self.evictions += len(evicted)
        self.bytes_written += size
        return evicted


def lru_get(cache: LruCache, content_id: int) -> bool:
    return cache.get(content_id)


def lru_put(cache: LruCache, content_id: int, size: int) -> Optional[List[int]]:
    return cache.put(content_id, size)


@dataclass(frozen=True)
class CacheDeployment:
    placement: str = "none"
    budget_ratio: float = 0.0

    def __post_init__(self):
        if self.placement not in PLACEMENTS:
            raise CacheConfigError(f"unknown placement {self.placement!r}")
        if not 0 <= self.budget_ratio <= 1:
            raise CacheConfigError("budget_ratio must be in [0, 1]")

    def caching_nodes(self, model: NetworkModel) -> List[int]:
        if self.placement == "edge_leaf_only":
            return model.leaves
        if self.placement == "pervasive_all_routers":
            return model.routers()
        return []

    def per_node_capacity(self, model: NetworkModel, catalog: Catalog) -> int:
        nodes = self.caching_nodes(model)
        if not nodes:
            return 0
        # floor; the remainder of the budget is not provisioned
        return int(self.budget_ratio * catalog.total_bytes // len(nodes))


def check_strategy(deployment: CacheDeployment, strategy: Optional[str]) -> None:
    if deployment.placement == "none":
        return
    if strategy not in STRATEGIES:
        raise CacheConfigError(f"unknown discovery strategy {strategy!r}")
    if deployment.placement == "edge_leaf_only" and strategy not in EDGE_STRATEGIES:
        raise CacheConfigError(f"{strategy} needs pervasive caches")
    if deployment.placement == "pervasive_all_routers" and strategy not in PERVASIVE_STRATEGIES:
        raise CacheConfigError(f"{strategy} needs edge caches")


class CacheNetwork:
    """The per-node caches of one run plus a content -> holders index."""

    def __init__(self, caches: Dict[int, LruCache]):
        self.caches = caches
        self.holders: Dict[int, Set[int]] = {}

    def __len__(self):
        return len(self.caches)

    def get(self, node: int, content_id: int) -> bool:
        cache = self.caches.get(node)
        return cache is not None and cache.get(content_id)

    def put(self, node: int, content_id: int, size: int) -> bool:
        cache = self.caches.get(node)
        if cache is None:
            return False
        evicted = cache.put(content_id, size)
        if evicted is None:
            return False
        for old in evicted:
            held = self.holders[old]
            held.discard(node)
            if not held:
                del self.holders[old]
        self.holders.setdefault(content_id, set()).add(node)
        return True

    def holding(self, content_id: int) -> Set[int]:
        return self.holders.get(content_id, set())


def place_caches(model: NetworkModel, deployment: CacheDeployment,
                 catalog: Catalog) -> CacheNetwork:
    capacity = deployment.per_node_capacity(model, catalog)
    if capacity <= 0:
        return CacheNetwork({})
    return CacheNetwork({n: LruCache(capacity) for n in deployment.caching_nodes(model)})


@dataclass
class ServingDecision:
    serving_node: int
    query_path: Tuple[int, ...]
    response_path: Tuple[int, ...]
    inserted_at: List[int] = field(default_factory=list)
    cache_hit: bool = False


def _nearest(model: NetworkModel, leaf: int, candidates, origin: int) -> Tuple[int, bool]:
    """Closest holder of a copy; caches win distance ties against the origin,
    then the smallest node id wins."""
    best = (model.hop_distance(leaf, origin), 1, origin)
    for node in candidates:
        key = (model.hop_distance(leaf, node), 0, node)
        if key < best:
            best = key
    return best[2], best[1] == 0


def resolve_query(strategy: Optional[str], model: NetworkModel, caches: CacheNetwork,
                  leaf: int, content_id: int, size: int) -> ServingDecision:
    """Decide who serves a request, and update cache state accordingly."""
    if model.origin_of is None:
        raise ValueError("model has no content origins")
    origin = model.origin_of[content_id]

    if not caches.caches or strategy is None:
        path = model.shortest_path(leaf, origin)
        return ServingDecision(origin, path, path[::-1])

    if strategy in EDGE_STRATEGIES:
        if caches.get(leaf, content_id):
            return ServingDecision(leaf, (leaf,), (leaf,), cache_hit=True)
        server, hit = origin, False
        if strategy == "cooperative_edge":
            others = caches.holding(content_id) - {leaf}
            server, hit = _nearest(model, leaf, others, origin)
            if hit:
                caches.get(server, content_id)
        path = model.shortest_path(leaf, server)
        inserted = [leaf] if caches.put(leaf, content_id, size) else []
        return ServingDecision(server, path, path[::-1], inserted, hit)

    if strategy == "on_path":
        full = model.shortest_path(leaf, origin)
        server, hit = origin, False
        for node in full:
            if caches.get(node, content_id):
                server, hit = node, True
                break
        path = full[: full.index(server) + 1]
    elif strategy == "nearest_copy":
        server, hit = _nearest(model, leaf, caches.holding(content_id), origin)
        if hit:
            caches.get(server, content_id)
        path = model.shortest_path(leaf, server)
    else:
        raise CacheConfigError(f"unknown discovery strategy {strategy!r}")

    response = path[::-1]
    inserted = [n for n in response[1:] if caches.put(n, content_id, size)] if len(response) > 1 \
        else []
    if not hit and len(response) >= 1 and response[0] == origin and origin in caches.caches:
        # the origin PoP's own content store also sees the object go by
        if caches.put(origin, content_id, size):
            inserted.insert(0, origin)
    return ServingDecision(server, path, response, inserted, hit)

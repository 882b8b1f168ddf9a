"""PoP-level core graphs with complete access trees hung off every PoP.

Nodes are small integers.  PoP ``i`` of a :class:`PopGraph` becomes node ``i``
of the :class:`NetworkModel`; tree nodes are numbered after all PoPs, PoP by
PoP, breadth first.  Routing is minimum-hop with ties broken towards the
smallest next-hop id.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .power_models import CORE_ROUTER, EDGE_ROUTER, RouterProfile

CORE_LINK_BPS = 40e9
EDGE_LINK_BPS = 10e9
LEAF_LINK_BPS = 1e9


class TopologyError(ValueError):
    pass


class TopologyParseError(TopologyError):
    def __init__(self, path, lineno: int, msg: str):
        super().__init__(f"{path}:{lineno}: {msg}")
        self.lineno = lineno


class DisconnectedGraphError(TopologyError):
    def __init__(self, components: List[List[str]]):
        listing = "; ".join("{" + ", ".join(c) + "}" for c in components)
        super().__init__(f"graph has {len(components)} components: {listing}")
        self.components = components


class UnreachableError(TopologyError):
    pass


@dataclass(frozen=True)
class Pop:
    id: str
    city: str
    population: int


@dataclass
class PopGraph:
    pops: List[Pop]
    links: List[Tuple[str, str, float]]

    def validate(self) -> "PopGraph":
        ids = [p.id for p in self.pops]
        if len(set(ids)) != len(ids):
            raise TopologyError("duplicate PoP ids")
        known = set(ids)
        seen = set()
        for a, b, cap in self.links:
            if a == b:
                raise TopologyError(f"self-loop at {a}")
            if a not in known or b not in known:
                raise TopologyError(f"link {a}-{b} references an unknown PoP")
            key = frozenset((a, b))
            if key in seen:
                raise TopologyError(f"duplicate link {a}-{b}")
            seen.add(key)
        for p in self.pops:
            if p.population < 0:
                raise TopologyError(f"negative population at {p.id}")
        comps = _components(ids, [(a, b) for a, b, _ in self.links])
        if len(comps) > 1:
            raise DisconnectedGraphError(comps)
        return self


def _components(nodes: Sequence, edges: Iterable[Tuple]) -> List[List]:
    adj: Dict = {n: [] for n in nodes}
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    seen = set()
    comps = []
    for n in nodes:
        if n in seen:
            continue
        comp = []
        stack = [n]
        seen.add(n)
        while stack:
            u = stack.pop()
            comp.append(u)
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        comps.append(sorted(comp))
    return comps


def parse_pop_graph(lines: Iterable[str], source="<string>") -> PopGraph:
    pops: List[Pop] = []
    links = []
    seen_links = set()
    ids = set()
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0]
        if kind == "pop":
            if len(parts) != 4:
                raise TopologyParseError(source, lineno, "expected: pop <id> <city> <population>")
            if links:
                raise TopologyParseError(source, lineno, "pop lines must precede link lines")
            try:
                population = int(parts[3])
            except ValueError:
                raise TopologyParseError(source, lineno, f"bad population {parts[3]!r}") from None
            if population < 0:
                raise TopologyParseError(source, lineno, "population must be >= 0")
            if parts[1] in ids:
                raise TopologyParseError(source, lineno, f"duplicate pop id {parts[1]!r}")
            ids.add(parts[1])
            pops.append(Pop(parts[1], parts[2], population))
        elif kind == "link":
            if len(parts) != 4:
                raise TopologyParseError(source, lineno, "expected: link <id_a> <id_b> <capacity_bps>")
            a, b = parts[1], parts[2]
            try:
                cap = float(parts[3])
            except ValueError:
                raise TopologyParseError(source, lineno, f"bad capacity {parts[3]!r}") from None
            if a not in ids or b not in ids:
                raise TopologyParseError(source, lineno, f"link {a}-{b} names an undeclared pop")
            if a == b:
                raise TopologyParseError(source, lineno, f"self-loop at {a}")
            key = frozenset((a, b))
            if key in seen_links:
                raise TopologyParseError(source, lineno, f"duplicate link {a}-{b}")
            seen_links.add(key)
            links.append((a, b, cap))
        else:
            raise TopologyParseError(source, lineno, f"unknown record type {kind!r}")
    if not pops:
        raise TopologyParseError(source, 0, "no pops declared")
    return PopGraph(pops, links).validate()


def load_pop_graph(path) -> PopGraph:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        return parse_pop_graph(fh, source=path)


def write_pop_graph(graph: PopGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p in graph.pops:
            fh.write(f"pop {p.id} {p.city} {p.population}\n")
        for a, b, cap in graph.links:
            fh.write(f"link {a} {b} {cap:.0f}\n")


def synth_pop_graph(n_pops: int, avg_degree: float, seed: int,
                    pareto_shape: float = 1.2, base_population: int = 100_000,
                    link_bps: float = CORE_LINK_BPS) -> PopGraph:
    """Random connected PoP graph: a random spanning tree plus random chords.

    City populations follow a Pareto law, the usual heavy tail of city sizes.
    """
    if n_pops < 2:
        raise TopologyError("need at least 2 PoPs")
    if avg_degree < 1:
        raise TopologyError("avg_degree must be >= 1")
    target = round(n_pops * avg_degree / 2)
    max_edges = n_pops * (n_pops - 1) // 2
    if target > max_edges:
        raise TopologyError(f"degree {avg_degree} needs {target} edges; only {max_edges} possible")
    target = max(target, n_pops - 1)
    rng = random.Random(seed)
    ids = [f"p{i}" for i in range(n_pops)]
    order = list(range(n_pops))
    rng.shuffle(order)
    edges = set()
    for i in range(1, n_pops):
        a, b = order[i], order[rng.randrange(i)]
        edges.add((min(a, b), max(a, b)))
    while len(edges) < target:
        a, b = rng.sample(range(n_pops), 2)
        edges.add((min(a, b), max(a, b)))
    pops = [Pop(ids[i], f"city{i}", int(base_population * rng.paretovariate(pareto_shape)))
            for i in range(n_pops)]
    links = [(ids[a], ids[b], link_bps) for a, b in sorted(edges)]
    return PopGraph(pops, links).validate()


@dataclass(frozen=True)
class AccessTreeSpec:
    depth: int = 3
    arity: int = 3

    def __post_init__(self):
        if self.depth < 1 or self.arity < 1:
            raise TopologyError("access trees need depth >= 1 and arity >= 1")

    @property
    def nodes_per_tree(self) -> int:
        return sum(self.arity ** i for i in range(1, self.depth + 1))

    @property
    def leaves_per_tree(self) -> int:
        return self.arity ** self.depth


ROLES = ("core", "edge", "leaf")


@dataclass
class NetworkModel:
    roles: List[str]
    adjacency: List[List[int]]
    pop_of: List[int]
    pops: List[Pop]
    link_bps: Dict[Tuple[int, int], float]
    profiles: Dict[str, RouterProfile] = field(
        default_factory=lambda: {"core": CORE_ROUTER, "edge": EDGE_ROUTER, "leaf": EDGE_ROUTER})
    origin_of: Optional[List[int]] = None
    _dist_cache: Dict[int, List[int]] = field(default_factory=dict, repr=False, compare=False)
    _path_cache: Dict[Tuple[int, int], Tuple[int, ...]] = field(
        default_factory=dict, repr=False, compare=False)

    @property
    def num_nodes(self) -> int:
        return len(self.roles)

    @property
    def core_nodes(self) -> List[int]:
        return [n for n, r in enumerate(self.roles) if r == "core"]

    @property
    def leaves(self) -> List[int]:
        return [n for n, r in enumerate(self.roles) if r == "leaf"]

    def leaves_of_pop(self, pop_index: int) -> List[int]:
        return [n for n, r in enumerate(self.roles) if r == "leaf" and self.pop_of[n] == pop_index]

    def routers(self) -> List[int]:
        return list(range(self.num_nodes))

    def profile(self, node: int) -> RouterProfile:
        return self.profiles[self.roles[node]]

    def is_border_hop(self, a: int, b: int) -> bool:
        """PoP-to-PoP hops stand in for AS-border crossings."""
        return self.roles[a] == "core" and self.roles[b] == "core"

    def distances_to(self, target: int) -> List[int]:
        """Hop distance from every node to ``target`` (BFS, cached)."""
        dist = self._dist_cache.get(target)
        if dist is None:
            dist = [-1] * self.num_nodes
            dist[target] = 0
            queue = deque([target])
            while queue:
                u = queue.popleft()
                for v in self.adjacency[u]:
                    if dist[v] < 0:
                        dist[v] = dist[u] + 1
                        queue.append(v)
            self._dist_cache[target] = dist
        return dist

    def hop_distance(self, a: int, b: int) -> int:
        d = self.distances_to(b)[a]
        if d < 0:
            raise UnreachableError(f"node {b} unreachable from {a}")
        return d

    def shortest_path(self, src: int, dst: int) -> Tuple[int, ...]:
        key = (src, dst)
        path = self._path_cache.get(key)
        if path is not None:
            return path
        for n in (src, dst):
            if not 0 <= n < self.num_nodes:
                raise KeyError(f"no node {n}")
        dist = self.distances_to(dst)
        if dist[src] < 0:
            raise UnreachableError(f"node {dst} unreachable from {src}")
        out = [src]
        u = src
        while u != dst:
            # adjacency lists are sorted, so the first closer neighbour is the smallest id
            u = next(v for v in self.adjacency[u] if dist[v] == dist[u] - 1)
            out.append(u)
        path = tuple(out)
        self._path_cache[key] = path
        return path

    def validate(self) -> "NetworkModel":
        n = self.num_nodes
        if len(self.adjacency) != n or len(self.pop_of) != n:
            raise TopologyError("node tables have inconsistent lengths")
        for r in self.roles:
            if r not in ROLES:
                raise TopologyError(f"unknown role {r!r}")
        for u, nbrs in enumerate(self.adjacency):
            if len(set(nbrs)) != len(nbrs) or u in nbrs:
                raise TopologyError(f"node {u} has duplicate or self adjacency")
            for v in nbrs:
                if u not in self.adjacency[v]:
                    raise TopologyError(f"asymmetric link {u}-{v}")
        cores = self.core_nodes
        if len(cores) != len(self.pops) or any(self.pop_of[c] != c for c in cores):
            raise TopologyError("expected exactly one core router per PoP, numbered first")
        for u in range(n):
            if self.roles[u] == "leaf":
                if len(self.adjacency[u]) != 1:
                    raise TopologyError(f"leaf {u} must have exactly one parent")
        dist = self.distances_to(cores[0])
        if any(d < 0 for d in dist):
            raise TopologyError("network is not connected")
        if self.origin_of is not None and any(self.roles[o] != "core" for o in self.origin_of):
            raise TopologyError("origins must sit at PoP routers")
        return self


def attach_access_trees(graph: PopGraph, spec: AccessTreeSpec = AccessTreeSpec(),
                        profiles: Optional[Mapping[str, RouterProfile]] = None) -> NetworkModel:
    graph.validate()
    index = {p.id: i for i, p in enumerate(graph.pops)}
    n_pops = len(graph.pops)
    roles = ["core"] * n_pops
    pop_of = list(range(n_pops))
    adjacency: List[List[int]] = [[] for _ in range(n_pops)]
    link_bps: Dict[Tuple[int, int], float] = {}

    def connect(a, b, bps):
        adjacency[a].append(b)
        adjacency[b].append(a)
        link_bps[(a, b)] = link_bps[(b, a)] = bps

    for a, b, cap in graph.links:
        connect(index[a], index[b], cap)

    for p in range(n_pops):
        level = [p]
        for depth in range(1, spec.depth + 1):
            role = "leaf" if depth == spec.depth else "edge"
            bps = LEAF_LINK_BPS if role == "leaf" else EDGE_LINK_BPS
            nxt = []
            for parent in level:
                for _ in range(spec.arity):
                    node = len(roles)
                    roles.append(role)
                    pop_of.append(p)
                    adjacency.append([])
                    connect(parent, node, bps)
                    nxt.append(node)
            level = nxt

    for nbrs in adjacency:
        nbrs.sort()
    model = NetworkModel(roles, adjacency, pop_of, list(graph.pops), link_bps)
    if profiles is not None:
        model.profiles = dict(profiles)
    return model.validate()


def assign_origins(model: NetworkModel, num_contents: int, seed: int) -> NetworkModel:
    """Give every content an origin server at a uniformly random PoP."""
    if num_contents < 1:
        raise ValueError("catalog must be non-empty")
    rng = random.Random(seed)
    cores = model.core_nodes
    origins = [cores[rng.randrange(len(cores))] for _ in range(num_contents)]
    # routing caches depend only on the graph, so the copy can share them
    return replace(model, origin_of=origins, _dist_cache=model._dist_cache,
                   _path_cache=model._path_cache)

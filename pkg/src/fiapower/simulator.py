"""Trace-driven energy accounting for one architecture and cache deployment.

A run has two stages.  :func:`run_traffic` replays the trace through the cache
network and counts, per node, the packets it transmits and the cache bytes it
reads and writes; this part does not depend on the architecture.  :func:`price`
turns those counts into joules for a given architecture.  :func:`simulate`
chains the two.
"""

from __future__ import annotations

import hashlib
import io
import json
import math
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np

from . import power_models as pm
from .cache_sim import CacheDeployment, check_strategy, place_caches, resolve_query
from .topology import NetworkModel
from .workload import QueryTrace


class SimulationConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# packets and headers


@dataclass(frozen=True)
class PacketizationSpec:
    payload_bytes: int = 1350
    query_bytes: int = 40

    def __post_init__(self):
        if self.payload_bytes <= 0 or self.query_bytes <= 0:
            raise SimulationConfigError("packet sizes must be positive")


def packetize(content_bytes: int, spec: PacketizationSpec = PacketizationSpec()) -> int:
    if content_bytes < 1:
        raise ValueError("content must be at least one byte")
    return -(-content_bytes // spec.payload_bytes)


@dataclass(frozen=True)
class HeaderModel:
    fixed_bytes: int
    per_hop_bytes: int = 0
    per_as_hop_bytes: int = 0

    def __post_init__(self):
        if min(self.fixed_bytes, self.per_hop_bytes, self.per_as_hop_bytes) < 0:
            raise SimulationConfigError("header sizes must be >= 0")


FORWARDING = {"IP": "RTL_TCAM", "NDN": "RTL_LPMBF", "NEBULA": "PCS", "SCION": "PCS"}
CACHING_MODES = {
    "IP": ("none", "edge_leaf_only"),
    "NDN": ("none", "pervasive_all_routers"),
    "NEBULA": ("none", "edge_leaf_only"),
    "SCION": ("none", "edge_leaf_only"),
}
DEFAULT_HEADERS = {
    "IP": HeaderModel(20),
    "NDN": HeaderModel(48),
    "SCION": HeaderModel(8, 0, 8),
    "NEBULA": HeaderModel(16, 0, 42),
}


@dataclass(frozen=True)
class ArchSpec:
    name: str
    header: HeaderModel
    forwarding: str = ""
    caching_modes: tuple = ()

    def __post_init__(self):
        if self.name not in FORWARDING:
            raise SimulationConfigError(f"unknown architecture {self.name!r}")
        object.__setattr__(self, "forwarding", self.forwarding or FORWARDING[self.name])
        object.__setattr__(self, "caching_modes", self.caching_modes or CACHING_MODES[self.name])
        if self.forwarding != FORWARDING[self.name]:
            raise SimulationConfigError(f"{self.name} forwards with {FORWARDING[self.name]}")
        if self.forwarding != "PCS" and (self.header.per_hop_bytes or self.header.per_as_hop_bytes):
            raise SimulationConfigError("table-lookup architectures carry no path state")

    @property
    def is_pcs(self) -> bool:
        return self.forwarding == "PCS"


def arch_spec(name: str, headers: Optional[Mapping[str, HeaderModel]] = None) -> ArchSpec:
    headers = headers or DEFAULT_HEADERS
    if name not in headers:
        raise SimulationConfigError(f"unknown architecture {name!r}")
    return ArchSpec(name, headers[name])


def header_bytes(arch: ArchSpec, router_hops: int, as_hops: int) -> int:
    if router_hops < 0 or as_hops < 0:
        raise ValueError("hop counts must be >= 0")
    h = arch.header
    return h.fixed_bytes + h.per_hop_bytes * router_hops + h.per_as_hop_bytes * as_hops


# ---------------------------------------------------------------------------
# energy parameters


@dataclass(frozen=True)
class EnergyParams:
    """Everything that prices traffic, other than the architecture itself."""
    forwarding: pm.ForwardingConfigs = field(default_factory=pm.ForwardingConfigs)
    card: pm.LineCard = field(default_factory=pm.LineCard)
    utilization: float = 0.5
    packets: PacketizationSpec = field(default_factory=PacketizationSpec)
    headers: Mapping[str, HeaderModel] = field(default_factory=lambda: dict(DEFAULT_HEADERS))
    # CDN appliances at the leaves
    edge_serve_energy_per_bit: float = pm.EDGE_CACHE_ENERGY_PER_BIT
    edge_fill_energy_per_bit: float = 0.0
    edge_storage_power_per_bit: float = 0.0
    # router content stores
    kv_scheme: pm.KvScheme = pm.SILT
    cs_index_tech: pm.StorageTech = pm.SRAM
    cs_storage_tech: pm.StorageTech = pm.DRAM
    cs_serve_energy_per_bit: float = 0.0
    cs_fill_energy_per_bit: float = 0.0
    # network-wide request rate, turns static watts into joules
    aggregate_rate: float = 1e4
    warmup_fraction: float = 0.2

    def __post_init__(self):
        if not 0 < self.utilization <= 1:
            raise SimulationConfigError("utilization must be in (0, 1]")
        if self.aggregate_rate <= 0:
            raise SimulationConfigError("aggregate_rate must be positive")
        if not 0 <= self.warmup_fraction < 1:
            raise SimulationConfigError("warmup_fraction must be in [0, 1)")


# ---------------------------------------------------------------------------
# traffic


@dataclass
class TrafficStats:
    """Architecture-independent per-node counters for the measured part of a run."""
    num_nodes: int
    queries: int
    warmup: int
    content_size: int
    response_packets: int  # per content
    deployment: CacheDeployment
    strategy: Optional[str]
    seed: int
    per_node_capacity: int
    caching_nodes: List[int]
    # per node, counts of packets it transmits
    query_pkts: np.ndarray
    resp_pkts: np.ndarray
    # per node, sum over transmitted packets of the path's router / AS hop counts
    hop_pkts: np.ndarray
    as_hop_pkts: np.ndarray
    # per node, packets it sends across a PoP-to-PoP link
    border_pkts: np.ndarray
    # per node cache traffic, bytes
    served_bytes: np.ndarray
    written_bytes: np.ndarray
    hits: int = 0
    local_hits: int = 0
    path_hops: int = 0  # summed over measured queries

    @property
    def hit_rate(self) -> float:
        return self.hits / self.queries if self.queries else 0.0


def _zeros(n):
    return np.zeros(n, dtype=np.int64)


def run_traffic(model: NetworkModel, trace: QueryTrace, deployment: CacheDeployment,
                strategy: Optional[str], params: EnergyParams = EnergyParams()) -> TrafficStats:
    """Replay ``trace`` in order, updating LRU state and counting traffic."""
    check_strategy(deployment, strategy)
    if model.origin_of is None:
        raise SimulationConfigError("assign content origins before simulating")
    if len(model.origin_of) < trace.catalog.num_contents:
        raise SimulationConfigError("model origins do not cover the catalog")
    roles = model.roles
    if len(trace) and any(roles[int(l)] != "leaf" for l in np.unique(trace.leaves)):
        raise SimulationConfigError("trace requests must enter at leaf nodes")

    size = trace.catalog.content_size
    n_resp = packetize(size, params.packets)
    caches = place_caches(model, deployment, trace.catalog)
    strat = strategy if caches.caches else None
    warm = int(math.floor(params.warmup_fraction * len(trace)))

    paths: Counter = Counter()
    served: Counter = Counter()
    written: Counter = Counter()
    hits = local_hits = 0
    for i, (leaf, content) in enumerate(trace.events()):
        d = resolve_query(strat, model, caches, leaf, content, size)
        if i < warm:
            continue
        paths[d.query_path] += 1
        if d.cache_hit:
            hits += 1
            served[d.serving_node] += 1
            if d.serving_node == leaf:
                local_hits += 1
        for node in d.inserted_at:
            written[node] += 1

    n = model.num_nodes
    q, r, hp, ap, bp = (_zeros(n) for _ in range(5))
    total_hops = 0
    for path, count in sorted(paths.items()):
        hops = len(path) - 1
        if hops == 0:
            # served by the requesting leaf's own cache: the response still
            # leaves that router once, towards the user
            r[path[0]] += count * n_resp
            continue
        total_hops += hops * count
        border = [model.is_border_hop(path[j], path[j + 1]) for j in range(hops)]
        as_hops = sum(border)
        for j in range(hops):
            # query goes path[j] -> path[j+1]; response comes back the other way
            qn, rn = path[j], path[j + 1]
            q[qn] += count
            r[rn] += count * n_resp
            hp[qn] += count * hops
            hp[rn] += count * n_resp * hops
            ap[qn] += count * as_hops
            ap[rn] += count * n_resp * as_hops
            if border[j]:
                bp[qn] += count
                bp[rn] += count * n_resp
    served_b, written_b = _zeros(n), _zeros(n)
    for node, count in served.items():
        served_b[node] = count * size
    for node, count in written.items():
        written_b[node] = count * size

    return TrafficStats(
        num_nodes=n, queries=len(trace) - warm, warmup=warm, content_size=size,
        response_packets=n_resp, deployment=deployment, strategy=strat, seed=trace.seed,
        per_node_capacity=deployment.per_node_capacity(model, trace.catalog),
        caching_nodes=sorted(caches.caches), query_pkts=q, resp_pkts=r, hop_pkts=hp,
        as_hop_pkts=ap, border_pkts=bp, served_bytes=served_b, written_bytes=written_b,
        hits=hits, local_hits=local_hits, path_hops=total_hops)


def transmitted_bits(stats: TrafficStats, arch: ArchSpec,
                     packets: PacketizationSpec = PacketizationSpec()) -> np.ndarray:
    h = arch.header
    pkts = stats.query_pkts + stats.resp_pkts
    return 8 * (stats.query_pkts * packets.query_bytes
                + stats.resp_pkts * packets.payload_bytes
                + pkts * h.fixed_bytes
                + stats.hop_pkts * h.per_hop_bytes
                + stats.as_hop_pkts * h.per_as_hop_bytes)


# ---------------------------------------------------------------------------
# pricing

COMPONENTS = ("baseline_J", "forwarding_J", "cache_J", "transmission_J")


@dataclass
class EnergyReport:
    arch: str
    deployment: CacheDeployment
    strategy: Optional[str]
    per_node: Dict[str, np.ndarray]
    bits: np.ndarray
    packets: np.ndarray
    hit_rate: float
    duration_s: float
    seed: int
    config_hash: str = ""

    @property
    def totals(self) -> Dict[str, float]:
        return {k: float(v.sum()) for k, v in self.per_node.items()}

    @property
    def total(self) -> float:
        return float(sum(v.sum() for v in self.per_node.values()))

    def to_dict(self) -> dict:
        return {
            "arch": self.arch,
            "deployment": asdict(self.deployment),
            "strategy": self.strategy,
            "metadata": {"duration_s": self.duration_s, "seed": self.seed,
                         "config_hash": self.config_hash},
            "totals": {**self.totals, "total_J": self.total},
            "traffic": {"hit_rate": self.hit_rate, "bits": int(self.bits.sum()),
                        "packets": int(self.packets.sum())},
            "per_node": [
                {"node": i, **{k: float(self.per_node[k][i]) for k in COMPONENTS},
                 "bits": int(self.bits[i]), "packets": int(self.packets[i])}
                for i in range(len(self.bits))
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)


def price(model: NetworkModel, stats: TrafficStats, arch: ArchSpec,
          params: EnergyParams = EnergyParams()) -> EnergyReport:
    """Convert a run's traffic counters into per-node energy for ``arch``."""
    if stats.deployment.placement not in arch.caching_modes:
        raise SimulationConfigError(
            f"{arch.name} does not support {stats.deployment.placement} caching")
    n = stats.num_nodes
    u = params.utilization
    bits = transmitted_bits(stats, arch, params.packets).astype(float)
    pkts = (stats.query_pkts + stats.resp_pkts).astype(float)

    idle_per_bit = np.empty(n)
    load_per_bit = np.empty(n)
    for node in range(n):
        prof = model.profile(node)
        carried = u * prof.max_throughput
        idle_per_bit[node] = prof.idle_power / carried
        load_per_bit[node] = (pm.baseline_power(prof, carried) - prof.idle_power) / carried
    baseline = bits * idle_per_bit
    transmission = bits * load_per_bit

    e_pkt = pm.fwd_energy_per_packet(arch.name, params.forwarding, params.card, u)
    if arch.is_pcs:
        forwarding = stats.border_pkts * e_pkt
    else:
        forwarding = pkts * e_pkt

    duration = stats.queries / params.aggregate_rate
    cache = np.zeros(n)
    caching = stats.caching_nodes
    cap_bits = 8.0 * stats.per_node_capacity
    placement = stats.deployment.placement
    if placement == "edge_leaf_only":
        cache += 8.0 * stats.served_bytes * params.edge_serve_energy_per_bit
        cache += 8.0 * stats.written_bytes * params.edge_fill_energy_per_bit
        if caching:
            cache[caching] += cap_bits * params.edge_storage_power_per_bit * duration
    elif placement == "pervasive_all_routers":
        cache += 8.0 * stats.served_bytes * params.cs_serve_energy_per_bit
        cache += 8.0 * stats.written_bytes * params.cs_fill_energy_per_bit
        if caching:
            hw = pm.CacheHardware(params.cs_index_tech, params.cs_storage_tech,
                                  cap_bits, stats.content_size)
            cache[caching] += pm.cache_power(params.kv_scheme, hw) * duration

    return EnergyReport(
        arch=arch.name, deployment=stats.deployment, strategy=stats.strategy,
        per_node={"baseline_J": baseline, "forwarding_J": np.asarray(forwarding, float),
                  "cache_J": cache, "transmission_J": transmission},
        bits=bits, packets=pkts, hit_rate=stats.hit_rate, duration_s=duration,
        seed=stats.seed)


def simulate(model: NetworkModel, trace: QueryTrace, arch, deployment: CacheDeployment,
             strategy: Optional[str] = None, params: EnergyParams = EnergyParams()) -> EnergyReport:
    if isinstance(arch, str):
        arch = arch_spec(arch, params.headers)
    if deployment.placement not in arch.caching_modes:
        raise SimulationConfigError(f"{arch.name} does not support {deployment.placement} caching")
    stats = run_traffic(model, trace, deployment, strategy, params)
    return price(model, stats, arch, params)


def closed_form_bits(model: NetworkModel, trace: QueryTrace, arch: ArchSpec,
                     params: EnergyParams = EnergyParams()) -> int:
    """Bits a cache-free run must transmit, computed straight from the paths."""
    pk = params.packets
    n_resp = packetize(trace.catalog.content_size, pk)
    warm = int(math.floor(params.warmup_fraction * len(trace)))
    total = 0
    for leaf, content in list(trace.events())[warm:]:
        path = model.shortest_path(leaf, model.origin_of[content])
        hops = len(path) - 1
        as_hops = sum(model.is_border_hop(a, b) for a, b in zip(path, path[1:]))
        hdr = header_bytes(arch, hops, as_hops)
        total += 8 * ((pk.query_bytes + hdr) + n_resp * (pk.payload_bytes + hdr)) * hops
    return total


def normalize(reports: Mapping[str, EnergyReport], baseline: EnergyReport) -> Dict[str, float]:
    base = baseline.total
    if base <= 0:
        raise ZeroDivisionError("baseline report has zero energy")
    return {k: r.total / base for k, r in reports.items()}


def config_hash(obj) -> str:
    text = json.dumps(obj, sort_keys=True, default=str)
    return hashlib.sha256(text.encode()).hexdigest()[:16]

"""Closed-form router power models.

Every router is modelled as ``P = P_base + P_fwd + P_cc``: a load-dependent
baseline shared by all architectures, a forwarding-decision term that depends
on how the architecture picks an output port (TCAM lookup, Bloom-filter
longest-prefix match, or verification of packet-carried state), and a
content-cache term.  All quantities are SI: watts, joules, bits, seconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional

UNLIMITED = math.inf


class ConfigurationError(ValueError):
    """A hardware configuration violates a physical limit."""


class OverCapacityError(ValueError):
    """Offered load exceeds what a router can carry."""


# ---------------------------------------------------------------------------
# storage technologies


@dataclass(frozen=True)
class StorageTech:
    name: str
    power_per_bit: float  # W/bit, static
    max_capacity: float  # bits
    max_rate: Optional[float]  # accesses/s; None when the datasheet gives none

    def __post_init__(self):
        if self.power_per_bit <= 0 or self.max_capacity <= 0:
            raise ConfigurationError(f"{self.name}: power and capacity must be positive")
        if self.max_rate is not None and self.max_rate <= 0:
            raise ConfigurationError(f"{self.name}: max_rate must be positive")

    def rate_limit(self) -> float:
        """Maximum access rate, raising if the technology has no known rate."""
        if self.max_rate is None:
            raise ConfigurationError(f"{self.name} has no specified access rate")
        return self.max_rate


MBIT = 1e6
GB_BITS = 8e9
TB_BITS = 8e12

TCAM = StorageTech("TCAM", 3e-6, 32 * MBIT, 360e6)
SRAM = StorageTech("SRAM", 40e-9, 200 * MBIT, 633e6)
DRAM = StorageTech("DRAM", 250e-12, 64 * GB_BITS, 1333e6)
FLASH = StorageTech("Flash", 0.3e-12, 2 * TB_BITS, None)

STORAGE_TECHS: Dict[str, StorageTech] = {t.name: t for t in (TCAM, SRAM, DRAM, FLASH)}


# ---------------------------------------------------------------------------
# baseline


@dataclass(frozen=True)
class RouterProfile:
    role: str
    nameplate_power: float  # W
    idle_power: float  # W
    max_throughput: float  # bit/s

    def __post_init__(self):
        if not 0 <= self.idle_power <= self.nameplate_power:
            raise ConfigurationError("need 0 <= idle_power <= nameplate_power")
        if self.max_throughput <= 0:
            raise ConfigurationError("max_throughput must be positive")


DEFAULT_IDLE_FRACTION = 0.75


def make_profile(role: str, nameplate: float, max_throughput: float,
                 idle_fraction: float = DEFAULT_IDLE_FRACTION) -> RouterProfile:
    return RouterProfile(role, nameplate, idle_fraction * nameplate, max_throughput)


# Cisco CRS-1 and ARS-1013 nameplates.
CORE_ROUTER = make_profile("core", 16.8e3, 6.40e12)
EDGE_ROUTER = make_profile("edge", 4.0e3, 0.28e12)


def baseline_power(profile: RouterProfile, throughput: float) -> float:
    """Idle power plus the utilisation-weighted share of the dynamic range."""
    if throughput < 0:
        raise ValueError("throughput must be non-negative")
    if throughput > profile.max_throughput:
        raise OverCapacityError(
            f"throughput {throughput:g} b/s exceeds {profile.role} capacity "
            f"{profile.max_throughput:g} b/s")
    util = throughput / profile.max_throughput
    return profile.idle_power + util * (profile.nameplate_power - profile.idle_power)


# ---------------------------------------------------------------------------
# forwarding: TCAM


@dataclass(frozen=True)
class TcamConfig:
    entry_bits: int = 64
    num_entries: int = 500_000
    tech: StorageTech = TCAM

    def __post_init__(self):
        if self.entry_bits * self.num_entries > self.tech.max_capacity:
            raise ConfigurationError(
                f"TCAM table of {self.entry_bits * self.num_entries:g} bits exceeds "
                f"{self.tech.max_capacity:g}-bit part")


def tcam_power(cfg: TcamConfig) -> float:
    # static: a TCAM searches every entry on every lookup, so the whole
    # array is powered regardless of lookup rate
    return cfg.entry_bits * cfg.num_entries * cfg.tech.power_per_bit


# ---------------------------------------------------------------------------
# forwarding: LPM with Bloom filters


def bloom_params(sram_bits: float, num_prefixes: float):
    """Optimal hash count ``k`` and false-positive rate ``f`` for a Bloom filter.

    ``k`` is left real-valued, as in the closed form.
    """
    if num_prefixes <= 0:
        raise ZeroDivisionError("Bloom filter needs at least one prefix")
    k = (sram_bits / num_prefixes) * math.log(2)
    f = 0.5 ** k
    return k, f


@dataclass(frozen=True)
class LpmBfConfig:
    num_filters: int = 32
    sram_bits: float = 200 * MBIT
    num_prefixes: int = 20_000_000
    fib_entry_bits: int = 320
    load_factor: float = 0.8
    hash_energy: float = 50e-9  # J/hash; 1 J per 20 MHash
    sram: StorageTech = SRAM
    dram: StorageTech = DRAM
    dram_access_fraction: float = 0.46

    def __post_init__(self):
        if not 0 < self.load_factor <= 1:
            raise ConfigurationError("load_factor must be in (0, 1]")
        if not 0 <= self.dram_access_fraction <= 1:
            raise ConfigurationError("dram_access_fraction must be in [0, 1]")
        if self.sram_bits > self.sram.max_capacity:
            raise ConfigurationError(
                f"{self.sram_bits:g} bits of Bloom filters exceed the "
                f"{self.sram.max_capacity:g}-bit SRAM")
        if self.fib_dram_bits > self.dram.max_capacity:
            raise ConfigurationError(
                f"FIB hash table of {self.fib_dram_bits:g} bits exceeds DRAM capacity")

    @property
    def fib_dram_bits(self) -> float:
        return self.fib_entry_bits * self.num_prefixes / self.load_factor


def lpmbf_compute_power(cfg: LpmBfConfig, lookup_rate: float) -> float:
    """Hashing power: ``B*k`` filter probes, ``B*f`` false-positive probes and
    one hash into the DRAM table per lookup."""
    if lookup_rate < 0:
        raise ValueError("lookup_rate must be non-negative")
    k, f = bloom_params(cfg.sram_bits, cfg.num_prefixes)
    hashes = cfg.num_filters * k + cfg.num_filters * f + 1
    return hashes * lookup_rate * cfg.hash_energy


def lpmbf_storage_power(cfg: LpmBfConfig, lookup_rate: float) -> float:
    if lookup_rate < 0:
        raise ValueError("lookup_rate must be non-negative")
    _, f = bloom_params(cfg.sram_bits, cfg.num_prefixes)
    dram_bits = cfg.fib_dram_bits
    e_dram = cfg.dram.power_per_bit
    alpha = cfg.dram_access_fraction
    sram = cfg.sram_bits * cfg.sram.power_per_bit
    access = lookup_rate * (cfg.num_filters * f + 1) / cfg.dram.rate_limit()
    dram_dynamic = access * alpha * dram_bits * e_dram
    dram_background = (1 - alpha) * dram_bits * e_dram
    return sram + dram_dynamic + dram_background


def lpmbf_power(cfg: LpmBfConfig, lookup_rate: float) -> float:
    return lpmbf_compute_power(cfg, lookup_rate) + lpmbf_storage_power(cfg, lookup_rate)


# ---------------------------------------------------------------------------
# forwarding: packet-carried state


@dataclass(frozen=True)
class PcsConfig:
    scheme: str = "SCION"
    avg_as_path_len: float = 4.4
    aes_energy: float = 250e-9
    hash_energy: float = 50e-9

    def __post_init__(self):
        if self.scheme not in ("NEBULA", "SCION"):
            raise ConfigurationError(f"unknown PCS scheme {self.scheme!r}")
        if self.avg_as_path_len < 0:
            raise ConfigurationError("avg_as_path_len must be >= 0")
        if self.aes_energy <= 0 or self.hash_energy <= 0:
            raise ConfigurationError("energies must be positive")


def pcs_verif_energy(cfg: PcsConfig) -> float:
    """Energy a border router spends verifying one packet's path state."""
    if cfg.scheme == "SCION":
        # one MAC over the router's own hop field
        return cfg.aes_energy
    l = cfg.avg_as_path_len
    return cfg.hash_energy + (l * l + l + 2) * cfg.aes_energy


# ---------------------------------------------------------------------------
# architectures

ARCHITECTURES = ("IP", "NDN", "NEBULA", "SCION")
RTL_ARCHS = ("IP", "NDN")
PCS_ARCHS = ("NEBULA", "SCION")


@dataclass(frozen=True)
class ForwardingConfigs:
    """Forwarding hardware of every architecture, in one bundle."""
    tcam: TcamConfig = field(default_factory=TcamConfig)
    lpmbf: LpmBfConfig = field(default_factory=LpmBfConfig)
    nebula: PcsConfig = field(default_factory=lambda: PcsConfig("NEBULA"))
    scion: PcsConfig = field(default_factory=lambda: PcsConfig("SCION"))


def fwd_power(arch: str, rate: float, configs: Optional[ForwardingConfigs] = None) -> float:
    """Forwarding-decision power of one line card processing ``rate`` packets/s."""
    if rate < 0:
        raise ValueError("rate must be non-negative")
    configs = configs or ForwardingConfigs()
    if arch == "IP":
        return tcam_power(configs.tcam)
    if arch == "NDN":
        return lpmbf_power(configs.lpmbf, rate)
    if arch == "NEBULA":
        return rate * pcs_verif_energy(configs.nebula)
    if arch == "SCION":
        return rate * pcs_verif_energy(configs.scion)
    raise ValueError(f"unknown architecture {arch!r}")


def packet_rate(link_bps: float, packet_bytes: float = 1350) -> float:
    return link_bps / (packet_bytes * 8)


# ---------------------------------------------------------------------------
# content caches


@dataclass(frozen=True)
class KvScheme:
    name: str
    index_bytes_per_object: float
    read_amp: float
    write_amp: float

    def __post_init__(self):
        if self.index_bytes_per_object <= 0:
            raise ConfigurationError("index size must be positive")
        if self.read_amp < 1 or self.write_amp < 1:
            raise ConfigurationError("amplification factors must be >= 1")


SILT = KvScheme("SILT", 1.0, 1.01, 4.0)
HC_SETMEM = KvScheme("HC-SetMem", 11 / 8, 1.0, 1.0)
HC_LOGLRU = KvScheme("HC-LogLRU", 31 / 8, 1.0, 1.0)  # midpoint of 15/8 .. 47/8

KV_SCHEMES: Dict[str, KvScheme] = {s.name: s for s in (SILT, HC_SETMEM, HC_LOGLRU)}


@dataclass(frozen=True)
class CacheHardware:
    index_tech: StorageTech = SRAM
    storage_tech: StorageTech = DRAM
    storage_capacity: float = TB_BITS  # bits
    object_size: float = 1e6  # bytes

    def __post_init__(self):
        if self.object_size <= 0:
            raise ConfigurationError("object_size must be positive")
        if self.storage_capacity < 0:
            raise ConfigurationError("storage_capacity must be >= 0")


@dataclass(frozen=True)
class CacheWorkload:
    arrival_rate: float  # packets/s
    query_fraction: float = 0.5
    hit_rate: float = 0.1
    write_prob: float = 0.01

    def __post_init__(self):
        if self.arrival_rate < 0:
            raise ValueError("arrival_rate must be >= 0")
        for name in ("query_fraction", "hit_rate", "write_prob"):
            if not 0 <= getattr(self, name) <= 1:
                raise ValueError(f"{name} must be in [0, 1]")


def index_bits(scheme: KvScheme, hw: CacheHardware) -> float:
    objects = (hw.storage_capacity / 8) / hw.object_size
    return 8 * scheme.index_bytes_per_object * objects


def cache_power(scheme: KvScheme, hw: CacheHardware, strict: bool = False) -> float:
    """Static power of a two-layer key-value content store.

    Media capacities are per part; a store bigger than one part is assumed to
    gang several.  With ``strict=True`` any capacity violation reported by
    :func:`kv_feasibility` raises instead.
    """
    idx = index_bits(scheme, hw)
    if strict:
        problems = kv_feasibility(scheme, hw, CacheWorkload(0.0)).violations
        if problems:
            raise ConfigurationError(f"{scheme.name}: " + "; ".join(problems))
    return hw.storage_tech.power_per_bit * hw.storage_capacity + hw.index_tech.power_per_bit * idx


@dataclass(frozen=True)
class Feasibility:
    feasible: bool
    violations: List[str]


def storage_transaction_rate(scheme: KvScheme, wl: CacheWorkload) -> float:
    per_packet = (wl.query_fraction * wl.hit_rate * scheme.read_amp
                  + (1 - wl.query_fraction) * wl.write_prob * scheme.write_amp)
    return wl.arrival_rate * per_packet


def kv_feasibility(scheme: KvScheme, hw: CacheHardware, wl: CacheWorkload) -> Feasibility:
    """Check every capacity and transaction-rate limit; report all that fail."""
    violations = []
    idx = index_bits(scheme, hw)
    if idx > hw.index_tech.max_capacity:
        violations.append(f"index capacity: {idx:g} > {hw.index_tech.max_capacity:g} bits")
    if hw.storage_capacity > hw.storage_tech.max_capacity:
        violations.append(
            f"storage capacity: {hw.storage_capacity:g} > {hw.storage_tech.max_capacity:g} bits")
    if wl.arrival_rate > 0:
        if hw.index_tech.max_rate is None:
            violations.append(f"index rate: {hw.index_tech.name} has no rated access rate")
        elif wl.arrival_rate > hw.index_tech.max_rate:
            violations.append(f"index rate: {wl.arrival_rate:g} > {hw.index_tech.max_rate:g}/s")
        storage_rate = storage_transaction_rate(scheme, wl)
        if storage_rate > 0:
            if hw.storage_tech.max_rate is None:
                violations.append(
                    f"storage rate: {hw.storage_tech.name} has no rated access rate")
            elif storage_rate > hw.storage_tech.max_rate:
                violations.append(
                    f"storage rate: {storage_rate:g} > {hw.storage_tech.max_rate:g}/s")
    return Feasibility(not violations, violations)


def max_storage_capacity(scheme: KvScheme, hw: CacheHardware) -> float:
    """Largest storage layer (bits) that both the index and storage media can hold."""
    by_index = hw.index_tech.max_capacity * hw.object_size / scheme.index_bytes_per_object
    return min(by_index, hw.storage_tech.max_capacity)


def max_arrival_rate(scheme: KvScheme, hw: CacheHardware, wl: CacheWorkload) -> float:
    """Largest packet arrival rate the store sustains under ``wl``'s mix."""
    limits = [hw.index_tech.max_rate if hw.index_tech.max_rate is not None else UNLIMITED]
    unit = storage_transaction_rate(scheme, replace(wl, arrival_rate=1.0))
    if unit > 0:
        storage = hw.storage_tech.max_rate
        limits.append(storage / unit if storage is not None else UNLIMITED)
    return min(limits)


# ---------------------------------------------------------------------------
# edge caches (CDN appliances)

# 600 W appliance serving 10 Gb/s
EDGE_CACHE_ENERGY_PER_BIT = 600.0 / 10e9


def edge_cache_energy_per_bit(appliance_power: float = 600.0,
                              appliance_throughput: float = 10e9) -> float:
    return appliance_power / appliance_throughput


# ---------------------------------------------------------------------------
# per-bit router energy


@dataclass(frozen=True)
class RouterEnergy:
    base: float
    fwd: float
    cache: float

    @property
    def total(self) -> float:
        return self.base + self.fwd + self.cache


@dataclass(frozen=True)
class LineCard:
    """Reference line card used to turn forwarding power into per-bit energy."""
    link_bps: float = 40e9
    packet_bytes: float = 1350


def fwd_energy_per_packet(arch: str, configs: Optional[ForwardingConfigs] = None,
                          card: LineCard = LineCard(), utilization: float = 1.0) -> float:
    """Forwarding energy attributed to one packet on a card running at ``utilization``."""
    if not 0 < utilization <= 1:
        raise ValueError("utilization must be in (0, 1]")
    rate = utilization * packet_rate(card.link_bps, card.packet_bytes)
    return fwd_power(arch, rate, configs) / rate


def energy_per_bit(arch: str, profile: RouterProfile, utilization: float,
                   configs: Optional[ForwardingConfigs] = None,
                   cache: Optional[tuple] = None,
                   card: LineCard = LineCard(),
                   forwards: bool = True) -> RouterEnergy:
    """Joules per forwarded bit, split into baseline, forwarding and caching.

    Forwarding power is per line card; the router carries
    ``max_throughput / card.link_bps`` cards, all at ``utilization``.
    ``cache`` is an optional ``(KvScheme, CacheHardware)`` pair.  Routers with
    ``forwards=False`` make no forwarding decisions (PCS interior routers).
    """
    if not 0 < utilization <= 1:
        raise ValueError("utilization must be in (0, 1]")
    carried = utilization * profile.max_throughput
    base = baseline_power(profile, carried) / carried
    fwd = 0.0
    if forwards:
        n_cards = profile.max_throughput / card.link_bps
        card_rate = utilization * packet_rate(card.link_bps, card.packet_bytes)
        fwd = n_cards * fwd_power(arch, card_rate, configs) / carried
    cc = cache_power(*cache) / carried if cache is not None else 0.0
    return RouterEnergy(base, fwd, cc)

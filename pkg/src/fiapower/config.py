"""YAML experiment configuration with documented defaults.

Every key is optional; missing keys take the defaults below.  Unknown keys are
rejected so typos do not pass silently.

.. code-block:: yaml

    seed: 1
    topology:
      pop_file: null        # PoP map in the text format of topology.load_pop_graph
      n_pops: 25            # synthetic map when pop_file is null
      avg_degree: 3.0
      tree_depth: 3
      tree_arity: 3
    workload:
      num_contents: 100000
      content_size: 1000000  # bytes
      zipf_alpha: 0.99
      n_queries: 500000
    energy:
      utilization: 0.5
      aggregate_rate: 10000.0  # queries/s network-wide
      warmup_fraction: 0.2
      payload_bytes: 1350
      query_bytes: 40
      edge_serve_energy_per_bit: 6.0e-8
      kv_scheme: SILT
    sweeps:
      cache_budget: 0.05
      budget_ratios: [0.0, 0.05, 0.1, 0.25, 0.5, 0.76, 1.0]
      zipf_alphas: [0.6, 0.8, 0.99, 1.1, 1.3, 1.5]
    forwarding:
      link_gbps: [1, 2, 4, 5, 10, 20, 40]
      ndn_fib_sizes: [500000, 5000000, 50000000]
    routers:
      core_cache_gb: 1000
      edge_cache_gb: 256
"""

from __future__ import annotations

import copy
from pathlib import Path
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import yaml

from . import power_models as pm

DEFAULTS: Dict[str, Any] = {
    "seed": 1,
    "topology": {"pop_file": None, "n_pops": 25, "avg_degree": 3.0,
                 "tree_depth": 3, "tree_arity": 3},
    "workload": {"num_contents": 100_000, "content_size": 1_000_000,
                 "zipf_alpha": 0.99, "n_queries": 500_000},
    "energy": {"utilization": 0.5, "aggregate_rate": 1e4, "warmup_fraction": 0.2,
               "payload_bytes": 1350, "query_bytes": 40,
               "edge_serve_energy_per_bit": pm.EDGE_CACHE_ENERGY_PER_BIT,
               "kv_scheme": "SILT"},
    "sweeps": {"cache_budget": 0.05,
               "budget_ratios": [0.0, 0.05, 0.1, 0.25, 0.5, 0.76, 1.0],
               "zipf_alphas": [0.6, 0.8, 0.99, 1.1, 1.3, 1.5]},
    "forwarding": {"link_gbps": [1, 2, 4, 5, 10, 20, 40],
                   "ndn_fib_sizes": [500_000, 5_000_000, 50_000_000]},
    "routers": {"core_cache_gb": 1000, "edge_cache_gb": 256},
}

KV_BY_NAME = pm.KV_SCHEMES


class ConfigError(ValueError):
    pass


@dataclass
class Config:
    data: Dict[str, Any] = field(default_factory=lambda: copy.deepcopy(DEFAULTS))

    def __getitem__(self, key):
        return self.data[key]

    @property
    def seed(self) -> int:
        return self.data["seed"]

    def with_seed(self, seed: Optional[int]) -> "Config":
        if seed is None:
            return self
        data = copy.deepcopy(self.data)
        data["seed"] = seed
        return Config(validate(data))

    def with_overrides(self, **sections) -> "Config":
        return Config(validate(merge(self.data, sections)))


def merge(base: Dict[str, Any], override: Dict[str, Any], where: str = "") -> Dict[str, Any]:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if key not in base:
            raise ConfigError(f"unknown config key {where + key!r}")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"{where + key!r} must be a mapping")
            out[key] = merge(base[key], value, where + key + ".")
        else:
            out[key] = value
    return out


def _positive(d, key, where, kind=float, allow_zero=False):
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}.{key} must be a number, got {v!r}")
    if kind is int and int(v) != v:
        raise ConfigError(f"{where}.{key} must be an integer")
    if v < 0 or (v == 0 and not allow_zero):
        raise ConfigError(f"{where}.{key} must be {'>= 0' if allow_zero else '> 0'}")
    d[key] = kind(v)


def validate(data: Dict[str, Any]) -> Dict[str, Any]:
    if not isinstance(data["seed"], int) or isinstance(data["seed"], bool):
        raise ConfigError("seed must be an integer")
    t = data["topology"]
    for k in ("n_pops", "tree_depth", "tree_arity"):
        _positive(t, k, "topology", int, allow_zero=k == "tree_depth")
    _positive(t, "avg_degree", "topology")
    w = data["workload"]
    _positive(w, "num_contents", "workload", int)
    _positive(w, "content_size", "workload", int)
    _positive(w, "n_queries", "workload", int, allow_zero=True)
    _positive(w, "zipf_alpha", "workload", allow_zero=True)
    e = data["energy"]
    for k in ("utilization", "aggregate_rate", "payload_bytes", "query_bytes"):
        _positive(e, k, "energy", int if k.endswith("bytes") else float)
    _positive(e, "warmup_fraction", "energy", allow_zero=True)
    _positive(e, "edge_serve_energy_per_bit", "energy", allow_zero=True)
    if not e["utilization"] <= 1:
        raise ConfigError("energy.utilization must be in (0, 1]")
    if not e["warmup_fraction"] < 1:
        raise ConfigError("energy.warmup_fraction must be in [0, 1)")
    if e["kv_scheme"] not in KV_BY_NAME:
        raise ConfigError(f"energy.kv_scheme must be one of {sorted(KV_BY_NAME)}")
    s = data["sweeps"]
    _positive(s, "cache_budget", "sweeps", allow_zero=True)
    for key in ("budget_ratios", "zipf_alphas"):
        if not isinstance(s[key], list) or not s[key]:
            raise ConfigError(f"sweeps.{key} must be a non-empty list")
        s[key] = [float(x) for x in s[key]]
    if not all(0 <= c <= 1 for c in s["budget_ratios"] + [s["cache_budget"]]):
        raise ConfigError("cache budget ratios must be in [0, 1]")
    if any(a < 0 for a in s["zipf_alphas"]):
        raise ConfigError("Zipf exponents must be >= 0")
    f = data["forwarding"]
    for key in ("link_gbps", "ndn_fib_sizes"):
        vals = f[key]
        if (not isinstance(vals, list) or not vals
                or any(isinstance(x, bool) or not isinstance(x, (int, float)) or x <= 0
                       for x in vals)):
            raise ConfigError(f"forwarding.{key} must be a list of positive numbers")
    pop_file = t["pop_file"]
    if pop_file is not None and not Path(pop_file).is_file():
        raise ConfigError(f"topology.pop_file {pop_file!r} does not exist")
    r = data["routers"]
    _positive(r, "core_cache_gb", "routers", allow_zero=True)
    _positive(r, "edge_cache_gb", "routers", allow_zero=True)
    return data


def load_config(path=None) -> Config:
    """Read a YAML config; ``None`` gives the defaults."""
    if path is None:
        return Config(validate(copy.deepcopy(DEFAULTS)))
    try:
        with open(path, encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from None
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    data = merge(DEFAULTS, raw)
    pop_file = data["topology"]["pop_file"]
    if pop_file is not None:
        # relative map paths are read from the config's own directory
        data["topology"]["pop_file"] = str(Path(path).parent / pop_file)
    return Config(validate(data))


def dump_config(cfg: Config) -> str:
    return yaml.safe_dump(cfg.data, sort_keys=True)

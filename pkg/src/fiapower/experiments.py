"""Named experiments: forwarding power, per-bit router energy, and the
trace-driven caching comparisons and sweeps.

Each experiment returns an :class:`ExperimentResult` holding CSV tables.
:func:`write_result` writes them with a config echo and a manifest.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from functools import lru_cache
from multiprocessing import get_context
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from . import power_models as pm
from .cache_sim import CacheDeployment
from .config import KV_BY_NAME, Config, dump_config
from .simulator import (EnergyParams, PacketizationSpec, TrafficStats, arch_spec,
                        config_hash, price, run_traffic)
from .topology import (AccessTreeSpec, NetworkModel, assign_origins, attach_access_trees,
                       load_pop_graph, synth_pop_graph)
from .workload import Catalog, ZipfSpec, generate_trace

EXPERIMENTS = ("fig3", "fig6", "fig8", "fig9", "sweep_budget", "sweep_zipf", "sweep_discovery")

SUMMARY_COLUMNS = ("arch", "deployment", "strategy", "c", "alpha", "total_J", "base_J",
                   "fwd_J", "cache_J", "tx_J", "hit_rate", "normalized")

# which cache each architecture uses when caching is on
CACHING_PLACEMENT = {"IP": "edge_leaf_only", "NEBULA": "edge_leaf_only",
                     "SCION": "edge_leaf_only", "NDN": "pervasive_all_routers"}
DEFAULT_STRATEGY = {"edge_leaf_only": "simple_edge", "pervasive_all_routers": "on_path"}


@dataclass
class Table:
    name: str
    columns: Tuple[str, ...]
    rows: List[dict]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=self.columns, lineterminator="\n")
        w.writeheader()
        for row in self.rows:
            w.writerow({k: _fmt(row[k]) for k in self.columns})
        return buf.getvalue()


def _fmt(v):
    if isinstance(v, float):
        return repr(round(v, 12)) if math.isfinite(v) else str(v)
    return "" if v is None else v


@dataclass
class SweepResult:
    """One swept axis; ``series`` and ``raw`` map a series label to values along it."""
    axis: str
    values: List[float]
    series: Dict[str, List[float]]
    raw: Dict[str, List[float]]

    def __post_init__(self):
        for label, ys in list(self.series.items()) + list(self.raw.items()):
            if len(ys) != len(self.values):
                raise ValueError(f"series {label} has {len(ys)} points for {len(self.values)} axis values")


@dataclass
class ExperimentResult:
    experiment: str
    tables: List[Table]
    sweep: Optional[SweepResult] = None
    config_hash: str = ""

    def table(self, name: str) -> Table:
        for t in self.tables:
            if t.name == name:
                return t
        raise KeyError(name)

    @property
    def summary(self) -> Table:
        return self.tables[0]


# ---------------------------------------------------------------------------
# building the simulated network


def energy_params(cfg: Config) -> EnergyParams:
    e = cfg["energy"]
    return EnergyParams(
        utilization=e["utilization"],
        packets=PacketizationSpec(e["payload_bytes"], e["query_bytes"]),
        edge_serve_energy_per_bit=e["edge_serve_energy_per_bit"],
        kv_scheme=KV_BY_NAME[e["kv_scheme"]],
        aggregate_rate=e["aggregate_rate"],
        warmup_fraction=e["warmup_fraction"])


def catalog(cfg: Config) -> Catalog:
    w = cfg["workload"]
    return Catalog(w["num_contents"], w["content_size"])


def build_model(cfg: Config) -> NetworkModel:
    t = cfg["topology"]
    if t["pop_file"]:
        graph = load_pop_graph(t["pop_file"])
    else:
        graph = synth_pop_graph(t["n_pops"], t["avg_degree"], cfg.seed)
    model = attach_access_trees(graph, AccessTreeSpec(t["tree_depth"], t["tree_arity"]))
    return assign_origins(model, cfg["workload"]["num_contents"], cfg.seed)


@lru_cache(maxsize=2)
def _model_for(cfg_json: str) -> NetworkModel:
    return build_model(Config(json.loads(cfg_json)))


@lru_cache(maxsize=8)
def _trace_for(cfg_json: str, alpha: float):
    cfg = Config(json.loads(cfg_json))
    cat = catalog(cfg)
    return generate_trace(_model_for(cfg_json), cat, ZipfSpec(alpha, cat.num_contents),
                          cfg["workload"]["n_queries"], cfg.seed)


# a traffic run is (alpha, placement, c, strategy)
RunKey = Tuple[float, str, float, Optional[str]]


def _traffic(args) -> Tuple[RunKey, TrafficStats]:
    cfg_json, key = args
    alpha, placement, c, strategy = key
    cfg = Config(json.loads(cfg_json))
    stats = run_traffic(_model_for(cfg_json), _trace_for(cfg_json, alpha),
                        CacheDeployment(placement, c), strategy, energy_params(cfg))
    return key, stats


def run_traffic_grid(cfg: Config, keys: Sequence[RunKey], jobs: int = 1) -> Dict[RunKey, TrafficStats]:
    """Run each distinct traffic configuration once, optionally in worker processes."""
    cfg_json = json.dumps(cfg.data, sort_keys=True)
    wanted = sorted(set(keys), key=_key_order)
    todo = [(cfg_json, k) for k in wanted if (cfg_json, k) not in _TRAFFIC_MEMO]
    if jobs > 1 and len(todo) > 1:
        with get_context("fork").Pool(min(jobs, len(todo))) as pool:
            done = pool.map(_traffic, todo, chunksize=1)
    else:
        done = [_traffic(t) for t in todo]
    for key, stats in done:
        _TRAFFIC_MEMO[(cfg_json, key)] = stats
    return {k: _TRAFFIC_MEMO[(cfg_json, k)] for k in wanted}


# traffic counters are small; experiments in one process share them
_TRAFFIC_MEMO: Dict[Tuple[str, RunKey], TrafficStats] = {}


def clear_memo() -> None:
    _TRAFFIC_MEMO.clear()
    _model_for.cache_clear()
    _trace_for.cache_clear()


def _key_order(key: RunKey):
    alpha, placement, c, strategy = key
    return alpha, placement, c, strategy or ""


def _summary_row(model, stats: TrafficStats, arch: str, params: EnergyParams,
                 alpha: float) -> dict:
    rep = price(model, stats, arch_spec(arch, params.headers), params)
    t = rep.totals
    return {"arch": arch, "deployment": stats.deployment.placement,
            "strategy": stats.strategy or "none", "c": stats.deployment.budget_ratio,
            "alpha": alpha, "total_J": rep.total, "base_J": t["baseline_J"],
            "fwd_J": t["forwarding_J"], "cache_J": t["cache_J"], "tx_J": t["transmission_J"],
            "hit_rate": rep.hit_rate, "normalized": math.nan}


def _normalize(rows: List[dict], group_of, is_baseline) -> None:
    """Divide totals by the one baseline row of each group."""
    base: Dict = {}
    for r in rows:
        if is_baseline(r):
            g = group_of(r)
            if g in base:
                raise ValueError(f"two baseline rows in group {g}")
            base[g] = r["total_J"]
    for r in rows:
        b = base[group_of(r)]
        r["normalized"] = 1.0 if is_baseline(r) else r["total_J"] / b


def _row_order(r):
    return (r["alpha"], r["c"], r["arch"], r["deployment"], r["strategy"])


def _simulated(cfg: Config, name: str, plan: List[Tuple[str, RunKey]], group_of,
               is_baseline, jobs: int) -> ExperimentResult:
    stats = run_traffic_grid(cfg, [k for _, k in plan], jobs)
    model = _model_for(json.dumps(cfg.data, sort_keys=True))
    params = energy_params(cfg)
    rows = [_summary_row(model, stats[key], arch, params, key[0]) for arch, key in plan]
    rows.sort(key=_row_order)
    _normalize(rows, group_of, is_baseline)
    return ExperimentResult(name, [Table("summary", SUMMARY_COLUMNS, rows)],
                            config_hash=config_hash(cfg.data))


def _none(alpha) -> RunKey:
    return (alpha, "none", 0.0, None)


def _cached(arch, alpha, c, strategy=None) -> RunKey:
    if c == 0:
        return _none(alpha)
    placement = CACHING_PLACEMENT[arch]
    return (alpha, placement, c, strategy or DEFAULT_STRATEGY[placement])


def _is_scion_none(r):
    return r["arch"] == "SCION" and r["deployment"] == "none"


# ---------------------------------------------------------------------------
# experiments


def run_fig3(cfg: Config, jobs: int = 1) -> ExperimentResult:
    """Forwarding power of one line card against link speed."""
    sizes = cfg["forwarding"]["ndn_fib_sizes"]
    variants = ["IP"] + [f"NDN-{_short(n)}" for n in sizes] + ["NEBULA", "SCION"]
    rows = []
    for gbps in sorted(cfg["forwarding"]["link_gbps"]):
        rate = pm.packet_rate(gbps * 1e9, cfg["energy"]["payload_bytes"])
        row = {"link_gbps": gbps, "IP": pm.fwd_power("IP", rate)}
        for n in sizes:
            row[f"NDN-{_short(n)}"] = pm.lpmbf_power(ndn_fib(int(n)), rate)
        row["NEBULA"] = pm.fwd_power("NEBULA", rate)
        row["SCION"] = pm.fwd_power("SCION", rate)
        rows.append(row)
    table = Table("fwd_power", ("link_gbps", *variants), rows)
    sweep = SweepResult("link_gbps", [r["link_gbps"] for r in rows],
                        {v: [r[v] for r in rows] for v in variants},
                        {v: [r[v] for r in rows] for v in variants})
    return ExperimentResult("fig3", [table], sweep, config_hash(cfg.data))


def ndn_fib(num_prefixes: int) -> pm.LpmBfConfig:
    """Bloom filters sized at 10 bits per name, up to what one SRAM part holds."""
    sram = min(10 * num_prefixes, pm.SRAM.max_capacity)
    return pm.LpmBfConfig(sram_bits=sram, num_prefixes=num_prefixes)


def _short(n) -> str:
    n = int(n)
    for div, suffix in ((1_000_000, "M"), (1_000, "K")):
        if n >= div and n % div == 0:
            return f"{n // div}{suffix}"
    return str(n)


FIG6_COLUMNS = ("arch", "role", "base_J_per_bit", "fwd_J_per_bit", "cache_J_per_bit",
                "total_J_per_bit")


def fig6_rows(cfg: Config) -> List[dict]:
    u = cfg["energy"]["utilization"]
    scheme = KV_BY_NAME[cfg["energy"]["kv_scheme"]]
    size = cfg["workload"]["content_size"]
    gb = {"core": cfg["routers"]["core_cache_gb"], "edge": cfg["routers"]["edge_cache_gb"]}
    profiles = {"core": pm.CORE_ROUTER, "edge": pm.EDGE_ROUTER}
    rows = []
    for arch in pm.ARCHITECTURES:
        for role in ("core", "edge"):
            cache = None
            if arch == "NDN":
                cache = (scheme, pm.CacheHardware(pm.SRAM, pm.DRAM, gb[role] * pm.GB_BITS, size))
            # path-carrying architectures decide forwarding only at the edge
            forwards = not (arch in pm.PCS_ARCHS and role == "core")
            e = pm.energy_per_bit(arch, profiles[role], u, cache=cache, forwards=forwards)
            rows.append({"arch": arch, "role": role, "base_J_per_bit": e.base,
                         "fwd_J_per_bit": e.fwd, "cache_J_per_bit": e.cache,
                         "total_J_per_bit": e.total})
    return rows


def run_fig6(cfg: Config, jobs: int = 1) -> ExperimentResult:
    """Per-bit energy of core and edge routers, split by component."""
    return ExperimentResult("fig6", [Table("router_energy", FIG6_COLUMNS, fig6_rows(cfg))],
                            config_hash=config_hash(cfg.data))


def run_fig8(cfg: Config, jobs: int = 1) -> ExperimentResult:
    """No caching anywhere; totals relative to IP."""
    alpha = cfg["workload"]["zipf_alpha"]
    plan = [(a, _none(alpha)) for a in pm.ARCHITECTURES]
    return _simulated(cfg, "fig8", plan, lambda r: r["alpha"],
                      lambda r: r["arch"] == "IP", jobs)


def run_fig9(cfg: Config, jobs: int = 1) -> ExperimentResult:
    """Each architecture with and without its caches, relative to SCION without."""
    alpha = cfg["workload"]["zipf_alpha"]
    c = cfg["sweeps"]["cache_budget"]
    plan = [(a, _none(alpha)) for a in pm.ARCHITECTURES]
    plan += [(a, _cached(a, alpha, c)) for a in pm.ARCHITECTURES if c > 0]
    return _simulated(cfg, "fig9", plan, lambda r: r["alpha"], _is_scion_none, jobs)


def _series_label(r) -> str:
    return r["arch"] if r["deployment"] == "none" else f"{r['arch']}-{r['deployment']}"


def _sweep(rows, axis: str, values: Sequence[float], label_of) -> SweepResult:
    series: Dict[str, List[float]] = {}
    raw: Dict[str, List[float]] = {}
    index = {v: i for i, v in enumerate(values)}
    for r in rows:
        if r[axis] not in index:
            continue
        label = label_of(r)
        series.setdefault(label, [math.nan] * len(values))[index[r[axis]]] = r["normalized"]
        raw.setdefault(label, [math.nan] * len(values))[index[r[axis]]] = r["total_J"]
    return SweepResult(axis, list(values), series, raw)


def sweep_cache_budget(cfg: Config, jobs: int = 1) -> ExperimentResult:
    """Caching architectures across budget ratios; c=0 is the uncached network."""
    alpha = cfg["workload"]["zipf_alpha"]
    cs = sorted(set(cfg["sweeps"]["budget_ratios"]))
    plan = [(a, _cached(a, alpha, c)) for c in cs for a in pm.ARCHITECTURES]
    if 0.0 not in cs:
        plan.append(("SCION", _none(alpha)))
    res = _simulated(cfg, "sweep_budget", plan, lambda r: r["alpha"], _is_scion_none, jobs)
    res.sweep = _sweep(res.summary.rows, "c", cs,
                       lambda r: f"{r['arch']}-{CACHING_PLACEMENT[r['arch']]}")
    return res


def sweep_zipf(cfg: Config, jobs: int = 1) -> ExperimentResult:
    """Uncached and cached architectures across Zipf exponents, each exponent
    normalized to SCION without caching at that exponent."""
    c = cfg["sweeps"]["cache_budget"]
    alphas = sorted(set(cfg["sweeps"]["zipf_alphas"]))
    plan = []
    for alpha in alphas:
        plan += [(a, _none(alpha)) for a in pm.ARCHITECTURES]
        plan += [(a, _cached(a, alpha, c)) for a in pm.ARCHITECTURES if c > 0]
    res = _simulated(cfg, "sweep_zipf", plan, lambda r: r["alpha"], _is_scion_none, jobs)
    res.sweep = _sweep(res.summary.rows, "alpha", alphas, _series_label)
    return res


def sweep_discovery(cfg: Config, jobs: int = 1) -> ExperimentResult:
    """The two edge and two pervasive discovery strategies at one budget."""
    alpha = cfg["workload"]["zipf_alpha"]
    c = cfg["sweeps"]["cache_budget"]
    if c <= 0:
        raise ValueError("discovery sweep needs sweeps.cache_budget > 0")
    plan = [("SCION", _none(alpha))]
    for a in pm.ARCHITECTURES:
        strategies = (("on_path", "nearest_copy") if CACHING_PLACEMENT[a] == "pervasive_all_routers"
                      else ("simple_edge", "cooperative_edge"))
        plan += [(a, _cached(a, alpha, c, s)) for s in strategies]
    res = _simulated(cfg, "sweep_discovery", plan, lambda r: r["alpha"], _is_scion_none, jobs)
    strategies = ["simple_edge", "cooperative_edge", "on_path", "nearest_copy"]
    cached = [r for r in res.summary.rows if r["deployment"] != "none"]
    series: Dict[str, List[float]] = {}
    raw: Dict[str, List[float]] = {}
    for r in cached:
        i = strategies.index(r["strategy"])
        series.setdefault(r["arch"], [math.nan] * 4)[i] = r["normalized"]
        raw.setdefault(r["arch"], [math.nan] * 4)[i] = r["total_J"]
    res.sweep = SweepResult("strategy", strategies, series, raw)
    return res


RUNNERS = {
    "fig3": run_fig3,
    "fig6": run_fig6,
    "fig8": run_fig8,
    "fig9": run_fig9,
    "sweep_budget": sweep_cache_budget,
    "sweep_zipf": sweep_zipf,
    "sweep_discovery": sweep_discovery,
}


def run_experiment(name: str, cfg: Config, jobs: int = 1) -> ExperimentResult:
    if name not in RUNNERS:
        raise ValueError(f"unknown experiment {name!r}; choose from {', '.join(EXPERIMENTS)}")
    return RUNNERS[name](cfg, jobs)


# ---------------------------------------------------------------------------
# output


def write_result(result: ExperimentResult, cfg: Config, out_dir, plots: bool = True) -> List[Path]:
    """Write CSV tables, the config echo, optional figures and a manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    echo = out / f"{result.experiment}_config.yaml"
    echo.write_text(f"# config_hash: {result.config_hash}\n" + dump_config(cfg), encoding="utf-8")
    written.append(echo)
    for t in result.tables:
        path = out / f"{result.experiment}_{t.name}.csv"
        path.write_text(t.to_csv(), encoding="utf-8")
        written.append(path)
    if plots:
        from .plotting import plot_result
        written += plot_result(result, out)
    manifest = out / f"{result.experiment}_manifest.json"
    manifest.write_text(json.dumps({
        "experiment": result.experiment,
        "config_hash": result.config_hash,
        "seed": cfg.seed,
        "outputs": sorted(p.name for p in written),
    }, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    written.append(manifest)
    return written

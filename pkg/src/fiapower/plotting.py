"""SVG charts of experiment results.  The CSVs are the data of record; these
are for looking at."""

from __future__ import annotations

import math
from pathlib import Path
from typing import List

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# fixed metadata keeps the SVG bytes stable between runs
_SVG_META = {"Date": None, "Creator": None}


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    plt.rcParams["svg.hashsalt"] = "fiapower"
    fig.savefig(path, format="svg", metadata=_SVG_META)
    plt.close(fig)
    return path


def plot_fig3(result, out: Path) -> List[Path]:
    t = result.tables[0]
    x = [r["link_gbps"] for r in t.rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    for col in t.columns[1:]:
        ax.plot(x, [r[col] for r in t.rows], marker="o", label=col)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("link speed (Gb/s)")
    ax.set_ylabel("forwarding power (W)")
    ax.legend(fontsize=8)
    return [_save(fig, out / "fig3_fwd_power.svg")]


def plot_fig6(result, out: Path) -> List[Path]:
    rows = result.tables[0].rows
    labels = [f"{r['arch']}\n{r['role']}" for r in rows]
    fig, ax = plt.subplots(figsize=(8, 4))
    bottom = [0.0] * len(rows)
    for key, name in (("base_J_per_bit", "baseline"), ("fwd_J_per_bit", "forwarding"),
                      ("cache_J_per_bit", "cache")):
        vals = [r[key] * 1e9 for r in rows]
        ax.bar(labels, vals, bottom=bottom, label=name)
        bottom = [b + v for b, v in zip(bottom, vals)]
    ax.set_ylabel("energy (nJ/bit)")
    ax.legend(fontsize=8)
    return [_save(fig, out / "fig6_router_energy.svg")]


def plot_bars(result, out: Path) -> List[Path]:
    rows = result.summary.rows
    labels = [r["arch"] if r["deployment"] == "none" else f"{r['arch']}\n{r['deployment'].split('_')[0]}"
              for r in rows]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar(labels, [r["normalized"] for r in rows])
    ax.axhline(1.0, color="k", lw=0.8)
    ax.set_ylabel("normalized energy")
    return [_save(fig, out / f"{result.experiment}_normalized.svg")]


def plot_sweep(result, out: Path) -> List[Path]:
    sw = result.sweep
    fig, ax = plt.subplots(figsize=(6, 4))
    if sw.axis == "strategy":
        width = 0.8 / max(1, len(sw.series))
        for i, (label, ys) in enumerate(sorted(sw.series.items())):
            xs = [j + i * width for j, y in enumerate(ys) if not math.isnan(y)]
            ax.bar(xs, [y for y in ys if not math.isnan(y)], width, label=label)
        ax.set_xticks(range(len(sw.values)))
        ax.set_xticklabels(sw.values, fontsize=8)
    else:
        for label, ys in sorted(sw.series.items()):
            ax.plot(sw.values, ys, marker="o", label=label)
        ax.set_xlabel(sw.axis)
    ax.set_ylabel("normalized energy")
    ax.legend(fontsize=7)
    return [_save(fig, out / f"{result.experiment}.svg")]


def plot_result(result, out_dir) -> List[Path]:
    out = Path(out_dir)
    if result.experiment == "fig3":
        return plot_fig3(result, out)
    if result.experiment == "fig6":
        return plot_fig6(result, out)
    if result.sweep is not None:
        return plot_sweep(result, out)
    return plot_bars(result, out)

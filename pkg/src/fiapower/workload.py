"""Zipf request traces placed on access-tree leaves by PoP population."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterator, List, Tuple

import numpy as np

from .topology import NetworkModel


class TraceFormatError(ValueError):
    def __init__(self, path, lineno: int, msg: str):
        super().__init__(f"{path}:{lineno}: {msg}")
        self.lineno = lineno


@dataclass(frozen=True)
class Catalog:
    num_contents: int = 100_000
    content_size: int = 1_000_000  # bytes

    def __post_init__(self):
        if self.num_contents < 1:
            raise ValueError("catalog needs at least one content")
        if self.content_size <= 0:
            raise ValueError("content_size must be positive")

    @property
    def total_bytes(self) -> int:
        return self.num_contents * self.content_size


@dataclass(frozen=True)
class ZipfSpec:
    exponent: float = 0.99
    support: int = 100_000

    def __post_init__(self):
        if self.exponent < 0:
            raise ValueError("Zipf exponent must be >= 0")


def zipf_pmf(spec: ZipfSpec) -> np.ndarray:
    """Probability of each rank, rank 1 first."""
    if spec.support < 1:
        raise ValueError("Zipf support must be >= 1")
    weights = np.arange(1, spec.support + 1, dtype=float) ** -spec.exponent
    return weights / weights.sum()


class ZipfSampler:
    """Seeded stream of 0-based content ids; id ``i`` has Zipf rank ``i + 1``."""

    def __init__(self, spec: ZipfSpec, seed: int):
        self.spec = spec
        self._cdf = np.cumsum(zipf_pmf(spec))
        self._cdf[-1] = 1.0
        self._rng = np.random.default_rng(seed)

    def sample(self, n: int) -> np.ndarray:
        u = self._rng.random(n)
        return np.searchsorted(self._cdf, u, side="right").astype(np.int64)

    def __iter__(self) -> Iterator[int]:
        while True:
            yield from self.sample(4096).tolist()


def zipf_sampler(spec: ZipfSpec, seed: int) -> ZipfSampler:
    return ZipfSampler(spec, seed)


@dataclass
class QueryTrace:
    leaves: np.ndarray
    contents: np.ndarray
    seed: int
    spec: ZipfSpec
    catalog: Catalog

    def __len__(self) -> int:
        return len(self.leaves)

    def events(self) -> Iterator[Tuple[int, int]]:
        return zip(self.leaves.tolist(), self.contents.tolist())

    def __eq__(self, other) -> bool:
        if not isinstance(other, QueryTrace):
            return NotImplemented
        return (self.seed == other.seed and self.spec == other.spec
                and self.catalog == other.catalog
                and np.array_equal(self.leaves, other.leaves)
                and np.array_equal(self.contents, other.contents))


def generate_trace(model: NetworkModel, catalog: Catalog, spec: ZipfSpec,
                   n_queries: int, seed: int) -> QueryTrace:
    """Draw a PoP by population, a leaf uniformly inside it, and a Zipf content."""
    if n_queries < 0:
        raise ValueError("n_queries must be >= 0")
    if spec.support != catalog.num_contents:
        raise ValueError("Zipf support must equal the catalog size")
    pops_with_leaves = [p for p in range(len(model.pops)) if model.leaves_of_pop(p)]
    if not pops_with_leaves:
        raise ValueError("model has no leaves")
    population = np.array([model.pops[p].population for p in pops_with_leaves], dtype=float)
    if population.sum() <= 0:
        raise ValueError("total PoP population is zero")
    rng = np.random.default_rng([seed, 1])
    pop_idx = rng.choice(len(pops_with_leaves), size=n_queries, p=population / population.sum())
    leaf_table = [np.array(model.leaves_of_pop(p)) for p in pops_with_leaves]
    counts = np.array([len(t) for t in leaf_table])
    offsets = np.concatenate(([0], np.cumsum(counts)[:-1]))
    flat = np.concatenate(leaf_table)
    within = np.floor(rng.random(n_queries) * counts[pop_idx]).astype(np.int64)
    leaves = flat[offsets[pop_idx] + within].astype(np.int64)
    contents = ZipfSampler(spec, seed).sample(n_queries)
    return QueryTrace(leaves, contents, seed, spec, catalog)


# ---------------------------------------------------------------------------
# CSV round trip

HEADER = "seq,leaf_id,content_id"


def write_trace(trace: QueryTrace, path) -> None:
    meta = {
        "seed": trace.seed,
        "alpha": repr(float(trace.spec.exponent)),
        "num_contents": trace.catalog.num_contents,
        "content_size": trace.catalog.content_size,
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for k, v in meta.items():
            fh.write(f"# {k}={v}\n")
        fh.write(HEADER + "\n")
        for i, (leaf, content) in enumerate(trace.events()):
            fh.write(f"{i},{leaf},{content}\n")


def read_trace(path) -> QueryTrace:
    meta: Dict[str, str] = {}
    leaves: List[int] = []
    contents: List[int] = []
    header_seen = False
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if line.startswith("#"):
                key, sep, value = line[1:].strip().partition("=")
                if not sep:
                    raise TraceFormatError(path, lineno, "metadata must be key=value")
                meta[key.strip()] = value.strip()
                continue
            if not header_seen:
                if line.strip() != HEADER:
                    raise TraceFormatError(path, lineno, f"expected header {HEADER!r}")
                header_seen = True
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise TraceFormatError(path, lineno, f"expected 3 fields, got {len(parts)}")
            try:
                seq, leaf, content = (int(p) for p in parts)
            except ValueError:
                raise TraceFormatError(path, lineno, "non-integer field") from None
            if seq != len(leaves):
                raise TraceFormatError(path, lineno, f"sequence number {seq} out of order")
            leaves.append(leaf)
            contents.append(content)
    if not header_seen:
        raise TraceFormatError(path, 0, "missing header")
    try:
        catalog = Catalog(int(meta["num_contents"]), int(meta["content_size"]))
        spec = ZipfSpec(float(meta["alpha"]), catalog.num_contents)
        seed = int(meta["seed"])
    except KeyError as exc:
        raise TraceFormatError(path, 0, f"missing metadata {exc.args[0]!r}") from None
    contents_arr = np.array(contents, dtype=np.int64)
    if len(contents_arr) and (contents_arr.min() < 0 or contents_arr.max() >= catalog.num_contents):
        raise TraceFormatError(path, 0, "content id outside the catalog")
    return QueryTrace(np.array(leaves, dtype=np.int64), contents_arr, seed, spec, catalog)

"""Hierbone Benchmark Generator Module.

Semi-synthetic object-tag networks planted on a reference hierarchy. Every
virtual object receives a uniformly drawn reference term plus further terms,
each either drawn uniformly (probability 1 - p_rw) or reached by an
undirected random walk of s steps from the reference term (probability p_rw).

Randomness comes from numpy's PCG64 bit generator seeded through a
SeedSequence with spawn key (ensemble_index, block). Objects are generated in
fixed blocks of BLOCK_SIZE, each with its own stream, so output does not
depend on how many workers generate the blocks.
"""

from __future__ import annotations

import logging
import warnings
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from hierbone.config import BenchmarkConfig
from hierbone.exceptions import ConfigError, EmptyInputError
from hierbone.graph import BipartiteGraph, IntArray, from_columns
from hierbone.ingest import ReferenceHierarchy

logger = logging.getLogger(__name__)

RNG_ALGORITHM = "numpy.random.PCG64 via SeedSequence(seed, spawn_key=(ensemble, block))"
BLOCK_SIZE = 1024
MAX_RETRIES = 50


def block_rng(seed: int, ensemble_index: int, block: int) -> np.random.Generator:
    """Independent generator for one block of objects of one ensemble member."""
    sequence = np.random.SeedSequence(seed, spawn_key=(ensemble_index, block))
    return np.random.Generator(np.random.PCG64(sequence))


@dataclass(frozen=True, eq=False)
class _WalkGraph:
    """Undirected neighbor lists of a hierarchy over sorted term codes."""

    terms: tuple[str, ...]
    indptr: IntArray
    indices: IntArray

    @classmethod
    def from_hierarchy(cls, h: ReferenceHierarchy) -> _WalkGraph:
        terms = tuple(sorted(h.nodes))
        index = {t: i for i, t in enumerate(terms)}
        neighbors: list[set[int]] = [set() for _ in terms]
        for parent, child in h.edges:
            neighbors[index[parent]].add(index[child])
            neighbors[index[child]].add(index[parent])
        counts = np.fromiter((len(n) for n in neighbors), dtype=np.int64, count=len(terms))
        indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        indices = np.fromiter(
            (j for n in neighbors for j in sorted(n)), dtype=np.int64, count=int(counts.sum())
        )
        return cls(terms=terms, indptr=indptr, indices=indices)

    @property
    def n_terms(self) -> int:
        return len(self.terms)

    def walk(self, rng: np.random.Generator, start: int, steps: int) -> int:
        node = start
        for _ in range(steps):
            lo, hi = int(self.indptr[node]), int(self.indptr[node + 1])
            if lo == hi:
                return node  # isolated: stays in place
            node = int(self.indices[lo + int(rng.integers(hi - lo))])
        return node


def _draw(
    walker: _WalkGraph, cfg: BenchmarkConfig, rng: np.random.Generator, reference: int
) -> int:
    if rng.random() < cfg.p_rw:
        steps = int(rng.integers(cfg.walk_min, cfg.walk_max + 1))
        return walker.walk(rng, reference, steps)
    return int(rng.integers(walker.n_terms))


def _generate_block(
    walker: _WalkGraph, cfg: BenchmarkConfig, block: int
) -> tuple[list[int], list[int], int]:
    """Tags of the objects in one block as (object indices, term codes, isolated walks)."""
    rng = block_rng(cfg.seed, cfg.ensemble_index, block)
    start = block * BLOCK_SIZE
    stop = min(start + BLOCK_SIZE, cfg.n_products)
    objects: list[int] = []
    tags: list[int] = []
    isolated = 0
    for obj in range(start, stop):
        n_tags = int(rng.integers(cfg.tags_min, cfg.tags_max + 1))
        reference = int(rng.integers(walker.n_terms))
        if walker.indptr[reference] == walker.indptr[reference + 1]:
            isolated += 1
        chosen = [reference]
        for _ in range(n_tags - 1):
            for _ in range(MAX_RETRIES):
                tag = _draw(walker, cfg, rng, reference)
                if tag not in chosen:
                    break
            else:
                # uniform over the unused terms
                tag = int(rng.integers(walker.n_terms))
                while tag in chosen:
                    tag = int(rng.integers(walker.n_terms))
            chosen.append(tag)
        objects.extend([obj] * len(chosen))
        tags.extend(chosen)
    return objects, tags, isolated


def _object_names(n_products: int) -> list[str]:
    width = len(str(max(n_products - 1, 0)))
    return [f"obj{i:0{width}d}" for i in range(n_products)]


def generate(
    h: ReferenceHierarchy, cfg: BenchmarkConfig, *, n_workers: int = 1
) -> BipartiteGraph:
    """Generate one semi-synthetic bipartite network on a reference hierarchy.

    Args:
        h: Reference hierarchy; edge directions are ignored by the walks.
        cfg: Benchmark protocol and RNG coordinates.
        n_workers: Threads used to generate blocks; does not change the output.

    Returns:
        A bipartite graph with exactly ``cfg.n_products`` objects named
        ``obj<index>``, each carrying between tags_min and tags_max distinct
        terms of ``h``.

    Raises:
        EmptyInputError: If the hierarchy has no nodes.
        ConfigError: If the hierarchy has fewer terms than tags_max.
    """
    if h.n_nodes == 0:
        raise EmptyInputError("empty graph: reference hierarchy has no terms")
    if h.n_nodes < cfg.tags_max:
        raise ConfigError(
            f"reference has {h.n_nodes} terms, fewer than tags_max={cfg.tags_max}"
        )
    if n_workers < 1:
        raise ConfigError(f"n_workers must be >= 1, got {n_workers}")

    walker = _WalkGraph.from_hierarchy(h)
    blocks = range((cfg.n_products + BLOCK_SIZE - 1) // BLOCK_SIZE)
    if n_workers == 1:
        results = [_generate_block(walker, cfg, b) for b in blocks]
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(lambda b: _generate_block(walker, cfg, b), blocks))

    names = np.asarray(_object_names(cfg.n_products), dtype=object)
    terms = np.asarray(walker.terms, dtype=object)
    object_index = np.fromiter((o for r in results for o in r[0]), dtype=np.int64)
    term_codes = np.fromiter((t for r in results for t in r[1]), dtype=np.int64)
    isolated = sum(r[2] for r in results)
    if isolated and cfg.p_rw > 0:
        warnings.warn(
            f"{isolated} objects drew an isolated reference term; their walks "
            "stayed in place and were resampled",
            UserWarning,
            stacklevel=2,
        )

    graph = from_columns(names[object_index], terms[term_codes])
    logger.info(
        "benchmark N=%d p_rw=%g ensemble=%d: %d edges over %d terms",
        cfg.n_products,
        cfg.p_rw,
        cfg.ensemble_index,
        graph.n_edges,
        graph.n_tags,
    )
    return graph


def generate_ensemble(
    h: ReferenceHierarchy,
    template: BenchmarkConfig,
    n_ensembles: int = 20,
    *,
    n_workers: int = 1,
) -> list[BipartiteGraph]:
    """Generate ``n_ensembles`` networks; member i uses ensemble_index = i.

    Raises:
        ConfigError: If n_ensembles < 1.
    """
    if n_ensembles < 1:
        raise ConfigError(f"n_ensembles must be >= 1, got {n_ensembles}")
    configs = [template.model_copy(update={"ensemble_index": i}) for i in range(n_ensembles)]
    if n_workers == 1:
        return [generate(h, cfg) for cfg in configs]
    with ThreadPoolExecutor(max_workers=n_workers) as pool:
        return list(pool.map(lambda cfg: generate(h, cfg), configs))


def balanced_tree(branching: int, depth: int, prefix: str = "T") -> ReferenceHierarchy:
    """Planted hierarchy: a complete tree, nodes numbered breadth first.

    ``balanced_tree(3, 3)`` has 1 + 3 + 9 + 27 = 40 nodes.

    Raises:
        ConfigError: If branching < 1 or depth < 1.
    """
    if branching < 1 or depth < 1:
        raise ConfigError(f"branching and depth must be >= 1, got {branching}, {depth}")
    n_nodes = sum(branching**level for level in range(depth + 1))
    width = len(str(n_nodes - 1))
    names = [f"{prefix}{i:0{width}d}" for i in range(n_nodes)]
    edges = [(names[(child - 1) // branching], names[child]) for child in range(1, n_nodes)]
    return ReferenceHierarchy(names, edges)


def random_hierarchy(
    n_nodes: int, n_edges: int, seed: int = 0, prefix: str = "R"
) -> ReferenceHierarchy:
    """Random reference DAG: a random recursive tree plus extra forward edges.

    Node i > 0 gets a parent drawn uniformly from nodes 0..i-1; the remaining
    ``n_edges - (n_nodes - 1)`` edges join random pairs (earlier -> later).

    Raises:
        ConfigError: If the edge count cannot be realized.
    """
    max_edges = n_nodes * (n_nodes - 1) // 2
    if n_nodes < 2 or not n_nodes - 1 <= n_edges <= max_edges:  # noqa: PLR2004
        raise ConfigError(
            f"need n_nodes >= 2 and {n_nodes - 1} <= n_edges <= {max_edges}, "
            f"got {n_nodes}, {n_edges}"
        )
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    width = len(str(n_nodes - 1))
    names = [f"{prefix}{i:0{width}d}" for i in range(n_nodes)]
    pairs: set[tuple[int, int]] = {
        (int(rng.integers(child)), child) for child in range(1, n_nodes)
    }
    while len(pairs) < n_edges:
        a, b = sorted(int(x) for x in rng.choice(n_nodes, size=2, replace=False))
        pairs.add((a, b))
    edges: Sequence[tuple[str, str]] = [(names[a], names[b]) for a, b in sorted(pairs)]
    return ReferenceHierarchy(names, edges)

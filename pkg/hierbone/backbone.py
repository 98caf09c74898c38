"""Hierbone Backbone Module.

Extracts hierarchical backbones from a tag co-occurrence graph:

1. prune pairs whose co-occurrence is not significantly above the
   hypergeometric expectation (z-score threshold z_th);
2. score every surviving pair with the hierarchy strength alpha, a
   degree-weighted difference of the two conditional probabilities;
3. keep the directed edges with alpha >= alpha_th, pointing from the more
   frequent tag to the less frequent one;
4. optionally drop edges implied by longer paths (parsimonious backbone).
"""

from __future__ import annotations

import enum
import logging
import math
import warnings
from collections.abc import Callable, Iterator
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import NamedTuple

import networkx as nx
import numpy as np
import numpy.typing as npt

from hierbone.exceptions import ConfigError, DomainError, IntegrityError
from hierbone.graph import BipartiteGraph, CooccurrenceGraph, IntArray, project

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]

# f(k_u, k_v, k_max) in the general hierarchy-strength form
DegreeWeighting = Callable[[float, float, float], float]


def min_degree_weighting(k_u: float, k_v: float, k_max: float) -> float:
    """Weight pairs by min(k_u, k_v) / k_max, favouring well-connected tags."""
    return min(k_u, k_v) / k_max


def cooccurrence_moments(n_u: int, n_v: int, n_objects: int) -> tuple[float, float]:
    """Mean and standard deviation of N(u,v) under the configuration model.

    With degrees preserved, the number of objects shared by two tags follows a
    hypergeometric distribution: draw N(v) objects out of |O| of which N(u)
    carry tag u.

    Args:
        n_u: N(u).
        n_v: N(v).
        n_objects: |O|.

    Returns:
        (m, sigma).

    Raises:
        DomainError: If n_objects < 2 or a frequency lies outside [0, n_objects].

    Example:
        >>> m, sigma = cooccurrence_moments(10, 20, 100)
        >>> m, round(sigma**2, 6)
        (2.0, 1.454545)
    """
    if n_objects < 2:
        raise DomainError(f"n_objects must be >= 2 for the variance, got {n_objects}")
    if not (0 <= n_u <= n_objects and 0 <= n_v <= n_objects):
        raise DomainError(
            f"tag frequencies ({n_u}, {n_v}) must lie in [0, n_objects={n_objects}]"
        )
    m, variance = _moments(
        np.asarray([n_u], dtype=np.float64), np.asarray([n_v], dtype=np.float64), n_objects
    )
    return float(m[0]), math.sqrt(float(variance[0]))


def _moments(
    n_u: FloatArray, n_v: FloatArray, n_objects: int
) -> tuple[FloatArray, FloatArray]:
    total = float(n_objects)
    m = n_u * n_v / total
    variance = m * ((total - n_u) / total) * ((total - n_v) / (total - 1.0))
    return m, np.maximum(variance, 0.0)


@dataclass(frozen=True, eq=False)
class PrunedGraph:
    """Tag pairs that co-occur significantly more often than chance.

    Pair arrays follow the CooccurrenceGraph layout (``rows < cols``).

    Attributes:
        tags: Tag identifiers; position is the tag code.
        n_objects: |O| of the source bipartite graph.
        z_th: Threshold used for pruning.
        frequencies: N(u) per tag code.
        rows: Smaller tag code of each surviving pair.
        cols: Larger tag code of each surviving pair.
        weights: N(u,v) of each surviving pair.
        z: z-score of each surviving pair.
    """

    tags: tuple[str, ...]
    n_objects: int
    z_th: float
    frequencies: IntArray
    rows: IntArray
    cols: IntArray
    weights: IntArray
    z: FloatArray

    @property
    def n_pairs(self) -> int:
        """Number of surviving pairs."""
        return int(self.weights.size)

    @cached_property
    def degrees(self) -> IntArray:
        """k_u: number of surviving pairs incident to each tag code."""
        n = len(self.tags)
        return (
            np.bincount(self.rows, minlength=n) + np.bincount(self.cols, minlength=n)
        ).astype(np.int64)

    @property
    def k_max(self) -> int:
        """Largest degree in the pruned graph; 0 when it has no pairs."""
        return int(self.degrees.max()) if self.degrees.size else 0

    def degree(self, tag: str) -> int:
        """k_u for a tag identifier; 0 when it has no surviving pair."""
        try:
            return int(self.degrees[self.tags.index(tag)])
        except ValueError:
            return 0

    def pairs(self) -> Iterator[tuple[str, str, int, float]]:
        """Iterate over (u, v, N(u,v), z) of the surviving pairs."""
        for r, c, w, z in zip(
            self.rows.tolist(),
            self.cols.tolist(),
            self.weights.tolist(),
            self.z.tolist(),
            strict=True,
        ):
            yield self.tags[r], self.tags[c], w, z


def prune(g: CooccurrenceGraph, z_th: float, n_objects: int | None = None) -> PrunedGraph:
    """Keep the pairs whose co-occurrence z-score reaches z_th.

    A pair survives iff sigma > 0 and (N(u,v) - m) / sigma >= z_th. Pairs with
    sigma = 0 (a tag on every object) carry no signal and are dropped.

    Args:
        g: The co-occurrence graph.
        z_th: z-score threshold; must be finite.
        n_objects: |O|; defaults to ``g.n_objects``.

    Returns:
        The pruned graph with degrees recomputed on the survivors.

    Raises:
        ConfigError: If z_th is not finite.
        DomainError: If n_objects < 2 while pairs are present.
    """
    if not math.isfinite(z_th):
        raise ConfigError(f"z_th must be finite, got {z_th}")
    total = g.n_objects if n_objects is None else n_objects

    if g.n_pairs == 0:
        z = np.zeros(0, dtype=np.float64)
        keep = np.zeros(0, dtype=bool)
    else:
        if total < 2:
            raise DomainError(f"n_objects must be >= 2 for the variance, got {total}")
        n_u = g.frequencies[g.rows].astype(np.float64)
        n_v = g.frequencies[g.cols].astype(np.float64)
        m, variance = _moments(n_u, n_v, total)
        sigma = np.sqrt(variance)
        informative = sigma > 0
        z = np.zeros_like(m)
        z[informative] = (g.weights[informative] - m[informative]) / sigma[informative]
        keep = informative & (z >= z_th)

    pruned = PrunedGraph(
        tags=g.tags,
        n_objects=total,
        z_th=float(z_th),
        frequencies=g.frequencies,
        rows=g.rows[keep],
        cols=g.cols[keep],
        weights=g.weights[keep],
        z=z[keep],
    )
    logger.info(
        "prune z_th=%g: %d/%d pairs survive, k_max=%d",
        z_th,
        pruned.n_pairs,
        g.n_pairs,
        pruned.k_max,
    )
    return pruned


class Direction(enum.StrEnum):
    """Orientation of a hierarchy-strength score relative to the (u, v) order."""

    FORWARD = "u->v"
    REVERSE = "v->u"
    NONE = "none"


class HierarchyStrength(NamedTuple):
    """Signed alpha_{u->v} and the direction it encodes."""

    alpha: float
    direction: Direction

    @property
    def strength(self) -> float:
        """Magnitude of alpha."""
        return abs(self.alpha)


def hierarchy_strength(
    n_u: int,
    n_v: int,
    n_uv: int,
    k_u: int,
    k_v: int,
    k_max: int,
    weighting: DegreeWeighting = min_degree_weighting,
) -> HierarchyStrength:
    """Hierarchy strength alpha_{u->v} of a pair.

    alpha_{u->v} = f(k_u, k_v) * (N(u,v)/N(v) - N(u,v)/N(u)); a positive value
    means u -> v. Equal frequencies give no direction and alpha = 0.

    Args:
        n_u: N(u), >= 1.
        n_v: N(v), >= 1.
        n_uv: N(u,v), at most min(n_u, n_v).
        k_u: Degree of u in the pruned graph.
        k_v: Degree of v in the pruned graph.
        k_max: Maximum degree in the pruned graph.
        weighting: f(k_u, k_v, k_max); min(k_u, k_v)/k_max by default.

    Returns:
        The signed strength and its direction.

    Raises:
        DomainError: If k_max = 0 or the counts are inconsistent.

    Example:
        >>> s = hierarchy_strength(100, 20, 20, 5, 3, 10)
        >>> round(s.alpha, 6), s.direction.value
        (0.24, 'u->v')
    """
    if k_max <= 0:
        raise DomainError("k_max must be >= 1 (the pruned graph has no pairs)")
    if n_u < 1 or n_v < 1:
        raise DomainError(f"tag frequencies must be >= 1, got ({n_u}, {n_v})")
    if not 0 <= n_uv <= min(n_u, n_v):
        raise DomainError(f"N(u,v)={n_uv} must lie in [0, min(N(u), N(v))]")
    if n_u == n_v:
        return HierarchyStrength(0.0, Direction.NONE)

    alpha = weighting(k_u, k_v, k_max) * (n_uv / n_v - n_uv / n_u)
    if alpha > 0:
        return HierarchyStrength(alpha, Direction.FORWARD)
    if alpha < 0:
        return HierarchyStrength(alpha, Direction.REVERSE)
    return HierarchyStrength(0.0, Direction.NONE)


@dataclass(frozen=True, eq=False)
class ScoredPairs:
    """Every pruned pair oriented from the more to the less frequent tag.

    Pairs with equal frequencies are left out: they have no direction.

    Attributes:
        tags: Tag identifiers; position is the tag code.
        sources: Code of the parent (more frequent) tag.
        targets: Code of the child (less frequent) tag.
        alpha: Hierarchy strength of each oriented pair (> 0).
        z: z-score of each pair.
        frequencies: N(u) per tag code.
        weights: N(u,v) of each pair.
    """

    tags: tuple[str, ...]
    sources: IntArray
    targets: IntArray
    alpha: FloatArray
    z: FloatArray
    frequencies: IntArray
    weights: IntArray

    def __len__(self) -> int:
        return int(self.alpha.size)


def score_pairs(p: PrunedGraph) -> ScoredPairs:
    """Orient and score every pruned pair with min(k_u, k_v)/k_max weighting.

    Vectorized counterpart of hierarchy_strength, evaluated once per pruned
    graph so that threshold sweeps reuse the scores.

    Raises:
        DomainError: If the pruned graph has no pairs.
    """
    if p.k_max == 0:
        raise DomainError("k_max must be >= 1 (the pruned graph has no pairs)")
    n_r = p.frequencies[p.rows]
    n_c = p.frequencies[p.cols]
    k = p.degrees
    weight = np.minimum(k[p.rows], k[p.cols]) / float(p.k_max)
    w = p.weights.astype(np.float64)
    alpha_rc = weight * (w / n_c - w / n_r)

    directed = n_r != n_c
    row_is_parent = n_r > n_c
    sources = np.where(row_is_parent, p.rows, p.cols)[directed]
    targets = np.where(row_is_parent, p.cols, p.rows)[directed]
    return ScoredPairs(
        tags=p.tags,
        sources=sources,
        targets=targets,
        alpha=np.abs(alpha_rc)[directed],
        z=p.z[directed],
        frequencies=p.frequencies,
        weights=p.weights[directed],
    )


class BackboneEdge(NamedTuple):
    """A directed backbone edge u -> v and the statistics behind it."""

    source: str
    target: str
    alpha: float
    z: float
    n_source: int
    n_target: int
    n_pair: int


@dataclass(frozen=True, eq=False)
class HierarchicalBackbone:
    """Weighted DAG of parent -> child tag edges.

    Attributes:
        edges: Backbone edges sorted by (source, target).
        parsimonious: Whether transitively implied edges were removed.
        removed: Edges removed by transitive reduction, kept for auditing.
        alpha_th: Threshold the backbone was built with, when known.
        z_th: Pruning threshold behind the backbone, when known.
    """

    edges: tuple[BackboneEdge, ...]
    parsimonious: bool = False
    removed: tuple[BackboneEdge, ...] = field(default=())
    alpha_th: float | None = None
    z_th: float | None = None

    def __len__(self) -> int:
        return len(self.edges)

    @property
    def n_edges(self) -> int:
        """Number of backbone edges."""
        return len(self.edges)

    def nodes(self) -> frozenset[str]:
        """Tags touched by at least one edge."""
        return frozenset(t for e in self.edges for t in (e.source, e.target))

    def edge_set(self) -> frozenset[tuple[str, str]]:
        """Edges as (source, target) pairs."""
        return frozenset((e.source, e.target) for e in self.edges)

    def to_networkx(self) -> nx.DiGraph:
        """The backbone as a DiGraph with edge attributes alpha, z, N_uv and
        node attribute N (tag frequency)."""
        graph = nx.DiGraph()
        for e in self.edges:
            graph.add_node(e.source, N=e.n_source)
            graph.add_node(e.target, N=e.n_target)
            graph.add_edge(e.source, e.target, alpha=e.alpha, z=e.z, N_uv=e.n_pair)
        return graph


def check_backbone(h: HierarchicalBackbone) -> None:
    """Verify the DAG invariants of a backbone.

    Raises:
        IntegrityError: If an edge does not strictly decrease tag frequency or
            the edges contain a directed cycle.
    """
    for e in h.edges:
        if e.n_source <= e.n_target:
            raise IntegrityError(
                f"edge {e.source} -> {e.target} does not decrease frequency "
                f"({e.n_source} <= {e.n_target})"
            )
    graph = h.to_networkx()
    if not nx.is_directed_acyclic_graph(graph):
        cycle = [u for u, _ in nx.find_cycle(graph)]
        raise IntegrityError("backbone contains a cycle", cycle=cycle)


def _validate_alpha_th(alpha_th: float) -> None:
    if not (math.isfinite(alpha_th) and alpha_th > 0):
        raise ConfigError(f"alpha_th must be a finite value > 0, got {alpha_th}")


def threshold_scores(
    scores: ScoredPairs, alpha_th: float, z_th: float | None = None
) -> HierarchicalBackbone:
    """Collect the scored pairs with alpha >= alpha_th into a backbone.

    Raises:
        ConfigError: If alpha_th <= 0.
        IntegrityError: If the result is not a DAG.
    """
    _validate_alpha_th(alpha_th)
    keep = np.flatnonzero(scores.alpha >= alpha_th)
    edges = sorted(
        BackboneEdge(
            source=scores.tags[scores.sources[i]],
            target=scores.tags[scores.targets[i]],
            alpha=float(scores.alpha[i]),
            z=float(scores.z[i]),
            n_source=int(scores.frequencies[scores.sources[i]]),
            n_target=int(scores.frequencies[scores.targets[i]]),
            n_pair=int(scores.weights[i]),
        )
        for i in keep.tolist()
    )
    backbone = HierarchicalBackbone(edges=tuple(edges), alpha_th=alpha_th, z_th=z_th)
    check_backbone(backbone)
    return backbone


def build_backbone(p: PrunedGraph, alpha_th: float) -> HierarchicalBackbone:
    """Build the hierarchical backbone of a pruned graph.

    Args:
        p: The pruned graph.
        alpha_th: Strength threshold; must be > 0 so that alpha = 0 ties
            between equally frequent tags never enter.

    Returns:
        The backbone; every edge u -> v has N(u) > N(v) and alpha >= alpha_th.

    Raises:
        ConfigError: If alpha_th <= 0.
        IntegrityError: If the acyclicity check fails.
    """
    _validate_alpha_th(alpha_th)
    if p.n_pairs == 0:
        warnings.warn(
            "pruned graph has no pairs; the backbone is empty",
            UserWarning,
            stacklevel=2,
        )
        return HierarchicalBackbone(edges=(), alpha_th=alpha_th, z_th=p.z_th)
    backbone = threshold_scores(score_pairs(p), alpha_th, z_th=p.z_th)
    logger.info("backbone alpha_th=%g: %d edges", alpha_th, backbone.n_edges)
    return backbone


def transitive_reduce(h: HierarchicalBackbone) -> HierarchicalBackbone:
    """Remove edges implied by longer paths (parsimonious backbone).

    The reduction is purely structural and unique for a DAG. Removed edges are
    appended to ``removed``.

    Raises:
        IntegrityError: If the backbone has a cycle.
    """
    graph = nx.DiGraph()
    graph.add_edges_from((e.source, e.target) for e in h.edges)
    if not nx.is_directed_acyclic_graph(graph):
        cycle = [u for u, _ in nx.find_cycle(graph)]
        raise IntegrityError("cannot reduce a graph with a cycle", cycle=cycle)

    reduced = nx.transitive_reduction(graph)
    kept = tuple(e for e in h.edges if reduced.has_edge(e.source, e.target))
    dropped = tuple(e for e in h.edges if not reduced.has_edge(e.source, e.target))
    logger.info("transitive reduction: kept %d, removed %d edges", len(kept), len(dropped))
    return replace(h, edges=kept, parsimonious=True, removed=h.removed + dropped)


def alpha_for_target_edges(p: PrunedGraph, target_edges: int) -> float:
    """Pick alpha_th so that the backbone has about ``target_edges`` edges.

    Returns the largest alpha_th giving at least ``target_edges`` edges (ties at
    the threshold can add a few more), or the smallest positive alpha when
    fewer pairs exist.

    Raises:
        ConfigError: If target_edges < 1.
        DomainError: If no pruned pair has a positive alpha.
    """
    if target_edges < 1:
        raise ConfigError(f"target_edges must be >= 1, got {target_edges}")
    alphas = score_pairs(p).alpha if p.n_pairs else np.zeros(0)
    alphas = np.sort(alphas[alphas > 0])
    if alphas.size == 0:
        raise DomainError("no pruned pair has a positive hierarchy strength")
    # alphas[i:] holds the edges kept at alpha_th = alphas[i]
    index = max(alphas.size - target_edges, 0)
    return float(alphas[index])


def extract_backbone(
    b: BipartiteGraph,
    z_th: float,
    alpha_th: float,
    *,
    parsimonious: bool = False,
) -> HierarchicalBackbone:
    """Run projection, pruning, backbone assembly and optional reduction.

    Example:
        >>> b = build_bipartite(pairs)  # doctest: +SKIP
        >>> extract_backbone(b, z_th=3.0, alpha_th=0.05, parsimonious=True)  # doctest: +SKIP
    """
    pruned = prune(project(b), z_th)
    backbone = build_backbone(pruned, alpha_th)
    return transitive_reduce(backbone) if parsimonious else backbone

"""Hierbone Graph Module.

Object-tag bipartite networks and their one-mode projection onto the tag side.

Identifiers are opaque strings. Internally both node sets are mapped to dense
integer codes (sorted identifier order), which keeps pair storage compact and
makes every derived array independent of the order edges were supplied in.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Iterator, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from typing import Any

import numpy as np
import pandas as pd
import scipy.sparse as sp

from hierbone.exceptions import ConfigError, EmptyInputError, IntegrityError, ParseError

logger = logging.getLogger(__name__)

IntArray = np.ndarray[Any, np.dtype[np.int64]]


def _identifier(value: object, record: int, role: str) -> str:
    if isinstance(value, bool) or not isinstance(value, (str, int, np.integer)):
        raise ParseError(f"{role} identifier must be a string, got {value!r}", record=record)
    text = str(value)
    if not text:
        raise ParseError(f"empty {role} identifier", record=record)
    return text


@dataclass(frozen=True, eq=False)
class BipartiteGraph:
    """A simple bipartite graph between objects and tags.

    Edges are stored as parallel code arrays sorted by (object, tag), with no
    duplicates. ``objects[i]`` and ``tags[j]`` give the identifiers behind the
    codes.

    Attributes:
        objects: Sorted distinct object identifiers.
        tags: Sorted distinct tag identifiers.
        object_codes: Object code of each edge.
        tag_codes: Tag code of each edge.
    """

    objects: tuple[str, ...]
    tags: tuple[str, ...]
    object_codes: IntArray
    tag_codes: IntArray

    @property
    def n_objects(self) -> int:
        """|O|, the number of objects."""
        return len(self.objects)

    @property
    def n_tags(self) -> int:
        """|T|, the number of tags."""
        return len(self.tags)

    @property
    def n_edges(self) -> int:
        """Number of object-tag edges."""
        return int(self.object_codes.size)

    @cached_property
    def tag_index(self) -> dict[str, int]:
        """Tag identifier -> dense code."""
        return {tag: i for i, tag in enumerate(self.tags)}

    def edges(self) -> Iterator[tuple[str, str]]:
        """Iterate over (object, tag) identifier pairs in code order."""
        for o, t in zip(self.object_codes.tolist(), self.tag_codes.tolist(), strict=True):
            yield self.objects[o], self.tags[t]

    def edge_set(self) -> frozenset[tuple[str, str]]:
        """All edges as a set of identifier pairs."""
        return frozenset(self.edges())

    def tag_frequencies(self) -> IntArray:
        """N(u) for every tag code: number of objects attached to the tag."""
        return np.bincount(self.tag_codes, minlength=self.n_tags).astype(np.int64)

    def object_degrees(self) -> IntArray:
        """Number of tags attached to every object code."""
        return np.bincount(self.object_codes, minlength=self.n_objects).astype(np.int64)

    def incidence(self) -> sp.csr_matrix:
        """Sparse |O| x |T| incidence matrix with unit entries."""
        data = np.ones(self.n_edges, dtype=np.int64)
        return sp.csr_matrix(
            (data, (self.object_codes, self.tag_codes)),
            shape=(self.n_objects, self.n_tags),
        )

    def swap(self) -> BipartiteGraph:
        """Exchange the roles of objects and tags.

        Projecting the swapped graph gives the object-side projection.
        """
        return _from_codes(self.tags, self.objects, self.tag_codes, self.object_codes)

    def restrict_min_tags(self, min_tags: int) -> BipartiteGraph:
        """Drop objects carrying fewer than ``min_tags`` tags.

        Tags left without any object are dropped too.

        Raises:
            ConfigError: If min_tags < 1.
            EmptyInputError: If no object survives.
        """
        if min_tags < 1:
            raise ConfigError(f"min_tags must be >= 1, got {min_tags}")
        keep = self.object_degrees()[self.object_codes] >= min_tags
        if not keep.any():
            raise EmptyInputError(f"empty graph: no object has at least {min_tags} tags")
        objects = np.asarray(self.objects, dtype=object)[self.object_codes[keep]]
        tags = np.asarray(self.tags, dtype=object)[self.tag_codes[keep]]
        restricted = from_columns(objects, tags)
        logger.info(
            "min_tags=%d kept %d/%d objects", min_tags, restricted.n_objects, self.n_objects
        )
        return restricted


def _from_codes(
    objects: Sequence[str],
    tags: Sequence[str],
    object_codes: IntArray,
    tag_codes: IntArray,
) -> BipartiteGraph:
    n_tags = max(len(tags), 1)
    keys = np.unique(object_codes.astype(np.int64) * n_tags + tag_codes.astype(np.int64))
    return BipartiteGraph(
        objects=tuple(objects),
        tags=tuple(tags),
        object_codes=(keys // n_tags).astype(np.int64),
        tag_codes=(keys % n_tags).astype(np.int64),
    )


def from_columns(objects: np.ndarray, tags: np.ndarray) -> BipartiteGraph:
    """Build a graph from two aligned arrays of identifiers.

    The identifiers are used as given (no validation); duplicates collapse.

    Raises:
        EmptyInputError: If the arrays are empty.
    """
    if len(objects) == 0:
        raise EmptyInputError("empty input")
    object_codes, object_ids = pd.factorize(objects, sort=True)
    tag_codes, tag_ids = pd.factorize(tags, sort=True)
    return _from_codes(
        [str(o) for o in object_ids],
        [str(t) for t in tag_ids],
        np.asarray(object_codes, dtype=np.int64),
        np.asarray(tag_codes, dtype=np.int64),
    )


def build_bipartite(edge_pairs: Iterable[Sequence[object]]) -> BipartiteGraph:
    """Build a bipartite graph from (object, tag) pairs.

    Duplicate pairs collapse to a single edge. Integer identifiers are
    accepted and converted to strings.

    Args:
        edge_pairs: Iterable of (object-id, tag-id) pairs.

    Returns:
        The bipartite graph.

    Raises:
        EmptyInputError: If there are no pairs.
        ParseError: If a pair is malformed; the message names its index.

    Example:
        >>> b = build_bipartite([(1, "u"), (1, "v"), (2, "u"), (2, "v"), (3, "u")])
        >>> b.n_objects, b.n_tags, b.n_edges
        (3, 2, 5)
    """
    objects: list[str] = []
    tags: list[str] = []
    for index, pair in enumerate(edge_pairs):
        if isinstance(pair, (str, bytes)) or not isinstance(pair, Sequence) or len(pair) != 2:
            raise ParseError(f"expected an (object, tag) pair, got {pair!r}", record=index)
        objects.append(_identifier(pair[0], index, "object"))
        tags.append(_identifier(pair[1], index, "tag"))
    graph = from_columns(np.asarray(objects, dtype=object), np.asarray(tags, dtype=object))
    logger.info(
        "bipartite graph: %d objects, %d tags, %d edges (%d duplicates collapsed)",
        graph.n_objects,
        graph.n_tags,
        graph.n_edges,
        len(objects) - graph.n_edges,
    )
    return graph


@dataclass(frozen=True, eq=False)
class CooccurrenceGraph:
    """One-mode projection of a bipartite graph onto its tags.

    Pairs are stored once per unordered tag pair with ``rows < cols`` (tag
    codes), sorted by (row, col), and only when N(u,v) >= 1.

    Attributes:
        tags: Tag identifiers; position is the tag code.
        n_objects: |O| of the source bipartite graph.
        frequencies: N(u) per tag code.
        rows: Smaller tag code of each pair.
        cols: Larger tag code of each pair.
        weights: N(u,v) of each pair.
    """

    tags: tuple[str, ...]
    n_objects: int
    frequencies: IntArray
    rows: IntArray
    cols: IntArray
    weights: IntArray

    @property
    def n_pairs(self) -> int:
        """Number of stored tag pairs."""
        return int(self.weights.size)

    @cached_property
    def tag_index(self) -> dict[str, int]:
        """Tag identifier -> code."""
        return {tag: i for i, tag in enumerate(self.tags)}

    @cached_property
    def _pair_lookup(self) -> dict[tuple[int, int], int]:
        return {
            (r, c): w
            for r, c, w in zip(
                self.rows.tolist(), self.cols.tolist(), self.weights.tolist(), strict=True
            )
        }

    def frequency(self, tag: str) -> int:
        """N(u) for a tag identifier; 0 for unknown tags."""
        code = self.tag_index.get(tag)
        return 0 if code is None else int(self.frequencies[code])

    def weight(self, u: str, v: str) -> int:
        """N(u,v); symmetric in its arguments, 0 when the tags never co-occur."""
        iu, iv = self.tag_index.get(u), self.tag_index.get(v)
        if iu is None or iv is None or iu == iv:
            return 0
        key = (iu, iv) if iu < iv else (iv, iu)
        return self._pair_lookup.get(key, 0)

    def pairs(self) -> Iterator[tuple[str, str, int]]:
        """Iterate over (u, v, N(u,v)) with u before v in tag-code order."""
        for r, c, w in zip(
            self.rows.tolist(), self.cols.tolist(), self.weights.tolist(), strict=True
        ):
            yield self.tags[r], self.tags[c], w

    def to_frame(self) -> pd.DataFrame:
        """Pairs as a DataFrame with columns u, v, N_u, N_v, N_uv."""
        tags = np.asarray(self.tags, dtype=object)
        return pd.DataFrame(
            {
                "u": tags[self.rows],
                "v": tags[self.cols],
                "N_u": self.frequencies[self.rows],
                "N_v": self.frequencies[self.cols],
                "N_uv": self.weights,
            }
        )

    @classmethod
    def from_frame(cls, frame: pd.DataFrame, n_objects: int) -> CooccurrenceGraph:
        """Rebuild a projection from its ``to_frame`` form.

        Only tags appearing in at least one pair are recovered.

        Raises:
            IntegrityError: If a stored pair breaks 0 < N(u,v) <= min(N(u), N(v))
                or a tag is given two different frequencies.
        """
        u = frame["u"].astype(str).to_numpy(dtype=object)
        v = frame["v"].astype(str).to_numpy(dtype=object)
        n_u = frame["N_u"].to_numpy(dtype=np.int64)
        n_v = frame["N_v"].to_numpy(dtype=np.int64)
        n_uv = frame["N_uv"].to_numpy(dtype=np.int64)

        codes, tag_ids = pd.factorize(np.concatenate([u, v]), sort=True)
        codes = np.asarray(codes, dtype=np.int64)
        cu, cv = codes[: len(u)], codes[len(u) :]
        frequencies = np.zeros(len(tag_ids), dtype=np.int64)
        frequencies[cu] = n_u
        frequencies[cv] = n_v
        if np.any(frequencies[cu] != n_u) or np.any(frequencies[cv] != n_v):
            raise IntegrityError("inconsistent tag frequencies in co-occurrence table")
        if np.any(n_uv < 1) or np.any(n_uv > np.minimum(n_u, n_v)) or np.any(cu == cv):
            raise IntegrityError("co-occurrence table violates 0 < N(u,v) <= min(N(u), N(v))")
        if np.any(frequencies > n_objects):
            raise IntegrityError(f"tag frequency exceeds n_objects={n_objects}")

        rows, cols = np.minimum(cu, cv), np.maximum(cu, cv)
        order = np.lexsort((cols, rows))
        return cls(
            tags=tuple(str(t) for t in tag_ids),
            n_objects=n_objects,
            frequencies=frequencies,
            rows=rows[order],
            cols=cols[order],
            weights=n_uv[order],
        )


def _gram(chunk: sp.csr_matrix) -> sp.csr_matrix:
    return (chunk.T @ chunk).tocsr()


def project(
    b: BipartiteGraph, *, n_workers: int = 1, chunk_size: int = 50_000
) -> CooccurrenceGraph:
    """Project a bipartite graph onto its tags.

    Counts are accumulated object by object through the sparse product
    ``I^T I`` of the incidence matrix, so the cost follows the sum of squared
    object degrees rather than |T|^2. With ``n_workers > 1`` objects are split
    into row blocks whose partial integer counts are summed, which gives the
    same result as the sequential product.

    Args:
        b: The bipartite graph.
        n_workers: Number of threads used for the partial products.
        chunk_size: Objects per block when running in parallel.

    Returns:
        The co-occurrence graph G.

    Example:
        >>> g = project(build_bipartite([(1, "u"), (1, "v"), (2, "u"), (2, "v"), (3, "u")]))
        >>> g.frequency("u"), g.frequency("v"), g.weight("u", "v")
        (3, 2, 2)
    """
    if n_workers < 1:
        raise ConfigError(f"n_workers must be >= 1, got {n_workers}")
    if chunk_size < 1:
        raise ConfigError(f"chunk_size must be >= 1, got {chunk_size}")

    incidence = b.incidence()
    if n_workers == 1 or b.n_objects <= chunk_size:
        gram = _gram(incidence)
    else:
        blocks = [
            incidence[start : start + chunk_size]
            for start in range(0, b.n_objects, chunk_size)
        ]
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            partials = list(pool.map(_gram, blocks))
        gram = partials[0]
        for partial in partials[1:]:
            gram = gram + partial

    upper = sp.triu(gram, k=1).tocoo()
    rows = upper.row.astype(np.int64)
    cols = upper.col.astype(np.int64)
    weights = upper.data.astype(np.int64)
    present = weights > 0
    rows, cols, weights = rows[present], cols[present], weights[present]
    order = np.lexsort((cols, rows))

    g = CooccurrenceGraph(
        tags=b.tags,
        n_objects=b.n_objects,
        frequencies=b.tag_frequencies(),
        rows=rows[order],
        cols=cols[order],
        weights=weights[order],
    )
    logger.info("projection: %d tags, %d co-occurring pairs", b.n_tags, g.n_pairs)
    return g

"""Hierbone Ingest Module.

Parsers for the inputs the pipeline consumes:

- generic delimited object-tag files (one edge per row);
- Gene Ontology OBO files, reduced to the term hierarchy;
- GAF 2.x annotation files, merged across species into a bipartite graph;
- reference hierarchy edge lists (``parent<TAB>child``).
"""

from __future__ import annotations

import csv
import gzip
import logging
import warnings
from collections.abc import Collection, Iterable, Iterator, Mapping, Sequence
from functools import cached_property
from pathlib import Path
from typing import IO, Literal

import networkx as nx
import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from hierbone.exceptions import (
    ConfigError,
    EmptyInputError,
    InputOutputError,
    IntegrityError,
    ParseError,
)
from hierbone.graph import BipartiteGraph, build_bipartite, from_columns
from hierbone.namespaces import (
    DEFAULT_RELATIONS,
    HIERARCHY_RELATIONS,
    NAMESPACE_BY_ASPECT,
    NAMESPACES,
    normalize_namespace,
)

logger = logging.getLogger(__name__)

# CURIE-style identifier, e.g. GO:0003674
TERM_ID_PATTERN = r"^[A-Za-z][A-Za-z0-9_.-]*:\S+$"

# GAF 2.x has 17 columns; trailing optional columns are sometimes cut
GAF_MIN_COLUMNS = 15
GAF_MAX_COLUMNS = 17

SPECIES_SEPARATOR = "|"

Aspect = Literal["P", "C", "F"]


# =============================================================================
# Models
# =============================================================================


class OntologyTerm(BaseModel):
    """A term of an OBO ontology.

    Attributes:
        id: Term identifier (e.g. GO:0003674).
        name: Human-readable label.
        namespace: One of the GO namespaces; may be missing on obsolete terms.
        obsolete: Whether the term is marked ``is_obsolete: true``.
        parents: (relation, parent-id) pairs declared in the stanza.
    """

    model_config = ConfigDict(frozen=True)

    id: str = Field(min_length=1)
    name: str = ""
    namespace: str | None = None
    obsolete: bool = False
    parents: tuple[tuple[str, str], ...] = ()

    @model_validator(mode="after")
    def _namespace_required(self) -> OntologyTerm:
        if self.namespace is None and not self.obsolete:
            raise ValueError(f"term {self.id} has no namespace")
        if self.namespace is not None and self.namespace not in NAMESPACES:
            raise ValueError(f"term {self.id} has unknown namespace '{self.namespace}'")
        return self


class AnnotationRecord(BaseModel):
    """One gene-product annotation from a GAF file.

    Attributes:
        product_id: DB object id (GAF column 2).
        term_id: GO term id (GAF column 5).
        aspect: P, C or F (GAF column 9).
        species: Species label of the source file.
        evidence: Evidence code (GAF column 7).
    """

    model_config = ConfigDict(frozen=True)

    product_id: str = Field(min_length=1)
    term_id: str = Field(pattern=TERM_ID_PATTERN)
    aspect: Aspect
    species: str = Field(min_length=1)
    evidence: str = ""

    @property
    def namespace(self) -> str:
        """Namespace named by the aspect letter."""
        return NAMESPACE_BY_ASPECT[self.aspect]


# =============================================================================
# Reference hierarchy
# =============================================================================


class ReferenceHierarchy:
    """Ground-truth DAG of parent -> child term edges.

    Construction verifies that every edge endpoint is a known node and that
    the graph is acyclic.

    Args:
        nodes: Term identifiers.
        edges: (parent, child) or (parent, child, relation) tuples.

    Raises:
        IntegrityError: On an unknown endpoint or a directed cycle.
    """

    def __init__(
        self,
        nodes: Iterable[str],
        edges: Iterable[tuple[str, str] | tuple[str, str, str]],
    ) -> None:
        graph = nx.DiGraph()
        graph.add_nodes_from(nodes)
        for edge in edges:
            parent, child = edge[0], edge[1]
            relation = edge[2] if len(edge) > 2 else "is_a"  # noqa: PLR2004
            for endpoint in (parent, child):
                if endpoint not in graph:
                    raise IntegrityError(
                        f"edge {parent} -> {child} has unknown endpoint {endpoint}"
                    )
            if not graph.has_edge(parent, child):
                graph.add_edge(parent, child, relation=relation)
        if not nx.is_directed_acyclic_graph(graph):
            cycle = [u for u, _ in nx.find_cycle(graph)]
            raise IntegrityError("reference hierarchy contains a cycle", cycle=cycle)
        self.graph: nx.DiGraph = graph

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[str, str]]) -> ReferenceHierarchy:
        """Hierarchy whose nodes are the endpoints of the given edges."""
        edge_list = list(edges)
        nodes = {t for e in edge_list for t in e[:2]}
        return cls(nodes, edge_list)

    def __repr__(self) -> str:
        return f"ReferenceHierarchy(n_nodes={self.n_nodes}, n_edges={self.n_edges})"

    @property
    def n_nodes(self) -> int:
        """Number of terms."""
        return int(self.graph.number_of_nodes())

    @property
    def n_edges(self) -> int:
        """Number of parent -> child edges."""
        return int(self.graph.number_of_edges())

    @cached_property
    def nodes(self) -> frozenset[str]:
        """Term identifiers."""
        return frozenset(self.graph.nodes)

    @cached_property
    def edges(self) -> frozenset[tuple[str, str]]:
        """(parent, child) pairs."""
        return frozenset(self.graph.edges)

    def relation(self, parent: str, child: str) -> str:
        """Relation label of an edge."""
        return str(self.graph.edges[parent, child]["relation"])

    @cached_property
    def descendants(self) -> dict[str, frozenset[str]]:
        """Transitive closure: every node -> nodes reachable by a path of length >= 1.

        Computed once per hierarchy in reverse topological order.
        """
        closure: dict[str, frozenset[str]] = {}
        for node in reversed(list(nx.topological_sort(self.graph))):
            reach: set[str] = set()
            for child in self.graph.successors(node):
                reach.add(child)
                reach |= closure[child]
            closure[node] = frozenset(reach)
        return closure

    @cached_property
    def n_closure_pairs(self) -> int:
        """Number of ordered pairs (u, v) with a directed path u ~> v."""
        return sum(len(reach) for reach in self.descendants.values())

    def reaches(self, source: str, target: str) -> bool:
        """Whether a directed path of length >= 1 leads from source to target."""
        return target in self.descendants.get(source, frozenset())

    def subgraph(self, nodes: Collection[str]) -> ReferenceHierarchy:
        """Hierarchy induced on a subset of the nodes."""
        keep = set(nodes) & self.nodes
        edges = [
            (u, v, self.relation(u, v)) for u, v in self.graph.edges if u in keep and v in keep
        ]
        return ReferenceHierarchy(sorted(keep), edges)

    def to_tsv(self) -> str:
        """Edges as sorted ``parent<TAB>child`` lines."""
        return "".join(f"{parent}\t{child}\n" for parent, child in sorted(self.edges))

    def write_tsv(self, path: str | Path) -> None:
        """Write the edges as ``parent<TAB>child`` lines, sorted."""
        path = Path(path)
        try:
            with path.open("w", encoding="utf-8", newline="\n") as handle:
                handle.write(self.to_tsv())
        except OSError as e:
            raise InputOutputError("cannot write reference hierarchy", path=path) from e


def read_reference_tsv(path: str | Path) -> ReferenceHierarchy:
    """Load a reference hierarchy from a ``parent<TAB>child`` edge list.

    Lines starting with ``#`` are ignored, as is a literal ``parent child``
    header. A third column, when present, is taken as the relation label.

    Raises:
        InputOutputError: If the file cannot be read.
        EmptyInputError: If it holds no edge.
        ParseError: If a line has fewer than two fields.
        IntegrityError: If the edges contain a cycle.
    """
    path = Path(path)
    edges: list[tuple[str, str, str]] = []
    with _open_text(path) as handle:
        for number, line in enumerate(handle, start=1):
            text = line.rstrip("\n").rstrip("\r")
            if not text or text.startswith("#"):
                continue
            fields = text.split("\t")
            if len(fields) < 2 or not fields[0] or not fields[1]:  # noqa: PLR2004
                raise ParseError("expected parent<TAB>child", line=number, path=path)
            if not edges and fields[:2] == ["parent", "child"]:
                continue
            relation = fields[2] if len(fields) > 2 and fields[2] else "is_a"  # noqa: PLR2004
            edges.append((fields[0], fields[1], relation))
    if not edges:
        raise EmptyInputError(f"empty input: {path}")
    hierarchy = ReferenceHierarchy({t for e in edges for t in e[:2]}, edges)
    logger.info("reference %s: %d nodes, %d edges", path, hierarchy.n_nodes, hierarchy.n_edges)
    return hierarchy


# =============================================================================
# Generic delimited bipartite files
# =============================================================================


def _resolve_column(frame: pd.DataFrame, column: int | str, header: bool) -> object:
    if isinstance(column, int):
        if not 0 <= column < frame.shape[1]:
            raise ConfigError(
                f"column index {column} out of range; file has {frame.shape[1]} columns"
            )
        return frame.columns[column]
    if not header:
        raise ConfigError(f"column '{column}' given by name but the file has no header")
    if column not in frame.columns:
        raise ConfigError(f"missing column '{column}'; columns: {list(frame.columns)}")
    return column


def parse_tsv_bipartite(
    path: str | Path,
    object_column: int | str = 0,
    tag_column: int | str = 1,
    delimiter: str = "\t",
    *,
    header: bool = False,
    min_tags: int = 1,
) -> BipartiteGraph:
    """Read an object-tag bipartite graph from a delimited UTF-8 file.

    Args:
        path: Input file.
        object_column: Object column, by 0-based index or header name.
        tag_column: Tag column, by 0-based index or header name.
        delimiter: Field separator.
        header: Whether the first row is a header.
        min_tags: Drop objects with fewer tags than this.

    Returns:
        The bipartite graph, one edge per distinct data row.

    Raises:
        InputOutputError: If the file cannot be read.
        EmptyInputError: If the file holds no data row.
        ConfigError: If a column does not exist.
        ParseError: If a row lacks an identifier.
    """
    path = Path(path)
    if not path.is_file():
        raise InputOutputError("cannot read bipartite file", path=path)
    try:
        frame = pd.read_csv(
            path,
            sep=delimiter,
            header=0 if header else None,
            dtype=str,
            keep_default_na=False,
            quoting=csv.QUOTE_NONE,
            encoding="utf-8",
        )
    except pd.errors.EmptyDataError as e:
        raise EmptyInputError(f"empty input: {path}") from e
    except pd.errors.ParserError as e:
        raise ParseError(str(e), path=path) from e
    except (OSError, UnicodeDecodeError) as e:
        raise InputOutputError(f"cannot read bipartite file ({e})", path=path) from e

    if frame.empty:
        raise EmptyInputError(f"empty input: {path}")
    objects = frame[_resolve_column(frame, object_column, header)]
    tags = frame[_resolve_column(frame, tag_column, header)]
    missing = (objects.isna() | (objects == "")) | (tags.isna() | (tags == ""))
    if missing.any():
        record = int(np.flatnonzero(missing.to_numpy())[0])
        raise ParseError("missing object or tag identifier", record=record, path=path)

    graph = from_columns(objects.to_numpy(dtype=object), tags.to_numpy(dtype=object))
    logger.info(
        "%s: %d rows -> %d objects, %d tags, %d edges",
        path,
        len(frame),
        graph.n_objects,
        graph.n_tags,
        graph.n_edges,
    )
    return graph.restrict_min_tags(min_tags) if min_tags > 1 else graph


# =============================================================================
# OBO
# =============================================================================


def _open_text(path: Path) -> IO[str]:
    try:
        if path.suffix == ".gz":
            return gzip.open(path, "rt", encoding="utf-8")
        return path.open(encoding="utf-8")
    except OSError as e:
        raise InputOutputError(f"cannot read file ({e.strerror})", path=path) from e


def _strip_value(value: str) -> str:
    """Drop trailing ``! comment`` and ``{qualifier}`` blocks of an OBO value."""
    if " !" in value:
        value = value.split(" !", 1)[0]
    if value.endswith("}") and "{" in value:
        value = value[: value.rfind("{")]
    return value.strip()


def _iter_stanzas(path: Path) -> Iterator[tuple[int, str, list[tuple[str, str]]]]:
    """Yield (first line number, stanza type, [(tag, value)]) for every stanza."""
    kind = ""
    start = 0
    lines: list[tuple[str, str]] = []
    with _open_text(path) as handle:
        for number, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line or line.startswith("!"):
                continue
            if line.startswith("[") and line.endswith("]"):
                if kind:
                    yield start, kind, lines
                kind, start, lines = line[1:-1], number, []
                continue
            if not kind:
                continue  # header
            tag, sep, value = line.partition(":")
            if not sep:
                raise ParseError(f"expected 'tag: value', got {line!r}", line=number, path=path)
            lines.append((tag.strip(), _strip_value(value)))
    if kind:
        yield start, kind, lines


def _term_from_stanza(
    path: Path, start: int, lines: Sequence[tuple[str, str]]
) -> OntologyTerm:
    values: dict[str, object] = {"name": "", "obsolete": False}
    parents: list[tuple[str, str]] = []
    for tag, value in lines:
        if tag == "id":
            values["id"] = value
        elif tag == "name":
            values["name"] = value
        elif tag == "namespace":
            values["namespace"] = value
        elif tag == "is_obsolete":
            values["obsolete"] = value.lower() == "true"
        elif tag == "is_a":
            parents.append(("is_a", value))
        elif tag == "relationship":
            parts = value.split()
            if len(parts) < 2:  # noqa: PLR2004
                raise ParseError(f"malformed relationship {value!r}", line=start, path=path)
            parents.append((parts[0], parts[1]))
    try:
        return OntologyTerm(parents=tuple(parents), **values)  # type: ignore[arg-type]
    except ValidationError as e:
        raise ParseError(f"invalid [Term] stanza: {e}", line=start, path=path) from e


def parse_obo(
    path: str | Path,
    relations: Collection[str] = DEFAULT_RELATIONS,
    namespace: str | None = None,
) -> tuple[list[OntologyTerm], ReferenceHierarchy]:
    """Parse the term hierarchy of an OBO 1.2 file.

    Only ``[Term]`` stanzas and their id, name, namespace, is_a,
    relationship and is_obsolete lines are read. An ``is_a: P`` line in the
    stanza of C yields the edge P -> C. Obsolete terms, terms outside the
    namespace filter and edges touching either are dropped.

    Args:
        path: OBO file (optionally gzip-compressed).
        relations: Relation types that form edges; is_a and part_of by default.
        namespace: Keep only terms of this namespace (alias or full name).

    Returns:
        The parsed terms (of the selected namespace, obsolete ones included and
        flagged) and the reference hierarchy.

    Raises:
        ConfigError: On an unknown relation or namespace.
        ParseError: On a malformed stanza.
        IntegrityError: On a duplicate id, an unknown edge endpoint or a cycle.
    """
    path = Path(path)
    selected = frozenset(relations)
    unknown = selected - HIERARCHY_RELATIONS
    if unknown or not selected:
        raise ConfigError(
            f"unsupported relations {sorted(unknown)}; choose from "
            f"{sorted(HIERARCHY_RELATIONS)}"
        )
    try:
        wanted = normalize_namespace(namespace) if namespace else None
    except KeyError as e:
        raise ConfigError(str(e.args[0])) from e

    terms: dict[str, OntologyTerm] = {}
    for start, kind, lines in _iter_stanzas(path):
        if kind != "Term":
            continue
        term = _term_from_stanza(path, start, lines)
        if term.id in terms:
            raise IntegrityError(f"duplicate term id {term.id} (line {start})")
        terms[term.id] = term

    kept = {
        term_id
        for term_id, term in terms.items()
        if not term.obsolete and (wanted is None or term.namespace == wanted)
    }
    edges: list[tuple[str, str, str]] = []
    for child in sorted(kept):
        for relation, parent in terms[child].parents:
            if relation not in selected:
                continue
            if parent not in terms:
                raise IntegrityError(f"edge {parent} -> {child} has unknown endpoint {parent}")
            if parent in kept:
                edges.append((parent, child, relation))
            else:
                logger.debug("drop edge %s -> %s: parent filtered out", parent, child)

    hierarchy = ReferenceHierarchy(sorted(kept), edges)
    selected_terms = [
        terms[t] for t in sorted(terms) if wanted is None or terms[t].namespace == wanted
    ]
    logger.info(
        "%s: %d terms parsed, hierarchy %d nodes / %d edges",
        path,
        len(terms),
        hierarchy.n_nodes,
        hierarchy.n_edges,
    )
    return selected_terms, hierarchy


# =============================================================================
# GAF
# =============================================================================


def parse_gaf(
    path: str | Path,
    species: str | None = None,
    *,
    evidence_include: Collection[str] | None = None,
    evidence_exclude: Collection[str] | None = None,
) -> list[AnnotationRecord]:
    """Parse a GAF 2.x annotation file.

    Comment lines (``!``) and blank lines are skipped. Rows whose qualifier
    contains NOT are dropped. Evidence codes are not filtered unless an
    include or exclude set is given.

    Args:
        path: GAF file (optionally gzip-compressed).
        species: Species label; defaults to the file name without suffixes.
        evidence_include: Keep only these evidence codes.
        evidence_exclude: Drop these evidence codes.

    Returns:
        Annotation records in file order.

    Raises:
        InputOutputError: If the file cannot be read.
        ParseError: On a wrong column count or invalid field, with line number.
    """
    path = Path(path)
    label = species or path.name.split(".")[0]
    include = frozenset(evidence_include) if evidence_include is not None else None
    exclude = frozenset(evidence_exclude or ())

    records: list[AnnotationRecord] = []
    skipped_not = skipped_evidence = 0
    with _open_text(path) as handle:
        for number, line in enumerate(handle, start=1):
            text = line.rstrip("\n").rstrip("\r")
            if not text.strip() or text.startswith("!"):
                continue
            columns = text.split("\t")
            if not GAF_MIN_COLUMNS <= len(columns) <= GAF_MAX_COLUMNS:
                raise ParseError(
                    f"expected {GAF_MAX_COLUMNS} tab-separated columns, got {len(columns)}",
                    line=number,
                    path=path,
                )
            if "NOT" in columns[3].split("|"):
                skipped_not += 1
                continue
            evidence = columns[6]
            if (include is not None and evidence not in include) or evidence in exclude:
                skipped_evidence += 1
                continue
            try:
                records.append(
                    AnnotationRecord(
                        product_id=columns[1],
                        term_id=columns[4],
                        aspect=columns[8],  # type: ignore[arg-type]
                        species=label,
                        evidence=evidence,
                    )
                )
            except ValidationError as e:
                raise ParseError(f"invalid annotation: {e}", line=number, path=path) from e

    logger.info(
        "%s: %d annotations (%d NOT rows, %d by evidence filter skipped)",
        path,
        len(records),
        skipped_not,
        skipped_evidence,
    )
    return records


def merge_annotations(
    record_lists: Mapping[str, Sequence[AnnotationRecord]],
    namespace: str | None = None,
    *,
    terms: Iterable[OntologyTerm] | None = None,
) -> BipartiteGraph:
    """Merge per-species annotation lists into one product-term bipartite graph.

    Objects are keyed ``<species>|<product-id>`` so identical product ids from
    different species stay distinct. Species are merged in sorted order.

    Args:
        record_lists: Species label -> annotation records.
        namespace: Keep only annotations of this namespace (alias or full name).
        terms: Ontology terms; when given, records whose aspect contradicts the
            term's namespace are dropped with a warning.

    Returns:
        The gene-product / term bipartite graph.

    Raises:
        EmptyInputError: If there is nothing to merge or nothing survives the filters.
        ConfigError: On an unknown namespace.
    """
    if not record_lists:
        raise EmptyInputError("empty merge: no annotation lists")
    try:
        wanted = normalize_namespace(namespace) if namespace else None
    except KeyError as e:
        raise ConfigError(str(e.args[0])) from e
    term_namespace = {t.id: t.namespace for t in terms} if terms is not None else {}

    pairs: list[tuple[str, str]] = []
    inconsistent = 0
    for species in sorted(record_lists):
        for record in record_lists[species]:
            if wanted is not None and record.namespace != wanted:
                continue
            known = term_namespace.get(record.term_id)
            if known is not None and known != record.namespace:
                inconsistent += 1
                continue
            pairs.append((f"{species}{SPECIES_SEPARATOR}{record.product_id}", record.term_id))
    if inconsistent:
        warnings.warn(
            f"dropped {inconsistent} annotations whose aspect contradicts the "
            "term namespace",
            UserWarning,
            stacklevel=2,
        )
    if not pairs:
        raise EmptyInputError(
            f"empty graph: no annotations left after filtering to namespace {wanted}"
        )
    return build_bipartite(pairs)


def summarize_annotations(
    record_lists: Mapping[str, Sequence[AnnotationRecord]],
) -> pd.DataFrame:
    """Per-species counts of gene products, annotations and distinct terms.

    Returns:
        DataFrame with columns species, gene_products, annotations, terms,
        sorted by species.
    """
    rows = [
        {
            "species": species,
            "gene_products": len({r.product_id for r in records}),
            "annotations": len({(r.product_id, r.term_id) for r in records}),
            "terms": len({r.term_id for r in records}),
        }
        for species, records in sorted(record_lists.items())
    ]
    return pd.DataFrame(rows, columns=["species", "gene_products", "annotations", "terms"])

"""Hierbone - hierarchical backbones of object-tag bipartite networks.

Tags that annotate the same objects (GO terms on gene products, skills on
profiles) co-occur. This library turns those co-occurrences into a sparse
directed acyclic "backbone" of parent -> child tag relations.

Key Features:
- Projection: sparse one-mode projection of an object-tag graph onto its tags
- Pruning: hypergeometric z-score filter on co-occurrence counts
- Backbone: degree-weighted asymmetric conditional probabilities, always a DAG
- Parsimony: optional transitive reduction with an audit of removed edges
- Benchmarks: seeded random-walk networks planted on a reference hierarchy
- Evaluation: edge- and path-based precision, recall and false-positive rate
"""

from hierbone.artifacts import export_dot, read_backbone, write_backbone
from hierbone.backbone import (
    BackboneEdge,
    Direction,
    HierarchicalBackbone,
    HierarchyStrength,
    PrunedGraph,
    alpha_for_target_edges,
    build_backbone,
    cooccurrence_moments,
    extract_backbone,
    hierarchy_strength,
    prune,
    score_pairs,
    transitive_reduce,
)
from hierbone.benchgen import (
    balanced_tree,
    generate,
    generate_ensemble,
    random_hierarchy,
)
from hierbone.config import BenchmarkConfig, PipelineConfig
from hierbone.context import (
    clear_artifact_registry,
    get_artifact_registry,
    get_stage,
    pipeline_stage,
)
from hierbone.evaluate import (
    EvalReport,
    aggregate_reports,
    score,
    score_edges,
    score_paths,
    sweep,
)
from hierbone.exceptions import (
    ConfigError,
    DomainError,
    EmptyInputError,
    HierboneError,
    InputOutputError,
    IntegrityError,
    ParseError,
    StageError,
)
from hierbone.graph import BipartiteGraph, CooccurrenceGraph, build_bipartite, project
from hierbone.ingest import (
    AnnotationRecord,
    OntologyTerm,
    ReferenceHierarchy,
    merge_annotations,
    parse_gaf,
    parse_obo,
    parse_tsv_bipartite,
    read_reference_tsv,
    summarize_annotations,
)

__version__ = "0.1.0"

__all__ = [
    # Graphs
    "BipartiteGraph",
    "CooccurrenceGraph",
    "build_bipartite",
    "project",
    # Ingest
    "AnnotationRecord",
    "OntologyTerm",
    "ReferenceHierarchy",
    "merge_annotations",
    "parse_gaf",
    "parse_obo",
    "parse_tsv_bipartite",
    "read_reference_tsv",
    "summarize_annotations",
    # Backbone
    "BackboneEdge",
    "Direction",
    "HierarchicalBackbone",
    "HierarchyStrength",
    "PrunedGraph",
    "alpha_for_target_edges",
    "build_backbone",
    "cooccurrence_moments",
    "extract_backbone",
    "hierarchy_strength",
    "prune",
    "score_pairs",
    "transitive_reduce",
    # Files
    "export_dot",
    "read_backbone",
    "write_backbone",
    # Benchmarks
    "BenchmarkConfig",
    "balanced_tree",
    "generate",
    "generate_ensemble",
    "random_hierarchy",
    # Evaluation
    "EvalReport",
    "aggregate_reports",
    "score",
    "score_edges",
    "score_paths",
    "sweep",
    # Configuration and context
    "PipelineConfig",
    "clear_artifact_registry",
    "get_artifact_registry",
    "get_stage",
    "pipeline_stage",
    # Exceptions
    "ConfigError",
    "DomainError",
    "EmptyInputError",
    "HierboneError",
    "InputOutputError",
    "IntegrityError",
    "ParseError",
    "StageError",
]

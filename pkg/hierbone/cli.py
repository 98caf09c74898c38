"""CLI for hierbone backbone extraction and benchmark evaluation.

Every subcommand writes its files atomically into ``--out-dir`` together with
``<command>.manifest.json``, which records the effective configuration, the
sha256 digest of every input and output file, and the library versions. If a
command fails, the files it already published are removed and files it
overwrote get their previous content back.

Stage commands consume the previous stage's file so a run can be resumed:

    project -> cooccurrence.tsv -> prune -> pruned.tsv -> backbone -> backbone.tsv
    backbone.tsv -> reduce | export | eval --backbone

``pipeline`` runs project, prune, backbone and (optionally) reduce in one go;
``eval`` without ``--backbone`` generates benchmark ensembles on a reference
hierarchy and scores them over an alpha grid.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from collections.abc import Callable, Iterable, Sequence
from pathlib import Path
from typing import Any

import networkx as nx
import numpy as np
import pandas as pd
import pydantic
import scipy
from pydantic import ValidationError

from hierbone import __version__
from hierbone.artifacts import (
    commit_artifacts,
    export_dot,
    read_backbone,
    read_cooccurrence,
    read_pruned,
    rollback_artifacts,
    sha256_file,
    write_backbone,
    write_bipartite,
    write_cooccurrence,
    write_frame_csv,
    write_manifest,
    write_pruned,
    write_reference,
    write_removed,
    write_reports_csv,
    write_reports_jsonl,
)
from hierbone.backbone import (
    HierarchicalBackbone,
    PrunedGraph,
    alpha_for_target_edges,
    build_backbone,
    prune,
    transitive_reduce,
)
from hierbone.benchgen import balanced_tree, generate_ensemble
from hierbone.config import GoInput, PipelineConfig, RunManifest, TsvInput
from hierbone.context import (
    clear_artifact_registry,
    get_artifact_registry,
    pipeline_stage,
)
from hierbone.evaluate import EvalReport, aggregate_reports, score, sweep
from hierbone.exceptions import ConfigError, DomainError, HierboneError
from hierbone.graph import BipartiteGraph, project
from hierbone.ingest import (
    ReferenceHierarchy,
    merge_annotations,
    parse_gaf,
    parse_obo,
    parse_tsv_bipartite,
    read_reference_tsv,
    summarize_annotations,
)

logger = logging.getLogger(__name__)

DEFAULT_ALPHA_GRID = (
    0.001, 0.002, 0.005, 0.01, 0.02, 0.03, 0.05, 0.075, 0.1, 0.15, 0.2, 0.3, 0.5,
)

# CLI flag -> PipelineConfig field
CONFIG_FLAGS = {
    "z_th": "z_th",
    "alpha_th": "alpha_th",
    "alpha_grid": "alpha_grid",
    "target_edges": "target_edges",
    "parsimonious": "parsimonious",
    "namespace": "namespace",
    "relations": "relations",
    "seed": "seed",
    "out_dir": "out_dir",
    "ensembles": "n_ensembles",
    "n_products": "n_products",
    "p_rw": "p_rw",
    "mode": "modes",
    "reference": "reference",
    "planted_tree": "planted_tree",
    "restrict_to_observed": "restrict_to_observed",
    "workers": "workers",
}

ALPHA_FIELDS = ("alpha_th", "alpha_grid", "target_edges")

# commands whose --input is raw data rather than a stage file
INPUT_COMMANDS = frozenset({"project", "pipeline"})


# =============================================================================
# Configuration
# =============================================================================


def _column(value: str) -> int | str:
    return int(value) if value.isdigit() else value


def _planted_tree(value: str) -> tuple[int, int]:
    try:
        branching, depth = (int(part) for part in value.split(","))
    except ValueError as e:
        raise argparse.ArgumentTypeError(
            f"expected BRANCHING,DEPTH (e.g. 3,3), got {value!r}"
        ) from e
    return branching, depth


def _species_label(path: str) -> str:
    return Path(path).name.split(".")[0]


def _input_spec(args: argparse.Namespace) -> dict[str, Any] | None:
    """Input section of the config from --input/--format and friends."""
    paths = getattr(args, "input", None)
    if args.command not in INPUT_COMMANDS or not paths:
        return None
    if (args.format or "tsv") == "tsv":
        if len(paths) != 1:
            raise ConfigError("tsv input takes exactly one --input file")
        spec: dict[str, Any] = {"format": "tsv", "path": paths[0]}
        for key in ("object_column", "tag_column", "delimiter", "header", "min_tags"):
            if getattr(args, key, None) is not None:
                spec[key] = getattr(args, key)
        return spec

    gaf: dict[str, str] = {}
    for path in paths:
        label = _species_label(path)
        if label in gaf:
            raise ConfigError(f"two GAF files share the species label '{label}'")
        gaf[label] = path
    spec = {"format": "obo+gaf", "gaf": gaf}
    for key in ("obo", "evidence_exclude", "min_tags", "relations"):
        if getattr(args, key, None) is not None:
            spec[key] = getattr(args, key)
    return spec


def _validation_message(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"])
        parts.append(f"{location}: {item['msg']}" if location else item["msg"])
    return "invalid configuration: " + "; ".join(parts)


def build_config(args: argparse.Namespace) -> PipelineConfig:
    """Effective configuration: the --config JSON file overridden by CLI flags.

    Raises:
        ConfigError: If the file cannot be read or the result does not validate.
    """
    data: dict[str, Any] = {}
    if getattr(args, "config", None):
        try:
            data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot load config file {args.config}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"config file {args.config} must hold a JSON object")

    overrides = {
        field: getattr(args, flag)
        for flag, field in CONFIG_FLAGS.items()
        if getattr(args, flag, None) is not None
    }
    if any(field in overrides for field in ALPHA_FIELDS):
        for field in ALPHA_FIELDS:
            data.pop(field, None)
    if overrides.get("reference") is not None:
        data.pop("planted_tree", None)
    if overrides.get("planted_tree") is not None:
        data.pop("reference", None)
    data.update(overrides)
    spec = _input_spec(args)
    if spec is not None:
        data["input"] = spec

    try:
        return PipelineConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(_validation_message(e)) from e


def library_versions() -> dict[str, str]:
    """Versions of the libraries that shape numerical results."""
    return {
        "networkx": nx.__version__,
        "numpy": np.__version__,
        "pandas": pd.__version__,
        "pydantic": pydantic.VERSION,
        "scipy": scipy.__version__,
    }


def _write_run_manifest(
    command: str, config: PipelineConfig, inputs: Iterable[Path]
) -> Path:
    out_dir = config.out_dir
    outputs: dict[str, str] = {}
    for path in get_artifact_registry():
        name = str(path.relative_to(out_dir)) if path.is_relative_to(out_dir) else str(path)
        outputs[name] = sha256_file(path)
    manifest = RunManifest(
        command=command,
        version=__version__,
        libraries=library_versions(),
        config=config.model_dump(mode="json"),
        inputs={str(p): sha256_file(p) for p in sorted(set(inputs))},
        outputs=dict(sorted(outputs.items())),
    )
    return write_manifest(manifest, out_dir / f"{command}.manifest.json")


# =============================================================================
# Loading
# =============================================================================


def load_bipartite(config: PipelineConfig) -> tuple[BipartiteGraph, list[Path]]:
    """Read the configured input into a bipartite graph.

    Returns:
        The graph and the input files it was read from.
    """
    spec = config.input
    if spec is None:
        raise ConfigError("no input given; use --input or an 'input' config section")
    if isinstance(spec, TsvInput):
        b = parse_tsv_bipartite(
            spec.path,
            spec.object_column,
            spec.tag_column,
            spec.delimiter,
            header=spec.header,
            min_tags=spec.min_tags,
        )
        return b, [spec.path]

    assert isinstance(spec, GoInput)
    records = {
        species: parse_gaf(path, species, evidence_exclude=spec.evidence_exclude or None)
        for species, path in spec.gaf.items()
    }
    for row in summarize_annotations(records).itertuples(index=False):
        logger.info(
            "%s: %d gene products, %d annotations, %d terms",
            row.species,
            row.gene_products,
            row.annotations,
            row.terms,
        )
    inputs = list(spec.gaf.values())
    terms = None
    if spec.obo is not None:
        terms, _ = parse_obo(spec.obo, spec.relations)
        inputs.append(spec.obo)
    b = merge_annotations(records, config.namespace, terms=terms)
    if spec.min_tags > 1:
        b = b.restrict_min_tags(spec.min_tags)
    return b, inputs


def load_reference(
    path: str | Path,
    relations: Iterable[str] | None = None,
    namespace: str | None = None,
) -> ReferenceHierarchy:
    """Load a reference hierarchy from an OBO file or a parent/child TSV."""
    path = Path(path)
    if path.name.endswith((".obo", ".obo.gz")):
        kwargs: dict[str, Any] = {"namespace": namespace}
        if relations is not None:
            kwargs["relations"] = frozenset(relations)
        return parse_obo(path, **kwargs)[1]
    return read_reference_tsv(path)


def _reference(config: PipelineConfig) -> tuple[ReferenceHierarchy, list[Path]]:
    if config.reference is not None:
        hierarchy = load_reference(config.reference, config.relations, config.namespace)
        return hierarchy, [config.reference]
    if config.planted_tree is not None:
        return balanced_tree(*config.planted_tree), []
    raise ConfigError("a reference is required; use --reference or --planted-tree")


def _obo_labels(path: str | Path) -> dict[str, str]:
    terms, _ = parse_obo(path)
    return {t.id: t.name for t in terms if t.name}


# =============================================================================
# Orchestration
# =============================================================================


def _backbone(config: PipelineConfig, pruned: PrunedGraph) -> HierarchicalBackbone:
    """Threshold a pruned graph with alpha_th or the alpha giving target_edges."""
    if config.alpha_th is not None:
        alpha_th = config.alpha_th
    elif config.target_edges is not None:
        try:
            alpha_th = alpha_for_target_edges(pruned, config.target_edges)
        except DomainError as e:
            warnings.warn(f"{e}; the backbone is empty", UserWarning, stacklevel=2)
            return HierarchicalBackbone(edges=(), z_th=pruned.z_th)
        logger.info("target %d edges -> alpha_th=%g", config.target_edges, alpha_th)
    else:
        raise ConfigError("extraction needs --alpha-th or --target-edges")

    backbone = build_backbone(pruned, alpha_th)
    if backbone.n_edges == 0 and pruned.n_pairs > 0:
        warnings.warn(
            f"no pair reaches alpha_th={alpha_th:g}; the backbone is empty",
            UserWarning,
            stacklevel=2,
        )
    return backbone


def _write_backbone_files(
    config: PipelineConfig, backbone: HierarchicalBackbone, name: str = "backbone.tsv"
) -> dict[str, Path]:
    outputs = {"backbone": write_backbone(backbone, config.out_dir / name)}
    if backbone.parsimonious:
        outputs["removed"] = write_removed(backbone, config.out_dir / "removed.tsv")
    return outputs


def run_extract(config: PipelineConfig) -> dict[str, Path]:
    """Extract a hierarchical backbone from the configured input.

    Writes ``pruned.tsv``, ``backbone.tsv``, ``removed.tsv`` (parsimonious
    runs only) and ``pipeline.manifest.json`` into ``config.out_dir``.

    Returns:
        Artifact name -> written path.

    Raises:
        StageError: Wrapping the library error of the failing stage. Files
            already published stay in the artifact registry for
            ``rollback_artifacts``.
    """
    with pipeline_stage("ingest"):
        b, inputs = load_bipartite(config)
    with pipeline_stage("project"):
        g = project(b, n_workers=config.workers)
    with pipeline_stage("prune"):
        pruned = prune(g, config.z_th)
    with pipeline_stage("backbone"):
        backbone = _backbone(config, pruned)
    if config.parsimonious:
        with pipeline_stage("reduce"):
            backbone = transitive_reduce(backbone)
    with pipeline_stage("write"):
        outputs = {"pruned": write_pruned(pruned, config.out_dir / "pruned.tsv")}
        outputs |= _write_backbone_files(config, backbone)
        outputs["manifest"] = _write_run_manifest("pipeline", config, inputs)
    logger.info("backbone: %d edges", backbone.n_edges)
    return outputs


def _setting_dir(config: PipelineConfig, n_products: int, p_rw: float) -> Path:
    return config.out_dir / f"N{n_products}_p{p_rw:g}"


def run_benchmark_eval(config: PipelineConfig) -> dict[str, Path]:
    """Generate benchmark ensembles, extract backbones over an alpha grid and score them.

    For every (N, p_rw) setting, writes ``ensembleNN.csv`` per ensemble
    member and ``aggregate.csv`` (mean and standard error across members)
    into ``<out_dir>/N<N>_p<p_rw>/``, plus ``eval.manifest.json``.

    Returns:
        Artifact name -> written path.

    Raises:
        ConfigError: If ``target_edges`` is set; eval sweeps alpha_th values.
    """
    if config.target_edges is not None:
        raise ConfigError("eval takes --alpha-th or --alpha-grid, not --target-edges")
    with pipeline_stage("reference"):
        reference, inputs = _reference(config)
    grid = config.alpha_grid or (
        (config.alpha_th,) if config.alpha_th is not None else DEFAULT_ALPHA_GRID
    )

    outputs: dict[str, Path] = {}
    for setting in config.benchmark_settings():
        directory = _setting_dir(config, setting.n_products, setting.p_rw)
        with pipeline_stage("benchgen"):
            graphs = generate_ensemble(
                reference, setting, config.n_ensembles, n_workers=config.workers
            )
        per_ensemble: list[list[EvalReport]] = []
        for index, b in enumerate(graphs):
            with pipeline_stage("prune"):
                pruned = prune(project(b), config.z_th)
            with pipeline_stage("evaluate"):
                observed = set(b.tags) if config.restrict_to_observed else None
                reports = [
                    report
                    for mode in config.modes
                    for report in sweep(
                        pruned,
                        reference,
                        grid,
                        mode,
                        parsimonious=config.parsimonious,
                        observed=observed,
                    )
                ]
            per_ensemble.append(reports)
            name = f"{directory.name}/ensemble{index:02d}"
            outputs[name] = write_reports_csv(reports, directory / f"ensemble{index:02d}.csv")
        with pipeline_stage("aggregate"):
            aggregate = aggregate_reports(per_ensemble)
            outputs[f"{directory.name}/aggregate"] = write_frame_csv(
                aggregate, directory / "aggregate.csv"
            )
        logger.info(
            "setting N=%d p_rw=%g: %d ensembles scored",
            setting.n_products,
            setting.p_rw,
            len(per_ensemble),
        )
    outputs["manifest"] = _write_run_manifest("eval", config, inputs)
    return outputs


def run_score_backbone(config: PipelineConfig, backbone_path: Path) -> dict[str, Path]:
    """Score one stored backbone against the reference in every configured mode."""
    with pipeline_stage("reference"):
        reference, inputs = _reference(config)
    with pipeline_stage("evaluate"):
        backbone = read_backbone(backbone_path)
        reports = [score(backbone, reference, mode) for mode in config.modes]
    outputs = {
        "csv": write_reports_csv(reports, config.out_dir / "eval.csv"),
        "jsonl": write_reports_jsonl(reports, config.out_dir / "eval.jsonl"),
    }
    outputs["manifest"] = _write_run_manifest("eval", config, [*inputs, backbone_path])
    return outputs


def _stage_input(
    args: argparse.Namespace, config: PipelineConfig, default_name: str
) -> Path:
    paths = getattr(args, "input", None) or []
    if len(paths) > 1:
        raise ConfigError(f"{args.command} takes a single --input file")
    return Path(paths[0]) if paths else config.out_dir / default_name


def _cmd_project(args: argparse.Namespace, config: PipelineConfig) -> None:
    with pipeline_stage("ingest"):
        b, inputs = load_bipartite(config)
    with pipeline_stage("project"):
        g = project(b, n_workers=config.workers)
    write_cooccurrence(g, config.out_dir / "cooccurrence.tsv")
    _write_run_manifest(args.command, config, inputs)


def _cmd_prune(args: argparse.Namespace, config: PipelineConfig) -> None:
    source = _stage_input(args, config, "cooccurrence.tsv")
    with pipeline_stage("prune"):
        pruned = prune(read_cooccurrence(source), config.z_th)
    write_pruned(pruned, config.out_dir / "pruned.tsv")
    _write_run_manifest(args.command, config, [source])


def _cmd_backbone(args: argparse.Namespace, config: PipelineConfig) -> None:
    source = _stage_input(args, config, "pruned.tsv")
    with pipeline_stage("backbone"):
        backbone = _backbone(config, read_pruned(source))
    if config.parsimonious:
        with pipeline_stage("reduce"):
            backbone = transitive_reduce(backbone)
    _write_backbone_files(config, backbone)
    _write_run_manifest(args.command, config, [source])


def _cmd_reduce(args: argparse.Namespace, config: PipelineConfig) -> None:
    source = _stage_input(args, config, "backbone.tsv")
    with pipeline_stage("reduce"):
        backbone = transitive_reduce(read_backbone(source))
    _write_backbone_files(config, backbone, "backbone.parsimonious.tsv")
    _write_run_manifest(args.command, config, [source])


def _cmd_benchgen(args: argparse.Namespace, config: PipelineConfig) -> None:
    with pipeline_stage("reference"):
        reference, inputs = _reference(config)
    write_reference(reference, config.out_dir / "reference.tsv")
    for setting in config.benchmark_settings():
        directory = _setting_dir(config, setting.n_products, setting.p_rw)
        with pipeline_stage("benchgen"):
            graphs = generate_ensemble(
                reference, setting, config.n_ensembles, n_workers=config.workers
            )
        for index, b in enumerate(graphs):
            write_bipartite(b, directory / f"ensemble{index:02d}.tsv")
    _write_run_manifest(args.command, config, inputs)


def _cmd_eval(args: argparse.Namespace, config: PipelineConfig) -> None:
    if args.backbone is not None:
        run_score_backbone(config, Path(args.backbone))
    else:
        run_benchmark_eval(config)


def _cmd_pipeline(args: argparse.Namespace, config: PipelineConfig) -> None:  # noqa: ARG001
    run_extract(config)


def _cmd_export(args: argparse.Namespace, config: PipelineConfig) -> None:
    source = _stage_input(args, config, "backbone.tsv")
    inputs = [source]
    with pipeline_stage("export"):
        backbone = read_backbone(source)
        reference = None
        if config.reference is not None or config.planted_tree is not None:
            reference, extra = _reference(config)
            inputs += extra
        labels = None
        if args.obo is not None:
            labels = _obo_labels(args.obo)
            inputs.append(Path(args.obo))
        output = Path(args.output) if args.output else config.out_dir / "backbone.dot"
        export_dot(backbone, output, labels=labels, reference=reference)
    _write_run_manifest(args.command, config, inputs)


COMMANDS: dict[str, Callable[[argparse.Namespace, PipelineConfig], None]] = {
    "project": _cmd_project,
    "prune": _cmd_prune,
    "backbone": _cmd_backbone,
    "reduce": _cmd_reduce,
    "benchgen": _cmd_benchgen,
    "eval": _cmd_eval,
    "pipeline": _cmd_pipeline,
    "export": _cmd_export,
}


# =============================================================================
# Argument parsing
# =============================================================================


def _common_options() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--config", help="JSON file with PipelineConfig fields")
    parser.add_argument("--out-dir", type=Path, help="Output directory")
    parser.add_argument("--seed", type=int, help="Seed of all randomness (default 0)")
    parser.add_argument("--workers", type=int, help="Worker threads (default 1)")
    parser.add_argument(
        "--log-level",
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging level (default WARNING)",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="Log at INFO level")
    return parser


def _input_options() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument(
        "--input",
        action="append",
        help="Input file; repeat for one GAF file per species",
    )
    parser.add_argument("--format", choices=["tsv", "obo+gaf"], help="Input format")
    parser.add_argument("--object-column", type=_column, help="Object column (index or name)")
    parser.add_argument("--tag-column", type=_column, help="Tag column (index or name)")
    parser.add_argument("--delimiter", help="Field separator of tsv input")
    parser.add_argument("--header", action="store_true", default=None, help="Input has a header")
    parser.add_argument("--min-tags", type=int, help="Drop objects with fewer tags")
    parser.add_argument("--obo", help="Ontology OBO file")
    parser.add_argument("--evidence-exclude", help="Comma separated evidence codes to drop")
    parser.add_argument("--namespace", help="GO namespace: BP, CC or MF")
    parser.add_argument("--relations", help="Comma separated hierarchy relations")
    return parser


def _threshold_options() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--z-th", type=float, help="Pruning z-score threshold (default 5)")
    alpha = parser.add_mutually_exclusive_group()
    alpha.add_argument("--alpha-th", type=float, help="Hierarchy strength threshold")
    alpha.add_argument("--alpha-grid", help="Comma separated increasing alpha_th values")
    alpha.add_argument("--target-edges", type=int, help="Choose alpha_th for this edge count")
    parser.add_argument(
        "--parsimonious",
        action="store_true",
        default=None,
        help="Remove transitively implied edges",
    )
    return parser


def _reference_options() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    reference = parser.add_mutually_exclusive_group()
    reference.add_argument("--reference", type=Path, help="Reference hierarchy (TSV or OBO)")
    reference.add_argument(
        "--planted-tree", type=_planted_tree, help="Balanced tree BRANCHING,DEPTH"
    )
    return parser


def _benchmark_options() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--n-products", help="Comma separated N values")
    parser.add_argument("--p-rw", help="Comma separated random-walk probabilities")
    parser.add_argument("--ensembles", type=int, help="Ensemble members per setting")
    return parser


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subparser per command."""
    parser = argparse.ArgumentParser(
        prog="hierbone",
        description="Hierarchical backbones of object-tag networks",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", help="Commands")

    common = _common_options()
    inputs = _input_options()
    thresholds = _threshold_options()
    reference = _reference_options()
    benchmark = _benchmark_options()

    subparsers.add_parser(
        "project", parents=[common, inputs], help="Project the input onto its tags"
    )
    prune_parser = subparsers.add_parser(
        "prune", parents=[common], help="Keep significantly co-occurring pairs"
    )
    prune_parser.add_argument("--input", action="append", help="cooccurrence.tsv")
    prune_parser.add_argument("--z-th", type=float, help="Pruning z-score threshold")

    backbone_parser = subparsers.add_parser(
        "backbone", parents=[common, thresholds], help="Threshold a pruned graph"
    )
    backbone_parser.add_argument("--input", action="append", help="pruned.tsv")

    reduce_parser = subparsers.add_parser(
        "reduce", parents=[common], help="Transitively reduce a backbone"
    )
    reduce_parser.add_argument("--input", action="append", help="backbone.tsv")

    benchgen_parser = subparsers.add_parser(
        "benchgen",
        parents=[common, reference, benchmark],
        help="Generate semi-synthetic networks on a reference hierarchy",
    )
    benchgen_parser.add_argument("--namespace", help="GO namespace of an OBO reference")

    eval_parser = subparsers.add_parser(
        "eval",
        parents=[common, thresholds, reference, benchmark],
        help="Score backbones against a reference",
    )
    eval_parser.add_argument("--backbone", help="Score this backbone.tsv instead of benchmarks")
    eval_parser.add_argument("--mode", action="append", choices=["edge", "path"])
    eval_parser.add_argument("--namespace", help="GO namespace of an OBO reference")
    eval_parser.add_argument(
        "--restrict-to-observed",
        action="store_true",
        default=None,
        help="Only count reference edges between tags seen in the benchmark",
    )

    subparsers.add_parser(
        "pipeline",
        parents=[common, inputs, thresholds],
        help="Project, prune, threshold and optionally reduce",
    )

    export_parser = subparsers.add_parser(
        "export", parents=[common, reference], help="Write a backbone as DOT"
    )
    export_parser.add_argument("--input", action="append", help="backbone.tsv")
    export_parser.add_argument("--obo", help="Ontology OBO file for node labels")
    export_parser.add_argument("-o", "--output", help="DOT file (default <out-dir>/backbone.dot)")
    return parser


def _configure_logging(args: argparse.Namespace) -> None:
    level = "INFO" if args.verbose and args.log_level == "WARNING" else args.log_level
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def run_command(args: argparse.Namespace) -> None:
    """Run one parsed command, undoing its outputs if it fails."""
    config = build_config(args)
    clear_artifact_registry()
    try:
        COMMANDS[args.command](args, config)
    except BaseException:
        undone = rollback_artifacts()
        if undone:
            logger.info("rolled back %d outputs", len(undone))
        raise
    commit_artifacts()


def main(argv: Sequence[str] | None = None) -> int:
    """Main entry point for the hierbone CLI.

    Returns:
        0 on success, 1 on a library or configuration error.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return 0
    _configure_logging(args)
    try:
        run_command(args)
    except HierboneError as e:
        print(f"Error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

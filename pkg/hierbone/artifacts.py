"""Hierbone Artifacts Module.

File formats of the pipeline stages and the run manifest. Every file is
UTF-8 with LF line endings and is published atomically (written to a
temporary sibling, then renamed). Published paths are recorded in the run's
artifact registry so a failed run can undo what it already wrote.

Stage tables are tab-separated with a header row, preceded by ``# key: value``
comment lines carrying the scalars a later stage needs (|O|, thresholds).
"""

from __future__ import annotations

import contextlib
import hashlib
import io
import logging
import math
import os
import shutil
import tempfile
from collections.abc import Callable, Iterable, Mapping
from typing import TypeVar
from pathlib import Path

import numpy as np
import pandas as pd

from hierbone.backbone import BackboneEdge, HierarchicalBackbone, PrunedGraph
from hierbone.config import RunManifest
from hierbone.context import clear_artifact_registry, get_artifact_registry
from hierbone.evaluate import EvalReport, reports_to_frame
from hierbone.exceptions import InputOutputError, ParseError
from hierbone.graph import BipartiteGraph, CooccurrenceGraph
from hierbone.ingest import ReferenceHierarchy

logger = logging.getLogger(__name__)

BACKBONE_COLUMNS = ["u", "v", "alpha", "z", "N_u", "N_v", "N_uv"]
PRUNED_COLUMNS = ["u", "v", "N_u", "N_v", "N_uv", "z"]
COOCCURRENCE_COLUMNS = ["u", "v", "N_u", "N_v", "N_uv"]

T = TypeVar("T")


# =============================================================================
# Publishing
# =============================================================================


def sha256_file(path: str | Path) -> str:
    """Hex sha256 digest of a file's content."""
    digest = hashlib.sha256()
    try:
        with Path(path).open("rb") as handle:
            for chunk in iter(lambda: handle.read(1 << 20), b""):
                digest.update(chunk)
    except OSError as e:
        raise InputOutputError("cannot read file for digest", path=path) from e
    return digest.hexdigest()


def _backup_path(path: Path) -> Path:
    return path.with_name(f".{path.name}.bak")


def publish_text(path: str | Path, text: str) -> Path:
    """Atomically write text to ``path`` and register it with the current run.

    The first time a run replaces an existing file, the previous content is
    kept in a hidden ``.<name>.bak`` sibling until the run is committed or
    rolled back.

    Raises:
        InputOutputError: If the file cannot be written.
    """
    path = Path(path)
    registry = get_artifact_registry()
    first_write = path not in registry
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        if first_write:
            backup = _backup_path(path)
            if path.exists():
                shutil.copy2(path, backup)
            else:
                backup.unlink(missing_ok=True)
        fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
                handle.write(text)
            Path(tmp_name).replace(path)
        except BaseException:
            Path(tmp_name).unlink(missing_ok=True)
            raise
    except OSError as e:
        if first_write:
            with contextlib.suppress(OSError):
                _backup_path(path).unlink(missing_ok=True)
        raise InputOutputError(f"cannot write file ({e.strerror})", path=path) from e
    if first_write:
        registry.append(path)
    logger.debug("wrote %s", path)
    return path


def rollback_artifacts() -> list[Path]:
    """Undo every file published by the current run and clear the registry.

    New files are deleted; files that existed before the run get their
    previous content back.

    Returns:
        The paths that were deleted or restored, newest first.
    """
    undone = []
    for path in reversed(get_artifact_registry()):
        backup = _backup_path(path)
        if backup.exists():
            backup.replace(path)
            undone.append(path)
        elif path.exists():
            path.unlink()
            undone.append(path)
    clear_artifact_registry()
    return undone


def commit_artifacts() -> list[Path]:
    """Accept the files published by the current run and clear the registry.

    Returns:
        The committed paths, in publication order.
    """
    committed = list(get_artifact_registry())
    for path in committed:
        _backup_path(path).unlink(missing_ok=True)
    clear_artifact_registry()
    return committed


def _frame_text(frame: pd.DataFrame, comments: Mapping[str, object] | None = None) -> str:
    buffer = io.StringIO()
    for key, value in (comments or {}).items():
        buffer.write(f"# {key}: {value}\n")
    frame.to_csv(buffer, sep="\t", index=False, lineterminator="\n")
    return buffer.getvalue()


def _read_table(path: str | Path, columns: list[str]) -> tuple[pd.DataFrame, dict[str, str]]:
    path = Path(path)
    comments: dict[str, str] = {}
    n_comment_lines = 0
    try:
        with path.open(encoding="utf-8") as handle:
            for line in handle:
                if not line.startswith("#"):
                    break
                key, _, value = line[1:].partition(":")
                comments[key.strip()] = value.strip()
                n_comment_lines += 1
        # only the leading lines are comments; tags may contain "#" or read like NA
        frame = pd.read_csv(
            path,
            sep="\t",
            skiprows=n_comment_lines,
            dtype={"u": str, "v": str},
            keep_default_na=False,
            na_filter=False,
            encoding="utf-8",
        )
    except OSError as e:
        raise InputOutputError("cannot read stage file", path=path) from e
    except (pd.errors.EmptyDataError, pd.errors.ParserError, UnicodeDecodeError) as e:
        raise ParseError(f"unreadable stage table ({e})", path=path) from e
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise ParseError(f"missing columns {missing}", path=path)
    for column in ("u", "v"):
        blank = np.flatnonzero((frame[column] == "").to_numpy())
        if blank.size:
            raise ParseError(f"empty '{column}' identifier", record=int(blank[0]), path=path)
    for column in columns:
        if column in ("u", "v"):
            continue
        try:
            frame[column] = pd.to_numeric(frame[column])
        except (ValueError, TypeError) as e:
            raise ParseError(f"non-numeric value in column '{column}'", path=path) from e
    return frame, comments


def _comment(
    comments: Mapping[str, str], key: str, path: str | Path, convert: Callable[[str], T]
) -> T:
    if key not in comments:
        raise ParseError(f"missing '# {key}:' header line", path=path)
    try:
        return convert(comments[key])
    except ValueError as e:
        raise ParseError(f"invalid '# {key}:' header line", path=path) from e


def _optional_float(value: str | None) -> float | None:
    return None if value in (None, "", "None") else float(value)


# =============================================================================
# Stage tables
# =============================================================================


def write_bipartite(b: BipartiteGraph, path: str | Path) -> Path:
    """Write a bipartite graph as ``object<TAB>tag`` lines (no header)."""
    text = "".join(f"{o}\t{t}\n" for o, t in b.edges())
    return publish_text(path, text)


def write_reference(h: ReferenceHierarchy, path: str | Path) -> Path:
    """Write a reference hierarchy as sorted ``parent<TAB>child`` lines."""
    return publish_text(path, h.to_tsv())


def write_cooccurrence(g: CooccurrenceGraph, path: str | Path) -> Path:
    """Write a projection; ``# n_objects`` records |O|."""
    return publish_text(path, _frame_text(g.to_frame(), {"n_objects": g.n_objects}))


def read_cooccurrence(path: str | Path) -> CooccurrenceGraph:
    """Read a projection written by write_cooccurrence."""
    frame, comments = _read_table(path, COOCCURRENCE_COLUMNS)
    n_objects = _comment(comments, "n_objects", path, int)
    return CooccurrenceGraph.from_frame(frame, n_objects)


def pruned_frame(p: PrunedGraph) -> pd.DataFrame:
    """Surviving pairs as a table with PRUNED_COLUMNS."""
    tags = np.asarray(p.tags, dtype=object)
    return pd.DataFrame(
        {
            "u": tags[p.rows],
            "v": tags[p.cols],
            "N_u": p.frequencies[p.rows],
            "N_v": p.frequencies[p.cols],
            "N_uv": p.weights,
            "z": p.z,
        },
        columns=PRUNED_COLUMNS,
    )


def write_pruned(p: PrunedGraph, path: str | Path) -> Path:
    """Write the pruned graph with its |O| and z_th."""
    comments = {"n_objects": p.n_objects, "z_th": p.z_th}
    return publish_text(path, _frame_text(pruned_frame(p), comments))


def read_pruned(path: str | Path) -> PrunedGraph:
    """Read a pruned graph written by write_pruned.

    Only tags with at least one surviving pair are recovered, which leaves
    degrees and k_max unchanged.
    """
    frame, comments = _read_table(path, PRUNED_COLUMNS)
    n_objects = _comment(comments, "n_objects", path, int)
    z_th = _comment(comments, "z_th", path, float)
    g = CooccurrenceGraph.from_frame(frame, max(n_objects, 0))
    # from_frame sorts pairs; carry z along by pair key
    z_by_pair = {
        (min(u, v), max(u, v)): z
        for u, v, z in zip(frame["u"], frame["v"], frame["z"], strict=True)
    }
    tags = g.tags
    pairs = zip(g.rows.tolist(), g.cols.tolist(), strict=True)
    z = np.asarray([z_by_pair[(tags[r], tags[c])] for r, c in pairs], dtype=np.float64)
    return PrunedGraph(
        tags=tags,
        n_objects=n_objects,
        z_th=z_th,
        frequencies=g.frequencies,
        rows=g.rows,
        cols=g.cols,
        weights=g.weights,
        z=z,
    )


def backbone_frame(edges: Iterable[BackboneEdge]) -> pd.DataFrame:
    """Backbone edges as a table with BACKBONE_COLUMNS."""
    return pd.DataFrame(
        [(e.source, e.target, e.alpha, e.z, e.n_source, e.n_target, e.n_pair) for e in edges],
        columns=BACKBONE_COLUMNS,
    )


def write_backbone(h: HierarchicalBackbone, path: str | Path) -> Path:
    """Write backbone edges (u, v, alpha, z, N_u, N_v, N_uv)."""
    comments = {"alpha_th": h.alpha_th, "z_th": h.z_th, "parsimonious": h.parsimonious}
    return publish_text(path, _frame_text(backbone_frame(h.edges), comments))


def write_removed(h: HierarchicalBackbone, path: str | Path) -> Path:
    """Write the audit list of edges removed by transitive reduction."""
    return publish_text(path, _frame_text(backbone_frame(h.removed)))


def read_backbone(path: str | Path) -> HierarchicalBackbone:
    """Read a backbone written by write_backbone."""
    frame, comments = _read_table(path, BACKBONE_COLUMNS)
    try:
        edges = tuple(
            sorted(
                BackboneEdge(
                    source=str(row.u),
                    target=str(row.v),
                    alpha=float(row.alpha),
                    z=float(row.z),
                    n_source=int(row.N_u),
                    n_target=int(row.N_v),
                    n_pair=int(row.N_uv),
                )
                for row in frame.itertuples(index=False)
            )
        )
    except (ValueError, OverflowError) as e:
        raise ParseError(f"invalid backbone row ({e})", path=path) from e
    try:
        alpha_th = _optional_float(comments.get("alpha_th"))
        z_th = _optional_float(comments.get("z_th"))
    except ValueError as e:
        raise ParseError("invalid threshold header line", path=path) from e
    return HierarchicalBackbone(
        edges=edges,
        parsimonious=comments.get("parsimonious") == "True",
        alpha_th=alpha_th,
        z_th=z_th,
    )


# =============================================================================
# Reports and manifest
# =============================================================================


def write_reports_csv(reports: Iterable[EvalReport], path: str | Path) -> Path:
    """Write reports as the flat metrics CSV."""
    return publish_text(path, reports_to_frame(reports).to_csv(index=False, lineterminator="\n"))


def write_reports_jsonl(reports: Iterable[EvalReport], path: str | Path) -> Path:
    """Write reports as JSON Lines, one object per grid point."""
    return publish_text(path, "".join(r.model_dump_json() + "\n" for r in reports))


def write_frame_csv(frame: pd.DataFrame, path: str | Path) -> Path:
    """Write any DataFrame as CSV."""
    return publish_text(path, frame.to_csv(index=False, lineterminator="\n"))


def write_manifest(manifest: RunManifest, path: str | Path) -> Path:
    """Write the run manifest as indented JSON."""
    return publish_text(path, manifest.model_dump_json(indent=2) + "\n")


# =============================================================================
# DOT
# =============================================================================


def _quote(value: object) -> str:
    text = str(value).replace("\\", "\\\\").replace('"', '\\"')
    return f'"{text}"'


def export_dot(
    backbone: HierarchicalBackbone,
    path: str | Path,
    *,
    labels: Mapping[str, str] | None = None,
    reference: ReferenceHierarchy | None = None,
) -> Path:
    """Write a backbone as a Graphviz digraph.

    Nodes carry ``N`` (tag frequency) and a ``width`` scaled by sqrt(N). Edges
    carry ``alpha``. With a reference, each edge gets ``status`` "documented"
    when the reference connects its endpoints by a path and "augmented"
    otherwise, plus a matching color.

    Args:
        backbone: The backbone.
        path: Output file.
        labels: Tag identifier -> display label (e.g. GO term names).
        reference: Reference hierarchy for edge coloring.

    Returns:
        The written path.
    """
    frequencies: dict[str, int] = {}
    for e in backbone.edges:
        frequencies[e.source] = e.n_source
        frequencies[e.target] = e.n_target
    largest = max(frequencies.values(), default=1)

    lines = ["digraph backbone {", "  node [shape=ellipse];"]
    for node in sorted(frequencies):
        n = frequencies[node]
        label = labels.get(node, node) if labels else node
        width = 0.3 + 1.2 * math.sqrt(n / largest)
        lines.append(
            f"  {_quote(node)} [label={_quote(label)}, N={n}, width={width:.3f}];"
        )
    for e in backbone.edges:
        attrs = [f"alpha={e.alpha:.6g}"]
        if reference is not None:
            documented = reference.reaches(e.source, e.target)
            status = "documented" if documented else "augmented"
            color = "gray40" if documented else "red"
            attrs += [f"status={_quote(status)}", f"color={_quote(color)}"]
        lines.append(f"  {_quote(e.source)} -> {_quote(e.target)} [{', '.join(attrs)}];")
    lines.append("}")
    return publish_text(path, "\n".join(lines) + "\n")

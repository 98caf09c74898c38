"""Hierbone Evaluate Module.

Scores predicted backbones against a reference hierarchy.

Two comparisons are supported:

- ``edge``: a predicted edge u -> v is correct iff u -> v is a reference edge;
- ``path``: a predicted edge u -> v is correct iff the reference has a
  directed path u ~> v; a reference edge u -> v counts as recovered iff the
  prediction has a directed path u ~> v.

Negatives for the false-positive rate are the ordered pairs of distinct
reference nodes that are not reference edges (edge mode) or not connected by
a reference path (path mode). Raw counts are reported alongside the ratios so
other normalizations can be recomputed.
"""

from __future__ import annotations

import logging
import warnings
from collections.abc import Collection, Iterable, Sequence
from typing import Any

import networkx as nx
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

from hierbone.backbone import (
    HierarchicalBackbone,
    PrunedGraph,
    score_pairs,
    threshold_scores,
    transitive_reduce,
)
from hierbone.config import EvalMode
from hierbone.exceptions import ConfigError
from hierbone.fields import validate_alpha_grid
from hierbone.ingest import ReferenceHierarchy

logger = logging.getLogger(__name__)

CSV_COLUMNS = [
    "alpha_th",
    "z_th",
    "mode",
    "tp",
    "fp",
    "n_pred",
    "n_ref",
    "tpr",
    "fpr",
    "precision",
    "recall",
]

AGGREGATE_METRICS = ["precision", "recall", "tpr", "fpr", "tp", "fp", "n_pred"]


class EvalReport(BaseModel):
    """Confusion counts and derived rates for one prediction.

    Attributes:
        mode: "edge" or "path".
        tp: Predicted edges judged correct.
        fp: Predicted edges judged wrong (including edges touching nodes
            unknown to the reference).
        n_reference_edges: Reference edges counted in the recall denominator.
        n_predicted_edges: Predicted edges.
        n_recovered: Reference edges recovered by the prediction.
        n_negatives: Candidate non-edges among reference nodes.
        tpr: n_recovered / n_reference_edges.
        fpr: False positives among reference nodes / n_negatives.
        precision: tp / n_predicted_edges; 1.0 for an empty prediction.
        recall: Same as tpr.
        empty_prediction: Whether nothing was predicted.
        unknown_nodes: Predicted nodes absent from the reference.
        z_th: Pruning threshold behind the prediction, when known.
        alpha_th: Strength threshold behind the prediction, when known.
    """

    model_config = ConfigDict(frozen=True)

    mode: EvalMode
    tp: int = Field(ge=0)
    fp: int = Field(ge=0)
    n_reference_edges: int = Field(ge=0)
    n_predicted_edges: int = Field(ge=0)
    n_recovered: int = Field(ge=0)
    n_negatives: int = Field(ge=0)
    tpr: float = Field(ge=0.0, le=1.0)
    fpr: float = Field(ge=0.0, le=1.0)
    precision: float = Field(ge=0.0, le=1.0)
    recall: float = Field(ge=0.0, le=1.0)
    empty_prediction: bool
    unknown_nodes: tuple[str, ...] = ()
    z_th: float | None = None
    alpha_th: float | None = None

    @model_validator(mode="after")
    def _counts_add_up(self) -> EvalReport:
        if self.tp + self.fp != self.n_predicted_edges:
            raise ValueError(
                f"tp + fp = {self.tp + self.fp} != n_predicted_edges = "
                f"{self.n_predicted_edges}"
            )
        return self

    def csv_row(self) -> dict[str, Any]:
        """The report as one row of the flat metrics CSV."""
        return {
            "alpha_th": self.alpha_th,
            "z_th": self.z_th,
            "mode": self.mode,
            "tp": self.tp,
            "fp": self.fp,
            "n_pred": self.n_predicted_edges,
            "n_ref": self.n_reference_edges,
            "tpr": self.tpr,
            "fpr": self.fpr,
            "precision": self.precision,
            "recall": self.recall,
        }


def reports_to_frame(reports: Iterable[EvalReport]) -> pd.DataFrame:
    """Flat metrics table with the CSV_COLUMNS columns."""
    return pd.DataFrame([r.csv_row() for r in reports], columns=CSV_COLUMNS)


class _PathIndex:
    """Memoized per-source descendants of a predicted edge set."""

    def __init__(self, edges: Iterable[tuple[str, str]]) -> None:
        self._graph = nx.DiGraph(list(edges))
        self._cache: dict[str, frozenset[str]] = {}

    def reaches(self, source: str, target: str) -> bool:
        if source not in self._graph:
            return False
        reach = self._cache.get(source)
        if reach is None:
            reach = frozenset(nx.descendants(self._graph, source))
            self._cache[source] = reach
        return target in reach


def _score(
    predicted: frozenset[tuple[str, str]],
    reference: ReferenceHierarchy,
    mode: EvalMode,
    observed: Collection[str] | None,
    z_th: float | None,
    alpha_th: float | None,
) -> EvalReport:
    nodes = reference.nodes
    unknown = sorted({t for edge in predicted for t in edge} - nodes)
    known = [(u, v) for u, v in predicted if u in nodes and v in nodes]

    reference_edges: Collection[tuple[str, str]] = reference.edges
    if observed is not None:
        seen = set(observed)
        reference_edges = [(u, v) for u, v in reference.edges if u in seen and v in seen]

    n = reference.n_nodes
    if mode == "edge":
        tp = sum(1 for edge in known if edge in reference.edges)
        recovered = sum(1 for edge in reference_edges if edge in predicted)
        n_negatives = n * (n - 1) - reference.n_edges
    else:
        tp = sum(1 for u, v in known if reference.reaches(u, v))
        paths = _PathIndex(predicted)
        recovered = sum(1 for u, v in reference_edges if paths.reaches(u, v))
        n_negatives = n * (n - 1) - reference.n_closure_pairs

    n_pred = len(predicted)
    n_ref = len(reference_edges)
    fp = n_pred - tp
    fp_known = len(known) - tp
    recall = recovered / n_ref if n_ref else 0.0
    if unknown:
        logger.debug("%d predicted nodes are not in the reference", len(unknown))
    return EvalReport(
        mode=mode,
        tp=tp,
        fp=fp,
        n_reference_edges=n_ref,
        n_predicted_edges=n_pred,
        n_recovered=recovered,
        n_negatives=n_negatives,
        tpr=recall,
        fpr=fp_known / n_negatives if n_negatives else 0.0,
        precision=tp / n_pred if n_pred else 1.0,
        recall=recall,
        empty_prediction=n_pred == 0,
        unknown_nodes=tuple(unknown),
        z_th=z_th,
        alpha_th=alpha_th,
    )


def score_edges(
    predicted: HierarchicalBackbone,
    reference: ReferenceHierarchy,
    *,
    observed: Collection[str] | None = None,
) -> EvalReport:
    """Edge-based comparison of a backbone with the reference.

    Args:
        predicted: The backbone.
        reference: The reference hierarchy.
        observed: When given, only reference edges between these terms enter
            the recall denominator.

    Returns:
        The report (mode "edge").
    """
    return _score(
        predicted.edge_set(), reference, "edge", observed, predicted.z_th, predicted.alpha_th
    )


def score_paths(
    predicted: HierarchicalBackbone,
    reference: ReferenceHierarchy,
    *,
    observed: Collection[str] | None = None,
) -> EvalReport:
    """Path-based comparison of a backbone with the reference.

    The reference closure is computed once per hierarchy and reused; the
    prediction's reachability is computed lazily per source.

    Args:
        predicted: The backbone.
        reference: The reference hierarchy.
        observed: When given, only reference edges between these terms enter
            the recall denominator.

    Returns:
        The report (mode "path").
    """
    return _score(
        predicted.edge_set(), reference, "path", observed, predicted.z_th, predicted.alpha_th
    )


def score(
    predicted: HierarchicalBackbone,
    reference: ReferenceHierarchy,
    mode: EvalMode,
    *,
    observed: Collection[str] | None = None,
) -> EvalReport:
    """Dispatch to score_edges or score_paths."""
    if mode == "edge":
        return score_edges(predicted, reference, observed=observed)
    if mode == "path":
        return score_paths(predicted, reference, observed=observed)
    raise ConfigError(f"unknown evaluation mode '{mode}'; use 'edge' or 'path'")


def sweep(
    pruned: PrunedGraph,
    reference: ReferenceHierarchy,
    alpha_grid: Sequence[float],
    mode: EvalMode = "path",
    *,
    parsimonious: bool = False,
    observed: Collection[str] | None = None,
) -> list[EvalReport]:
    """Score the backbones of one pruned graph over a grid of alpha_th values.

    Hierarchy strengths are computed once; each grid point only thresholds
    them. Without ``parsimonious`` the predicted-edge counts are
    non-increasing along the grid. With ``parsimonious`` they are not: a
    shortcut edge dropped at a higher threshold can stop making other edges
    redundant, so the reduced backbone can grow. A UserWarning reports the
    first grid point where that happens.

    Args:
        pruned: The pruned graph.
        reference: The reference hierarchy.
        alpha_grid: Strictly increasing thresholds, all > 0.
        mode: "edge" or "path".
        parsimonious: Reduce each backbone transitively before scoring.
        observed: Restricts the recall denominator, see score_edges.

    Returns:
        One report per grid value, in grid order.

    Raises:
        ConfigError: If the grid is empty or invalid, or the mode is unknown.
    """
    try:
        grid = validate_alpha_grid(alpha_grid)
    except ValueError as e:
        raise ConfigError(str(e)) from e
    if mode not in ("edge", "path"):
        raise ConfigError(f"unknown evaluation mode '{mode}'; use 'edge' or 'path'")

    scores = score_pairs(pruned) if pruned.n_pairs else None
    reports = []
    for alpha_th in grid:
        if scores is None:
            backbone = HierarchicalBackbone(edges=(), alpha_th=alpha_th, z_th=pruned.z_th)
        else:
            backbone = threshold_scores(scores, alpha_th, z_th=pruned.z_th)
        if parsimonious:
            backbone = transitive_reduce(backbone)
        reports.append(score(backbone, reference, mode, observed=observed))
    counts = [r.n_predicted_edges for r in reports]
    rising = [i for i in range(1, len(counts)) if counts[i] > counts[i - 1]]
    if parsimonious and rising:
        i = rising[0]
        warnings.warn(
            f"parsimonious backbone grows from {counts[i - 1]} to {counts[i]} edges "
            f"between alpha_th={grid[i - 1]:g} and alpha_th={grid[i]:g}",
            UserWarning,
            stacklevel=2,
        )
    logger.info(
        "sweep %s over %d alpha values: %d..%d predicted edges",
        mode,
        len(grid),
        reports[0].n_predicted_edges,
        reports[-1].n_predicted_edges,
    )
    return reports


def aggregate_reports(reports_by_ensemble: Sequence[Sequence[EvalReport]]) -> pd.DataFrame:
    """Mean and standard error of the metrics across ensemble members.

    Args:
        reports_by_ensemble: For each ensemble member, its reports.

    Returns:
        One row per (mode, z_th, alpha_th) with column ``n`` (members) and
        ``<metric>_mean`` / ``<metric>_stderr`` for each aggregated metric.
        The standard error of a single member is 0.
    """
    frames = [
        reports_to_frame(reports).assign(ensemble=i)
        for i, reports in enumerate(reports_by_ensemble)
    ]
    if not frames:
        raise ConfigError("nothing to aggregate")
    table = pd.concat(frames, ignore_index=True)
    grouped = table.groupby(["mode", "z_th", "alpha_th"], sort=True, dropna=False)
    out = grouped.size().rename("n").to_frame()
    for metric in AGGREGATE_METRICS:
        out[f"{metric}_mean"] = grouped[metric].mean()
        out[f"{metric}_stderr"] = grouped[metric].sem().fillna(0.0)
    return out.reset_index()

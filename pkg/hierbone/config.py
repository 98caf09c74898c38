"""Hierbone Config Module.

Pydantic models for everything a run is parameterized by: where the input
comes from, the benchmark protocol, the thresholds, and the manifest that
records a finished run.
"""

from __future__ import annotations

from pathlib import Path
from typing import Annotated, Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from hierbone.fields import (
    AlphaGrid,
    CodeSet,
    FiniteFloat,
    NamespaceField,
    PositiveIntList,
    PositiveThreshold,
    ProbabilityList,
    RelationSet,
)
from hierbone.namespaces import DEFAULT_RELATIONS

EvalMode = Literal["edge", "path"]


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class TsvInput(_Frozen):
    """A delimited object-tag file."""

    format: Literal["tsv"] = "tsv"
    path: Path
    object_column: int | str = 0
    tag_column: int | str = 1
    delimiter: str = Field(default="\t", min_length=1)
    header: bool = False
    min_tags: int = Field(default=1, ge=1)


class GoInput(_Frozen):
    """GAF annotation files (one per species), optionally with the ontology.

    Attributes:
        gaf: Species label -> GAF path.
        obo: Ontology used to drop annotations whose aspect contradicts the
            term namespace.
    """

    format: Literal["obo+gaf"] = "obo+gaf"
    gaf: dict[str, Path]
    obo: Path | None = None
    relations: RelationSet = DEFAULT_RELATIONS
    evidence_exclude: CodeSet = frozenset()
    min_tags: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _needs_gaf(self) -> GoInput:
        if not self.gaf:
            raise ValueError("at least one GAF file is required")
        return self


InputSpec = Annotated[TsvInput | GoInput, Field(discriminator="format")]


class BenchmarkConfig(_Frozen):
    """Semi-synthetic benchmark protocol.

    Attributes:
        n_products: N, number of virtual objects.
        p_rw: Probability that a non-reference tag comes from a random walk.
        tags_min: Lower bound of the per-object tag count.
        tags_max: Upper bound of the per-object tag count.
        walk_min: Lower bound of the walk length s.
        walk_max: Upper bound of the walk length s.
        seed: RNG seed.
        ensemble_index: Ensemble member; selects an independent RNG stream.
    """

    n_products: int = Field(default=10_000, ge=1)
    p_rw: float = Field(default=0.9, ge=0.0, le=1.0)
    tags_min: int = Field(default=3, ge=1)
    tags_max: int = Field(default=5, ge=1)
    walk_min: int = Field(default=1, ge=1)
    walk_max: int = Field(default=3, ge=1)
    seed: int = Field(default=0, ge=0)
    ensemble_index: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _ordered_bounds(self) -> BenchmarkConfig:
        if self.tags_min > self.tags_max:
            raise ValueError(f"tags_min={self.tags_min} exceeds tags_max={self.tags_max}")
        if self.walk_min > self.walk_max:
            raise ValueError(f"walk_min={self.walk_min} exceeds walk_max={self.walk_max}")
        return self


class PipelineConfig(_Frozen):
    """Configuration of an extraction or benchmark-evaluation run.

    At most one of ``alpha_th``, ``alpha_grid`` and ``target_edges`` may be
    set. ``seed`` is the single source of randomness; it overrides
    ``benchmark.seed``.
    """

    input: InputSpec | None = None
    reference: Path | None = None
    planted_tree: tuple[int, int] | None = None
    namespace: NamespaceField | None = None
    relations: RelationSet = DEFAULT_RELATIONS
    z_th: FiniteFloat = 5.0
    alpha_th: PositiveThreshold | None = None
    alpha_grid: AlphaGrid | None = None
    target_edges: int | None = Field(default=None, ge=1)
    parsimonious: bool = False
    benchmark: BenchmarkConfig = BenchmarkConfig()
    n_products: PositiveIntList = ()
    p_rw: ProbabilityList = ()
    n_ensembles: int = Field(default=20, ge=1)
    modes: tuple[EvalMode, ...] = ("edge", "path")
    restrict_to_observed: bool = False
    out_dir: Path = Path("hierbone-out")
    seed: int = Field(default=0, ge=0)
    workers: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _one_alpha_source(self) -> PipelineConfig:
        given = [
            name
            for name in ("alpha_th", "alpha_grid", "target_edges")
            if getattr(self, name) is not None
        ]
        if len(given) > 1:
            raise ValueError(f"give only one of alpha_th, alpha_grid, target_edges; got {given}")
        if self.reference is not None and self.planted_tree is not None:
            raise ValueError("give either reference or planted_tree, not both")
        return self

    def benchmark_settings(self) -> list[BenchmarkConfig]:
        """Cartesian expansion of the N and P_RW grids into benchmark configs."""
        sizes = self.n_products or (self.benchmark.n_products,)
        probabilities = self.p_rw or (self.benchmark.p_rw,)
        return [
            self.benchmark.model_copy(update={"n_products": n, "p_rw": p, "seed": self.seed})
            for n in sizes
            for p in probabilities
        ]


class RunManifest(_Frozen):
    """Provenance record of a run.

    Attributes:
        command: Subcommand that produced the run.
        version: hierbone version.
        libraries: Versions of the numerical libraries involved.
        config: Effective configuration.
        inputs: Input path -> sha256 digest.
        outputs: Output file name -> sha256 digest.
    """

    tool: str = "hierbone"
    command: str
    version: str
    libraries: dict[str, str]
    config: dict[str, object]
    inputs: dict[str, str]
    outputs: dict[str, str]

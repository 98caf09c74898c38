"""Tests for hierbone.benchgen module."""

import warnings

import networkx as nx
import numpy as np
import pytest
from pydantic import ValidationError
from scipy.stats import chisquare

from hierbone.benchgen import (
    BLOCK_SIZE,
    balanced_tree,
    block_rng,
    generate,
    generate_ensemble,
    random_hierarchy,
)
from hierbone.config import BenchmarkConfig
from hierbone.exceptions import ConfigError, EmptyInputError
from hierbone.ingest import ReferenceHierarchy


class TestBalancedTree:
    """Tests for the planted complete tree."""

    @pytest.mark.parametrize(
        ("branching", "depth", "n_nodes"),
        [(3, 3, 40), (2, 4, 31), (3, 2, 13), (1, 5, 6)],
    )
    def test_size(self, branching: int, depth: int, n_nodes: int) -> None:
        """A tree has sum of branching**level nodes and one edge fewer."""
        h = balanced_tree(branching, depth)
        assert h.n_nodes == n_nodes
        assert h.n_edges == n_nodes - 1

    def test_breadth_first_names(self) -> None:
        """Children of node i are 3i+1 .. 3i+3."""
        h = balanced_tree(3, 2)
        assert h.edges >= {("T00", "T01"), ("T00", "T03"), ("T01", "T04"), ("T03", "T12")}
        assert nx.is_arborescence(h.graph)

    @pytest.mark.parametrize(("branching", "depth"), [(0, 3), (3, 0)])
    def test_invalid(self, branching: int, depth: int) -> None:
        """Zero branching or depth is rejected."""
        with pytest.raises(ConfigError):
            balanced_tree(branching, depth)


class TestRandomHierarchy:
    """Tests for random reference DAGs."""

    @pytest.mark.parametrize(("n_nodes", "n_edges"), [(10, 9), (10, 15), (6, 15)])
    def test_edge_count(self, n_nodes: int, n_edges: int) -> None:
        """The requested number of edges is realized on a connected DAG."""
        h = random_hierarchy(n_nodes, n_edges, seed=3)
        assert h.n_nodes == n_nodes
        assert h.n_edges == n_edges
        assert nx.is_weakly_connected(h.graph)

    def test_seeded(self) -> None:
        """The same seed gives the same DAG."""
        assert random_hierarchy(20, 30, seed=1).edges == random_hierarchy(20, 30, seed=1).edges

    @pytest.mark.parametrize(("n_nodes", "n_edges"), [(1, 0), (10, 5), (5, 11)])
    def test_unrealizable(self, n_nodes: int, n_edges: int) -> None:
        """Too few or too many edges is a configuration error."""
        with pytest.raises(ConfigError):
            random_hierarchy(n_nodes, n_edges)


class TestBlockRng:
    """Tests for per-block random streams."""

    def test_reproducible(self) -> None:
        """Equal coordinates give equal streams."""
        a = block_rng(7, 2, 1).integers(1 << 30, size=8)
        b = block_rng(7, 2, 1).integers(1 << 30, size=8)
        np.testing.assert_array_equal(a, b)

    @pytest.mark.parametrize("coordinates", [(8, 2, 1), (7, 3, 1), (7, 2, 2)])
    def test_independent(self, coordinates: tuple[int, int, int]) -> None:
        """Changing seed, ensemble or block changes the stream."""
        a = block_rng(7, 2, 1).integers(1 << 30, size=8)
        b = block_rng(*coordinates).integers(1 << 30, size=8)
        assert not np.array_equal(a, b)


class TestGenerate:
    """Tests for one benchmark network."""

    def test_object_count_and_names(self, small_tree: ReferenceHierarchy) -> None:
        """Exactly n_products objects, named by zero-padded index."""
        b = generate(small_tree, BenchmarkConfig(n_products=2500))
        assert b.n_objects == 2500
        assert b.objects[0] == "obj0000"
        assert b.objects[-1] == "obj2499"

    def test_tag_counts(self, small_tree: ReferenceHierarchy) -> None:
        """Every object carries between tags_min and tags_max distinct reference terms."""
        cfg = BenchmarkConfig(n_products=500, tags_min=2, tags_max=6)
        b = generate(small_tree, cfg)
        degrees = b.object_degrees()
        assert degrees.min() >= 2
        assert degrees.max() <= 6
        assert set(b.tags) <= small_tree.nodes

    def test_deterministic(self, small_tree: ReferenceHierarchy) -> None:
        """Equal configs give equal networks."""
        cfg = BenchmarkConfig(n_products=300, seed=11)
        assert generate(small_tree, cfg).edge_set() == generate(small_tree, cfg).edge_set()

    def test_independent_of_workers(self, small_tree: ReferenceHierarchy) -> None:
        """Block-parallel generation reproduces the sequential output."""
        cfg = BenchmarkConfig(n_products=3 * BLOCK_SIZE + 17, seed=5)
        sequential = generate(small_tree, cfg)
        parallel = generate(small_tree, cfg, n_workers=4)
        assert sequential.edge_set() == parallel.edge_set()

    def test_ensemble_index_changes_output(self, small_tree: ReferenceHierarchy) -> None:
        """Different ensemble members draw from different streams."""
        first = generate(small_tree, BenchmarkConfig(n_products=200, ensemble_index=0))
        second = generate(small_tree, BenchmarkConfig(n_products=200, ensemble_index=1))
        assert first.edge_set() != second.edge_set()

    def test_single_step_walks_reach_neighbors(self, small_tree: ReferenceHierarchy) -> None:
        """With p_rw = 1 and one-step walks, an object's two tags are adjacent."""
        cfg = BenchmarkConfig(
            n_products=400, p_rw=1.0, tags_min=2, tags_max=2, walk_min=1, walk_max=1
        )
        b = generate(small_tree, cfg)
        tags_by_object: dict[str, list[str]] = {}
        for obj, tag in b.edges():
            tags_by_object.setdefault(obj, []).append(tag)
        undirected = small_tree.graph.to_undirected()
        for tags in tags_by_object.values():
            assert len(tags) == 2
            assert undirected.has_edge(*tags)

    def test_walk_tags_stay_near_reference(self) -> None:
        """With p_rw = 1, some tag of every object has all others within walk_max steps."""
        tree = balanced_tree(3, 3)
        b = generate(tree, BenchmarkConfig(n_products=1000, p_rw=1.0, seed=3))
        distances = dict(nx.all_pairs_shortest_path_length(tree.graph.to_undirected()))
        tags_by_object: dict[str, list[str]] = {}
        for obj, tag in b.edges():
            tags_by_object.setdefault(obj, []).append(tag)
        assert len(tags_by_object) == 1000
        for tags in tags_by_object.values():
            assert 3 <= len(tags) <= 5
            assert any(all(distances[r][t] <= 3 for t in tags) for r in tags)

    def test_isolated_reference_warns(self) -> None:
        """Walks from an isolated term stay in place and are reported."""
        h = ReferenceHierarchy(
            ["a", "b", "c", "d", "lonely"], [("a", "b"), ("a", "c"), ("b", "d")]
        )
        cfg = BenchmarkConfig(n_products=300, tags_min=3, tags_max=3)
        with pytest.warns(UserWarning, match="isolated"):
            b = generate(h, cfg)
        assert (b.object_degrees() == 3).all()

    def test_uniform_draws_do_not_warn(self) -> None:
        """Without walks, isolated terms are harmless."""
        h = ReferenceHierarchy(["a", "b", "c", "lonely"], [("a", "b")])
        cfg = BenchmarkConfig(n_products=100, p_rw=0.0, tags_min=2, tags_max=2)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            generate(h, cfg)

    @pytest.mark.slow
    def test_uniform_draws_have_uniform_marginals(self) -> None:
        """With p_rw = 0 every term is equally likely; chi-square does not reject at 1%."""
        tree = balanced_tree(3, 3)
        b = generate(tree, BenchmarkConfig(n_products=100_000, p_rw=0.0, seed=7), n_workers=4)
        assert set(b.tags) == tree.nodes
        frequencies = b.tag_frequencies()
        result = chisquare(frequencies)
        assert result.pvalue > 0.01, (result.statistic, frequencies.tolist())

    def test_too_few_terms(self) -> None:
        """A hierarchy smaller than tags_max cannot host distinct tags."""
        with pytest.raises(ConfigError, match="tags_max"):
            generate(balanced_tree(1, 2), BenchmarkConfig())

    def test_empty_hierarchy(self) -> None:
        """A hierarchy without terms is empty input."""
        with pytest.raises(EmptyInputError):
            generate(ReferenceHierarchy([], []), BenchmarkConfig())

    def test_invalid_workers(self, small_tree: ReferenceHierarchy) -> None:
        """At least one worker is needed."""
        with pytest.raises(ConfigError):
            generate(small_tree, BenchmarkConfig(n_products=10), n_workers=0)


class TestGenerateEnsemble:
    """Tests for ensembles of benchmark networks."""

    def test_members(self, small_tree: ReferenceHierarchy) -> None:
        """Member i equals a single network generated with ensemble_index i."""
        template = BenchmarkConfig(n_products=150, seed=2)
        members = generate_ensemble(small_tree, template, 3)
        assert len(members) == 3
        expected = generate(small_tree, template.model_copy(update={"ensemble_index": 2}))
        assert members[2].edge_set() == expected.edge_set()
        assert members[0].edge_set() != members[1].edge_set()

    def test_parallel_members(self, small_tree: ReferenceHierarchy) -> None:
        """Threads do not change any member."""
        template = BenchmarkConfig(n_products=150, seed=2)
        sequential = generate_ensemble(small_tree, template, 4)
        parallel = generate_ensemble(small_tree, template, 4, n_workers=3)
        assert [m.edge_set() for m in sequential] == [m.edge_set() for m in parallel]

    def test_no_members(self, small_tree: ReferenceHierarchy) -> None:
        """An empty ensemble is a configuration error."""
        with pytest.raises(ConfigError):
            generate_ensemble(small_tree, BenchmarkConfig(), 0)


class TestBenchmarkConfig:
    """Validation of the benchmark protocol."""

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"tags_min": 6, "tags_max": 5},
            {"walk_min": 4, "walk_max": 3},
            {"p_rw": 1.5},
            {"n_products": 0},
        ],
    )
    def test_invalid(self, kwargs: dict[str, float]) -> None:
        """Inverted bounds and out-of-range values are rejected."""
        with pytest.raises(ValidationError):
            BenchmarkConfig(**kwargs)

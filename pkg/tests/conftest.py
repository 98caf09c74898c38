"""Pytest configuration and fixtures for hierbone tests."""

from pathlib import Path

import pytest

from hierbone import BipartiteGraph, ReferenceHierarchy, balanced_tree, build_bipartite
from hierbone.context import clear_artifact_registry

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures_dir() -> Path:
    """Directory of the hand-built OBO and GAF files."""
    return FIXTURES


@pytest.fixture(autouse=True)
def clean_registry():
    """Each test starts with an empty artifact registry."""
    clear_artifact_registry()
    yield
    clear_artifact_registry()


@pytest.fixture
def toy_pairs() -> list[tuple[str, str]]:
    """Objects tagged along the chain animal > mammal > dog, plus noise tags.

    Every dog object is a mammal object and every mammal object an animal
    object, so frequencies strictly decrease down the chain.
    """
    pairs = []
    for i in range(60):
        obj = f"o{i:02d}"
        pairs.append((obj, "animal"))
        if i < 30:
            pairs.append((obj, "mammal"))
        if i < 12:
            pairs.append((obj, "dog"))
        if i % 5 == 0:
            pairs.append((obj, "blue"))
    for i in range(60, 100):
        obj = f"o{i:02d}"
        pairs.append((obj, "plant"))
        if i % 4 == 0:
            pairs.append((obj, "blue"))
    return pairs


@pytest.fixture
def toy_bipartite(toy_pairs: list[tuple[str, str]]) -> BipartiteGraph:
    """Bipartite graph of toy_pairs."""
    return build_bipartite(toy_pairs)


@pytest.fixture
def small_tree() -> ReferenceHierarchy:
    """Balanced tree with branching 3 and depth 2 (13 nodes, 12 edges)."""
    return balanced_tree(3, 2)

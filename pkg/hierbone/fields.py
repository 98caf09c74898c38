"""Hierbone Fields Module.

Annotated pydantic field types used by the configuration models. Each type
normalizes loosely written command-line or JSON values (aliases, comma
separated lists) before pydantic's own validation runs.
"""

from __future__ import annotations

import math
from collections.abc import Iterable
from typing import Annotated, Any

from pydantic import AfterValidator, BeforeValidator, Field, PlainSerializer

from hierbone.namespaces import HIERARCHY_RELATIONS, normalize_namespace


def _split(value: Any) -> list[Any]:
    if isinstance(value, str):
        return [part.strip() for part in value.split(",") if part.strip()]
    if isinstance(value, Iterable):
        return list(value)
    return [value]


def _to_namespace(value: Any) -> Any:
    """BeforeValidator: resolve BP/CC/MF aliases and aspect letters."""
    if value is None or not isinstance(value, str):
        return value
    try:
        return normalize_namespace(value)
    except KeyError as e:
        raise ValueError(str(e.args[0])) from e


def validate_alpha_grid(value: Any) -> tuple[float, ...]:
    """Parse an alpha grid from ``"0.01,0.1"`` or a sequence of numbers.

    Raises:
        ValueError: If the grid is empty, not strictly increasing, or holds a
            value that is not a finite number > 0.
    """
    try:
        grid = tuple(float(v) for v in _split(value))
    except (TypeError, ValueError) as e:
        raise ValueError(f"Cannot parse alpha grid {value!r}") from e
    if not grid:
        raise ValueError("alpha grid is empty")
    if any(not math.isfinite(a) or a <= 0 for a in grid):
        raise ValueError(f"alpha grid values must be finite and > 0, got {grid}")
    if any(b <= a for a, b in zip(grid, grid[1:], strict=False)):
        raise ValueError(f"alpha grid must be strictly increasing, got {grid}")
    return grid


def _to_relations(value: Any) -> frozenset[str]:
    """BeforeValidator: accept "is_a,part_of" or a sequence of relation names."""
    relations = frozenset(str(v) for v in _split(value))
    unknown = relations - HIERARCHY_RELATIONS
    if unknown or not relations:
        raise ValueError(
            f"unsupported relations {sorted(unknown)}; choose from "
            f"{sorted(HIERARCHY_RELATIONS)}"
        )
    return relations


def _to_codes(value: Any) -> frozenset[str]:
    """BeforeValidator: accept "IEA,ND" or a sequence of evidence codes."""
    return frozenset(str(v) for v in _split(value))


def _to_tuple(value: Any) -> Any:
    """BeforeValidator: accept a comma separated string for list-valued fields."""
    return tuple(_split(value)) if isinstance(value, str) else value


def _finite(value: float) -> float:
    if not math.isfinite(value):
        raise ValueError(f"expected a finite number, got {value}")
    return value


NamespaceField = Annotated[str, BeforeValidator(_to_namespace)]

AlphaGrid = Annotated[tuple[float, ...], BeforeValidator(validate_alpha_grid)]

RelationSet = Annotated[
    frozenset[str],
    BeforeValidator(_to_relations),
    PlainSerializer(sorted, return_type=list[str]),
]

# frozensets serialize in hash order; sort them so manifests are stable
CodeSet = Annotated[
    frozenset[str],
    BeforeValidator(_to_codes),
    PlainSerializer(sorted, return_type=list[str]),
]

FiniteFloat = Annotated[float, AfterValidator(_finite)]

PositiveThreshold = Annotated[float, Field(gt=0), AfterValidator(_finite)]

PositiveIntList = Annotated[
    tuple[Annotated[int, Field(ge=1)], ...], BeforeValidator(_to_tuple)
]

ProbabilityList = Annotated[
    tuple[Annotated[float, Field(ge=0, le=1)], ...], BeforeValidator(_to_tuple)
]

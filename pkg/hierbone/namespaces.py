"""Hierbone Namespaces Module.

Defines the Gene Ontology vocabulary used by the parsers: the three term
namespaces, the one-letter aspect codes GAF files use for them, the short
aliases accepted on the command line, and the relation types that can form
hierarchy edges.
"""

from __future__ import annotations

from typing import TypedDict, get_type_hints


class AspectCodes(TypedDict):
    """Type definition for the namespace -> GAF aspect mapping.

    Attributes:
        biological_process: Aspect letter for biological process terms.
        cellular_component: Aspect letter for cellular component terms.
        molecular_function: Aspect letter for molecular function terms.
    """

    biological_process: str
    cellular_component: str
    molecular_function: str


# Keeps NAMESPACES in sync with the TypedDict definition
NAMESPACES: frozenset[str] = frozenset(get_type_hints(AspectCodes).keys())

ASPECT_CODES: AspectCodes = {
    "biological_process": "P",
    "cellular_component": "C",
    "molecular_function": "F",
}

NAMESPACE_BY_ASPECT: dict[str, str] = {
    code: namespace for namespace, code in ASPECT_CODES.items()
}

# Short command-line names
NAMESPACE_ALIASES: dict[str, str] = {
    "bp": "biological_process",
    "cc": "cellular_component",
    "mf": "molecular_function",
}

# Relations an OBO stanza can contribute as hierarchy edges
HIERARCHY_RELATIONS: frozenset[str] = frozenset(
    {
        "is_a",
        "part_of",
        "regulates",
        "positively_regulates",
        "negatively_regulates",
    }
)

DEFAULT_RELATIONS: frozenset[str] = frozenset({"is_a", "part_of"})


def normalize_namespace(value: str) -> str:
    """Resolve a namespace alias, aspect letter or full name.

    Args:
        value: "MF", "f", "molecular_function", "Molecular Function", ...

    Returns:
        The canonical namespace name.

    Raises:
        KeyError: If the value names no namespace.
    """
    key = value.strip().lower().replace(" ", "_")
    if key in NAMESPACES:
        return key
    if key in NAMESPACE_ALIASES:
        return NAMESPACE_ALIASES[key]
    if key.upper() in NAMESPACE_BY_ASPECT:
        return NAMESPACE_BY_ASPECT[key.upper()]
    supported = ", ".join(sorted(NAMESPACES | NAMESPACE_ALIASES.keys()))
    raise KeyError(f"Unknown namespace '{value}'; supported: {supported}")

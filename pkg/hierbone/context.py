"""Hierbone Context Module.

Provides context variable management for per-run pipeline state: the name of
the stage currently executing and the registry of artifacts published by the
run. Uses Python's contextvars so concurrent runs (threads or tasks) stay
isolated.
"""

from __future__ import annotations

import logging
from collections.abc import Iterator
from contextlib import contextmanager
from contextvars import ContextVar, Token
from pathlib import Path

from hierbone.exceptions import HierboneError, StageError

logger = logging.getLogger(__name__)

IDLE_STAGE = "idle"

# Name of the pipeline stage currently executing
stage_context: ContextVar[str] = ContextVar("stage_context", default=IDLE_STAGE)

# Files published by the current run, in publication order.
# Default is None to avoid a shared mutable default (lazy init)
_artifact_registry: ContextVar[list[Path] | None] = ContextVar(
    "_artifact_registry", default=None
)


def get_stage() -> str:
    """Get the name of the stage currently executing.

    Returns:
        The stage name, or ``"idle"`` outside any stage.
    """
    return stage_context.get()


def set_stage(stage: str) -> Token[str]:
    """Set the current stage name.

    Args:
        stage: Stage identifier (e.g. "project", "prune").

    Returns:
        A token that can be used to reset the context to its previous value.
    """
    return stage_context.set(stage)


def reset_stage(token: Token[str]) -> None:
    """Reset the stage context to its previous value.

    Args:
        token: The token returned by a previous set_stage call.
    """
    stage_context.reset(token)


@contextmanager
def pipeline_stage(stage: str) -> Iterator[None]:
    """Run a block as a named pipeline stage.

    Library errors escaping the block are re-raised as StageError carrying the
    stage name. Nested stages keep the innermost name.

    Args:
        stage: Stage identifier.

    Raises:
        StageError: If a HierboneError escapes the block.

    Example:
        >>> with pipeline_stage("prune"):
        ...     get_stage()
        'prune'
    """
    token = set_stage(stage)
    logger.info("stage %s: start", stage)
    try:
        yield
    except StageError:
        raise
    except HierboneError as e:
        raise StageError(stage, e) from e
    finally:
        reset_stage(token)
    logger.info("stage %s: done", stage)


def get_artifact_registry() -> list[Path]:
    """Get the artifact registry of the current run.

    Initializes a fresh list on first access in this context.

    Returns:
        The list of paths published so far.
    """
    registry = _artifact_registry.get()
    if registry is None:
        registry = []
        _artifact_registry.set(registry)
    return registry


def clear_artifact_registry() -> Token[list[Path] | None]:
    """Clear the artifact registry by resetting it to None.

    Returns:
        A token that can be used to restore the previous registry.

    Note:
        Call this at the start of each run so failures only roll back the
        files of that run.
    """
    return _artifact_registry.set(None)

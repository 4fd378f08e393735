"""
Repository-entry sidecar.

A workflow file carries its own title and description, but the repository
entry it was downloaded from usually has better ones, plus the tags. The
sidecar is a CSV next to the workflow files:

    id,title,description,tags
    1189,BLAST and align,"Runs BLAST ...",bioinformatics|blast

`id` is the file stem. Tags are separated by '|'. Non-empty entry values
replace the document's values.
"""

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, Tuple

import pandas as pd

from ..errors import ConfigError
from ..log import get_logger
from .structures import WorkflowGraph

log = get_logger(__name__)

ENTRY_COLUMNS = ("id", "title", "description", "tags")


@dataclass(frozen=True)
class RepositoryEntry:
    id: str
    title: str = ""
    description: str = ""
    tags: Tuple[str, ...] = ()


def load_entries(path: Path) -> Dict[str, RepositoryEntry]:
    """
    Read a sidecar file.

    Raises:
        ConfigError: The header lacks the id column
    """
    frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    if "id" not in frame.columns:
        raise ConfigError("entries", f"{path} has no 'id' column")
    for column in ENTRY_COLUMNS:
        if column not in frame.columns:
            frame[column] = ""

    entries = {}
    for row in frame.itertuples(index=False):
        tags = tuple(t.strip() for t in row.tags.split("|") if t.strip())
        entries[row.id.strip()] = RepositoryEntry(
            id=row.id.strip(),
            title=row.title.strip(),
            description=row.description.strip(),
            tags=tags,
        )
    log.debug(f"Loaded {len(entries)} repository entries from {path}")
    return entries


def apply_entry(graph: WorkflowGraph, entry: RepositoryEntry) -> WorkflowGraph:
    """Overlay the non-empty entry fields on a parsed workflow."""
    return replace(
        graph,
        title=entry.title or graph.title,
        description=entry.description or graph.description,
        tags=entry.tags or graph.tags,
    )

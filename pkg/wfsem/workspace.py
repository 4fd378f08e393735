"""
Workspace persistence.

A workspace directory holds one subdirectory per stage plus manifest.json,
which records for every stage the hash of its inputs, its output paths
(relative to the workspace), counts, per-item failures and timestamps.
Stages are listed in dependency order. A .lock file marks the workspace as
owned by a running process.
"""

import hashlib
import json
import os
from contextlib import contextmanager
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Optional

from .errors import WorkspaceLocked
from .exporters.tables import read_json, write_json
from .log import get_logger

log = get_logger(__name__)

STAGE_ORDER = ("filter", "prune", "harvest", "annotate", "score", "emit", "stats")
PIPELINE_STAGES = STAGE_ORDER[:6]
UPSTREAM = {
    "filter": None,
    "prune": "filter",
    "harvest": "prune",
    "annotate": "harvest",
    "score": "annotate",
    "emit": "annotate",
    "stats": "filter",
}
MANIFEST = "manifest.json"
LOCK = ".lock"


def now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def hash_inputs(files: Iterable[Path], root: Optional[Path] = None, extra: Any = None) -> str:
    """SHA-256 over file names, file contents and a JSON-able extra value."""
    digest = hashlib.sha256()
    for path in sorted(Path(p) for p in files):
        name = str(path.relative_to(root)) if root is not None else path.name
        digest.update(name.encode("utf-8") + b"\0")
        digest.update(path.read_bytes())
        digest.update(b"\0")
    if extra is not None:
        digest.update(json.dumps(extra, sort_keys=True, default=str).encode("utf-8"))
    return digest.hexdigest()


@dataclass
class StageRecord:
    stage: str
    input_hash: str = ""
    outputs: List[str] = field(default_factory=list)
    counts: Dict[str, Any] = field(default_factory=dict)
    failures: List[Dict[str, str]] = field(default_factory=list)
    started: str = ""
    finished: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {
            "input_hash": self.input_hash,
            "outputs": list(self.outputs),
            "counts": dict(self.counts),
            "failures": list(self.failures),
            "started": self.started,
            "finished": self.finished,
        }

    @classmethod
    def from_dict(cls, stage: str, data: Dict[str, Any]) -> "StageRecord":
        return cls(
            stage=stage,
            input_hash=data.get("input_hash", ""),
            outputs=list(data.get("outputs", ())),
            counts=dict(data.get("counts", {})),
            failures=list(data.get("failures", ())),
            started=data.get("started", ""),
            finished=data.get("finished", ""),
        )


@dataclass
class WorkspaceManifest:
    input_dir: str = ""
    stages: Dict[str, StageRecord] = field(default_factory=dict)

    def record(self, record: StageRecord) -> None:
        self.stages[record.stage] = record

    def to_dict(self) -> Dict[str, Any]:
        return {
            "input": self.input_dir,
            "stages": {
                name: self.stages[name].to_dict()
                for name in STAGE_ORDER if name in self.stages
            },
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "WorkspaceManifest":
        manifest = cls(input_dir=data.get("input", ""))
        for name, record in data.get("stages", {}).items():
            manifest.stages[name] = StageRecord.from_dict(name, record)
        return manifest


class Workspace:
    """A workspace directory and its manifest."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self.manifest = WorkspaceManifest()
        if self.manifest_path.is_file():
            self.manifest = WorkspaceManifest.from_dict(read_json(self.manifest_path))

    @property
    def manifest_path(self) -> Path:
        return self.root / MANIFEST

    def stage_dir(self, stage: str) -> Path:
        return self.root / stage

    def relative(self, path: Path) -> str:
        return Path(path).relative_to(self.root).as_posix()

    def outputs_present(self, stage: str) -> bool:
        record = self.manifest.stages.get(stage)
        if record is None or not record.finished:
            return False
        return all((self.root / out).exists() for out in record.outputs)

    def output_files(self, stage: str) -> List[Path]:
        """Files recorded as outputs of a stage (directories expanded)."""
        record = self.manifest.stages.get(stage)
        if record is None:
            return []
        files = []
        for out in record.outputs:
            path = self.root / out
            if path.is_dir():
                files.extend(p for p in path.rglob("*") if p.is_file())
            elif path.is_file():
                files.append(path)
        return sorted(files)

    def save(self) -> None:
        self.root.mkdir(parents=True, exist_ok=True)
        write_json(self.manifest_path, self.manifest.to_dict())

    @contextmanager
    def lock(self) -> Iterator["Workspace"]:
        """
        Own the workspace for the duration of the block.

        Raises:
            WorkspaceLocked: Another process holds the lock file
        """
        self.root.mkdir(parents=True, exist_ok=True)
        lock_path = self.root / LOCK
        try:
            fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise WorkspaceLocked(str(lock_path))
        try:
            os.write(fd, str(os.getpid()).encode("ascii"))
            os.close(fd)
            yield self
        finally:
            try:
                lock_path.unlink()
            except FileNotFoundError:
                log.warning(f"Lock file {lock_path} vanished")

"""
Exception hierarchy for wfsem.

Every error raised on purpose by the package derives from WfsemError, so the
CLI can map it to an exit code. Errors describing bad input data also derive
from ValueError.
"""

from typing import Optional


class WfsemError(Exception):
    """Base class for all wfsem errors."""


class MalformedXml(WfsemError, ValueError):
    """A document could not be parsed as XML."""

    def __init__(self, message: str, source: Optional[str] = None):
        self.source = source
        super().__init__(f"{source}: {message}" if source else message)


class UnknownDialect(WfsemError, ValueError):
    """The root namespace matches neither scufl nor t2flow."""

    def __init__(self, namespace: str):
        self.namespace = namespace
        super().__init__(f"Unknown workflow dialect for namespace '{namespace}'")


class DanglingLink(WfsemError, ValueError):
    """A data link references a processor or port that does not exist."""

    def __init__(self, processor: str, link: str = ""):
        self.processor = processor
        detail = f" in link {link}" if link else ""
        super().__init__(f"Link references missing processor or port '{processor}'{detail}")


class EmptyCorpus(WfsemError, ValueError):
    """Statistics were requested over an empty corpus."""

    def __init__(self) -> None:
        super().__init__("Corpus is empty")


class EmptyTermList(WfsemError, ValueError):
    """Relevance filtering was requested with no effective terms."""

    def __init__(self) -> None:
        super().__init__("Term list has no effective terms")


class UnknownNamespace(WfsemError, KeyError):
    """No loaded class belongs to the requested ontology namespace."""

    def __init__(self, namespace: str):
        self.namespace = namespace
        super().__init__(f"Unknown ontology namespace '{namespace}'")

    def __str__(self) -> str:
        return self.args[0]


class MalformedOntology(WfsemError, ValueError):
    """An ontology document does not follow its declared format."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class CycleDetected(WfsemError, ValueError):
    """The is-a graph of an ontology contains a cycle."""

    def __init__(self, class_id: str, ontology_id: str = ""):
        self.class_id = class_id
        self.ontology_id = ontology_id
        super().__init__(f"is_a cycle in {ontology_id or 'ontology'} through '{class_id}'")


class UnknownClass(WfsemError, KeyError):
    """A class URI is not present in the ontology store."""

    def __init__(self, uri: str):
        self.uri = uri
        super().__init__(f"Unknown ontology class '{uri}'")

    def __str__(self) -> str:
        return self.args[0]


class UnprunedInput(WfsemError, ValueError):
    """A workflow handed to the OPMW emitter still contains a shim."""

    def __init__(self, processor: str):
        self.processor = processor
        super().__init__(f"Workflow still contains shim processor '{processor}'")


class FetchError(WfsemError):
    """Retrieving a remote or fixture document failed."""

    def __init__(self, url: str, reason: str):
        self.url = url
        self.reason = reason
        super().__init__(f"Failed to fetch {url}: {reason}")


class ConfigError(WfsemError):
    """The pipeline configuration is invalid."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"Invalid config field '{field}': {message}")


class MissingUpstream(WfsemError):
    """A stage was run before the stages it depends on."""

    def __init__(self, stage: str, upstream: str):
        self.stage = stage
        self.upstream = upstream
        super().__init__(f"Stage '{stage}' needs outputs of '{upstream}'; run it first")


class WorkspaceLocked(WfsemError):
    """Another process owns the workspace."""

    def __init__(self, lock_path: str):
        self.lock_path = lock_path
        super().__init__(f"Workspace is locked ({lock_path})")

"""
Pipeline configuration.

Configuration is YAML addressed by dotted keys ("ic.metric"). Sources are
merged in this order, later winning:

    1. the packaged data/default_config.yaml
    2. the file given by --config, or $WFSEM_CONFIG
    3. --set dotted.key=value overrides (values parsed as YAML scalars/lists)
    4. dedicated CLI flags (--metric, --zhou-k, --jobs)

Relative paths in a config file resolve against that file's directory.
"""

import copy
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import yaml

from .annotator import PrecedenceOrder
from .errors import ConfigError
from .harvest.harvester import MetadataSource, SourceKind
from .log import get_logger
from .ontology.loaders import OntologyFormat
from .ontology.store import ICMetric
from .workflow.structures import CategoryTable, ProcessorCategory

log = get_logger(__name__)

ENV_VAR = "WFSEM_CONFIG"


@dataclass(frozen=True)
class OntologySpec:
    id: str
    path: Path
    format: OntologyFormat


@dataclass(frozen=True)
class FetchConfig:
    timeout: float = 10.0
    retries: int = 2
    backoff: float = 0.5
    fixtures: Optional[Path] = None


@dataclass
class PipelineConfig:
    ontologies: List[OntologySpec] = field(default_factory=list)
    precedence: PrecedenceOrder = field(default_factory=PrecedenceOrder)
    terms: Optional[Path] = None
    entries: str = "entries.csv"
    sources: List[MetadataSource] = field(default_factory=list)
    fetch: FetchConfig = field(default_factory=FetchConfig)
    categories: CategoryTable = field(default_factory=CategoryTable)
    metric: ICMetric = field(default_factory=ICMetric)
    bins: int = 10
    min_term_length: int = 3
    gold: Optional[Path] = None
    emit_namespace: str = "http://example.org/wfsem/workflow/"
    ntriples: bool = True
    top_n: int = 10
    jobs: Optional[int] = None
    source_file: Optional[Path] = None
    # merged raw values, used for stage input hashes
    raw: Dict[str, Any] = field(default_factory=dict)

    def section(self, *keys: str) -> Dict[str, Any]:
        """Raw values of some top-level keys, for hashing."""
        return {key: self.raw.get(key) for key in keys}


def default_config() -> Dict[str, Any]:
    text = resources.files("wfsem.data").joinpath("default_config.yaml").read_text(encoding="utf-8")
    return yaml.safe_load(text)


def deep_merge(base: Dict[str, Any], update: Mapping[str, Any]) -> Dict[str, Any]:
    """Merge update into a copy of base; nested mappings merge, the rest replaces."""
    merged = copy.deepcopy(base)
    for key, value in update.items():
        if isinstance(value, Mapping) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def set_dotted(data: Dict[str, Any], dotted: str, value: Any) -> None:
    keys = dotted.split(".")
    node = data
    for key in keys[:-1]:
        child = node.get(key)
        if not isinstance(child, dict):
            child = node[key] = {}
        node = child
    node[keys[-1]] = value


def parse_override(text: str) -> Tuple[str, Any]:
    """
    Split "dotted.key=value"; the value is read as YAML.

    Raises:
        ConfigError: No '=' or an empty key
    """
    key, sep, value = text.partition("=")
    if not sep or not key.strip():
        raise ConfigError(text, "override must look like dotted.key=value")
    try:
        parsed = yaml.safe_load(value) if value.strip() else ""
    except yaml.YAMLError:
        parsed = value
    return key.strip(), parsed


def _read_file(path: Path) -> Dict[str, Any]:
    if not path.is_file():
        raise ConfigError("config", f"file not found: {path}")
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as e:
        raise ConfigError("config", f"{path} is not valid YAML: {e}")
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError("config", f"{path} must hold a mapping")
    return data


def _path(value: Any, base: Path, field_name: str, must_exist: bool = True) -> Optional[Path]:
    if value in (None, ""):
        return None
    path = Path(str(value)).expanduser()
    if not path.is_absolute():
        path = base / path
    if must_exist and not path.exists():
        raise ConfigError(field_name, f"path does not exist: {path}")
    return path


def _number(data: Mapping[str, Any], key: str, field_name: str, kind=float, minimum=None):
    value = data.get(key)
    try:
        value = kind(value)
    except (TypeError, ValueError):
        raise ConfigError(field_name, f"expected a number, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(field_name, f"must be >= {minimum}")
    return value


def load_config(path: Optional[Path] = None, overrides: Sequence[str] = (),
                flags: Optional[Mapping[str, Any]] = None,
                env: Optional[Mapping[str, str]] = None) -> PipelineConfig:
    """
    Build and validate the pipeline configuration.

    Args:
        path: Config file (falls back to $WFSEM_CONFIG)
        overrides: "dotted.key=value" strings
        flags: Dotted keys set by dedicated CLI flags; None values are ignored
        env: Environment (os.environ by default)

    Returns:
        PipelineConfig

    Raises:
        ConfigError: Unreadable file or an invalid field (named in the error)
    """
    env = os.environ if env is None else env
    if path is None and env.get(ENV_VAR):
        path = Path(env[ENV_VAR])

    data = default_config()
    base = Path.cwd()
    if path is not None:
        path = Path(path).resolve()
        data = deep_merge(data, _read_file(path))
        base = path.parent
    for text in overrides:
        key, value = parse_override(text)
        set_dotted(data, key, value)
    for key, value in (flags or {}).items():
        if value is not None:
            set_dotted(data, key, value)

    config = _build(data, base)
    config.source_file = path
    log.debug(f"Configuration loaded from {path or 'defaults'}")
    return config


def _build(data: Dict[str, Any], base: Path) -> PipelineConfig:
    config = PipelineConfig(raw=data)

    ontology_ids = []
    for i, entry in enumerate(data.get("ontologies") or []):
        field_name = f"ontologies[{i}]"
        if not isinstance(entry, Mapping) or not entry.get("id") or not entry.get("path"):
            raise ConfigError(field_name, "needs id and path")
        try:
            fmt = OntologyFormat(str(entry.get("format", "obo")).lower())
        except ValueError:
            raise ConfigError(f"{field_name}.format", f"unknown format '{entry.get('format')}' (obo, table)")
        oid = str(entry["id"])
        if oid in ontology_ids:
            raise ConfigError(f"{field_name}.id", f"duplicate ontology id '{oid}'")
        ontology_ids.append(oid)
        config.ontologies.append(OntologySpec(oid, _path(entry["path"], base, f"{field_name}.path"), fmt))

    precedence = [str(p) for p in data.get("precedence") or []]
    unknown = [p for p in precedence if p not in ontology_ids]
    if unknown:
        raise ConfigError("precedence", f"unknown ontology ids {', '.join(unknown)}")
    try:
        config.precedence = PrecedenceOrder(tuple(precedence))
    except ValueError as e:
        raise ConfigError("precedence", str(e))

    config.terms = _path(data.get("terms"), base, "terms")
    config.entries = str(data.get("entries") or "entries.csv")
    config.gold = _path(data.get("gold"), base, "gold")

    fetch = data.get("fetch") or {}
    config.fetch = FetchConfig(
        timeout=_number(fetch, "timeout", "fetch.timeout", float, 0),
        retries=_number(fetch, "retries", "fetch.retries", int, 0),
        backoff=_number(fetch, "backoff", "fetch.backoff", float, 0),
        fixtures=_path(fetch.get("fixtures"), base, "fetch.fixtures"),
    )

    seen = set()
    for i, entry in enumerate(data.get("sources") or []):
        field_name = f"sources[{i}]"
        if not isinstance(entry, Mapping) or not entry.get("id"):
            raise ConfigError(field_name, "needs an id")
        try:
            kind = SourceKind(str(entry.get("kind")))
        except ValueError:
            raise ConfigError(f"{field_name}.kind", f"unknown source kind '{entry.get('kind')}'")
        if entry["id"] in seen:
            raise ConfigError(f"{field_name}.id", f"duplicate source id '{entry['id']}'")
        seen.add(entry["id"])
        locator = str(entry.get("locator") or "")
        if kind == SourceKind.FIXTURE:
            locator = str(_path(locator, base, f"{field_name}.locator"))
        keys = tuple(entry.get("keys") or ("endpoint", "service_name"))
        config.sources.append(MetadataSource(str(entry["id"]), kind, locator, keys))
    if not config.sources:
        raise ConfigError("sources", "at least one description source is required")

    categories = data.get("categories") or {}
    try:
        config.categories = CategoryTable.with_overrides(
            categories.get("scufl") or {}, categories.get("t2flow") or {})
    except ValueError:
        valid = ", ".join(c.value for c in ProcessorCategory)
        raise ConfigError("categories", f"values must be one of {valid}")

    ic = data.get("ic") or {}
    config.metric = ICMetric.parse(str(ic.get("metric", "zhou")),
                                   _number(ic, "zhou_k", "ic.zhou_k", float))
    config.bins = _number(data.get("histogram") or {}, "bins", "histogram.bins", int, 1)
    config.min_term_length = _number(data.get("annotator") or {}, "min_term_length",
                                     "annotator.min_term_length", int, 1)
    emit = data.get("emit") or {}
    config.emit_namespace = str(emit.get("namespace") or config.emit_namespace)
    config.ntriples = bool(emit.get("ntriples", True))
    config.top_n = _number(data.get("report") or {}, "top_n", "report.top_n", int, 0)
    if data.get("jobs") is not None:
        config.jobs = _number(data, "jobs", "jobs", int, 1)
    return config

"""
Description harvesting.

A processor's description is assembled from up to four fragments (service
name, service description, operation name, operation description). Sources
are asked in chain order; the first source that yields a fragment kind owns
it, and the walk stops once all four kinds are filled. A failing source is
logged and the walk goes on. When nothing names the service, the processor
name is used, so every description holds at least the service name.

Source kinds:
    embedded            processor name and the description stored in the workflow
    wsdl                WSDL document at the locator (default "{endpoint}")
    biomoby             BioMoby registry listing, e.g. ".../services?name={service_name}"
    catalogue_endpoint  service catalogue lookup by endpoint
    catalogue_free      service catalogue free-text search by service name
    fixture             directory of JSON fragment maps named sha256(key)

Locators are templates; the keys listed for a source ("endpoint",
"service_name") are tried in order and the first one that fills the
template and yields fragments is used.
"""

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple
from urllib.parse import quote

from ..errors import FetchError
from ..log import get_logger
from ..text import normalize_whitespace
from ..workflow.structures import Processor, ProcessorCategory
from .fetcher import HttpFetcher, fixture_name
from .model import FRAGMENT_ORDER, Fragment, FragmentKind, ServiceDescription
from .registries import parse_biomoby, parse_catalogue
from .wsdl import parse_wsdl_metadata

log = get_logger(__name__)

PROCESSOR_SOURCE = "processor"
DEFAULT_KEYS = ("endpoint", "service_name")


class SourceKind(str, Enum):
    EMBEDDED = "embedded"
    WSDL = "wsdl"
    BIOMOBY = "biomoby"
    CATALOGUE_ENDPOINT = "catalogue_endpoint"
    CATALOGUE_FREE = "catalogue_free"
    FIXTURE = "fixture"


@dataclass(frozen=True)
class MetadataSource:
    id: str
    kind: SourceKind
    locator: str = ""
    keys: Tuple[str, ...] = DEFAULT_KEYS

    def __post_init__(self):
        object.__setattr__(self, "kind", SourceKind(self.kind))
        object.__setattr__(self, "keys", tuple(self.keys))


def validate_chain(chain: Sequence[MetadataSource]) -> None:
    """
    Raises:
        ValueError: Empty chain or duplicate source ids
    """
    if not chain:
        raise ValueError("Source chain is empty")
    seen = set()
    for source in chain:
        if source.id in seen:
            raise ValueError(f"Duplicate source id '{source.id}'")
        seen.add(source.id)


def lookup_keys(processor: Processor) -> Dict[str, str]:
    """Values the locator templates can use."""
    keys = {}
    if processor.endpoint:
        keys["endpoint"] = processor.endpoint
    keys["service_name"] = processor.operation_name or processor.name
    if processor.operation_name:
        keys["operation_name"] = processor.operation_name
    return keys


def _fill(locator: str, key: str, value: str) -> Optional[str]:
    placeholder = "{" + key + "}"
    if placeholder not in locator:
        return None
    if locator.strip() == placeholder:
        return value
    return locator.replace(placeholder, quote(value, safe=""))


class _SourceReader:
    """Turns one source into a fragment map for a processor."""

    def __init__(self, http: HttpFetcher, timeout: Optional[float] = None):
        self.http = http
        self.timeout = timeout

    def read(self, source: MetadataSource, processor: Processor) -> Optional[Dict[FragmentKind, str]]:
        """Fragments from a source; None when the source does not apply."""
        if source.kind == SourceKind.EMBEDDED:
            found = {FragmentKind.SERVICE_NAME: processor.name}
            if processor.embedded_description:
                found[FragmentKind.SERVICE_DESCRIPTION] = processor.embedded_description
            return found
        if source.kind == SourceKind.FIXTURE:
            return self._read_fixture(source, processor)

        if source.kind == SourceKind.WSDL:
            if processor.category not in (ProcessorCategory.WSDL, ProcessorCategory.SOAPLAB):
                return None

            def parse(document: bytes, url: str) -> Dict[FragmentKind, str]:
                return parse_wsdl_metadata(document, processor.operation_name, url)
            locator = source.locator or "{endpoint}"
        elif source.kind == SourceKind.BIOMOBY:
            if processor.category != ProcessorCategory.BIOMOBY:
                return None

            def parse(document: bytes, url: str) -> Dict[FragmentKind, str]:
                return parse_biomoby(document, processor.operation_name or processor.name, url)
            locator = source.locator
        else:
            def parse(document: bytes, url: str) -> Dict[FragmentKind, str]:
                return parse_catalogue(document, processor.operation_name, url)
            locator = source.locator
        return self._read_remote(source, locator, processor, parse)

    def _read_remote(self, source: MetadataSource, locator: str, processor: Processor,
                     parse: Callable) -> Optional[Dict[FragmentKind, str]]:
        values = lookup_keys(processor)
        tried = False
        for key in source.keys:
            value = values.get(key)
            url = _fill(locator, key, value) if value else None
            if url is None:
                continue
            tried = True
            found = parse(self.http.fetch(url, self.timeout), url)
            if found:
                return found
        return {} if tried else None

    def _read_fixture(self, source: MetadataSource, processor: Processor) -> Optional[Dict[FragmentKind, str]]:
        values = lookup_keys(processor)
        directory = Path(source.locator)
        tried = False
        for key in source.keys:
            value = values.get(key)
            if not value:
                continue
            tried = True
            path = directory / fixture_name(value)
            if not path.is_file():
                continue
            data = json.loads(path.read_text(encoding="utf-8"))
            found = {FragmentKind(kind): text for kind, text in data.items()
                     if kind in FragmentKind._value2member_map_ and isinstance(text, str)}
            if found:
                return found
        return {} if tried else None


def harvest(processor: Processor, chain: Sequence[MetadataSource], http: HttpFetcher,
            workflow_id: str = "", timeout: Optional[float] = None) -> ServiceDescription:
    """
    Assemble a processor's description from a source chain.

    Args:
        processor: Processor to describe
        chain: Sources in priority order
        http: Fetcher used by remote sources
        workflow_id: Owning workflow, recorded in processor_ref
        timeout: Per-request timeout passed to the fetcher

    Returns:
        ServiceDescription; attempts records every source consulted with its
        outcome (ok, empty, skipped, error)

    Raises:
        ValueError: Empty chain or duplicate source ids
    """
    validate_chain(chain)
    reader = _SourceReader(http, timeout)
    description = ServiceDescription(processor_ref=(workflow_id, processor.name))
    filled: Dict[FragmentKind, Fragment] = {}

    for source in chain:
        if len(filled) == len(FRAGMENT_ORDER):
            break
        try:
            found = reader.read(source, processor)
        except Exception as e:
            reason = e.reason if isinstance(e, FetchError) else f"{type(e).__name__}: {e}"
            log.warning(f"{workflow_id}/{processor.name}: source {source.id} failed: {reason}")
            description.attempts.append({"source": source.id, "outcome": "error", "detail": reason})
            continue
        if found is None:
            description.attempts.append({"source": source.id, "outcome": "skipped", "detail": ""})
            continue

        contributed = []
        for kind in FRAGMENT_ORDER:
            text = normalize_whitespace(found.get(kind, ""))
            if text and kind not in filled:
                filled[kind] = Fragment(kind, text, source.id)
                contributed.append(kind.value)
        description.attempts.append({
            "source": source.id,
            "outcome": "ok" if contributed else "empty",
            "detail": ",".join(contributed),
        })

    if FragmentKind.SERVICE_NAME not in filled:
        filled[FragmentKind.SERVICE_NAME] = Fragment(
            FragmentKind.SERVICE_NAME, normalize_whitespace(processor.name), PROCESSOR_SOURCE)
    description.fragments = [filled[kind] for kind in FRAGMENT_ORDER if kind in filled]
    return description


def harvest_log_records(description: ServiceDescription) -> List[Dict[str, str]]:
    """Harvest-log lines (processor, source, outcome) for one description."""
    workflow_id, processor = description.processor_ref
    return [
        {"workflow": workflow_id, "processor": processor, **attempt}
        for attempt in description.attempts
    ]

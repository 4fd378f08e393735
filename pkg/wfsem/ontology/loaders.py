"""
Ontology document loaders.

Two formats are read:

OBO flat file (subset)
    [Term] stanzas with id, name, namespace, synonym, def, is_a, alt_id and
    is_obsolete. Other tags and [Typedef]/[Instance] stanzas are skipped.
    Prefixed ids (GO:0008150) become OBO PURLs
    (http://purl.obolibrary.org/obo/GO_0008150); ids that already are URIs
    are kept.

Term table
    CSV with header uri,label,synonyms,identifiers,definition,parents,obsolete
    (list columns '|'-separated) and an optional namespace column.
"""

import io
import re
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Union

import pandas as pd

from ..errors import MalformedOntology
from ..log import get_logger
from .store import OntologyClass, OntologyStore

log = get_logger(__name__)

OBO_PURL = "http://purl.obolibrary.org/obo/"
TERM_TABLE_COLUMNS = ("uri", "label", "synonyms", "identifiers", "definition", "parents", "obsolete")

_QUOTED = re.compile(r'"((?:[^"\\]|\\.)*)"')
_TRUE = {"true", "1", "yes", "y", "t"}


class OntologyFormat(str, Enum):
    OBO_FLAT = "obo"
    TERM_TABLE = "table"


def obo_id_to_uri(identifier: str) -> str:
    """Map an OBO id to a class URI."""
    identifier = identifier.strip()
    if "://" in identifier:
        return identifier
    return OBO_PURL + identifier.replace(":", "_", 1)


def _unquote(value: str, line_no: int) -> str:
    match = _QUOTED.match(value.strip())
    if not match:
        raise MalformedOntology(f"expected a quoted string, got {value!r}", line_no)
    return match.group(1).replace('\\"', '"').replace("\\\\", "\\")


def _decode(document: Union[bytes, str]) -> str:
    if isinstance(document, bytes):
        return document.decode("utf-8", errors="replace")
    return document


def parse_obo(document: Union[bytes, str], ontology_id: str) -> List[OntologyClass]:
    """
    Parse an OBO flat file into classes.

    Raises:
        MalformedOntology: A stanza line is not "tag: value", a term has no
            id, or a quoted field is unterminated
    """
    classes: List[OntologyClass] = []
    term: Optional[Dict] = None
    in_term = False

    def close(line_no: int) -> None:
        if term is None:
            return
        if "id" not in term:
            raise MalformedOntology("[Term] stanza without id", line_no)
        classes.append(OntologyClass(
            uri=obo_id_to_uri(term["id"]),
            ontology_id=ontology_id,
            label=term.get("name", ""),
            synonyms=frozenset(term["synonyms"]),
            identifiers=frozenset([term["id"], *term["alt_ids"]]),
            definition=term.get("def", ""),
            obsolete=term["obsolete"],
            parents=frozenset(obo_id_to_uri(p) for p in term["parents"]),
            namespace=term.get("namespace", ""),
        ))

    line_no = 0
    for line_no, raw in enumerate(_decode(document).splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("!"):
            continue
        if line.startswith("[") and line.endswith("]"):
            close(line_no)
            in_term = line == "[Term]"
            term = {"synonyms": set(), "alt_ids": [], "parents": set(), "obsolete": False} \
                if in_term else None
            continue
        if not in_term:
            continue
        tag, sep, value = line.partition(":")
        if not sep:
            raise MalformedOntology(f"expected 'tag: value', got {line!r}", line_no)
        tag = tag.strip()
        value = value.strip()
        # trailing "! comment" is not part of id-like values
        if tag in ("id", "is_a", "alt_id", "namespace"):
            value = value.split(" !", 1)[0].strip()

        if tag == "id":
            term["id"] = value
        elif tag == "name":
            term["name"] = value
        elif tag == "namespace":
            term["namespace"] = value
        elif tag == "def":
            term["def"] = _unquote(value, line_no)
        elif tag == "synonym":
            term["synonyms"].add(_unquote(value, line_no))
        elif tag == "is_a":
            term["parents"].add(value.split()[0])
        elif tag == "alt_id":
            term["alt_ids"].append(value)
        elif tag == "is_obsolete":
            term["obsolete"] = value.lower() == "true"
    close(line_no)
    return classes


def _split(value: str) -> List[str]:
    return [item.strip() for item in value.split("|") if item.strip()]


def parse_term_table(document: Union[bytes, str], ontology_id: str) -> List[OntologyClass]:
    """
    Parse a term table into classes.

    Raises:
        MalformedOntology: Missing columns, an empty uri, or unreadable CSV
    """
    try:
        frame = pd.read_csv(io.StringIO(_decode(document)), dtype=str, keep_default_na=False)
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise MalformedOntology(f"unreadable term table: {e}")
    missing = [c for c in TERM_TABLE_COLUMNS if c not in frame.columns]
    if missing:
        raise MalformedOntology(f"term table lacks columns {', '.join(missing)}", 1)
    if "namespace" not in frame.columns:
        frame["namespace"] = ""

    classes = []
    # header is line 1
    for line_no, row in enumerate(frame.itertuples(index=False), start=2):
        uri = row.uri.strip()
        if not uri:
            raise MalformedOntology("empty uri", line_no)
        classes.append(OntologyClass(
            uri=uri,
            ontology_id=ontology_id,
            label=row.label.strip(),
            synonyms=frozenset(_split(row.synonyms)),
            identifiers=frozenset(_split(row.identifiers)),
            definition=row.definition.strip(),
            obsolete=row.obsolete.strip().lower() in _TRUE,
            parents=frozenset(_split(row.parents)),
            namespace=row.namespace.strip(),
        ))
    return classes


def load_ontology(document: Union[bytes, str], fmt: OntologyFormat, ontology_id: str,
                  store: Optional[OntologyStore] = None) -> OntologyStore:
    """
    Parse an ontology document and add its classes to a store.

    Args:
        document: Document content
        fmt: OBO flat file or term table
        ontology_id: Id the classes are registered under (e.g. "EDAM")
        store: Store to extend (a new one when None)

    Returns:
        The store

    Raises:
        MalformedOntology: The document does not parse in the declared format
        CycleDetected: The is_a graph is cyclic
    """
    store = store if store is not None else OntologyStore()
    fmt = OntologyFormat(fmt)
    if fmt == OntologyFormat.OBO_FLAT:
        classes = parse_obo(document, ontology_id)
    else:
        classes = parse_term_table(document, ontology_id)
    # all or nothing: a cyclic or duplicate-laden document leaves the store as it was
    count = store.add_classes(classes)
    log.info(f"Loaded {count} classes into {ontology_id}")
    return store


def load_ontology_file(path: Union[str, Path], fmt: OntologyFormat, ontology_id: str,
                       store: Optional[OntologyStore] = None) -> OntologyStore:
    return load_ontology(Path(path).read_bytes(), fmt, ontology_id, store)

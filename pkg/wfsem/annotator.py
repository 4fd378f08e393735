"""
Dictionary annotator.

Every label, synonym and identifier of a live (non-obsolete) ontology class is
tokenized and stored in a token trie. Annotation scans a description left to
right, takes the longest dictionary entry starting at each position, emits
one annotation per class sharing that entry, and resumes after the match.
Matching is exact on case-folded tokens: no stemming, no fuzzy distance.

Spans are half-open token ranges: (0, 2) covers tokens 0 and 1.
"""

import threading
import weakref
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .log import get_logger
from .ontology.store import OntologyStore
from .text import term_tokens, tokenize

log = get_logger(__name__)

DEFAULT_MIN_TERM_LENGTH = 3


@dataclass(frozen=True)
class Annotation:
    class_uri: str
    ontology_id: str
    matched_text: str
    span: Tuple[int, int]
    ic: Optional[float] = None

    def with_ic(self, ic: Optional[float]) -> "Annotation":
        return replace(self, ic=ic)

    def to_dict(self) -> Dict:
        return {
            "class_uri": self.class_uri,
            "ontology": self.ontology_id,
            "matched_text": self.matched_text,
            "span": list(self.span),
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "Annotation":
        return cls(
            class_uri=data["class_uri"],
            ontology_id=data["ontology"],
            matched_text=data["matched_text"],
            span=tuple(data["span"]),
            ic=data.get("ic"),
        )


@dataclass(frozen=True)
class PrecedenceOrder:
    """Ontology ids, most preferred first."""
    ontologies: Tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "ontologies", tuple(self.ontologies))
        if len(set(self.ontologies)) != len(self.ontologies):
            raise ValueError(f"Duplicate ontology in precedence order {self.ontologies}")

    def rank(self, ontology_id: str) -> Tuple[int, str]:
        """Sort key: listed ontologies by position, the rest after them by id."""
        try:
            return (self.ontologies.index(ontology_id), "")
        except ValueError:
            return (len(self.ontologies), ontology_id)


@dataclass
class _TrieNode:
    children: Dict[str, "_TrieNode"] = field(default_factory=dict)
    # (class uri, ontology id, matched name), one per class
    entries: List[Tuple[str, str, str]] = field(default_factory=list)


class Dictionary:
    """Token trie over the names of the live classes in a store."""

    def __init__(self, min_term_length: int = DEFAULT_MIN_TERM_LENGTH):
        self.min_term_length = min_term_length
        self.root = _TrieNode()
        self.size = 0

    def add(self, name: str, class_uri: str, ontology_id: str) -> bool:
        """Register one name; False when it is too short or has no tokens."""
        tokens = term_tokens(name)
        if not tokens:
            return False
        if len(tokens) == 1 and len(tokens[0]) < self.min_term_length:
            return False
        node = self.root
        for token in tokens:
            node = node.children.setdefault(token, _TrieNode())
        if any(uri == class_uri and oid == ontology_id for uri, oid, _ in node.entries):
            return False
        if not node.entries:
            self.size += 1
        node.entries.append((class_uri, ontology_id, name))
        return True

    @classmethod
    def from_store(cls, store: OntologyStore,
                   min_term_length: int = DEFAULT_MIN_TERM_LENGTH) -> "Dictionary":
        dictionary = cls(min_term_length)
        for ontology_class in store.classes():
            if ontology_class.obsolete:
                continue
            for name in ontology_class.names():
                dictionary.add(name, ontology_class.uri, ontology_class.ontology_id)
        log.debug(f"Dictionary holds {dictionary.size} distinct entries")
        return dictionary

    def longest_match(self, tokens: Sequence[str], start: int) -> Tuple[int, List[Tuple[str, str, str]]]:
        """End of the longest entry starting at start (start itself when none)."""
        node = self.root
        best_end, best = start, []
        for i in range(start, len(tokens)):
            node = node.children.get(tokens[i])
            if node is None:
                break
            if node.entries:
                best_end, best = i + 1, node.entries
        return best_end, best

    def annotate(self, text: str) -> List[Annotation]:
        tokens = tokenize(text)
        found: List[Annotation] = []
        i = 0
        while i < len(tokens):
            end, entries = self.longest_match(tokens, i)
            if not entries:
                i += 1
                continue
            for class_uri, ontology_id, name in sorted(entries, key=lambda e: (e[1], e[0])):
                found.append(Annotation(class_uri, ontology_id, name, (i, end)))
            i = end
        return found


_dictionaries: "weakref.WeakKeyDictionary[OntologyStore, Dict[int, Dictionary]]" = \
    weakref.WeakKeyDictionary()
_dictionaries_lock = threading.Lock()


def dictionary_for(store: OntologyStore,
                   min_term_length: int = DEFAULT_MIN_TERM_LENGTH) -> Dictionary:
    """Dictionary of a store, built once per store and minimum length."""
    with _dictionaries_lock:
        per_store = _dictionaries.setdefault(store, {})
        if min_term_length not in per_store:
            per_store[min_term_length] = Dictionary.from_store(store, min_term_length)
        return per_store[min_term_length]


def annotate(text: str, store: Union[OntologyStore, Dictionary],
             min_term_length: int = DEFAULT_MIN_TERM_LENGTH) -> List[Annotation]:
    """
    Annotate a description with ontology classes.

    Args:
        text: Description text
        store: Frozen store (its dictionary is built on first use) or a Dictionary
        min_term_length: Shortest single-token entry kept

    Returns:
        Annotations in text order, pre-dedup: every class sharing a matched
        entry is listed
    """
    if not text:
        return []
    dictionary = store if isinstance(store, Dictionary) else dictionary_for(store, min_term_length)
    return dictionary.annotate(text)


def dedup(annotations: Iterable[Annotation], order: PrecedenceOrder) -> List[Annotation]:
    """
    Keep one annotation per class URI, from the most preferred ontology.

    Survivors keep their input order. Annotations with different URIs are
    all kept, whatever their labels.
    """
    annotations = list(annotations)
    best: Dict[str, int] = {}
    for index, annotation in enumerate(annotations):
        current = best.get(annotation.class_uri)
        if current is None or \
                order.rank(annotation.ontology_id) < order.rank(annotations[current].ontology_id):
            best[annotation.class_uri] = index
    return [annotations[i] for i in sorted(best.values())]

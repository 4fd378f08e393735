"""
Relevance filter.

Selects bioinformatics workflows by looking for the terms of a TermList in a
workflow's title, description and tags. A term matches when its tokens occur
as consecutive tokens of a field (see wfsem.text), so "rna" never matches
inside "internal".

Term-list file format: one term per line under "[base]", "[removed]" and
"[added]" section headers; blank lines and lines starting with '#' are
ignored.
"""

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Union

from .errors import ConfigError, EmptyTermList
from .log import get_logger
from .ontology.store import OntologyStore
from .text import find_token_sequence, term_tokens, tokenize
from .workflow.structures import WorkflowGraph

log = get_logger(__name__)

SECTIONS = ("base", "removed", "added")
FIELDS = ("title", "description", "tags")


def _fold(terms: Iterable[str]) -> FrozenSet[str]:
    return frozenset(t.strip().casefold() for t in terms if t and t.strip())


@dataclass(frozen=True)
class TermList:
    """Base terms from a definition search plus curated deltas, case-folded."""
    base_terms: FrozenSet[str] = frozenset()
    removed: FrozenSet[str] = frozenset()
    added: FrozenSet[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "base_terms", _fold(self.base_terms))
        object.__setattr__(self, "removed", _fold(self.removed))
        object.__setattr__(self, "added", _fold(self.added))

    @property
    def effective(self) -> FrozenSet[str]:
        return (self.base_terms - self.removed) | self.added

    def add(self, *terms: str) -> "TermList":
        return TermList(self.base_terms, self.removed, self.added | _fold(terms))

    def remove(self, *terms: str) -> "TermList":
        # a removal overrides an earlier addition
        folded = _fold(terms)
        return TermList(self.base_terms, self.removed | folded, self.added - folded)

    def with_base(self, terms: Iterable[str]) -> "TermList":
        return TermList(_fold(terms), self.removed, self.added)


@dataclass(frozen=True)
class FilterVerdict:
    workflow_id: str
    relevant: bool
    matched_terms: FrozenSet[str] = frozenset()
    matched_fields: FrozenSet[str] = frozenset()
    # term -> fields it matched in
    matches: Dict[str, FrozenSet[str]] = field(default_factory=dict, compare=False)


def parse_term_list(text: str) -> TermList:
    """
    Parse term-list file content.

    Raises:
        ConfigError: Unknown section, or a term before the first section
    """
    sections: Dict[str, List[str]] = {name: [] for name in SECTIONS}
    current: Optional[str] = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip().lower()
            if current not in sections:
                raise ConfigError("terms", f"line {line_no}: unknown section [{current}]")
            continue
        if current is None:
            raise ConfigError("terms", f"line {line_no}: term outside a section")
        sections[current].append(line)
    return TermList(
        base_terms=frozenset(sections["base"]),
        removed=frozenset(sections["removed"]),
        added=frozenset(sections["added"]),
    )


def load_term_list(path: Optional[Union[str, Path]] = None) -> TermList:
    """Read a term-list file; the packaged curated list when path is None."""
    if path is None:
        text = resources.files("wfsem.data").joinpath("terms.txt").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return parse_term_list(text)


def format_term_list(terms: TermList) -> str:
    """Render a TermList in the file format (sorted, case-folded)."""
    lines = []
    for name, values in (("base", terms.base_terms), ("removed", terms.removed),
                         ("added", terms.added)):
        lines.append(f"[{name}]")
        lines.extend(sorted(values))
        lines.append("")
    return "\n".join(lines)


def definition_search(store: OntologyStore, namespace: str, query: str,
                      include_subclasses: bool = True) -> Set[str]:
    """
    Find classes of an ontology branch whose definition mentions a term.

    Args:
        store: Loaded ontologies
        namespace: Branch to search (OBO namespace such as EDAM "topic")
        query: Term looked up as a whole-word, case-insensitive token sequence
        include_subclasses: Add the transitive subclasses of every hit

    Returns:
        Set of class URIs

    Raises:
        UnknownNamespace: No loaded class is in that namespace
    """
    needle = term_tokens(query)
    hits: Set[str] = set()
    branch = store.in_namespace(namespace)
    for cls in branch:
        if cls.obsolete:
            continue
        if needle and find_token_sequence(tokenize(cls.definition), needle):
            hits.add(cls.uri)
    if include_subclasses:
        for cls in branch:
            if cls.uri in hits:
                hits |= store.subclasses(cls.uri, cls.ontology_id)
    log.debug(f"definition search '{query}' in {namespace}: {len(hits)} classes")
    return hits


def regenerate_term_list(store: OntologyStore, curated: TermList, namespace: str = "topic",
                         query: str = "bioinformatics") -> TermList:
    """Base terms = labels of the definition-search hits; deltas carried over."""
    uris = definition_search(store, namespace, query, include_subclasses=True)
    labels = set()
    for uri in uris:
        cls = store.get(uri)
        if cls.label and not cls.obsolete:
            labels.add(cls.label)
    return curated.with_base(labels)


def _field_tokens(graph: WorkflowGraph) -> Dict[str, List[List[str]]]:
    return {
        "title": [tokenize(graph.title)],
        "description": [tokenize(graph.description)],
        # a term must fit inside one tag
        "tags": [tokenize(tag) for tag in graph.tags],
    }


def apply_filter(graph: WorkflowGraph, terms: TermList) -> FilterVerdict:
    """
    Decide whether a workflow is bioinformatics-relevant.

    Raises:
        EmptyTermList: terms has no effective terms
    """
    effective = terms.effective
    if not effective:
        raise EmptyTermList()

    fields = _field_tokens(graph)
    matches: Dict[str, FrozenSet[str]] = {}
    for term in sorted(effective):
        needle = term_tokens(term)
        if not needle:
            continue
        hit = frozenset(
            name for name in FIELDS
            if any(find_token_sequence(tokens, needle) for tokens in fields[name])
        )
        if hit:
            matches[term] = hit

    matched_fields = frozenset().union(*matches.values()) if matches else frozenset()
    return FilterVerdict(
        workflow_id=graph.id,
        relevant=bool(matches),
        matched_terms=frozenset(matches),
        matched_fields=matched_fields,
        matches=matches,
    )


def tag_filter(graph: WorkflowGraph, tag: str = "bioinformatics") -> bool:
    """Single-tag baseline: True when the workflow carries the tag (any case)."""
    wanted = tag.casefold()
    return any(t.strip().casefold() == wanted for t in graph.tags)

"""
Ontology store and intrinsic Information Content.

Classes are keyed by (ontology id, uri): the same URI loaded from two
documents (an ontology and one that imports it) keeps two entries with their
own statistics. Statistics are computed per ontology over its hierarchy, the
non-obsolete classes reachable from a parentless class through is_a edges
that resolve inside the same ontology. Obsolete and detached classes are kept
for matching but are never scored.

Per class:
    hypo       descendants, excluding the class
    depth      longest path from a root, root = 1
    leaves     leaves among descendants and the class itself
    subsumers  ancestors, including the class

Per ontology: node_count, leaf_count, max_depth.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

import networkx as nx

from ..errors import ConfigError, CycleDetected, MalformedOntology, UnknownClass, UnknownNamespace
from ..log import get_logger

log = get_logger(__name__)


@dataclass(frozen=True)
class OntologyClass:
    """One ontology class."""
    uri: str
    ontology_id: str
    label: str = ""
    synonyms: FrozenSet[str] = frozenset()
    identifiers: FrozenSet[str] = frozenset()
    definition: str = ""
    obsolete: bool = False
    parents: FrozenSet[str] = frozenset()
    namespace: str = ""

    def names(self) -> List[str]:
        """Strings the annotator may match: label, synonyms and identifiers."""
        found = [self.label] if self.label else []
        found.extend(sorted(self.synonyms))
        found.extend(sorted(self.identifiers))
        return found


class MetricKind(str, Enum):
    SECO = "seco"
    ZHOU = "zhou"
    SANCHEZ = "sanchez"


@dataclass(frozen=True)
class ICMetric:
    """An intrinsic IC metric; k only matters for Zhou."""
    kind: MetricKind = MetricKind.ZHOU
    k: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.k <= 1.0:
            raise ConfigError("ic.zhou_k", f"must lie in [0, 1], got {self.k}")

    @classmethod
    def seco(cls) -> "ICMetric":
        return cls(MetricKind.SECO)

    @classmethod
    def zhou(cls, k: float = 0.5) -> "ICMetric":
        return cls(MetricKind.ZHOU, k)

    @classmethod
    def sanchez(cls) -> "ICMetric":
        return cls(MetricKind.SANCHEZ)

    @classmethod
    def parse(cls, name: str, zhou_k: float = 0.5) -> "ICMetric":
        try:
            kind = MetricKind(name.lower())
        except ValueError:
            raise ConfigError("ic.metric", f"unknown metric '{name}' (seco, zhou, sanchez)")
        return cls(kind, zhou_k)

    def __str__(self) -> str:
        if self.kind == MetricKind.ZHOU:
            return f"zhou(k={self.k:g})"
        return self.kind.value


@dataclass(frozen=True)
class ClassStats:
    hypo: int
    depth: int
    leaves: int
    subsumers: int


@dataclass
class OntologyStats:
    """Hierarchy statistics of one loaded ontology."""
    ontology_id: str
    node_count: int = 0
    leaf_count: int = 0
    max_depth: int = 0
    classes: Dict[str, ClassStats] = field(default_factory=dict)
    # Largest raw Sanchez value, the normalisation constant
    sanchez_max: float = 0.0
    detached: int = 0
    obsolete: int = 0


def _raw_sanchez(stats: ClassStats, leaf_count: int) -> float:
    return -math.log((stats.leaves / stats.subsumers + 1.0) / (leaf_count + 1.0))


def compute_ontology_stats(ontology_id: str, classes: Iterable[OntologyClass]) -> OntologyStats:
    """
    Compute hierarchy statistics for the classes of one ontology.

    Raises:
        CycleDetected: The is_a edges between live classes form a cycle
    """
    classes = list(classes)
    live = {c.uri: c for c in classes if not c.obsolete}
    result = OntologyStats(ontology_id, obsolete=len(classes) - len(live))

    graph = nx.DiGraph()
    graph.add_nodes_from(live)
    for cls in live.values():
        for parent in cls.parents:
            if parent in live:
                graph.add_edge(parent, cls.uri)
    try:
        cycle = nx.find_cycle(graph)
        raise CycleDetected(min(edge[0] for edge in cycle), ontology_id)
    except nx.NetworkXNoCycle:
        pass

    roots = [uri for uri, cls in live.items() if not cls.parents]
    hierarchy_nodes: Set[str] = set(roots)
    for root in roots:
        hierarchy_nodes |= nx.descendants(graph, root)
    hierarchy = graph.subgraph(hierarchy_nodes)
    result.detached = len(live) - len(hierarchy_nodes)
    if not hierarchy_nodes:
        return result

    # One bit per class: descendant and ancestor sets as ints.
    order = list(nx.topological_sort(hierarchy))
    bit = {uri: 1 << i for i, uri in enumerate(sorted(hierarchy_nodes))}
    leaf_mask = 0
    for uri in hierarchy_nodes:
        if hierarchy.out_degree(uri) == 0:
            leaf_mask |= bit[uri]

    depth: Dict[str, int] = {}
    ancestors: Dict[str, int] = {}
    for uri in order:
        preds = list(hierarchy.predecessors(uri))
        depth[uri] = 1 + max((depth[p] for p in preds), default=0)
        mask = 0
        for p in preds:
            mask |= ancestors[p] | bit[p]
        ancestors[uri] = mask

    descendants: Dict[str, int] = {}
    for uri in reversed(order):
        mask = 0
        for child in hierarchy.successors(uri):
            mask |= descendants[child] | bit[child]
        descendants[uri] = mask

    for uri in hierarchy_nodes:
        result.classes[uri] = ClassStats(
            hypo=descendants[uri].bit_count(),
            depth=depth[uri],
            leaves=((descendants[uri] | bit[uri]) & leaf_mask).bit_count(),
            subsumers=ancestors[uri].bit_count() + 1,
        )
    result.node_count = len(hierarchy_nodes)
    result.leaf_count = leaf_mask.bit_count()
    result.max_depth = max(depth.values())
    result.sanchez_max = max(_raw_sanchez(s, result.leaf_count) for s in result.classes.values())
    return result


class OntologyStore:
    """
    Loaded ontology classes plus their hierarchy statistics.

    Build by calling add_class (the loaders do this), then freeze(). Statistics
    are computed on first use or at freeze; a frozen store rejects additions
    and is safe to read from many threads.
    """

    def __init__(self):
        self._classes: Dict[Tuple[str, str], OntologyClass] = {}
        self._ontologies: List[str] = []
        self._by_uri: Dict[str, List[str]] = {}
        self._stats: Dict[str, OntologyStats] = {}
        self._frozen = False

    # Building

    def add_class(self, cls: OntologyClass) -> None:
        if self._frozen:
            raise RuntimeError("OntologyStore is frozen")
        key = (cls.ontology_id, cls.uri)
        if key in self._classes:
            raise MalformedOntology(f"duplicate class {cls.uri} in {cls.ontology_id}")
        if cls.ontology_id not in self._ontologies:
            self._ontologies.append(cls.ontology_id)
        self._classes[key] = cls
        self._by_uri.setdefault(cls.uri, []).append(cls.ontology_id)
        self._stats.pop(cls.ontology_id, None)

    def add_classes(self, classes: Iterable[OntologyClass]) -> int:
        """
        Add a batch of classes, all or nothing.

        The batch is checked for duplicates and each touched ontology's
        hierarchy is computed before anything is registered, so a failing
        batch leaves the store unchanged.

        Raises:
            MalformedOntology: A class is already loaded or repeated in the batch
            CycleDetected: The batch closes an is_a cycle
        """
        if self._frozen:
            raise RuntimeError("OntologyStore is frozen")
        batch = list(classes)
        seen = set()
        for cls in batch:
            key = (cls.ontology_id, cls.uri)
            if key in self._classes or key in seen:
                raise MalformedOntology(f"duplicate class {cls.uri} in {cls.ontology_id}")
            seen.add(key)

        stats = {}
        for ontology_id in dict.fromkeys(cls.ontology_id for cls in batch):
            candidates = self.classes(ontology_id) + [c for c in batch if c.ontology_id == ontology_id]
            stats[ontology_id] = compute_ontology_stats(ontology_id, candidates)

        for cls in batch:
            self.add_class(cls)
        self._stats.update(stats)
        return len(batch)

    def freeze(self) -> "OntologyStore":
        for ontology_id in self._ontologies:
            self.ontology_stats(ontology_id)
        self._frozen = True
        return self

    @property
    def frozen(self) -> bool:
        return self._frozen

    # Lookup

    @property
    def ontology_ids(self) -> List[str]:
        """Ontology ids in load order."""
        return list(self._ontologies)

    def __len__(self) -> int:
        return len(self._classes)

    def __contains__(self, uri: str) -> bool:
        return uri in self._by_uri

    def classes(self, ontology_id: Optional[str] = None) -> List[OntologyClass]:
        """All classes in load order, optionally of one ontology."""
        return [c for (oid, _), c in self._classes.items()
                if ontology_id is None or oid == ontology_id]

    def get(self, uri: str, ontology_id: Optional[str] = None) -> OntologyClass:
        """
        Look up a class.

        Without ontology_id the copy from the first loaded ontology holding
        the URI is returned.

        Raises:
            UnknownClass: The URI is not loaded (in that ontology)
        """
        owners = self._by_uri.get(uri)
        if not owners:
            raise UnknownClass(uri)
        if ontology_id is None:
            ontology_id = owners[0]
        elif ontology_id not in owners:
            raise UnknownClass(uri)
        return self._classes[(ontology_id, uri)]

    def owners(self, uri: str) -> List[str]:
        """Ontologies holding a class URI."""
        return list(self._by_uri.get(uri, ()))

    def resolve(self, reference: str) -> str:
        """
        Map a URI or a class identifier (e.g. "GO:0008150") to a loaded URI.

        Raises:
            UnknownClass: Nothing matches
        """
        if reference in self._by_uri:
            return reference
        for cls in self._classes.values():
            if reference in cls.identifiers:
                return cls.uri
        raise UnknownClass(reference)

    def in_namespace(self, namespace: str) -> List[OntologyClass]:
        """
        Classes whose OBO namespace (or ontology id) equals namespace.

        Raises:
            UnknownNamespace: No class carries that namespace
        """
        found = [c for c in self._classes.values()
                 if c.namespace == namespace or (not c.namespace and c.ontology_id == namespace)]
        if not found:
            raise UnknownNamespace(namespace)
        return found

    def subclasses(self, uri: str, ontology_id: str) -> Set[str]:
        """Transitive subclasses of a class within its ontology."""
        children: Dict[str, Set[str]] = {}
        for cls in self.classes(ontology_id):
            for parent in cls.parents:
                children.setdefault(parent, set()).add(cls.uri)
        graph = nx.DiGraph()
        for parent, kids in children.items():
            graph.add_edges_from((parent, kid) for kid in kids)
        if uri not in graph:
            return set()
        return nx.descendants(graph, uri)

    # Statistics

    def ontology_stats(self, ontology_id: str) -> OntologyStats:
        stats = self._stats.get(ontology_id)
        if stats is None:
            if ontology_id not in self._ontologies:
                raise KeyError(ontology_id)
            stats = compute_ontology_stats(ontology_id, self.classes(ontology_id))
            log.debug(f"{ontology_id}: {stats.node_count} classes, {stats.leaf_count} leaves, "
                      f"max depth {stats.max_depth}, {stats.detached} detached")
            self._stats[ontology_id] = stats
        return stats

    def class_stats(self, uri: str, ontology_id: Optional[str] = None) -> Optional[ClassStats]:
        """Statistics of a class, None when obsolete or detached."""
        cls = self.get(uri, ontology_id)
        return self.ontology_stats(cls.ontology_id).classes.get(uri)

    def information_content(self, uri: str, metric: ICMetric,
                            ontology_id: Optional[str] = None) -> Optional[float]:
        """IC of a class in [0, 1]; None when the class cannot be scored."""
        cls = self.get(uri, ontology_id)
        ontology = self.ontology_stats(cls.ontology_id)
        stats = ontology.classes.get(uri)
        if stats is None:
            return None
        if ontology.node_count <= 1:
            return 0.0

        if metric.kind == MetricKind.SANCHEZ:
            if ontology.sanchez_max <= 0.0:
                return 0.0
            value = _raw_sanchez(stats, ontology.leaf_count) / ontology.sanchez_max
            return _clamp(value)

        seco = 1.0 - math.log(stats.hypo + 1) / math.log(ontology.node_count)
        if metric.kind == MetricKind.SECO:
            return _clamp(seco)

        if ontology.max_depth > 1:
            depth_term = math.log(stats.depth) / math.log(ontology.max_depth)
        else:
            depth_term = 1.0
        return _clamp(metric.k * seco + (1.0 - metric.k) * depth_term)


def _clamp(value: float) -> float:
    return min(1.0, max(0.0, value))


def information_content(store: OntologyStore, uri: str, metric: ICMetric,
                        ontology_id: Optional[str] = None) -> Optional[float]:
    """
    Intrinsic IC of an ontology class.

    Args:
        store: Store holding the class
        uri: Class URI
        metric: Seco, Zhou(k) or Sanchez (normalised by its ontology maximum)
        ontology_id: Which copy to score when the URI is loaded twice

    Returns:
        Value in [0, 1], or None for obsolete and hierarchy-detached classes

    Raises:
        UnknownClass: uri is not loaded
    """
    return store.information_content(uri, metric, ontology_id)

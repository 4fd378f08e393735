"""Ontology loading, is-a statistics and intrinsic Information Content."""

from .loaders import OntologyFormat, load_ontology, load_ontology_file
from .store import ICMetric, MetricKind, OntologyClass, OntologyStore, information_content

__all__ = [
    "ICMetric",
    "MetricKind",
    "OntologyClass",
    "OntologyFormat",
    "OntologyStore",
    "information_content",
    "load_ontology",
    "load_ontology_file",
]

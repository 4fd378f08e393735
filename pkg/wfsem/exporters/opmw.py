"""
OPMW template export.

Each surviving processor of a pruned workflow becomes one resource:

    <wf/blast> a opmw:WorkflowTemplateProcess, <annotation class> ... ;
        opmw:template <wf> ;
        opmw:uses <wf/upstream> .

opmw:uses points at the processor feeding this one through a data link;
parallel links between the same pair give one triple. Labels and matched
text are not exported.
"""

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Sequence
from urllib.parse import quote

from rdflib import Graph, Namespace, URIRef
from rdflib.namespace import RDF

from ..annotator import Annotation
from ..errors import UnprunedInput
from ..log import get_logger
from ..workflow.structures import WorkflowGraph

log = get_logger(__name__)

OPMW = Namespace("http://www.opmw.org/ontology/")
PROCESS_TEMPLATE = OPMW.WorkflowTemplateProcess

DEFAULT_NAMESPACE = "http://example.org/wfsem/workflow/"
MYEXPERIMENT_WORKFLOW = "http://www.myexperiment.org/workflows/{id}"

_NOT_SLUG = re.compile(r"[^a-z0-9]+")


def slugify(name: str) -> str:
    """Lowercase, alphanumerics and single hyphens only."""
    slug = _NOT_SLUG.sub("-", name.lower()).strip("-")
    return slug or "processor"


@dataclass(frozen=True)
class UriMintingPolicy:
    namespace: str = DEFAULT_NAMESPACE
    numeric_template: str = MYEXPERIMENT_WORKFLOW

    def workflow_uri(self, workflow_id: str) -> str:
        if workflow_id.isdigit():
            return self.numeric_template.format(id=workflow_id)
        base = self.namespace if self.namespace.endswith(("/", "#")) else self.namespace + "/"
        return base + quote(workflow_id, safe="")

    def processor_uris(self, workflow_id: str, names: Iterable[str]) -> Dict[str, str]:
        """Distinct URI per processor name; collisions get -2, -3, ..."""
        base = self.workflow_uri(workflow_id)
        taken = set()
        uris = {}
        for name in sorted(set(names)):
            slug = candidate = slugify(name)
            suffix = 2
            while candidate in taken:
                candidate = f"{slug}-{suffix}"
                suffix += 1
            taken.add(candidate)
            uris[name] = f"{base}/{candidate}"
        return uris


def emit_opmw(graph: WorkflowGraph, annotations: Mapping[str, Sequence[Annotation]],
              policy: UriMintingPolicy = UriMintingPolicy()) -> Graph:
    """
    Build the OPMW graph of a pruned workflow.

    Args:
        graph: Workflow without shims
        annotations: Processor name -> deduped annotations
        policy: URI minting policy

    Returns:
        rdflib Graph with the opmw prefix bound

    Raises:
        UnprunedInput: A shim processor is still present
    """
    for proc in graph.processors:
        if proc.is_shim:
            raise UnprunedInput(proc.name)

    rdf = Graph()
    rdf.bind("opmw", OPMW)
    workflow = URIRef(policy.workflow_uri(graph.id))
    uris = {name: URIRef(uri) for name, uri in
            policy.processor_uris(graph.id, graph.processor_names).items()}

    for proc in graph.processors:
        subject = uris[proc.name]
        rdf.add((subject, RDF.type, PROCESS_TEMPLATE))
        for annotation in annotations.get(proc.name, ()):
            rdf.add((subject, RDF.type, URIRef(annotation.class_uri)))
        rdf.add((subject, OPMW.template, workflow))

    for link in graph.links:
        if link.source_processor is None or link.sink_processor is None:
            continue
        rdf.add((uris[link.sink_processor], OPMW.uses, uris[link.source_processor]))
    return rdf


def to_turtle(rdf: Graph) -> str:
    return rdf.serialize(format="turtle")


def to_ntriples(rdf: Graph) -> List[str]:
    """N-Triples lines, sorted."""
    text = rdf.serialize(format="nt")
    return sorted(line for line in text.splitlines() if line.strip())


def write_turtle(rdf: Graph, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(to_turtle(rdf), encoding="utf-8")
    log.debug(f"Wrote {len(rdf)} triples to {path}")
    return path

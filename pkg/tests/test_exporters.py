"""Tests for OPMW export and the report writers."""

import os
import sys
import tempfile
from pathlib import Path

import pytest
from rdflib import Graph, URIRef
from rdflib.compare import isomorphic
from rdflib.namespace import RDF

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from wfsem.annotator import Annotation
from wfsem.errors import UnprunedInput
from wfsem.exporters.opmw import (
    OPMW,
    PROCESS_TEMPLATE,
    UriMintingPolicy,
    emit_opmw,
    slugify,
    to_ntriples,
    to_turtle,
    write_turtle,
)
from wfsem.exporters.tables import (
    dumps,
    read_json,
    read_jsonl,
    read_verdicts,
    write_composition,
    write_histogram,
    write_json,
    write_jsonl,
    write_verdicts,
)
from wfsem.relevance import FilterVerdict
from wfsem.workflow.pruner import compute_stats
from wfsem.workflow.structures import DataLink, Processor, ProcessorCategory, WorkflowGraph

SWO_BLAST = "http://www.ebi.ac.uk/swo/SWO_0000360"
EDAM_SEARCH = "http://edamontology.org/operation_0346"
WORKFLOW = "http://www.myexperiment.org/workflows/1001"


def blast_graph(extra=()):
    processors = (
        Processor("run BLAST", ProcessorCategory.WSDL, endpoint="http://ws.example.org/blast?wsdl"),
        Processor("align", ProcessorCategory.WSDL),
    ) + tuple(extra)
    links = (
        DataLink(None, "query", "run BLAST", "in"),
        DataLink("run BLAST", "hits", "align", "in"),
        DataLink("run BLAST", "report", "align", "extra"),
        DataLink("align", "out", None, "result"),
    )
    return WorkflowGraph(id="1001", processors=processors, links=links,
                         input_ports=("query",), output_ports=("result",))


ANNOTATIONS = {
    "run BLAST": [
        Annotation(SWO_BLAST, "SWO", "NCBI BLAST", (1, 3)),
        Annotation(EDAM_SEARCH, "EDAM", "sequence similarity search", (3, 6)),
    ],
}


class TestUriMinting:
    """Test workflow and processor URIs."""

    def test_slugify(self):
        """Test turning processor names into URI path segments."""
        assert slugify("Run BLAST!") == "run-blast"
        assert slugify("get_UniProt__entry") == "get-uniprot-entry"
        assert slugify("___") == "processor"

    def test_numeric_workflow_id(self):
        """Test the repository URI of a numeric workflow id."""
        assert UriMintingPolicy().workflow_uri("1001") == WORKFLOW

    def test_named_workflow_id(self):
        """Test quoting a named workflow id under a custom namespace."""
        policy = UriMintingPolicy(namespace="http://example.org/wf")
        assert policy.workflow_uri("local chain") == "http://example.org/wf/local%20chain"

    def test_collisions_get_suffixes(self):
        """Test that clashing slugs get numbered suffixes."""
        uris = UriMintingPolicy().processor_uris("1001", ["a b", "a-b", "A_B"])
        assert uris == {
            "A_B": WORKFLOW + "/a-b",
            "a b": WORKFLOW + "/a-b-2",
            "a-b": WORKFLOW + "/a-b-3",
        }
        assert len(set(uris.values())) == 3


class TestEmitOpmw:
    """Test OPMW graph construction."""

    def test_triples(self):
        """Test the full triple set of a small workflow."""
        rdf = emit_opmw(blast_graph(), ANNOTATIONS)
        blast = URIRef(WORKFLOW + "/run-blast")
        align = URIRef(WORKFLOW + "/align")
        assert set(rdf) == {
            (blast, RDF.type, PROCESS_TEMPLATE),
            (blast, RDF.type, URIRef(SWO_BLAST)),
            (blast, RDF.type, URIRef(EDAM_SEARCH)),
            (blast, OPMW.template, URIRef(WORKFLOW)),
            (align, RDF.type, PROCESS_TEMPLATE),
            (align, OPMW.template, URIRef(WORKFLOW)),
            (align, OPMW.uses, blast),
        }

    def test_turtle_reparses(self):
        """Test that the Turtle output parses back to the same graph."""
        rdf = emit_opmw(blast_graph(), ANNOTATIONS)
        again = Graph().parse(data=to_turtle(rdf), format="turtle")
        assert isomorphic(rdf, again)
        assert "@prefix opmw: <http://www.opmw.org/ontology/>" in to_turtle(rdf)

    def test_shim_rejected(self):
        """Test refusing a workflow that still has shims."""
        shim = Processor("format", ProcessorCategory.BEANSHELL)
        with pytest.raises(UnprunedInput) as info:
            emit_opmw(blast_graph((shim,)), ANNOTATIONS)
        assert info.value.processor == "format"

    def test_unclassified_processor_kept(self):
        """Test that an unclassified processor is emitted so links through it survive."""
        other = Processor("mystery", ProcessorCategory.OTHER)
        graph = blast_graph((other,))
        graph = WorkflowGraph(id=graph.id, processors=graph.processors,
                              links=graph.links + (DataLink("align", "out", "mystery", "in"),),
                              input_ports=graph.input_ports, output_ports=graph.output_ports)
        rdf = emit_opmw(graph, {})
        mystery = URIRef(WORKFLOW + "/mystery")
        assert (mystery, RDF.type, PROCESS_TEMPLATE) in rdf
        assert (mystery, OPMW.uses, URIRef(WORKFLOW + "/align")) in rdf

    def test_empty_workflow(self):
        """Test a workflow without processors."""
        assert len(emit_opmw(WorkflowGraph(id="empty"), {})) == 0

    def test_ntriples_sorted(self):
        """Test sorted N-Triples lines."""
        lines = to_ntriples(emit_opmw(blast_graph(), ANNOTATIONS))
        assert len(lines) == 7
        assert lines == sorted(lines)
        assert all(line.endswith(" .") for line in lines)

    def test_write_turtle(self):
        """Test writing a Turtle file."""
        with tempfile.TemporaryDirectory() as temp_dir:
            path = write_turtle(emit_opmw(blast_graph(), {}), Path(temp_dir) / "ttl" / "1001.ttl")
            assert len(Graph().parse(path, format="turtle")) == 5


class TestTables:
    """Test JSON, JSONL and CSV writers."""

    def test_dumps(self):
        """Test the JSON text layout."""
        assert dumps({"b": 1}) == '{\n  "b": 1\n}\n'

    def test_json_files(self):
        """Test writing and reading a JSON file."""
        with tempfile.TemporaryDirectory() as temp_dir:
            path = write_json(Path(temp_dir) / "a" / "x.json", {"name": "runBlast"})
            assert read_json(path) == {"name": "runBlast"}

    def test_jsonl_keys_sorted(self):
        """Test that JSONL records are written with sorted keys."""
        with tempfile.TemporaryDirectory() as temp_dir:
            path = write_jsonl(Path(temp_dir) / "log.jsonl", [{"b": 1, "a": 2}, {"c": 3}])
            assert path.read_text().splitlines()[0] == '{"a": 2, "b": 1}'
            assert read_jsonl(path) == [{"a": 2, "b": 1}, {"c": 3}]

    def test_verdicts(self):
        """Test the verdicts CSV."""
        verdicts = [
            FilterVerdict("1001", True, frozenset({"blast", "protein"}), frozenset({"title"})),
            FilterVerdict("1004", False),
        ]
        with tempfile.TemporaryDirectory() as temp_dir:
            path = write_verdicts(Path(temp_dir) / "verdicts.csv", verdicts)
            assert path.read_text().splitlines() == [
                "workflow_id,relevant,matched_terms,matched_fields",
                "1001,true,blast|protein,title",
                "1004,false,,",
            ]
            assert read_verdicts(path) == {"1001": True, "1004": False}

    def test_composition(self):
        """Test the composition JSON and CSV pair."""
        stats = compute_stats([blast_graph((Processor("format", ProcessorCategory.BEANSHELL),))])
        with tempfile.TemporaryDirectory() as temp_dir:
            json_path, csv_path = write_composition(Path(temp_dir), stats)
            assert read_json(json_path)["shims"] == 1
            lines = csv_path.read_text().splitlines()
            assert lines[0] == "category,count"
            assert "Wsdl,2" in lines
            assert "Beanshell,1" in lines

    def test_histogram(self):
        """Test the histogram CSV."""
        with tempfile.TemporaryDirectory() as temp_dir:
            path = write_histogram(Path(temp_dir) / "h.csv", [(0.0, 2), (0.5, 1)])
            assert path.read_text() == "bin,count\n0.0,2\n0.5,1\n"


if __name__ == "__main__":
    pytest.main([__file__, "-v"])

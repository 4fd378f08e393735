"""Tests for description harvesting: fetchers, WSDL and registry parsers, source chains."""

import json
import os
import random
import sys
import tempfile
from pathlib import Path
from unittest.mock import MagicMock, patch

import pytest
import requests

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from wfsem.errors import FetchError, MalformedXml
from wfsem.harvest import (
    FixtureFetcher,
    FragmentKind,
    MetadataSource,
    RequestsFetcher,
    ServiceDescription,
    SourceKind,
    fixture_name,
    harvest,
    parse_wsdl_metadata,
)
from wfsem.harvest.harvester import harvest_log_records, lookup_keys, validate_chain
from wfsem.harvest.registries import parse_biomoby, parse_catalogue
from wfsem.workflow.structures import Processor, ProcessorCategory

FIXTURES = Path(__file__).parent / "fixtures"
SERVICES = FIXTURES / "services"

BLAST = Processor(
    "runBlast", ProcessorCategory.WSDL,
    endpoint="http://ws.example.org/blast?wsdl", operation_name="runBlast",
)
EMBEDDED = MetadataSource("workflow", SourceKind.EMBEDDED)
WSDL = MetadataSource("wsdl", SourceKind.WSDL, "{endpoint}", ("endpoint",))


class DictFetcher:
    """Serves canned documents by URL and records every request."""

    def __init__(self, documents=None):
        self.documents = documents or {}
        self.requested = []

    def fetch(self, url, timeout=None):
        self.requested.append(url)
        if url not in self.documents:
            raise FetchError(url, "404")
        return self.documents[url]

    def close(self):
        pass


class TestWsdlMetadata:
    """Test WSDL fragment extraction."""

    def test_named_operation(self):
        """Test metadata of one named operation."""
        found = parse_wsdl_metadata((SERVICES / "blast.wsdl").read_bytes(), "runBlast")
        assert found == {
            FragmentKind.SERVICE_NAME: "BlastService",
            FragmentKind.SERVICE_DESCRIPTION: "NCBI BLAST sequence similarity search",
            FragmentKind.OPERATION_NAME: "runBlast",
            FragmentKind.OPERATION_DESCRIPTION: "Runs BLAST against a protein database",
        }

    def test_prefixed_elements(self):
        """Test WSDL elements under a namespace prefix."""
        found = parse_wsdl_metadata((SERVICES / "efetch.wsdl").read_bytes(), "run_eFetch")
        assert found[FragmentKind.SERVICE_NAME] == "eFetchService"
        assert FragmentKind.SERVICE_DESCRIPTION not in found
        assert found[FragmentKind.OPERATION_DESCRIPTION] == "Retrieves records from Entrez databases"

    def test_all_operations_when_unbound(self):
        """Test joining every operation when none is named."""
        found = parse_wsdl_metadata((SERVICES / "efetch.wsdl").read_bytes())
        assert found[FragmentKind.OPERATION_NAME] == "run_eInfo run_eFetch"
        assert found[FragmentKind.OPERATION_DESCRIPTION] == \
            "Lists the Entrez databases Retrieves records from Entrez databases"

    def test_wsdl2_without_documentation(self):
        """Test a WSDL 2.0 document without documentation."""
        found = parse_wsdl_metadata((SERVICES / "nodoc.wsdl").read_bytes())
        assert found == {
            FragmentKind.SERVICE_NAME: "PlainDescription",
            FragmentKind.OPERATION_NAME: "convert validate",
        }

    def test_unknown_operation(self):
        """Test asking for an operation the document does not define."""
        found = parse_wsdl_metadata((SERVICES / "blast.wsdl").read_bytes(), "missing")
        assert FragmentKind.OPERATION_NAME not in found
        assert found[FragmentKind.SERVICE_NAME] == "BlastService"

    def test_not_xml(self):
        """Test a document that is not XML."""
        with pytest.raises(MalformedXml):
            parse_wsdl_metadata(b"<html><body>Service unavailable", source="http://x")


class TestRegistries:
    """Test BioMoby and catalogue parsers."""

    def test_biomoby(self):
        """Test reading a service from a BioMoby registry listing."""
        found = parse_biomoby((SERVICES / "moby_getGeneName.xml").read_bytes(), "getGeneName")
        assert found == {
            FragmentKind.SERVICE_NAME: "getGeneName",
            FragmentKind.SERVICE_DESCRIPTION: "Returns the gene name for an identifier",
        }

    def test_biomoby_other_service(self):
        """Test a BioMoby listing that does not hold the service."""
        assert parse_biomoby((SERVICES / "moby_getGeneName.xml").read_bytes(), "runBlast") == {}

    def test_catalogue_operation(self):
        """Test a catalogue response for a named operation."""
        found = parse_catalogue((SERVICES / "catalogue_uniprot.xml").read_bytes(), "fetchEntry")
        assert found == {
            FragmentKind.SERVICE_NAME: "UniProt fetch",
            FragmentKind.SERVICE_DESCRIPTION: "Retrieves UniProt protein entries",
            FragmentKind.OPERATION_NAME: "fetchEntry",
            FragmentKind.OPERATION_DESCRIPTION: "Fetch an entry by accession",
        }

    def test_catalogue_first_operation(self):
        """Test falling back to the first catalogue operation."""
        found = parse_catalogue((SERVICES / "catalogue_uniprot.xml").read_bytes())
        assert found[FragmentKind.OPERATION_NAME] == "searchEntries"

    def test_catalogue_empty_result(self):
        """Test a catalogue response with no results."""
        assert parse_catalogue(b"<search><results/></search>") == {}


class TestFixtureFetcher:
    """Test offline fetching."""

    def test_serves_by_digest(self):
        """Test serving a canned response by URL digest."""
        fetcher = FixtureFetcher(FIXTURES / "http")
        document = fetcher.fetch("http://ws.example.org/blast?wsdl")
        assert document == (SERVICES / "blast.wsdl").read_bytes()

    def test_missing(self):
        """Test a URL without a canned response."""
        fetcher = FixtureFetcher(FIXTURES / "http")
        with pytest.raises(FetchError) as info:
            fetcher.fetch("http://ws.example.org/none?wsdl")
        assert info.value.url == "http://ws.example.org/none?wsdl"

    def test_fixture_name(self):
        """Test fixture file names."""
        assert fixture_name("http://ws.example.org/blast?wsdl") == \
            "5e6f3391a55ba84f3059458fdddb4d00e82fea128f37c45f124bdf454d259449"


class TestRequestsFetcher:
    """Test the HTTP fetcher with a mocked session."""

    def test_fetch(self):
        """Test fetching through a requests session."""
        response = MagicMock(content=b"<definitions/>")
        with patch("wfsem.harvest.fetcher.requests.Session") as session_class:
            session_class.return_value.get.return_value = response
            fetcher = RequestsFetcher(timeout=3)
            assert fetcher.fetch("http://x.example.org/a") == b"<definitions/>"
            session_class.return_value.get.assert_called_once_with("http://x.example.org/a", timeout=3)
            response.raise_for_status.assert_called_once()

    def test_http_error(self):
        """Test an HTTP error status."""
        response = MagicMock()
        response.raise_for_status.side_effect = requests.HTTPError("503 Server Error")
        with patch("wfsem.harvest.fetcher.requests.Session") as session_class:
            session_class.return_value.get.return_value = response
            with pytest.raises(FetchError) as info:
                RequestsFetcher().fetch("http://x.example.org/a")
        assert "503" in info.value.reason

    def test_connection_error(self):
        """Test a connection failure."""
        with patch("wfsem.harvest.fetcher.requests.Session") as session_class:
            session_class.return_value.get.side_effect = requests.ConnectionError("refused")
            with pytest.raises(FetchError):
                RequestsFetcher().fetch("http://x.example.org/a", timeout=1)

    def test_retry_adapter_mounted(self):
        """Test that the retry adapter is mounted for http and https."""
        with patch("wfsem.harvest.fetcher.requests.Session") as session_class:
            fetcher = RequestsFetcher(retries=4)
            fetcher.fetch("http://x.example.org/a")
            mounted = {c.args[0] for c in session_class.return_value.mount.call_args_list}
            adapter = session_class.return_value.mount.call_args_list[0].args[1]
        assert mounted == {"http://", "https://"}
        assert adapter.max_retries.total == 4

    def test_close(self):
        """Test closing the session."""
        with patch("wfsem.harvest.fetcher.requests.Session") as session_class:
            fetcher = RequestsFetcher()
            fetcher.fetch("http://x.example.org/a")
            fetcher.close()
            session_class.return_value.close.assert_called_once()


class TestHarvest:
    """Test source chains."""

    def test_embedded_then_wsdl(self):
        """Test the embedded text followed by the WSDL document."""
        http = DictFetcher({BLAST.endpoint: (SERVICES / "blast.wsdl").read_bytes()})
        description = harvest(BLAST, [EMBEDDED, WSDL], http, "1001")
        assert description.assembled == (
            "runBlast NCBI BLAST sequence similarity search runBlast Runs BLAST against a protein database"
        )
        assert [f.source_id for f in description.fragments] == ["workflow", "wsdl", "wsdl", "wsdl"]
        assert not description.name_only

    def test_stops_when_complete(self):
        """Test that later sources are not queried once every fragment is filled."""
        http = DictFetcher({BLAST.endpoint: (SERVICES / "blast.wsdl").read_bytes()})
        later = MetadataSource("catalogue", SourceKind.CATALOGUE_ENDPOINT, "http://c.example.org/?u={endpoint}")
        description = harvest(BLAST, [WSDL, later], http)
        assert http.requested == [BLAST.endpoint]
        assert [a["source"] for a in description.attempts] == ["wsdl"]

    def test_failing_source_is_logged(self):
        """Test that a failing source is recorded and the chain continues."""
        description = harvest(BLAST, [WSDL, EMBEDDED], DictFetcher())
        assert description.attempts[0]["outcome"] == "error"
        assert description.attempts[0]["detail"] == "404"
        assert description.name_only
        assert description.assembled == "runBlast"

    def test_unexpected_exception_does_not_stop_chain(self):
        """Test that a source raising an arbitrary exception is logged and later sources still run."""

        class BrokenFetcher(DictFetcher):
            def fetch(self, url, timeout=None):
                self.requested.append(url)
                raise RuntimeError("socket exploded")

        http = BrokenFetcher()
        description = harvest(BLAST, [WSDL, EMBEDDED], http, "1001")
        assert http.requested == [BLAST.endpoint]
        assert description.attempts[0] == {
            "source": "wsdl", "outcome": "error", "detail": "RuntimeError: socket exploded",
        }
        assert description.attempts[1]["source"] == "workflow"
        assert description.assembled == "runBlast"

    def test_malformed_document_is_an_error(self):
        """Test that an unparsable document counts as an error."""
        http = DictFetcher({BLAST.endpoint: b"<definitions"})
        description = harvest(BLAST, [WSDL], http)
        assert description.attempts[0]["outcome"] == "error"

    def test_fallback_to_processor_name(self):
        """Test the processor name as the last resort."""
        description = harvest(BLAST, [WSDL], DictFetcher())
        fragment = description.fragment(FragmentKind.SERVICE_NAME)
        assert fragment.text == "runBlast"
        assert fragment.source_id == "processor"

    def test_source_not_applicable(self):
        """Test skipping a source that does not apply to the processor."""
        rest = Processor("kegg", ProcessorCategory.REST, endpoint="http://rest.example.org/{id}")
        description = harvest(rest, [WSDL], DictFetcher())
        assert description.attempts == [{"source": "wsdl", "outcome": "skipped", "detail": ""}]

    def test_missing_key_skips(self):
        """Test skipping a source when its lookup key is absent."""
        plot = Processor("plot", ProcessorCategory.RSHELL)
        catalogue = MetadataSource("c", SourceKind.CATALOGUE_ENDPOINT, "http://c/?u={endpoint}", ("endpoint",))
        description = harvest(plot, [catalogue], DictFetcher())
        assert description.attempts[0]["outcome"] == "skipped"

    def test_locator_value_is_quoted(self):
        """Test URL-quoting the value put into a locator."""
        http = DictFetcher()
        catalogue = MetadataSource("c", SourceKind.CATALOGUE_ENDPOINT, "http://c.example.org/?u={endpoint}")
        harvest(BLAST, [catalogue], http)
        assert http.requested == ["http://c.example.org/?u=http%3A%2F%2Fws.example.org%2Fblast%3Fwsdl"]

    def test_keys_tried_in_order(self):
        """Test that lookup keys are tried in their configured order."""
        moby = Processor("getGene", ProcessorCategory.BIOMOBY, endpoint="http://moby.example.org/moby",
                         operation_name="getGeneName")
        listing = (SERVICES / "moby_getGeneName.xml").read_bytes()
        http = DictFetcher({"http://reg.example.org/?q=getGeneName": listing})
        source = MetadataSource("moby", SourceKind.BIOMOBY, "http://reg.example.org/?q={endpoint}")
        description = harvest(moby, [source], http)
        assert description.attempts[0]["outcome"] == "error"
        source = MetadataSource("moby", SourceKind.BIOMOBY, "http://reg.example.org/?q={service_name}")
        description = harvest(moby, [source], http)
        assert description.fragment(FragmentKind.SERVICE_DESCRIPTION).text == \
            "Returns the gene name for an identifier"

    def test_fixture_source(self):
        """Test a fixture directory as a source."""
        with tempfile.TemporaryDirectory() as temp_dir:
            (Path(temp_dir) / fixture_name("http://ws.example.org/blast?wsdl")).write_text(json.dumps({
                "service_description": "From a fixture",
                "bogus": "ignored",
            }))
            source = MetadataSource("fx", SourceKind.FIXTURE, temp_dir)
            description = harvest(BLAST, [source], DictFetcher())
        assert description.assembled == "runBlast From a fixture"
        assert description.fragments[0].source_id == "processor"

    def test_log_records(self):
        """Test the harvest log lines of one description."""
        description = harvest(BLAST, [EMBEDDED], DictFetcher(), "1001")
        assert harvest_log_records(description) == [
            {"workflow": "1001", "processor": "runBlast", "source": "workflow",
             "outcome": "ok", "detail": "service_name"},
        ]

    def test_description_dict_round_trip(self):
        """Test ServiceDescription persistence."""
        http = DictFetcher({BLAST.endpoint: (SERVICES / "blast.wsdl").read_bytes()})
        description = harvest(BLAST, [EMBEDDED, WSDL], http, "1001")
        again = ServiceDescription.from_dict(description.to_dict())
        assert again.fragments == description.fragments
        assert again.assembled == description.assembled

    def test_invalid_chain(self):
        """Test rejecting an empty chain and duplicate source ids."""
        with pytest.raises(ValueError):
            validate_chain([])
        with pytest.raises(ValueError):
            harvest(BLAST, [EMBEDDED, EMBEDDED], DictFetcher())

    def test_lookup_keys(self):
        """Test lookup key values of a processor."""
        assert lookup_keys(Processor("p", ProcessorCategory.REST)) == {"service_name": "p"}
        assert lookup_keys(BLAST)["operation_name"] == "runBlast"


class TestChainProperties:
    """Randomized three-source chains: the first source supplying a kind owns it."""

    KINDS = list(FragmentKind)

    @pytest.mark.parametrize("seed", range(50))
    def test_first_supplier_wins(self, seed):
        """Test fragment provenance on random three-source chains."""
        rng = random.Random(seed)
        with tempfile.TemporaryDirectory() as temp_dir:
            sources = []
            offered = []
            for i in range(3):
                directory = Path(temp_dir) / f"s{i}"
                directory.mkdir()
                fragments = {kind.value: f"text{i}{kind.value}" for kind in self.KINDS if rng.random() < 0.4}
                if rng.random() < 0.2:
                    fragments = None
                else:
                    (directory / fixture_name(BLAST.endpoint)).write_text(json.dumps(fragments))
                offered.append(fragments or {})
                sources.append(MetadataSource(f"s{i}", SourceKind.FIXTURE, str(directory), ("endpoint",)))

            description = harvest(BLAST, sources, DictFetcher())

        for kind in self.KINDS:
            owner = next((i for i, f in enumerate(offered) if kind.value in f), None)
            fragment = description.fragment(kind)
            if owner is None:
                if kind == FragmentKind.SERVICE_NAME:
                    assert fragment.source_id == "processor"
                else:
                    assert fragment is None
            else:
                assert fragment.source_id == f"s{owner}"
                assert fragment.text == f"text{owner}{kind.value}"
        assert description.fragment(FragmentKind.SERVICE_NAME) is not None


if __name__ == "__main__":
    pytest.main([__file__, "-v"])

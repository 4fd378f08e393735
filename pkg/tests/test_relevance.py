"""Tests for the relevance filter, term lists and repository entries."""

import os
import sys
import tempfile
from pathlib import Path

import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from wfsem.errors import ConfigError, EmptyTermList, UnknownNamespace
from wfsem.ontology.loaders import OntologyFormat, load_ontology_file
from wfsem.relevance import (
    TermList,
    apply_filter,
    definition_search,
    format_term_list,
    load_term_list,
    parse_term_list,
    regenerate_term_list,
    tag_filter,
)
from wfsem.text import find_token_sequence, normalize_whitespace, term_tokens, tokenize
from wfsem.workflow.entries import RepositoryEntry, apply_entry, load_entries
from wfsem.workflow.structures import WorkflowGraph

FIXTURES = Path(__file__).parent / "fixtures"
EDAM = "http://edamontology.org/"


def workflow(title="", description="", tags=()):
    return WorkflowGraph(id="w", title=title, description=description, tags=tuple(tags))


@pytest.fixture(scope="module")
def edam():
    store = load_ontology_file(FIXTURES / "ontologies" / "edam_mini.obo", OntologyFormat.OBO_FLAT, "EDAM")
    return store.freeze()


@pytest.fixture(scope="module")
def toy():
    store = load_ontology_file(FIXTURES / "ontologies" / "toy.obo", OntologyFormat.OBO_FLAT, "TOY")
    return store.freeze()


class TestText:
    """Test tokenization helpers."""

    def test_tokenize(self):
        """Test tokenizing text."""
        assert tokenize("Run_BLAST, fast!") == ["run", "blast", "fast"]
        assert tokenize("") == []

    def test_term_tokens(self):
        """Test tokenizing a term."""
        assert term_tokens("Gene  Ontology") == ("gene", "ontology")

    def test_find_token_sequence(self):
        """Test finding a token sequence."""
        assert find_token_sequence(["a", "gene", "name"], ("gene", "name"))
        assert not find_token_sequence(["internal"], ("rna",))
        assert not find_token_sequence(["gene"], ())

    def test_normalize_whitespace(self):
        """Test collapsing whitespace."""
        assert normalize_whitespace("  a \n\t b ") == "a b"


class TestTermList:
    """Test TermList arithmetic and the file format."""

    def test_effective(self):
        """Test the effective term set."""
        terms = TermList({"RNA", "Proteins"}, {"rna"}, {"BLAST"})
        assert terms.effective == {"proteins", "blast"}

    def test_added_wins_over_removed(self):
        """Test a term both added and removed."""
        terms = TermList({"a"}, {"b"}, {"b"})
        assert "b" in terms.effective

    def test_remove_overrides_earlier_add(self):
        """Test a removal after an addition."""
        terms = TermList().add("Kegg").remove("kegg")
        assert "kegg" not in terms.effective

    def test_with_base_keeps_deltas(self):
        """Test replacing the base terms."""
        terms = TermList({"old"}, {"x"}, {"y"}).with_base({"New", "x"})
        assert terms.effective == {"new", "y"}

    def test_parse(self):
        """Test parsing a term list."""
        text = "# comment\n[base]\nRNA\n\n[removed]\nrna\n[added]\nGene name\n"
        terms = parse_term_list(text)
        assert terms.base_terms == {"rna"}
        assert terms.effective == {"gene name"}

    def test_unknown_section(self):
        """Test an unknown section header."""
        with pytest.raises(ConfigError) as info:
            parse_term_list("[extra]\nterm\n")
        assert info.value.field == "terms"

    def test_term_outside_section(self):
        """Test a term before any section."""
        with pytest.raises(ConfigError):
            parse_term_list("orphan\n[base]\n")

    def test_format_round_trip(self):
        """Test formatting a term list."""
        terms = TermList({"b", "a"}, {"a"}, {"c"})
        assert parse_term_list(format_term_list(terms)) == terms

    def test_packaged_list(self):
        """Test the packaged term list."""
        terms = load_term_list()
        assert len(terms.added) == 44
        assert "uniprot" in terms.effective
        assert "workflows" not in terms.effective

    def test_load_from_file(self):
        """Test loading a term list file."""
        with tempfile.TemporaryDirectory() as temp_dir:
            path = Path(temp_dir) / "terms.txt"
            path.write_text("[added]\nkegg\n")
            assert load_term_list(path).effective == {"kegg"}


class TestApplyFilter:
    """Test the relevance verdict."""

    def test_title_match(self):
        """Test a term matched in the title."""
        verdict = apply_filter(workflow(title="KEGG pathway visualisation"), load_term_list())
        assert verdict.relevant
        assert verdict.matched_terms == {"kegg", "pathway"}
        assert verdict.matched_fields == {"title"}

    def test_whole_tokens_only(self):
        """Test that terms only match whole tokens."""
        terms = TermList(added={"rna"})
        assert not apply_filter(workflow(title="internal representation"), terms).relevant
        assert apply_filter(workflow(title="RNA folding"), terms).relevant

    def test_multi_token_term(self):
        """Test a term of several tokens."""
        terms = TermList(added={"gene name"})
        assert apply_filter(workflow(description="lookup of a Gene  Name"), terms).relevant
        assert not apply_filter(workflow(description="name of a gene"), terms).relevant

    def test_term_must_fit_in_one_tag(self):
        """Test that a term may not span two tags."""
        terms = TermList(added={"gene name"})
        assert not apply_filter(workflow(tags=["gene", "name"]), terms).relevant
        verdict = apply_filter(workflow(tags=["gene name"]), terms)
        assert verdict.matches == {"gene name": frozenset({"tags"})}

    def test_fields_reported_per_term(self):
        """Test the fields reported for each matched term."""
        terms = TermList(added={"blast", "protein"})
        verdict = apply_filter(workflow(title="BLAST", description="protein blast"), terms)
        assert verdict.matches["blast"] == {"title", "description"}
        assert verdict.matches["protein"] == {"description"}

    def test_irrelevant(self):
        """Test a workflow with no matching term."""
        verdict = apply_filter(workflow(title="My workflow"), load_term_list())
        assert not verdict.relevant
        assert verdict.matched_terms == frozenset()

    def test_empty_term_list(self):
        """Test filtering with an empty term list."""
        with pytest.raises(EmptyTermList):
            apply_filter(workflow(title="anything"), TermList({"a"}, {"a"}))

    def test_tag_baseline(self):
        """Test the tag-only baseline."""
        assert tag_filter(workflow(tags=["Bioinformatics"]))
        assert not tag_filter(workflow(title="bioinformatics"))


class TestDefinitionSearch:
    """Test base term regeneration from an ontology branch."""

    def test_with_subclasses(self, edam):
        """Test definition search including subclasses."""
        hits = definition_search(edam, "topic", "bioinformatics")
        assert hits == {EDAM + "topic_0091", EDAM + "topic_0769", EDAM + "topic_0080", EDAM + "topic_0182"}

    def test_without_subclasses(self, edam):
        """Test definition search on direct matches only."""
        hits = definition_search(edam, "topic", "bioinformatics", include_subclasses=False)
        assert hits == {EDAM + "topic_0091", EDAM + "topic_0769"}

    def test_toy_alignment(self, toy):
        """Test definition search on the alignment topic."""
        hits = definition_search(toy, "toy_process", "alignment")
        assert len(hits) == 3

    def test_unknown_namespace(self, edam):
        """Test searching a namespace the ontology lacks."""
        with pytest.raises(UnknownNamespace):
            definition_search(edam, "format", "bioinformatics")

    def test_regenerate(self, edam):
        """Test regenerating a term list while keeping its deltas."""
        curated = TermList(removed={"workflows"}, added={"kegg"})
        terms = regenerate_term_list(edam, curated)
        assert terms.base_terms == {"bioinformatics", "workflows", "sequence analysis", "sequence alignment"}
        assert terms.effective == {"bioinformatics", "sequence analysis", "sequence alignment", "kegg"}


class TestEntries:
    """Test the repository-entry sidecar."""

    def test_load_fixture(self):
        """Test loading the entries sidecar."""
        entries = load_entries(FIXTURES / "corpus" / "entries.csv")
        assert entries["1001"] == RepositoryEntry("1001", "BLAST protein search", "", ("bioinformatics", "blast"))
        assert entries["1003"].title == ""

    def test_overlay_keeps_document_values(self):
        """Test that empty entry fields keep the document values."""
        graph = workflow(title="Sequence search", description="doc")
        merged = apply_entry(graph, RepositoryEntry("w", tags=("x",)))
        assert merged.title == "Sequence search"
        assert merged.description == "doc"
        assert merged.tags == ("x",)

    def test_missing_id_column(self):
        """Test a sidecar without an id column."""
        with tempfile.TemporaryDirectory() as temp_dir:
            path = Path(temp_dir) / "entries.csv"
            path.write_text("title,tags\nx,y\n")
            with pytest.raises(ConfigError):
                load_entries(path)

    def test_optional_columns(self):
        """Test a sidecar with only some columns."""
        with tempfile.TemporaryDirectory() as temp_dir:
            path = Path(temp_dir) / "entries.csv"
            path.write_text("id,tags\n7, a | b \n")
            assert load_entries(path)["7"].tags == ("a", "b")


if __name__ == "__main__":
    pytest.main([__file__, "-v"])

"""Tests for the dictionary annotator and precedence dedup."""

import os
import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from wfsem.annotator import Annotation, Dictionary, PrecedenceOrder, annotate, dedup, dictionary_for
from wfsem.ontology import OntologyClass, OntologyFormat, OntologyStore, load_ontology_file
from wfsem.text import term_tokens, tokenize

ONTOLOGIES = Path(__file__).parent / "fixtures" / "ontologies"
SWO = "http://www.ebi.ac.uk/swo/SWO_"
EDAM = "http://edamontology.org/"

RUN_BLAST = ("runBlast NCBI BLAST sequence similarity search runBlast "
             "Runs BLAST against a protein database")


@pytest.fixture(scope="module")
def store():
    store = load_ontology_file(ONTOLOGIES / "edam_mini.obo", OntologyFormat.OBO_FLAT, "EDAM")
    load_ontology_file(ONTOLOGIES / "swo_mini.csv", OntologyFormat.TERM_TABLE, "SWO", store)
    return store.freeze()


def brute_force(tokens, names):
    """Longest-match-first scan over a plain name -> classes mapping."""
    entries = {}
    for name, classes in names.items():
        key = term_tokens(name)
        entries.setdefault(key, []).extend(classes)
    longest = max((len(k) for k in entries), default=0)
    found = []
    i = 0
    while i < len(tokens):
        for length in range(min(longest, len(tokens) - i), 0, -1):
            key = tuple(tokens[i:i + length])
            if key in entries:
                for class_uri, ontology_id in sorted(entries[key], key=lambda e: (e[1], e[0])):
                    found.append((class_uri, ontology_id, (i, i + length)))
                i += length
                break
        else:
            i += 1
    return found


class TestDictionary:
    """Test trie construction."""

    def test_short_single_token_skipped(self):
        """Test that single-token names shorter than the minimum are not indexed."""
        dictionary = Dictionary(min_term_length=3)
        assert not dictionary.add("GO", "u", "X")
        assert dictionary.add("GO term", "u", "X")
        assert dictionary.add("SNP", "v", "X")

    def test_same_class_added_once_per_entry(self):
        """Test that a class is listed once per trie entry and ontology."""
        dictionary = Dictionary()
        assert dictionary.add("Pathway", "u", "X")
        assert not dictionary.add("pathway", "u", "X")
        assert dictionary.add("pathway", "u", "Y")
        assert dictionary.size == 1

    def test_obsolete_classes_excluded(self, store):
        """Test that obsolete classes never match."""
        assert annotate("Protein", store) == []

    def test_dictionary_cached_per_store(self, store):
        """Test the dictionary cache key of store and minimum length."""
        assert dictionary_for(store) is dictionary_for(store)
        assert dictionary_for(store, 2) is not dictionary_for(store)


class TestAnnotate:
    """Test longest-match annotation."""

    def test_run_blast_description(self, store):
        """Test annotating the BLAST service description."""
        found = annotate(RUN_BLAST, store)
        assert [(a.class_uri, a.span) for a in found] == [
            (SWO + "0000360", (1, 3)),
            (EDAM + "operation_0346", (3, 6)),
            (SWO + "0000360", (8, 9)),
        ]
        assert found[0].matched_text == "NCBI BLAST"
        assert found[2].matched_text == "BLAST"

    def test_longest_match_resumes_after(self, store):
        """Test that scanning resumes after a multi-token match."""
        found = annotate("align Multiple sequence alignment with ClustalW", store)
        assert [(a.class_uri, a.span) for a in found] == [
            (EDAM + "operation_0492", (1, 4)),
            (SWO + "0000100", (5, 6)),
        ]

    def test_shared_entry_lists_every_class(self, store):
        """Test that one entry reports every class sharing the name."""
        found = annotate("sequence analysis", store)
        assert [(a.class_uri, a.ontology_id) for a in found] == [
            (EDAM + "topic_0080", "EDAM"),
            (EDAM + "topic_0080", "SWO"),
        ]

    def test_tokens_split_on_underscore(self, store):
        """Test that underscores separate tokens."""
        found = annotate("kegg_pathway", store)
        assert [(a.class_uri, a.span) for a in found] == [(EDAM + "topic_0602", (1, 2))]

    def test_no_partial_tokens(self, store):
        """Test that names only match whole tokens."""
        assert annotate("pathways2", store) == []
        assert annotate("BLASTX", store) == []

    def test_empty_text(self, store):
        """Test annotating empty text."""
        assert annotate("", store) == []

    def test_accepts_dictionary(self, store):
        """Test annotating with a prebuilt dictionary."""
        dictionary = dictionary_for(store)
        assert annotate(RUN_BLAST, dictionary) == annotate(RUN_BLAST, store)


class TestAnnotateOracle:
    """Randomized comparison with a brute-force scan."""

    VOCABULARY = ["gene", "name", "sequence", "alignment", "blast", "search", "protein", "x", "db"]

    @pytest.mark.parametrize("seed", range(500))
    def test_matches_brute_force(self, seed):
        """Test longest-match annotation against a brute-force scan."""
        rng = random.Random(seed)
        names = {}
        store = OntologyStore()
        for i in range(rng.randint(1, 8)):
            words = rng.choices(self.VOCABULARY, k=rng.randint(1, 3))
            name = " ".join(words)
            ontology_id = rng.choice(["A", "B"])
            uri = f"u{i}"
            store.add_class(OntologyClass(uri, ontology_id, label=name))
            if len(words) == 1 and len(words[0]) < 3:
                continue
            names.setdefault(name, []).append((uri, ontology_id))
        text = " ".join(rng.choices(self.VOCABULARY, k=rng.randint(0, 12)))

        dictionary = Dictionary.from_store(store, 3)
        got = [(a.class_uri, a.ontology_id, a.span) for a in dictionary.annotate(text)]
        assert got == brute_force(tokenize(text), names)


class TestDedup:
    """Test precedence-based deduplication."""

    def make(self, uri, ontology_id, start):
        return Annotation(uri, ontology_id, uri, (start, start + 1))

    def test_preferred_ontology_wins(self):
        """Test that the earlier ontology in the precedence order is kept."""
        order = PrecedenceOrder(("SWO", "EDAM"))
        kept = dedup([self.make("t", "EDAM", 0), self.make("t", "SWO", 0)], order)
        assert [a.ontology_id for a in kept] == ["SWO"]

    def test_unlisted_ontologies_rank_by_id(self):
        """Test that ontologies missing from the order rank after it by id."""
        order = PrecedenceOrder(("SWO",))
        kept = dedup([self.make("t", "ZZZ", 0), self.make("t", "AAA", 0)], order)
        assert [a.ontology_id for a in kept] == ["AAA"]

    def test_first_occurrence_kept(self):
        """Test that repeated matches of one class keep the first span."""
        kept = dedup([self.make("t", "A", 0), self.make("t", "A", 5)], PrecedenceOrder())
        assert [a.span for a in kept] == [(0, 1)]

    def test_different_uris_never_merge(self):
        """Test that distinct class URIs are never merged."""
        annotations = [self.make("t1", "A", 0), self.make("t2", "A", 0)]
        assert dedup(annotations, PrecedenceOrder()) == annotations

    def test_survivors_keep_input_order(self):
        """Test that kept annotations stay in input order."""
        order = PrecedenceOrder(("B", "A"))
        annotations = [
            self.make("x", "A", 0),
            self.make("y", "A", 1),
            self.make("x", "B", 2),
        ]
        kept = dedup(annotations, order)
        assert [(a.class_uri, a.ontology_id) for a in kept] == [("y", "A"), ("x", "B")]

    def test_run_blast_dedup(self, store):
        """Test dedup of the BLAST annotations."""
        kept = dedup(annotate(RUN_BLAST, store), PrecedenceOrder(("SWO", "EDAM")))
        assert [a.class_uri for a in kept] == [SWO + "0000360", EDAM + "operation_0346"]

    @pytest.mark.parametrize("seed", range(100))
    def test_random_precedence(self, seed):
        """Test dedup invariants on random annotation lists."""
        rng = random.Random(seed)
        ontologies = ["A", "B", "C", "D"]
        order = PrecedenceOrder(tuple(rng.sample(ontologies, rng.randint(0, 4))))
        annotations = [
            self.make(rng.choice(["t1", "t2", "t3"]), rng.choice(ontologies), i)
            for i in range(rng.randint(0, 12))
        ]
        kept = dedup(annotations, order)

        assert len({a.class_uri for a in kept}) == len(kept)
        assert {a.class_uri for a in kept} == {a.class_uri for a in annotations}
        for annotation in kept:
            rivals = [a for a in annotations if a.class_uri == annotation.class_uri]
            assert order.rank(annotation.ontology_id) == min(order.rank(a.ontology_id) for a in rivals)
        positions = [annotations.index(a) for a in kept]
        assert positions == sorted(positions)

    def test_duplicate_precedence(self):
        """Test rejecting an order that lists an ontology twice."""
        with pytest.raises(ValueError):
            PrecedenceOrder(("A", "A"))

    def test_annotation_dict_round_trip(self):
        """Test Annotation persistence and attaching an IC value."""
        annotation = Annotation("u", "A", "text", (2, 4))
        assert Annotation.from_dict(annotation.to_dict()) == annotation
        assert annotation.with_ic(0.5).ic == 0.5


if __name__ == "__main__":
    pytest.main([__file__, "-v"])

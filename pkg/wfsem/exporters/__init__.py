"""Writers for pipeline artifacts: OPMW RDF and tabular/JSON reports."""

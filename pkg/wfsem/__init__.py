"""wfsem - semantic annotation of legacy Taverna workflows."""

__version__ = "0.1.0"

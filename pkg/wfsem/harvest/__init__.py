"""Service description harvesting from an ordered chain of metadata sources."""

from .fetcher import FixtureFetcher, HttpFetcher, RequestsFetcher, fixture_name
from .harvester import MetadataSource, SourceKind, harvest
from .model import Fragment, FragmentKind, ServiceDescription
from .wsdl import parse_wsdl_metadata

__all__ = [
    "FixtureFetcher",
    "Fragment",
    "FragmentKind",
    "HttpFetcher",
    "MetadataSource",
    "RequestsFetcher",
    "ServiceDescription",
    "SourceKind",
    "fixture_name",
    "harvest",
    "parse_wsdl_metadata",
]

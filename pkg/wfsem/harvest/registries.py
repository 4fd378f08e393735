"""
Registry response parsers.

Both parsers are lenient: a missing element means a missing fragment, never
an error. Element names are matched by local name so namespaced and plain
payloads both work.

BioMoby Central service listing::

    <Services>
      <Service authURI="..." serviceName="runBlast" lsid="...">
        <serviceType>Analysis</serviceType>
        <Description><![CDATA[Runs BLAST ...]]></Description>
      </Service>
    </Services>

Service catalogue (lookup by WSDL location, or free-text search)::

    <search> <results>
      <service resourceName="...">
        <name>Blast</name>
        <description>...</description>
        <variants><soapService>
          <operations><soapOperation>
            <name>runBlast</name><description>...</description>
          </soapOperation></operations>
        </soapService></variants>
      </service>
    </results> </search>
"""

from typing import Dict, List, Optional

from lxml import etree

from ..text import normalize_whitespace
from ..workflow.parser import load_xml
from .model import FragmentKind

OPERATION_ELEMENTS = ("soapOperation", "restMethod", "operation")


def _local(element) -> str:
    return etree.QName(element).localname


def _find_all(element, names) -> List[etree._Element]:
    return [e for e in element.iter() if isinstance(e.tag, str) and _local(e) in names]


def _child_text(element, names) -> str:
    for child in element:
        if isinstance(child.tag, str) and _local(child) in names:
            text = normalize_whitespace("".join(child.itertext()))
            if text:
                return text
    return ""


def parse_biomoby(document: bytes, service_name: Optional[str] = None,
                  source: Optional[str] = None) -> Dict[FragmentKind, str]:
    """Fragments of the first (or the named) service in a BioMoby listing."""
    root = load_xml(document, source)
    services = _find_all(root, {"Service"})
    if service_name:
        services = [s for s in services if s.get("serviceName") == service_name]
    if not services:
        return {}
    service = services[0]

    found: Dict[FragmentKind, str] = {}
    name = (service.get("serviceName") or "").strip()
    if name:
        found[FragmentKind.SERVICE_NAME] = name
    description = _child_text(service, {"Description", "description"})
    if description:
        found[FragmentKind.SERVICE_DESCRIPTION] = description
    return found


def parse_catalogue(document: bytes, operation_name: Optional[str] = None,
                    source: Optional[str] = None) -> Dict[FragmentKind, str]:
    """Fragments of the first service in a catalogue lookup or search result."""
    root = load_xml(document, source)
    services = _find_all(root, {"service"})
    if not services:
        return {}
    service = services[0]

    found: Dict[FragmentKind, str] = {}
    name = _child_text(service, {"name"}) or (service.get("resourceName") or "").strip()
    if name:
        found[FragmentKind.SERVICE_NAME] = name
    description = _child_text(service, {"description"})
    if description:
        found[FragmentKind.SERVICE_DESCRIPTION] = description

    for operation in _find_all(service, set(OPERATION_ELEMENTS)):
        op_name = _child_text(operation, {"name"}) or (operation.get("name") or "").strip()
        if not op_name or (operation_name and op_name != operation_name):
            continue
        found[FragmentKind.OPERATION_NAME] = op_name
        op_description = _child_text(operation, {"description"})
        if op_description:
            found[FragmentKind.OPERATION_DESCRIPTION] = op_description
        break
    return found

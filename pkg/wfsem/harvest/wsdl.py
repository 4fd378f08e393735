"""
WSDL metadata extraction.

Reads WSDL 1.1 (definitions/service, portType/operation) and WSDL 2.0
(description/service, interface/operation) documents. Documentation comes
from <documentation> children; operation documentation in the portType or
interface wins over the binding's.
"""

from typing import Dict, List, Optional

from lxml import etree

from ..text import normalize_whitespace
from ..workflow.parser import load_xml
from .model import FragmentKind


def _local(element) -> str:
    return etree.QName(element).localname


def _children(element, name: str) -> List[etree._Element]:
    return [c for c in element if isinstance(c.tag, str) and _local(c) == name]


def _descendants(element, name: str) -> List[etree._Element]:
    return [e for e in element.iter() if isinstance(e.tag, str) and _local(e) == name]


def _documentation(element) -> str:
    texts = [normalize_whitespace("".join(doc.itertext())) for doc in _children(element, "documentation")]
    return " ".join(t for t in texts if t)


def parse_wsdl_metadata(document: bytes, operation_name: Optional[str] = None,
                        source: Optional[str] = None) -> Dict[FragmentKind, str]:
    """
    Extract description fragments from a WSDL document.

    Args:
        document: WSDL bytes
        operation_name: Operation the processor is bound to; when given only
            that operation's name and documentation are used
        source: Document location, for error messages

    Returns:
        Fragment kind -> text, absent kinds omitted

    Raises:
        MalformedXml: The document is not XML
    """
    root = load_xml(document, source)
    found: Dict[FragmentKind, str] = {}

    services = _descendants(root, "service")
    service = services[0] if services else None
    name = service.get("name") if service is not None else None
    name = name or root.get("name")
    if name:
        found[FragmentKind.SERVICE_NAME] = name.strip()
    service_doc = _documentation(service) if service is not None else ""
    if not service_doc:
        service_doc = _documentation(root)
    if service_doc:
        found[FragmentKind.SERVICE_DESCRIPTION] = service_doc

    # operation name -> documentation, abstract operations first
    operations: Dict[str, str] = {}
    for container in ("portType", "interface", "binding"):
        for parent in _descendants(root, container):
            for operation in _children(parent, "operation"):
                op_name = (operation.get("name") or "").strip()
                if not op_name:
                    continue
                doc = _documentation(operation)
                if op_name not in operations or (doc and not operations[op_name]):
                    operations[op_name] = doc

    if operation_name:
        if operation_name in operations:
            found[FragmentKind.OPERATION_NAME] = operation_name
            if operations[operation_name]:
                found[FragmentKind.OPERATION_DESCRIPTION] = operations[operation_name]
        return found

    if operations:
        found[FragmentKind.OPERATION_NAME] = " ".join(operations)
        docs = [doc for doc in operations.values() if doc]
        if docs:
            found[FragmentKind.OPERATION_DESCRIPTION] = " ".join(docs)
    return found

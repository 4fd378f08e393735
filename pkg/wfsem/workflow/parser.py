"""
Taverna workflow parser - reads both XML dialects into a WorkflowGraph.

Taverna 1 (XScufl):
- root <s:scufl>, namespace contains "xscufl"
- <s:workflowdescription title=...>text</s:workflowdescription>
- <s:processor name=...> holding an optional <s:description> and one
  processor-type element (<s:arbitrarywsdl>, <s:beanshell>, ...)
- <s:link source="proc:port" sink="proc:port"/>; a bare name is a workflow port
- <s:source name=.../> and <s:sink name=.../> declare the workflow ports

Taverna 2 (t2flow):
- root <workflow>, namespace contains "/t2flow"
- one <dataflow role="top"> plus <dataflow role="nested"> per nested workflow
- processors carry an <activity> whose <class> decides the category
- <datalink> endpoints are typed processor / dataflow / merge
- free-text descriptions live in annotation chains; only dataflows have them

Iteration strategies and dispatch stacks are ignored.
"""

from typing import Dict, List, Optional, Tuple

from lxml import etree

from ..errors import MalformedXml, UnknownDialect
from ..log import get_logger
from ..text import normalize_whitespace
from .structures import (
    CategoryTable,
    DataLink,
    Processor,
    ProcessorCategory,
    WorkflowFormat,
    WorkflowGraph,
)

log = get_logger(__name__)

SCUFL_NAMESPACE = "http://org.embl.ebi.escience/xscufl/0.1alpha"
T2FLOW_NAMESPACE = "http://taverna.sf.net/2008/xml/t2flow"

MERGED_PORT = "merged"

FREE_TEXT_BEAN = "net.sf.taverna.t2.annotation.annotationbeans.FreeTextDescription"
TITLE_BEAN = "net.sf.taverna.t2.annotation.annotationbeans.DescriptiveTitle"

# Children of a scufl <processor> that are not its type element
_SCUFL_PROCESSOR_META = {
    "description", "iterationstrategy", "mergemode", "defaults", "alternate",
}

_ENDPOINT_FIELDS = ("wsdl", "mobyEndpoint", "endpoint", "urlSignature")
_OPERATION_FIELDS = ("operation", "serviceName")


def detect_format(namespace: str) -> WorkflowFormat:
    """Pick the dialect from the root element namespace."""
    if "xscufl" in namespace:
        return WorkflowFormat.SCUFL
    if "/t2flow" in namespace:
        return WorkflowFormat.T2FLOW
    raise UnknownDialect(namespace)


def load_xml(document: bytes, source: Optional[str] = None) -> etree._Element:
    """
    Parse XML bytes, decoding as UTF-8 with replacement of invalid bytes.

    Raises:
        MalformedXml: The document is not well-formed
    """
    text = document.decode("utf-8", errors="replace")
    parser = etree.XMLParser(encoding="utf-8", resolve_entities=False, no_network=True,
                             remove_comments=True)
    try:
        root = etree.fromstring(text.encode("utf-8"), parser=parser)
    except etree.XMLSyntaxError as e:
        raise MalformedXml(str(e), source) from e
    if root is None:
        raise MalformedXml("empty document", source)
    return root


def _local(element) -> str:
    return etree.QName(element).localname


def _elements(element) -> List[etree._Element]:
    return [child for child in element if isinstance(child.tag, str)]


def _child(element, name: str) -> Optional[etree._Element]:
    for child in _elements(element):
        if _local(child) == name:
            return child
    return None


def _child_text(element, name: str) -> Optional[str]:
    child = _child(element, name)
    if child is None or child.text is None:
        return None
    return child.text.strip() or None


def _first_text(element, names) -> Optional[str]:
    for name in names:
        text = _child_text(element, name)
        if text:
            return text
    return None


def _looks_like_url(text: Optional[str]) -> bool:
    return bool(text) and text.strip().lower().startswith(("http://", "https://", "ftp://"))


class WorkflowParser:
    """Parser for scufl and t2flow documents."""

    def __init__(self, categories: Optional[CategoryTable] = None):
        self.categories = categories or CategoryTable()

    def parse(self, document: bytes, format_hint: Optional[WorkflowFormat] = None,
              workflow_id: str = "workflow") -> WorkflowGraph:
        """
        Parse a workflow document.

        Args:
            document: Raw document bytes
            format_hint: Dialect to assume; when None the root namespace decides
            workflow_id: Identifier given to the resulting graph

        Returns:
            A validated WorkflowGraph

        Raises:
            MalformedXml: Unparseable document
            UnknownDialect: Namespace matches neither dialect
            DanglingLink: A link references a missing processor or port
        """
        root = load_xml(document, workflow_id)
        namespace = etree.QName(root).namespace or ""
        fmt = format_hint or detect_format(namespace)

        if fmt == WorkflowFormat.SCUFL:
            graph = self._parse_scufl(root, workflow_id)
        else:
            graph = self._parse_t2flow(root, workflow_id)
        return graph.validate()

    # Taverna 1

    def _parse_scufl(self, root, workflow_id: str) -> WorkflowGraph:
        title = ""
        description = ""
        processors: List[Processor] = []
        raw_links: List[DataLink] = []
        inputs: List[str] = []
        outputs: List[str] = []

        for element in _elements(root):
            tag = _local(element)
            if tag == "workflowdescription":
                title = normalize_whitespace(element.get("title", ""))
                description = (element.text or "").strip()
            elif tag == "processor":
                processors.append(self._scufl_processor(element, workflow_id))
            elif tag == "link":
                raw_links.append(self._scufl_link(element))
            elif tag == "source":
                inputs.append(element.get("name", ""))
            elif tag == "sink":
                outputs.append(element.get("name", ""))

        return WorkflowGraph(
            id=workflow_id,
            title=title,
            description=description,
            format=WorkflowFormat.SCUFL,
            processors=tuple(processors),
            links=_clean_links(raw_links, workflow_id),
            input_ports=tuple(inputs),
            output_ports=tuple(outputs),
        )

    def _scufl_processor(self, element, workflow_id: str) -> Processor:
        name = element.get("name", "")
        description = _child_text(element, "description")

        type_element = None
        for child in _elements(element):
            if _local(child) not in _SCUFL_PROCESSOR_META:
                type_element = child
                break

        if type_element is None:
            log.debug(f"Processor '{name}' in {workflow_id} has no type element")
            return Processor(name=name, category=ProcessorCategory.OTHER,
                             embedded_description=description)

        activity_type = _local(type_element)
        category = self.categories.categorize(WorkflowFormat.SCUFL, activity_type)

        endpoint = _first_text(type_element, _ENDPOINT_FIELDS)
        if endpoint is None and not _elements(type_element) and _looks_like_url(type_element.text):
            endpoint = type_element.text.strip()
        operation = _first_text(type_element, _OPERATION_FIELDS)

        nested = None
        if category == ProcessorCategory.NESTED_WORKFLOW:
            nested_root = _child(type_element, "scufl")
            nested_id = f"{workflow_id}/{name}"
            if nested_root is not None:
                nested = self._parse_scufl(nested_root, nested_id)
            else:
                log.warning(f"Nested workflow '{name}' in {workflow_id} is not inlined")
                nested = WorkflowGraph(id=nested_id, format=WorkflowFormat.SCUFL)

        return Processor(
            name=name,
            category=category,
            embedded_description=description,
            endpoint=endpoint,
            operation_name=operation,
            nested=nested,
            activity_type=activity_type,
        )

    @staticmethod
    def _scufl_link(element) -> DataLink:
        source_proc, source_port = _split_scufl_endpoint(element.get("source", ""))
        sink_proc, sink_port = _split_scufl_endpoint(element.get("sink", ""))
        return DataLink(source_proc, source_port, sink_proc, sink_port)

    # Taverna 2

    def _parse_t2flow(self, root, workflow_id: str) -> WorkflowGraph:
        dataflows: Dict[str, etree._Element] = {}
        top = None
        for element in _elements(root):
            if _local(element) != "dataflow":
                continue
            dataflows[element.get("id", "")] = element
            if element.get("role") == "top" and top is None:
                top = element
        if top is None:
            if not dataflows:
                raise MalformedXml("t2flow document has no dataflow", workflow_id)
            top = next(iter(dataflows.values()))
        return self._t2flow_dataflow(top, dataflows, workflow_id, visiting=set())

    def _t2flow_dataflow(self, dataflow, dataflows, workflow_id: str,
                         visiting: set) -> WorkflowGraph:
        visiting = visiting | {dataflow.get("id", "")}
        name = _child_text(dataflow, "name") or ""
        beans = _annotation_beans(dataflow)

        processors = []
        processors_element = _child(dataflow, "processors")
        if processors_element is not None:
            for element in _elements(processors_element):
                processors.append(
                    self._t2flow_processor(element, dataflows, workflow_id, visiting))

        raw_links = []
        links_element = _child(dataflow, "datalinks")
        if links_element is not None:
            for element in _elements(links_element):
                raw_links.append(_t2flow_link(element))

        return WorkflowGraph(
            id=workflow_id,
            title=normalize_whitespace(beans.get(TITLE_BEAN, "")) or name,
            description=beans.get(FREE_TEXT_BEAN, ""),
            format=WorkflowFormat.T2FLOW,
            processors=tuple(processors),
            links=_clean_links(raw_links, workflow_id),
            input_ports=_t2flow_port_names(dataflow, "inputPorts"),
            output_ports=_t2flow_port_names(dataflow, "outputPorts"),
        )

    def _t2flow_processor(self, element, dataflows, workflow_id: str,
                          visiting: set) -> Processor:
        name = _child_text(element, "name") or ""
        activity = None
        activities = _child(element, "activities")
        if activities is not None:
            found = _elements(activities)
            activity = found[0] if found else None

        if activity is None:
            return Processor(name=name, category=ProcessorCategory.OTHER)

        activity_type = _child_text(activity, "class") or ""
        category = self.categories.categorize(WorkflowFormat.T2FLOW, activity_type)

        bean = None
        config = _child(activity, "configBean")
        if config is not None:
            found = _elements(config)
            bean = found[0] if found else None

        endpoint = operation = None
        if bean is not None:
            endpoint = _first_text(bean, _ENDPOINT_FIELDS)
            operation = _first_text(bean, _OPERATION_FIELDS)

        nested = None
        description = None
        if category == ProcessorCategory.NESTED_WORKFLOW:
            nested_id = f"{workflow_id}/{name}"
            ref = bean.get("ref") if bean is not None else None
            inner = dataflows.get(ref) if ref else None
            if inner is not None and ref not in visiting:
                nested = self._t2flow_dataflow(inner, dataflows, nested_id, visiting)
                description = nested.description or None
            else:
                log.warning(f"Nested dataflow '{ref}' of '{name}' in {workflow_id} not found")
                nested = WorkflowGraph(id=nested_id, format=WorkflowFormat.T2FLOW)

        return Processor(
            name=name,
            category=category,
            embedded_description=description,
            endpoint=endpoint,
            operation_name=operation,
            nested=nested,
            activity_type=activity_type,
        )


def _split_scufl_endpoint(value: str) -> Tuple[Optional[str], str]:
    if ":" in value:
        processor, port = value.split(":", 1)
        return processor, port
    return None, value


def _t2flow_port_names(dataflow, container: str) -> Tuple[str, ...]:
    element = _child(dataflow, container)
    if element is None:
        return ()
    return tuple(_child_text(port, "name") or "" for port in _elements(element))


def _t2flow_endpoint(element) -> Tuple[Optional[str], str]:
    kind = element.get("type", "processor")
    port = _child_text(element, "port") or ""
    if kind == "dataflow":
        return None, port
    processor = _child_text(element, "processor")
    if kind == "merge":
        return processor, MERGED_PORT
    return processor, port


def _t2flow_link(element) -> DataLink:
    source = _child(element, "source")
    sink = _child(element, "sink")
    if source is None or sink is None:
        raise MalformedXml("datalink without source or sink")
    source_proc, source_port = _t2flow_endpoint(source)
    sink_proc, sink_port = _t2flow_endpoint(sink)
    return DataLink(source_proc, source_port, sink_proc, sink_port)


def _annotation_beans(dataflow) -> Dict[str, str]:
    """Text of the annotation beans attached directly to a dataflow."""
    beans: Dict[str, str] = {}
    annotations = _child(dataflow, "annotations")
    if annotations is None:
        return beans
    for bean in annotations.iter():
        if not isinstance(bean.tag, str) or _local(bean) != "annotationBean":
            continue
        text = _child_text(bean, "text")
        kind = bean.get("class", "")
        if text and kind not in beans:
            beans[kind] = text
    return beans


def _clean_links(links: List[DataLink], workflow_id: str) -> Tuple[DataLink, ...]:
    """Drop self-loops and duplicate links, keeping document order."""
    cleaned = []
    seen = set()
    for link in links:
        if link.source_processor is not None and link.source_processor == link.sink_processor:
            log.warning(f"Dropping self-loop {link.describe()} in {workflow_id}")
            continue
        if link.key in seen:
            continue
        seen.add(link.key)
        cleaned.append(link)
    return tuple(cleaned)


def parse_workflow(document: bytes, format_hint: Optional[WorkflowFormat] = None,
                   workflow_id: str = "workflow",
                   categories: Optional[CategoryTable] = None) -> WorkflowGraph:
    """Parse a scufl or t2flow document (see WorkflowParser.parse)."""
    return WorkflowParser(categories).parse(document, format_hint, workflow_id)

"""
Taverna workflow writer.

Writes a WorkflowGraph back into its own dialect. The output keeps
processors, categories, endpoints, links and ports so that parsing it again
gives the same graph; it is not meant to be opened in the Taverna GUI.
Inferred links are written exactly like authored ones.
"""

import hashlib
from dataclasses import replace
from typing import Dict, List, Optional

from lxml import etree

from .parser import (
    FREE_TEXT_BEAN,
    MERGED_PORT,
    SCUFL_NAMESPACE,
    T2FLOW_NAMESPACE,
    TITLE_BEAN,
)
from .structures import (
    CategoryTable,
    DataLink,
    Processor,
    ProcessorCategory,
    WorkflowFormat,
    WorkflowGraph,
)

_S = "{%s}" % SCUFL_NAMESPACE
_T = "{%s}" % T2FLOW_NAMESPACE


class WorkflowWriter:
    """Serializer for scufl and t2flow documents."""

    def __init__(self, categories: Optional[CategoryTable] = None):
        self.categories = categories or CategoryTable()

    def serialize(self, graph: WorkflowGraph) -> bytes:
        """
        Serialize a graph in its own dialect.

        Args:
            graph: Workflow to write

        Returns:
            UTF-8 encoded XML document
        """
        if graph.format == WorkflowFormat.SCUFL:
            root = self._scufl(graph)
        else:
            root = self._t2flow(graph)
        return etree.tostring(root, pretty_print=True, xml_declaration=True, encoding="UTF-8")

    def _activity_type(self, fmt: WorkflowFormat, proc: Processor) -> str:
        return proc.activity_type or self.categories.activity_type_for(fmt, proc.category)

    # Taverna 1

    def _scufl(self, graph: WorkflowGraph) -> etree._Element:
        root = etree.Element(_S + "scufl", nsmap={"s": SCUFL_NAMESPACE})
        root.set("version", "0.2")
        root.set("log", "0")
        self._fill_scufl(root, graph)
        return root

    def _fill_scufl(self, root, graph: WorkflowGraph) -> None:
        description = etree.SubElement(root, _S + "workflowdescription")
        description.set("lsid", "")
        description.set("author", "")
        description.set("title", graph.title)
        description.text = graph.description

        for proc in graph.processors:
            element = etree.SubElement(root, _S + "processor")
            element.set("name", proc.name)
            if proc.embedded_description:
                etree.SubElement(element, _S + "description").text = proc.embedded_description
            if proc.activity_type is None and proc.category == ProcessorCategory.OTHER:
                continue
            kind = etree.SubElement(element, _S + self._activity_type(WorkflowFormat.SCUFL, proc))
            if proc.category == ProcessorCategory.NESTED_WORKFLOW and proc.nested is not None:
                inner = etree.SubElement(kind, _S + "scufl")
                inner.set("version", "0.2")
                inner.set("log", "0")
                self._fill_scufl(inner, proc.nested)
                continue
            inline = proc.category == ProcessorCategory.SOAPLAB and not proc.operation_name
            _write_endpoint_fields(kind, proc, _S, inline_url=inline)

        for link in graph.links:
            element = etree.SubElement(root, _S + "link")
            element.set("source", _scufl_endpoint(link.source_processor, link.source_port))
            element.set("sink", _scufl_endpoint(link.sink_processor, link.sink_port))

        for port in graph.input_ports:
            etree.SubElement(root, _S + "source").set("name", port)
        for port in graph.output_ports:
            etree.SubElement(root, _S + "sink").set("name", port)

    # Taverna 2

    def _t2flow(self, graph: WorkflowGraph) -> etree._Element:
        root = etree.Element(_T + "workflow", nsmap={None: T2FLOW_NAMESPACE})
        root.set("version", "1")
        root.set("producedBy", "wfsem")
        nested: List[etree._Element] = []
        root.append(self._dataflow(graph, "top", nested))
        for element in nested:
            root.append(element)
        return root

    def _dataflow(self, graph: WorkflowGraph, role: str,
                  nested: List[etree._Element]) -> etree._Element:
        dataflow = etree.Element(_T + "dataflow")
        dataflow.set("id", _dataflow_id(graph.id))
        dataflow.set("role", role)
        etree.SubElement(dataflow, _T + "name").text = graph.title

        inputs = etree.SubElement(dataflow, _T + "inputPorts")
        for port in graph.input_ports:
            element = etree.SubElement(inputs, _T + "port")
            etree.SubElement(element, _T + "name").text = port
            etree.SubElement(element, _T + "depth").text = "0"
            etree.SubElement(element, _T + "granularDepth").text = "0"
        outputs = etree.SubElement(dataflow, _T + "outputPorts")
        for port in graph.output_ports:
            element = etree.SubElement(outputs, _T + "port")
            etree.SubElement(element, _T + "name").text = port

        ports_in, ports_out = _processor_ports(graph.links)
        processors = etree.SubElement(dataflow, _T + "processors")
        for proc in graph.processors:
            processors.append(
                self._t2flow_processor(proc, ports_in.get(proc.name, []),
                                       ports_out.get(proc.name, []), nested))

        etree.SubElement(dataflow, _T + "conditions")
        datalinks = etree.SubElement(dataflow, _T + "datalinks")
        for link in graph.links:
            datalinks.append(_t2flow_link(link))

        annotations = etree.SubElement(dataflow, _T + "annotations")
        if graph.title:
            annotations.append(_annotation_chain(TITLE_BEAN, graph.title))
        if graph.description:
            annotations.append(_annotation_chain(FREE_TEXT_BEAN, graph.description))
        return dataflow

    def _t2flow_processor(self, proc: Processor, inputs: List[str], outputs: List[str],
                          nested: List[etree._Element]) -> etree._Element:
        element = etree.Element(_T + "processor")
        etree.SubElement(element, _T + "name").text = proc.name
        for container, ports in (("inputPorts", inputs), ("outputPorts", outputs)):
            holder = etree.SubElement(element, _T + container)
            for port in ports:
                port_element = etree.SubElement(holder, _T + "port")
                etree.SubElement(port_element, _T + "name").text = port
                etree.SubElement(port_element, _T + "depth").text = "0"
        etree.SubElement(element, _T + "annotations")

        activities = etree.SubElement(element, _T + "activities")
        if proc.activity_type is None and proc.category == ProcessorCategory.OTHER:
            etree.SubElement(element, _T + "dispatchStack")
            etree.SubElement(element, _T + "iterationStrategyStack")
            return element
        activity = etree.SubElement(activities, _T + "activity")
        activity_type = self._activity_type(WorkflowFormat.T2FLOW, proc)
        raven = etree.SubElement(activity, _T + "raven")
        etree.SubElement(raven, _T + "group").text = "net.sf.taverna.t2.activities"
        etree.SubElement(raven, _T + "artifact").text = activity_type.rsplit(".", 1)[0]
        etree.SubElement(raven, _T + "version").text = "1.0"
        etree.SubElement(activity, _T + "class").text = activity_type
        etree.SubElement(activity, _T + "inputMap")
        etree.SubElement(activity, _T + "outputMap")
        config = etree.SubElement(activity, _T + "configBean")

        if proc.category == ProcessorCategory.NESTED_WORKFLOW and proc.nested is not None:
            config.set("encoding", "dataflow")
            etree.SubElement(config, _T + "dataflow").set("ref", _dataflow_id(proc.nested.id))
            nested_graph = proc.nested
            if proc.embedded_description and not nested_graph.description:
                nested_graph = replace(nested_graph, description=proc.embedded_description)
            nested.append(self._dataflow(nested_graph, "nested", nested))
        else:
            config.set("encoding", "xstream")
            bean = etree.SubElement(config, activity_type + "ConfigurationBean")
            _write_endpoint_fields(bean, proc, "")

        etree.SubElement(activity, _T + "annotations")
        etree.SubElement(element, _T + "dispatchStack")
        etree.SubElement(element, _T + "iterationStrategyStack")
        return element


def _write_endpoint_fields(element, proc: Processor, prefix: str, inline_url: bool = False) -> None:
    if proc.endpoint:
        if inline_url:
            element.text = proc.endpoint
        else:
            field = {
                ProcessorCategory.WSDL: "wsdl",
                ProcessorCategory.BIOMOBY: "mobyEndpoint",
                ProcessorCategory.REST: "urlSignature",
            }.get(proc.category, "endpoint")
            etree.SubElement(element, prefix + field).text = proc.endpoint
    if proc.operation_name:
        field = "serviceName" if proc.category == ProcessorCategory.BIOMOBY else "operation"
        etree.SubElement(element, prefix + field).text = proc.operation_name


def _scufl_endpoint(processor: Optional[str], port: str) -> str:
    return f"{processor}:{port}" if processor else port


def _dataflow_id(graph_id: str) -> str:
    return hashlib.sha1(graph_id.encode("utf-8")).hexdigest()


def _processor_ports(links) -> tuple:
    inputs: Dict[str, List[str]] = {}
    outputs: Dict[str, List[str]] = {}
    for link in links:
        if link.sink_processor and link.sink_port != MERGED_PORT:
            ports = inputs.setdefault(link.sink_processor, [])
            if link.sink_port not in ports:
                ports.append(link.sink_port)
        if link.source_processor:
            ports = outputs.setdefault(link.source_processor, [])
            if link.source_port not in ports:
                ports.append(link.source_port)
    return inputs, outputs


def _t2flow_link(link: DataLink) -> etree._Element:
    element = etree.Element(_T + "datalink")
    sink = etree.SubElement(element, _T + "sink")
    if link.sink_processor is None:
        sink.set("type", "dataflow")
    else:
        sink.set("type", "merge" if link.sink_port == MERGED_PORT else "processor")
        etree.SubElement(sink, _T + "processor").text = link.sink_processor
    etree.SubElement(sink, _T + "port").text = link.sink_port

    source = etree.SubElement(element, _T + "source")
    if link.source_processor is None:
        source.set("type", "dataflow")
    else:
        source.set("type", "processor")
        etree.SubElement(source, _T + "processor").text = link.source_processor
    etree.SubElement(source, _T + "port").text = link.source_port
    return element


def _annotation_chain(bean_class: str, text: str) -> etree._Element:
    chain = etree.Element(_T + "annotation_chain")
    chain.set("encoding", "xstream")
    impl = etree.SubElement(chain, "net.sf.taverna.t2.annotation.AnnotationChainImpl")
    assertions = etree.SubElement(impl, "annotationAssertions")
    assertion = etree.SubElement(assertions, "net.sf.taverna.t2.annotation.AnnotationAssertionImpl")
    bean = etree.SubElement(assertion, "annotationBean")
    bean.set("class", bean_class)
    etree.SubElement(bean, "text").text = text
    etree.SubElement(assertion, "creators")
    etree.SubElement(assertion, "curationEventList")
    return chain


def serialize_workflow(graph: WorkflowGraph, categories: Optional[CategoryTable] = None) -> bytes:
    """Serialize a graph in its own dialect (see WorkflowWriter.serialize)."""
    return WorkflowWriter(categories).serialize(graph)

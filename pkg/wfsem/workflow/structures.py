"""
Workflow object model shared by every pipeline stage.

A WorkflowGraph holds processors (steps), the data links between them and
the workflow's own input/output ports. Links whose source_processor is None
start at a workflow input port; links whose sink_processor is None end at a
workflow output port.

Graphs are frozen dataclasses: build a new one instead of mutating.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Iterable, Mapping, Optional, Tuple

from ..errors import DanglingLink


class WorkflowFormat(str, Enum):
    """Taverna document dialects."""
    SCUFL = "Scufl"
    T2FLOW = "T2flow"


class ProcessorCategory(str, Enum):
    """Closed set of processor kinds."""
    XML_SPLITTER = "XmlSplitter"
    SPREADSHEET_IMPORT = "SpreadsheetImport"
    STRING_CONSTANT = "StringConstant"
    BEANSHELL = "Beanshell"
    LOCAL_SERVICE = "LocalService"
    XPATH = "Xpath"
    WSDL = "Wsdl"
    REST = "Rest"
    BIOMOBY = "BioMoby"
    BIOMART = "BioMart"
    SOAPLAB = "Soaplab"
    RSHELL = "Rshell"
    NESTED_WORKFLOW = "NestedWorkflow"
    OTHER = "Other"

    @property
    def is_shim(self) -> bool:
        return self in SHIM_CATEGORIES

    @property
    def is_non_shim(self) -> bool:
        return self in NON_SHIM_CATEGORIES


SHIM_CATEGORIES = frozenset({
    ProcessorCategory.XML_SPLITTER,
    ProcessorCategory.SPREADSHEET_IMPORT,
    ProcessorCategory.STRING_CONSTANT,
    ProcessorCategory.BEANSHELL,
    ProcessorCategory.LOCAL_SERVICE,
    ProcessorCategory.XPATH,
})

NON_SHIM_CATEGORIES = frozenset({
    ProcessorCategory.WSDL,
    ProcessorCategory.REST,
    ProcessorCategory.BIOMOBY,
    ProcessorCategory.BIOMART,
    ProcessorCategory.SOAPLAB,
    ProcessorCategory.RSHELL,
    ProcessorCategory.NESTED_WORKFLOW,
})


# Processor-type element (scufl) or activity class (t2flow) -> category.
# Anything not listed maps to Other.
DEFAULT_SCUFL_CATEGORIES: Dict[str, ProcessorCategory] = {
    "arbitrarywsdl": ProcessorCategory.WSDL,
    "xmlsplitter": ProcessorCategory.XML_SPLITTER,
    "beanshell": ProcessorCategory.BEANSHELL,
    "local": ProcessorCategory.LOCAL_SERVICE,
    "stringconstant": ProcessorCategory.STRING_CONSTANT,
    "biomobywsdl": ProcessorCategory.BIOMOBY,
    "biomobyobject": ProcessorCategory.BIOMOBY,
    "biomart": ProcessorCategory.BIOMART,
    "soaplabwsdl": ProcessorCategory.SOAPLAB,
    "rshell": ProcessorCategory.RSHELL,
    "workflow": ProcessorCategory.NESTED_WORKFLOW,
}

_T2 = "net.sf.taverna.t2.activities."
DEFAULT_T2FLOW_CATEGORIES: Dict[str, ProcessorCategory] = {
    _T2 + "wsdl.WSDLActivity": ProcessorCategory.WSDL,
    _T2 + "wsdl.xmlsplitter.XMLInputSplitterActivity": ProcessorCategory.XML_SPLITTER,
    _T2 + "wsdl.xmlsplitter.XMLOutputSplitterActivity": ProcessorCategory.XML_SPLITTER,
    _T2 + "beanshell.BeanshellActivity": ProcessorCategory.BEANSHELL,
    _T2 + "localworker.LocalworkerActivity": ProcessorCategory.LOCAL_SERVICE,
    _T2 + "stringconstant.StringConstantActivity": ProcessorCategory.STRING_CONSTANT,
    _T2 + "spreadsheet.SpreadsheetImportActivity": ProcessorCategory.SPREADSHEET_IMPORT,
    _T2 + "xpath.XPathActivity": ProcessorCategory.XPATH,
    _T2 + "rest.RESTActivity": ProcessorCategory.REST,
    _T2 + "biomoby.BiomobyActivity": ProcessorCategory.BIOMOBY,
    _T2 + "biomoby.BiomobyObjectActivity": ProcessorCategory.BIOMOBY,
    _T2 + "biomart.BiomartActivity": ProcessorCategory.BIOMART,
    _T2 + "soaplab.SoaplabActivity": ProcessorCategory.SOAPLAB,
    _T2 + "rshell.RshellActivity": ProcessorCategory.RSHELL,
    _T2 + "dataflow.DataflowActivity": ProcessorCategory.NESTED_WORKFLOW,
}


@dataclass(frozen=True)
class CategoryTable:
    """Maps dialect-specific processor types to categories."""
    scufl: Mapping[str, ProcessorCategory] = field(
        default_factory=lambda: dict(DEFAULT_SCUFL_CATEGORIES))
    t2flow: Mapping[str, ProcessorCategory] = field(
        default_factory=lambda: dict(DEFAULT_T2FLOW_CATEGORIES))

    def categorize(self, fmt: "WorkflowFormat", activity_type: str) -> ProcessorCategory:
        table = self.scufl if fmt == WorkflowFormat.SCUFL else self.t2flow
        return table.get(activity_type, ProcessorCategory.OTHER)

    def activity_type_for(self, fmt: "WorkflowFormat", category: ProcessorCategory) -> str:
        """First processor type mapped to a category (used when writing)."""
        table = self.scufl if fmt == WorkflowFormat.SCUFL else self.t2flow
        for activity_type, mapped in table.items():
            if mapped == category:
                return activity_type
        return "other" if fmt == WorkflowFormat.SCUFL else _T2 + "other.UnknownActivity"

    @classmethod
    def with_overrides(cls, scufl: Optional[Mapping[str, str]] = None,
                       t2flow: Optional[Mapping[str, str]] = None) -> "CategoryTable":
        """Default table updated with config overrides (values are category names)."""
        scufl_table = dict(DEFAULT_SCUFL_CATEGORIES)
        t2flow_table = dict(DEFAULT_T2FLOW_CATEGORIES)
        for key, value in (scufl or {}).items():
            scufl_table[key] = ProcessorCategory(value)
        for key, value in (t2flow or {}).items():
            t2flow_table[key] = ProcessorCategory(value)
        return cls(scufl=scufl_table, t2flow=t2flow_table)


@dataclass(frozen=True)
class DataLink:
    """A directed data link between two ports."""
    source_processor: Optional[str]
    source_port: str
    sink_processor: Optional[str]
    sink_port: str
    inferred: bool = False

    @property
    def key(self) -> Tuple[str, str, str, str]:
        """Identity tuple used for uniqueness and ordering."""
        return (self.source_processor or "", self.source_port,
                self.sink_processor or "", self.sink_port)

    def describe(self) -> str:
        src = f"{self.source_processor}:{self.source_port}" if self.source_processor else self.source_port
        snk = f"{self.sink_processor}:{self.sink_port}" if self.sink_processor else self.sink_port
        return f"{src} -> {snk}"


@dataclass(frozen=True)
class Processor:
    """One workflow step."""
    name: str
    category: ProcessorCategory
    embedded_description: Optional[str] = None
    endpoint: Optional[str] = None
    operation_name: Optional[str] = None
    nested: Optional["WorkflowGraph"] = None
    # Element name (scufl) or activity class (t2flow) the category came from
    activity_type: Optional[str] = None

    def __post_init__(self):
        if (self.nested is not None) != (self.category == ProcessorCategory.NESTED_WORKFLOW):
            raise ValueError(
                f"Processor '{self.name}': nested graph present iff category is NestedWorkflow")

    @property
    def is_shim(self) -> bool:
        return self.category.is_shim


@dataclass(frozen=True)
class WorkflowGraph:
    """A parsed workflow document."""
    id: str
    title: str = ""
    description: str = ""
    tags: Tuple[str, ...] = ()
    format: WorkflowFormat = WorkflowFormat.SCUFL
    processors: Tuple[Processor, ...] = ()
    links: Tuple[DataLink, ...] = ()
    input_ports: Tuple[str, ...] = ()
    output_ports: Tuple[str, ...] = ()

    def processor(self, name: str) -> Processor:
        for proc in self.processors:
            if proc.name == name:
                return proc
        raise KeyError(name)

    @property
    def processor_names(self) -> Tuple[str, ...]:
        return tuple(p.name for p in self.processors)

    def validate(self) -> "WorkflowGraph":
        """
        Check the structural invariants.

        Raises:
            ValueError: Duplicate processor names, self-loops or duplicate links
            DanglingLink: A link endpoint that does not exist

        Returns:
            self, for chaining
        """
        names = set()
        for proc in self.processors:
            if proc.name in names:
                raise ValueError(f"Duplicate processor name '{proc.name}' in {self.id}")
            names.add(proc.name)

        inputs = set(self.input_ports)
        outputs = set(self.output_ports)
        seen = set()
        for link in self.links:
            if link.source_processor is None:
                if link.source_port not in inputs:
                    raise DanglingLink(link.source_port, link.describe())
            elif link.source_processor not in names:
                raise DanglingLink(link.source_processor, link.describe())
            if link.sink_processor is None:
                if link.sink_port not in outputs:
                    raise DanglingLink(link.sink_port, link.describe())
            elif link.sink_processor not in names:
                raise DanglingLink(link.sink_processor, link.describe())
            if link.source_processor is not None and link.source_processor == link.sink_processor:
                raise ValueError(f"Self-loop on '{link.source_processor}' in {self.id}")
            if link.key in seen:
                raise ValueError(f"Duplicate link {link.describe()} in {self.id}")
            seen.add(link.key)
        return self

    # JSON persistence

    def to_dict(self) -> Dict[str, Any]:
        return {
            "id": self.id,
            "title": self.title,
            "description": self.description,
            "tags": list(self.tags),
            "format": self.format.value,
            "input_ports": list(self.input_ports),
            "output_ports": list(self.output_ports),
            "processors": [_processor_to_dict(p) for p in self.processors],
            "links": [
                {
                    "source_processor": l.source_processor,
                    "source_port": l.source_port,
                    "sink_processor": l.sink_processor,
                    "sink_port": l.sink_port,
                    "inferred": l.inferred,
                }
                for l in self.links
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "WorkflowGraph":
        return cls(
            id=data["id"],
            title=data.get("title", ""),
            description=data.get("description", ""),
            tags=tuple(data.get("tags", ())),
            format=WorkflowFormat(data["format"]),
            input_ports=tuple(data.get("input_ports", ())),
            output_ports=tuple(data.get("output_ports", ())),
            processors=tuple(_processor_from_dict(p) for p in data.get("processors", ())),
            links=tuple(DataLink(**l) for l in data.get("links", ())),
        )


def _processor_to_dict(proc: Processor) -> Dict[str, Any]:
    return {
        "name": proc.name,
        "category": proc.category.value,
        "embedded_description": proc.embedded_description,
        "endpoint": proc.endpoint,
        "operation_name": proc.operation_name,
        "activity_type": proc.activity_type,
        "nested": proc.nested.to_dict() if proc.nested is not None else None,
    }


def _processor_from_dict(data: Mapping[str, Any]) -> Processor:
    nested = data.get("nested")
    return Processor(
        name=data["name"],
        category=ProcessorCategory(data["category"]),
        embedded_description=data.get("embedded_description"),
        endpoint=data.get("endpoint"),
        operation_name=data.get("operation_name"),
        activity_type=data.get("activity_type"),
        nested=WorkflowGraph.from_dict(nested) if nested else None,
    )


def sorted_links(links: Iterable[DataLink]) -> Tuple[DataLink, ...]:
    """Canonical link order."""
    return tuple(sorted(links, key=lambda l: (l.key, l.inferred)))

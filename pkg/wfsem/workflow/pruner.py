"""
Shim pruning and workflow composition statistics.

Shims are the data-shaping steps (splitters, constants, scripts, local
workers, xpath, spreadsheet import). Removing one must keep the flow of data
between the biologically meaningful steps, so every path

    u --port_a--> shim ... shim --port_b--> v

where u and v are non-shim processors or workflow ports becomes one inferred
link u:port_a -> v:port_b. Reconnection is computed over shim-only paths in
one pass, so the order shims are removed in never matters.
"""

from dataclasses import dataclass, field, replace
from statistics import mean
from typing import Dict, Iterable, List, Optional, Tuple

import networkx as nx

from ..errors import EmptyCorpus
from ..log import get_logger
from .structures import (
    DataLink,
    ProcessorCategory,
    WorkflowFormat,
    WorkflowGraph,
    sorted_links,
)

log = get_logger(__name__)

Node = Tuple[str, str]


def _node(kind: str, name: str) -> Node:
    return (kind, name)


def _source_node(link: DataLink) -> Node:
    if link.source_processor is None:
        return _node("input", link.source_port)
    return _node("processor", link.source_processor)


def _sink_node(link: DataLink) -> Node:
    if link.sink_processor is None:
        return _node("output", link.sink_port)
    return _node("processor", link.sink_processor)


def flow_graph(graph: WorkflowGraph) -> nx.MultiDiGraph:
    """
    Build the data-flow multigraph of a workflow.

    Nodes are ("processor", name), ("input", port) and ("output", port);
    every DataLink becomes one edge carrying the link in its "link" attribute.
    """
    g = nx.MultiDiGraph()
    for proc in graph.processors:
        g.add_node(_node("processor", proc.name), shim=proc.is_shim)
    for port in graph.input_ports:
        g.add_node(_node("input", port), shim=False)
    for port in graph.output_ports:
        g.add_node(_node("output", port), shim=False)
    for link in graph.links:
        g.add_edge(_source_node(link), _sink_node(link), link=link)
    return g


def prune_shims(graph: WorkflowGraph) -> WorkflowGraph:
    """
    Remove shim processors and reconnect the flow around them.

    Args:
        graph: Workflow satisfying the model invariants

    Returns:
        New graph without shims. Original non-shim links are kept as they are,
        links bridging shim-only paths are added with inferred=True, duplicates
        collapse, and non-shim processors left without links are kept.
    """
    shims = {p.name for p in graph.processors if p.is_shim}
    if not shims:
        return graph

    g = flow_graph(graph)
    shim_nodes = [n for n, data in g.nodes(data=True) if data["shim"]]
    shim_only = g.subgraph(shim_nodes)

    kept: Dict[Tuple[str, str, str, str], DataLink] = {}
    for link in graph.links:
        if link.source_processor in shims or link.sink_processor in shims:
            continue
        kept[link.key] = link

    for link in graph.links:
        if link.source_processor in shims or link.sink_processor not in shims:
            continue
        start = _sink_node(link)
        reachable = nx.descendants(shim_only, start) | {start}
        for shim in reachable:
            for _, target, data in g.out_edges(shim, data=True):
                if g.nodes[target]["shim"]:
                    continue
                last = data["link"]
                inferred = DataLink(
                    source_processor=link.source_processor,
                    source_port=link.source_port,
                    sink_processor=last.sink_processor,
                    sink_port=last.sink_port,
                    inferred=True,
                )
                if inferred.source_processor is not None and \
                        inferred.source_processor == inferred.sink_processor:
                    continue
                kept.setdefault(inferred.key, inferred)

    pruned = replace(
        graph,
        processors=tuple(p for p in graph.processors if p.name not in shims),
        links=sorted_links(kept.values()),
    )
    log.debug(f"{graph.id}: removed {len(shims)} shims, "
              f"{sum(link.inferred for link in pruned.links)} inferred links")
    return pruned


@dataclass
class CompositionStats:
    """Processor category counts over a corpus."""
    total: int = 0
    shims: int = 0
    non_shims: int = 0
    other: int = 0
    workflows: int = 0
    per_category: Dict[str, int] = field(default_factory=dict)
    # format -> (mean shims per workflow, mean non-shims per workflow)
    per_format_ratio: Dict[str, Tuple[float, float]] = field(default_factory=dict)
    shim_only_workflows: int = 0

    @property
    def shim_fraction(self) -> float:
        return self.shims / self.total if self.total else 0.0

    @property
    def mean_components(self) -> float:
        return self.total / self.workflows if self.workflows else 0.0

    def to_dict(self) -> Dict:
        return {
            "workflows": self.workflows,
            "total": self.total,
            "shims": self.shims,
            "non_shims": self.non_shims,
            "other": self.other,
            "shim_fraction": self.shim_fraction,
            "mean_components": self.mean_components,
            "shim_only_workflows": self.shim_only_workflows,
            "per_category": dict(self.per_category),
            "per_format_ratio": {
                fmt: {"mean_shims": shims, "mean_non_shims": non_shims}
                for fmt, (shims, non_shims) in self.per_format_ratio.items()
            },
        }


def compute_stats(corpus: Iterable[WorkflowGraph]) -> CompositionStats:
    """
    Count processor categories over a corpus.

    Args:
        corpus: Workflows (top-level processors only; nested graphs count as one)

    Returns:
        CompositionStats

    Raises:
        EmptyCorpus: No workflows given
    """
    workflows = list(corpus)
    if not workflows:
        raise EmptyCorpus()

    stats = CompositionStats(workflows=len(workflows))
    stats.per_category = {category.value: 0 for category in ProcessorCategory}
    per_format: Dict[str, List[Tuple[int, int]]] = {}

    for graph in workflows:
        shims = non_shims = 0
        for proc in graph.processors:
            stats.per_category[proc.category.value] += 1
            if proc.category.is_shim:
                shims += 1
            elif proc.category.is_non_shim:
                non_shims += 1
            else:
                stats.other += 1
        stats.shims += shims
        stats.non_shims += non_shims
        stats.total += len(graph.processors)
        if graph.processors and non_shims == 0 and shims == len(graph.processors):
            stats.shim_only_workflows += 1
        per_format.setdefault(graph.format.value, []).append((shims, non_shims))

    for fmt in WorkflowFormat:
        counts = per_format.get(fmt.value)
        if counts:
            stats.per_format_ratio[fmt.value] = (
                mean(c[0] for c in counts),
                mean(c[1] for c in counts),
            )
    return stats

"""
Pipeline stages.

    filter    parse workflow files, overlay repository entries, keep relevant ones
    prune     remove shims, write pruned graphs and .pruned documents
    harvest   assemble a description for every remaining processor
    annotate  match descriptions against the ontologies, dedup by precedence
    score     IC report, histograms, optional gold-standard comparison
    emit      one OPMW Turtle file per workflow, optional N-Triples dump
    stats     composition statistics of the relevant corpus

Every stage reads its upstream stage's outputs from the workspace and writes
under <workspace>/<stage>/. A stage whose input hash matches the manifest
and whose outputs are all present is not run again.
"""

import shutil
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .annotator import Annotation, annotate, dedup, dictionary_for
from .config import PipelineConfig
from .errors import ConfigError, EmptyTermList, MissingUpstream, WfsemError
from .exporters.opmw import UriMintingPolicy, emit_opmw, to_ntriples, write_turtle
from .exporters.tables import (
    read_json,
    write_composition,
    write_histogram,
    write_json,
    write_jsonl,
    write_verdicts,
)
from .harvest.fetcher import FixtureFetcher, RequestsFetcher
from .harvest.harvester import SourceKind, harvest, harvest_log_records
from .harvest.model import ServiceDescription
from .log import get_logger
from .ontology.loaders import load_ontology_file
from .ontology.store import OntologyStore
from .parallel import parallel_map
from .relevance import apply_filter, format_term_list, load_term_list, tag_filter
from .scoring import ServiceAnnotations, compare_gold, load_gold, score
from .workflow.entries import apply_entry, load_entries
from .workflow.parser import parse_workflow
from .workflow.pruner import compute_stats, prune_shims
from .workflow.structures import WorkflowGraph
from .workflow.writer import serialize_workflow
from .workspace import PIPELINE_STAGES, STAGE_ORDER, UPSTREAM, StageRecord, Workspace, hash_inputs, now

log = get_logger(__name__)

WORKFLOW_SUFFIXES = (".xml", ".scufl", ".t2flow")
STAGES = STAGE_ORDER + ("pipeline",)

Outputs = Tuple[List[Path], Dict, List[Dict[str, str]]]


@dataclass
class StageResult:
    record: StageRecord
    # inputs unchanged, nothing recomputed
    skipped: bool = False

    @property
    def stage(self) -> str:
        return self.record.stage


def workflow_files(input_dir: Path) -> List[Path]:
    return sorted(p for p in Path(input_dir).iterdir()
                  if p.is_file() and p.suffix.lower() in WORKFLOW_SUFFIXES)


def _workflow_ids(files: Sequence[Path]) -> Dict[Path, str]:
    """File stem, or the full file name when two files share a stem."""
    stems: Dict[str, int] = {}
    for path in files:
        stems[path.stem] = stems.get(path.stem, 0) + 1
    return {path: path.stem if stems[path.stem] == 1 else path.name for path in files}


def _failure(item: str, error: Exception) -> Dict[str, str]:
    return {"item": item, "error": str(error)}


class StageRunner:
    """Runs stages against one workspace with one configuration."""

    def __init__(self, config: PipelineConfig, workspace: Workspace,
                 input_dir: Optional[Path] = None, show_progress: bool = False):
        self.config = config
        self.workspace = workspace
        self.input_dir = Path(input_dir) if input_dir is not None else None
        self.show_progress = show_progress
        self._store: Optional[OntologyStore] = None

    def run(self, stage: str) -> List[StageResult]:
        """
        Run one stage, or all pipeline stages in order for "pipeline".

        Raises:
            MissingUpstream: The upstream stage has no outputs
            ConfigError: A setting the stage needs is missing or invalid
        """
        if stage not in STAGES:
            raise ConfigError("stage", f"unknown stage '{stage}'")
        names = PIPELINE_STAGES if stage == "pipeline" else (stage,)
        results = []
        for name in names:
            results.append(self._execute(name))
        return results

    # Plumbing

    def _execute(self, stage: str) -> StageResult:
        upstream = UPSTREAM[stage]
        if upstream is not None and not self.workspace.outputs_present(upstream):
            raise MissingUpstream(stage, upstream)

        input_hash = getattr(self, f"_hash_{stage}")()
        record = self.workspace.manifest.stages.get(stage)
        if record is not None and record.input_hash == input_hash \
                and self.workspace.outputs_present(stage):
            record.finished = now()
            self.workspace.save()
            log.info(f"{stage}: inputs unchanged, skipping")
            return StageResult(record, skipped=True)

        stage_dir = self.workspace.stage_dir(stage)
        if stage_dir.exists():
            shutil.rmtree(stage_dir)
        stage_dir.mkdir(parents=True)

        started = now()
        outputs, counts, failures = getattr(self, f"_run_{stage}")(stage_dir)
        record = StageRecord(
            stage=stage,
            input_hash=input_hash,
            outputs=[self.workspace.relative(p) for p in outputs],
            counts=counts,
            failures=failures,
            started=started,
            finished=now(),
        )
        self.workspace.manifest.record(record)
        self.workspace.save()
        if failures:
            log.warning(f"{stage}: {len(failures)} item(s) failed")
        log.info(f"{stage}: done ({', '.join(f'{k}={v}' for k, v in counts.items())})")
        return StageResult(record)

    def _map(self, fn: Callable, items: Sequence, desc: str) -> List:
        return parallel_map(fn, items, jobs=self.config.jobs, desc=desc,
                            show_progress=self.show_progress)

    def _require_input(self) -> Path:
        input_dir = self.input_dir
        if input_dir is None and self.workspace.manifest.input_dir:
            input_dir = Path(self.workspace.manifest.input_dir)
        if input_dir is None:
            raise ConfigError("input", "no input directory given (--input)")
        if not input_dir.is_dir():
            raise ConfigError("input", f"not a directory: {input_dir}")
        return input_dir

    def _upstream_files(self, stage: str) -> List[Path]:
        return self.workspace.output_files(stage)

    def _ontology_files(self) -> List[Path]:
        return [spec.path for spec in self.config.ontologies]

    def store(self) -> OntologyStore:
        """Configured ontologies, loaded once per runner."""
        if self._store is None:
            if not self.config.ontologies:
                raise ConfigError("ontologies", "no ontology configured")
            store = OntologyStore()
            for spec in self.config.ontologies:
                load_ontology_file(spec.path, spec.format, spec.id, store)
            self._store = store.freeze()
        return self._store

    def _load_graphs(self, stage: str) -> List[Tuple[str, WorkflowGraph]]:
        graphs = []
        for path in sorted((self.workspace.stage_dir(stage) / "graphs").glob("*.json")):
            data = read_json(path)
            graphs.append((data["source"], WorkflowGraph.from_dict(data["graph"])))
        return graphs

    # Input hashes

    def _hash_filter(self) -> str:
        input_dir = self._require_input()
        files = workflow_files(input_dir)
        entries = input_dir / self.config.entries
        if entries.is_file():
            files.append(entries)
        terms = format_term_list(load_term_list(self.config.terms))
        return hash_inputs(files, extra={"terms": terms, **self.config.section("categories")})

    def _hash_prune(self) -> str:
        return hash_inputs(self._upstream_files("filter"), extra=self.config.section("categories"))

    def _hash_harvest(self) -> str:
        files = self._upstream_files("prune")
        directories = [self.config.fetch.fixtures] if self.config.fetch.fixtures else []
        directories += [Path(s.locator) for s in self.config.sources if s.kind == SourceKind.FIXTURE]
        for directory in directories:
            files.extend(p for p in directory.iterdir() if p.is_file())
        return hash_inputs(files, extra=self.config.section("sources", "fetch"))

    def _hash_annotate(self) -> str:
        files = self._upstream_files("harvest") + self._ontology_files()
        return hash_inputs(files, extra=self.config.section("ontologies", "precedence", "annotator"))

    def _hash_score(self) -> str:
        files = self._upstream_files("annotate") + self._ontology_files()
        if self.config.gold:
            files.append(self.config.gold)
        return hash_inputs(files, extra=self.config.section("ic", "histogram", "report", "gold"))

    def _hash_emit(self) -> str:
        files = self._upstream_files("annotate") + self._upstream_files("prune")
        return hash_inputs(files, extra=self.config.section("emit"))

    def _hash_stats(self) -> str:
        return hash_inputs(self._upstream_files("filter"))

    # Stages

    def _run_filter(self, out: Path) -> Outputs:
        input_dir = self._require_input()
        self.workspace.manifest.input_dir = str(input_dir)
        terms = load_term_list(self.config.terms)
        if not terms.effective:
            raise ConfigError("terms", str(EmptyTermList()))

        files = workflow_files(input_dir)
        ids = _workflow_ids(files)
        entries_path = input_dir / self.config.entries
        entries = load_entries(entries_path) if entries_path.is_file() else {}

        def parse_one(path: Path):
            try:
                graph = parse_workflow(path.read_bytes(), workflow_id=ids[path],
                                       categories=self.config.categories)
            except (WfsemError, ValueError, OSError) as e:
                log.warning(f"Could not parse {path.name}: {e}")
                return path, None, e
            entry = entries.get(graph.id)
            return path, apply_entry(graph, entry) if entry else graph, None

        parsed = self._map(parse_one, files, "parse")
        failures = [_failure(path.name, error) for path, graph, error in parsed if error]
        graphs = [(path, graph) for path, graph, error in parsed if graph is not None]

        verdicts = [apply_filter(graph, terms) for _, graph in graphs]
        graphs_dir = out / "graphs"
        graphs_dir.mkdir()
        relevant = 0
        for (path, graph), verdict in zip(graphs, verdicts):
            if verdict.relevant:
                relevant += 1
                write_json(graphs_dir / f"{graph.id}.json", {"source": path.name, "graph": graph.to_dict()})

        counts = {
            "files": len(files),
            "parsed": len(graphs),
            "failed": len(failures),
            "relevant": relevant,
            "not_relevant": len(graphs) - relevant,
            "tag_baseline": sum(tag_filter(graph) for _, graph in graphs),
        }
        return [write_verdicts(out / "verdicts.csv", verdicts), graphs_dir], counts, failures

    def _run_prune(self, out: Path) -> Outputs:
        graphs = self._load_graphs("filter")
        graphs_dir = out / "graphs"
        pruned_dir = out / "pruned"
        graphs_dir.mkdir()
        pruned_dir.mkdir()
        failures = []
        counts = {"workflows": len(graphs), "processors_before": 0, "processors_after": 0,
                  "shims_removed": 0, "inferred_links": 0, "empty_workflows": 0}

        pruned = self._map(lambda item: (item[0], prune_shims(item[1])), graphs, "prune")
        for (source, graph), (_, result) in zip(graphs, pruned):
            counts["processors_before"] += len(graph.processors)
            counts["processors_after"] += len(result.processors)
            counts["shims_removed"] += len(graph.processors) - len(result.processors)
            counts["inferred_links"] += sum(link.inferred for link in result.links)
            if graph.processors and not result.processors:
                counts["empty_workflows"] += 1
            write_json(graphs_dir / f"{graph.id}.json", {"source": source, "graph": result.to_dict()})
            try:
                document = serialize_workflow(result, self.config.categories)
            except (WfsemError, ValueError) as e:
                failures.append(_failure(source, e))
                continue
            (pruned_dir / f"{source}.pruned").write_bytes(document)
        return [graphs_dir, pruned_dir], counts, failures

    def _run_harvest(self, out: Path) -> Outputs:
        graphs = self._load_graphs("prune")
        fetch = self.config.fetch
        if fetch.fixtures:
            http = FixtureFetcher(fetch.fixtures)
        else:
            http = RequestsFetcher(timeout=fetch.timeout, retries=fetch.retries, backoff=fetch.backoff)

        items = [(graph.id, proc) for _, graph in graphs for proc in graph.processors]
        try:
            descriptions: List[ServiceDescription] = self._map(
                lambda item: harvest(item[1], self.config.sources, http, item[0], fetch.timeout),
                items, "harvest")
        finally:
            http.close()

        records = [record for d in descriptions for record in harvest_log_records(d)]
        counts = {
            "services": len(descriptions),
            "name_only": sum(d.name_only for d in descriptions),
            "described": sum(not d.name_only for d in descriptions),
            "source_errors": sum(r["outcome"] == "error" for r in records),
        }
        outputs = [
            write_json(out / "descriptions.json", [d.to_dict() for d in descriptions]),
            write_jsonl(out / "harvest_log.jsonl", records),
        ]
        return outputs, counts, []

    def _run_annotate(self, out: Path) -> Outputs:
        descriptions = read_json(self.workspace.stage_dir("harvest") / "descriptions.json")
        dictionary = dictionary_for(self.store(), self.config.min_term_length)

        def annotate_one(data: Dict) -> Dict:
            raw = annotate(data["assembled"], dictionary)
            return {
                "workflow": data["workflow"],
                "processor": data["processor"],
                "described": not data["name_only"],
                "name_only": data["name_only"],
                "raw": [a.to_dict() for a in raw],
                "deduped": [a.to_dict() for a in dedup(raw, self.config.precedence)],
            }

        services = self._map(annotate_one, descriptions, "annotate")
        lines = [
            {"workflow": s["workflow"], "processor": s["processor"], **a}
            for s in services for a in s["deduped"]
        ]
        annotated = sum(bool(s["deduped"]) for s in services)
        counts = {
            "services": len(services),
            "services_annotated": annotated,
            "services_unannotated": len(services) - annotated,
            "annotations": sum(len(s["raw"]) for s in services),
            "annotations_dedup": len(lines),
        }
        outputs = [
            write_json(out / "services.json", services),
            write_jsonl(out / "annotations.jsonl", lines),
        ]
        return outputs, counts, []

    def _service_annotations(self) -> List[ServiceAnnotations]:
        services = read_json(self.workspace.stage_dir("annotate") / "services.json")
        return [
            ServiceAnnotations(
                workflow_id=s["workflow"],
                processor=s["processor"],
                raw=[Annotation.from_dict(a) for a in s["raw"]],
                deduped=[Annotation.from_dict(a) for a in s["deduped"]],
                described=s["described"],
                name_only=s["name_only"],
            )
            for s in services
        ]

    def _run_score(self, out: Path) -> Outputs:
        store = self.store()
        config = self.config
        report = score(self._service_annotations(), store, config.metric,
                       bins=config.bins, top_n=config.top_n)
        outputs = [write_json(out / "ic_report.json", report.to_dict())]
        for kind, bins in sorted(report.histograms.items()):
            outputs.append(write_histogram(out / "histograms" / f"{kind}.csv", bins))

        counts = {key: value for key, value in report.summary.items()}
        counts["scored_annotations"] = sum(count for _, count in report.histograms["annotation"])
        if config.gold:
            comparison = compare_gold(load_gold(config.gold), store, config.metric, report, config.bins)
            outputs.append(write_json(out / "gold_comparison.json", comparison.to_dict()))
            counts["gold_entities"] = comparison.entities
            counts["gold_skipped_terms"] = comparison.skipped_terms
        return outputs, counts, []

    def _run_emit(self, out: Path) -> Outputs:
        graphs = self._load_graphs("prune")
        by_workflow: Dict[str, Dict[str, List[Annotation]]] = {}
        for service in self._service_annotations():
            by_workflow.setdefault(service.workflow_id, {})[service.processor] = service.deduped

        policy = UriMintingPolicy(namespace=self.config.emit_namespace)
        ttl_dir = out / "ttl"
        ttl_dir.mkdir()
        failures = []
        triples: List[str] = []
        counts = {"workflows": 0, "processors": 0, "triples": 0}
        for source, graph in graphs:
            try:
                rdf = emit_opmw(graph, by_workflow.get(graph.id, {}), policy)
            except WfsemError as e:
                failures.append(_failure(source, e))
                continue
            write_turtle(rdf, ttl_dir / f"{graph.id}.ttl")
            counts["workflows"] += 1
            counts["processors"] += len(graph.processors)
            counts["triples"] += len(rdf)
            if self.config.ntriples:
                triples.extend(to_ntriples(rdf))

        outputs = [ttl_dir]
        if self.config.ntriples:
            dump = out / "all.nt"
            dump.write_text("".join(line + "\n" for line in sorted(triples)), encoding="utf-8")
            outputs.append(dump)
        return outputs, counts, failures

    def _run_stats(self, out: Path) -> Outputs:
        stats = compute_stats(graph for _, graph in self._load_graphs("filter"))
        outputs = list(write_composition(out, stats))
        counts = {
            "workflows": stats.workflows,
            "total": stats.total,
            "shims": stats.shims,
            "non_shims": stats.non_shims,
            "other": stats.other,
        }
        return outputs, counts, []


def run_stage(stage: str, config: PipelineConfig, workspace: Workspace,
              input_dir: Optional[Path] = None, show_progress: bool = False) -> List[StageResult]:
    """
    Run a stage (or the whole pipeline) and update the workspace manifest.

    Raises:
        MissingUpstream: Upstream outputs are absent
        ConfigError: Missing or invalid settings
    """
    return StageRunner(config, workspace, input_dir, show_progress).run(stage)

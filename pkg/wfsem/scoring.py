"""
IC scoring and reporting.

Aggregation rules:
    annotation  IC of its class under the chosen metric (None = unscorable)
    service     max over the service's scorable pre-dedup annotations; a
                service without one scores 0 and is flagged unscored
    workflow    mean service IC over the services that had a description
    ontology    mean/min IC, annotation count and distinct classes over the
                pre-dedup annotations of that ontology

Service means are reported both including and excluding unscored services.
Histograms use equal-width bins over [0, 1]; bins are right-open except the
last, which also holds 1.0.
"""

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from statistics import mean
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import pandas as pd

from .annotator import Annotation
from .errors import UnknownClass
from .log import get_logger
from .ontology.store import ICMetric, OntologyStore

log = get_logger(__name__)

DEFAULT_BINS = 10


@dataclass
class ServiceAnnotations:
    """Annotations of one harvested service."""
    workflow_id: str
    processor: str
    raw: List[Annotation] = field(default_factory=list)
    deduped: List[Annotation] = field(default_factory=list)
    # harvested text beyond the service name; only these count towards workflow IC
    described: bool = True
    name_only: bool = False

    @property
    def key(self) -> str:
        return f"{self.workflow_id}/{self.processor}"


@dataclass(frozen=True)
class ServiceScore:
    ic: float
    unscored: bool
    described: bool = True


@dataclass(frozen=True)
class OntologyScore:
    mean_ic: float
    min_ic: float
    annotations: int
    distinct_terms: int
    unscorable: int = 0


def histogram(values: Iterable[float], bins: int = DEFAULT_BINS) -> List[Tuple[float, int]]:
    """(lower bound, count) per equal-width bin over [0, 1]."""
    counts = [0] * bins
    for value in values:
        index = min(int(value * bins), bins - 1)
        counts[max(index, 0)] += 1
    return [(round(i / bins, 10), counts[i]) for i in range(bins)]


def _mean(values: Sequence[float]) -> Optional[float]:
    return mean(values) if values else None


@dataclass
class ICReport:
    metric: str
    per_annotation: List[Annotation] = field(default_factory=list)
    per_service: Dict[str, ServiceScore] = field(default_factory=dict)
    per_workflow: Dict[str, float] = field(default_factory=dict)
    per_ontology: Dict[str, OntologyScore] = field(default_factory=dict)
    histograms: Dict[str, List[Tuple[float, int]]] = field(default_factory=dict)
    summary: Dict[str, Optional[float]] = field(default_factory=dict)
    coverage: Dict[str, float] = field(default_factory=dict)
    top_annotations: List[Dict] = field(default_factory=list)

    def to_dict(self) -> Dict:
        return {
            "metric": self.metric,
            "summary": self.summary,
            "coverage": self.coverage,
            "per_ontology": {
                oid: {
                    "mean_ic": s.mean_ic,
                    "min_ic": s.min_ic,
                    "annotations": s.annotations,
                    "distinct_terms": s.distinct_terms,
                    "unscorable": s.unscorable,
                }
                for oid, s in sorted(self.per_ontology.items())
            },
            "per_workflow": dict(sorted(self.per_workflow.items())),
            "per_service": {
                key: {"ic": s.ic, "unscored": s.unscored, "described": s.described}
                for key, s in sorted(self.per_service.items())
            },
            "per_annotation": [
                {**a.to_dict(), "ic": a.ic} for a in self.per_annotation
            ],
            "histograms": {
                kind: [[lower, count] for lower, count in bins]
                for kind, bins in sorted(self.histograms.items())
            },
            "top_annotations": self.top_annotations,
        }


def score(services: Sequence[ServiceAnnotations], store: OntologyStore, metric: ICMetric,
          bins: int = DEFAULT_BINS, top_n: int = 10) -> ICReport:
    """
    Score annotations and aggregate them.

    Args:
        services: Pre- and post-dedup annotations per harvested service
        store: Frozen ontology store
        metric: IC metric
        bins: Histogram bin count
        top_n: Length of the most-frequent-annotation list

    Returns:
        ICReport

    Raises:
        UnknownClass: An annotation names a class the store does not hold
    """
    cache: Dict[Tuple[str, str], Optional[float]] = {}

    def ic_of(annotation: Annotation) -> Optional[float]:
        key = (annotation.class_uri, annotation.ontology_id)
        if key not in cache:
            cache[key] = store.information_content(annotation.class_uri, metric, annotation.ontology_id)
        return cache[key]

    report = ICReport(metric=str(metric))
    raw_scores: List[float] = []
    dedup_scores: List[float] = []
    by_ontology: Dict[str, List[Optional[float]]] = {}
    distinct: Dict[str, set] = {}
    by_workflow: Dict[str, List[float]] = {}
    frequency: Counter = Counter()

    for service in services:
        best: Optional[float] = None
        for annotation in service.raw:
            value = ic_of(annotation)
            by_ontology.setdefault(annotation.ontology_id, []).append(value)
            distinct.setdefault(annotation.ontology_id, set()).add(annotation.class_uri)
            if value is None:
                continue
            raw_scores.append(value)
            best = value if best is None else max(best, value)

        for annotation in service.deduped:
            value = ic_of(annotation)
            report.per_annotation.append(annotation.with_ic(value))
            frequency[(annotation.class_uri, annotation.ontology_id)] += 1
            if value is not None:
                dedup_scores.append(value)

        report.per_service[service.key] = ServiceScore(
            ic=best if best is not None else 0.0,
            unscored=best is None,
            described=service.described,
        )
        if service.described:
            by_workflow.setdefault(service.workflow_id, []).append(
                best if best is not None else 0.0)

    for workflow_id, values in by_workflow.items():
        report.per_workflow[workflow_id] = mean(values)

    for ontology_id, values in by_ontology.items():
        scored = [v for v in values if v is not None]
        report.per_ontology[ontology_id] = OntologyScore(
            mean_ic=mean(scored) if scored else 0.0,
            min_ic=min(scored) if scored else 0.0,
            annotations=len(values),
            distinct_terms=len(distinct[ontology_id]),
            unscorable=len(values) - len(scored),
        )

    including = [s.ic for s in report.per_service.values()]
    excluding = [s.ic for s in report.per_service.values() if not s.unscored]
    report.summary = {
        "mean_annotation_ic": _mean(raw_scores),
        "mean_annotation_ic_dedup": _mean(dedup_scores),
        "mean_service_ic_including_unscored": _mean(including),
        "mean_service_ic_excluding_unscored": _mean(excluding),
        "mean_workflow_ic": _mean(list(report.per_workflow.values())),
    }

    report.histograms = {
        "annotation": histogram(raw_scores, bins),
        "annotation_dedup": histogram(dedup_scores, bins),
        "service": histogram(including, bins),
        "workflow": histogram(report.per_workflow.values(), bins),
    }
    report.coverage = _coverage(services)

    for (uri, ontology_id), count in sorted(frequency.items(), key=lambda kv: (-kv[1], kv[0]))[:top_n]:
        report.top_annotations.append({
            "class_uri": uri,
            "ontology": ontology_id,
            "label": store.get(uri, ontology_id).label,
            "count": count,
        })
    log.info(f"Scored {len(raw_scores)} annotations over {len(services)} services with {metric}")
    return report


def _coverage(services: Sequence[ServiceAnnotations]) -> Dict[str, float]:
    total = len(services)
    annotated = [s for s in services if s.deduped]
    workflows = {s.workflow_id for s in services}
    annotated_workflows = {s.workflow_id for s in annotated}
    return {
        "services": total,
        "services_annotated": len(annotated),
        "services_annotated_fraction": len(annotated) / total if total else 0.0,
        "services_name_only": sum(s.name_only for s in services),
        "workflows": len(workflows),
        "workflows_annotated": len(annotated_workflows),
        "workflows_annotated_fraction": len(annotated_workflows) / len(workflows) if workflows else 0.0,
        "annotations": sum(len(s.raw) for s in services),
        "annotations_dedup": sum(len(s.deduped) for s in services),
        "distinct_classes": len({a.class_uri for s in services for a in s.deduped}),
    }


# Gold standard

@dataclass(frozen=True)
class GoldStandardEntry:
    entity_id: str
    term_uris: frozenset

    def __post_init__(self):
        if not self.term_uris:
            raise ValueError(f"Gold entry '{self.entity_id}' has no terms")


def load_gold(path: Union[str, Path]) -> List[GoldStandardEntry]:
    """Read a two-column TSV (entity id, term uri), one pair per line."""
    frame = pd.read_csv(path, sep="\t", header=None, names=["entity", "term"],
                        usecols=[0, 1], dtype=str, keep_default_na=False, comment="#")
    terms: Dict[str, set] = {}
    for row in frame.itertuples(index=False):
        entity, term = row.entity.strip(), row.term.strip()
        if entity and term:
            terms.setdefault(entity, set()).add(term)
    return [GoldStandardEntry(entity, frozenset(uris)) for entity, uris in terms.items()]


@dataclass
class GoldComparison:
    metric: str
    entities: int = 0
    annotations: int = 0
    skipped_terms: int = 0
    skipped_entities: int = 0
    mean_annotation_ic: Optional[float] = None
    mean_entity_ic: Optional[float] = None
    per_entity: Dict[str, float] = field(default_factory=dict)
    histograms: Dict[str, List[Tuple[float, int]]] = field(default_factory=dict)
    automatic: Dict[str, Optional[float]] = field(default_factory=dict)

    def to_dict(self) -> Dict:
        return {
            "metric": self.metric,
            "entities": self.entities,
            "annotations": self.annotations,
            "skipped_terms": self.skipped_terms,
            "skipped_entities": self.skipped_entities,
            "gold": {
                "mean_annotation_ic": self.mean_annotation_ic,
                "mean_entity_ic": self.mean_entity_ic,
            },
            "automatic": self.automatic,
            "per_entity": dict(sorted(self.per_entity.items())),
            "histograms": {
                kind: [[lower, count] for lower, count in bins]
                for kind, bins in sorted(self.histograms.items())
            },
        }


def compare_gold(gold: Sequence[GoldStandardEntry], store: OntologyStore, metric: ICMetric,
                 automatic: Optional[ICReport] = None, bins: int = DEFAULT_BINS) -> GoldComparison:
    """
    Score a manual annotation set the way service annotations are scored.

    Terms that do not resolve are skipped and counted; an entity left with no
    known term is skipped too. Entity IC = max over its scorable term ICs.
    """
    result = GoldComparison(metric=str(metric))
    annotation_scores: List[float] = []
    for entry in gold:
        values = []
        known = 0
        for reference in sorted(entry.term_uris):
            try:
                uri = store.resolve(reference)
            except UnknownClass:
                result.skipped_terms += 1
                log.warning(f"Gold entity {entry.entity_id}: unknown term {reference}")
                continue
            known += 1
            value = store.information_content(uri, metric)
            if value is not None:
                values.append(value)
        if not known:
            result.skipped_entities += 1
            continue
        result.annotations += known
        annotation_scores.extend(values)
        result.per_entity[entry.entity_id] = max(values) if values else 0.0

    result.entities = len(result.per_entity)
    result.mean_annotation_ic = _mean(annotation_scores)
    result.mean_entity_ic = _mean(list(result.per_entity.values()))
    result.histograms = {
        "annotation": histogram(annotation_scores, bins),
        "entity": histogram(result.per_entity.values(), bins),
    }
    if automatic is not None:
        result.automatic = {
            "mean_annotation_ic": automatic.summary.get("mean_annotation_ic"),
            "mean_service_ic_including_unscored": automatic.summary.get("mean_service_ic_including_unscored"),
            "mean_service_ic_excluding_unscored": automatic.summary.get("mean_service_ic_excluding_unscored"),
        }
    return result

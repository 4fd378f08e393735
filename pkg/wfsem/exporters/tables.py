"""
Report writers.

All writers produce byte-stable output for equal input: JSON with a fixed
indent and a trailing newline, CSV through pandas without the index and with
"\n" line endings.
"""

import json
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Sequence, Tuple

import pandas as pd

from ..relevance import FilterVerdict
from ..workflow.pruner import CompositionStats


def dumps(data: Any) -> str:
    return json.dumps(data, indent=2, ensure_ascii=False) + "\n"


def write_json(path: Path, data: Any) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(data), encoding="utf-8")
    return path


def read_json(path: Path) -> Any:
    return json.loads(path.read_text(encoding="utf-8"))


def write_jsonl(path: Path, records: Iterable[Mapping]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for record in records:
            f.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")
    return path


def read_jsonl(path: Path) -> List[Dict]:
    with open(path, encoding="utf-8") as f:
        return [json.loads(line) for line in f if line.strip()]


def write_csv(path: Path, rows: Sequence[Mapping], columns: Sequence[str]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(list(rows), columns=list(columns))
    frame.to_csv(path, index=False, lineterminator="\n")
    return path


def write_verdicts(path: Path, verdicts: Iterable[FilterVerdict]) -> Path:
    """workflow_id, relevant, matched_terms ('|'-separated, sorted)."""
    rows = [
        {
            "workflow_id": v.workflow_id,
            "relevant": str(v.relevant).lower(),
            "matched_terms": "|".join(sorted(v.matched_terms)),
            "matched_fields": "|".join(sorted(v.matched_fields)),
        }
        for v in verdicts
    ]
    return write_csv(path, rows, ["workflow_id", "relevant", "matched_terms", "matched_fields"])


def read_verdicts(path: Path) -> Dict[str, bool]:
    frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    return {row.workflow_id: row.relevant == "true" for row in frame.itertuples(index=False)}


def write_composition(directory: Path, stats: CompositionStats) -> Tuple[Path, Path]:
    """composition.json (full stats) and composition.csv (category,count)."""
    json_path = write_json(directory / "composition.json", stats.to_dict())
    rows = [{"category": category, "count": count}
            for category, count in stats.per_category.items()]
    csv_path = write_csv(directory / "composition.csv", rows, ["category", "count"])
    return json_path, csv_path


def write_histogram(path: Path, bins: Sequence[Tuple[float, int]]) -> Path:
    rows = [{"bin": lower, "count": count} for lower, count in bins]
    return write_csv(path, rows, ["bin", "count"])

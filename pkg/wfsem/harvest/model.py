"""Harvested description types."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple


class FragmentKind(str, Enum):
    SERVICE_NAME = "service_name"
    SERVICE_DESCRIPTION = "service_description"
    OPERATION_NAME = "operation_name"
    OPERATION_DESCRIPTION = "operation_description"


# Assembly order
FRAGMENT_ORDER = (
    FragmentKind.SERVICE_NAME,
    FragmentKind.SERVICE_DESCRIPTION,
    FragmentKind.OPERATION_NAME,
    FragmentKind.OPERATION_DESCRIPTION,
)


@dataclass(frozen=True)
class Fragment:
    kind: FragmentKind
    text: str
    source_id: str


@dataclass
class ServiceDescription:
    """Description of one processor with per-fragment provenance."""
    processor_ref: Tuple[str, str]
    fragments: List[Fragment] = field(default_factory=list)
    # one record per source consulted: {"source", "outcome", "detail"}
    attempts: List[Dict[str, str]] = field(default_factory=list)

    def fragment(self, kind: FragmentKind) -> Optional[Fragment]:
        for fragment in self.fragments:
            if fragment.kind == kind:
                return fragment
        return None

    @property
    def assembled(self) -> str:
        parts = []
        for kind in FRAGMENT_ORDER:
            fragment = self.fragment(kind)
            if fragment is not None:
                parts.append(fragment.text)
        return " ".join(parts)

    @property
    def name_only(self) -> bool:
        return [f.kind for f in self.fragments] == [FragmentKind.SERVICE_NAME]

    def to_dict(self) -> Dict:
        return {
            "workflow": self.processor_ref[0],
            "processor": self.processor_ref[1],
            "assembled": self.assembled,
            "name_only": self.name_only,
            "fragments": [
                {"kind": f.kind.value, "text": f.text, "source": f.source_id}
                for f in self.fragments
            ],
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "ServiceDescription":
        return cls(
            processor_ref=(data["workflow"], data["processor"]),
            fragments=[
                Fragment(FragmentKind(f["kind"]), f["text"], f["source"])
                for f in data.get("fragments", ())
            ],
        )

"""Unified sample records and their JSONL wire forms."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Any, Optional

from .editlog import Edit

DATASET_TAGS = ("gpt4-alpaca", "supernatural", "dolly")


@dataclass(frozen=True)
class InstructionSample:
    """One training example: instruction, optional context, response.

    Parsers reject empty instructions at ingest time; the type itself allows
    them because perturbation can legitimately empty one out (an instruction
    made entirely of stop words, say).
    """

    id: str
    dataset: str
    instruction: str
    context: Optional[str]
    response: str

    def with_instruction(self, instruction: str) -> "InstructionSample":
        return replace(self, instruction=instruction)

    def to_json_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "id": self.id,
            "dataset": self.dataset,
            "instruction": self.instruction,
        }
        if self.context is not None:
            out["context"] = self.context
        out["response"] = self.response
        return out

    @classmethod
    def from_json_dict(cls, data: dict[str, Any]) -> "InstructionSample":
        return cls(
            id=data["id"],
            dataset=data["dataset"],
            instruction=data["instruction"],
            context=data.get("context"),
            response=data["response"],
        )


@dataclass(frozen=True)
class PerturbedSample:
    """A sample after (possibly no-op) perturbation, with its audit trail.

    `strategy` is the wire name of the applied strategy, or None for samples
    kept unaltered; None implies the instruction equals `original_instruction`.
    """

    sample: InstructionSample
    strategy: Optional[str]
    original_instruction: str
    edits: tuple[Edit, ...]

    def to_json_dict(self) -> dict[str, Any]:
        out = self.sample.to_json_dict()
        out["perturbation"] = {
            "strategy": self.strategy,
            "original_instruction": self.original_instruction,
            "edits": [e.to_json_dict() for e in self.edits],
        }
        return out

    @classmethod
    def from_json_dict(cls, data: dict[str, Any]) -> "PerturbedSample":
        pert = data["perturbation"]
        sample_fields = {k: v for k, v in data.items() if k != "perturbation"}
        return cls(
            sample=InstructionSample.from_json_dict(sample_fields),
            strategy=pert["strategy"],
            original_instruction=pert["original_instruction"],
            edits=tuple(Edit.from_json_dict(e) for e in pert["edits"]),
        )


def dump_json_line(record: dict[str, Any]) -> str:
    """Deterministic single-line JSON (sorted keys, no padding, raw UTF-8)."""
    return json.dumps(record, ensure_ascii=False, sort_keys=True, separators=(",", ":"))

"""Parsers that unify three instruction-tuning datasets into one corpus.

Source formats:

* Alpaca-style: one JSON array of ``{"instruction", "input", "output"}``
  objects. An empty "input" becomes a missing context.
* Dolly-style: JSONL, one ``{"instruction", "context", "response",
  "category"}`` object per line; blank lines are skipped.
* Super-Natural-style: a directory of task files (or one file), each a JSON
  object with a "Definition" (string or list of strings; the first is the
  instruction) and "Instances" of ``{"input", "output"}`` where output may
  be a list (the first entry is the response).

All inputs must be valid UTF-8; undecodable bytes raise MalformedRecord
rather than being silently replaced. Ids are "<dataset>:<six-digit
ordinal>" unless the source record carries its own id (Super-Natural
instances do), in which case the id is "<dataset>:<native id>".

The full published dumps yield 52,002 (alpaca) / 55,793 (supernatural) /
15,011 (dolly) samples, 122,806 in total. The supernatural figure depends
on how instances were subsampled from the benchmark, which is not public;
`parse_supernatural` therefore takes an optional per-task instance cap and
seed, and callers can assert expected totals downstream.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

from .rng import derive_stream
from .samples import InstructionSample, dump_json_line

_ORDINAL_WIDTH = 6


class MalformedRecord(Exception):
    """An input record violates its format; message names file and position."""


class DuplicateId(Exception):
    """Two samples in one corpus share an id."""


@dataclass(frozen=True)
class CorpusManifest:
    counts: dict[str, int]
    total: int
    sources: dict[str, str] = field(default_factory=dict)  # label -> sha256

    def __post_init__(self):
        if self.total != sum(self.counts.values()):
            raise ValueError(
                f"manifest total {self.total} != sum of counts {sum(self.counts.values())}"
            )

    def to_json_dict(self) -> dict:
        return {"counts": dict(sorted(self.counts.items())), "total": self.total,
                "sources": dict(sorted(self.sources.items()))}

    @classmethod
    def from_json_dict(cls, obj: dict) -> "CorpusManifest":
        return cls(counts=dict(obj["counts"]), total=int(obj["total"]),
                   sources=dict(obj.get("sources", {})))


def _read_utf8(path: Union[str, Path], *, label: str) -> str:
    data = Path(path).read_bytes()
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise MalformedRecord(f"{label}: not valid UTF-8 at byte {exc.start}") from exc


def _require_str(obj: dict, key: str, *, where: str) -> str:
    value = obj.get(key)
    if not isinstance(value, str):
        raise MalformedRecord(f"{where}: field {key!r} missing or not a string")
    return value


def _build_sample(dataset: str, ordinal_or_id: Union[int, str], instruction: str,
                  context: Optional[str], response: str, *, where: str) -> InstructionSample:
    if not instruction.strip():
        raise MalformedRecord(f"{where}: instruction is empty")
    if isinstance(ordinal_or_id, int):
        sid = f"{dataset}:{ordinal_or_id:0{_ORDINAL_WIDTH}d}"
    else:
        sid = f"{dataset}:{ordinal_or_id}"
    return InstructionSample(id=sid, dataset=dataset, instruction=instruction,
                             context=context if context else None, response=response)


def parse_alpaca(path: Union[str, Path]) -> list[InstructionSample]:
    """Parse an Alpaca-style JSON array into samples tagged gpt4-alpaca."""
    label = str(path)
    text = _read_utf8(path, label=label)
    try:
        records = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedRecord(f"{label}: invalid JSON: {exc}") from exc
    if not isinstance(records, list):
        raise MalformedRecord(f"{label}: expected a JSON array at top level")
    samples = []
    for i, rec in enumerate(records):
        where = f"{label}[{i}]"
        if not isinstance(rec, dict):
            raise MalformedRecord(f"{where}: expected an object")
        samples.append(_build_sample(
            "gpt4-alpaca", i,
            _require_str(rec, "instruction", where=where),
            _require_str(rec, "input", where=where),
            _require_str(rec, "output", where=where),
            where=where,
        ))
    return samples


def parse_dolly(path: Union[str, Path]) -> list[InstructionSample]:
    """Parse Dolly-style JSONL into samples tagged dolly."""
    label = str(path)
    samples = []
    ordinal = 0
    for lineno, line in enumerate(_read_utf8(path, label=label).splitlines(), start=1):
        if not line.strip():
            continue
        where = f"{label}:{lineno}"
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedRecord(f"{where}: invalid JSON: {exc}") from exc
        if not isinstance(rec, dict):
            raise MalformedRecord(f"{where}: expected an object")
        samples.append(_build_sample(
            "dolly", ordinal,
            _require_str(rec, "instruction", where=where),
            _require_str(rec, "context", where=where) if "context" in rec else None,
            _require_str(rec, "response", where=where),
            where=where,
        ))
        ordinal += 1
    return samples


def _task_files(path: Union[str, Path]) -> list[Path]:
    p = Path(path)
    if p.is_dir():
        files = sorted(q for q in p.iterdir() if q.suffix == ".json" and q.is_file())
        if not files:
            raise MalformedRecord(f"{p}: directory contains no .json task files")
        return files
    return [p]


def parse_supernatural(
    path: Union[str, Path],
    per_task_cap: Optional[int] = None,
    seed: int = 0,
) -> list[InstructionSample]:
    """Parse Super-Natural-style task files into samples tagged supernatural.

    Every instance of every task becomes one sample whose instruction is the
    task definition. With `per_task_cap`, tasks holding more instances than
    the cap contribute a seeded uniform subsample (original order kept), so
    the same (dump, cap, seed) always yields the same corpus.
    """
    if per_task_cap is not None and per_task_cap < 1:
        raise ValueError("per_task_cap must be >= 1 when given")
    samples = []
    ordinal = 0
    for task_file in _task_files(path):
        label = str(task_file)
        try:
            task = json.loads(_read_utf8(task_file, label=label))
        except json.JSONDecodeError as exc:
            raise MalformedRecord(f"{label}: invalid JSON: {exc}") from exc
        if not isinstance(task, dict):
            raise MalformedRecord(f"{label}: expected a task object")
        definition = task.get("Definition")
        if isinstance(definition, list) and definition and isinstance(definition[0], str):
            instruction = definition[0]
        elif isinstance(definition, str):
            instruction = definition
        else:
            raise MalformedRecord(f"{label}: 'Definition' missing or not a string/list")
        instances = task.get("Instances")
        if not isinstance(instances, list):
            raise MalformedRecord(f"{label}: 'Instances' missing or not a list")
        picked = range(len(instances))
        if per_task_cap is not None and len(instances) > per_task_cap:
            rng = derive_stream(seed, "supernatural-sample", task_file.stem)
            picked = sorted(rng.sample_indices(len(instances), per_task_cap))
        for idx in picked:
            inst = instances[idx]
            where = f"{label}#instances[{idx}]"
            if not isinstance(inst, dict):
                raise MalformedRecord(f"{where}: expected an object")
            output = inst.get("output")
            if isinstance(output, list) and output and isinstance(output[0], str):
                response = output[0]
            elif isinstance(output, str):
                response = output
            else:
                raise MalformedRecord(f"{where}: 'output' missing or not a string/list")
            native = inst.get("id")
            key: Union[int, str] = native if isinstance(native, str) and native else ordinal
            samples.append(_build_sample(
                "supernatural", key, instruction,
                _require_str(inst, "input", where=where) if "input" in inst else None,
                response, where=where,
            ))
            ordinal += 1
    return samples


def combine(
    datasets: Sequence[Sequence[InstructionSample]],
    sources: Optional[dict[str, str]] = None,
) -> tuple[list[InstructionSample], CorpusManifest]:
    """Concatenate parsed datasets, enforcing globally unique ids."""
    if not datasets:
        raise ValueError("combine needs at least one dataset")
    corpus: list[InstructionSample] = []
    seen: set[str] = set()
    counts: dict[str, int] = {}
    for dataset in datasets:
        for sample in dataset:
            if sample.id in seen:
                raise DuplicateId(f"duplicate sample id {sample.id!r}")
            seen.add(sample.id)
            counts[sample.dataset] = counts.get(sample.dataset, 0) + 1
            corpus.append(sample)
    manifest = CorpusManifest(counts=counts, total=len(corpus),
                              sources=dict(sources or {}))
    return corpus, manifest


def file_sha256(path: Union[str, Path]) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def source_checksum(path: Union[str, Path]) -> str:
    """Checksum of one input: file hash, or for a directory, the hash of its
    sorted (name, file hash) pairs."""
    p = Path(path)
    if p.is_dir():
        h = hashlib.sha256()
        for q in sorted(x for x in p.iterdir() if x.is_file()):
            h.update(q.name.encode("utf-8") + b"\x1f" + file_sha256(q).encode() + b"\n")
        return h.hexdigest()
    return file_sha256(p)


def write_corpus(samples: Iterable[InstructionSample], path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for sample in samples:
            fh.write(dump_json_line(sample.to_json_dict()) + "\n")


def read_corpus(path: Union[str, Path]) -> list[InstructionSample]:
    label = str(path)
    samples = []
    for lineno, line in enumerate(_read_utf8(path, label=label).splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            samples.append(InstructionSample.from_json_dict(obj))
        except (json.JSONDecodeError, ValueError, KeyError, TypeError) as exc:
            raise MalformedRecord(f"{label}:{lineno}: {exc}") from exc
    return samples

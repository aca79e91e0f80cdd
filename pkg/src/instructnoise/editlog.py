"""Auditable edit records and their replay.

Every strategy returns, next to the perturbed words, a log of atomic edits.
Replaying the log on the original word list must reproduce the perturbed
word list exactly; `mixture.verify` and the validate command rely on that.

All positions are indices into the ORIGINAL word list:

* ``delete``  - `position` is the removed word's index.
* ``move``    - the word at `position` ends up at output index `target`;
  the moves in one log form a permutation of the displaced slots and are
  applied simultaneously.
* ``replace`` / ``typo`` - the word at `position` becomes `after`.
* ``insert``  - `after` is inserted before the original word at index
  `position` (a gap index in 1..n-1; at most one insert per gap).

A log produced by one strategy contains a single kind. Replay nevertheless
accepts mixed logs and applies kinds in the fixed order replace/typo,
move, then delete and insert in one merge pass.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterable, Optional, Sequence


@dataclass(frozen=True)
class Edit:
    kind: str  # delete | move | replace | insert | typo
    position: int
    before: Optional[str] = None
    after: Optional[str] = None
    target: Optional[int] = None  # move only

    def to_json_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind, "position": self.position}
        if self.before is not None:
            out["before"] = self.before
        if self.after is not None:
            out["after"] = self.after
        if self.target is not None:
            out["target"] = self.target
        return out

    @classmethod
    def from_json_dict(cls, data: dict[str, Any]) -> "Edit":
        return cls(
            kind=data["kind"],
            position=data["position"],
            before=data.get("before"),
            after=data.get("after"),
            target=data.get("target"),
        )


def replay(words: Sequence[str], edits: Iterable[Edit]) -> list[str]:
    """Apply an edit log to the original words, reproducing the perturbed list."""
    n = len(words)
    out = list(words)
    deletions: set[int] = set()
    insertions: dict[int, str] = {}
    moves: list[Edit] = []

    for e in edits:
        limit = n if e.kind == "insert" else n - 1
        if not 0 <= e.position <= limit:
            raise ValueError(f"{e.kind} position {e.position} out of range for "
                             f"{n} words")
        if e.kind in ("replace", "typo"):
            out[e.position] = e.after if e.after is not None else out[e.position]
        elif e.kind == "move":
            moves.append(e)
        elif e.kind == "delete":
            deletions.add(e.position)
        elif e.kind == "insert":
            if e.position in insertions:
                raise ValueError(f"duplicate insert at gap {e.position}")
            insertions[e.position] = e.after or ""
        else:
            raise ValueError(f"unknown edit kind: {e.kind}")

    if moves:
        source = list(out)
        for e in moves:
            if e.target is None or not 0 <= e.target < n:
                raise ValueError(f"move target {e.target} out of range for {n} words")
            out[e.target] = source[e.position]

    result: list[str] = []
    for i in range(n + 1):
        if i in insertions:
            result.append(insertions[i])
        if i < n and i not in deletions:
            result.append(out[i])
    return result

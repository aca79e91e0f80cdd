"""Descriptive statistics over a built mixture file.

Reports per-strategy sample counts, word-count deltas against the original
instructions, an edit-distance histogram for misspelled words, the achieved
perturbation proportion, and a content checksum usable as a determinism
fingerprint. Never mutates anything.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Optional, Sequence

from .samples import PerturbedSample
from .textseg import tokenize


def edit_distance(a: str, b: str) -> int:
    """Character edit distance where an adjacent transposition is ONE edit.

    Standard dynamic program over insert/delete/substitute, extended with
    the adjacent-swap case, so "from" -> "form" scores 1 (as does each of
    the four misspelling edits).
    """
    la, lb = len(a), len(b)
    if la == 0 or lb == 0:
        return la or lb
    prev2: list[int] = []
    prev = list(range(lb + 1))
    for i in range(1, la + 1):
        cur = [i] + [0] * lb
        for j in range(1, lb + 1):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost)
            if (i > 1 and j > 1 and a[i - 1] == b[j - 2]
                    and a[i - 2] == b[j - 1]):
                cur[j] = min(cur[j], prev2[j - 2] + 1)
        prev2, prev = prev, cur
    return prev[lb]


@dataclass(frozen=True)
class StrategyStats:
    count: int
    delta_mean: float
    delta_min: int
    delta_max: int

    def to_json_dict(self) -> dict[str, Any]:
        return {"count": self.count, "delta_mean": round(self.delta_mean, 4),
                "delta_min": self.delta_min, "delta_max": self.delta_max}


@dataclass(frozen=True)
class StatsReport:
    total: int
    kept: int
    per_strategy: dict[str, StrategyStats]
    typo_distance_histogram: dict[int, int]
    proportion_achieved: float
    checksum: str

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "total": self.total,
            "kept": self.kept,
            "per_strategy": {k: v.to_json_dict()
                             for k, v in sorted(self.per_strategy.items())},
            "typo_distance_histogram": {str(k): v for k, v in
                                        sorted(self.typo_distance_histogram.items())},
            "proportion_achieved": round(self.proportion_achieved, 6),
            "checksum": self.checksum,
        }

    def render_text(self) -> str:
        lines = [
            f"samples:    {self.total} ({self.kept} kept, "
            f"{self.total - self.kept} perturbed)",
            f"proportion: {self.proportion_achieved:.4f}",
            f"checksum:   {self.checksum}",
            "strategy                word-count delta (mean/min/max)   count",
        ]
        for tag, st in sorted(self.per_strategy.items()):
            lines.append(f"  {tag:<22}{st.delta_mean:>8.2f} {st.delta_min:>5d} "
                         f"{st.delta_max:>5d}      {st.count:>8d}")
        if self.typo_distance_histogram:
            hist = ", ".join(f"{d}: {c}" for d, c in
                             sorted(self.typo_distance_histogram.items()))
            lines.append(f"typo edit distances: {hist}")
        return "\n".join(lines)


def compute_stats(rows: Sequence[PerturbedSample],
                  checksum: Optional[str] = None) -> StatsReport:
    total = len(rows)
    kept = 0
    deltas: dict[str, list[int]] = {}
    histogram: dict[int, int] = {}
    for row in rows:
        if row.strategy is None:
            kept += 1
            continue
        delta = (len(tokenize(row.sample.instruction).words)
                 - len(tokenize(row.original_instruction).words))
        deltas.setdefault(row.strategy, []).append(delta)
        if row.strategy == "add_misspelling":
            for edit in row.edits:
                if edit.kind == "typo":
                    d = edit_distance(edit.before or "", edit.after or "")
                    histogram[d] = histogram.get(d, 0) + 1
    per_strategy = {
        tag: StrategyStats(count=len(ds), delta_mean=sum(ds) / len(ds),
                           delta_min=min(ds), delta_max=max(ds))
        for tag, ds in deltas.items()
    }
    return StatsReport(
        total=total,
        kept=kept,
        per_strategy=per_strategy,
        typo_distance_histogram=histogram,
        proportion_achieved=0.0 if total == 0 else (total - kept) / total,
        checksum=checksum or "",
    )

"""Assemble perturbation mixtures: plan, execute, and verify.

A mixture takes a corpus and a spec (proportion to perturb, per-word ratio,
seed, enabled strategies) and perturbs round-half-up(proportion * N)
samples, chosen uniformly by the seeded PRNG, with strategies handed out
round-robin over a seeded shuffle of the chosen ids so per-strategy counts
never differ by more than one. Everything else is passed through untouched
with strategy None.

Per-sample randomness is derived from (seed, sample id, strategy tag), so
building with 1 worker or 64 yields byte-identical output; `build` may run
perturbation on a thread pool but always assembles results in a
deterministic order. On a predictor failure the whole build fails (no
partial mixture is ever returned); the completed work travels on the raised
BuildError so callers can persist it for resumption.

Evaluation sets run the same planner over bare instruction lines, keeping
output row i aligned with input line i.
"""

from __future__ import annotations

from concurrent.futures import FIRST_EXCEPTION, ThreadPoolExecutor, wait
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional, Sequence

from .editlog import replay
from .perturb import (
    ALL_STRATEGIES,
    PerturbationStrategy,
    PerturbConfig,
    apply,
    apply_to_tokens,
    round_half_up,
)
from .predictor import Predictor
from .rng import derive_stream
from .samples import InstructionSample, PerturbedSample
from .textseg import StopWordList, tokenize

_PLAN_TAG = "mixture-plan"
_ORDER_TAG = "mixture-order"
_EVAL_ID_WIDTH = 6


@dataclass(frozen=True)
class MixtureSpec:
    proportion: float
    ratio: float = 0.25
    seed: int = 0
    strategies: tuple[PerturbationStrategy, ...] = ALL_STRATEGIES
    shuffle_output_order: bool = False

    def __post_init__(self):
        if not 0.0 <= self.proportion <= 1.0:
            raise ValueError(f"proportion must be in [0, 1], got {self.proportion}")
        if not 0.0 < self.ratio <= 1.0:
            raise ValueError(f"ratio must be in (0, 1], got {self.ratio}")
        if self.proportion > 0 and not self.strategies:
            raise ValueError("at least one strategy is required when proportion > 0")
        if len(set(self.strategies)) != len(self.strategies):
            raise ValueError("strategies must not repeat")

    def needs_predictor(self) -> bool:
        if self.proportion == 0:
            return False
        return (PerturbationStrategy.REPLACE_WORDS in self.strategies
                or PerturbationStrategy.INSERT_WORDS in self.strategies)

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "proportion": self.proportion,
            "ratio": self.ratio,
            "seed": self.seed,
            "strategies": [s.value for s in self.strategies],
            "shuffle_output_order": self.shuffle_output_order,
        }

    @classmethod
    def from_json_dict(cls, obj: Mapping[str, Any]) -> "MixtureSpec":
        return cls(
            proportion=float(obj["proportion"]),
            ratio=float(obj.get("ratio", 0.25)),
            seed=int(obj.get("seed", 0)),
            strategies=tuple(PerturbationStrategy.from_tag(t)
                             for t in obj.get("strategies",
                                              [s.value for s in ALL_STRATEGIES])),
            shuffle_output_order=bool(obj.get("shuffle_output_order", False)),
        )


@dataclass(frozen=True)
class MixturePlan:
    """Which samples get which strategy; None means keep unaltered."""

    assignment: dict[str, Optional[PerturbationStrategy]]
    counts: dict[str, int]
    kept: int

    @property
    def perturbed(self) -> int:
        return sum(self.counts.values())


class BuildError(Exception):
    """A sample could not be perturbed; carries finished work for resumption."""

    def __init__(self, sample_id: str, cause: Exception,
                 completed: dict[str, PerturbedSample]):
        super().__init__(f"perturbing sample {sample_id!r} failed: {cause}")
        self.sample_id = sample_id
        self.cause = cause
        self.completed = completed


def plan(corpus_ids: Sequence[str], spec: MixtureSpec) -> MixturePlan:
    """Deterministically decide which ids to perturb and with what."""
    ids = list(corpus_ids)
    n = len(ids)
    if len(set(ids)) != n:
        raise ValueError("corpus ids must be unique")
    k = round_half_up(spec.proportion * n)
    assignment: dict[str, Optional[PerturbationStrategy]] = {i: None for i in ids}
    counts = {s.value: 0 for s in spec.strategies}
    if k > 0:
        chooser = derive_stream(spec.seed, _PLAN_TAG, "select")
        selected = [ids[i] for i in sorted(chooser.sample_indices(n, k))]
        derive_stream(spec.seed, _PLAN_TAG, "assign").shuffle(selected)
        for j, sid in enumerate(selected):
            strategy = spec.strategies[j % len(spec.strategies)]
            assignment[sid] = strategy
            counts[strategy.value] += 1
    return MixturePlan(assignment=assignment, counts=counts, kept=n - k)


def _output_order(n: int, spec: MixtureSpec) -> list[int]:
    order = list(range(n))
    if spec.shuffle_output_order:
        derive_stream(spec.seed, _ORDER_TAG).shuffle(order)
    return order


def build(
    corpus: Sequence[InstructionSample],
    spec: MixtureSpec,
    predictor: Optional[Predictor] = None,
    *,
    workers: int = 1,
    completed: Optional[Mapping[str, PerturbedSample]] = None,
    stop_words: Optional[StopWordList] = None,
) -> list[PerturbedSample]:
    """Execute the plan for `corpus`; all-or-nothing.

    `completed` short-circuits samples already perturbed by an earlier,
    interrupted run (keyed by id); they are trusted as-is. On failure the
    raised BuildError carries every PerturbedSample finished so far.
    """
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if spec.needs_predictor() and predictor is None:
        raise ValueError("spec enables replace/insert but no predictor was given")
    the_plan = plan([s.id for s in corpus], spec)
    cfg = PerturbConfig(ratio=spec.ratio)
    done: dict[str, PerturbedSample] = {}
    reused = dict(completed or {})
    todo: list[tuple[InstructionSample, PerturbationStrategy]] = []
    for sample in corpus:
        strategy = the_plan.assignment[sample.id]
        if strategy is None:
            done[sample.id] = PerturbedSample(
                sample=sample, strategy=None,
                original_instruction=sample.instruction, edits=(),
            )
        elif sample.id in reused:
            done[sample.id] = reused[sample.id]
        else:
            todo.append((sample, strategy))

    def run_one(sample: InstructionSample,
                strategy: PerturbationStrategy) -> PerturbedSample:
        rng = derive_stream(spec.seed, sample.id, strategy.value)
        return apply(strategy, sample, cfg, rng, predictor, stop_words)

    if workers == 1 or len(todo) <= 1:
        for sample, strategy in todo:
            try:
                done[sample.id] = run_one(sample, strategy)
            except Exception as exc:
                raise BuildError(sample.id, exc, done) from exc
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {pool.submit(run_one, s, st): s.id for s, st in todo}
            wait(futures, return_when=FIRST_EXCEPTION)
            failure: Optional[tuple[str, Exception]] = None
            for fut, sid in futures.items():
                if fut.done() and not fut.cancelled():
                    exc = fut.exception()
                    if exc is None:
                        done[sid] = fut.result()
                    elif failure is None:
                        failure = (sid, exc)
                else:
                    fut.cancel()
            if failure is not None:
                raise BuildError(failure[0], failure[1], done) from failure[1]
    return [done[corpus[i].id] for i in _output_order(len(corpus), spec)]


@dataclass(frozen=True)
class EvalRow:
    """One evaluation instruction after (possibly no) perturbation."""

    index: int
    instruction: str
    original_instruction: str
    strategy: Optional[str]

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "index": self.index,
            "instruction": self.instruction,
            "original_instruction": self.original_instruction,
            "strategy": self.strategy,
        }

    @classmethod
    def from_json_dict(cls, obj: Mapping[str, Any]) -> "EvalRow":
        return cls(index=int(obj["index"]), instruction=obj["instruction"],
                   original_instruction=obj["original_instruction"],
                   strategy=obj["strategy"])


def perturb_eval_set(
    instructions: Sequence[str],
    spec: MixtureSpec,
    predictor: Optional[Predictor] = None,
    *,
    stop_words: Optional[StopWordList] = None,
) -> list[EvalRow]:
    """Perturb bare instruction lines; row i always corresponds to line i.

    Output order is positional regardless of spec.shuffle_output_order,
    since eval files must stay aligned with their source.
    """
    if not instructions:
        raise ValueError("no instructions to perturb")
    if spec.needs_predictor() and predictor is None:
        raise ValueError("spec enables replace/insert but no predictor was given")
    ids = [f"eval:{i:0{_EVAL_ID_WIDTH}d}" for i in range(len(instructions))]
    the_plan = plan(ids, spec)
    cfg = PerturbConfig(ratio=spec.ratio)
    rows = []
    for i, line in enumerate(instructions):
        strategy = the_plan.assignment[ids[i]]
        if strategy is None:
            rows.append(EvalRow(index=i, instruction=line,
                                original_instruction=line, strategy=None))
            continue
        rng = derive_stream(spec.seed, ids[i], strategy.value)
        out, _ = apply_to_tokens(strategy, tokenize(line), cfg, rng,
                                 predictor, stop_words)
        rows.append(EvalRow(index=i, instruction=out.raw,
                            original_instruction=line, strategy=strategy.value))
    return rows


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class VerifyReport:
    checks: tuple[CheckResult, ...]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "ok": self.ok,
            "checks": [
                {"name": c.name, "passed": c.passed, "detail": c.detail}
                for c in self.checks
            ],
        }


def verify(
    output: Sequence[PerturbedSample],
    spec: MixtureSpec,
    corpus: Optional[Sequence[InstructionSample]] = None,
) -> VerifyReport:
    """Re-derive the mixture invariants from the output itself.

    The scope check (context/response untouched) needs the original corpus;
    without one it is reported as passed with a "skipped" note.
    """
    checks: list[CheckResult] = []
    n = len(output)
    enabled = {s.value for s in spec.strategies}

    ids = [p.sample.id for p in output]
    dup = len(ids) - len(set(ids))
    checks.append(CheckResult("unique-ids", dup == 0,
                              "" if dup == 0 else f"{dup} duplicate ids"))

    perturbed = [p for p in output if p.strategy is not None]
    expected = round_half_up(spec.proportion * n)
    checks.append(CheckResult(
        "proportion", len(perturbed) == expected,
        f"perturbed {len(perturbed)} of {n}, expected {expected}"))

    stray = sorted({p.strategy for p in perturbed} - enabled)
    checks.append(CheckResult("strategy-tags", not stray,
                              "" if not stray else f"unexpected strategies: {stray}"))

    counts = {tag: 0 for tag in enabled}
    for p in perturbed:
        if p.strategy in counts:
            counts[p.strategy] += 1
    if perturbed and counts:
        spread = max(counts.values()) - min(counts.values())
        checks.append(CheckResult(
            "evenness", spread <= 1,
            f"per-strategy counts {dict(sorted(counts.items()))}, spread {spread}"))
    else:
        checks.append(CheckResult("evenness", True, "nothing perturbed"))

    bad_replay = []
    for p in output:
        if p.strategy is None:
            if p.sample.instruction != p.original_instruction or p.edits:
                bad_replay.append(p.sample.id)
            continue
        replayed = replay(tokenize(p.original_instruction).words, p.edits)
        if replayed != list(tokenize(p.sample.instruction).words):
            bad_replay.append(p.sample.id)
    checks.append(CheckResult(
        "edit-replay", not bad_replay,
        "" if not bad_replay else f"replay mismatch for: {bad_replay[:5]}"))

    if corpus is None:
        checks.append(CheckResult("scope", True, "skipped: corpus not provided"))
        checks.append(CheckResult("partition", True, "skipped: corpus not provided"))
    else:
        originals = {s.id: s for s in corpus}
        missing = sorted(set(originals) ^ set(ids))
        checks.append(CheckResult(
            "partition", not missing,
            "" if not missing else f"output/corpus id mismatch: {missing[:5]}"))
        touched = []
        for p in output:
            src = originals.get(p.sample.id)
            if src is None:
                continue
            if (p.sample.context != src.context or p.sample.response != src.response
                    or p.sample.dataset != src.dataset
                    or p.original_instruction != src.instruction):
                touched.append(p.sample.id)
        checks.append(CheckResult(
            "scope", not touched,
            "" if not touched else f"context/response/original modified: {touched[:5]}"))
    return VerifyReport(checks=tuple(checks))

"""The six instruction perturbation strategies.

Every strategy takes a tokenized instruction and returns a new token list
plus an edit log expressed in the coordinates of the input (see editlog).
A "word" is a whitespace-delimited token with punctuation attached, so
"shorter," is one word. None of the strategies ever touches context or
response fields; apply() copies those through untouched.

Sizing rules, with n = word count and ratio r (default 0.25):

* half_up(x) = floor(x + 0.5), so half_up(2.75) = 3 and half_up(0.5) = 1.
* select_positions picks k = min(max(1, half_up(r*n)), n) distinct
  positions, uniformly, returned sorted.
* shuffle raises that floor to 2 (one word cannot move) and resamples the
  slot permutation until it is not the identity; no-op when n < 2.
* delete caps k at n-1 so at least one word survives; no-op when n < 2.
* insert adds m = min(half_up(r*n), n-1) words, one per distinct gap
  between existing words (never before the first or after the last word);
  no-op when n < 2.
* replace and misspell keep the word count unchanged; misspell skips
  selected words with no alphabetic character and applies exactly one
  character edit (delete a letter / transpose adjacent letters / insert a
  vowel / substitute a letter) to each remaining one, always producing a
  changed, nonempty word.

Determinism: all randomness flows through the SplitMix64 stream handed in
by the caller, which derives it from (seed, sample id, strategy tag), so
results do not depend on processing order or worker count.
"""

from __future__ import annotations

import math
import string
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Optional

from .editlog import Edit
from .predictor import MASK_SENTINEL, MaskQuery, Predictor, PredictorUnavailable
from .rng import SplitMix64
from .samples import InstructionSample, PerturbedSample
from .textseg import (
    StopWordList,
    TokenizedInstruction,
    detokenize,
    is_stop_word,
    load_stop_words,
    tokenize,
)

_VOWELS = "aeiou"


class PerturbationStrategy(Enum):
    """Canonical order; round-robin assignment and reports follow it."""

    DELETE_STOP_WORDS = "delete_stop_words"
    SHUFFLE_WORDS = "shuffle_words"
    DELETE_WORDS = "delete_words"
    REPLACE_WORDS = "replace_words"
    INSERT_WORDS = "insert_words"
    ADD_MISSPELLING = "add_misspelling"

    @classmethod
    def from_tag(cls, tag: str) -> "PerturbationStrategy":
        try:
            return cls(tag)
        except ValueError:
            raise ValueError(f"unknown strategy {tag!r}; expected one of "
                             + ", ".join(s.value for s in cls)) from None


ALL_STRATEGIES: tuple[PerturbationStrategy, ...] = tuple(PerturbationStrategy)


class PredictionCountMismatch(Exception):
    """The predictor returned a different number of words than we masked."""


@dataclass(frozen=True)
class PerturbConfig:
    ratio: float = 0.25

    def __post_init__(self):
        if not 0.0 < self.ratio <= 1.0:
            raise ValueError(f"ratio must be in (0, 1], got {self.ratio}")


def round_half_up(x: float) -> int:
    """Round with ties going up: 2.5 -> 3, unlike banker's rounding."""
    return int(math.floor(x + 0.5))


def selection_count(n: int, ratio: float) -> int:
    if n == 0:
        return 0
    return min(max(1, round_half_up(ratio * n)), n)


def select_positions(n: int, ratio: float, rng: SplitMix64) -> list[int]:
    """Sorted sample of min(max(1, half_up(ratio*n)), n) distinct positions."""
    return sorted(rng.sample_indices(n, selection_count(n, ratio)))


def _as_tok(words: list[str]) -> TokenizedInstruction:
    return TokenizedInstruction(words=tuple(words), raw=detokenize(words))


def _unchanged(tok: TokenizedInstruction) -> tuple[TokenizedInstruction, list[Edit]]:
    return _as_tok(list(tok.words)), []


def delete_stop_words(
    tok: TokenizedInstruction, stop_words: StopWordList
) -> tuple[TokenizedInstruction, list[Edit]]:
    """Drop every stop word (matched case-insensitively, punctuation stripped)."""
    kept: list[str] = []
    edits: list[Edit] = []
    for i, word in enumerate(tok.words):
        if is_stop_word(word, stop_words):
            edits.append(Edit(kind="delete", position=i, before=word))
        else:
            kept.append(word)
    return _as_tok(kept), edits


def shuffle_words(
    tok: TokenizedInstruction, cfg: PerturbConfig, rng: SplitMix64
) -> tuple[TokenizedInstruction, list[Edit]]:
    """Permute ~ratio of the words among their own slots; the rest stay put."""
    words = list(tok.words)
    n = len(words)
    if n < 2:
        return _unchanged(tok)
    k = min(max(2, selection_count(n, cfg.ratio)), n)
    positions = sorted(rng.sample_indices(n, k))
    perm = list(range(k))
    while True:
        rng.shuffle(perm)
        if any(src != slot for slot, src in enumerate(perm)):
            break
    out = list(words)
    edits: list[Edit] = []
    for slot, src in enumerate(perm):
        frm, to = positions[src], positions[slot]
        if frm != to:
            out[to] = words[frm]
            edits.append(Edit(kind="move", position=frm, before=words[frm],
                              after=words[frm], target=to))
    return _as_tok(out), edits


def delete_words(
    tok: TokenizedInstruction, cfg: PerturbConfig, rng: SplitMix64
) -> tuple[TokenizedInstruction, list[Edit]]:
    """Delete ~ratio of the words at random, always leaving at least one."""
    words = list(tok.words)
    n = len(words)
    if n < 2:
        return _unchanged(tok)
    k = min(selection_count(n, cfg.ratio), n - 1)
    positions = set(rng.sample_indices(n, k))
    edits = [Edit(kind="delete", position=i, before=words[i]) for i in sorted(positions)]
    kept = [w for i, w in enumerate(words) if i not in positions]
    return _as_tok(kept), edits


def _reject_sentinel_words(words: list[str]) -> None:
    # The wire protocol counts literal sentinels, so an instruction that
    # already contains one would make our masks indistinguishable from it.
    if any(MASK_SENTINEL in w for w in words):
        raise ValueError(
            f"instruction already contains the mask sentinel {MASK_SENTINEL!r}; "
            "replace/insert cannot be applied to it")


def replace_words(
    tok: TokenizedInstruction,
    cfg: PerturbConfig,
    predictor: Predictor,
    rng: SplitMix64,
) -> tuple[TokenizedInstruction, list[Edit]]:
    """Mask ~ratio of the words and splice in the predictor's fills."""
    words = list(tok.words)
    n = len(words)
    if n == 0:
        return _unchanged(tok)
    _reject_sentinel_words(words)
    positions = select_positions(n, cfg.ratio, rng)
    masked = list(words)
    for i in positions:
        masked[i] = MASK_SENTINEL
    answer = predictor.predict(MaskQuery(text=detokenize(masked), mask_count=len(positions)))
    if len(answer.words) != len(positions):
        raise PredictionCountMismatch(
            f"masked {len(positions)} words, predictor filled {len(answer.words)}"
        )
    out = list(words)
    edits: list[Edit] = []
    for i, fill in zip(positions, answer.words):
        out[i] = fill
        edits.append(Edit(kind="replace", position=i, before=words[i], after=fill))
    return _as_tok(out), edits


def insert_words(
    tok: TokenizedInstruction,
    cfg: PerturbConfig,
    predictor: Predictor,
    rng: SplitMix64,
) -> tuple[TokenizedInstruction, list[Edit]]:
    """Insert ~ratio*n predicted words into distinct gaps between words."""
    words = list(tok.words)
    n = len(words)
    if n < 2:
        return _unchanged(tok)
    m = min(round_half_up(cfg.ratio * n), n - 1)
    if m < 1:
        return _unchanged(tok)
    _reject_sentinel_words(words)
    # Gap g means "before original word g"; interior gaps are 1..n-1.
    gaps = sorted(g + 1 for g in rng.sample_indices(n - 1, m))
    gap_set = set(gaps)
    masked: list[str] = []
    for i, word in enumerate(words):
        if i in gap_set:
            masked.append(MASK_SENTINEL)
        masked.append(word)
    answer = predictor.predict(MaskQuery(text=detokenize(masked), mask_count=m))
    if len(answer.words) != m:
        raise PredictionCountMismatch(
            f"opened {m} gaps, predictor filled {len(answer.words)}"
        )
    fills = dict(zip(gaps, answer.words))
    out: list[str] = []
    edits: list[Edit] = []
    for i, word in enumerate(words):
        if i in fills:
            out.append(fills[i])
            edits.append(Edit(kind="insert", position=i, after=fills[i]))
        out.append(word)
    return _as_tok(out), edits


def misspell_word(word: str, rng: SplitMix64) -> str:
    """One character-level slip: drop/transpose/insert/substitute a letter.

    The input must contain at least one alphabetic character. The result is
    guaranteed nonempty, whitespace-free, and different from the input.
    """
    chars = list(word)
    letters = [i for i, c in enumerate(chars) if c.isalpha()]
    if not letters:
        raise ValueError(f"cannot misspell {word!r}: no alphabetic characters")
    swappable = [
        i
        for i in range(len(chars) - 1)
        if chars[i].isalpha() and chars[i + 1].isalpha() and chars[i] != chars[i + 1]
    ]
    ops = []
    if len(chars) >= 2:
        ops.append("delete")
    if swappable:
        ops.append("transpose")
    ops.append("insert")
    ops.append("substitute")
    op = rng.choice(ops)
    if op == "delete":
        del chars[rng.choice(letters)]
    elif op == "transpose":
        i = rng.choice(swappable)
        chars[i], chars[i + 1] = chars[i + 1], chars[i]
    elif op == "insert":
        # Insert a vowel adjacent to a letter so it lands inside the word,
        # not beyond trailing punctuation.
        slots = [
            j
            for j in range(len(chars) + 1)
            if (j < len(chars) and chars[j].isalpha())
            or (j > 0 and chars[j - 1].isalpha())
        ]
        chars.insert(rng.choice(slots), rng.choice(_VOWELS))
    else:
        i = rng.choice(letters)
        original = chars[i]
        pool = [c for c in string.ascii_lowercase if c != original.lower()]
        picked = rng.choice(pool)
        chars[i] = picked.upper() if original.isupper() else picked
    return "".join(chars)


def add_misspelling(
    tok: TokenizedInstruction, cfg: PerturbConfig, rng: SplitMix64
) -> tuple[TokenizedInstruction, list[Edit]]:
    """Misspell ~ratio of the words; selected all-punctuation words are skipped."""
    words = list(tok.words)
    n = len(words)
    if n == 0:
        return _unchanged(tok)
    out = list(words)
    edits: list[Edit] = []
    for i in select_positions(n, cfg.ratio, rng):
        if not any(c.isalpha() for c in words[i]):
            continue
        out[i] = misspell_word(words[i], rng)
        edits.append(Edit(kind="typo", position=i, before=words[i], after=out[i]))
    return _as_tok(out), edits


@lru_cache(maxsize=1)
def _default_stop_words() -> StopWordList:
    return load_stop_words()


def apply_to_tokens(
    strategy: PerturbationStrategy,
    tok: TokenizedInstruction,
    cfg: PerturbConfig,
    rng: SplitMix64,
    predictor: Optional[Predictor] = None,
    stop_words: Optional[StopWordList] = None,
) -> tuple[TokenizedInstruction, list[Edit]]:
    """Run one strategy over a token list; the word-level entry point."""
    if strategy is PerturbationStrategy.DELETE_STOP_WORDS:
        return delete_stop_words(tok, stop_words if stop_words is not None else _default_stop_words())
    if strategy is PerturbationStrategy.SHUFFLE_WORDS:
        return shuffle_words(tok, cfg, rng)
    if strategy is PerturbationStrategy.DELETE_WORDS:
        return delete_words(tok, cfg, rng)
    if strategy is PerturbationStrategy.REPLACE_WORDS:
        if predictor is None:
            raise PredictorUnavailable("replace_words needs a predictor")
        return replace_words(tok, cfg, predictor, rng)
    if strategy is PerturbationStrategy.INSERT_WORDS:
        if predictor is None:
            raise PredictorUnavailable("insert_words needs a predictor")
        return insert_words(tok, cfg, predictor, rng)
    if strategy is PerturbationStrategy.ADD_MISSPELLING:
        return add_misspelling(tok, cfg, rng)
    raise ValueError(f"unhandled strategy {strategy!r}")


def apply(
    strategy: PerturbationStrategy,
    sample: InstructionSample,
    cfg: PerturbConfig,
    rng: SplitMix64,
    predictor: Optional[Predictor] = None,
    stop_words: Optional[StopWordList] = None,
) -> PerturbedSample:
    """Perturb one sample's instruction; context and response pass through."""
    tok = tokenize(sample.instruction)
    out, edits = apply_to_tokens(strategy, tok, cfg, rng, predictor, stop_words)
    return PerturbedSample(
        sample=sample.with_instruction(out.raw),
        strategy=strategy.value,
        original_instruction=sample.instruction,
        edits=tuple(edits),
    )

"""Word-level segmentation and the stop-word predicate.

A "word" is a maximal run of non-whitespace characters, so attached
punctuation travels with the word ("shorter," is one word). Every
perturbation ratio in this package counts words in this sense.

The shipped stop-word list is the classic 127-entry English list used by
mainstream NLP toolkits. Its SHA-256 is pinned below and republished in the
README; `load_stop_words` refuses a file that does not match unless told
otherwise, so two installations always agree on which words are "stop".
"""

from __future__ import annotations

import hashlib
import string
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Sequence, Union

STOPWORDS_RESOURCE = "stopwords.txt"
STOPWORDS_SHA256 = "b3f772a000465cb76e23adb03b47073c591c156fad8f7af09c8b8e80d6bd8eac"

_PUNCT = string.punctuation


@dataclass(frozen=True)
class TokenizedInstruction:
    """An instruction split into words, keeping the original string."""

    words: tuple[str, ...]
    raw: str

    def __len__(self) -> int:
        return len(self.words)


@dataclass(frozen=True)
class StopWordList:
    entries: frozenset[str]
    checksum: str = field(default="")

    def __post_init__(self):
        if not self.entries:
            raise ValueError("stop-word list must be nonempty")
        for w in self.entries:
            if not w or w != w.lower() or any(c.isspace() for c in w):
                raise ValueError(f"invalid stop-word entry: {w!r}")

    def __contains__(self, word: str) -> bool:
        return is_stop_word(word, self)


def tokenize(raw: str) -> TokenizedInstruction:
    """Split into maximal non-whitespace runs; empty input gives no words."""
    return TokenizedInstruction(words=tuple(raw.split()), raw=raw)


def detokenize(tok: Union[TokenizedInstruction, Sequence[str]]) -> str:
    """Join words with single spaces."""
    words = tok.words if isinstance(tok, TokenizedInstruction) else tok
    return " ".join(words)


def strip_punctuation(word: str) -> str:
    """Drop leading and trailing ASCII punctuation ("the," -> "the")."""
    return word.strip(_PUNCT)


def is_stop_word(word: str, stop_words: StopWordList) -> bool:
    """True iff the word, lowercased and stripped of edge punctuation, is listed."""
    return strip_punctuation(word).lower() in stop_words.entries


def _build_list(text: bytes) -> StopWordList:
    entries = frozenset(text.decode("utf-8").split())
    return StopWordList(entries=entries, checksum=hashlib.sha256(text).hexdigest())


def load_stop_words(path: str | None = None, *, verify_checksum: bool = True) -> StopWordList:
    """Load the shipped list, or a custom one-word-per-line file from `path`.

    With `verify_checksum` (the default, shipped list only) the file content
    must hash to STOPWORDS_SHA256.
    """
    if path is None:
        text = resources.files("instructnoise.data").joinpath(STOPWORDS_RESOURCE).read_bytes()
        if verify_checksum and hashlib.sha256(text).hexdigest() != STOPWORDS_SHA256:
            raise ValueError("shipped stop-word list does not match its pinned checksum")
    else:
        with open(path, "rb") as fh:
            text = fh.read()
    return _build_list(text)


def stop_word_list_from(words: Iterable[str]) -> StopWordList:
    """Build a list from explicit entries (tests, experiments)."""
    entries = frozenset(w.lower() for w in words)
    material = ("\n".join(sorted(entries)) + "\n").encode("utf-8")
    return StopWordList(entries=entries, checksum=hashlib.sha256(material).hexdigest())

"""Masked-word prediction behind one small interface.

Strategies that need contextually plausible words (replace, insert) send a
single query per instruction containing every "[MASK]" sentinel and get one
word back per sentinel, in reading order.

Two backends:

* `RemotePredictor` talks to a fill-mask inference service.
  Wire protocol: HTTP POST {base_url}/fill-mask with body
  ``{"text": "<string containing [MASK]>"}``; the service answers 200 with
  ``{"words": ["w1", ...], "model": "<id>"}``. Any non-200 status,
  connection failure, or timeout raises PredictorUnavailable. A payload with
  the wrong schema, the wrong number of words, or words containing
  whitespace or the sentinel raises MalformedResponse; answers are never
  silently truncated or padded.

* `OfflinePredictor` needs no network and no model weights: mask i of a
  query is filled with ``table[sha256(seed \\x1f text \\x1f i) % 1000]``
  over a fixed 1,000-word table shipped with the package (SHA-256 pinned
  below). Same query + same seed always gives the same words.
"""

from __future__ import annotations

import hashlib
import threading
from dataclasses import dataclass
from importlib import resources
from typing import Optional, Protocol, Sequence

import requests

MASK_SENTINEL = "[MASK]"

FILL_TABLE_RESOURCE = "fill_words.txt"
FILL_TABLE_SHA256 = "1d71dd3c92bbe18b21a564ea717acc26ac989de0e9f0a7813837837c4e33c98b"


class PredictorUnavailable(Exception):
    """The backend cannot be reached or refused the request."""


class MalformedResponse(Exception):
    """The backend answered, but not with one clean word per mask."""


@dataclass(frozen=True)
class MaskQuery:
    text: str
    mask_count: int

    def __post_init__(self):
        if self.mask_count < 1:
            raise ValueError("a mask query needs at least one mask")
        found = self.text.count(MASK_SENTINEL)
        if found != self.mask_count:
            raise ValueError(
                f"mask_count={self.mask_count} but text contains {found} sentinels"
            )


@dataclass(frozen=True)
class MaskAnswer:
    words: tuple[str, ...]
    model: str = ""


@dataclass(frozen=True)
class HealthStatus:
    reachable: bool
    backend: str
    detail: str = ""  # model id when reachable, failure cause otherwise


class Predictor(Protocol):
    def predict(self, query: MaskQuery) -> MaskAnswer: ...

    def health_check(self) -> HealthStatus: ...


def _validate_words(words: Sequence[str], expected: int) -> tuple[str, ...]:
    if len(words) != expected:
        raise MalformedResponse(
            f"query had {expected} masks but {len(words)} words came back"
        )
    for w in words:
        if not isinstance(w, str) or not w or any(c.isspace() for c in w):
            raise MalformedResponse(f"unusable predicted word: {w!r}")
        if MASK_SENTINEL in w:
            raise MalformedResponse("predicted word contains the mask sentinel")
    return tuple(words)


def load_fill_table(path: Optional[str] = None) -> tuple[str, ...]:
    """Load the shipped 1,000-word table (or a custom one-per-line file)."""
    if path is None:
        text = resources.files("instructnoise.data").joinpath(FILL_TABLE_RESOURCE).read_bytes()
        if hashlib.sha256(text).hexdigest() != FILL_TABLE_SHA256:
            raise ValueError("shipped fill table does not match its pinned checksum")
    else:
        with open(path, "rb") as fh:
            text = fh.read()
    table = tuple(text.decode("utf-8").split())
    if not table:
        raise ValueError("fill table is empty")
    return table


class OfflinePredictor:
    """Deterministic, model-free fallback; pure function of (query text, seed)."""

    backend = "offline"

    def __init__(self, seed: int = 0, table: Optional[Sequence[str]] = None):
        self.seed = seed
        self._table = tuple(table) if table is not None else load_fill_table()

    def predict(self, query: MaskQuery) -> MaskAnswer:
        words = []
        for i in range(query.mask_count):
            material = f"{self.seed}\x1f{query.text}\x1f{i}".encode("utf-8")
            idx = int.from_bytes(hashlib.sha256(material).digest()[:8], "big")
            words.append(self._table[idx % len(self._table)])
        return MaskAnswer(words=_validate_words(words, query.mask_count), model="offline-fill-table-v1")

    def health_check(self) -> HealthStatus:
        return HealthStatus(reachable=True, backend=self.backend, detail="offline-fill-table-v1")


class RemotePredictor:
    """Client for a fill-mask HTTP service; bounds concurrent requests."""

    backend = "remote"

    def __init__(
        self,
        base_url: str,
        timeout: float = 30.0,
        max_in_flight: int = 4,
        session: Optional[requests.Session] = None,
    ):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self._slots = threading.Semaphore(max_in_flight)
        self._session = session if session is not None else requests.Session()

    def predict(self, query: MaskQuery) -> MaskAnswer:
        with self._slots:
            try:
                resp = self._session.post(
                    self.base_url + "/fill-mask",
                    json={"text": query.text},
                    timeout=self.timeout,
                )
            except requests.RequestException as exc:
                raise PredictorUnavailable(f"fill-mask request failed: {exc}") from exc
        if resp.status_code != 200:
            raise PredictorUnavailable(f"fill-mask returned HTTP {resp.status_code}")
        try:
            payload = resp.json()
        except ValueError as exc:
            raise MalformedResponse("fill-mask response is not JSON") from exc
        if not isinstance(payload, dict) or not isinstance(payload.get("words"), list):
            raise MalformedResponse("fill-mask response missing 'words' list")
        words = _validate_words(payload["words"], query.mask_count)
        return MaskAnswer(words=words, model=str(payload.get("model", "")))

    def health_check(self) -> HealthStatus:
        try:
            answer = self.predict(MaskQuery(text=MASK_SENTINEL, mask_count=1))
        except (PredictorUnavailable, MalformedResponse) as exc:
            return HealthStatus(reachable=False, backend=self.backend, detail=str(exc))
        return HealthStatus(reachable=True, backend=self.backend, detail=answer.model)

from __future__ import annotations

from pathlib import Path

import pytest

from stub_server import start_stub

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def stub_predictor_server():
    """A live fill-mask stub; yields (base_url, state) and tears down after."""
    server, state, url = start_stub()
    try:
        yield url, state
    finally:
        server.shutdown()
        server.server_close()


@pytest.fixture
def fixture_corpus():
    from instructnoise import combine, parse_alpaca, parse_dolly, parse_supernatural

    corpus, manifest = combine([
        parse_alpaca(FIXTURES / "alpaca.json"),
        parse_supernatural(FIXTURES / "supernatural"),
        parse_dolly(FIXTURES / "dolly.jsonl"),
    ])
    return corpus, manifest

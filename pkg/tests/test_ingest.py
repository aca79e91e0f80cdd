"""Dataset parsers, id stability, and corpus assembly."""

from __future__ import annotations

import json

import pytest

from instructnoise.ingest import (
    CorpusManifest,
    DuplicateId,
    MalformedRecord,
    combine,
    parse_alpaca,
    parse_dolly,
    parse_supernatural,
    read_corpus,
    source_checksum,
    write_corpus,
)
from instructnoise.textseg import detokenize, tokenize


class TestParseAlpaca:
    def test_fixture_counts_and_fields(self, fixtures_dir):
        samples = parse_alpaca(fixtures_dir / "alpaca.json")
        assert len(samples) == 8
        assert samples[0].id == "gpt4-alpaca:000000"
        assert samples[0].dataset == "gpt4-alpaca"
        assert samples[0].instruction.startswith("Rewrite the given paragraph")
        assert samples[0].context.startswith("Although it is generally accepted")

    def test_empty_input_becomes_no_context(self, fixtures_dir):
        samples = parse_alpaca(fixtures_dir / "alpaca.json")
        assert samples[1].context is None

    def test_missing_field_names_the_index(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text(json.dumps([
            {"instruction": "ok", "input": "", "output": "fine"},
            {"instruction": "broken", "input": ""},
        ]), encoding="utf-8")
        with pytest.raises(MalformedRecord, match=r"\[1\].*output"):
            parse_alpaca(p)

    def test_empty_array_is_empty_list(self, tmp_path):
        p = tmp_path / "empty.json"
        p.write_text("[]", encoding="utf-8")
        assert parse_alpaca(p) == []

    def test_blank_instruction_rejected(self, tmp_path):
        p = tmp_path / "blank.json"
        p.write_text(json.dumps([{"instruction": "  ", "input": "", "output": "x"}]),
                     encoding="utf-8")
        with pytest.raises(MalformedRecord, match="instruction is empty"):
            parse_alpaca(p)

    def test_top_level_object_rejected(self, tmp_path):
        p = tmp_path / "obj.json"
        p.write_text("{}", encoding="utf-8")
        with pytest.raises(MalformedRecord, match="array"):
            parse_alpaca(p)

    def test_invalid_utf8_rejected(self, tmp_path):
        p = tmp_path / "latin.json"
        p.write_bytes(b'[{"instruction": "caf\xe9", "input": "", "output": "x"}]')
        with pytest.raises(MalformedRecord, match="UTF-8"):
            parse_alpaca(p)

    def test_missing_file_is_io_error(self, tmp_path):
        with pytest.raises(OSError):
            parse_alpaca(tmp_path / "nope.json")


class TestParseDolly:
    def test_fixture_counts_and_fields(self, fixtures_dir):
        samples = parse_dolly(fixtures_dir / "dolly.jsonl")
        assert len(samples) == 6
        assert samples[0].id == "dolly:000000"
        assert samples[0].context.startswith("Virgin Australia commenced")
        assert samples[1].context is None  # empty string collapses

    def test_blank_lines_skipped(self, tmp_path):
        p = tmp_path / "d.jsonl"
        p.write_text('\n{"instruction": "a", "context": "", "response": "r"}\n\n',
                     encoding="utf-8")
        samples = parse_dolly(p)
        assert len(samples) == 1 and samples[0].id == "dolly:000000"

    def test_truncated_line_names_line_number(self, tmp_path):
        p = tmp_path / "d.jsonl"
        p.write_text('{"instruction": "a", "context": "", "response": "r"}\n'
                     '{"instruction": "b", "cont', encoding="utf-8")
        with pytest.raises(MalformedRecord, match=":2"):
            parse_dolly(p)


class TestParseSupernatural:
    def test_fixture_counts_and_native_ids(self, fixtures_dir):
        samples = parse_supernatural(fixtures_dir / "supernatural")
        assert len(samples) == 7
        assert samples[0].id == "supernatural:task001-a1b2c3"
        assert samples[0].instruction.startswith("In this task, you are given a sentence.")
        assert samples[0].context == "The film was a delight from start to finish."
        assert samples[0].response == "POS"

    def test_instances_share_instruction_distinct_ids(self, fixtures_dir):
        samples = parse_supernatural(fixtures_dir / "supernatural")
        by_task = [s for s in samples if "task001" in s.id]
        assert len({s.id for s in by_task}) == len(by_task) == 4
        assert len({s.instruction for s in by_task}) == 1

    def test_single_task_file(self, fixtures_dir):
        samples = parse_supernatural(
            fixtures_dir / "supernatural" / "task002_number_conversion.json")
        assert len(samples) == 3

    def test_per_task_cap_subsamples_deterministically(self, fixtures_dir):
        a = parse_supernatural(fixtures_dir / "supernatural", per_task_cap=2, seed=5)
        b = parse_supernatural(fixtures_dir / "supernatural", per_task_cap=2, seed=5)
        assert [s.id for s in a] == [s.id for s in b]
        assert len(a) == 4  # 2 per task
        c = parse_supernatural(fixtures_dir / "supernatural", per_task_cap=2, seed=6)
        assert [s.id for s in a] != [s.id for s in c] or a == c  # seed-dependent pick

    def test_cap_keeps_original_instance_order(self, fixtures_dir):
        capped = parse_supernatural(fixtures_dir / "supernatural", per_task_cap=3, seed=1)
        full = parse_supernatural(fixtures_dir / "supernatural")
        full_order = [s.id for s in full]
        assert [s.id for s in capped] == \
            [i for i in full_order if i in {s.id for s in capped}]

    def test_task_with_zero_instances_contributes_nothing(self, tmp_path):
        p = tmp_path / "task.json"
        p.write_text(json.dumps({"Definition": ["Do the thing."], "Instances": []}),
                     encoding="utf-8")
        assert parse_supernatural(p) == []

    def test_missing_definition_rejected(self, tmp_path):
        p = tmp_path / "task.json"
        p.write_text(json.dumps({"Instances": []}), encoding="utf-8")
        with pytest.raises(MalformedRecord, match="Definition"):
            parse_supernatural(p)

    def test_empty_directory_rejected(self, tmp_path):
        with pytest.raises(MalformedRecord, match="no .json task files"):
            parse_supernatural(tmp_path)


class TestCombine:
    def test_manifest_totals(self, fixture_corpus):
        corpus, manifest = fixture_corpus
        assert manifest.counts == {"gpt4-alpaca": 8, "supernatural": 7, "dolly": 6}
        assert manifest.total == 21 == len(corpus)

    def test_single_dataset(self, fixtures_dir):
        corpus, manifest = combine([parse_dolly(fixtures_dir / "dolly.jsonl")])
        assert manifest.counts == {"dolly": 6} and manifest.total == 6

    def test_duplicate_id_rejected(self, fixtures_dir):
        ds = parse_dolly(fixtures_dir / "dolly.jsonl")
        with pytest.raises(DuplicateId):
            combine([ds, ds[:1]])

    def test_manifest_arithmetic_enforced(self):
        with pytest.raises(ValueError):
            CorpusManifest(counts={"dolly": 2}, total=3)

    def test_manifest_json_round_trip(self, fixture_corpus):
        _, manifest = fixture_corpus
        again = CorpusManifest.from_json_dict(manifest.to_json_dict())
        assert again == manifest


class TestCorpusIO:
    def test_write_read_round_trip(self, fixture_corpus, tmp_path):
        corpus, _ = fixture_corpus
        path = tmp_path / "corpus.jsonl"
        write_corpus(corpus, path)
        assert read_corpus(path) == corpus

    def test_two_parses_are_identical(self, fixtures_dir):
        a = parse_alpaca(fixtures_dir / "alpaca.json")
        b = parse_alpaca(fixtures_dir / "alpaca.json")
        assert a == b

    def test_every_instruction_survives_tokenize_round_trip(self, fixture_corpus):
        corpus, _ = fixture_corpus
        for sample in corpus:
            tok = tokenize(sample.instruction)
            assert tokenize(detokenize(tok)).words == tok.words

    def test_source_checksum_stable_for_dir_and_file(self, fixtures_dir):
        assert source_checksum(fixtures_dir / "supernatural") == \
            source_checksum(fixtures_dir / "supernatural")
        assert source_checksum(fixtures_dir / "alpaca.json") == \
            source_checksum(fixtures_dir / "alpaca.json")

    def test_corrupt_corpus_line_reported(self, tmp_path):
        p = tmp_path / "c.jsonl"
        p.write_text('{"id": "x:1", "dataset": "dolly", "instruction": "hi", '
                     '"response": "r"}\nnot json\n', encoding="utf-8")
        with pytest.raises(MalformedRecord, match=":2"):
            read_corpus(p)

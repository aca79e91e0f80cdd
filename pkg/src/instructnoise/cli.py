"""Command-line pipeline: ingest, mix, eval-set, stats, validate.

Configuration is layered, later sources winning: built-in defaults, then a
JSON config file (--config or INSTRUCTNOISE_CONFIG), then environment
variables (INSTRUCTNOISE_<KEY>, e.g. INSTRUCTNOISE_SEED=7,
INSTRUCTNOISE_PROPORTIONS=0,0.25), then command-line flags. One --seed
governs every random decision; it defaults to 0 and is never drawn from
entropy, so identical config + inputs always reproduce identical outputs.

Data goes to files and standard output only; logs are structured lines on
standard error; every failure additionally emits one machine-parsable JSON
record on standard error.

Exit codes: 0 success; 1 validation failure (failed verify, checksum or
expected-count mismatch); 2 usage/config error; 3 I/O, data-format, or
predictor failure. A predictor failure mid-build never leaves a partial
mixture file; finished samples are saved to a `<output>.resume` sidecar
that the next run with the same spec picks up automatically.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Mapping, Optional, Sequence

from .ingest import (
    CorpusManifest,
    DuplicateId,
    MalformedRecord,
    combine,
    file_sha256,
    parse_alpaca,
    parse_dolly,
    parse_supernatural,
    read_corpus,
    source_checksum,
    write_corpus,
)
from .mixture import (
    BuildError,
    CheckResult,
    EvalRow,
    MixtureSpec,
    VerifyReport,
    build,
    perturb_eval_set,
    verify,
)
from .perturb import ALL_STRATEGIES, PerturbationStrategy, PredictionCountMismatch
from .predictor import (
    MalformedResponse,
    OfflinePredictor,
    Predictor,
    PredictorUnavailable,
    RemotePredictor,
)
from .samples import DATASET_TAGS, PerturbedSample, dump_json_line
from .stats import compute_stats

log = logging.getLogger("instructnoise")

ENV_PREFIX = "INSTRUCTNOISE_"
DEFAULT_PROPORTIONS = (0.0, 0.25, 0.5, 0.75, 1.0)


class UsageError(Exception):
    """Bad flags, bad config values, or an unusable combination of both."""


class ExpectedCountMismatch(Exception):
    """An --expect-count assertion failed."""


@dataclasses.dataclass(frozen=True)
class RunConfig:
    alpaca: Optional[str] = None
    dolly: Optional[str] = None
    supernatural: Optional[str] = None
    supernatural_cap: Optional[int] = None
    corpus: Optional[str] = None
    out_dir: str = "out"
    seed: int = 0
    proportions: tuple[float, ...] = DEFAULT_PROPORTIONS
    ratio: float = 0.25
    strategies: tuple[str, ...] = tuple(s.value for s in ALL_STRATEGIES)
    predictor: str = "offline"
    predictor_url: Optional[str] = None
    timeout: float = 30.0
    max_in_flight: int = 4
    workers: int = max(1, os.cpu_count() or 1)
    shuffle_output_order: bool = False
    expect_counts: dict[str, int] = dataclasses.field(default_factory=dict)


def _parse_proportions(value: Any) -> tuple[float, ...]:
    if isinstance(value, (int, float)):
        value = [value]
    elif isinstance(value, str):
        value = [part for part in value.split(",") if part.strip()]
    if not isinstance(value, (list, tuple)) or not value:
        raise UsageError(f"cannot read proportions from {value!r}")
    try:
        out = tuple(float(v) for v in value)
    except (TypeError, ValueError):
        raise UsageError(f"proportions must be numbers, got {value!r}") from None
    for p in out:
        if not 0.0 <= p <= 1.0:
            raise UsageError(f"proportion {p} outside [0, 1]")
    if len(set(out)) != len(out):
        raise UsageError("proportions must not repeat")
    return out


def _parse_strategies(value: Any) -> tuple[str, ...]:
    if isinstance(value, str):
        value = [part for part in value.split(",") if part.strip()]
    if not isinstance(value, (list, tuple)) or not value:
        raise UsageError(f"cannot read strategies from {value!r}")
    try:
        return tuple(PerturbationStrategy.from_tag(str(v).strip()).value for v in value)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _parse_expect_counts(value: Any) -> dict[str, int]:
    """Accept {"total": n, "dolly": m}, or entries "122806" / "dolly=15011"."""
    valid = set(DATASET_TAGS) | {"total"}
    out: dict[str, int] = {}
    entries = value.items() if isinstance(value, Mapping) else None
    if entries is None:
        if isinstance(value, (str, int)):
            value = [value]
        if not isinstance(value, (list, tuple)):
            raise UsageError(f"cannot read expected counts from {value!r}")
        entries = []
        for item in value:
            text = str(item)
            key, _, num = text.rpartition("=")
            entries.append((key or "total", num))
    for key, num in entries:
        if key not in valid:
            raise UsageError(f"unknown expect-count key {key!r}; "
                             f"use total or one of {', '.join(DATASET_TAGS)}")
        try:
            out[key] = int(num)
        except (TypeError, ValueError):
            raise UsageError(f"expected count for {key!r} is not an integer: {num!r}") from None
    return out


def _coerce_int(key: str, value: Any, minimum: int) -> int:
    try:
        out = int(value)
    except (TypeError, ValueError):
        raise UsageError(f"{key} must be an integer, got {value!r}") from None
    if out < minimum:
        raise UsageError(f"{key} must be >= {minimum}, got {out}")
    return out


def _coerce_float(key: str, value: Any) -> float:
    try:
        return float(value)
    except (TypeError, ValueError):
        raise UsageError(f"{key} must be a number, got {value!r}") from None


def _coerce_bool(key: str, value: Any) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"{key} must be a boolean, got {value!r}")


_COERCERS = {
    "alpaca": lambda k, v: str(v),
    "dolly": lambda k, v: str(v),
    "supernatural": lambda k, v: str(v),
    "supernatural_cap": lambda k, v: _coerce_int(k, v, 1),
    "corpus": lambda k, v: str(v),
    "out_dir": lambda k, v: str(v),
    "seed": lambda k, v: _coerce_int(k, v, -(1 << 63)),
    "proportions": lambda k, v: _parse_proportions(v),
    "ratio": lambda k, v: _coerce_float(k, v),
    "strategies": lambda k, v: _parse_strategies(v),
    "predictor": lambda k, v: str(v),
    "predictor_url": lambda k, v: str(v),
    "timeout": lambda k, v: _coerce_float(k, v),
    "max_in_flight": lambda k, v: _coerce_int(k, v, 1),
    "workers": lambda k, v: _coerce_int(k, v, 1),
    "shuffle_output_order": lambda k, v: _coerce_bool(k, v),
    "expect_counts": lambda k, v: _parse_expect_counts(v),
}


def _load_config_file(path: str) -> dict[str, Any]:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise UsageError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise UsageError(f"config file {path} must hold a JSON object")
    return obj


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Layer defaults <- config file <- environment <- flags into a RunConfig."""
    settings: dict[str, Any] = {}

    config_path = getattr(args, "config", None) or os.environ.get(ENV_PREFIX + "CONFIG")
    if config_path:
        for key, value in _load_config_file(config_path).items():
            if key not in _COERCERS:
                raise UsageError(f"unknown config key {key!r} in {config_path}")
            settings[key] = _COERCERS[key](key, value)

    for key, coerce in _COERCERS.items():
        env_value = os.environ.get(ENV_PREFIX + key.upper())
        if env_value is not None:
            settings[key] = coerce(key, env_value)

    for key, coerce in _COERCERS.items():
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            settings[key] = coerce(key, flag_value)

    cfg = RunConfig(**settings)
    if cfg.predictor not in ("remote", "offline"):
        raise UsageError(f"predictor must be remote or offline, got {cfg.predictor!r}")
    if cfg.predictor == "remote" and not cfg.predictor_url:
        raise UsageError("predictor=remote requires --predictor-url")
    if not 0.0 < cfg.ratio <= 1.0:
        raise UsageError(f"ratio must be in (0, 1], got {cfg.ratio}")
    return cfg


def _setup_logging() -> None:
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(
        "%(asctime)s %(levelname)s %(name)s %(message)s",
        datefmt="%Y-%m-%dT%H:%M:%S"))
    root = logging.getLogger()
    if not root.handlers:
        root.addHandler(handler)
        root.setLevel(logging.INFO)


def _emit_error(exc: BaseException, code: int) -> None:
    record = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    print(dump_json_line(record), file=sys.stderr, flush=True)


def _atomic_write_text(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8", newline="\n")
    os.replace(tmp, path)


def _write_jsonl(path: Path, records: Sequence[dict[str, Any]]) -> None:
    _atomic_write_text(path, "".join(dump_json_line(r) + "\n" for r in records))


def _write_manifest(path: Path, manifest: dict[str, Any]) -> None:
    _atomic_write_text(path, json.dumps(manifest, ensure_ascii=False, sort_keys=True,
                                        indent=2) + "\n")


def _read_jsonl(path: Path) -> list[dict[str, Any]]:
    out = []
    try:
        text = path.read_bytes().decode("utf-8")
    except UnicodeDecodeError as exc:
        raise MalformedRecord(f"{path}: not valid UTF-8 at byte {exc.start}") from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            out.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise MalformedRecord(f"{path}:{lineno}: invalid JSON: {exc}") from exc
    return out


def _read_mixture(path: Path) -> list[PerturbedSample]:
    rows = []
    for i, obj in enumerate(_read_jsonl(path), start=1):
        try:
            rows.append(PerturbedSample.from_json_dict(obj))
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedRecord(f"{path}:{i}: {exc}") from exc
    return rows


def _proportion_label(p: float) -> str:
    return f"{p * 100:g}".replace(".", "_")


def _make_predictor(cfg: RunConfig) -> Predictor:
    if cfg.predictor == "offline":
        return OfflinePredictor(seed=cfg.seed)
    predictor = RemotePredictor(cfg.predictor_url, timeout=cfg.timeout,
                                max_in_flight=cfg.max_in_flight)
    health = predictor.health_check()
    if not health.reachable:
        raise PredictorUnavailable(
            f"remote predictor at {cfg.predictor_url} failed its health check: "
            f"{health.detail}")
    log.info("remote predictor healthy (model %s)", health.detail or "unknown")
    return predictor


def _mixture_spec(cfg: RunConfig, proportion: float) -> MixtureSpec:
    return MixtureSpec(
        proportion=proportion,
        ratio=cfg.ratio,
        seed=cfg.seed,
        strategies=tuple(PerturbationStrategy.from_tag(t) for t in cfg.strategies),
        shuffle_output_order=cfg.shuffle_output_order,
    )


# --- resume sidecars ---------------------------------------------------------

def _resume_path(out_file: Path) -> Path:
    return out_file.with_name(out_file.name + ".resume")


def _save_resume(out_file: Path, spec: MixtureSpec,
                 completed: Mapping[str, PerturbedSample]) -> Path:
    path = _resume_path(out_file)
    records = [{"resume": spec.to_json_dict()}]
    records.extend(row.to_json_dict() for row in completed.values())
    _write_jsonl(path, records)
    return path


def _load_resume(out_file: Path, spec: MixtureSpec) -> dict[str, PerturbedSample]:
    path = _resume_path(out_file)
    if not path.exists():
        return {}
    records = _read_jsonl(path)
    if not records or records[0].get("resume") != spec.to_json_dict():
        log.warning("ignoring stale resume sidecar %s (spec changed)", path)
        return {}
    completed = {}
    for obj in records[1:]:
        row = PerturbedSample.from_json_dict(obj)
        completed[row.sample.id] = row
    log.info("resuming %s: %d samples already perturbed", out_file.name, len(completed))
    return completed


# --- commands ----------------------------------------------------------------

def cmd_ingest(cfg: RunConfig, args: argparse.Namespace) -> int:
    inputs = [(tag, path) for tag, path in (
        ("gpt4-alpaca", cfg.alpaca),
        ("supernatural", cfg.supernatural),
        ("dolly", cfg.dolly),
    ) if path is not None]
    if not inputs:
        raise UsageError("ingest needs at least one of --alpaca/--supernatural/--dolly")
    datasets = []
    sources = {}
    for tag, path in inputs:
        log.info("parsing %s from %s", tag, path)
        if tag == "gpt4-alpaca":
            datasets.append(parse_alpaca(path))
        elif tag == "supernatural":
            datasets.append(parse_supernatural(path, per_task_cap=cfg.supernatural_cap,
                                               seed=cfg.seed))
        else:
            datasets.append(parse_dolly(path))
        sources[tag] = source_checksum(path)
        log.info("parsed %s: %d samples", tag, len(datasets[-1]))
    corpus, manifest = combine(datasets, sources=sources)

    for key, want in sorted(cfg.expect_counts.items()):
        got = manifest.total if key == "total" else manifest.counts.get(key, 0)
        if got != want:
            raise ExpectedCountMismatch(f"{key}: expected {want} samples, got {got}")

    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    corpus_path = out_dir / "corpus.jsonl"
    tmp = corpus_path.with_name(corpus_path.name + ".tmp")
    write_corpus(corpus, tmp)
    os.replace(tmp, corpus_path)
    record = {"kind": "corpus", **manifest.to_json_dict(),
              "checksum": file_sha256(corpus_path), "path": str(corpus_path)}
    _write_manifest(out_dir / "corpus.manifest.json", record)
    log.info("wrote %s (%d samples)", corpus_path, manifest.total)
    print(dump_json_line(record))
    return 0


def _corpus_for(cfg: RunConfig) -> tuple[Path, list]:
    path = Path(cfg.corpus) if cfg.corpus else Path(cfg.out_dir) / "corpus.jsonl"
    if not path.exists():
        raise UsageError(f"corpus file {path} not found; run ingest or pass --corpus")
    return path, read_corpus(path)


def cmd_mix(cfg: RunConfig, args: argparse.Namespace) -> int:
    corpus_path, corpus = _corpus_for(cfg)
    log.info("corpus %s: %d samples", corpus_path, len(corpus))
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    specs = [_mixture_spec(cfg, p) for p in cfg.proportions]
    predictor = (_make_predictor(cfg)
                 if any(s.needs_predictor() for s in specs) else None)
    failures = 0
    for spec in specs:
        out_file = out_dir / f"mixture_p{_proportion_label(spec.proportion)}.jsonl"
        completed = _load_resume(out_file, spec)
        try:
            rows = build(corpus, spec, predictor, workers=cfg.workers,
                         completed=completed)
        except BuildError as exc:
            sidecar = _save_resume(out_file, spec, exc.completed)
            log.error("build for %s failed on sample %s; %d finished samples "
                      "saved to %s", out_file.name, exc.sample_id,
                      len(exc.completed), sidecar)
            raise
        report = verify(rows, spec, corpus)
        if not report.ok:
            failures += 1
            log.error("verification failed for %s", out_file.name)
            print(dump_json_line({"file": str(out_file),
                                  **report.to_json_dict()}))
            continue
        _write_jsonl(out_file, [r.to_json_dict() for r in rows])
        _resume_path(out_file).unlink(missing_ok=True)
        counts: dict[str, int] = {}
        for row in rows:
            if row.strategy is not None:
                counts[row.strategy] = counts.get(row.strategy, 0) + 1
        record = {
            "kind": "mixture",
            "path": str(out_file),
            "spec": spec.to_json_dict(),
            "total": len(rows),
            "kept": len(rows) - sum(counts.values()),
            "counts": dict(sorted(counts.items())),
            "checksum": file_sha256(out_file),
            "verify": report.to_json_dict(),
        }
        _write_manifest(out_file.with_name(out_file.stem + ".manifest.json"), record)
        log.info("wrote %s (%d samples, %d perturbed)", out_file, len(rows),
                 sum(counts.values()))
        print(dump_json_line({k: record[k] for k in
                              ("kind", "path", "total", "kept", "counts", "checksum")}))
    return 1 if failures else 0


def _read_instruction_lines(path: Path) -> list[str]:
    if path.suffix == ".jsonl":
        lines = []
        for i, obj in enumerate(_read_jsonl(path), start=1):
            if not isinstance(obj, dict) or not isinstance(obj.get("instruction"), str):
                raise MalformedRecord(f"{path}:{i}: expected an object with an "
                                      f"'instruction' string")
            lines.append(obj["instruction"])
        return lines
    try:
        text = path.read_bytes().decode("utf-8")
    except UnicodeDecodeError as exc:
        raise MalformedRecord(f"{path}: not valid UTF-8 at byte {exc.start}") from exc
    return text.splitlines()


def cmd_eval_set(cfg: RunConfig, args: argparse.Namespace) -> int:
    path = Path(args.instructions)
    lines = _read_instruction_lines(path)
    if not lines:
        raise UsageError(f"{path} contains no instructions")
    log.info("perturbing %d evaluation instructions from %s", len(lines), path)
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    specs = [_mixture_spec(cfg, p) for p in cfg.proportions]
    predictor = (_make_predictor(cfg)
                 if any(s.needs_predictor() for s in specs) else None)
    for spec in specs:
        rows = perturb_eval_set(lines, spec, predictor)
        out_file = out_dir / f"eval_p{_proportion_label(spec.proportion)}.jsonl"
        _write_jsonl(out_file, [r.to_json_dict() for r in rows])
        counts: dict[str, int] = {}
        for row in rows:
            if row.strategy is not None:
                counts[row.strategy] = counts.get(row.strategy, 0) + 1
        record = {
            "kind": "eval-set",
            "path": str(out_file),
            "spec": spec.to_json_dict(),
            "total": len(rows),
            "kept": len(rows) - sum(counts.values()),
            "counts": dict(sorted(counts.items())),
            "checksum": file_sha256(out_file),
        }
        _write_manifest(out_file.with_name(out_file.stem + ".manifest.json"), record)
        log.info("wrote %s (%d rows, %d perturbed)", out_file, len(rows),
                 sum(counts.values()))
        print(dump_json_line({k: record[k] for k in
                              ("kind", "path", "total", "kept", "counts", "checksum")}))
    return 0


def cmd_stats(cfg: RunConfig, args: argparse.Namespace) -> int:
    path = Path(args.mixture)
    rows = _read_mixture(path)
    report = compute_stats(rows, checksum=file_sha256(path))
    if args.json:
        print(dump_json_line(report.to_json_dict()))
    else:
        print(report.render_text())
    return 0


def cmd_validate(cfg: RunConfig, args: argparse.Namespace) -> int:
    path = Path(args.mixture)
    manifest_path = (Path(args.manifest) if args.manifest
                     else path.with_name(path.stem + ".manifest.json"))
    if not manifest_path.exists():
        raise UsageError(f"manifest {manifest_path} not found "
                         f"(pass --manifest to point at it)")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    spec = MixtureSpec.from_json_dict(manifest.get("spec", {}))
    actual = file_sha256(path)
    recorded = manifest.get("checksum", "")
    checksum_ok = actual == recorded
    rows = _read_mixture(path)
    corpus = read_corpus(Path(args.corpus)) if args.corpus else None
    report = verify(rows, spec, corpus)
    checks = (CheckResult(
        "checksum", checksum_ok,
        f"{path.name}: manifest says {recorded[:12]}…, file is {actual[:12]}…"
        if not checksum_ok else ""),) + report.checks
    full = VerifyReport(checks=checks)
    print(dump_json_line({"file": str(path), **full.to_json_dict()}))
    for check in full.checks:
        log.info("%-12s %s %s", check.name, "ok" if check.passed else "FAIL",
                 check.detail)
    return 0 if full.ok else 1


# --- argument parsing ---------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="instructnoise",
        description="Build noisy-instruction fine-tuning mixtures and "
                    "evaluation sets with auditable, seeded perturbations.")
    sub = parser.add_subparsers(dest="command", metavar="command")

    def shared(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON config file; flags override it")
        p.add_argument("--seed", type=int, help="global seed (default 0)")
        p.add_argument("--out-dir", dest="out_dir", help="output directory (default ./out)")
        p.add_argument("--proportion", dest="proportions",
                       help="comma-separated perturbation proportions "
                            "(default 0,0.25,0.5,0.75,1.0)")
        p.add_argument("--ratio", type=float, help="per-instruction word ratio (default 0.25)")
        p.add_argument("--strategies",
                       help="comma-separated subset of: "
                            + ",".join(s.value for s in ALL_STRATEGIES))
        p.add_argument("--predictor", choices=("remote", "offline"),
                       help="mask-fill backend (default offline)")
        p.add_argument("--predictor-url", dest="predictor_url",
                       help="base URL of the remote fill-mask service")
        p.add_argument("--timeout", type=float, help="predictor timeout seconds")
        p.add_argument("--max-in-flight", dest="max_in_flight", type=int,
                       help="max concurrent predictor requests")
        p.add_argument("--workers", type=int,
                       help="perturbation worker threads (default: CPU count)")
        p.add_argument("--shuffle-output-order", dest="shuffle_output_order",
                       action=argparse.BooleanOptionalAction, default=None,
                       help="shuffle mixture output order (seeded)")
        p.add_argument("--expect-count", dest="expect_counts", action="append",
                       metavar="[DATASET=]N",
                       help="assert a sample count, e.g. 122806 or dolly=15011")

    p = sub.add_parser("ingest", help="parse source datasets into one corpus file")
    shared(p)
    p.add_argument("--alpaca", help="Alpaca-style JSON array file")
    p.add_argument("--dolly", help="Dolly-style JSONL file")
    p.add_argument("--supernatural", help="task-file directory (or single task file)")
    p.add_argument("--supernatural-cap", dest="supernatural_cap", type=int,
                   help="max instances sampled per task (seeded)")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("mix", help="build one mixture file per proportion")
    shared(p)
    p.add_argument("--corpus", help="corpus JSONL (default <out-dir>/corpus.jsonl)")
    p.set_defaults(func=cmd_mix)

    p = sub.add_parser("eval-set", help="perturb evaluation instructions, aligned by line")
    shared(p)
    p.add_argument("instructions",
                   help="instruction file: plain text (one per line) or JSONL "
                        "with an 'instruction' field")
    p.set_defaults(func=cmd_eval_set)

    p = sub.add_parser("stats", help="describe a mixture file")
    shared(p)
    p.add_argument("mixture", help="mixture JSONL file")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("validate", help="re-check a mixture file against its manifest")
    shared(p)
    p.add_argument("mixture", help="mixture JSONL file")
    p.add_argument("--manifest", help="manifest path (default: <mixture>.manifest.json)")
    p.add_argument("--corpus", help="original corpus for scope checking")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "func", None):
        parser.print_help(sys.stderr)
        return 2
    _setup_logging()
    try:
        cfg = resolve_config(args)
        return args.func(cfg, args)
    except UsageError as exc:
        _emit_error(exc, 2)
        return 2
    except ExpectedCountMismatch as exc:
        _emit_error(exc, 1)
        return 1
    except (MalformedRecord, DuplicateId, BuildError, PredictorUnavailable,
            MalformedResponse, PredictionCountMismatch, OSError) as exc:
        _emit_error(exc, 3)
        return 3
    except ValueError as exc:
        _emit_error(exc, 2)
        return 2


if __name__ == "__main__":
    sys.exit(main())

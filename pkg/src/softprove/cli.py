"""Command-line surface: parse, prove, verify, refine, corpus verify, bench,
embeddings cache.

Exit codes: 0 success, 1 input error, 2 config error, 3 no proof,
4 LLM/client error.  Configuration precedence is flags > environment >
config file (plain ``key=value`` lines).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Optional

from .bench import DEFAULT_SEED, run_bench
from .chat import ChatError, ChatParams, HttpChatClient, MockTranscript, default_model
from .embeddings import (
    EmbeddingError,
    EmbeddingStore,
    load_embeddings,
    load_embeddings_cached,
)
from .logic import KnowledgeBase, LogicError
from .principles import load_principles, open_goals
from .prover import (
    ConfigError,
    SolverConfig,
    prove_all_goals,
    proof_to_dict,
    render_proof,
)
from .refine import CaseSeed, RefineAborted, RefineConfig, RefineError, refine_loop
from .ruleparse import KbParseError, RuleSyntaxError, format_atom, format_rule, parse_kb, serialize
from .srl import SchemaError, frame_from_dict, frame_to_facts
from .verifier import (
    MoralViolation,
    aggregate_metrics,
    assemble_kb,
    case_from_dict,
    metrics_to_dict,
    render_metrics,
    verify_case,
)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_CONFIG = 2
EXIT_NO_PROOF = 3
EXIT_CLIENT = 4

ENV_PREFIX = "SOFTPROVE_"
_CONFIG_KEYS = ("unify_threshold", "proof_threshold", "max_depth", "embeddings", "principles")


class InputError(ValueError):
    pass


def _read_config_file(path: Optional[str]) -> dict[str, str]:
    if not path:
        return {}
    values: dict[str, str] = {}
    for line_no, line in enumerate(Path(path).read_text("utf-8").splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{line_no}: expected key=value")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def _setting(args: argparse.Namespace, key: str, default, cast: Callable):
    flag = getattr(args, key, None)
    if flag is not None:
        return flag
    env = os.environ.get(ENV_PREFIX + key.upper())
    if env is not None:
        return cast(env)
    file_value = args._file_config.get(key)
    if file_value is not None:
        return cast(file_value)
    return default


def _solver_config(args: argparse.Namespace) -> SolverConfig:
    return SolverConfig(
        unify_threshold=_setting(args, "unify_threshold", 0.5, float),
        proof_threshold=_setting(args, "proof_threshold", 0.13, float),
        max_depth=_setting(args, "max_depth", 10, int),
        weak_constants=bool(getattr(args, "weak_constants", False)),
        strict_threshold=bool(getattr(args, "strict_threshold", False)),
    )


def _store(args: argparse.Namespace) -> EmbeddingStore:
    path = _setting(args, "embeddings", None, str)
    if path is None:
        return EmbeddingStore.empty()
    cache = getattr(args, "embeddings_cache", None)
    limit = getattr(args, "limit", None)
    if cache:
        return load_embeddings_cached(path, cache, limit=limit)
    return load_embeddings(path, limit=limit)


def _principles(args: argparse.Namespace):
    return load_principles(_setting(args, "principles", None, str))


def _emit(args: argparse.Namespace, text: str, payload: dict) -> None:
    if getattr(args, "json", False):
        print(json.dumps(payload, indent=2))
    else:
        print(text)


# -- commands -------------------------------------------------------------------


def cmd_parse(args: argparse.Namespace) -> int:
    doc = parse_kb(Path(args.kb).read_text("utf-8"))
    canonical = serialize(doc)
    payload = {
        "rules": [format_rule(r) for r in doc.rules],
        "goals": [format_atom(g.goal_atom) for g in doc.goal_decls],
        "canonical": canonical,
    }
    _emit(args, canonical.rstrip("\n"), payload)
    return EXIT_OK


def cmd_prove(args: argparse.Namespace) -> int:
    doc = parse_kb(Path(args.kb).read_text("utf-8"))
    goals = doc.goal_decls
    if not goals:
        raise ConfigError(f"{args.kb}: no goal declaration (`goal <- ...`) found")
    if args.open_goals:
        goals = open_goals(goals)
    kb = KnowledgeBase(rules=doc.rules, goals=goals)
    outcome = prove_all_goals(kb, kb.goals, _store(args), _solver_config(args))
    if outcome is None:
        print("no proof above the threshold", file=sys.stderr)
        return EXIT_NO_PROOF
    violation, result = outcome
    _emit(args, render_proof(result), proof_to_dict(result))
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    case, rules = case_from_dict(json.loads(Path(args.case).read_text("utf-8")))
    principle_doc = _principles(args)
    goals = open_goals(principle_doc.goal_decls) if args.open_goals else principle_doc.goal_decls
    kb = assemble_kb(principle_doc.rules, goals, frame_to_facts(case.frame), rules)
    outcome = verify_case(case, kb, _store(args), _solver_config(args))
    payload = {
        "case_id": case.id,
        "outcome": outcome.kind.value,
        "entailed": outcome.entailed.value if outcome.entailed else None,
        "unused_fact_ids": sorted(outcome.unused_fact_ids),
        "proof": proof_to_dict(outcome.proof) if outcome.proof else None,
    }
    text_lines = [f"{case.id}: {outcome.kind.value}"]
    if outcome.entailed:
        text_lines.append(f"entailed: {outcome.entailed.value}")
    if outcome.unused_fact_ids:
        text_lines.append(f"unused facts: {', '.join(sorted(outcome.unused_fact_ids))}")
    if outcome.proof:
        text_lines.append(render_proof(outcome.proof))
    _emit(args, "\n".join(text_lines), payload)
    return EXIT_OK


def cmd_refine(args: argparse.Namespace) -> int:
    doc = json.loads(Path(args.case).read_text("utf-8"))
    for key in ("id", "statement", "frame"):
        if key not in doc:
            raise InputError(f"{args.case}: seed file missing key {key!r}")
    seed = CaseSeed(
        id=doc["id"],
        statement=doc["statement"],
        frame=frame_from_dict(doc["frame"]),
        gold_violation=MoralViolation(doc["gold_violation"]) if doc.get("gold_violation") else None,
    )
    if args.mock:
        client = MockTranscript.from_file(args.mock, strict=not args.lenient_mock)
    elif args.live:
        client = HttpChatClient()
    else:
        raise ConfigError("refine needs --mock <transcript> or --live")
    config = RefineConfig(
        max_iterations=args.iterations,
        solver=_solver_config(args),
        principles_path=_setting(args, "principles", None, str),
        params=ChatParams(model=default_model(), temperature=args.temperature),
    )
    case, trace = refine_loop(seed, config, client, _store(args))
    if args.out:
        Path(args.out).write_text(trace.to_json() + "\n", "utf-8")
    summary = [f"{case.id}: valid={trace.valid} hypothesis={case.hypothesis.value}"]
    for record in trace.records:
        summary.append(
            f"  iteration {record.index}: {record.outcome.kind.value}"
            f" ({len(record.explanation)} facts)"
        )
    _emit(args, "\n".join(summary), trace.to_dict())
    return EXIT_OK


def cmd_corpus_verify(args: argparse.Namespace) -> int:
    manifest = json.loads(Path(args.manifest).read_text("utf-8"))
    if "cases" not in manifest or not isinstance(manifest["cases"], list):
        raise InputError(f"{args.manifest}: manifest needs a `cases` list")
    base = Path(args.manifest).parent
    principle_doc = _principles(args)
    store = _store(args)
    config = _solver_config(args)

    def one(path_text: str):
        path = base / path_text
        doc = json.loads(path.read_text("utf-8"))
        case, rules = case_from_dict(doc)
        kb = assemble_kb(principle_doc.rules, principle_doc.goal_decls, frame_to_facts(case.frame), rules)
        return int(doc.get("iteration", 0)), verify_case(case, kb, store, config)

    outcomes = []
    failures = []
    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        for path_text, result in zip(
            manifest["cases"], pool.map(lambda p: _guard(one, p), manifest["cases"])
        ):
            if isinstance(result, Exception):
                failures.append((path_text, result))
                print(f"case failed: {path_text}: {result}", file=sys.stderr)
            else:
                outcomes.append(result)
    report = aggregate_metrics(outcomes)
    payload = metrics_to_dict(report)
    payload["split"] = manifest.get("split")
    payload["failures"] = [str(p) for p, _ in failures]
    destination = args.out or manifest.get("report")
    if destination:
        (base / destination).write_text(json.dumps(payload, indent=2) + "\n", "utf-8")
    _emit(args, render_metrics(report), payload)
    return EXIT_OK


def _guard(fn, arg):
    try:
        return fn(arg)
    except Exception as exc:  # per-case failures never abort the corpus run
        return exc


def cmd_bench(args: argparse.Namespace) -> int:
    report = run_bench(args.rules, runs=args.runs, seed=args.seed, config=_solver_config(args))
    text = (
        f"rules={report.rule_count} runs={report.runs}"
        f" median={report.median_seconds * 1000:.1f}ms"
        f" proof_found={report.proof_found} score={report.proof_score:.5f}"
    )
    _emit(args, text, report.to_dict())
    return EXIT_OK


def cmd_embeddings_cache(args: argparse.Namespace) -> int:
    source = _setting(args, "embeddings", None, str)
    if source is None:
        raise ConfigError("embeddings cache needs --embeddings <file>")
    cache = args.out or str(Path(source).with_suffix(Path(source).suffix + ".spemb"))
    store = load_embeddings_cached(source, cache, limit=args.limit)
    payload = {
        "source": str(source),
        "cache": str(cache),
        "vocab_size": store.vocab_size,
        "dimension": store.dimension,
    }
    _emit(args, f"cached {store.vocab_size} vectors (dim {store.dimension}) at {cache}", payload)
    return EXIT_OK


# -- wiring ---------------------------------------------------------------------


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--unify-threshold", dest="unify_threshold", type=float, default=None)
    p.add_argument("--proof-threshold", dest="proof_threshold", type=float, default=None)
    p.add_argument("--max-depth", dest="max_depth", type=int, default=None)
    p.add_argument("--weak-constants", action="store_true")
    p.add_argument("--strict-threshold", action="store_true")
    p.add_argument("--open-goals", action="store_true")


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--embeddings", default=None, help="GloVe-style text vector file")
    p.add_argument("--embeddings-cache", default=None, help="binary vector cache path")
    p.add_argument("--limit", type=int, default=None, help="load only the first N vector lines")
    p.add_argument("--principles", default=None, help="principle library override")
    p.add_argument("--config", default=None, help="key=value config file")
    p.add_argument("--json", action="store_true", help="machine-readable output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="softprove")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse a rule file and print its canonical form")
    p.add_argument("kb")
    _add_common_flags(p)
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("prove", help="run the solver over a self-contained rule file")
    p.add_argument("kb")
    _add_common_flags(p)
    _add_solver_flags(p)
    p.set_defaults(func=cmd_prove)

    p = sub.add_parser("verify", help="verify one case file against its formalized rules")
    p.add_argument("case")
    _add_common_flags(p)
    _add_solver_flags(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("refine", help="run the iterative repair loop on a case seed")
    p.add_argument("--case", required=True)
    p.add_argument("--mock", default=None, help="transcript JSON for the deterministic client")
    p.add_argument("--lenient-mock", action="store_true", help="unmatched prompts return empty replies")
    p.add_argument("--live", action="store_true", help="use the HTTPS chat client")
    p.add_argument("--iterations", type=int, default=3)
    p.add_argument("--temperature", type=float, default=0.5)
    p.add_argument("--out", default=None, help="write the full trace JSON here")
    _add_common_flags(p)
    _add_solver_flags(p)
    p.set_defaults(func=cmd_refine)

    corpus = sub.add_parser("corpus", help="corpus-level operations")
    corpus_sub = corpus.add_subparsers(dest="corpus_command", required=True)
    p = corpus_sub.add_parser("verify", help="verify every case in a manifest")
    p.add_argument("manifest")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default=None, help="report JSON destination")
    _add_common_flags(p)
    _add_solver_flags(p)
    p.set_defaults(func=cmd_corpus_verify)

    p = sub.add_parser("bench", help="synthetic solver scalability benchmark")
    p.add_argument("--rules", type=int, default=1000)
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    _add_common_flags(p)
    _add_solver_flags(p)
    p.set_defaults(func=cmd_bench)

    emb = sub.add_parser("embeddings", help="embedding store operations")
    emb_sub = emb.add_subparsers(dest="embeddings_command", required=True)
    p = emb_sub.add_parser("cache", help="build the binary vector cache")
    p.add_argument("--out", default=None)
    _add_common_flags(p)
    p.set_defaults(func=cmd_embeddings_cache)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args._file_config = _read_config_file(getattr(args, "config", None))
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RefineError, ChatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CLIENT
    except (
        KbParseError,
        RuleSyntaxError,
        SchemaError,
        EmbeddingError,
        LogicError,
        InputError,
        json.JSONDecodeError,
        FileNotFoundError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

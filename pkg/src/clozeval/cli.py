"""Command-line entry points: generate, score, rank, validate, serve.

Exit codes: 0 success, 1 domain error (bad files, degenerate data),
2 usage error. A JSON config file can pre-set any flag; explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .cloze import generate_cloze, parse_responses, parse_test_file, write_test_file
from .embeddings import load_embeddings
from .errors import ClozeValError
from .ranking import collect_candidates, filter_gaps, rank_by_similarity
from .scoring import (
    METHODS,
    score_acceptable,
    score_clozentropy,
    score_exact,
    score_similarity,
)
from .server import create_server
from .validation import load_judge_sessions, run_validation

_DEFAULTS = {
    "lead": 16,
    "interval": 5,
    "threshold": 0.5,
    "min_alternatives": 10,
    "port": 8080,
    "host": "127.0.0.1",
    "out": None,
    "out_prefix": None,
    "id": "cloze",
    "title": "",
    "include_self": False,
    "static_dir": None,
    "data_dir": None,
    "model": None,
}


def _merge_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> dict:
    """Fill unset flags from --config JSON, then from hard defaults.

    Returns the merged snapshot (flag name -> effective value) for provenance.
    """
    config: dict = {}
    if getattr(args, "config", None):
        try:
            config = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            parser.error(f"cannot load config {args.config}: {exc}")
        if not isinstance(config, dict):
            parser.error(f"config {args.config} must hold a JSON object")
    snapshot: dict = {}
    for dest, value in vars(args).items():
        if dest in ("func", "config", "command"):
            continue
        if value is None and dest in config:
            value = config[dest]
            setattr(args, dest, value)
        if value is None and dest in _DEFAULTS:
            value = _DEFAULTS[dest]
            setattr(args, dest, value)
        snapshot[dest] = value
    return snapshot


def _parse_models(entries: list[str], parser: argparse.ArgumentParser) -> dict[str, str]:
    """Parse repeatable --model name=path entries (bare paths name themselves)."""
    models: dict[str, str] = {}
    for entry in entries:
        if "=" in entry:
            name, _, path = entry.partition("=")
            name = name.strip()
        else:
            name, path = Path(entry).stem, entry
        if not name or not path:
            parser.error(f"--model expects name=path, got {entry!r}")
        if name in models:
            parser.error(f"duplicate model name {name!r}")
        models[name] = path
    return models


def _positive(parser: argparse.ArgumentParser, name: str, value: int, minimum: int) -> None:
    if value < minimum:
        parser.error(f"{name} must be at least {minimum}, got {value}")


def cmd_generate(args: argparse.Namespace, parser: argparse.ArgumentParser, snapshot: dict) -> int:
    _positive(parser, "--interval", args.interval, 2)
    _positive(parser, "--lead", args.lead, 0)
    text = Path(args.text).read_text(encoding="utf-8")
    test = generate_cloze(
        text, lead_len=args.lead, interval=args.interval, test_id=args.id, title=args.title
    )
    write_test_file(test, args.out)
    print(f"{len(test.gaps)} gaps")
    print(f"wrote {args.out}")
    return 0


def cmd_score(args: argparse.Namespace, parser: argparse.ArgumentParser, snapshot: dict) -> int:
    if args.method in ("similarity", "acceptable") and not args.model:
        parser.error(f"--method {args.method} requires --model")
    if args.threshold is not None and not 0.0 < args.threshold <= 1.0:
        parser.error(f"--threshold must be in (0, 1], got {args.threshold}")
    test = parse_test_file(args.test)
    sheets = parse_responses(args.responses, test)
    if args.method == "exact":
        report = score_exact(test, sheets)
    elif args.method == "clozentropy":
        report = score_clozentropy(test, sheets, leave_one_out=not args.include_self)
    else:
        models = _parse_models(args.model, parser)
        if len(models) != 1:
            parser.error(f"--method {args.method} takes exactly one --model")
        ((name, path),) = models.items()
        model = load_embeddings(path, name=name)
        if args.method == "similarity":
            report = score_similarity(test, sheets, model)
        else:
            report = score_acceptable(test, sheets, model, threshold=args.threshold)
    prefix = args.out_prefix or f"score_{args.method}"
    json_path, csv_path = f"{prefix}.json", f"{prefix}.csv"
    report.write_json(json_path)
    report.write_csv(csv_path)
    print(
        f"scored {len(sheets)} students on {len(test.gaps)} gaps "
        f"({args.method}) -> {json_path}, {csv_path}"
    )
    return 0


def cmd_rank(args: argparse.Namespace, parser: argparse.ArgumentParser, snapshot: dict) -> int:
    if not args.model:
        parser.error("rank requires at least one --model")
    test = parse_test_file(args.test)
    sheets = parse_responses(args.responses, test)
    model_paths = _parse_models(args.model, parser)
    models = {name: load_embeddings(path, name=name) for name, path in model_paths.items()}
    selected = filter_gaps(test, sheets, args.min_alternatives)
    if not selected:
        raise ClozeValError(
            f"no gaps have more than {args.min_alternatives} distinct answers"
        )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    count = 0
    for gap_id in selected:
        candidates = collect_candidates(test, sheets, gap_id)
        for name in sorted(models):
            table = rank_by_similarity(test.gap(gap_id), candidates, models[name], ranker_id=name)
            table.write_json(out_dir / f"ranking_{name}_gap{gap_id:02d}.json")
            count += 1
    print(f"wrote {count} ranking tables for {len(selected)} gaps to {out_dir}")
    return 0


def cmd_validate(args: argparse.Namespace, parser: argparse.ArgumentParser, snapshot: dict) -> int:
    if not args.model:
        parser.error("validate requires at least one --model")
    test = parse_test_file(args.test)
    sheets = parse_responses(args.responses, test)
    sessions = load_judge_sessions(args.judges)
    model_paths = _parse_models(args.model, parser)
    models = {name: load_embeddings(path, name=name) for name, path in model_paths.items()}
    # The output location is not an analysis input; keeping it out of the
    # provenance keeps reports byte-identical wherever they are written.
    analysis_snapshot = {k: v for k, v in snapshot.items() if k != "out"}
    report = run_validation(
        test,
        sheets,
        sessions,
        models,
        min_alternatives=args.min_alternatives,
        config_snapshot=analysis_snapshot,
    )
    out = Path(args.out or "stats_report.json")
    report.write_json(out)
    report.write_spearman_csv(out.with_name(out.stem + "_spearman.csv"))
    report.write_anova_csv(out.with_name(out.stem + "_anova.csv"))
    anova_main = report.anova[0]
    print(f"selected gaps: {len(report.gap_selection)}")
    print(
        f"ART ANOVA {anova_main.effect}: F({anova_main.df_num},{anova_main.df_den})"
        f"={anova_main.F:.4f}, p={anova_main.p:.4f}"
    )
    print(f"best model by consensus correlation: {report.best_model}")
    print(f"wrote {out}")
    return 0


def cmd_serve(args: argparse.Namespace, parser: argparse.ArgumentParser, snapshot: dict) -> int:
    data_dir = args.data_dir or os.environ.get("CLOZE_DATA_DIR")
    if not data_dir:
        parser.error("--data-dir is required (or set CLOZE_DATA_DIR)")
    test = parse_test_file(args.test)
    sheets = parse_responses(args.responses, test)
    server = create_server(
        test,
        sheets,
        port=args.port,
        data_dir=data_dir,
        host=args.host,
        min_alternatives=args.min_alternatives,
        static_dir=args.static_dir,
    )
    print(
        f"serving {len(server.tasks)} gaps on http://{args.host}:{server.server_address[1]} "
        f"(data dir: {data_dir})",
        flush=True,
    )
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cloze",
        description="Construct, score, and validate Cloze reading tests.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, *, test: bool = True) -> None:
        p.add_argument("--config", help="JSON file pre-setting any flag (flags override)")
        if test:
            p.add_argument("--test", required=True, help="test definition JSON")
            p.add_argument("--responses", required=True, help="responses CSV")

    p = sub.add_parser("generate", help="build a Cloze test from a prose file")
    p.add_argument("--config", help="JSON file pre-setting any flag (flags override)")
    p.add_argument("--text", required=True, help="plain-text passage file")
    p.add_argument("--lead", type=int, help="intact lead-in length (default 16)")
    p.add_argument("--interval", type=int, help="deletion period in words (default 5)")
    p.add_argument("--id", dest="id", help="test identifier")
    p.add_argument("--title", help="test title (never gapped)")
    p.add_argument("--out", required=True, help="output test JSON path")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("score", help="score response sheets")
    common(p)
    p.add_argument("--method", required=True, choices=METHODS)
    p.add_argument("--model", action="append", help="embedding model, name=path")
    p.add_argument("--threshold", type=float, help="acceptable-answer cutoff (default 0.5)")
    p.add_argument(
        "--include-self",
        action="store_true",
        default=None,
        help="clozentropy: keep the scored student in their own criterion pool",
    )
    p.add_argument("--out-prefix", help="output prefix (default score_<method>)")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("rank", help="write per-gap model ranking tables")
    common(p)
    p.add_argument("--model", action="append", help="embedding model, name=path (repeatable)")
    p.add_argument("--min-alternatives", type=int, help="gap filter cutoff (default 10)")
    p.add_argument("--out-dir", required=True, help="directory for ranking JSON files")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("validate", help="compare model rankings against judge rankings")
    common(p)
    p.add_argument("--judges", required=True, help="directory of judge session JSON files")
    p.add_argument("--model", action="append", help="embedding model, name=path (repeatable)")
    p.add_argument("--min-alternatives", type=int, help="gap filter cutoff (default 10)")
    p.add_argument("--out", help="stats report JSON path (default stats_report.json)")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("serve", help="serve the judge ranking task over HTTP")
    common(p)
    p.add_argument("--port", type=int, help="listen port (default 8080)")
    p.add_argument("--host", help="bind address (default 127.0.0.1)")
    p.add_argument("--data-dir", help="judge session directory (default $CLOZE_DATA_DIR)")
    p.add_argument("--min-alternatives", type=int, help="gap filter cutoff (default 10)")
    p.add_argument("--static-dir", help="built judge UI bundle to serve at /")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    snapshot = _merge_config(args, parser)
    try:
        return args.func(args, parser, snapshot)
    except ClozeValError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry_point()

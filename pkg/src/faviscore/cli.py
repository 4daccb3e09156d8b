"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from itertools import combinations
from pathlib import Path
from typing import Sequence

from . import __version__
from .analysis import reversal_consistency
from .core import EvaluationSetting, RatedItem, SystemPair
from .derive import MarginPair, derive_labels, derive_preference, optimize_margins
from .errors import DataError, FaviError, InvalidInput, MissingScore
from .ingest import (
    PREFERENCE_FIELDS,
    dump_preferences,
    load_human_labels,
    load_judge_requests,
    load_preferences,
    load_scalars,
    write_rows,
)
from .judge import OpenAIChatTransport, ReplayCache, judge_pair_over_testset
from .ranking import DEFAULT_ALPHA, render_dot
from .report import SCHEMA_VERSION, ReportConfig, aggregates, dumps, graph_summary, ranking_graph, run_report, score_pairs

logger = logging.getLogger("faviscore")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _alpha(text: str) -> float:
    value = float(text)
    if not 0 < value < 1:
        raise argparse.ArgumentTypeError("alpha must lie in (0, 1)")
    return value


def _emit(text: str, out: str | None) -> None:
    if out and out != "-":
        Path(out).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)


def _load(args: argparse.Namespace) -> list[EvaluationSetting]:
    return load_preferences(args.input, args.format, args.symmetrize)


def cmd_score(args: argparse.Namespace) -> None:
    settings = _load(args)
    _emit(dumps({"schema_version": SCHEMA_VERSION, "pairs": score_pairs(settings)}), args.out)


def cmd_rank(args: argparse.Namespace) -> None:
    settings = _load(args)
    g = ranking_graph(settings, args.source, args.alpha, reduce=not args.keep_transitive)
    if args.dot:
        Path(args.dot).write_text(render_dot(g), encoding="utf-8", newline="\n")
    doc = {"schema_version": SCHEMA_VERSION, "alpha": args.alpha, "source": args.source, **graph_summary(g)}
    _emit(dumps(doc), args.out)


def cmd_analyze(args: argparse.Namespace) -> None:
    settings = _load(args)
    doc = {"schema_version": SCHEMA_VERSION, "aggregates": aggregates(settings)}
    if args.reversed:
        doc["reversal_consistency"] = _reversal(settings, load_preferences(args.reversed, args.format, False))
    _emit(dumps(doc), args.out)


def _reversal(original: list[EvaluationSetting], flipped: list[EvaluationSetting]) -> dict:
    # metric labels of the flipped-order run, keyed in the original orientation
    orig = {(s.pair, it.item_id): it.metric for s in original for it in s.items}
    rev = {(s.pair.swapped(), it.item_id): it.metric for s in flipped for it in s.items}
    keys = sorted(orig, key=lambda k: (k[0], k[1]))
    if set(orig) != set(rev):
        raise InvalidInput("reversed run does not cover exactly the flipped pairs and items of the input")
    result = reversal_consistency({f"{p.first}\t{p.second}\t{i}": orig[(p, i)] for p, i in keys},
                                  {f"{p.first}\t{p.second}\t{i}": rev[(p, i)] for p, i in keys})
    return {"confusion": result.confusion.as_lists(), "accuracy": result.accuracy, "alpha": result.alpha}


def cmd_derive(args: argparse.Namespace) -> None:
    metric = load_scalars(args.scalars, args.scalar_format)
    if args.human:
        human = load_human_labels(args.human, args.format if args.format != "matrix" else None)
    else:
        human_table = load_scalars(args.human_scalars, args.scalar_format)
        human = {}
        for a, b in combinations(human_table.systems(), 2):
            pair = SystemPair(a, b)
            human[pair] = {
                i: derive_preference(human_table.get(i, a), human_table.get(i, b))
                for i in human_table.paired_items(pair)
            }

    if args.optimize_margins:
        labels, scores = [], []
        for pair, items in sorted(human.items()):
            for item_id, label in items.items():
                labels.append(label)
                scores.append((metric.get(item_id, pair.first), metric.get(item_id, pair.second)))
        margins = optimize_margins(labels, scores, args.margin_mode)
    else:
        margins = MarginPair(args.eps_left, args.eps_right)
    logger.info("margins: eps_left=%r eps_right=%r", margins.eps_left, margins.eps_right)

    settings = []
    for pair, items in sorted(human.items()):
        if not items:
            continue
        try:
            derived = derive_labels(metric, pair, list(items), margins)
        except MissingScore as exc:
            raise exc.with_context(pair=str(pair))
        settings.append(EvaluationSetting(pair, tuple(RatedItem(i, items[i], derived[i]) for i in items)))
    fmt = args.out_format or "csv"
    _emit(dump_preferences(settings, fmt), args.out)
    if args.margins_out:
        Path(args.margins_out).write_text(
            dumps({"eps_left": margins.eps_left, "eps_right": margins.eps_right, "mode": args.margin_mode}),
            encoding="utf-8",
        )


def cmd_judge(args: argparse.Namespace) -> None:
    requests, human = load_judge_requests(args.requests)
    transport = None
    if args.provider == "openai":
        if not args.model:
            raise InvalidInput("--model is required with --provider openai")
        transport = OpenAIChatTransport(args.model, base_url=args.base_url, temperature=args.temperature)
    cache = ReplayCache(args.replay_cache) if args.replay_cache else None
    labels = judge_pair_over_testset(transport, requests, cache, args.max_workers)
    rows = []
    for req, label in zip(requests, labels):
        h = human.get(req.pair, {}).get(req.item_id)
        rows.append({
            "item_id": req.item_id,
            "system_a": req.pair.first,
            "system_b": req.pair.second,
            "human": h.value if h else "",
            "metric": label.value,
        })
    _emit(write_rows(rows, PREFERENCE_FIELDS, args.out_format or "csv"), args.out)


def cmd_report(args: argparse.Namespace) -> None:
    cfg = ReportConfig(
        Path(args.input),
        args.format,
        args.alpha,
        args.symmetrize,
        Path(args.dot_dir) if args.dot_dir else None,
    )
    text, dots = run_report(cfg)
    if cfg.dot_dir is not None:
        cfg.dot_dir.mkdir(parents=True, exist_ok=True)
        for name, dot in dots.items():
            (cfg.dot_dir / name).write_text(dot, encoding="utf-8", newline="\n")
    _emit(text, args.out)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="faviscore", description="Favoritism analysis of automated preference metrics.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def preference_input(p: argparse.ArgumentParser) -> None:
        p.add_argument("input", help="preference file (.csv, .jsonl) or matrix document (.json)")
        p.add_argument("--format", choices=["auto", "csv", "jsonl", "matrix"], default="auto")
        p.add_argument("--symmetrize", action="store_true", help="merge both orderings of a pair")
        p.add_argument("--out", help="output file (default: stdout)")

    p = sub.add_parser("score", help="per-pair confusion, Favi-Score and sign accuracies")
    preference_input(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("rank", help="sign-test ranking DAG")
    preference_input(p)
    p.add_argument("--source", choices=["human", "metric"], default="metric")
    p.add_argument("--alpha", type=_alpha, default=DEFAULT_ALPHA)
    p.add_argument("--dot", help="write Graphviz DOT here")
    p.add_argument("--keep-transitive", action="store_true")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("analyze", help="aggregates across all pairs")
    preference_input(p)
    p.add_argument("--reversed", help="preference file of the same items with each pair flipped")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("derive", help="derive metric preferences from scalar scores")
    p.add_argument("--scalars", required=True, help="metric scores (item_id, system_id, [rater_id], score)")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--human", help="human preference file (item_id, system_a, system_b, human)")
    src.add_argument("--human-scalars", help="human scalar/Likert scores, compared per pair")
    p.add_argument("--format", choices=["auto", "csv", "jsonl"], default="auto", help="format of --human")
    p.add_argument("--scalar-format", choices=["auto", "csv", "jsonl"], default="auto")
    p.add_argument("--eps-left", type=float, default=0.0)
    p.add_argument("--eps-right", type=float, default=0.0)
    p.add_argument("--optimize-margins", action="store_true")
    p.add_argument("--margin-mode", choices=["confusion", "mixture"], default="confusion")
    p.add_argument("--margins-out", help="write the margins used as JSON")
    p.add_argument("--out-format", choices=["csv", "jsonl"])
    p.add_argument("--out")
    p.set_defaults(func=cmd_derive)

    p = sub.add_parser("judge", help="LLM-as-judge preferences with a replay cache")
    p.add_argument("--requests", required=True, help="JSONL judge requests")
    p.add_argument("--replay-cache", help="directory of cached judge responses")
    p.add_argument("--provider", choices=["none", "openai"], default="none",
                   help="live transport for cache misses (default: none, replay only)")
    p.add_argument("--model")
    p.add_argument("--base-url", default="https://api.openai.com/v1")
    p.add_argument("--temperature", type=float)
    p.add_argument("--max-workers", type=int, default=1)
    p.add_argument("--out-format", choices=["csv", "jsonl"])
    p.add_argument("--out")
    p.set_defaults(func=cmd_judge)

    p = sub.add_parser("report", help="full JSON report, optionally with DOT files")
    preference_input(p)
    p.add_argument("--alpha", type=_alpha, default=DEFAULT_ALPHA)
    p.add_argument("--dot-dir", help="write human.dot and metric.dot here")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except DataError as exc:
        print(f"faviscore: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FaviError as exc:
        print(f"faviscore: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"faviscore: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

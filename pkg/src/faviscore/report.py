"""Per-pair scores, aggregates and the deterministic JSON report."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Literal, Sequence

from .analysis import absolute_favi_stats, per_system_favi, spearman_rho
from .core import EvaluationSetting
from .errors import DataError
from .ingest import load_preferences
from .ranking import DEFAULT_ALPHA, RankingGraph, build_dag, omit_transitive_edges, render_dot, sign_test
from .scores import favi_score, sample_sign_accuracy, system_sign_accuracy, system_sign_agreement

SCHEMA_VERSION = 1
FLOAT_DIGITS = 12

Source = Literal["human", "metric"]


def pair_entry(s: EvaluationSetting) -> dict[str, Any]:
    c = s.confusion
    favi = favi_score(c)
    d, d_hat = c.human_outcome(), c.metric_outcome()
    return {
        "system_a": s.pair.first,
        "system_b": s.pair.second,
        "n_items": len(s),
        "confusion": c.as_lists(),
        "human_outcome": list(d.as_tuple()),
        "metric_outcome": list(d_hat.as_tuple()),
        "human_margin": d.margin,
        "metric_margin": d_hat.margin,
        "total_error": favi.total_error,
        "margin_delta": favi.margin_delta,
        "favi": favi.value,
        "no_errors": favi.no_errors,
        "sample_accuracy": sample_sign_accuracy(c),
        "sign_agreement": system_sign_agreement(c),
        "human_sign_test_p": sign_test(d.d_plus, d.d_minus),
        "metric_sign_test_p": sign_test(d_hat.d_plus, d_hat.d_minus),
    }


def score_pairs(settings: Iterable[EvaluationSetting]) -> list[dict[str, Any]]:
    out = []
    for s in settings:
        try:
            out.append(pair_entry(s))
        except DataError as exc:
            raise exc.with_context(pair=str(s.pair))
    return out


def _spearman_or_none(x: Sequence[float], y: Sequence[float]) -> float | None:
    return spearman_rho(x, y) if len(x) >= 2 else None


def aggregates(settings: Sequence[EvaluationSetting]) -> dict[str, Any]:
    entries = score_pairs(settings)
    with_errors = [e for e in entries if e["favi"] is not None]
    abs_favi = [abs(e["favi"]) for e in with_errors]
    mean, sd = absolute_favi_stats(settings)
    total_items = sum(e["n_items"] for e in entries)
    total_correct = sum(e["n_items"] - e["total_error"] for e in entries)
    return {
        "system_sign_accuracy": system_sign_accuracy(settings),
        "sample_sign_accuracy": total_correct / total_items,
        "abs_favi_mean": mean,
        "abs_favi_sd": sd,
        "pairs_without_errors": len(entries) - len(with_errors),
        "per_system_favi": [
            {
                "system": summary.system,
                "values": list(summary.values),
                "skipped": summary.skipped,
                "min": summary.quartiles[0] if summary.quartiles else None,
                "q1": summary.quartiles[1] if summary.quartiles else None,
                "median": summary.quartiles[2] if summary.quartiles else None,
                "q3": summary.quartiles[3] if summary.quartiles else None,
                "max": summary.quartiles[4] if summary.quartiles else None,
            }
            for summary in per_system_favi(settings)
        ],
        "spearman": {
            "abs_favi_vs_sample_accuracy": _spearman_or_none(abs_favi, [e["sample_accuracy"] for e in with_errors]),
            "abs_favi_vs_sign_agreement": _spearman_or_none(abs_favi, [float(e["sign_agreement"]) for e in with_errors]),
        },
    }


def ranking_graph(
    settings: Iterable[EvaluationSetting],
    source: Source,
    alpha: float = DEFAULT_ALPHA,
    reduce: bool = True,
) -> RankingGraph:
    if source == "human":
        outcomes = {s.pair: s.confusion.human_outcome() for s in settings}
    elif source == "metric":
        outcomes = {s.pair: s.confusion.metric_outcome() for s in settings}
    else:
        raise ValueError(f"unknown rating source {source!r}")
    g = build_dag(outcomes, alpha)
    return omit_transitive_edges(g) if reduce else g


def graph_summary(g: RankingGraph) -> dict[str, Any]:
    return {
        "nodes": sorted(g.nodes),
        "edges": [list(e) for e in sorted(g.edges)],
        "p_values": [
            {"system_a": a, "system_b": b, "p": p} for (a, b), p in sorted(g.p_values.items())
        ],
    }


def build_report(settings: Sequence[EvaluationSetting], alpha: float = DEFAULT_ALPHA) -> dict[str, Any]:
    settings = sorted(settings, key=lambda s: s.pair)
    return {
        "schema_version": SCHEMA_VERSION,
        "alpha": alpha,
        "systems": sorted({n for s in settings for n in (s.pair.first, s.pair.second)}),
        "pairs": score_pairs(settings),
        "aggregates": aggregates(settings),
        "dags": {
            "human": graph_summary(ranking_graph(settings, "human", alpha)),
            "metric": graph_summary(ranking_graph(settings, "metric", alpha)),
        },
    }


def _round(obj: Any) -> Any:
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, float):
        if not math.isfinite(obj):
            raise ValueError(f"non-finite value {obj!r} in report")
        v = float(f"{obj:.{FLOAT_DIGITS}g}")
        return 0.0 if v == 0 else v
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def dumps(doc: Any) -> str:
    """Canonical JSON: sorted keys, 12 significant digits, LF, trailing newline."""
    return json.dumps(_round(doc), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


@dataclass(frozen=True)
class ReportConfig:
    input: Path
    format: str | None = None
    alpha: float = DEFAULT_ALPHA
    symmetrize: bool = False
    dot_dir: Path | None = None


def run_report(config: ReportConfig) -> tuple[str, dict[str, str]]:
    """Report JSON text and, if ``dot_dir`` is set, DOT texts keyed by file name."""
    settings = load_preferences(config.input, config.format, config.symmetrize)
    text = dumps(build_report(settings, config.alpha))
    dots: dict[str, str] = {}
    if config.dot_dir is not None:
        for source in ("human", "metric"):
            dots[f"{source}.dot"] = render_dot(ranking_graph(settings, source, config.alpha))
    return text, dots

"""Aggregate statistics across system pairs."""

from __future__ import annotations

import math
import statistics
from collections import Counter
from dataclasses import dataclass
from itertools import permutations
from typing import Iterable, Mapping, NamedTuple, Sequence, Union

from .core import ConfusionMatrix, EvaluationSetting, RatingLabel
from .errors import InvalidInput
from .scores import favi_score

Labels = Union[Sequence[RatingLabel], Mapping[str, RatingLabel]]


@dataclass(frozen=True)
class SystemFaviSummary:
    system: str
    values: tuple[float, ...]
    skipped: int
    quartiles: tuple[float, float, float, float, float] | None

    @property
    def median(self) -> float | None:
        return None if self.quartiles is None else self.quartiles[2]


def quantile(sorted_values: Sequence[float], q: float) -> float:
    """Linear interpolation between closest ranks (numpy's default method)."""
    if not sorted_values:
        raise InvalidInput("quantile of an empty sequence")
    pos = (len(sorted_values) - 1) * q
    lo = math.floor(pos)
    hi = min(lo + 1, len(sorted_values) - 1)
    frac = pos - lo
    return sorted_values[lo] + (sorted_values[hi] - sorted_values[lo]) * frac


def five_number_summary(values: Iterable[float]) -> tuple[float, float, float, float, float] | None:
    ordered = sorted(values)
    if not ordered:
        return None
    return (ordered[0], quantile(ordered, 0.25), quantile(ordered, 0.5), quantile(ordered, 0.75), ordered[-1])


def per_system_favi(settings: Iterable[EvaluationSetting]) -> list[SystemFaviSummary]:
    """One-vs-all Favi values per system, oriented so positive favours that system.

    Pairs without metric errors have no Favi value; they are counted in
    ``skipped`` for both of their systems.
    """
    values: dict[str, list[float]] = {}
    skipped: Counter[str] = Counter()
    for s in settings:
        a, b = s.pair.first, s.pair.second
        values.setdefault(a, [])
        values.setdefault(b, [])
        v = favi_score(s).value
        if v is None:
            skipped[a] += 1
            skipped[b] += 1
            continue
        values[a].append(v)
        values[b].append(-v)
    return [
        SystemFaviSummary(name, tuple(vals), skipped[name], five_number_summary(vals))
        for name, vals in sorted(values.items())
    ]


def absolute_favi_stats(settings: Iterable[EvaluationSetting]) -> tuple[float | None, float | None]:
    """Mean and population standard deviation of |Favi| over pairs with errors."""
    vals = [abs(v) for v in (favi_score(s).value for s in settings) if v is not None]
    if not vals:
        return None, None
    return statistics.fmean(vals), statistics.pstdev(vals)


def average_ranks(values: Sequence[float]) -> list[float]:
    """1-based ranks; tied values share the mean of the ranks they span."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        shared = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = shared
        i = j + 1
    return ranks


def pearson(x: Sequence[float], y: Sequence[float]) -> float | None:
    """Pearson's r, or ``None`` when either side is constant."""
    if len(set(x)) < 2 or len(set(y)) < 2:
        return None
    return max(-1.0, min(1.0, statistics.correlation(x, y)))


def spearman_rho(x: Sequence[float], y: Sequence[float]) -> float | None:
    """Spearman's rho with average ranks for ties; ``None`` if a side is constant."""
    if len(x) != len(y):
        raise InvalidInput(f"length mismatch: {len(x)} vs {len(y)}")
    if len(x) < 2:
        raise InvalidInput("spearman_rho needs at least two observations")
    return pearson(average_ranks(x), average_ranks(y))


def krippendorff_alpha_nominal(pairs: Sequence[tuple[RatingLabel, RatingLabel]]) -> float | None:
    """Nominal Krippendorff's alpha for units rated exactly twice.

    Uses the coincidence-matrix formulation; ``None`` when every value in the
    data is the same (expected disagreement is zero).
    """
    if len(pairs) < 2:
        raise InvalidInput("krippendorff alpha needs at least two units")
    coincidence: Counter[tuple[RatingLabel, RatingLabel]] = Counter()
    for unit in pairs:
        # each ordered pair of values from different coders, weighted 1/(m_u - 1) = 1
        for c, k in permutations(unit, 2):
            coincidence[(c, k)] += 1
    n_c: Counter[RatingLabel] = Counter()
    for (c, _), o in coincidence.items():
        n_c[c] += o
    n = sum(n_c.values())
    observed = sum(o for (c, k), o in coincidence.items() if c != k)
    expected = sum(n_c[c] * n_c[k] for c in n_c for k in n_c if c != k)
    if expected == 0:
        return None
    return 1 - (n - 1) * observed / expected


def _align(original: Labels, reversed_run: Labels) -> tuple[list[RatingLabel], list[RatingLabel]]:
    if isinstance(original, Mapping) != isinstance(reversed_run, Mapping):
        raise InvalidInput("original and reversed ratings must both be mappings or both be sequences")
    if isinstance(original, Mapping):
        assert isinstance(reversed_run, Mapping)
        if set(original) != set(reversed_run):
            missing = sorted(set(original) ^ set(reversed_run))
            raise InvalidInput(f"item sets differ, e.g. {missing[0]!r}", mismatched=len(missing))
        keys = sorted(original)
        return [original[k] for k in keys], [reversed_run[k] for k in keys]
    if len(original) != len(reversed_run):
        raise InvalidInput(f"{len(original)} original vs {len(reversed_run)} reversed ratings")
    return list(original), list(reversed_run)


class ReversalConsistency(NamedTuple):
    confusion: ConfusionMatrix
    accuracy: float
    alpha: float | None


def reversal_consistency(original: Labels, reversed_run: Labels) -> ReversalConsistency:
    """Compare a judge's ratings with those it gave for the flipped pair order.

    The flipped-order labels are inverted first so both runs speak about the
    same orientation; rows of the confusion are the original labels.
    """
    orig, rev = _align(original, reversed_run)
    if not orig:
        raise InvalidInput("no items to compare")
    rev = [r.invert() for r in rev]
    counts = [[0, 0, 0] for _ in range(3)]
    for o, r in zip(orig, rev):
        counts[o.index][r.index] += 1
    confusion = ConfusionMatrix.from_rows(counts)
    alpha = krippendorff_alpha_nominal(list(zip(orig, rev))) if len(orig) >= 2 else None
    return ReversalConsistency(confusion, confusion.trace / confusion.total, alpha)

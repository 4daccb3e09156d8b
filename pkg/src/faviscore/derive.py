"""Turn scalar metric scores into preference labels.

A pair of scores ``(a, b)`` for the same input is mapped to ``+`` when the
first system scores higher, ``-`` when lower, and ``=`` otherwise. The margin
variant widens the draw band to ``[b - eps_right, b + eps_left]``.

:func:`optimize_margins` searches the draw band that best reproduces a set of
human labels. The number of agreements splits into a part that depends only on
``eps_left`` and one that depends only on ``eps_right`` (the ``+`` and ``-``
regions never overlap for non-negative margins), so each side is optimised on
its own candidate grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import fmean
from typing import Iterable, Literal, Mapping, Sequence

from .core import EvaluationSetting, RatedItem, RatingLabel, SystemPair
from .errors import EmptySetting, InvalidInput, InvalidScore, MissingScore

MarginMode = Literal["confusion", "mixture"]


@dataclass(frozen=True)
class MarginPair:
    eps_left: float = 0.0
    eps_right: float = 0.0

    def __post_init__(self) -> None:
        for name in ("eps_left", "eps_right"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise InvalidInput(f"{name} must be a finite non-negative number, got {v!r}")


NO_MARGIN = MarginPair(0.0, 0.0)


class ScalarRatingTable:
    """Scores keyed by ``(item_id, system_id)``; higher is better."""

    def __init__(self, entries: Mapping[tuple[str, str], float] | None = None) -> None:
        self._entries: dict[tuple[str, str], float] = {}
        for (item, system), score in (entries or {}).items():
            self._entries[(item, system)] = _check_score(score, item=item, system=system)

    @classmethod
    def from_ratings(cls, rows: Iterable[tuple[str, str, float]]) -> "ScalarRatingTable":
        """Build from ``(item, system, score)`` rows, averaging repeated raters."""
        grouped: dict[tuple[str, str], list[float]] = {}
        for item, system, score in rows:
            grouped.setdefault((item, system), []).append(_check_score(score, item=item, system=system))
        return cls({k: fmean(v) for k, v in grouped.items()})

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, key: tuple[str, str]) -> bool:
        return key in self._entries

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ScalarRatingTable) and self._entries == other._entries

    def get(self, item: str, system: str) -> float:
        try:
            return self._entries[(item, system)]
        except KeyError:
            raise MissingScore(f"no score for item {item!r} and system {system!r}", item=item, system=system) from None

    def items(self) -> list[str]:
        return sorted({i for i, _ in self._entries})

    def systems(self) -> list[str]:
        return sorted({s for _, s in self._entries})

    def entries(self) -> dict[tuple[str, str], float]:
        return dict(self._entries)

    def paired_items(self, pair: SystemPair) -> list[str]:
        """Items scored for both systems of ``pair``."""
        a = {i for i, s in self._entries if s == pair.first}
        b = {i for i, s in self._entries if s == pair.second}
        return sorted(a & b)


def _check_score(score: float, **context: object) -> float:
    try:
        value = float(score)
    except (TypeError, ValueError):
        raise InvalidScore(f"score {score!r} is not a number", **context) from None
    if not math.isfinite(value):
        raise InvalidScore(f"score {score!r} is not finite", **context)
    return value


def derive_preference(score_a: float, score_b: float) -> RatingLabel:
    _check_score(score_a)
    _check_score(score_b)
    if score_a > score_b:
        return RatingLabel.PLUS
    if score_a < score_b:
        return RatingLabel.MINUS
    return RatingLabel.EQUAL


def derive_preference_margin(score_a: float, score_b: float, margins: MarginPair = NO_MARGIN) -> RatingLabel:
    _check_score(score_a)
    _check_score(score_b)
    if score_a > score_b + margins.eps_left:
        return RatingLabel.PLUS
    if score_a < score_b - margins.eps_right:
        return RatingLabel.MINUS
    return RatingLabel.EQUAL


def candidate_margins(differences: Iterable[float]) -> tuple[list[float], list[float]]:
    """Candidate ``eps_left`` and ``eps_right`` values for the margin search.

    Agreement is piecewise constant in each margin; one representative per
    piece is enough: 0, the positive (resp. negated negative) midpoints
    between consecutive distinct differences, and one value beyond the
    largest absolute difference.
    """
    diffs = sorted(set(differences))
    mids = [(lo + hi) / 2 for lo, hi in zip(diffs, diffs[1:])]
    beyond = max((abs(d) for d in diffs), default=0.0) + 1.0
    left = sorted({0.0, beyond, *(m for m in mids if m > 0)})
    right = sorted({0.0, beyond, *(-m for m in mids if m < 0)})
    return left, right


def _hit_prefix(candidates: Sequence[float], hit) -> int:
    # `hit` is true on a prefix of the ascending candidates; return its length
    lo, hi = 0, len(candidates)
    while lo < hi:
        mid = (lo + hi) // 2
        if hit(candidates[mid]):
            lo = mid + 1
        else:
            hi = mid
    return lo


def _best_margin(
    candidates: Sequence[float],
    human: Sequence[RatingLabel],
    scores: Sequence[tuple[float, float]],
    target: RatingLabel,
    weights: Mapping[RatingLabel, int],
) -> float:
    # gain(eps) = agreement won by labelling the hit items `target` instead of "="
    diff = [0] * (len(candidates) + 1)
    for h, (a, b) in zip(human, scores):
        if h is target:
            w = weights[target]
        elif h is RatingLabel.EQUAL:
            w = -weights[RatingLabel.EQUAL]
        else:
            continue
        if target is RatingLabel.PLUS:
            k = _hit_prefix(candidates, lambda eps: a > b + eps)
        else:
            k = _hit_prefix(candidates, lambda eps: a < b - eps)
        diff[0] += w
        diff[k] -= w
    best, best_gain, gain = candidates[0], None, 0
    for eps, d in zip(candidates, diff):
        gain += d
        if best_gain is None or gain > best_gain:
            best, best_gain = eps, gain
    return best


def optimize_margins(
    human: Sequence[RatingLabel],
    scores: Sequence[tuple[float, float]],
    mode: MarginMode = "confusion",
) -> MarginPair:
    """Margins maximising agreement between human and margin-derived labels.

    ``mode="confusion"`` maximises the trace of the confusion matrix (number
    of agreeing items). ``mode="mixture"`` maximises the trace of the
    column-normalised mixture matrix instead, i.e. per-label recall summed
    over the human labels that occur. Ties go to the smallest margins.
    """
    if len(human) != len(scores):
        raise InvalidInput(f"{len(human)} human labels but {len(scores)} score pairs")
    if not human:
        raise EmptySetting("margin optimisation needs at least one item")
    scores = [(_check_score(a), _check_score(b)) for a, b in scores]
    counts = {label: sum(1 for h in human if h is label) for label in RatingLabel}
    if mode == "confusion":
        weights = {label: 1 for label in RatingLabel}
    elif mode == "mixture":
        # 1/n_label scaled by the product of all non-zero label counts
        scale = math.prod(n for n in counts.values() if n)
        weights = {label: (scale // n if n else 0) for label, n in counts.items()}
    else:
        raise InvalidInput(f"unknown margin mode {mode!r}")

    left, right = candidate_margins(a - b for a, b in scores)
    return MarginPair(
        _best_margin(left, human, scores, RatingLabel.PLUS, weights),
        _best_margin(right, human, scores, RatingLabel.MINUS, weights),
    )


def agreement(human: Sequence[RatingLabel], scores: Sequence[tuple[float, float]], margins: MarginPair) -> int:
    """Number of items where the margin-derived label matches the human one."""
    return sum(h is derive_preference_margin(a, b, margins) for h, (a, b) in zip(human, scores))


def derive_setting(
    table: ScalarRatingTable,
    pair: SystemPair,
    human: Mapping[str, RatingLabel],
    margins: MarginPair = NO_MARGIN,
) -> EvaluationSetting:
    """Pair human labels with labels derived from ``table`` for every human-rated item."""
    if not human:
        raise EmptySetting("no human-rated items", pair=str(pair))
    items = []
    for item_id in human:
        a = table.get(item_id, pair.first)
        b = table.get(item_id, pair.second)
        items.append(RatedItem(item_id, human[item_id], derive_preference_margin(a, b, margins)))
    return EvaluationSetting(pair, tuple(items))


def derive_labels(table: ScalarRatingTable, pair: SystemPair, items: Sequence[str], margins: MarginPair = NO_MARGIN) -> dict[str, RatingLabel]:
    return {
        i: derive_preference_margin(table.get(i, pair.first), table.get(i, pair.second), margins)
        for i in items
    }

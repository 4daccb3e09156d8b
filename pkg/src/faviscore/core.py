"""Preference labels, evaluation settings, confusion matrices and outcomes.

Label order is fixed to ``(+, =, -)`` everywhere a matrix or vector is
indexed: rows of a confusion matrix are human labels, columns are metric
labels.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import EmptySetting, InvalidInput, ParseError


class RatingLabel(enum.Enum):
    """Preference of the first system's output over the second's."""

    PLUS = "+"
    EQUAL = "="
    MINUS = "-"

    @property
    def index(self) -> int:
        return _INDEX[self]

    def invert(self) -> "RatingLabel":
        return _INVERSE[self]

    @classmethod
    def parse(cls, token: str) -> "RatingLabel":
        try:
            return cls(token)
        except ValueError:
            raise ParseError(f"unknown label token {token!r}; expected one of '+', '=', '-'") from None

    def __str__(self) -> str:
        return self.value


LABELS: tuple[RatingLabel, ...] = (RatingLabel.PLUS, RatingLabel.EQUAL, RatingLabel.MINUS)
_INDEX = {label: i for i, label in enumerate(LABELS)}
_INVERSE = {
    RatingLabel.PLUS: RatingLabel.MINUS,
    RatingLabel.EQUAL: RatingLabel.EQUAL,
    RatingLabel.MINUS: RatingLabel.PLUS,
}


@dataclass(frozen=True, order=True)
class SystemPair:
    first: str
    second: str

    def __post_init__(self) -> None:
        if self.first == self.second:
            raise InvalidInput(f"a system pair needs two distinct systems, got {self.first!r} twice")

    def swapped(self) -> "SystemPair":
        return SystemPair(self.second, self.first)

    @property
    def is_canonical(self) -> bool:
        """True when the pair is in lexicographic order."""
        return self.first < self.second

    def canonical(self) -> "SystemPair":
        return self if self.is_canonical else self.swapped()

    def key(self) -> frozenset[str]:
        return frozenset((self.first, self.second))

    def __str__(self) -> str:
        return f"{self.first} vs {self.second}"


@dataclass(frozen=True)
class RatedItem:
    item_id: str
    human: RatingLabel
    metric: RatingLabel

    def inverted(self) -> "RatedItem":
        return RatedItem(self.item_id, self.human.invert(), self.metric.invert())


@dataclass(frozen=True)
class Outcome:
    """Label counts ``(d_plus, d_equal, d_minus)`` under one rating source."""

    d_plus: int
    d_equal: int
    d_minus: int

    def __post_init__(self) -> None:
        if min(self.d_plus, self.d_equal, self.d_minus) < 0:
            raise InvalidInput(f"outcome counts must be non-negative: {self.as_tuple()}")

    @property
    def total(self) -> int:
        return self.d_plus + self.d_equal + self.d_minus

    @property
    def margin(self) -> int:
        return self.d_plus - self.d_minus

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.d_plus, self.d_equal, self.d_minus)

    def swapped(self) -> "Outcome":
        return Outcome(self.d_minus, self.d_equal, self.d_plus)


def margin(outcome: Outcome) -> int:
    return outcome.margin


@dataclass(frozen=True)
class ConfusionMatrix:
    """3x3 counts; ``counts[m][n]`` = items with human label m and metric label n."""

    counts: tuple[tuple[int, int, int], tuple[int, int, int], tuple[int, int, int]]

    def __post_init__(self) -> None:
        rows = tuple(tuple(int(v) for v in row) for row in self.counts)
        if len(rows) != 3 or any(len(r) != 3 for r in rows):
            raise InvalidInput("confusion matrix must be 3x3")
        if any(v < 0 for r in rows for v in r):
            raise InvalidInput("confusion matrix entries must be non-negative")
        object.__setattr__(self, "counts", rows)

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[int]]) -> "ConfusionMatrix":
        return cls(tuple(tuple(r) for r in rows))  # type: ignore[arg-type]

    @classmethod
    def zeros(cls) -> "ConfusionMatrix":
        return cls(((0, 0, 0), (0, 0, 0), (0, 0, 0)))

    def __getitem__(self, key: tuple[RatingLabel, RatingLabel]) -> int:
        human, metric = key
        return self.counts[human.index][metric.index]

    @property
    def total(self) -> int:
        return sum(sum(r) for r in self.counts)

    @property
    def trace(self) -> int:
        return sum(self.counts[i][i] for i in range(3))

    def row_sums(self) -> tuple[int, int, int]:
        return tuple(sum(r) for r in self.counts)  # type: ignore[return-value]

    def col_sums(self) -> tuple[int, int, int]:
        return tuple(sum(r[j] for r in self.counts) for j in range(3))  # type: ignore[return-value]

    def human_outcome(self) -> Outcome:
        return Outcome(*self.row_sums())

    def metric_outcome(self) -> Outcome:
        return Outcome(*self.col_sums())

    def rotate180(self) -> "ConfusionMatrix":
        """Matrix of the same data with the two systems swapped."""
        return ConfusionMatrix.from_rows(reversed([tuple(reversed(r)) for r in self.counts]))

    def as_lists(self) -> list[list[int]]:
        return [list(r) for r in self.counts]


def total_error(c: ConfusionMatrix) -> int:
    return c.total - c.trace


@dataclass(frozen=True)
class EvaluationSetting:
    """Paired human and metric ratings for one ordered system pair."""

    pair: SystemPair
    items: tuple[RatedItem, ...]
    _confusion: ConfusionMatrix = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        items = tuple(self.items)
        if not items:
            raise EmptySetting("evaluation setting has no items", pair=str(self.pair))
        dupes = [k for k, n in Counter(it.item_id for it in items).items() if n > 1]
        if dupes:
            raise InvalidInput(f"duplicate item ids in setting: {sorted(dupes)[:5]}", pair=str(self.pair))
        object.__setattr__(self, "items", items)
        counts = [[0, 0, 0] for _ in range(3)]
        for it in items:
            counts[it.human.index][it.metric.index] += 1
        object.__setattr__(self, "_confusion", ConfusionMatrix.from_rows(counts))

    @classmethod
    def from_labels(
        cls,
        pair: SystemPair,
        item_ids: Sequence[str],
        human: Sequence[RatingLabel],
        metric: Sequence[RatingLabel],
    ) -> "EvaluationSetting":
        if not (len(item_ids) == len(human) == len(metric)):
            raise InvalidInput("item ids, human labels and metric labels must have equal length", pair=str(pair))
        return cls(pair, tuple(RatedItem(i, h, m) for i, h, m in zip(item_ids, human, metric)))

    @classmethod
    def from_confusion(cls, pair: SystemPair, c: ConfusionMatrix) -> "EvaluationSetting":
        """Wrap an aggregate matrix in a setting with generated item ids."""
        items = []
        for h in LABELS:
            for m in LABELS:
                for _ in range(c[h, m]):
                    items.append(RatedItem(f"synthetic-{len(items):06d}", h, m))
        return cls(pair, tuple(items))

    def __len__(self) -> int:
        return len(self.items)

    @property
    def confusion(self) -> ConfusionMatrix:
        return self._confusion

    def human_labels(self) -> list[RatingLabel]:
        return [it.human for it in self.items]

    def metric_labels(self) -> list[RatingLabel]:
        return [it.metric for it in self.items]


def confusion_from_setting(setting: EvaluationSetting) -> ConfusionMatrix:
    return setting.confusion


def human_outcome(setting: EvaluationSetting) -> Outcome:
    return setting.confusion.human_outcome()


def metric_outcome(setting: EvaluationSetting) -> Outcome:
    return setting.confusion.metric_outcome()


def swap_systems(setting: EvaluationSetting) -> EvaluationSetting:
    """Reorient a setting to the swapped pair, inverting every label."""
    return EvaluationSetting(setting.pair.swapped(), tuple(it.inverted() for it in setting.items))

"""Favi-Score and sign accuracies.

All arithmetic is done on integer counts. :class:`FaviResult` keeps the exact
numerator (change in outcome margin) and denominator (total error) and only
produces a float on request.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Union

from .core import ConfusionMatrix, EvaluationSetting, total_error
from .errors import InconsistentPairSet, InvalidInput

# rows: human label, columns: metric label, order (+, =, -)
ERROR_COST: tuple[tuple[int, int, int], ...] = (
    (0, -1, -2),
    (1, 0, -1),
    (2, 1, 0),
)


@dataclass(frozen=True)
class FaviResult:
    """Favi-Score of one evaluation setting.

    ``value`` is ``None`` when the metric made no errors: perfect agreement is
    kept distinguishable from balanced errors (value 0).
    """

    margin_delta: int
    total_error: int

    @property
    def value(self) -> float | None:
        if self.total_error == 0:
            return None
        return self.margin_delta / self.total_error

    @property
    def fraction(self) -> Fraction | None:
        if self.total_error == 0:
            return None
        return Fraction(self.margin_delta, self.total_error)

    @property
    def no_errors(self) -> bool:
        return self.total_error == 0

    def negated(self) -> "FaviResult":
        return FaviResult(-self.margin_delta, self.total_error)


def _as_confusion(obj: Union[ConfusionMatrix, EvaluationSetting]) -> ConfusionMatrix:
    if isinstance(obj, EvaluationSetting):
        return obj.confusion
    if isinstance(obj, ConfusionMatrix):
        return obj
    raise InvalidInput(f"expected a ConfusionMatrix or EvaluationSetting, got {type(obj).__name__}")


def favi_score(c: Union[ConfusionMatrix, EvaluationSetting]) -> FaviResult:
    """Expected directed error cost over the metric's errors."""
    c = _as_confusion(c)
    weighted = sum(ERROR_COST[m][n] * c.counts[m][n] for m in range(3) for n in range(3))
    return FaviResult(weighted, total_error(c))


def favi_score_margin_form(c: Union[ConfusionMatrix, EvaluationSetting]) -> FaviResult:
    """Same score computed as change of outcome margin per error."""
    c = _as_confusion(c)
    delta = c.metric_outcome().margin - c.human_outcome().margin
    return FaviResult(delta, total_error(c))


def sample_sign_accuracy(c: Union[ConfusionMatrix, EvaluationSetting]) -> float:
    c = _as_confusion(c)
    if c.total == 0:
        raise InvalidInput("sample sign accuracy is undefined for an empty matrix")
    return c.trace / c.total


def _sign(x: int) -> int:
    return (x > 0) - (x < 0)


def system_sign_agreement(c: Union[ConfusionMatrix, EvaluationSetting]) -> int:
    """1 if human and metric outcome margins have the same three-valued sign."""
    c = _as_confusion(c)
    return int(_sign(c.human_outcome().margin) == _sign(c.metric_outcome().margin))


def check_pair_set(settings: Iterable[EvaluationSetting]) -> list[EvaluationSetting]:
    """Ensure exactly one setting per unordered system pair."""
    settings = list(settings)
    if not settings:
        raise InconsistentPairSet("no system pairs given")
    seen: dict[frozenset[str], EvaluationSetting] = {}
    systems: set[str] = set()
    for s in settings:
        key = s.pair.key()
        if key in seen:
            raise InconsistentPairSet(f"duplicate setting for pair {s.pair}", pair=str(s.pair))
        seen[key] = s
        systems.update(key)
    missing = [f"{a} vs {b}" for a, b in combinations(sorted(systems), 2) if frozenset((a, b)) not in seen]
    if missing:
        raise InconsistentPairSet(
            f"{len(missing)} system pair(s) missing, e.g. {missing[0]}", missing=len(missing)
        )
    return settings


def system_sign_accuracy(settings: Iterable[EvaluationSetting]) -> float:
    settings = check_pair_set(settings)
    return sum(system_sign_agreement(s) for s in settings) / len(settings)

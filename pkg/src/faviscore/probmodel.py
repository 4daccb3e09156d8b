"""Probabilistic formulation: mixture matrix, predicted outcome distribution
and the legacy Fa-Phi favoritism score.

``mu[c][c2]`` is P(metric = c | human = c2); columns are indexed by the human
label. When built from a confusion matrix all entries are exact
:class:`~fractions.Fraction` values, so identities hold without tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Real
from typing import Sequence

from .core import LABELS, ConfusionMatrix
from .errors import DegenerateMarginal, InvalidInput

_TOL = 1e-12

Matrix3 = tuple[tuple[Real, Real, Real], tuple[Real, Real, Real], tuple[Real, Real, Real]]


def _close(a: Real, b: Real, tol: float = _TOL) -> bool:
    return a == b or abs(a - b) <= tol


@dataclass(frozen=True)
class ProbOutcome:
    p_plus: Real
    p_equal: Real
    p_minus: Real

    def __post_init__(self) -> None:
        vals = self.as_tuple()
        if any(v < 0 or v > 1 for v in vals):
            raise InvalidInput(f"probabilities must lie in [0, 1]: {vals}")
        if not _close(sum(vals), 1):
            raise InvalidInput(f"outcome distribution must sum to 1, got {float(sum(vals))!r}")

    def as_tuple(self) -> tuple[Real, Real, Real]:
        return (self.p_plus, self.p_equal, self.p_minus)

    @classmethod
    def from_counts(cls, counts: Sequence[int]) -> "ProbOutcome":
        total = sum(counts)
        if total <= 0:
            raise InvalidInput("cannot normalise an all-zero outcome")
        return cls(*(Fraction(c, total) for c in counts))

    def swapped(self) -> "ProbOutcome":
        return ProbOutcome(self.p_minus, self.p_equal, self.p_plus)


@dataclass(frozen=True)
class MixtureMatrix:
    mu: Matrix3

    def __post_init__(self) -> None:
        rows = tuple(tuple(r) for r in self.mu)
        if len(rows) != 3 or any(len(r) != 3 for r in rows):
            raise InvalidInput("mixture matrix must be 3x3")
        if any(v < 0 or v > 1 for r in rows for v in r):
            raise InvalidInput("mixture matrix entries must lie in [0, 1]")
        for j in range(3):
            col = sum(rows[i][j] for i in range(3))
            if not _close(col, 1):
                raise InvalidInput(f"mixture column {LABELS[j]} sums to {float(col)!r}, expected 1")
        object.__setattr__(self, "mu", rows)

    def __getitem__(self, key: tuple[int, int]) -> Real:
        return self.mu[key[0]][key[1]]

    @classmethod
    def identity(cls) -> "MixtureMatrix":
        return cls(((1, 0, 0), (0, 1, 0), (0, 0, 1)))

    def swapped(self) -> "MixtureMatrix":
        """Mixture matrix of the same data with the two systems swapped."""
        return MixtureMatrix(tuple(tuple(reversed(r)) for r in reversed(self.mu)))  # type: ignore[arg-type]


def mixture_from_confusion(c: ConfusionMatrix) -> MixtureMatrix:
    human_counts = c.row_sums()
    for label, n in zip(LABELS, human_counts):
        if n == 0:
            raise DegenerateMarginal(label)
    mu = tuple(
        tuple(Fraction(c.counts[h][m], human_counts[h]) for h in range(3))
        for m in range(3)
    )
    return MixtureMatrix(mu)  # type: ignore[arg-type]


def human_distribution(c: ConfusionMatrix) -> ProbOutcome:
    return ProbOutcome.from_counts(c.row_sums())


def predicted_distribution(mu: MixtureMatrix, p: ProbOutcome) -> ProbOutcome:
    pv = p.as_tuple()
    return ProbOutcome(*(sum(mu.mu[i][j] * pv[j] for j in range(3)) for i in range(3)))


def favor_vectors(mu: MixtureMatrix, p: ProbOutcome) -> tuple[tuple[Real, Real, Real], tuple[Real, Real, Real]]:
    """Probability mass moved in favour of the first (f1) and second (f2) system.

    Plus/minus confusions are counted twice, matching their effect on the
    outcome margin.
    """
    P, E, M = 0, 1, 2
    pp, pe, pm = p.as_tuple()
    f1 = (pe * mu[P, E] + 2 * pm * mu[P, M], pm * mu[E, M], 0)
    f2 = (0, pp * mu[E, P], 2 * pp * mu[M, P] + pe * mu[M, E])
    return f1, f2


def legacy_fa_phi(mu: MixtureMatrix, p: ProbOutcome) -> Real:
    f1, f2 = favor_vectors(mu, p)
    return (sum(f1) - sum(f2)) / 2


def legacy_fa_phi_expanded(mu: MixtureMatrix, p: ProbOutcome) -> Real:
    """Closed-form expansion of :func:`legacy_fa_phi`, per input label."""
    P, E, M = 0, 1, 2
    pp, pe, pm = p.as_tuple()
    return (
        pp * (-mu[E, P] - 2 * mu[M, P])
        + pe * (mu[P, E] - mu[M, E])
        + pm * (2 * mu[P, M] + mu[E, M])
    ) / 2


def fair_equal_distribution_check(mu: MixtureMatrix, p: ProbOutcome, tol: float = 1e-10) -> bool:
    """True if the metric's outcome equals the human one with draws re-split evenly."""
    pp, pe, pm = p.as_tuple()
    qp, qe, qm = predicted_distribution(mu, p).as_tuple()
    shift = (pe - qe) / 2
    return abs(qp - (pp + shift)) <= tol and abs(qm - (pm + shift)) <= tol

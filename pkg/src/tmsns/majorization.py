"""Majorization of truncated Schmidt distributions.

``p`` majorizes ``q`` when, for every ``m``, the ``m`` largest entries of ``p``
sum to at least the ``m`` largest entries of ``q``.  Only finite prefixes are
available, so the comparison is three-valued.

For a certified distribution the sorted prefix is the exact head of the sorted
infinite sequence, so partial sums up to the shorter certified length are exact
up to rounding.  Past that point each partial sum is only known to lie in
``[L, L + tail_mass]``; differences there are judged against the full slack.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import UncertifiedTail
from .schmidt import Distribution, StateLabel, check_lambda, distribution

__all__ = [
    "ROUNDING_FACTOR",
    "MajorizationVerdict",
    "Outcome",
    "chain_check",
    "majorizes",
    "partial_sum_gaps",
    "sort_descending",
]

ROUNDING_FACTOR = 8


class Outcome(enum.Enum):
    MAJORIZES = "Majorizes"
    DOES_NOT_MAJORIZE = "DoesNotMajorize"
    UNDECIDED = "Undecided"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class MajorizationVerdict:
    """Outcome of ``p > q``.

    ``witness_index`` is the 1-based number of summed terms at the first
    violation beyond slack (only for ``DOES_NOT_MAJORIZE``).  ``margin`` is the
    minimum over ``m`` of the partial-sum difference.
    """

    outcome: Outcome
    witness_index: int | None
    margin: float
    slack: float

    def __bool__(self):
        return self.outcome is Outcome.MAJORIZES


def _require_certified(d: Distribution) -> None:
    if not d.tail_certified:
        raise UncertifiedTail("distribution tail is not certified monotone")


def sort_descending(d: Distribution) -> Distribution:
    """Stable descending sort of the prefix; the tail mass carries over."""
    _require_certified(d)
    order = np.argsort(-d.probs, kind="stable")
    return Distribution(d.label, d.lam, d.probs[order], d.tail_mass, True)


def _exact_length(d: Distribution) -> float:
    if d.tail_mass == 0.0:
        return np.inf
    return int(np.count_nonzero(d.probs > 0))


def partial_sum_gaps(p: Distribution, q: Distribution) -> np.ndarray:
    """``sum(p_sorted[:m]) - sum(q_sorted[:m])`` for ``m = 1 .. max(len)``."""
    ps = sort_descending(p).probs
    qs = sort_descending(q).probs
    size = max(len(ps), len(qs))
    diff = np.zeros(size)
    diff[: len(ps)] += ps
    diff[: len(qs)] -= qs
    return np.cumsum(diff)


def majorizes(p: Distribution, q: Distribution) -> MajorizationVerdict:
    """Decide ``p > q`` with an explicit uncertainty budget.

    The slack is ``|tail_p| + |tail_q| + 8 * M * eps``.  A gap below ``-slack``
    anywhere is a definite violation.  Inside the exactly known range a gap
    between ``-slack`` and the rounding allowance is reported as undecided.
    """
    _require_certified(p)
    _require_certified(q)
    gaps = partial_sum_gaps(p, q)
    size = len(gaps)
    rounding = ROUNDING_FACTOR * size * np.finfo(float).eps
    slack = abs(p.tail_mass) + abs(q.tail_mass) + rounding
    margin = float(gaps.min()) if size else 0.0

    violated = np.flatnonzero(gaps < -slack)
    if violated.size:
        return MajorizationVerdict(Outcome.DOES_NOT_MAJORIZE, int(violated[0]) + 1, margin, slack)

    exact = min(_exact_length(p), _exact_length(q))
    exact = size if exact == np.inf else int(exact)
    if exact and gaps[:exact].min() < -rounding:
        return MajorizationVerdict(Outcome.UNDECIDED, None, margin, slack)
    return MajorizationVerdict(Outcome.MAJORIZES, None, margin, slack)


def chain_check(n: int, m: int, lam: float, eps_tail: float = 1e-12) -> MajorizationVerdict:
    """Verdict for ``p_{n,0} > p_{n+m,0}``."""
    if n < 0 or m < 0:
        raise ValueError("n and m must be nonnegative")
    lam = check_lambda(lam)
    p = distribution(StateLabel.of(n, 0), lam, eps_tail)
    q = distribution(StateLabel.of(n + m, 0), lam, eps_tail)
    return majorizes(p, q)

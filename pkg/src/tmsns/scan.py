"""Locating lambda thresholds.

Two kinds of boundary are searched:

* where a witness family stops being column-stochastic (a property of the
  matrices alone), and
* where majorization itself first fails on a lambda grid (a property of the
  two distributions; the witness threshold is only a lower bound for it).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import NoSignChange
from .majorization import MajorizationVerdict, Outcome, majorizes
from .schmidt import StateLabel, distribution
from .witness import (
    build_A_00_11,
    build_A_10_11,
    build_A_prime,
    build_D,
    is_column_stochastic,
)

__all__ = [
    "FAMILIES",
    "Method",
    "ScanResult",
    "empirical_boundary",
    "witness_threshold",
]

DEFAULT_LAMBDA_MAX = 0.95
DEFAULT_GRID = 64
DEFAULT_TOL = 1e-6
DEFAULT_WITNESS_SIZE = 64
EPS_RETRY_FACTOR = 1e-3

# family name -> (builder, (p label, q label)) with q = W p
FAMILIES: dict[str, tuple[Callable, tuple[tuple[int, int], tuple[int, int]]]] = {
    "d": (build_D, ((0, 0), (1, 0))),
    "a10-11": (build_A_10_11, ((1, 0), (1, 1))),
    "a00-11": (build_A_00_11, ((0, 0), (1, 1))),
    "a-prime": (build_A_prime, ((0, 0), (1, 1))),
}


class Method(enum.Enum):
    WITNESS_NONNEGATIVITY = "WitnessNonnegativity"
    EMPIRICAL_MAJORIZATION = "EmpiricalMajorization"


@dataclass(frozen=True)
class ScanResult:
    """Bracket ``[boundary_low, boundary_high]`` around a threshold.

    ``boundary_high`` is ``inf`` when no failure was seen up to ``lambda_max``.
    ``samples`` pairs each evaluated lambda with its verdict (a bool for
    witness scans, an :class:`Outcome` for majorization scans), sorted by lambda.
    """

    pair: tuple[StateLabel, StateLabel] | None
    method: Method
    boundary_low: float
    boundary_high: float
    samples: list = field(default_factory=list)

    @property
    def boundary(self) -> float:
        if math.isinf(self.boundary_high):
            return self.boundary_low
        return 0.5 * (self.boundary_low + self.boundary_high)

    @property
    def monotone(self) -> bool:
        """True when no passing sample lies above a failing one."""
        seen_fail = False
        for _, verdict in self.samples:
            if seen_fail and _passes(verdict):
                return False
            seen_fail = seen_fail or _fails(verdict)
        return True


def _passes(verdict) -> bool:
    return verdict if isinstance(verdict, bool) else verdict is Outcome.MAJORIZES


def _fails(verdict) -> bool:
    return (not verdict) if isinstance(verdict, bool) else verdict is Outcome.DOES_NOT_MAJORIZE


def _resolve_family(builder):
    if isinstance(builder, str):
        try:
            return FAMILIES[builder]
        except KeyError:
            raise ValueError(f"unknown witness family {builder!r}; choose from {sorted(FAMILIES)}") from None
    for fn, pair in FAMILIES.values():
        if fn is builder:
            return fn, pair
    return builder, None


def witness_threshold(
    builder,
    lambda_max: float = DEFAULT_LAMBDA_MAX,
    tol: float = DEFAULT_TOL,
    size: int = DEFAULT_WITNESS_SIZE,
    grid: int = DEFAULT_GRID,
) -> ScanResult:
    """Bracket the smallest lambda at which ``builder(lam, size)`` loses stochasticity.

    The grid locates the first failing sample; bisection then narrows the
    bracket below ``tol``.  Monotone loss is only a bracketing hypothesis; the
    grid samples are returned so that a re-entry would be visible.

    Raises
    ------
    NoSignChange
        If every grid point on ``[0, lambda_max]`` is column-stochastic.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    fn, pair = _resolve_family(builder)

    def stochastic(lam: float) -> bool:
        return is_column_stochastic(fn(lam, size)).is_column_stochastic

    lams = np.linspace(0.0, lambda_max, grid)
    samples = [(float(lam), stochastic(lam)) for lam in lams]
    first_bad = next((i for i, (_, ok) in enumerate(samples) if not ok), None)
    if first_bad is None:
        raise NoSignChange(f"witness stays column-stochastic on [0, {lambda_max}]")
    if first_bad == 0:
        raise NoSignChange("witness is not column-stochastic even at lambda = 0")
    lo, hi = samples[first_bad - 1][0], samples[first_bad][0]
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        ok = stochastic(mid)
        samples.append((mid, ok))
        if ok:
            lo = mid
        else:
            hi = mid
    labels = None if pair is None else (StateLabel.of(*pair[0]), StateLabel.of(*pair[1]))
    return ScanResult(labels, Method.WITNESS_NONNEGATIVITY, lo, hi, sorted(samples))


def _verdict(p_label, q_label, lam: float, eps_tail: float) -> MajorizationVerdict:
    verdict = majorizes(distribution(p_label, lam, eps_tail), distribution(q_label, lam, eps_tail))
    if verdict.outcome is Outcome.UNDECIDED:
        tighter = eps_tail * EPS_RETRY_FACTOR
        verdict = majorizes(distribution(p_label, lam, tighter), distribution(q_label, lam, tighter))
    return verdict


def empirical_boundary(
    pair,
    lambda_max: float = DEFAULT_LAMBDA_MAX,
    grid: int = DEFAULT_GRID,
    eps_tail: float = 1e-12,
    tol: float = DEFAULT_TOL,
) -> ScanResult:
    """Bracket the first lambda where ``p > q`` fails.

    ``pair`` is ``(p_label, q_label)``.  Undecided verdicts are retried once
    with a tighter tail; if still undecided during bisection the search stops
    and the (wider) bracket is returned as is.
    """
    if grid < 2:
        raise ValueError("grid must have at least two points")
    p_label, q_label = (StateLabel.of(*lab) if not isinstance(lab, StateLabel) else lab for lab in pair)
    lams = np.linspace(0.0, lambda_max, grid)
    samples = [(float(lam), _verdict(p_label, q_label, lam, eps_tail).outcome) for lam in lams]

    first_bad = next((i for i, (_, o) in enumerate(samples) if o is Outcome.DOES_NOT_MAJORIZE), None)
    if first_bad is None:
        last_good = max((lam for lam, o in samples if o is Outcome.MAJORIZES), default=0.0)
        return ScanResult((p_label, q_label), Method.EMPIRICAL_MAJORIZATION, last_good, math.inf, samples)

    good_before = [i for i in range(first_bad) if samples[i][1] is Outcome.MAJORIZES]
    lo = samples[good_before[-1]][0] if good_before else 0.0
    hi = samples[first_bad][0]
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        outcome = _verdict(p_label, q_label, mid, eps_tail).outcome
        samples.append((mid, outcome))
        if outcome is Outcome.MAJORIZES:
            lo = mid
        elif outcome is Outcome.DOES_NOT_MAJORIZE:
            hi = mid
        else:
            break
    return ScanResult((p_label, q_label), Method.EMPIRICAL_MAJORIZATION, lo, hi, sorted(samples, key=lambda s: s[0]))

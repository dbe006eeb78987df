"""Closed-form Schmidt coefficients of two-mode squeezed number states.

The state ``|psi_{N_A,N_B}(lam)>`` with ``N_A >= N_B`` has the Schmidt form

    sum_m C_m |N_A - N_B + m>_A |m>_B

and its Schmidt-basis distribution is ``p_m = C_m**2``.  Everything here works
on the canonical ordering ``N_A >= N_B``; swapping the two modes leaves the
spectrum unchanged, so :class:`StateLabel` records the swap and moves on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial
from scipy.stats import nbinom

from .errors import TruncationOverflow

__all__ = [
    "DEFAULT_MAX_TERMS",
    "Distribution",
    "SchmidtSpectrum",
    "StateLabel",
    "check_lambda",
    "distribution",
    "monotone_start",
    "negative_binomial_check",
    "schmidt_coefficient",
    "schmidt_spectrum",
]

DEFAULT_MAX_TERMS = 100_000


@dataclass(frozen=True, order=True)
class StateLabel:
    """Excitation numbers ``(n_a, n_b)`` in canonical order ``n_a >= n_b``."""

    n_a: int
    n_b: int
    swapped: bool = field(default=False, compare=False)

    def __post_init__(self):
        if self.n_a < 0 or self.n_b < 0:
            raise ValueError(f"excitation numbers must be nonnegative, got {self.n_a}, {self.n_b}")
        if self.n_a < self.n_b:
            raise ValueError("StateLabel must be canonical; use StateLabel.of()")

    @classmethod
    def of(cls, n_a: int, n_b: int) -> "StateLabel":
        """Build a canonical label, remembering whether the modes were swapped."""
        n_a, n_b = int(n_a), int(n_b)
        if n_a >= n_b:
            return cls(n_a, n_b)
        return cls(n_b, n_a, swapped=True)

    @property
    def offset(self) -> int:
        return self.n_a - self.n_b

    def original(self) -> tuple[int, int]:
        """The (N_A, N_B) pair as the caller wrote it."""
        return (self.n_b, self.n_a) if self.swapped else (self.n_a, self.n_b)

    def __str__(self):
        n_a, n_b = self.original()
        return f"psi_{n_a},{n_b}"


def _as_label(label) -> StateLabel:
    if isinstance(label, StateLabel):
        return label
    return StateLabel.of(*label)


def check_lambda(lam: float) -> float:
    lam = float(lam)
    if not 0.0 <= lam < 1.0:
        raise ValueError(f"squeezing parameter must lie in [0, 1), got {lam!r}")
    return lam


@dataclass(frozen=True)
class SchmidtSpectrum:
    label: StateLabel
    lam: float
    amplitudes: np.ndarray
    tail_mass: float


@dataclass(frozen=True)
class Distribution:
    """Finite prefix ``p_0 .. p_{M-1}`` of a Schmidt distribution.

    ``tail_mass`` is ``1 - sum(probs)`` so the total is one by construction.
    ``tail_certified`` means every omitted term is provably no larger than the
    smallest positive retained term: the tail is monotone from
    :func:`monotone_start` on and the last retained term is the prefix minimum.
    """

    label: StateLabel | None
    lam: float | None
    probs: np.ndarray
    tail_mass: float
    tail_certified: bool

    def __post_init__(self):
        probs = np.array(self.probs, dtype=float)
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    def __len__(self):
        return len(self.probs)

    @classmethod
    def from_probs(cls, probs, tail_mass: float | None = None, certified: bool = True) -> "Distribution":
        """Wrap an explicit finite distribution (tail mass defaults to ``1 - sum``)."""
        probs = np.asarray(probs, dtype=float)
        if np.any(probs < 0):
            raise ValueError("probabilities must be nonnegative")
        if tail_mass is None:
            tail_mass = 1.0 - math.fsum(probs)
        return cls(None, None, probs, float(tail_mass), certified)


def _log_factorial(n: int) -> float:
    return math.lgamma(n + 1)


def schmidt_coefficient(label, m: int, lam: float) -> float:
    """Schmidt coefficient ``C_m(N_A, N_B, lam)`` (may be negative).

    The alternating sum over ``k`` is evaluated term by term in log space with
    explicit signs and accumulated with :func:`math.fsum`.
    """
    label = _as_label(label)
    lam = check_lambda(lam)
    m = int(m)
    if m < 0:
        raise ValueError("Schmidt index must be nonnegative")
    n_a, n_b, d = label.n_a, label.n_b, label.offset
    if lam == 0.0:
        return 1.0 if m == n_b else 0.0

    log_lam = math.log(lam)
    log_1mx = math.log1p(-lam * lam)
    log_norm = 0.5 * (
        _log_factorial(n_a) + _log_factorial(n_b) + _log_factorial(d + m) + _log_factorial(m)
    )
    terms = []
    for k in range(min(m, n_b) + 1):
        log_mag = (
            k * log_1mx
            + (n_b - k + m - k) * log_lam
            + log_norm
            - _log_factorial(k)
            - _log_factorial(m - k)
            - _log_factorial(d + k)
            - _log_factorial(n_b - k)
        )
        sign = -1.0 if (n_b - k) % 2 else 1.0
        terms.append(sign * math.exp(log_mag))
    return math.exp(0.5 * (d + 1) * log_1mx) * math.fsum(terms)


def schmidt_spectrum(label, lam: float, count: int) -> SchmidtSpectrum:
    """First ``count`` Schmidt coefficients with the exact leftover mass."""
    label = _as_label(label)
    lam = check_lambda(lam)
    amps = np.array([schmidt_coefficient(label, m, lam) for m in range(count)])
    return SchmidtSpectrum(label, lam, amps, 1.0 - math.fsum(amps**2))


def monotone_start(label, lam: float) -> int:
    """Index from which ``p_m`` is provably nonincreasing.

    Writing ``p_m = const * x**m * prod_{i<=d}(m + i) * R(m)**2`` with
    ``x = lam**2`` and ``R`` a degree-``N_B`` polynomial, every root ``r`` of
    ``R`` obeys ``|r| <= B`` (the smaller of the Cauchy and Fujiwara bounds),
    so for ``m > B``

        p_{m+1} / p_m <= x * (1 + 1/(m+1))**d * (1 + 1/(m - B))**(2 N_B).

    The right side decreases in ``m``; the first ``m`` where it drops to one
    starts the monotone tail.
    """
    label = _as_label(label)
    lam = check_lambda(lam)
    x = lam * lam
    if x == 0.0:
        return label.n_b
    d, n_b = label.offset, label.n_b

    if n_b == 0:
        bound = -1.0
    else:
        # R scaled by ((1 - x) / x)**(-N_B): same roots, no overflow for tiny x
        inv_ratio = x / (1.0 - x)
        poly = Polynomial([0.0])
        falling = Polynomial([1.0])
        for k in range(n_b + 1):
            weight = (-1.0) ** k * inv_ratio ** (n_b - k) / (
                math.factorial(k) * math.factorial(d + k) * math.factorial(n_b - k)
            )
            poly = poly + weight * falling
            falling = falling * Polynomial([-k, 1.0])
        coef = poly.coef / poly.coef[-1]
        deg = len(coef) - 1
        cauchy = 1.0 + float(np.max(np.abs(coef[:-1])))
        fujiwara = 2.0 * max(abs(coef[deg - i]) ** (1.0 / i) for i in range(1, deg + 1))
        bound = min(cauchy, fujiwara)

    def ratio_bound(m: int) -> float:
        value = x * (1.0 + 1.0 / (m + 1)) ** d
        if n_b:
            value *= (1.0 + 1.0 / (m - bound)) ** (2 * n_b)
        return value

    lo = max(0, math.floor(bound) + 1)
    if ratio_bound(lo) <= 1.0:
        return lo
    hi = lo + 1
    while ratio_bound(hi) > 1.0:
        hi = lo + 2 * (hi - lo)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ratio_bound(mid) > 1.0:
            lo = mid
        else:
            hi = mid
    return hi


def _initial_length(label: StateLabel, lam: float, eps_tail: float) -> int:
    base = label.n_a + label.n_b + 16
    if lam * lam == 0.0:
        return base
    return math.ceil(math.log(eps_tail) / math.log(lam * lam)) + base


def _is_certified(probs: np.ndarray, tail_mass: float, start: int) -> bool:
    if tail_mass == 0.0:
        return True
    if len(probs) - 1 < start:
        return False
    positive = probs[probs > 0]
    if positive.size == 0:
        return False
    return probs[-1] <= positive.min()


def distribution(label, lam: float, eps_tail: float = 1e-12, max_terms: int = DEFAULT_MAX_TERMS) -> Distribution:
    """Certified prefix of ``|C_m|**2`` whose exact tail mass is at most ``eps_tail``.

    Raises
    ------
    TruncationOverflow
        If more than ``max_terms`` terms would be required.
    """
    label = _as_label(label)
    lam = check_lambda(lam)
    if not 0.0 < eps_tail < 1.0:
        raise ValueError(f"eps_tail must lie in (0, 1), got {eps_tail!r}")

    start = monotone_start(label, lam)
    length = min(max(_initial_length(label, lam, eps_tail), start + 2), max_terms)
    probs: list[float] = []
    while True:
        probs.extend(schmidt_coefficient(label, m, lam) ** 2 for m in range(len(probs), length))
        arr = np.array(probs)
        tail = 1.0 - math.fsum(probs)
        if tail <= eps_tail and _is_certified(arr, tail, start):
            return Distribution(label, lam, arr, tail, True)
        if length >= max_terms:
            raise TruncationOverflow(
                f"{label} at lambda={lam} needs more than {max_terms} terms for tail {eps_tail:g}"
            )
        length = min(max_terms, length + max(16, length // 4))


def negative_binomial_check(n: int, lam: float, count: int) -> float:
    """Largest deviation of ``p_{n,0}`` from the negative binomial law.

    ``p_{n,0}(m) = (1 - lam**2)**(n+1) * binom(n+m, m) * lam**(2m)``, i.e. the
    number of failures before ``n + 1`` successes with success probability
    ``1 - lam**2``.
    """
    lam = check_lambda(lam)
    if count < 1:
        raise ValueError("count must be at least 1")
    label = StateLabel.of(n, 0)
    m = np.arange(count)
    ours = np.array([schmidt_coefficient(label, k, lam) ** 2 for k in m])
    reference = nbinom.pmf(m, n + 1, 1.0 - lam * lam)
    return float(np.max(np.abs(ours - reference)))

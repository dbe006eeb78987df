"""Column-stochastic witnesses ``q = W p`` between Schmidt distributions.

A lower-triangular Toeplitz matrix is stored through its first column
``a_0 .. a_{K-1}``; its action on a vector is a causal convolution.  The
modified matrix ``A'`` is not Toeplitz near the top-left corner and is stored
densely together with the rule that generates it.

Every witness also knows the exact mass of its column entries below the
truncation (``tail``), derived in closed form for the analytic families, so
unit column sums can be checked on a finite block.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import solve_triangular, toeplitz

from .errors import DivisionByZeroMass, IncompatibleTruncation, UncertifiedTail
from .schmidt import Distribution, check_lambda

__all__ = [
    "COLSUM_TOL",
    "NONNEG_TOL",
    "THRESHOLD_00_11",
    "THRESHOLD_00_11_PRIME",
    "THRESHOLD_10_11",
    "DenseWitness",
    "Kind",
    "StochasticityReport",
    "ToeplitzWitness",
    "a_00_11",
    "build_A_00_11",
    "build_A_10_11",
    "build_A_prime",
    "build_D",
    "is_column_stochastic",
    "toeplitz_deconvolve",
    "verify_witness",
]

NONNEG_TOL = 1e-12
COLSUM_TOL = 1e-10

THRESHOLD_10_11 = math.sqrt((2.0 - math.sqrt(2.0)) / 2.0)
THRESHOLD_00_11 = 1.0 / math.sqrt(3.0)
THRESHOLD_00_11_PRIME = math.sqrt((9.0 - math.sqrt(21.0)) / 10.0)


class Kind(enum.Enum):
    D_CHAIN = "D_chain"
    A_10_11 = "A_10_11"
    A_00_11 = "A_00_11"
    A_PRIME = "A_prime"
    DECONVOLVED = "Deconvolved"
    PRODUCT = "Product"


@dataclass(frozen=True)
class ToeplitzWitness:
    """Lower-triangular Toeplitz matrix with entry ``(i, j) = coeffs[i - j]``.

    ``tail`` is the sum of the coefficients past the stored ones, so
    ``coeffs.sum() + tail`` is the exact column sum.
    """

    lam: float | None
    coeffs: np.ndarray
    kind: Kind
    tail: float = 0.0

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=float)
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def size(self) -> int:
        return len(self.coeffs)

    @property
    def column_sum(self) -> float:
        return math.fsum(self.coeffs) + self.tail

    def matrix(self) -> np.ndarray:
        return toeplitz(self.coeffs, np.zeros(self.size))

    def apply(self, p: np.ndarray) -> np.ndarray:
        """First ``min(K, len(p))`` entries of ``W p``."""
        p = np.asarray(p, dtype=float)
        n = min(self.size, len(p))
        return np.convolve(self.coeffs[:n], p[:n])[:n]

    def compose(self, other: "ToeplitzWitness") -> "ToeplitzWitness":
        """``self @ other``, again lower-triangular Toeplitz."""
        n = min(self.size, other.size)
        coeffs = np.convolve(self.coeffs[:n], other.coeffs[:n])[:n]
        total = self.column_sum * other.column_sum
        return ToeplitzWitness(self.lam, coeffs, Kind.PRODUCT, total - math.fsum(coeffs))

    def power(self, m: int) -> "ToeplitzWitness":
        if m < 0:
            raise ValueError("power must be nonnegative")
        identity = np.zeros(self.size)
        identity[0] = 1.0
        out = ToeplitzWitness(self.lam, identity, Kind.PRODUCT)
        for _ in range(m):
            out = out.compose(self)
        return out


@dataclass(frozen=True)
class DenseWitness:
    """Explicit ``K x K`` block of a non-Toeplitz witness.

    ``column_tails[j]`` is the exact mass of column ``j`` below row ``K - 1``.
    """

    lam: float
    entries: np.ndarray
    column_tails: np.ndarray
    kind: Kind = Kind.A_PRIME
    generator: Callable[[int, int], float] | None = field(default=None, repr=False, compare=False)

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    @property
    def column_sums(self) -> np.ndarray:
        return self.entries.sum(axis=0) + self.column_tails

    def matrix(self) -> np.ndarray:
        return self.entries

    def apply(self, p: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        n = min(self.size, len(p))
        return self.entries[:n, :n] @ p[:n]


@dataclass(frozen=True)
class StochasticityReport:
    """``first_negative`` is ``(row, column, value)`` with 0-based indices."""

    is_column_stochastic: bool
    first_negative: tuple[int, int, float] | None
    max_row_sum: float
    max_column_error: float


def _check_size(k: int, minimum: int = 1) -> int:
    k = int(k)
    if k < minimum:
        raise ValueError(f"witness size must be at least {minimum}, got {k}")
    return k


def build_D(lam: float, K: int) -> ToeplitzWitness:
    """Chain matrix with ``a_n = (1 - lam^2) lam^(2n)``; column-stochastic on ``[0, 1)``."""
    lam, K = check_lambda(lam), _check_size(K)
    x = lam * lam
    coeffs = (1.0 - x) * x ** np.arange(K)
    return ToeplitzWitness(lam, coeffs, Kind.D_CHAIN, x**K)


def build_A_10_11(lam: float, K: int) -> ToeplitzWitness:
    """Witness for ``p_11 = A p_10``.

    After the ``1/(1 - lam^2)`` prefactor: ``a_0 = lam^2``,
    ``a_1 = 2(1 - lam^2)^2 - 1``, ``a_n = 2 lam^(2(n-1)) (1 - lam^2)^2``.
    """
    lam, K = check_lambda(lam), _check_size(K)
    x = lam * lam
    n = np.arange(K)
    coeffs = 2.0 * (1.0 - x) * x ** np.maximum(n - 1, 0)
    coeffs[0] = x / (1.0 - x)
    if K > 1:
        coeffs[1] = (2.0 * (1.0 - x) ** 2 - 1.0) / (1.0 - x)
    tail = 2.0 * x ** (K - 1) if K >= 2 else (1.0 - 2.0 * x) / (1.0 - x)
    return ToeplitzWitness(lam, coeffs, Kind.A_10_11, tail)


def a_00_11(lam: float, n) -> np.ndarray:
    """Closed form ``a_0 = lam^2``, ``a_n = lam^(2(n-1)) (lam^4 + 2n(1 - lam^2)^2 - 1)``."""
    x = lam * lam
    n = np.asarray(n)
    out = x ** np.maximum(n - 1, 0) * (x * x + 2.0 * n * (1.0 - x) ** 2 - 1.0)
    return np.where(n == 0, x, out)


def _a_00_11_tail(x: float, start: int) -> float:
    # sum_{n >= start} a_n for start >= 1
    return x ** (start - 1) * (1.0 - x) * (2 * start - 1)


def build_A_00_11(lam: float, K: int) -> ToeplitzWitness:
    """Witness for ``p_11 = A p_00``; ``a_1 >= 0`` exactly when ``lam <= 1/sqrt(3)``."""
    lam, K = check_lambda(lam), _check_size(K)
    x = lam * lam
    coeffs = a_00_11(lam, np.arange(K)).astype(float)
    return ToeplitzWitness(lam, coeffs, Kind.A_00_11, _a_00_11_tail(x, K))


def _a_prime_rule(lam: float) -> tuple[Callable[[int, int], float], Callable[[int], tuple[int, int]]]:
    """Entry generator of ``A'`` and, per column, (row offset, first plain row).

    Column layout (0-based rows):
      col 0: lam^2 - lam^4, 4lam^4 - 4lam^2 + 1, then a_2, a_3, ... from row 2
      col 1: lam^2 - lam^4, 0, 4lam^4 - 4lam^2 + 1, then a_k at row k + 1
      col 2: lam^2, 0, 0, 4lam^4 - 4lam^2 + 1, 5lam^6 - 9lam^4 + 3lam^2, then a_k at row k + 2
      col j >= 3: zero down to row j, then 4lam^4 - 3lam^2 + 1,
                  5lam^6 - 9lam^4 + 3lam^2, then a_k at row j + k
    Here a_k are the coefficients of ``build_A_00_11``.
    """
    x = lam * lam
    head = x - x * x
    shifted_one = 4 * x * x - 4 * x + 1
    modified_one = 4 * x * x - 3 * x + 1
    modified_two = 5 * x**3 - 9 * x * x + 3 * x

    def a(k: int) -> float:
        return float(a_00_11(lam, k))

    def entry(i: int, j: int) -> float:
        if j in (0, 1):
            if i == 0:
                return head
            k = i - j
            if k < 1:
                return 0.0
            return shifted_one if k == 1 else a(k)
        if j == 2:
            if i == 0:
                return x
            k = i - 2
            if k < 1:
                return 0.0
            if k == 1:
                return shifted_one
            return modified_two if k == 2 else a(k)
        k = i - j
        if k < 1:
            return 0.0
        if k == 1:
            return modified_one
        return modified_two if k == 2 else a(k)

    def layout(j: int) -> tuple[int, int]:
        # rows >= first_plain hold a_{row - offset} exactly
        if j == 0:
            return 0, 2
        if j == 1:
            return 1, 3
        return j, j + 3

    return entry, layout


def build_A_prime(lam: float, K: int) -> DenseWitness:
    """Modified witness for ``p_11 = A' p_00``, stochastic up to ``sqrt((9 - sqrt 21)/10)``."""
    lam, K = check_lambda(lam), _check_size(K, minimum=6)
    x = lam * lam
    entry, layout = _a_prime_rule(lam)
    a = a_00_11(lam, np.arange(K)).astype(float)
    lagged = a.copy()
    lagged[0] = 0.0
    lagged[1] = 4 * x * x - 3 * x + 1
    lagged[2] = 5 * x**3 - 9 * x * x + 3 * x
    entries = toeplitz(lagged, np.zeros(K))
    for j in range(3):
        entries[:, j] = [entry(i, j) for i in range(K)]
    tails = np.empty(K)
    for j in range(K):
        offset, first_plain = layout(j)
        explicit = math.fsum(entry(i, j) for i in range(K, first_plain))
        tails[j] = explicit + _a_00_11_tail(x, max(K, first_plain) - offset)
    return DenseWitness(lam, entries, tails, Kind.A_PRIME, entry)


def is_column_stochastic(w, tol: float = NONNEG_TOL, colsum_tol: float = COLSUM_TOL) -> StochasticityReport:
    """Nonnegative entries, unit column sums, row sums at most one.

    Row sums are taken over the stored block; for both witness types every
    stored row is complete, since row ``i`` has no entries right of column
    ``max(i, 2)``.
    """
    if isinstance(w, ToeplitzWitness):
        coeffs = w.coeffs
        negative = np.flatnonzero(coeffs < -tol)
        first = (int(negative[0]), 0, float(coeffs[negative[0]])) if negative.size else None
        row_sums = np.cumsum(coeffs)
        max_row = float(row_sums.max())
        col_error = abs(w.column_sum - 1.0)
        if w.kind is Kind.DECONVOLVED and w.tail < -colsum_tol:
            col_error = max(col_error, -w.tail)
    else:
        entries = w.entries
        rows, cols = np.nonzero(entries < -tol)
        first = (int(rows[0]), int(cols[0]), float(entries[rows[0], cols[0]])) if rows.size else None
        max_row = float(entries.sum(axis=1).max())
        col_error = float(np.max(np.abs(w.column_sums - 1.0)))
    ok = first is None and col_error <= colsum_tol and max_row <= 1.0 + colsum_tol
    return StochasticityReport(ok, first, max_row, col_error)


def verify_witness(w, p: Distribution, q: Distribution) -> float:
    """``max |q_m - (W p)_m|`` over the rows fixed by all three truncations."""
    if not (p.tail_certified and q.tail_certified):
        raise UncertifiedTail("verify_witness needs certified distributions")
    rows = min(w.size, len(p), len(q))
    if isinstance(w, DenseWitness) and len(p) < 3:
        rows = 0
    if rows < 1:
        raise IncompatibleTruncation(
            f"no fully determined rows (witness {w.size}, p {len(p)}, q {len(q)})"
        )
    image = w.apply(p.probs[: min(w.size, len(p))])[:rows]
    return float(np.max(np.abs(q.probs[:rows] - image)))


def toeplitz_deconvolve(p: Distribution, q: Distribution, K: int | None = None) -> ToeplitzWitness:
    """Lower-triangular Toeplitz ``W`` with ``q = W p`` on the first ``K`` rows.

    Works in natural index order.  Solves ``P a = q`` by forward substitution
    where ``P`` is the Toeplitz matrix of ``p``, which is the same recursion as
    ``a_n = (q_n - sum_{j=1}^n a_{n-j} p_j) / p_0``.
    """
    if not (p.tail_certified and q.tail_certified):
        raise UncertifiedTail("toeplitz_deconvolve needs certified distributions")
    limit = min(len(p), len(q))
    K = limit if K is None else _check_size(K)
    if K > limit:
        raise IncompatibleTruncation(f"K={K} exceeds the shorter prefix ({limit})")
    if not p.probs[0] > 0.0:
        raise DivisionByZeroMass("leading mass p_0 vanishes")
    lower = toeplitz(p.probs[:K], np.zeros(K))
    coeffs = solve_triangular(lower, q.probs[:K], lower=True)
    # both sequences are normalized, so the full coefficient sum is one
    return ToeplitzWitness(p.lam, coeffs, Kind.DECONVOLVED, 1.0 - math.fsum(coeffs))

"""Brute-force TMSNS construction in a truncated two-mode Fock space.

States are dense real matrices ``amp[i, j] = <i, j|psi>`` with ``0 <= i, j <=
cutoff``.  The coupled ladder operators

    A = (a - lam b^dag) / sqrt(1 - lam^2),   B = (b - lam a^dag) / sqrt(1 - lam^2)

act as shifted, weighted copies of the matrix.  Nothing here uses the closed
form for ``C_m``; the module exists to check it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CutoffTooSmall
from .schmidt import StateLabel, check_lambda

__all__ = [
    "DEFAULT_DEFICIT_BOUND",
    "TruncatedTwoModeState",
    "apply_coupled",
    "apply_coupled_creation",
    "band_amplitudes",
    "expectation",
    "off_band_max",
    "oracle_state",
    "tmsv",
]

DEFAULT_DEFICIT_BOUND = 1e-10


@dataclass(frozen=True)
class TruncatedTwoModeState:
    """Amplitude matrix plus the squared norm lost past the cutoff.

    ``norm_deficit`` is tracked, not measured: the vacuum starts with its exact
    geometric leakage and each raising step adds what it pushes out.  For a
    normalized target state it equals ``1 - sum(amp**2)`` in exact arithmetic;
    :attr:`measured_deficit` is that float difference.
    """

    cutoff: int
    amp: np.ndarray
    norm_deficit: float = 0.0

    @property
    def norm2(self) -> float:
        return math.fsum(np.ravel(self.amp) ** 2)

    @property
    def measured_deficit(self) -> float:
        return 1.0 - self.norm2

    def scaled(self, factor: float) -> "TruncatedTwoModeState":
        return TruncatedTwoModeState(self.cutoff, self.amp * factor, self.norm_deficit * factor**2)


def tmsv(lam: float, cutoff: int) -> TruncatedTwoModeState:
    """Two-mode squeezed vacuum ``sqrt(1 - lam^2) sum_n lam^n |n, n>`` truncated at ``cutoff``."""
    lam = check_lambda(lam)
    if cutoff < 0:
        raise ValueError("cutoff must be nonnegative")
    n = np.arange(cutoff + 1)
    amp = np.diag(math.sqrt(1.0 - lam * lam) * lam**n)
    return TruncatedTwoModeState(cutoff, amp, (lam * lam) ** (cutoff + 1))


def _lower(amp: np.ndarray, axis: int) -> np.ndarray:
    # a|i> = sqrt(i)|i-1>, so (a psi)[i] = sqrt(i+1) psi[i+1]
    out = np.zeros_like(amp)
    root = np.sqrt(np.arange(1, amp.shape[axis]))
    if axis == 0:
        out[:-1, :] = root[:, None] * amp[1:, :]
    else:
        out[:, :-1] = amp[:, 1:] * root[None, :]
    return out


def _raise(amp: np.ndarray, axis: int) -> tuple[np.ndarray, float]:
    # (a^dag psi)[i] = sqrt(i) psi[i-1]; the row pushed to cutoff+1 is lost
    out = np.zeros_like(amp)
    size = amp.shape[axis]
    root = np.sqrt(np.arange(1, size))
    if axis == 0:
        out[1:, :] = root[:, None] * amp[:-1, :]
        lost = size * math.fsum(amp[-1, :] ** 2)
    else:
        out[:, 1:] = amp[:, :-1] * root[None, :]
        lost = size * math.fsum(amp[:, -1] ** 2)
    return out, lost


def apply_coupled(state: TruncatedTwoModeState, which: str, lam: float, dagger: bool) -> TruncatedTwoModeState:
    """Apply ``A``, ``A^dag``, ``B`` or ``B^dag`` (not renormalized).

    ``which`` is ``"A"`` or ``"B"``.  Mass pushed past the cutoff by a raising
    part is added to ``norm_deficit``.
    """
    lam = check_lambda(lam)
    if which not in ("A", "B"):
        raise ValueError(f"which must be 'A' or 'B', got {which!r}")
    if state.cutoff < 1:
        raise ValueError("coupled operators need cutoff >= 1")
    own, other = (0, 1) if which == "A" else (1, 0)
    scale = 1.0 / math.sqrt(1.0 - lam * lam)
    if dagger:
        # A^dag = (a^dag - lam b) / sqrt(1 - lam^2)
        raised, lost = _raise(state.amp, own)
        amp = scale * (raised - lam * _lower(state.amp, other))
    else:
        # A = (a - lam b^dag) / sqrt(1 - lam^2)
        raised, lost = _raise(state.amp, other)
        amp = scale * (_lower(state.amp, own) - lam * raised)
        lost *= lam * lam
    return TruncatedTwoModeState(state.cutoff, amp, state.norm_deficit + scale**2 * lost)


def apply_coupled_creation(state: TruncatedTwoModeState, which: str, lam: float) -> TruncatedTwoModeState:
    return apply_coupled(state, which, lam, dagger=True)


def oracle_state(label, lam: float, cutoff: int, deficit_bound: float = DEFAULT_DEFICIT_BOUND) -> TruncatedTwoModeState:
    """``(A^dag)^{N_A} (B^dag)^{N_B} |psi_00> / sqrt(N_A! N_B!)`` built by brute force.

    ``label`` may be a :class:`StateLabel` or a raw ``(N_A, N_B)`` pair; a raw
    pair is used as written (no canonical swap), so the swap symmetry can be
    checked.
    """
    n_a, n_b = label.original() if isinstance(label, StateLabel) else (int(label[0]), int(label[1]))
    lam = check_lambda(lam)
    if cutoff < n_a + n_b + 1:
        raise CutoffTooSmall(f"cutoff {cutoff} is below N_A + N_B + 1 = {n_a + n_b + 1}")
    state = tmsv(lam, cutoff)
    for _ in range(n_b):
        state = apply_coupled_creation(state, "B", lam)
    for _ in range(n_a):
        state = apply_coupled_creation(state, "A", lam)
    state = state.scaled(1.0 / math.sqrt(math.factorial(n_a) * math.factorial(n_b)))
    # truncation can also inflate the norm, so the measured mismatch counts too
    deficit = max(state.norm_deficit, abs(state.measured_deficit))
    if deficit > deficit_bound:
        raise CutoffTooSmall(
            f"cutoff {cutoff} gives norm deficit {deficit:.3g} > {deficit_bound:g} for ({n_a},{n_b}) at lambda={lam}"
        )
    return state


def band_amplitudes(state: TruncatedTwoModeState, offset: int) -> np.ndarray:
    """Amplitudes on the band ``i - j = offset`` ordered by the smaller index."""
    return np.diagonal(state.amp, offset=-offset).copy()


def off_band_max(state: TruncatedTwoModeState, offset: int) -> float:
    i, j = np.indices(state.amp.shape)
    mask = (i - j) != offset
    return float(np.max(np.abs(state.amp[mask]), initial=0.0))


def expectation(state: TruncatedTwoModeState, which: str, lam: float, power: int = 1) -> float:
    """``<psi| N^power |psi>`` for the coupled number operator ``N = X^dag X``."""
    vec = state
    for _ in range(power):
        vec = apply_coupled(vec, which, lam, dagger=False)
        vec = apply_coupled(vec, which, lam, dagger=True)
    return float(np.sum(state.amp * vec.amp))

"""Schmidt spectra, majorization and stochastic Toeplitz witnesses for
two-mode squeezed number states."""

__version__ = "0.1.0"

from .errors import (
    CutoffTooSmall,
    DivisionByZeroMass,
    IncompatibleTruncation,
    NoSignChange,
    TmsnsError,
    TruncationOverflow,
    UncertifiedTail,
)
from .fock import TruncatedTwoModeState, apply_coupled_creation, oracle_state, tmsv
from .majorization import MajorizationVerdict, Outcome, chain_check, majorizes, sort_descending
from .scan import ScanResult, empirical_boundary, witness_threshold
from .schmidt import (
    Distribution,
    SchmidtSpectrum,
    StateLabel,
    distribution,
    negative_binomial_check,
    schmidt_coefficient,
    schmidt_spectrum,
)
from .witness import (
    DenseWitness,
    StochasticityReport,
    ToeplitzWitness,
    build_A_00_11,
    build_A_10_11,
    build_A_prime,
    build_D,
    is_column_stochastic,
    toeplitz_deconvolve,
    verify_witness,
)

"""Estimate Markov transition matrices from samples and evaluate the spectral
gaps and error bounds that govern them."""

from .core import (
    Distribution,
    RowStochasticMatrix,
    is_irreducible,
    is_reversible,
    nu_over_mu_inf,
    stationary_distribution,
    validate_distribution,
    validate_matrix,
    weighted_inner,
    whiten,
)
from .estimators import TransitionEstimate, frobenius_error, mle_estimate, sce_estimate
from .gaps import GapReport, absolute_gap, gap_report, ip_gap, pseudo_gap, spectral_gap, symmetric_gap
from .path_space import (
    build_p2,
    build_tilde_p2,
    factor_path_kernels,
    factor_sym_kernels,
    verify_spectral_identities,
)
from .sampling import (
    ChainPath,
    MatrixOracle,
    RandomSource,
    adjust_gap,
    lazy_cycle,
    oracle_from_matrix,
    random_reversible,
    simulate_chain,
)

__version__ = "0.1.0"

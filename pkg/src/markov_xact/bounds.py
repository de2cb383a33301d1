"""Closed-form tail and mean-square-error bounds for the two estimators.

Tail bounds are probabilities and are clamped to [0, 1].  A zero gap makes a
tail bound vacuous: the function returns 1.0 and emits
:class:`VacuousBoundWarning` instead of raising.
"""

from __future__ import annotations

import math
import warnings

from .errors import InvalidInput

PI = math.pi
# constants of the matrix Bernstein inequality, kept symbolic in pi
MATRIX_VAR_COEF = 32 / PI**2
MATRIX_SUP_COEF = 256 / PI**3
DIM_EXPONENT = 2 - PI / 4


class VacuousBoundWarning(UserWarning):
    pass


def _check(n, t=None, nu_ratio=1.0, **nonneg):
    if n < 1:
        raise InvalidInput(f"n must be >= 1, got {n}")
    if t is not None and not t > 0:
        raise InvalidInput(f"t must be > 0, got {t}")
    if nu_ratio < 1 - 1e-12:
        raise InvalidInput(f"nu_ratio = ||nu/mu||_inf is at least 1, got {nu_ratio}")
    for name, value in nonneg.items():
        if value < 0:
            raise InvalidInput(f"{name} must be nonnegative, got {value}")


def _clamp(x: float) -> float:
    return min(1.0, max(0.0, x))


def _vacuous(gap_name: str) -> float:
    warnings.warn(f"{gap_name} = 0: the bound is vacuous", VacuousBoundWarning, stacklevel=3)
    return 1.0


def scalar_bernstein_bound(n, eta_p, sigma2, M, t, nu_ratio=1.0) -> float:
    """P(|mean of g over n steps| >= t) for a chain with IP gap eta_p.

    ``g`` is centred under the stationary law with variance at most sigma2
    and sup-norm at most M.
    """
    _check(n, t, nu_ratio, eta_p=eta_p, sigma2=sigma2)
    if not M > 0:
        raise InvalidInput(f"M must be > 0, got {M}")
    if eta_p == 0:
        return _vacuous("eta_p")
    denom = 4 * M * math.sqrt((2 + 6 * eta_p) ** 2 * sigma2 + t * t)
    return _clamp(2 * nu_ratio * math.exp(-n * eta_p * t * t / denom))


def matrix_bernstein_bound(n, eta_a, sigma2, M, t, d, nu_ratio=1.0) -> float:
    """P(||mean of G over n steps|| >= t) for d x d Hermitian G, absolute gap eta_a."""
    _check(n, t, nu_ratio, eta_a=eta_a, sigma2=sigma2)
    if not M > 0:
        raise InvalidInput(f"M must be > 0, got {M}")
    if d < 1:
        raise InvalidInput(f"d must be >= 1, got {d}")
    if eta_a == 0:
        return _vacuous("eta_a")
    denom = MATRIX_VAR_COEF * (2 - eta_a) * sigma2 + MATRIX_SUP_COEF * M * t
    return _clamp(2 * nu_ratio * d**DIM_EXPONENT * math.exp(-n * eta_a * t * t / denom))


def mle_tail_bound(n, t, eta_p, mu2_uv, nu_ratio=1.0) -> float:
    """P(|r_n(u,v) - mu(u)p(u,v)| >= t) for the pair-counting estimator.

    The pair chain has IP gap at least eta_p / (1 + eta_p); the indicator of
    (u, v) is bounded by 1 with variance at most mu(u)p(u,v).
    """
    _check(n, t, nu_ratio, eta_p=eta_p, mu2_uv=mu2_uv)
    gamma = eta_p / (1 + eta_p)
    return scalar_bernstein_bound(n, gamma, mu2_uv, 1.0, t, nu_ratio)


def sce_tail_bound(n, t, eta, d, nu_ratio=1.0) -> float:
    """P(||H_n - D_mu P|| >= t) for symmetric counting on a reversible chain.

    Written out directly; agrees with :func:`matrix_bernstein_bound` at
    ``eta_a = eta/2`` and ``M = sigma2 = 2``.
    """
    _check(n, t, nu_ratio, eta=eta)
    if d < 1:
        raise InvalidInput(f"d must be >= 1, got {d}")
    if eta == 0:
        return _vacuous("eta")
    denom = 128 / PI**2 * (2 - eta / 2) + 1024 / PI**3 * t
    return _clamp(2 * nu_ratio * d**DIM_EXPONENT * math.exp(-n * eta * t * t / denom))


def mle_mse_bound(n, eta_p, eta_a=None, eta=None, nu_ratio=1.0) -> float:
    """Upper bound on E||R_n - D_mu P||_F^2.

    Takes the smallest of the applicable forms: the IP-gap form always, the
    absolute-gap form when ``eta_a > 0`` is given, the reversible form when
    the spectral gap ``eta`` is given.
    """
    _check(n, None, nu_ratio)
    if not eta_p > 0:
        raise InvalidInput(f"eta_p must be > 0, got {eta_p}")
    candidates = [(4 + eta_p) / (n * eta_p)]
    if eta_a is not None and eta_a > 0:
        candidates.append((2 + eta_a) / (n * eta_a))
    if eta is not None:
        if not eta > 0:
            raise InvalidInput(f"eta must be > 0, got {eta}")
        candidates.append((2 + eta) / (n * eta))
    return nu_ratio * min(candidates)


def sce_mse_bound(n, eta, nu_ratio=1.0) -> float:
    """Upper bound on E||H_n - D_mu P||_F^2 for a reversible chain with gap eta."""
    _check(n, None, nu_ratio)
    if not 0 < eta <= 1:
        raise InvalidInput(f"eta must lie in (0, 1], got {eta}")
    return nu_ratio * (4 - eta) / (n * eta)

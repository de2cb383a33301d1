"""The five gap quantities of a finite chain in the L2(mu) geometry.

All computations happen on the whitened matrix ``W = D^{1/2} P D^{-1/2}``,
where mu-adjoints become transposes.  The mean-zero subspace of L2(mu) maps
to the orthogonal complement of ``sqrt(mu)``; :func:`complement_basis` builds
an orthonormal basis of it with one Householder reflection, so "restricted to
mean-zero functions" is an explicit ``Q^T W Q`` rather than a guess about
which eigenvalue to drop.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .core import (
    as_distribution,
    as_matrix,
    detailed_balance_residual,
    is_irreducible,
    stationary_distribution,
    whiten,
)
from .errors import NotIrreducible, NotReversible

GAP_CHECK_TOL = 1e-9
TIE_TOL = 1e-11


def complement_basis(mu) -> np.ndarray:
    """Orthonormal d x (d-1) basis of the complement of ``sqrt(mu)``.

    Uses the Householder reflector H mapping ``sqrt(mu)`` onto ``-sign * e_0``;
    columns 1..d-1 of H span the complement.
    """
    s = np.sqrt(np.asarray(mu, dtype=float))
    d = s.size
    v = s.copy()
    v[0] += np.copysign(1.0, s[0]) * np.linalg.norm(s)
    H = np.eye(d) - 2.0 * np.outer(v, v) / (v @ v)
    return H[:, 1:]


def restrict_to_support(P, mu):
    """Drop zero-mass states; their functions vanish in L2(mu).

    Only valid when the support of mu is closed under P, which holds for the
    stationary law of any chain.
    """
    a = np.asarray(P, dtype=float)
    m = np.asarray(mu, dtype=float)
    keep = m > 0
    if keep.all():
        return a, m
    sub = a[np.ix_(keep, keep)]
    return sub / sub.sum(axis=1, keepdims=True), m[keep] / m[keep].sum()


def _prepare(P, mu, check: bool = True):
    if check and not is_irreducible(P):
        raise NotIrreducible("gap requires an irreducible chain")
    a, m = restrict_to_support(P, mu)
    return a, m


def _projected(M: np.ndarray, mu: np.ndarray) -> np.ndarray:
    Q = complement_basis(mu)
    return Q.T @ M @ Q


def _top_eig_on_complement(W: np.ndarray, mu: np.ndarray) -> float:
    d = W.shape[0]
    if d == 1:
        return 0.0
    A = _projected(W, mu)
    A = 0.5 * (A + A.T)
    return float(np.linalg.eigvalsh(A)[-1])


def spectral_gap(P, mu=None, *, check: bool = True) -> float:
    """1 - lambda_2 for a reversible chain (lambda_2 second-largest eigenvalue)."""
    P = as_matrix(P)
    mu = stationary_distribution(P) if mu is None else as_distribution(mu)
    if check and detailed_balance_residual(P, mu) > GAP_CHECK_TOL:
        raise NotReversible("spectral gap is defined here for reversible chains only")
    # W is symmetric up to rounding here, so this is the symmetric gap
    return symmetric_gap(P, mu, check=check)


def second_eigenvalue(P, mu=None) -> float:
    return 1.0 - spectral_gap(P, mu)


def ip_gap(P, mu=None, *, check: bool = True) -> float:
    """Iterated Poincare gap: inf over mean-zero h of ||(I-P)h||_mu / ||h||_mu."""
    P = as_matrix(P)
    mu = stationary_distribution(P) if mu is None else as_distribution(mu)
    a, m = _prepare(P, mu, check)
    d = a.shape[0]
    if d == 1:
        return 1.0
    B = _projected(np.eye(d) - whiten(a, m), m)
    return float(np.linalg.svd(B, compute_uv=False)[-1])


def _lambda_a(a: np.ndarray, m: np.ndarray) -> float:
    W = whiten(a - np.outer(np.ones(a.shape[0]), m), m)
    # Jensen gives lambda_a <= 1; anything above is rounding
    return min(float(np.linalg.svd(W, compute_uv=False)[0]), 1.0)


def absolute_gap(P, mu=None, *, check: bool = True) -> float:
    """1 - ||P - 1 mu^T||_mu."""
    P = as_matrix(P)
    mu = stationary_distribution(P) if mu is None else as_distribution(mu)
    a, m = _prepare(P, mu, check)
    return 1.0 - _lambda_a(a, m)


def symmetric_gap(P, mu=None, *, check: bool = True) -> float:
    """Spectral gap of the additive symmetrization (P + P*)/2."""
    P = as_matrix(P)
    mu = stationary_distribution(P) if mu is None else as_distribution(mu)
    a, m = _prepare(P, mu, check)
    W = whiten(a, m)
    return 1.0 - _top_eig_on_complement(0.5 * (W + W.T), m)


def pseudo_gap(P, mu=None, k_max: int = 32, *, check: bool = True) -> tuple[float, int, bool]:
    """max over k <= k_max of (1 - lambda_a(P^k)^2) / k.

    Returns ``(value, argmax_k, truncated)``.  ``truncated`` is set when the
    best k is ``k_max`` itself, i.e. the true supremum may lie further out.
    Values within 1e-11 of the maximum count as ties; the smallest such k wins.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    P = as_matrix(P)
    mu = stationary_distribution(P) if mu is None else as_distribution(mu)
    a, m = _prepare(P, mu, check)
    values = np.empty(k_max)
    power = a.copy()
    for k in range(1, k_max + 1):
        if k > 1:
            power = power @ a
        lam = _lambda_a(power, m)
        values[k - 1] = (1.0 - lam * lam) / k
    best = float(values.max())
    k_best = int(np.flatnonzero(values >= best - TIE_TOL)[0]) + 1
    if best <= TIE_TOL:
        return max(best, 0.0), 1, False
    return best, k_best, k_best == k_max


@dataclass(frozen=True)
class GapReport:
    eta: float | None
    eta_p: float
    eta_a: float
    eta_s: float
    eta_ps: float
    eta_ps_argmax_k: int
    eta_ps_truncated: bool
    reversible: bool
    irreducible: bool

    def check(self, tol: float = GAP_CHECK_TOL) -> list[str]:
        """Return the violated ordering relations (empty when consistent)."""
        problems = []
        if self.eta_p < self.eta_s - tol:
            problems.append("eta_p < eta_s")
        if self.eta_s < self.eta_a - tol:
            problems.append("eta_s < eta_a")
        if self.eta_p < self.eta_ps / 2 - tol:
            problems.append("eta_p < eta_ps / 2")
        if self.eta is not None:
            if abs(self.eta - self.eta_p) > tol:
                problems.append("eta != eta_p")
            if abs(self.eta - self.eta_s) > tol:
                problems.append("eta != eta_s")
        if self.irreducible and not (self.eta_p > 0 and self.eta_s > 0):
            problems.append("irreducible chain with zero eta_p or eta_s")
        return problems

    def to_dict(self) -> dict:
        return asdict(self)


def gap_report(P, k_max: int = 32) -> GapReport:
    """Compute every gap for P and verify the ordering between them."""
    P = as_matrix(P)
    if not is_irreducible(P):
        raise NotIrreducible("gap report requires an irreducible chain")
    mu = stationary_distribution(P)
    reversible = detailed_balance_residual(P, mu) <= GAP_CHECK_TOL
    eta_ps, k_best, truncated = pseudo_gap(P, mu, k_max, check=False)
    report = GapReport(
        eta=spectral_gap(P, mu, check=False) if reversible else None,
        eta_p=ip_gap(P, mu, check=False),
        eta_a=absolute_gap(P, mu, check=False),
        eta_s=symmetric_gap(P, mu, check=False),
        eta_ps=eta_ps,
        eta_ps_argmax_k=k_best,
        eta_ps_truncated=truncated,
        reversible=reversible,
        irreducible=True,
    )
    problems = report.check()
    if problems:
        raise AssertionError(f"gap ordering violated: {', '.join(problems)}")
    return report

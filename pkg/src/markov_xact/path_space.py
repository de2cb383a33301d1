"""Pair chains induced by P on ordered and unordered length-2 paths.

``P2`` lives on ordered pairs ``(u1, u2)`` (flat index ``u1*d + u2``): drop the
first coordinate, then advance the second with P.  ``Pt2`` lives on unordered
pairs ``{u, v}`` with ``u <= v`` in lexicographic order: pick one endpoint by a
fair coin, advance it with P, forget the order again.

Both kernels factor through Omega, ``P2 = S T`` with ``T S = P`` and
``Pt2 = St Tt`` with ``Tt St = (P + I) / 2``; :func:`verify_spectral_identities`
checks the spectral consequences numerically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .core import (
    Distribution,
    _frozen,
    as_distribution,
    as_matrix,
    detailed_balance_residual,
    is_irreducible,
    joint_matrix,
    stationary_distribution,
    validate_matrix,
    whiten,
)
from .errors import DimensionMismatch, NotAProbability, NotIrreducible
from .gaps import (
    absolute_gap,
    ip_gap,
    restrict_to_support,
    spectral_gap,
    symmetric_gap,
)


@dataclass(frozen=True)
class PairIndexer:
    """Bijection between ordered pairs (u, v) and ``u*d + v``."""

    dim: int

    @property
    def size(self) -> int:
        return self.dim * self.dim

    def index(self, u: int, v: int) -> int:
        return u * self.dim + v

    def pair(self, i: int) -> tuple[int, int]:
        return divmod(i, self.dim)

    @cached_property
    def pairs(self) -> np.ndarray:
        u, v = np.divmod(np.arange(self.size), self.dim)
        return np.column_stack([u, v])


@dataclass(frozen=True)
class SymPairIndexer:
    """Bijection between unordered pairs {u, v} and ``0..d(d+1)/2 - 1``.

    The canonical representative is ``(min, max)``; indices run
    lexicographically, so for d = 2 the order is {0,0}, {0,1}, {1,1}.
    """

    dim: int

    @property
    def size(self) -> int:
        return self.dim * (self.dim + 1) // 2

    def index(self, u: int, v: int) -> int:
        if u > v:
            u, v = v, u
        return u * self.dim - u * (u - 1) // 2 + (v - u)

    def pair(self, i: int) -> tuple[int, int]:
        u, v = self.pairs[i]
        return int(u), int(v)

    @cached_property
    def pairs(self) -> np.ndarray:
        d = self.dim
        return np.array([(u, v) for u in range(d) for v in range(u, d)], dtype=np.int64)

    @cached_property
    def table(self) -> np.ndarray:
        """d x d array mapping (u, v) and (v, u) to the same flat index."""
        t = np.empty((self.dim, self.dim), dtype=np.int64)
        for i, (u, v) in enumerate(self.pairs):
            t[u, v] = t[v, u] = i
        return t


def build_p2(P):
    """Kernel on ordered pairs: p2((u1,u2),(v1,v2)) = [u2 == v1] p(v1, v2)."""
    a = np.asarray(as_matrix(P))
    d = a.shape[0]
    p2 = np.zeros((d, d, d, d))
    for u2 in range(d):
        p2[:, u2, u2, :] = a[u2]
    return validate_matrix(p2.reshape(d * d, d * d))


def build_tilde_p2(P):
    """Kernel on unordered pairs obtained by advancing a uniformly chosen endpoint."""
    a = np.asarray(as_matrix(P))
    d = a.shape[0]
    idx = SymPairIndexer(d)
    out = np.zeros((idx.size, idx.size))
    for i, (u, v) in enumerate(idx.pairs):
        ends = [(u, 1.0)] if u == v else [(u, 0.5), (v, 0.5)]
        for w, weight in ends:
            np.add.at(out[i], idx.table[w], weight * a[w])
    return validate_matrix(out)


def _check_pair(P, dist) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(as_matrix(P))
    w = np.asarray(as_distribution(dist))
    if a.shape[0] != w.shape[0]:
        raise DimensionMismatch(f"matrix has dim {a.shape[0]}, distribution {w.shape[0]}")
    return a, w


def fold(joint: np.ndarray) -> np.ndarray:
    """Sum a d x d array over each unordered pair, in SymPairIndexer order."""
    j = np.asarray(joint, dtype=float)
    d = j.shape[0]
    iu, ju = np.triu_indices(d)
    return np.where(iu == ju, j[iu, ju], j[iu, ju] + j[ju, iu])


def _as_probability(w: np.ndarray, what: str) -> Distribution:
    if abs(w.sum() - 1.0) > 1e-10:
        raise NotAProbability(f"{what} sums to {w.sum()!r}")
    return Distribution(_frozen(w))


def mu2(P, mu) -> Distribution:
    """Stationary pair law mu(u1) p(u1, u2), flattened by PairIndexer."""
    a, m = _check_pair(P, mu)
    return _as_probability((m[:, None] * a).ravel(), "mu2")


def nu2(nu, P) -> Distribution:
    """Law of the first pair (u1, u2) when u1 ~ nu."""
    a, n = _check_pair(P, nu)
    return _as_probability((n[:, None] * a).ravel(), "nu2")


def tilde_mu2(P, mu) -> Distribution:
    a, m = _check_pair(P, mu)
    return _as_probability(fold(m[:, None] * a), "tilde mu2")


def tilde_nu2(nu, P) -> Distribution:
    """Law of the first unordered pair of the symmetric chain.

    Off the diagonal this is nu(u1) p(u1,u2) + nu(u2) p(u2,u1): the first
    ordered pair is (u, P(u)) with u ~ nu, then folded.
    """
    a, n = _check_pair(P, nu)
    return _as_probability(fold(n[:, None] * a), "tilde nu2")


def factor_path_kernels(P) -> tuple[np.ndarray, np.ndarray]:
    """S (d^2 x d) forgets the first coordinate; T (d x d^2) appends a step of P."""
    a = np.asarray(as_matrix(P))
    d = a.shape[0]
    idx = PairIndexer(d)
    S = np.zeros((idx.size, d))
    S[np.arange(idx.size), idx.pairs[:, 1]] = 1.0
    T = np.zeros((d, idx.size))
    for u in range(d):
        T[u, u * d:(u + 1) * d] = a[u]
    return S, T


def factor_sym_kernels(P) -> tuple[np.ndarray, np.ndarray]:
    """St picks an endpoint of {u, v} by a fair coin; Tt appends a step of P."""
    a = np.asarray(as_matrix(P))
    d = a.shape[0]
    idx = SymPairIndexer(d)
    St = np.zeros((idx.size, d))
    for i, (u, v) in enumerate(idx.pairs):
        St[i, u] += 0.5
        St[i, v] += 0.5
    Tt = np.zeros((d, idx.size))
    for u in range(d):
        np.add.at(Tt[u], idx.table[u], a[u])
    return St, Tt


def match_spectra(small, large, cap: float) -> tuple[float, np.ndarray]:
    """Pair every value of ``small`` with its nearest unmatched value in ``large``.

    Greedy, largest modulus first.  Returns the worst pairing distance (inf if
    ``large`` runs out) and the unmatched leftovers of ``large``.
    """
    small = np.asarray(small, dtype=complex)
    pool = list(np.asarray(large, dtype=complex))
    worst = 0.0
    for z in sorted(small, key=lambda x: -abs(x)):
        if not pool:
            return float("inf"), np.array([])
        dist = [abs(z - w) for w in pool]
        j = int(np.argmin(dist))
        worst = max(worst, dist[j])
        pool.pop(j)
    return worst, np.array(pool)


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    limit: float
    passed: bool


@dataclass
class IdentityReport:
    """Outcome of :func:`verify_spectral_identities`; ``values`` holds the gaps."""

    reversible: bool
    checks: list[Check] = field(default_factory=list)
    values: dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, value: float, limit: float, passed: bool | None = None) -> None:
        value = float(value)
        if passed is None:
            passed = value <= limit
        self.checks.append(Check(name, value, float(limit), bool(passed)))

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "reversible": self.reversible,
            "values": dict(self.values),
            "checks": [vars(c) for c in self.checks],
        }


FACTOR_TOL = 1e-12
RESIDUAL_TOL = 1e-10


def _max_abs(x) -> float:
    x = np.asarray(x)
    return float(np.max(np.abs(x))) if x.size else 0.0


def verify_spectral_identities(P, tol: float = 1e-8, *, reversible_tol: float = 1e-9) -> IdentityReport:
    """Numerically confirm the spectral relations between P, P2 and Pt2.

    Exact-algebra identities (factorizations, invariance, detailed balance,
    unbiasedness) use fixed limits of 1e-12 and 1e-10; spectral comparisons
    use ``tol``.
    """
    P = as_matrix(P)
    if not is_irreducible(P):
        raise NotIrreducible("spectral identities need an irreducible chain")
    a = np.asarray(P)
    d = a.shape[0]
    mu = stationary_distribution(P)
    m = np.asarray(mu)
    rev = detailed_balance_residual(a, m) <= reversible_tol
    rep = IdentityReport(reversible=rev)

    P2 = np.asarray(build_p2(P))
    Pt2 = np.asarray(build_tilde_p2(P))
    m2 = np.asarray(mu2(P, mu))
    mt2 = np.asarray(tilde_mu2(P, mu))
    S, T = factor_path_kernels(P)
    St, Tt = factor_sym_kernels(P)
    DmuP = joint_matrix(a, m)

    rep.add("factor S T = P2", _max_abs(S @ T - P2), FACTOR_TOL)
    rep.add("factor T S = P", _max_abs(T @ S - a), FACTOR_TOL)
    rep.add("factor St Tt = Pt2", _max_abs(St @ Tt - Pt2), FACTOR_TOL)
    rep.add("factor Tt St = (P+I)/2", _max_abs(Tt @ St - 0.5 * (a + np.eye(d))), FACTOR_TOL)

    rep.add("mu2 invariant for P2", _max_abs(m2 @ P2 - m2), RESIDUAL_TOL)
    rep.add("E_mu2[F] = D_mu P", _max_abs(m2.reshape(d, d) - DmuP), RESIDUAL_TOL)
    if rev:
        rep.add("tilde mu2 detailed balance for Pt2", detailed_balance_residual(Pt2, mt2), RESIDUAL_TOL)
        iu, ju = np.triu_indices(d)
        expect_F = np.zeros((d, d))
        w = np.where(iu == ju, 1.0, 0.5) * mt2
        np.add.at(expect_F, (iu, ju), w)
        np.add.at(expect_F, (ju, iu), np.where(iu == ju, 0.0, w))
        rep.add("E_tilde_mu2[Ft] = D_mu P", _max_abs(expect_F - DmuP), RESIDUAL_TOL)

    # (a) nonzero eigenvalues of P and P2 agree; the other d^2 - d vanish
    worst, rest = match_spectra(np.linalg.eigvals(a), np.linalg.eigvals(P2), tol)
    rep.add("eig(P2) contains eig(P)", worst, tol)
    rep.add("remaining eig(P2) are zero", _max_abs(rest), tol)

    # (b) singular values of whitened P^(k-1) and P2^k, on the support of mu2
    a2, m2s = restrict_to_support(P2, m2)
    W = whiten(a, m)
    W2 = whiten(a2, m2s)
    Wk, W2k = np.eye(d), W2.copy()
    for k in (1, 2, 3):
        if k > 1:
            Wk = Wk @ W
            W2k = W2k @ W2
        sv = np.linalg.svd(Wk, compute_uv=False)
        sv2 = np.linalg.svd(W2k, compute_uv=False)
        rep.add(f"sv(P^{k - 1}) = sv(P2^{k})", _max_abs(sv - sv2[:d]), tol)
        rep.add(f"remaining sv(P2^{k}) are zero", _max_abs(sv2[d:]), tol)

    eta_s = symmetric_gap(a, m, check=False)
    eta_p = ip_gap(a, m, check=False)
    eta_a2 = absolute_gap(a2, m2s, check=False)
    eta_s2 = symmetric_gap(a2, m2s, check=False)
    eta_p2 = ip_gap(a2, m2s, check=False)
    rep.values.update(eta_p=eta_p, eta_s=eta_s, eta_a_P2=eta_a2, eta_s_P2=eta_s2, eta_p_P2=eta_p2)

    # (c)-(e)
    rep.add("eta_a(P2) = 0", abs(eta_a2), tol)
    bound = eta_s / 2
    rep.add("eta_s(P2) >= eta_s(P)/2", bound - eta_s2, tol)
    gamma = eta_p / (1 + eta_p)
    rep.add("eta_p(P2) >= eta_p/(1+eta_p)", gamma - eta_p2, tol)

    # (f) the symmetric chain
    worst, rest = match_spectra(np.linalg.eigvals(0.5 * (a + np.eye(d))), np.linalg.eigvals(Pt2), tol)
    rep.add("eig(Pt2) contains eig((P+I)/2)", worst, tol)
    rep.add("remaining eig(Pt2) are zero", _max_abs(rest), tol)
    if rev:
        eta = spectral_gap(a, m, check=False)
        at2, mt2s = restrict_to_support(Pt2, mt2)
        eta_at2 = absolute_gap(at2, mt2s, check=False)
        rep.values.update(eta=eta, eta_a_Pt2=eta_at2)
        rep.add("eta_s(P2) = eta/2", abs(eta_s2 - eta / 2), tol)
        rep.add("eta_a(Pt2) = eta/2", abs(eta_at2 - eta / 2), tol)
    return rep

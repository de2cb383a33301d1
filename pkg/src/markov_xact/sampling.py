"""Seeded simulation: random streams, the transition oracle, chain paths,
random reversible chains and the spectral-gap adjustment.

Every random quantity comes from a :class:`RandomSource` identified by
``(seed, stream)``.  Inverse-CDF sampling uses half-open cumulative intervals
``[c_{i-1}, c_i)``; the last positive-probability state also absorbs any draw
at or above the final rounded cumulative sum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .core import (
    Distribution,
    RowStochasticMatrix,
    as_distribution,
    as_matrix,
    detailed_balance_residual,
    is_irreducible,
    validate_matrix,
)
from .errors import GapUnreachable, InvalidInput, NotIrreducible, NotReversible
from .gaps import spectral_gap


class RandomSource:
    """Uniform(0,1) stream determined by ``(seed, stream)``.

    Backed by PCG64 seeded through ``SeedSequence(seed, spawn_key=(stream,))``,
    numpy's mechanism for statistically independent child streams.  Owned by
    one task at a time; duplicate work by asking for another stream id.
    """

    def __init__(self, seed: int, stream: int = 0):
        if seed < 0 or stream < 0:
            raise InvalidInput("seed and stream must be nonnegative")
        self.seed = int(seed)
        self.stream = int(stream)
        seq = np.random.SeedSequence(self.seed, spawn_key=(self.stream,))
        self._gen = np.random.Generator(np.random.PCG64(seq))
        self.draws = 0

    def uniform(self) -> float:
        self.draws += 1
        return float(self._gen.random())

    def uniforms(self, size: int) -> np.ndarray:
        self.draws += size
        return self._gen.random(size)

    def __repr__(self) -> str:
        return f"RandomSource(seed={self.seed}, stream={self.stream})"


@numba.njit(cache=True, nogil=True)
def _icdf(cum, last, r):
    # first i with cum[i] > r
    lo, hi = 0, cum.shape[0] - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if cum[mid] > r:
            hi = mid
        else:
            lo = mid + 1
    return min(lo, last)


@numba.njit(cache=True, nogil=True)
def _walk(cum, last, start, draws):
    n = draws.shape[0]
    states = np.empty(n + 1, dtype=np.int64)
    states[0] = start
    u = start
    for k in range(n):
        u = _icdf(cum[u], last[u], draws[k])
        states[k + 1] = u
    return states


@numba.njit(cache=True, nogil=True)
def _sce_counts(cum, last, u, draws):
    """Ordered-pair counts of the symmetric chain.

    ``draws[0]`` advances the initial state; each later step uses a coin then
    an oracle draw.  Returns counts of (u, v) as visited, unsymmetrized.
    """
    d = cum.shape[0]
    counts = np.zeros((d, d), dtype=np.int64)
    v = _icdf(cum[u], last[u], draws[0])
    counts[u, v] += 1
    k = 1
    while k < draws.shape[0]:
        if draws[k] <= 0.5:
            u = _icdf(cum[v], last[v], draws[k + 1])
        else:
            v = _icdf(cum[u], last[u], draws[k + 1])
        counts[u, v] += 1
        k += 2
    return counts


def _cdf_table(rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    rows = np.atleast_2d(rows)
    cum = np.cumsum(rows, axis=1)
    last = np.array([np.flatnonzero(r > 0)[-1] for r in rows], dtype=np.int64)
    return cum, last


def inverse_cdf(weights, r: float) -> int:
    """Index i with ``r`` in ``[c_{i-1}, c_i)`` for the cumulative sums c of ``weights``."""
    cum, last = _cdf_table(np.asarray(weights, dtype=float))
    return int(_icdf(cum[0], last[0], float(r)))


class TransitionOracle:
    """Black-box sampler of P: given u, emit v with probability p(u, v)."""

    dim: int

    def step(self, u: int, r: float) -> int:
        raise NotImplementedError

    def __call__(self, u: int, rng: RandomSource) -> int:
        return self.step(u, rng.uniform())


class MatrixOracle(TransitionOracle):
    """Oracle backed by an explicit matrix; one uniform draw per call."""

    def __init__(self, P):
        self.matrix = as_matrix(P)
        self.dim = self.matrix.dim
        self.cum, self.last = _cdf_table(np.asarray(self.matrix))

    def step(self, u: int, r: float) -> int:
        if not 0 <= u < self.dim:
            raise InvalidInput(f"state {u} outside 0..{self.dim - 1}")
        return int(_icdf(self.cum[u], self.last[u], r))


def oracle_from_matrix(P) -> MatrixOracle:
    return MatrixOracle(P)


@dataclass(frozen=True, eq=False)
class ChainPath:
    """States u_1..u_{n+1} of one simulated run, with provenance."""

    states: np.ndarray
    dim: int
    seed: int | None = None
    stream: int | None = None
    initial: str = "unknown"

    @property
    def n(self) -> int:
        return self.states.shape[0] - 1

    def __len__(self) -> int:
        return self.states.shape[0]


def _describe(nu: Distribution) -> str:
    w = np.asarray(nu)
    nz = np.flatnonzero(w)
    if nz.size == 1:
        return f"point-mass:{int(nz[0])}"
    return "custom"


def simulate_chain(oracle, nu, n: int, rng: RandomSource, *, initial: str | None = None) -> ChainPath:
    """Run the chain for n steps from u_1 ~ nu, consuming exactly n + 1 draws."""
    if n < 1:
        raise InvalidInput("n must be >= 1")
    nu = as_distribution(nu)
    if nu.dim != oracle.dim:
        raise InvalidInput(f"nu has dim {nu.dim}, oracle {oracle.dim}")
    draws = rng.uniforms(n + 1)
    start = inverse_cdf(np.asarray(nu), draws[0])
    if isinstance(oracle, MatrixOracle):
        states = _walk(oracle.cum, oracle.last, start, draws[1:])
    else:
        states = np.empty(n + 1, dtype=np.int64)
        states[0] = start
        for k in range(n):
            states[k + 1] = oracle.step(int(states[k]), draws[k + 1])
    states.setflags(write=False)
    return ChainPath(states, oracle.dim, rng.seed, rng.stream, initial or _describe(nu))


def random_reversible(d: int, rng: RandomSource) -> RowStochasticMatrix:
    """Random walk on a complete graph with iid Uniform(0,1) symmetric weights.

    Reversible w.r.t. the normalized weighted degrees, irreducible since all
    weights are positive almost surely.  Consumes d(d+1)/2 draws.
    """
    if d < 2:
        raise InvalidInput("d must be >= 2")
    iu = np.triu_indices(d)
    W = np.zeros((d, d))
    W[iu] = rng.uniforms(iu[0].size)
    W = W + np.triu(W, 1).T
    return validate_matrix(W / W.sum(axis=1, keepdims=True))


def random_stochastic(d: int, rng: RandomSource) -> RowStochasticMatrix:
    """Row-normalized iid Uniform(0,1) matrix: irreducible, generically non-reversible."""
    W = rng.uniforms(d * d).reshape(d, d)
    return validate_matrix(W / W.sum(axis=1, keepdims=True))


def adjust_gap(P, mu, eta_target: float) -> RowStochasticMatrix:
    """Reversible chain with spectral gap exactly ``eta_target`` built from P.

    Below the current gap, mix P with the identity (lazier chain).  Above it,
    mix P with ``1 mu^T`` using weight ``(1 - eta) / lambda_2`` on P, which
    scales every nontrivial eigenvalue so that lambda_2 becomes ``1 - eta``.
    """
    if not 0 < eta_target < 1:
        raise InvalidInput("eta_target must lie in (0, 1)")
    P = as_matrix(P)
    mu = as_distribution(mu)
    if not is_irreducible(P):
        raise NotIrreducible("adjust_gap requires an irreducible chain")
    if detailed_balance_residual(P, mu) > 1e-9:
        raise NotReversible("adjust_gap requires a reversible chain")
    a = np.asarray(P)
    d = a.shape[0]
    gap = spectral_gap(P, mu, check=False)
    lam2 = 1.0 - gap
    if eta_target <= gap:
        c = eta_target / gap
        out = c * a + (1.0 - c) * np.eye(d)
    else:
        if lam2 <= 0:
            raise GapUnreachable(f"lambda_2 = {lam2:.3g} <= 0 cannot be scaled to gap {eta_target}")
        c = (1.0 - eta_target) / lam2
        out = c * a + (1.0 - c) * np.outer(np.ones(d), np.asarray(mu))
    if np.any(out < -1e-12):
        raise GapUnreachable("gap adjustment produced a negative entry")
    return validate_matrix(out)


def lazy_cycle(n_states: int) -> RowStochasticMatrix:
    """Walk on Z/nZ that stays or steps right with probability 1/2 each."""
    if n_states < 3:
        raise InvalidInput("n_states must be >= 3")
    a = 0.5 * np.eye(n_states)
    a[np.arange(n_states), (np.arange(n_states) + 1) % n_states] = 0.5
    return validate_matrix(a)


def cyclic_permutation(d: int = 3) -> RowStochasticMatrix:
    """Deterministic cycle u -> u+1 mod d."""
    a = np.zeros((d, d))
    a[np.arange(d), (np.arange(d) + 1) % d] = 1.0
    return validate_matrix(a)

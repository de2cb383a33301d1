"""Transition-matrix estimators: pair counting along one trajectory (MLE) and
symmetric counting driven by a transition oracle (SCE).

Both produce a joint matrix estimating ``D_mu P`` (entry (u,v) = mu(u) p(u,v)),
its row sums ``mu_hat`` and the row-normalized ``p_hat``.  Integer pair counts
are kept alongside so exact identities can be checked in rational arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import _frozen, as_distribution, joint_matrix
from .errors import DimensionMismatch, IndexOutOfRange, InvalidInput, PathTooShort
from .sampling import ChainPath, MatrixOracle, RandomSource, _sce_counts, inverse_cdf

MLE = "MLE"
SCE = "SCE"


@dataclass(frozen=True, eq=False)
class TransitionEstimate:
    """Estimated ``D_mu P`` together with the derived mu_hat and p_hat.

    ``joint == counts / scale``, where ``scale`` is n for MLE and 2n for SCE
    (whose counts are the symmetrized ``C + C^T``).  Rows of ``p_hat`` for
    states never visited are uniform and flagged ``visited = False``.
    """

    joint: np.ndarray
    mu_hat: np.ndarray
    p_hat: np.ndarray
    visited: np.ndarray
    n: int
    method: str
    counts: np.ndarray
    scale: int
    seed: int | None = None

    @property
    def dim(self) -> int:
        return self.joint.shape[0]

    def exact_flux(self) -> list[list[Fraction]]:
        """mu_hat(u) * p_hat(u, v) in exact rational arithmetic (visited rows only)."""
        rows = self.counts.sum(axis=1)
        out = []
        for u in range(self.dim):
            row = []
            for v in range(self.dim):
                if rows[u] == 0:
                    row.append(Fraction(0))
                    continue
                mu_u = Fraction(int(rows[u]), self.scale)
                p_uv = Fraction(int(self.counts[u, v]), int(rows[u]))
                row.append(mu_u * p_uv)
            out.append(row)
        return out

    def header(self) -> str:
        seed = "none" if self.seed is None else str(self.seed)
        return f"method={self.method} n={self.n} seed={seed}"


def _from_counts(counts: np.ndarray, scale: int, n: int, method: str, seed) -> TransitionEstimate:
    d = counts.shape[0]
    joint = counts / scale
    row_counts = counts.sum(axis=1)
    mu_hat = row_counts / scale
    visited = row_counts > 0
    p_hat = np.full((d, d), 1.0 / d)
    p_hat[visited] = counts[visited] / row_counts[visited, None]
    counts = counts.copy()
    counts.setflags(write=False)
    return TransitionEstimate(
        joint=_frozen(joint),
        mu_hat=_frozen(mu_hat),
        p_hat=_frozen(p_hat),
        visited=_frozen(visited).astype(bool),
        n=n,
        method=method,
        counts=counts,
        scale=scale,
        seed=seed,
    )


def observable_F(pair: tuple[int, int], d: int) -> np.ndarray:
    """Indicator matrix E_{uv} of an ordered pair."""
    u, v = pair
    if not (0 <= u < d and 0 <= v < d):
        raise IndexOutOfRange(f"pair {pair} outside 0..{d - 1}")
    out = np.zeros((d, d))
    out[u, v] = 1.0
    return out


def observable_Ftilde(sym_pair: tuple[int, int], d: int) -> np.ndarray:
    """(E_{uv} + E_{vu}) / 2 for an unordered pair; E_{uu} on the diagonal."""
    u, v = sym_pair
    return 0.5 * (observable_F((u, v), d) + observable_F((v, u), d))


def mle_estimate(path, d: int | None = None) -> TransitionEstimate:
    """Empirical frequencies of consecutive pairs along one trajectory."""
    if isinstance(path, ChainPath):
        states, d, seed = np.asarray(path.states), d or path.dim, path.seed
    else:
        states, seed = np.asarray(path, dtype=np.int64), None
    if states.ndim != 1 or states.size < 2:
        raise PathTooShort("a path needs at least two states")
    if d is None:
        d = int(states.max()) + 1
    if states.min() < 0 or states.max() >= d:
        raise IndexOutOfRange(f"path visits a state outside 0..{d - 1}")
    n = states.size - 1
    counts = np.bincount(states[:-1] * d + states[1:], minlength=d * d).reshape(d, d)
    return _from_counts(counts.astype(np.int64), n, n, MLE, seed)


def sce_step(current: tuple[int, int], oracle, rng: RandomSource):
    """One move of the symmetric chain: a fair coin picks which end to advance.

    With r <= 1/2 the pair becomes ``(oracle(v), v)``, otherwise
    ``(u, oracle(u))``.  Returns the new ordered pair and its unordered fold.
    """
    u, v = current
    r = rng.uniform()
    if r <= 0.5:
        u = oracle(v, rng)
    else:
        v = oracle(u, rng)
    return (u, v), (min(u, v), max(u, v))


def sce_estimate(oracle, nu, n: int, rng: RandomSource) -> TransitionEstimate:
    """Symmetric counting over n pairs; uses 2n uniform draws.

    One draw picks u ~ nu, one gives v = oracle(u), then each of the
    remaining n - 1 steps spends a coin draw and an oracle draw.
    """
    if n < 1:
        raise InvalidInput("n must be >= 1")
    nu = as_distribution(nu)
    if nu.dim != oracle.dim:
        raise DimensionMismatch(f"nu has dim {nu.dim}, oracle {oracle.dim}")
    draws = rng.uniforms(2 * n)
    u = inverse_cdf(np.asarray(nu), draws[0])
    if isinstance(oracle, MatrixOracle):
        counts = _sce_counts(oracle.cum, oracle.last, u, draws[1:])
    else:
        counts = np.zeros((oracle.dim, oracle.dim), dtype=np.int64)
        v = oracle.step(u, draws[1])
        counts[u, v] += 1
        for k in range(2, 2 * n, 2):
            if draws[k] <= 0.5:
                u = oracle.step(v, draws[k + 1])
            else:
                v = oracle.step(u, draws[k + 1])
            counts[u, v] += 1
    return _from_counts(counts + counts.T, 2 * n, n, SCE, rng.seed)


def frobenius_error(estimate: TransitionEstimate, P, mu) -> float:
    """||joint - D_mu P||_F."""
    target = joint_matrix(P, mu)
    if target.shape != estimate.joint.shape:
        raise DimensionMismatch(f"estimate is {estimate.joint.shape}, target {target.shape}")
    return float(np.linalg.norm(estimate.joint - target))


def operator_error(estimate: TransitionEstimate, P, mu) -> float:
    """Spectral norm ||joint - D_mu P||, the quantity in the SCE tail bound."""
    target = joint_matrix(P, mu)
    return float(np.linalg.norm(estimate.joint - target, 2))

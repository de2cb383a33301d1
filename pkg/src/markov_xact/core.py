"""Row-stochastic matrices, distributions and the mu-weighted geometry.

States are the integers ``0..d-1``; any label mapping is the caller's business.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import (
    DimensionMismatch,
    NegativeEntry,
    NotAProbability,
    NotIrreducible,
    NotSquare,
    RowSumViolation,
    ZeroStationaryMass,
)

NEGATIVE_TOL = 1e-12
RENORMALIZE_TOL = 1e-9
REVERSIBLE_TOL = 1e-10


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class RowStochasticMatrix:
    """Dense d x d transition matrix with nonnegative entries and unit row sums.

    Build instances with :func:`validate_matrix`; the constructor itself does
    not check anything.
    """

    entries: np.ndarray

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    def __len__(self) -> int:
        return self.dim


@dataclass(frozen=True, eq=False)
class Distribution:
    """Probability vector on ``0..dim-1``."""

    weights: np.ndarray

    @property
    def dim(self) -> int:
        return self.weights.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.weights if dtype is None else self.weights.astype(dtype)

    def __len__(self) -> int:
        return self.dim


def validate_matrix(raw) -> RowStochasticMatrix:
    """Check ``raw`` is a transition matrix and wrap it.

    Tiny negative entries (above ``-1e-12``) are clipped to zero and rows whose
    sum is off by at most ``1e-9`` are rescaled; anything worse is rejected.
    """
    if isinstance(raw, RowStochasticMatrix):
        return raw
    a = np.array(raw, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise NotSquare(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NegativeEntry("matrix contains non-finite entries")
    if np.any(a < -NEGATIVE_TOL):
        u, v = np.argwhere(a < -NEGATIVE_TOL)[0]
        raise NegativeEntry(f"entry ({u},{v}) = {a[u, v]!r} is negative")
    a = np.clip(a, 0.0, None)
    sums = a.sum(axis=1)
    bad = np.abs(sums - 1.0) > RENORMALIZE_TOL
    if np.any(bad):
        u = int(np.flatnonzero(bad)[0])
        raise RowSumViolation(f"row {u} sums to {sums[u]!r}")
    off = sums != 1.0
    if np.any(off):
        a[off] /= sums[off, None]
    return RowStochasticMatrix(_frozen(a))


def as_matrix(P) -> RowStochasticMatrix:
    return P if isinstance(P, RowStochasticMatrix) else validate_matrix(P)


def validate_distribution(raw) -> Distribution:
    """Same policy as :func:`validate_matrix`, applied to a single vector."""
    if isinstance(raw, Distribution):
        return raw
    w = np.array(raw, dtype=float)
    if w.ndim != 1 or w.size < 1:
        raise NotAProbability(f"expected a 1-D vector, got shape {w.shape}")
    if not np.all(np.isfinite(w)) or np.any(w < -NEGATIVE_TOL):
        raise NotAProbability("distribution has negative or non-finite weights")
    w = np.clip(w, 0.0, None)
    total = w.sum()
    if abs(total - 1.0) > RENORMALIZE_TOL:
        raise NotAProbability(f"weights sum to {total!r}")
    if total != 1.0:
        w = w / total
    return Distribution(_frozen(w))


def as_distribution(nu) -> Distribution:
    return nu if isinstance(nu, Distribution) else validate_distribution(nu)


def point_mass(d: int, state: int) -> Distribution:
    w = np.zeros(d)
    w[state] = 1.0
    return Distribution(_frozen(w))


def uniform(d: int) -> Distribution:
    return Distribution(_frozen(np.full(d, 1.0 / d)))


def is_irreducible(P) -> bool:
    """True iff the graph with an edge u->v whenever p(u,v) > 0 is strongly connected."""
    a = np.asarray(as_matrix(P))
    n, _ = connected_components(a > 0, directed=True, connection="strong")
    return n == 1


def stationary_distribution(P) -> Distribution:
    """Unique invariant law of an irreducible chain.

    Solves ``(I - P^T) mu = 0`` together with ``sum(mu) = 1`` as one
    overdetermined least-squares system.
    """
    P = as_matrix(P)
    if not is_irreducible(P):
        raise NotIrreducible("stationary distribution is not unique for a reducible chain")
    a = np.asarray(P)
    d = a.shape[0]
    system = np.vstack([np.eye(d) - a.T, np.ones((1, d))])
    rhs = np.zeros(d + 1)
    rhs[-1] = 1.0
    mu, *_ = np.linalg.lstsq(system, rhs, rcond=None)
    mu = np.clip(mu, 0.0, None)
    mu /= mu.sum()
    return Distribution(_frozen(mu))


def _check_dims(*objs) -> int:
    dims = {np.shape(o)[0] for o in objs}
    if len(dims) != 1:
        raise DimensionMismatch(f"dimensions disagree: {sorted(dims)}")
    return dims.pop()


def detailed_balance_residual(P, mu) -> float:
    """max over (u,v) of |mu(u)p(u,v) - mu(v)p(v,u)|."""
    a = np.asarray(P, dtype=float)
    m = np.asarray(mu, dtype=float)
    _check_dims(a, m)
    flux = m[:, None] * a
    return float(np.max(np.abs(flux - flux.T)))


def is_reversible(P, mu, tol: float = REVERSIBLE_TOL) -> bool:
    return detailed_balance_residual(P, mu) <= tol


def weighted_inner(f, g, mu) -> float:
    """<f, g>_mu = sum_u mu(u) f(u) g(u)."""
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    m = np.asarray(mu, dtype=float)
    _check_dims(f, g, m)
    return float(np.sum(m * f * g))


def weighted_norm(f, mu) -> float:
    return float(np.sqrt(weighted_inner(f, f, mu)))


def _positive_mass(mu) -> np.ndarray:
    m = np.asarray(mu, dtype=float)
    if np.any(m <= 0):
        raise ZeroStationaryMass("mu has a zero entry")
    return m


def whiten(P, mu) -> np.ndarray:
    """``D_mu^{1/2} P D_mu^{-1/2}``; symmetric exactly when P is mu-reversible."""
    a = np.asarray(P, dtype=float)
    s = np.sqrt(_positive_mass(mu))
    _check_dims(a, s)
    return s[:, None] * a / s[None, :]


def nu_over_mu_inf(nu, mu) -> float:
    """||nu / mu||_inf, the start-distribution penalty in every tail bound."""
    n = np.asarray(nu, dtype=float)
    m = _positive_mass(mu)
    _check_dims(n, m)
    return float(np.max(n / m))


def joint_matrix(P, mu) -> np.ndarray:
    """D_mu P, the stationary law of consecutive pairs arranged as a d x d matrix."""
    a = np.asarray(P, dtype=float)
    m = np.asarray(mu, dtype=float)
    _check_dims(a, m)
    return m[:, None] * a


def read_matrix(path) -> RowStochasticMatrix:
    """Parse the text format: first line ``d``, then d rows of d numbers."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln.split() for ln in fh if ln.strip()]
    if not lines:
        raise NotSquare(f"{path}: empty matrix file")
    try:
        d = int(lines[0][0])
        rows = [[float(x) for x in ln] for ln in lines[1:]]
    except ValueError as exc:
        raise NotSquare(f"{path}: {exc}") from None
    if len(rows) != d or any(len(r) != d for r in rows):
        raise NotSquare(f"{path}: expected {d} rows of {d} numbers")
    return validate_matrix(rows)


def format_matrix(a) -> str:
    a = np.asarray(a, dtype=float)
    out = [str(a.shape[0])]
    out.extend(" ".join(repr(float(x)) for x in row) for row in a)
    return "\n".join(out) + "\n"


def write_matrix(path, a) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_matrix(a))


def read_distribution(path) -> Distribution:
    with open(path, encoding="utf-8") as fh:
        values = fh.read().split()
    try:
        return validate_distribution([float(x) for x in values])
    except ValueError as exc:
        if isinstance(exc, NotAProbability):
            raise
        raise NotAProbability(f"{path}: {exc}") from None

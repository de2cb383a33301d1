from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from markov_xact.core import (
    format_matrix,
    is_irreducible,
    is_reversible,
    nu_over_mu_inf,
    point_mass,
    read_distribution,
    read_matrix,
    stationary_distribution,
    uniform,
    validate_distribution,
    validate_matrix,
    weighted_inner,
    whiten,
    write_matrix,
)
from markov_xact.errors import NegativeEntry, NotAProbability, NotSquare, RowSumViolation

from .conftest import ASYM_TWO, P0, TWO_STATE


def test_validate_accepts_stochastic_and_identity():
    assert np.array_equal(np.asarray(validate_matrix(ASYM_TWO)), ASYM_TWO)
    assert np.array_equal(np.asarray(validate_matrix(np.eye(2))), np.eye(2))


def test_validate_rejects_bad_input():
    with pytest.raises(RowSumViolation):
        validate_matrix([[0.5, 0.6], [0.7, 0.3]])
    with pytest.raises(NotSquare):
        validate_matrix([[0.5, 0.5]])
    with pytest.raises(NegativeEntry):
        validate_matrix([[1.5, -0.5], [0.5, 0.5]])


def test_matrix_is_read_only():
    P = validate_matrix(TWO_STATE)
    with pytest.raises(ValueError):
        P.entries[0, 0] = 1.0


def test_distribution_validation():
    assert validate_distribution([0.25, 0.75]).dim == 2
    with pytest.raises(NotAProbability):
        validate_distribution([0.5, 0.6])


def test_irreducibility():
    assert is_irreducible(P0)
    assert not is_irreducible(np.eye(3))
    assert not is_irreducible([[0.5, 0.5], [0.0, 1.0]])


@pytest.mark.parametrize(
    "P, expected",
    [
        (np.full((4, 4), 0.25), [0.25] * 4),
        (TWO_STATE, [0.4, 0.6]),
        (P0, [1 / 3] * 3),
    ],
)
def test_stationary_distribution(P, expected):
    np.testing.assert_allclose(np.asarray(stationary_distribution(P)), expected, atol=1e-12)


def test_reversibility():
    assert is_reversible(TWO_STATE, [0.4, 0.6])
    assert not is_reversible(P0, uniform(3))
    sym = np.array([[0.2, 0.5, 0.3], [0.5, 0.1, 0.4], [0.3, 0.4, 0.3]])
    assert is_reversible(sym, uniform(3))


def test_weighted_inner():
    mu = [0.4, 0.6]
    assert weighted_inner([1, 1], [1, 1], mu) == pytest.approx(1.0)
    assert weighted_inner([1, -1], [1, -1], mu) == pytest.approx(1.0)
    assert weighted_inner([1, 0], [0, 1], mu) == 0.0


def test_whiten():
    np.testing.assert_allclose(whiten(P0, uniform(3)), P0)
    W = whiten(TWO_STATE, [0.4, 0.6])
    assert W[0, 1] == pytest.approx(0.2449489742783178)
    assert W[1, 0] == pytest.approx(W[0, 1], abs=1e-15)
    np.testing.assert_array_equal(whiten(np.eye(2), [0.4, 0.6]), np.eye(2))


def test_nu_over_mu():
    mu = [0.4, 0.6]
    assert nu_over_mu_inf(mu, mu) == pytest.approx(1.0)
    assert nu_over_mu_inf(point_mass(5, 2), uniform(5)) == pytest.approx(5.0)
    assert nu_over_mu_inf([0.5, 0.5], mu) == pytest.approx(1.25)


def test_matrix_file_roundtrip(tmp_path):
    path = tmp_path / "m.txt"
    write_matrix(path, TWO_STATE)
    assert path.read_text().splitlines()[0] == "2"
    np.testing.assert_array_equal(np.asarray(read_matrix(path)), TWO_STATE)
    assert format_matrix(read_matrix(path)) == path.read_text()


def test_distribution_file(tmp_path):
    path = tmp_path / "nu.txt"
    path.write_text("0.25 0.75\n")
    np.testing.assert_array_equal(np.asarray(read_distribution(path)), [0.25, 0.75])


def test_malformed_matrix_file(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("3\n1 0 0\n0 1 0\n")
    with pytest.raises(NotSquare):
        read_matrix(path)


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, (4, 4), elements=st.floats(0.01, 1.0)))
def test_stationary_is_invariant(raw):
    P = raw / raw.sum(axis=1, keepdims=True)
    mu = np.asarray(stationary_distribution(P))
    assert mu.sum() == pytest.approx(1.0)
    np.testing.assert_allclose(mu @ P, mu, atol=1e-12)

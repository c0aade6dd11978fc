import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jmcert.errors import ValidationError
from jmcert.linalg import (
    PSD_TOL,
    hermitian_combine,
    largest_eigenvalue,
    min_eigenvalue,
    symplectic_form,
)

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
OMEGA = symplectic_form(1)


class TestSymplecticForm:
    def test_single_mode(self):
        assert np.array_equal(OMEGA, [[0.0, 1.0], [-1.0, 0.0]])

    def test_two_modes_block_diagonal(self):
        expected = np.zeros((4, 4))
        expected[:2, :2] = OMEGA
        expected[2:, 2:] = OMEGA
        assert np.array_equal(symplectic_form(2), expected)

    def test_square_is_minus_identity(self):
        assert np.array_equal(OMEGA @ OMEGA, -np.eye(2))

    @pytest.mark.parametrize("modes", range(1, 9))
    def test_orthogonality_and_trace(self, modes):
        omega = symplectic_form(modes)
        assert np.allclose(omega @ omega.T, np.eye(2 * modes))
        assert omega.trace() == 0.0
        assert np.array_equal(omega.T, -omega)

    @pytest.mark.parametrize("modes", [0, -1, 1.5])
    def test_invalid_mode_count(self, modes):
        with pytest.raises(ValidationError):
            symplectic_form(modes)


class TestHermitianCombine:
    def test_i_omega_eigenvalues(self):
        h = hermitian_combine(np.zeros((2, 2)), OMEGA)
        assert np.allclose(np.linalg.eigvalsh(h), [-1.0, 1.0])

    def test_identity_plus_i_omega(self):
        h = hermitian_combine(np.eye(2), OMEGA)
        assert np.allclose(np.linalg.eigvalsh(h), [0.0, 2.0])

    def test_channel_class_b1_matrix(self):
        # diag(s, s+1) - i*Omega is singular exactly at s*(s+1) = 1
        h = hermitian_combine(np.diag([GOLDEN, GOLDEN + 1.0]), -OMEGA)
        assert abs(np.linalg.eigvalsh(h)[0]) < 1e-9

    def test_dimension_mismatch(self):
        with pytest.raises(ValidationError, match="mismatch"):
            hermitian_combine(np.eye(2), symplectic_form(2))

    def test_symmetry_violation(self):
        bad = np.array([[0.0, 1.0], [0.0, 0.0]])
        with pytest.raises(ValidationError, match="symmetry"):
            hermitian_combine(bad, OMEGA)
        with pytest.raises(ValidationError, match="antisymmetry"):
            hermitian_combine(np.eye(2), np.eye(2))


class TestMinEigenvalue:
    def test_boundary_psd(self):
        report = min_eigenvalue(hermitian_combine(np.eye(2), OMEGA))
        assert report.is_psd
        assert abs(report.min_eigenvalue) < 1e-12

    def test_golden_ratio_boundary(self):
        report = min_eigenvalue(hermitian_combine(np.diag([GOLDEN, GOLDEN + 1.0]), -OMEGA))
        assert abs(report.min_eigenvalue) < 1e-9

    def test_scaled_identity_minus_i_omega(self):
        report = min_eigenvalue(hermitian_combine(0.9 * np.eye(2), -OMEGA))
        assert report.min_eigenvalue == pytest.approx(-0.1, abs=1e-12)
        assert not report.is_psd

    def test_witness_residual_and_norm(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            a = rng.normal(size=(6, 6))
            b = rng.normal(size=(6, 6))
            h = hermitian_combine(a + a.T, b - b.T)
            report = min_eigenvalue(h)
            v = report.witness
            assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-12)
            residual = np.linalg.norm(h @ v - report.min_eigenvalue * v)
            assert residual <= 1e-9 * max(1.0, np.linalg.norm(h))

    def test_deterministic_repeat(self):
        h = hermitian_combine(np.diag([0.3, 1.7]), OMEGA)
        first = min_eigenvalue(h)
        second = min_eigenvalue(h)
        assert first.min_eigenvalue == second.min_eigenvalue
        assert np.array_equal(first.witness, second.witness)

    def test_rejects_non_finite(self):
        h = np.array([[np.nan, 0.0], [0.0, 1.0]], dtype=complex)
        with pytest.raises(ValidationError):
            min_eigenvalue(h)

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValidationError, match="Hermitian"):
            min_eigenvalue(np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex))

    def test_largest_eigenvalue(self):
        h = hermitian_combine(np.zeros((2, 2)), 0.25 * OMEGA)
        assert largest_eigenvalue(h) == pytest.approx(0.25, abs=1e-12)


def _random_hermitian(seed: int, dim: int = 4) -> np.ndarray:
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(dim, dim))
    b = rng.normal(size=(dim, dim))
    return hermitian_combine(a + a.T, b - b.T)


@settings(max_examples=60, derandomize=True, deadline=None)
@given(seed=st.integers(0, 10_000), shift=st.floats(-10.0, 10.0))
def test_shift_moves_min_eigenvalue(seed, shift):
    h = _random_hermitian(seed)
    base = min_eigenvalue(h).min_eigenvalue
    shifted = min_eigenvalue(h + shift * np.eye(h.shape[0])).min_eigenvalue
    assert shifted == pytest.approx(base + shift, abs=1e-10 * max(1.0, abs(base), abs(shift)))


@settings(max_examples=60, derandomize=True, deadline=None)
@given(seed=st.integers(0, 10_000), shift=st.floats(0.0, 10.0))
def test_psd_monotone_under_positive_shift(seed, shift):
    h = _random_hermitian(seed)
    report = min_eigenvalue(h)
    if report.is_psd:
        assert min_eigenvalue(h + shift * np.eye(h.shape[0])).is_psd


def test_psd_slack_is_scale_aware():
    # a 1e-9-deep violation on a unit-scale matrix is within the slack
    h = np.diag([-0.5 * PSD_TOL, 1.0]).astype(complex)
    assert min_eigenvalue(h).is_psd
    assert not min_eigenvalue(np.diag([-1e-6, 1.0]).astype(complex)).is_psd

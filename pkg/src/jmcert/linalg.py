"""Symplectic and Hermitian matrix primitives with toleranced PSD certification.

Every matrix criterion used by the certifier reduces to building a Hermitian
matrix A + iB from a symmetric A and antisymmetric B and asking for its
minimum eigenvalue.  Dimensions here are tiny (at most a few dozen), so a
full Hermitian eigendecomposition is always used.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

# A matrix counts as PSD when min eigenvalue >= -PSD_TOL * max(1, inf-norm);
# the slack is scale-aware because the criteria are exact inequalities.
PSD_TOL = 1e-9
SYMMETRY_TOL = 1e-12


def _as_square(matrix, name: str) -> np.ndarray:
    arr = np.asarray(matrix)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValidationError(f"{name} must be a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite entries")
    return arr


def symplectic_form(modes: int) -> np.ndarray:
    """Block-diagonal symplectic form, one [[0, 1], [-1, 0]] block per mode."""
    if not isinstance(modes, (int, np.integer)) or modes < 1:
        raise ValidationError(f"mode count must be a positive integer, got {modes!r}")
    block = np.array([[0.0, 1.0], [-1.0, 0.0]])
    omega = np.zeros((2 * modes, 2 * modes))
    for j in range(modes):
        omega[2 * j : 2 * j + 2, 2 * j : 2 * j + 2] = block
    return omega


def hermitian_combine(sym, antisym) -> np.ndarray:
    """Build the Hermitian matrix sym + i*antisym.

    ``sym`` must be real symmetric and ``antisym`` real antisymmetric, both
    within absolute tolerance 1e-12.
    """
    a = _as_square(sym, "symmetric part").astype(float)
    b = _as_square(antisym, "antisymmetric part").astype(float)
    if a.shape != b.shape:
        raise ValidationError(
            f"dimension mismatch: symmetric part {a.shape}, antisymmetric part {b.shape}"
        )
    if np.abs(a - a.T).max() > SYMMETRY_TOL:
        raise ValidationError("symmetric part violates symmetry beyond 1e-12")
    if np.abs(b + b.T).max() > SYMMETRY_TOL:
        raise ValidationError("antisymmetric part violates antisymmetry beyond 1e-12")
    a = (a + a.T) / 2.0
    b = (b - b.T) / 2.0
    return a + 1j * b


@dataclass(frozen=True)
class PsdReport:
    """Outcome of a positive-semidefiniteness test."""

    min_eigenvalue: float
    is_psd: bool
    witness: np.ndarray  # unit-norm eigenvector achieving min_eigenvalue


def min_eigenvalue(hermitian, tol: float = PSD_TOL) -> PsdReport:
    """Minimum eigenvalue of a Hermitian matrix plus a toleranced PSD verdict.

    The PSD slack is ``tol * max(1, inf-norm)``.  The witness is any unit
    vector in the bottom eigenspace (no ordering promise when degenerate).
    """
    h = _as_square(hermitian, "matrix")
    if np.abs(h - h.conj().T).max() > SYMMETRY_TOL * max(1.0, np.abs(h).max()):
        raise ValidationError("matrix is not Hermitian within tolerance")
    h = (h + h.conj().T) / 2.0
    eigvals, eigvecs = np.linalg.eigh(h)
    lam = float(eigvals[0])
    witness = np.array(eigvecs[:, 0])
    scale = max(1.0, float(np.abs(h).sum(axis=1).max()))
    return PsdReport(min_eigenvalue=lam, is_psd=lam >= -tol * scale, witness=witness)


def largest_eigenvalue(hermitian) -> float:
    """Maximum eigenvalue, via the same toleranced machinery."""
    h = _as_square(hermitian, "matrix")
    return -min_eigenvalue(-h).min_eigenvalue

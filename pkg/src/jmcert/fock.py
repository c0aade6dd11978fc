"""Truncated-Fock-space numerical oracle for the phase-space machinery.

Everything here is an independent ground-truth path: operators are built as
explicit matrices on a photon-number basis of dimension ``cutoff``, and
phase-space integrals are evaluated by trapezoid quadrature on symmetric
rectangular grids.  The closed forms in :mod:`jmcert.measurements` and the
certificates in :mod:`jmcert.certifier` are validated against these numbers.

Conventions pinned by the test suite:

* the real phase-space point z = (z1, z2) maps to the complex amplitude
  alpha = (z1 + i z2) / sqrt(2), so |z|^2 = 2 |alpha|^2;
* the kernel family is Delta^(s)(z) = (1/2pi) (2/(1-s)) D(alpha) q^n D(alpha)^dag
  with q = (s+1)/(s-1), whose s = -1 member is the coherent projector
  |z><z| / (2pi) and whose s = 0 member reproduces the vacuum Wigner
  function exp(-|z|^2)/pi.

Truncation corrupts the top few Fock levels, so matrix comparisons exclude
the top ``TRUNCATION_TRIM`` rows and columns ("central block").
"""

from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import comb, gammaln

from .errors import ConvergenceError, OrderingRangeError, ValidationError
from .measurements import (
    CLICK,
    NO_CLICK,
    Heterodyne,
    IdealPD,
    MeasurementModel,
    RealisticPD,
    ThermalPD,
    spqd,
)

DEFAULT_CUTOFF = 40
TRUNCATION_TRIM = 5
TWO_PI = 2.0 * np.pi

# Residual bounds for quadrature guards.
_IMAG_RESIDUE_TOL = 1e-9
_TAIL_TOL = 5e-7


@dataclass(frozen=True)
class PhaseGrid:
    """Symmetric rectangular grid over R^2 with trapezoid quadrature weights."""

    half_width: float
    points_per_axis: int

    def __post_init__(self):
        if self.half_width <= 0:
            raise ValidationError(f"half_width must be positive, got {self.half_width}")
        if self.points_per_axis < 3 or self.points_per_axis % 2 == 0:
            raise ValidationError(
                f"points_per_axis must be an odd integer >= 3, got {self.points_per_axis}"
            )

    @cached_property
    def axis(self) -> np.ndarray:
        return np.linspace(-self.half_width, self.half_width, self.points_per_axis)

    @cached_property
    def weights_1d(self) -> np.ndarray:
        step = self.axis[1] - self.axis[0]
        w = np.full(self.points_per_axis, step)
        w[0] *= 0.5
        w[-1] *= 0.5
        return w

    @cached_property
    def y1(self) -> np.ndarray:
        """First coordinate, flattened with the first axis varying slowest."""
        return np.repeat(self.axis, self.points_per_axis)

    @cached_property
    def y2(self) -> np.ndarray:
        return np.tile(self.axis, self.points_per_axis)

    @cached_property
    def weights(self) -> np.ndarray:
        return np.outer(self.weights_1d, self.weights_1d).ravel()

    @cached_property
    def radius_sq(self) -> np.ndarray:
        return self.y1**2 + self.y2**2

    @cached_property
    def beta(self) -> np.ndarray:
        return (self.y1 + 1j * self.y2) / np.sqrt(2.0)

    @cached_property
    def beta_abs_sq(self) -> np.ndarray:
        return self.radius_sq / 2.0

    @cached_property
    def boundary_mask(self) -> np.ndarray:
        edge = self.half_width
        return (np.abs(self.y1) >= edge) | (np.abs(self.y2) >= edge)

    @property
    def size(self) -> int:
        return self.points_per_axis**2

    def mesh_points(self) -> np.ndarray:
        """(points, points, 2) array of grid coordinates."""
        a1, a2 = np.meshgrid(self.axis, self.axis, indexing="ij")
        return np.stack([a1, a2], axis=-1)

    def key(self):
        return (float(self.half_width), int(self.points_per_axis))


DEFAULT_Y_GRID = PhaseGrid(12.0, 241)
STANDARD_Z_GRID = PhaseGrid(5.0, 101)


def _laguerre_table(x: np.ndarray, k: int, count: int) -> np.ndarray:
    """Rows n = 0..count-1 of the generalized Laguerre values L_n^{(k)}(x)."""
    out = np.empty((count, x.size))
    out[0] = 1.0
    if count > 1:
        out[1] = 1.0 + k - x
    for n in range(1, count - 1):
        out[n + 1] = ((2 * n + k + 1 - x) * out[n] - (n + k) * out[n - 1]) / (n + 1)
    return out


def _ratio_coeffs(k: int, count: int) -> np.ndarray:
    """sqrt(n! / (n+k)!) for n = 0..count-1."""
    n = np.arange(count)
    return np.exp(0.5 * (gammaln(n + 1.0) - gammaln(n + k + 1.0)))


def displacement_stack(alphas, cutoff: int) -> np.ndarray:
    """Displacement matrices D(alpha) for a batch of amplitudes, shape (len, D, D).

    Entries follow the generalized-Laguerre closed form; every entry of the
    exact infinite matrix is reproduced (truncation only removes rows and
    columns, it does not perturb the retained entries).
    """
    if cutoff < 2:
        raise ValidationError(f"cutoff must be >= 2, got {cutoff}")
    alphas = np.atleast_1d(np.asarray(alphas, dtype=complex))
    x = np.abs(alphas) ** 2
    damp = np.exp(-x / 2.0)
    out = np.zeros((alphas.size, cutoff, cutoff), dtype=complex)
    for k in range(cutoff):
        count = cutoff - k
        table = _laguerre_table(x, k, count)
        cn = _ratio_coeffs(k, count)
        up = damp * alphas**k
        for n in range(count):
            out[:, n + k, n] = cn[n] * table[n] * up
        if k > 0:
            dn = damp * (-np.conj(alphas)) ** k
            for n in range(count):
                out[:, n, n + k] = cn[n] * table[n] * dn
    return out


def displacement(alpha: complex, cutoff: int) -> np.ndarray:
    """Single displacement matrix D(alpha) on the truncated basis."""
    return displacement_stack([alpha], cutoff)[0]


def _z_to_alpha(z) -> complex:
    z = np.asarray(z, dtype=float)
    if z.shape != (2,):
        raise ValidationError(f"phase-space point must be a 2-vector, got shape {z.shape}")
    return complex(z[0], z[1]) / np.sqrt(2.0)


def coherent_state(z, cutoff: int) -> np.ndarray:
    """Truncated Fock coefficients of the coherent state at phase-space z."""
    alpha = _z_to_alpha(z)
    n = np.arange(cutoff)
    log_mag = -abs(alpha) ** 2 / 2.0 + n * np.log(abs(alpha)) if alpha != 0 else None
    if alpha == 0:
        vec = np.zeros(cutoff, dtype=complex)
        vec[0] = 1.0
        return vec
    phase = np.exp(1j * n * np.angle(alpha))
    return np.exp(log_mag - 0.5 * gammaln(n + 1.0)) * phase


def coherent_projector(z, cutoff: int) -> np.ndarray:
    vec = coherent_state(z, cutoff)
    return np.outer(vec, vec.conj())


def _delta_fock(z, s: float, cutoff: int) -> np.ndarray:
    alpha = _z_to_alpha(z)
    q = (s + 1.0) / (s - 1.0)
    disp = displacement(alpha, cutoff)
    qpow = np.power(q, np.arange(cutoff))
    return (1.0 / TWO_PI) * (2.0 / (1.0 - s)) * (disp * qpow[None, :]) @ disp.conj().T


def delta_s(z, s: float, cutoff: int) -> np.ndarray:
    """Quasiprobability kernel Delta^(s)(z) as a truncated Fock matrix, s < 0.

    For s >= 0 the kernel is not trace class and the direct series is
    rejected; evaluate distributions through ``spqd_numeric`` (or build the
    matrix by quadrature with ``delta_s_quadrature``) instead.
    """
    if cutoff < 2:
        raise ValidationError(f"cutoff must be >= 2, got {cutoff}")
    if s >= 0.0:
        raise OrderingRangeError(
            f"direct Fock construction requires s < 0, got s={s}; "
            "use spqd_numeric / delta_s_quadrature for 0 <= s < 1"
        )
    return _delta_fock(z, s, cutoff)


def delta_s_quadrature(z, s: float, grid: PhaseGrid, cutoff: int) -> np.ndarray:
    """Delta^(s)(z) built entrywise by characteristic-function quadrature, s < 1.

    Every matrix entry is an absolutely convergent integral for s < 1; for
    s > 0 the high-level diagonal entries grow like ((1+s)/(1-s))^n, so
    downstream comparisons should stay on the central block.
    """
    if s >= 1.0:
        raise OrderingRangeError(f"quadrature construction requires s < 1, got s={s}")
    if cutoff < 2:
        raise ValidationError(f"cutoff must be >= 2, got {cutoff}")
    envelope = math.exp((s - 1.0) * grid.half_width**2 / 4.0)
    if envelope > 1e-6:
        raise ConvergenceError(
            f"grid half_width {grid.half_width} too small for s={s}: "
            f"edge envelope {envelope:.3g}"
        )
    z = np.asarray(z, dtype=float)
    phase = np.exp(-1j * (z[0] * grid.y2 - z[1] * grid.y1))
    weight = grid.weights * np.exp(s * grid.radius_sq / 4.0) * phase / TWO_PI**2
    damp = np.exp(-grid.beta_abs_sq / 2.0)
    beta = grid.beta
    out = np.zeros((cutoff, cutoff), dtype=complex)
    for k in range(cutoff):
        count = cutoff - k
        table = _laguerre_table(grid.beta_abs_sq, k, count)
        cn = _ratio_coeffs(k, count)
        up = weight * damp * beta**k
        out[k + np.arange(count), np.arange(count)] = cn * (table @ up)
        if k > 0:
            dn = weight * damp * (-np.conj(beta)) ** k
            out[np.arange(count), k + np.arange(count)] = cn * (table @ dn)
    return out


def thermal_state(nbar: float, cutoff: int, tail_tol: float = 1e-12) -> np.ndarray:
    """Thermal density matrix with mean photon number nbar, trace-check guarded."""
    if nbar < 0:
        raise ValidationError(f"nbar must be >= 0, got {nbar}")
    if cutoff < 2:
        raise ValidationError(f"cutoff must be >= 2, got {cutoff}")
    if nbar == 0:
        out = np.zeros((cutoff, cutoff), dtype=complex)
        out[0, 0] = 1.0
        return out
    ratio = nbar / (nbar + 1.0)
    tail = ratio**cutoff
    if tail > tail_tol:
        raise ValidationError(
            f"thermal tail mass {tail:.3g} exceeds {tail_tol:.3g} at cutoff {cutoff}; "
            "increase the cutoff"
        )
    probs = ratio ** np.arange(cutoff) / (nbar + 1.0)
    return np.diag(probs).astype(complex)


def povm_matrix(model: MeasurementModel, outcome, cutoff: int) -> np.ndarray:
    """Directly built POVM element of a catalogue model on the truncated basis."""
    eye = np.eye(cutoff, dtype=complex)
    if isinstance(model, (IdealPD, RealisticPD)):
        p_dark = model.p_dark if isinstance(model, RealisticPD) else 0.0
        no_click = np.zeros((cutoff, cutoff), dtype=complex)
        no_click[0, 0] = 1.0 - p_dark
    elif isinstance(model, ThermalPD):
        no_click = thermal_state((model.nu - 1.0) / 2.0, cutoff)
    elif isinstance(model, Heterodyne):
        return coherent_projector(np.asarray(outcome, dtype=float), cutoff) / TWO_PI
    else:
        raise ValidationError(
            f"model {getattr(model, 'label', model)!r} has no direct Fock-basis POVM builder"
        )
    if outcome == NO_CLICK:
        return no_click
    if outcome == CLICK:
        return eye - no_click
    raise ValidationError(f"unknown outcome {outcome!r}")


def loss_dual(operator, tau: float) -> np.ndarray:
    """Heisenberg-picture attenuator: sum_k A_k^dag M A_k with binomial Kraus A_k.

    Exactly unital on the truncated space because each A_k lowers photon
    number.
    """
    if not 0.0 < tau <= 1.0:
        raise ValidationError(f"tau must lie in (0, 1], got {tau}")
    mat = np.asarray(operator, dtype=complex)
    dim = mat.shape[0]
    out = np.zeros_like(mat)
    n = np.arange(dim)
    for k in range(dim):
        idx = np.arange(k, dim)
        vals = np.sqrt(comb(idx, k) * tau ** (idx - k) * (1.0 - tau) ** k)
        kraus = np.zeros((dim, dim))
        kraus[idx - k, idx] = vals
        out += kraus.T @ mat @ kraus
        if tau == 1.0:
            break  # only A_0 = I survives
    return out


def central_block(matrix, trim: int = TRUNCATION_TRIM) -> np.ndarray:
    """Drop the top ``trim`` rows and columns corrupted by truncation."""
    mat = np.asarray(matrix)
    if mat.shape[0] <= trim:
        raise ValidationError(f"matrix of dimension {mat.shape[0]} too small to trim {trim}")
    return mat[: mat.shape[0] - trim, : mat.shape[0] - trim]


# ---------------------------------------------------------------------------
# characteristic functions and quasiprobability quadrature

_CHAR_CACHE: OrderedDict = OrderedDict()
_CHAR_CACHE_MAX = 48


def characteristic_grid(operator, grid: PhaseGrid) -> np.ndarray:
    """Tr[M D(y)] over the flattened grid, cached per (operator, grid)."""
    mat = np.ascontiguousarray(np.asarray(operator, dtype=complex))
    key = (mat.tobytes(), mat.shape[0], grid.key())
    hit = _CHAR_CACHE.get(key)
    if hit is not None:
        _CHAR_CACHE.move_to_end(key)
        return hit
    dim = mat.shape[0]
    x = grid.beta_abs_sq
    damp = np.exp(-x / 2.0)
    beta = grid.beta
    chi = np.zeros(grid.size, dtype=complex)
    for k in range(dim):
        upper = np.diagonal(mat, k)  # pairs with D_{n+k, n}
        lower = np.diagonal(mat, -k) if k > 0 else None
        has_upper = np.any(upper)
        has_lower = lower is not None and np.any(lower)
        if not (has_upper or has_lower):
            continue
        count = dim - k
        table = _laguerre_table(x, k, count)
        cn = _ratio_coeffs(k, count)
        if has_upper:
            chi += ((cn * upper) @ table) * (damp * beta**k)
        if has_lower:
            chi += ((cn * lower) @ table) * (damp * (-np.conj(beta)) ** k)
    chi.setflags(write=False)
    _CHAR_CACHE[key] = chi
    if len(_CHAR_CACHE) > _CHAR_CACHE_MAX:
        _CHAR_CACHE.popitem(last=False)
    return chi


def _split_flat_component(operator):
    """Split M = c*I + R with c the top diagonal entry.

    The flat component's quasiprobability is the exact kernel trace
    1/(2pi) at every (s, z); quadrature of a non-decaying characteristic
    function would otherwise need Abel regularization for s >= 0.
    """
    mat = np.asarray(operator, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValidationError(f"operator must be a square matrix, got shape {mat.shape}")
    c_flat = complex(mat[-1, -1])
    rest = mat - c_flat * np.eye(mat.shape[0])
    return c_flat, rest


def _damped_characteristic(operator, s: float, grid: PhaseGrid):
    if s >= 1.0:
        raise OrderingRangeError(f"quasiprobability quadrature requires s < 1, got s={s}")
    c_flat, rest = _split_flat_component(operator)
    chi = characteristic_grid(rest, grid)
    integrand = chi * np.exp(s * grid.radius_sq / 4.0)
    scale = max(1.0, float(np.abs(c_flat)))
    tail = float(
        (grid.weights[grid.boundary_mask] * np.abs(integrand[grid.boundary_mask])).sum()
    ) / TWO_PI**2
    if tail > _TAIL_TOL * max(scale, float(np.abs(integrand).max()) * 1e-3):
        raise ConvergenceError(
            f"integrand tail mass {tail:.3g} on the grid boundary; widen the grid "
            f"or lower s (s={s}, half_width={grid.half_width})"
        )
    return c_flat, integrand


def _check_real(value: complex, what: str) -> float:
    if abs(value.imag) > _IMAG_RESIDUE_TOL * max(1.0, abs(value.real)):
        raise ConvergenceError(f"{what}: imaginary residue {value.imag:.3g} exceeds tolerance")
    return float(value.real)


def spqd_numeric(operator, s: float, z, grid: PhaseGrid = DEFAULT_Y_GRID) -> float:
    """s-ordered quasiprobability of a Fock operator at phase-space z.

    Evaluates (1/2pi)^2 * sum_y w(y) Tr[M D(y)] e^{s|y|^2/4} e^{-i z Omega y^T}
    with the flat (identity) component of M handled by the exact kernel
    trace.  Raises ConvergenceError when the integrand has not decayed at
    the grid boundary.
    """
    c_flat, integrand = _damped_characteristic(operator, s, grid)
    z = np.asarray(z, dtype=float)
    if z.shape != (2,):
        raise ValidationError(f"phase-space point must be a 2-vector, got shape {z.shape}")
    phase = np.exp(-1j * (z[0] * grid.y2 - z[1] * grid.y1))
    val = (grid.weights * integrand * phase).sum() / TWO_PI**2 + c_flat / TWO_PI
    return _check_real(val, "spqd_numeric")


def spqd_numeric_mesh(
    operator, s: float, z1_axis, z2_axis, grid: PhaseGrid = DEFAULT_Y_GRID
) -> np.ndarray:
    """Vectorized ``spqd_numeric`` over a rectangular mesh of z points.

    The Fourier phase factorizes per axis, so the mesh evaluation is two
    dense matrix products instead of one quadrature per point.
    """
    c_flat, integrand = _damped_characteristic(operator, s, grid)
    z1_axis = np.asarray(z1_axis, dtype=float)
    z2_axis = np.asarray(z2_axis, dtype=float)
    f = (grid.weights * integrand).reshape(grid.points_per_axis, grid.points_per_axis)
    b = np.exp(-1j * np.outer(z1_axis, grid.axis))  # over y2
    a = np.exp(1j * np.outer(z2_axis, grid.axis))  # over y1
    out = (b @ f.T) @ a.T / TWO_PI**2 + c_flat / TWO_PI
    residue = float(np.abs(out.imag).max())
    if residue > _IMAG_RESIDUE_TOL * max(1.0, float(np.abs(out.real).max())):
        raise ConvergenceError(f"spqd mesh: imaginary residue {residue:.3g} exceeds tolerance")
    return out.real


# ---------------------------------------------------------------------------
# oracle comparisons

@dataclass(frozen=True)
class OracleReport:
    """One validated quantity: numerical value, reference, absolute error."""

    quantity: str
    numeric: float
    reference: float
    abs_error: float

    @classmethod
    def build(cls, quantity: str, numeric: float, reference: float) -> "OracleReport":
        return cls(quantity, float(numeric), float(reference), abs(float(numeric) - float(reference)))


def born_pairing(
    rho,
    model: MeasurementModel,
    outcome,
    s: float,
    z_grid: PhaseGrid,
    y_grid: PhaseGrid = DEFAULT_Y_GRID,
) -> OracleReport:
    """Born probability Tr[rho M] versus its two-sided quasiprobability pairing.

    The state side W^(-s)(z|rho) is evaluated numerically from the Fock
    matrix; the measurement side uses the catalogue closed form.
    """
    if not -1.0 < s < 1.0:
        raise OrderingRangeError(f"pairing requires -1 < s < 1 for both factors, got s={s}")
    rho = np.asarray(rho, dtype=complex)
    direct = float(np.trace(rho @ povm_matrix(model, outcome, rho.shape[0])).real)
    state_side = spqd_numeric_mesh(rho, -s, z_grid.axis, z_grid.axis, y_grid)
    measurement_side = spqd(model, outcome, s, z_grid.mesh_points())
    weights = np.outer(z_grid.weights_1d, z_grid.weights_1d)
    paired = TWO_PI * float((weights * state_side * measurement_side).sum())
    return OracleReport.build(
        f"born_pairing[{model.label}/{outcome}, s={s:g}]", paired, direct
    )


def reconstruct(
    model: MeasurementModel,
    outcome,
    s: float,
    z_grid: PhaseGrid,
    cutoff: int,
    chunk: int = 2048,
) -> OracleReport:
    """Rebuild a POVM element from its s-ordered distribution and compare.

    M = 2pi * integral dz W^(s)(a|x, z) Delta^(-s)(z); the kernel matrices
    are generated in batches from the displacement stack.  Frobenius
    distance on the central block is reported.
    """
    sigma = -s
    if sigma >= 1.0:
        raise OrderingRangeError(f"reconstruction requires s > -1, got s={s}")
    direct = povm_matrix(model, outcome, cutoff)
    mesh = z_grid.mesh_points().reshape(-1, 2)
    values = spqd(model, outcome, s, mesh)
    weights = np.outer(z_grid.weights_1d, z_grid.weights_1d).ravel()
    q = (sigma + 1.0) / (sigma - 1.0)
    qpow = np.power(q, np.arange(cutoff))
    # coefficient per z: 2pi * W(z) * w(z) * (1/2pi) * 2/(1-sigma)
    coeff = values * weights * (2.0 / (1.0 - sigma))
    rebuilt = np.zeros((cutoff, cutoff), dtype=complex)
    alphas = (mesh[:, 0] + 1j * mesh[:, 1]) / np.sqrt(2.0)
    for start in range(0, alphas.size, chunk):
        sl = slice(start, min(start + chunk, alphas.size))
        stack = displacement_stack(alphas[sl], cutoff)
        rebuilt += np.einsum(
            "g,gmk,k,gnk->mn", coeff[sl], stack, qpow, stack.conj(), optimize=True
        )
    distance = float(np.linalg.norm(central_block(rebuilt - direct)))
    return OracleReport.build(
        f"reconstruct[{model.label}/{outcome}, s={s:g}]", distance, 0.0
    )


def mother_heterodyne_check(
    tau: float,
    z,
    cutoff: int = 30,
    grid: PhaseGrid = DEFAULT_Y_GRID,
) -> OracleReport:
    """Check the attenuator's dual action on the kernel at ordering 1 - 2 tau.

    The transformed kernel must equal the rescaled coherent projector
    (1/tau) |z/sqrt(tau)><z/sqrt(tau)| / (2pi); note the outcome rescaling
    z -> z/sqrt(tau).
    """
    if not 0.0 < tau <= 1.0:
        raise ValidationError(f"tau must lie in (0, 1], got {tau}")
    z = np.asarray(z, dtype=float)
    ordering = 1.0 - 2.0 * tau
    if ordering < 0.0:
        kernel = delta_s(z, ordering, cutoff)
    else:
        kernel = delta_s_quadrature(z, ordering, grid, cutoff)
    transformed = loss_dual(kernel, tau)
    target = coherent_projector(z / np.sqrt(tau), cutoff) / (TWO_PI * tau)
    distance = float(np.linalg.norm(central_block(transformed - target)))
    return OracleReport.build(f"mother_heterodyne[tau={tau:g}]", distance, 0.0)


def convolution_check(
    s: float,
    s_big: float,
    z_grid: PhaseGrid,
    model: MeasurementModel,
    outcome,
) -> OracleReport:
    """Gaussian smoothing relation between two orderings of the same outcome.

    W^(s) must equal W^(s_big) convolved with the normalized kernel
    exp(-|k|^2/(s_big - s)) / (pi (s_big - s)); deviations are measured on
    the grid interior where the kernel support fits.
    """
    if s > s_big:
        raise ValidationError(f"need s <= s_big, got s={s} > s_big={s_big}")
    mesh = z_grid.mesh_points()
    target = spqd(model, outcome, s, mesh)
    if s == s_big:
        deviation = 0.0
    else:
        width = s_big - s
        source = spqd(model, outcome, s_big, mesh)
        diff = z_grid.axis[:, None] - z_grid.axis[None, :]
        kern = z_grid.weights_1d[None, :] * np.exp(-(diff**2) / width) / np.sqrt(np.pi * width)
        smoothed = kern @ source @ kern.T
        margin = 5.0 * np.sqrt(width / 2.0)
        interior = np.abs(z_grid.axis) <= z_grid.half_width - margin
        if not np.any(interior):
            raise ConvergenceError(
                f"convolution kernel (width {width:g}) does not fit inside the grid"
            )
        deviation = float(np.abs((smoothed - target)[np.ix_(interior, interior)]).max())
    return OracleReport.build(
        f"convolution[{model.label}/{outcome}, {s_big:g}->{s:g}]", deviation, 0.0
    )

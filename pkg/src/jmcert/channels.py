"""Bosonic Gaussian channels in their (T, N, d) dual-action parametrization.

A channel acts on the displacement operator as
    D(y) -> D(yT) * exp(-y N y^T / 4 - i d Omega y^T),
and is completely positive iff N + i(Omega - T Omega T^T) >= 0.  This module
models that data, builds the eight single-mode channel classes, the
loss-with-excess-noise channel, and evaluates entanglement-breaking
criteria including the two-mode-squeezed separability scan.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import CompletePositivityError, ValidationError
from .linalg import PsdReport, hermitian_combine, min_eigenvalue, symplectic_form

PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]])

CLASS_TAGS = ("A1", "A2", "B1", "B2", "B2_Id", "C_loss", "C_amp", "D")


@dataclass(frozen=True, eq=False)
class GaussianChannel:
    """Validated (T, N, d) triple for an M-mode Gaussian channel.

    The displacement d is carried through compositions but is inert for
    every PSD certification criterion (those depend only on T and N).
    """

    modes: int
    T: np.ndarray
    N: np.ndarray
    d: np.ndarray = field(default=None)

    def __post_init__(self):
        if not isinstance(self.modes, (int, np.integer)) or self.modes < 1:
            raise ValidationError(f"mode count must be a positive integer, got {self.modes!r}")
        dim = 2 * self.modes
        t = np.asarray(self.T, dtype=float)
        n = np.asarray(self.N, dtype=float)
        d = np.zeros(dim) if self.d is None else np.asarray(self.d, dtype=float)
        if t.shape != (dim, dim):
            raise ValidationError(f"T must have shape {(dim, dim)}, got {t.shape}")
        if n.shape != (dim, dim):
            raise ValidationError(f"N must have shape {(dim, dim)}, got {n.shape}")
        if d.shape != (dim,):
            raise ValidationError(f"d must have shape {(dim,)}, got {d.shape}")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(n)) and np.all(np.isfinite(d))):
            raise ValidationError("channel matrices contain non-finite entries")
        if np.abs(n - n.T).max() > 1e-12:
            raise ValidationError("noise matrix N must be symmetric within 1e-12")
        n = (n + n.T) / 2.0
        for arr in (t, n, d):
            arr.setflags(write=False)
        object.__setattr__(self, "T", t)
        object.__setattr__(self, "N", n)
        object.__setattr__(self, "d", d)
        report = self.cp_report()
        if not report.is_psd:
            raise CompletePositivityError(
                "channel is not completely positive: "
                f"min eigenvalue of N + i(Omega - T Omega T^T) is {report.min_eigenvalue:.6g}",
                report,
            )

    def cp_report(self) -> PsdReport:
        """PSD report of the complete-positivity matrix N + i(Omega - T Omega T^T)."""
        omega = symplectic_form(self.modes)
        return min_eigenvalue(hermitian_combine(self.N, omega - self.T @ omega @ self.T.T))


def make_channel(modes: int, T, N, d=None) -> GaussianChannel:
    """Construct and validate a Gaussian channel; rejects non-CP data."""
    return GaussianChannel(modes=modes, T=T, N=N, d=d)


@dataclass(frozen=True)
class ChannelClass:
    """Single-mode channel catalogue entry with its parameter ranges.

    tau is the generalized transmissivity, nbar >= 0 the thermal occupation.
    """

    tag: str
    tau: float = None
    nbar: float = 0.0

    def __post_init__(self):
        if self.tag not in CLASS_TAGS:
            raise ValidationError(f"unknown channel class {self.tag!r}; expected one of {CLASS_TAGS}")
        tau = self.tau
        if tau is None:
            tau = {"A1": 0.0, "A2": 0.0, "B1": 1.0, "B2": 1.0, "B2_Id": 1.0}.get(self.tag)
            if tau is None:
                raise ValidationError(f"class {self.tag} requires an explicit tau")
            object.__setattr__(self, "tau", tau)
        tau = float(self.tau)
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "nbar", float(self.nbar))
        if self.nbar < 0:
            raise ValidationError(f"nbar must be >= 0, got {self.nbar}")
        ok = {
            "A1": tau == 0.0,
            "A2": tau == 0.0,
            "B1": tau == 1.0,
            "B2": tau == 1.0,
            "B2_Id": tau == 1.0,
            "C_loss": 0.0 < tau < 1.0,
            "C_amp": tau >= 1.0,
            "D": tau <= 0.0,
        }[self.tag]
        if not ok:
            raise ValidationError(f"tau={tau} outside the allowed range for class {self.tag}")


def from_class(c: ChannelClass) -> GaussianChannel:
    """Build the catalogue channel for a validated class entry."""
    eye = np.eye(2)
    tau, nbar = c.tau, c.nbar
    if c.tag == "A1":
        t, n = np.zeros((2, 2)), (2 * nbar + 1) * eye
    elif c.tag == "A2":
        t, n = (PAULI_Z + eye) / 2.0, (2 * nbar + 1) * eye
    elif c.tag == "B1":
        if nbar != 0.0:
            warnings.warn("class B1 has an nbar-independent noise matrix; nbar ignored")
        t, n = eye, (eye - PAULI_Z) / 2.0
    elif c.tag == "B2":
        t, n = eye, nbar * eye
    elif c.tag == "B2_Id":
        t, n = eye, np.zeros((2, 2))
    elif c.tag == "C_loss":
        t, n = np.sqrt(tau) * eye, (1 - tau) * (2 * nbar + 1) * eye
    elif c.tag == "C_amp":
        t, n = np.sqrt(tau) * eye, (tau - 1) * (2 * nbar + 1) * eye
    else:  # D
        t, n = np.sqrt(-tau) * PAULI_Z, (1 - tau) * (2 * nbar + 1) * eye
    return make_channel(1, t, n)


def loss_with_excess(tau: float, epsilon: float) -> GaussianChannel:
    """Single-mode attenuator with transmissivity tau and excess noise epsilon.

    T = sqrt(tau) I, N = (1 - tau + 2 epsilon) I; completely positive for
    every epsilon >= 0.
    """
    if not 0.0 < tau <= 1.0:
        raise ValidationError(f"tau must lie in (0, 1], got {tau}")
    if epsilon < 0.0:
        raise ValidationError(f"epsilon must be >= 0, got {epsilon}")
    eye = np.eye(2)
    return make_channel(1, np.sqrt(tau) * eye, (1 - tau + 2 * epsilon) * eye)


def compose(first: GaussianChannel, second: GaussianChannel) -> GaussianChannel:
    """Channel applying ``first`` then ``second`` (Schroedinger order).

    T = T2 T1, N = N2 + T2 N1 T2^T, d = d2 + d1 T2^T, so the dual action on
    displacement operators chains consistently.  The result is re-validated.
    """
    if first.modes != second.modes:
        raise ValidationError(
            f"mode count mismatch: {first.modes} vs {second.modes}"
        )
    t = second.T @ first.T
    n = second.N + second.T @ first.N @ second.T.T
    d = second.d + first.d @ second.T.T
    return make_channel(first.modes, t, (n + n.T) / 2.0, d)


def eb_sufficient(ch: GaussianChannel) -> bool:
    """Sufficient entanglement-breaking condition N - I - i T Omega T^T >= 0."""
    omega = symplectic_form(ch.modes)
    h = hermitian_combine(ch.N - np.eye(2 * ch.modes), -(ch.T @ omega @ ch.T.T))
    return min_eigenvalue(h).is_psd


def tms_covariance(nu: float) -> np.ndarray:
    """Two-mode-squeezed covariance [[nu I, c Z], [c Z, nu I]], c = sqrt(nu^2-1)."""
    if nu < 1.0:
        raise ValidationError(f"squeezing parameter nu must be >= 1, got {nu}")
    c = np.sqrt(nu**2 - 1.0)
    eye = np.eye(2)
    return np.block([[nu * eye, c * PAULI_Z], [c * PAULI_Z, nu * eye]])


def tms_after_channel(nu: float, tau: float, epsilon: float) -> np.ndarray:
    """Two-mode-squeezed covariance after loss-with-excess-noise on mode A.

    Equals [[K I, sqrt(tau (nu^2-1)) Z], [sqrt(tau (nu^2-1)) Z, nu I]] with
    K = 1 + 2 epsilon + tau (nu - 1).
    """
    if nu < 1.0:
        raise ValidationError(f"squeezing parameter nu must be >= 1, got {nu}")
    if not 0.0 < tau <= 1.0:
        raise ValidationError(f"tau must lie in (0, 1], got {tau}")
    if epsilon < 0.0:
        raise ValidationError(f"epsilon must be >= 0, got {epsilon}")
    k = 1.0 + 2.0 * epsilon + tau * (nu - 1.0)
    c = np.sqrt(tau * (nu**2 - 1.0))
    eye = np.eye(2)
    return np.block([[k * eye, c * PAULI_Z], [c * PAULI_Z, nu * eye]])


@dataclass(frozen=True)
class EbReport:
    """Result of the two-mode-squeezed entanglement-breaking scan."""

    sufficient_condition_psd: bool
    tms_min_eigenvalue: float
    scan_nu_range: tuple
    tms_separable: bool


# Partial-transpose reflection for the separability test, diag(1, 1, 1, -1).
_PT_REFLECTION = np.diag([1.0, 1.0, 1.0, -1.0])


def _separability_min_eigenvalue(sigma: np.ndarray) -> float:
    """Min eigenvalue of L sigma L + i Omega_4; >= 0 iff the state is separable."""
    reflected = _PT_REFLECTION @ sigma @ _PT_REFLECTION
    return min_eigenvalue(hermitian_combine(reflected, symplectic_form(2))).min_eigenvalue


def eb_tms_scan(tau: float, epsilon: float, nu_grid=None, tol: float = 1e-10) -> EbReport:
    """Scan two-mode-squeezed inputs and test separability of the output.

    Default grid: 50 logarithmically spaced squeezing values in [1, 10].
    """
    if nu_grid is None:
        nu_grid = np.geomspace(1.0, 10.0, 50)
    nu_grid = np.asarray(nu_grid, dtype=float)
    if nu_grid.size == 0:
        raise ValidationError("nu grid must be nonempty")
    if np.any(nu_grid < 1.0):
        raise ValidationError("all nu grid values must be >= 1")
    minimum = min(
        _separability_min_eigenvalue(tms_after_channel(nu, tau, epsilon)) for nu in nu_grid
    )
    return EbReport(
        sufficient_condition_psd=eb_sufficient(loss_with_excess(tau, epsilon)),
        tms_min_eigenvalue=float(minimum),
        scan_nu_range=(float(nu_grid.min()), float(nu_grid.max())),
        tms_separable=minimum >= -tol,
    )


def channel_from_dict(spec: dict) -> GaussianChannel:
    """Build a channel from its JSON object form.

    Accepts {"class": tag, "tau": x, "nbar": y}, {"tau": x, "epsilon": e} for
    the noisy attenuator, or raw {"modes": M, "T": [[..]], "N": [[..]], "d": [..]}.
    """
    if not isinstance(spec, dict):
        raise ValidationError(f"channel spec must be a JSON object, got {type(spec).__name__}")

    def _number(key, default=None, required=False):
        if key not in spec:
            if required:
                raise ValidationError(f"channel field '{key}' is required")
            return default
        value = spec[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValidationError(f"channel field '{key}': expected a number, got {value!r}")
        return float(value)

    if "class" in spec:
        tag = spec["class"]
        if tag not in CLASS_TAGS:
            raise ValidationError(f"channel field 'class': unknown class {tag!r}")
        return from_class(ChannelClass(tag=tag, tau=_number("tau"), nbar=_number("nbar", 0.0)))
    if "epsilon" in spec:
        return loss_with_excess(_number("tau", required=True), _number("epsilon", required=True))
    if "T" in spec or "N" in spec or "modes" in spec:
        for key in ("modes", "T", "N"):
            if key not in spec:
                raise ValidationError(f"raw channel spec: field '{key}' is required")
        modes = spec["modes"]
        if isinstance(modes, bool) or not isinstance(modes, int):
            raise ValidationError(f"channel field 'modes': expected an integer, got {modes!r}")
        try:
            return make_channel(modes, np.array(spec["T"], float), np.array(spec["N"], float),
                                None if "d" not in spec else np.array(spec["d"], float))
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError(f"raw channel spec: {exc}") from exc
    raise ValidationError(
        "channel spec must contain 'class', 'epsilon', or raw 'modes'/'T'/'N' fields"
    )

"""Single-mode measurement catalogue with closed-form s-ordered quasiprobabilities.

Each model knows the largest ordering parameter s for which all of its
outcome distributions W^(s) stay non-negative; that bound is what decides
whether a Gaussian channel can break the incompatibility of a measurement
set (see the certifier module).

Binary photo-detection outcomes are labelled "no_click" and "click"; for the
thermal detector "no_click" denotes the thermal-overlap outcome that
generalizes the vacuum projection.  Gaussian-family models take a
phase-space point as outcome and return an outcome-density value.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import OrderingRangeError, ValidationError
from .linalg import hermitian_combine, min_eigenvalue, symplectic_form

NO_CLICK = "no_click"
CLICK = "click"

_OMEGA_1 = symplectic_form(1)


@dataclass(frozen=True)
class MeasurementModel:
    """Base class for catalogue measurement models."""


@dataclass(frozen=True, eq=False)
class GaussianMeasurement(MeasurementModel):
    """Gaussian measurement whose POVM kernel has covariance-like matrix sigma.

    sigma must be 2x2 symmetric and satisfy the uncertainty relation
    sigma + i Omega >= 0.
    """

    sigma: np.ndarray
    label: str = "gaussian"

    def __post_init__(self):
        sig = np.asarray(self.sigma, dtype=float)
        if sig.shape != (2, 2):
            raise ValidationError(f"sigma must be 2x2, got shape {sig.shape}")
        if np.abs(sig - sig.T).max() > 1e-12:
            raise ValidationError("sigma must be symmetric within 1e-12")
        sig = (sig + sig.T) / 2.0
        if not min_eigenvalue(hermitian_combine(sig, _OMEGA_1)).is_psd:
            raise ValidationError("sigma violates the uncertainty relation sigma + i Omega >= 0")
        sig.setflags(write=False)
        object.__setattr__(self, "sigma", sig)


@dataclass(frozen=True)
class Heterodyne(MeasurementModel):
    """Coherent-state measurement; equivalent to GaussianMeasurement(I)."""

    label: str = "heterodyne"


@dataclass(frozen=True)
class Homodyne(MeasurementModel):
    """Quadrature projector measurement (one-dimensional outcome)."""

    label: str = "homodyne"


@dataclass(frozen=True)
class IdealPD(MeasurementModel):
    """Ideal on/off photo-detector: no-click element is the vacuum projector."""

    label: str = "ideal_pd"


@dataclass(frozen=True)
class RealisticPD(MeasurementModel):
    """On/off photo-detector with dark-count probability p_dark."""

    p_dark: float
    label: str = "realistic_pd"

    def __post_init__(self):
        if not 0.0 <= self.p_dark <= 1.0:
            raise ValidationError(f"p_dark must lie in [0, 1], got {self.p_dark}")


@dataclass(frozen=True)
class ThermalPD(MeasurementModel):
    """Binary detector whose no-click element is a thermal state with nu >= 1.

    nu = 2 nbar + 1 is the thermal covariance parameter; nu = 1 reduces to
    the ideal photo-detector.
    """

    nu: float
    label: str = "thermal_pd"

    def __post_init__(self):
        if self.nu < 1.0:
            raise ValidationError(f"nu must be >= 1, got {self.nu}")


@dataclass(frozen=True, eq=False)
class TensorProduct(MeasurementModel):
    """Tensor product of single-mode catalogue models, one factor per mode."""

    factors: tuple
    label: str = "tensor_product"

    def __post_init__(self):
        factors = tuple(self.factors)
        if not factors:
            raise ValidationError("tensor product needs at least one factor")
        for f in factors:
            if isinstance(f, TensorProduct) or not isinstance(f, MeasurementModel):
                raise ValidationError("tensor product factors must be single-mode catalogue models")
        object.__setattr__(self, "factors", factors)


def model_modes(m: MeasurementModel) -> int:
    """Number of modes the model measures."""
    return len(m.factors) if isinstance(m, TensorProduct) else 1


def outcomes(m: MeasurementModel):
    """Outcome labels for binary detector models."""
    if isinstance(m, (IdealPD, RealisticPD, ThermalPD)):
        return (NO_CLICK, CLICK)
    raise ValidationError(f"model {m.label!r} does not have a discrete binary outcome set")


@dataclass(frozen=True)
class OrderingBound:
    """Largest ordering s with all outcome distributions non-negative."""

    s_bar: float
    attained: bool


def max_nonneg_ordering(m: MeasurementModel) -> OrderingBound:
    """Maximal non-negative ordering for a catalogue model.

    Heterodyne and homodyne attain their bounds in the measure sense (the
    density degenerates to a point mass exactly at s_bar).
    """
    if isinstance(m, GaussianMeasurement):
        return OrderingBound(float(np.linalg.eigvalsh(m.sigma)[0]), True)
    if isinstance(m, Heterodyne):
        return OrderingBound(1.0, True)
    if isinstance(m, Homodyne):
        return OrderingBound(0.0, True)
    if isinstance(m, IdealPD):
        return OrderingBound(-1.0, True)
    if isinstance(m, RealisticPD):
        return OrderingBound(1.0 - 2.0 * (1.0 - m.p_dark), True)
    if isinstance(m, ThermalPD):
        return OrderingBound(m.nu - 2.0, True)
    if isinstance(m, TensorProduct):
        bounds = [max_nonneg_ordering(f) for f in m.factors]
        s = min(b.s_bar for b in bounds)
        # isotropic ordering s*I on 2M modes bounds each factor separately
        return OrderingBound(s, all(b.attained for b in bounds if b.s_bar == s))
    raise ValidationError(f"unknown measurement model {m!r}")


def _radius_sq(z) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if z.shape[-1] != 2:
        raise ValidationError(f"phase-space point must have a trailing dimension 2, got shape {z.shape}")
    return z[..., 0] ** 2 + z[..., 1] ** 2


def _gaussian_peak(width: float, r_sq) -> np.ndarray:
    return np.exp(-r_sq / width) / (np.pi * width)


def spqd(m: MeasurementModel, outcome, s: float, z):
    """Closed-form s-ordered quasiprobability of an outcome at phase-space z.

    z may be a 2-vector or an array with trailing dimension 2; the return
    broadcasts accordingly.  Raises OrderingRangeError outside the
    convergence range instead of returning a silent number.
    """
    if isinstance(m, (IdealPD, RealisticPD)):
        if s >= 1.0:
            raise OrderingRangeError(f"photo-detection distributions require s < 1, got s={s}")
        p_dark = m.p_dark if isinstance(m, RealisticPD) else 0.0
        no_click = (1.0 - p_dark) * _gaussian_peak(1.0 - s, _radius_sq(z))
        if outcome == NO_CLICK:
            return no_click
        if outcome == CLICK:
            return 1.0 / (2.0 * np.pi) - no_click
        raise ValidationError(f"unknown outcome {outcome!r} for {m.label}")
    if isinstance(m, ThermalPD):
        if s >= m.nu:
            raise OrderingRangeError(f"thermal detection with nu={m.nu} requires s < nu, got s={s}")
        no_click = _gaussian_peak(m.nu - s, _radius_sq(z))
        if outcome == NO_CLICK:
            return no_click
        if outcome == CLICK:
            return 1.0 / (2.0 * np.pi) - no_click
        raise ValidationError(f"unknown outcome {outcome!r} for {m.label}")
    if isinstance(m, (GaussianMeasurement, Heterodyne)):
        sigma = m.sigma if isinstance(m, GaussianMeasurement) else np.eye(2)
        lam_min = float(np.linalg.eigvalsh(sigma)[0])
        if s >= lam_min:
            raise OrderingRangeError(
                f"gaussian measurement density requires s < min eigenvalue of sigma ({lam_min}), got s={s}"
            )
        z0 = np.asarray(outcome, dtype=float)
        if z0.shape != (2,):
            raise ValidationError(f"gaussian outcome must be a phase-space 2-vector, got {outcome!r}")
        core = np.linalg.inv(sigma - s * np.eye(2))
        quad = _OMEGA_1 @ core @ _OMEGA_1.T
        v = np.asarray(z, dtype=float) - z0
        if v.shape[-1] != 2:
            raise ValidationError(f"phase-space point must have a trailing dimension 2, got shape {v.shape}")
        exponent = np.einsum("...i,ij,...j", v, quad, v)
        norm = 1.0 / (2.0 * np.pi**2 * np.sqrt(np.linalg.det(sigma - s * np.eye(2))))
        return norm * np.exp(-exponent)
    if isinstance(m, Homodyne):
        raise OrderingRangeError(
            "homodyne has a one-dimensional outcome and no phase-space outcome density; "
            "use the truncated-Fock oracle for quadrature projectors"
        )
    if isinstance(m, TensorProduct):
        z = np.asarray(z, dtype=float)
        if z.shape[-1] != 2 * len(m.factors):
            raise ValidationError(
                f"tensor product over {len(m.factors)} modes needs a trailing dimension "
                f"{2 * len(m.factors)}, got shape {z.shape}"
            )
        value = 1.0
        for j, (f, out_j) in enumerate(zip(m.factors, outcome)):
            value = value * spqd(f, out_j, s, z[..., 2 * j : 2 * j + 2])
        return value
    raise ValidationError(f"unknown measurement model {m!r}")


def degree_of_incompatibility(s_bar: float) -> float:
    """Loss-based incompatibility measure (1 - s_bar) / 2.

    Only a genuine measure inside the Gaussian regime 0 <= s_bar <= 1;
    outside that range the value is an upper bound and a warning is issued.
    """
    if not 0.0 <= s_bar <= 1.0:
        warnings.warn(
            f"s_bar={s_bar} is outside the Gaussian regime [0, 1]; "
            "(1 - s_bar)/2 is an upper bound, not a measure"
        )
    return (1.0 - s_bar) / 2.0


def loss_breaking_threshold(s_bar: float, epsilon: float = 0.0) -> float:
    """Largest attenuator transmissivity that certifies breaking, clamped to [0, 1].

    tau_max = (s_bar + 2 epsilon + 1) / 2 for the loss channel with excess
    noise epsilon.
    """
    if epsilon < 0.0:
        raise ValidationError(f"epsilon must be >= 0, got {epsilon}")
    return float(np.clip((s_bar + 2.0 * epsilon + 1.0) / 2.0, 0.0, 1.0))


def classicality(m: MeasurementModel) -> bool:
    """True iff the model's P-function representation is non-negative (s_bar >= 1)."""
    return max_nonneg_ordering(m).s_bar >= 1.0


_MODEL_TAGS = {
    "gaussian": GaussianMeasurement,
    "heterodyne": Heterodyne,
    "homodyne": Homodyne,
    "ideal_pd": IdealPD,
    "realistic_pd": RealisticPD,
    "thermal_pd": ThermalPD,
}


def model_from_dict(spec: dict) -> MeasurementModel:
    """Build a measurement model from its JSON object form.

    {"model": "gaussian"|"heterodyne"|"homodyne"|"ideal_pd"|"realistic_pd"|
    "thermal_pd", "sigma": [[..]]?, "p_dark": number?, "nu": number?,
    "label": text?}
    """
    if not isinstance(spec, dict):
        raise ValidationError(f"measurement spec must be a JSON object, got {type(spec).__name__}")
    tag = spec.get("model")
    if tag not in _MODEL_TAGS:
        raise ValidationError(
            f"measurement field 'model': expected one of {sorted(_MODEL_TAGS)}, got {tag!r}"
        )
    label = spec.get("label", tag)
    if not isinstance(label, str):
        raise ValidationError(f"measurement field 'label': expected text, got {label!r}")

    def _number(key):
        if key not in spec:
            raise ValidationError(f"measurement field '{key}' is required for model {tag!r}")
        value = spec[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValidationError(f"measurement field '{key}': expected a number, got {value!r}")
        return float(value)

    if tag == "gaussian":
        if "sigma" not in spec:
            raise ValidationError("measurement field 'sigma' is required for model 'gaussian'")
        try:
            sigma = np.array(spec["sigma"], dtype=float)
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"measurement field 'sigma': {exc}") from exc
        return GaussianMeasurement(sigma=sigma, label=label)
    if tag == "realistic_pd":
        return RealisticPD(p_dark=_number("p_dark"), label=label)
    if tag == "thermal_pd":
        return ThermalPD(nu=_number("nu"), label=label)
    return _MODEL_TAGS[tag](label=label)

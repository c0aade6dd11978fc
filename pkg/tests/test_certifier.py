import math
import time

import numpy as np
import pytest

from jmcert.certifier import (
    NOT_BROKEN_NOTE,
    SINGLETON_NOTE,
    MeasurementSet,
    breaking_test,
    certificate_to_dict,
    certify,
    default_table1_grid,
    mixed_compatibility,
    reproduce_table1,
    s_min_isotropic,
    table1_closed_form,
)
from jmcert.channels import ChannelClass, compose, from_class, loss_with_excess, make_channel
from jmcert.errors import ValidationError
from jmcert.measurements import (
    NO_CLICK,
    GaussianMeasurement,
    Heterodyne,
    Homodyne,
    IdealPD,
    RealisticPD,
    ThermalPD,
    max_nonneg_ordering,
    outcomes,
    spqd,
)

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
STANDARD_AXIS = np.linspace(-5.0, 5.0, 101)
STANDARD_MESH = np.stack(np.meshgrid(STANDARD_AXIS, STANDARD_AXIS, indexing="ij"), axis=-1)

WIGNER_SET = MeasurementSet((Homodyne(), Heterodyne()))


class TestSMinIsotropic:
    def test_pure_loss(self):
        assert s_min_isotropic(from_class(ChannelClass("C_loss", 0.6, 0.0))) == pytest.approx(
            0.2, abs=1e-12
        )

    def test_b1_golden_ratio(self):
        assert s_min_isotropic(from_class(ChannelClass("B1"))) == pytest.approx(GOLDEN, abs=1e-9)

    def test_identity_channel(self):
        assert s_min_isotropic(from_class(ChannelClass("B2_Id"))) == pytest.approx(1.0, abs=1e-12)

    def test_a2_is_minus_thermal_scale(self):
        for nbar in (0.0, 0.5, 1.0, 2.0):
            got = s_min_isotropic(from_class(ChannelClass("A2", 0.0, nbar)))
            assert got == pytest.approx(-(2.0 * nbar + 1.0), abs=1e-12)

    def test_monotone_in_added_noise(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            tau = rng.uniform(0.05, 0.95)
            ch = from_class(ChannelClass("C_loss", tau, rng.uniform(0.0, 2.0)))
            delta = rng.uniform(0.01, 2.0)
            noisier = make_channel(1, ch.T, ch.N + delta * np.eye(2))
            assert s_min_isotropic(noisier) <= s_min_isotropic(ch) + 1e-12


class TestBreakingTest:
    def test_loss_half_wigner_boundary(self):
        report = breaking_test(from_class(ChannelClass("C_loss", 0.5, 0.0)), np.zeros((2, 2)))
        assert report.is_psd
        assert abs(report.min_eigenvalue) < 1e-12

    def test_b1_below_golden_fails(self):
        report = breaking_test(from_class(ChannelClass("B1")), 0.5 * np.eye(2))
        assert not report.is_psd

    def test_a1_with_p_ordering(self):
        report = breaking_test(from_class(ChannelClass("A1", 0.0, 0.0)), np.eye(2))
        assert report.is_psd

    def test_anisotropic_ordering(self):
        # diag(s1, s2) ordering crossing the B1 determinant condition s1*(s2+1) = 1
        ch = from_class(ChannelClass("B1"))
        assert breaking_test(ch, np.diag([0.8, 0.8])).is_psd
        assert not breaking_test(ch, np.diag([0.8, 0.2])).is_psd

    def test_dimension_mismatch(self):
        with pytest.raises(ValidationError, match="shape"):
            breaking_test(from_class(ChannelClass("B1")), np.zeros((4, 4)))


class TestTable1:
    @pytest.mark.parametrize(
        "cls,expected",
        [
            (ChannelClass("A1", 0.0, 1.0), "all"),
            (ChannelClass("A2", 0.0, 0.0), "all"),
            (ChannelClass("B2_Id"), "none"),
            (ChannelClass("B2", 1.0, 0.3), 0.7),
            (ChannelClass("C_amp", 2.0, 1.0), -1.0),
            (ChannelClass("D", -0.5, 1.0), -4.0),
            (ChannelClass("C_loss", 0.5, 0.0), 0.0),
        ],
    )
    def test_closed_form_values(self, cls, expected):
        got = table1_closed_form(cls)
        if isinstance(expected, str):
            assert got == expected
        else:
            assert got == pytest.approx(expected, abs=1e-12)

    def test_b1_closed_form(self):
        assert table1_closed_form(ChannelClass("B1")) == pytest.approx(GOLDEN, abs=1e-15)

    def test_reproduction_grid(self):
        rows = reproduce_table1()
        assert {r.class_tag for r in rows} == {"A1", "A2", "B1", "B2", "B2_Id", "C_loss", "C_amp", "D"}
        assert max(r.abs_diff for r in rows) <= 1e-9
        for r in rows:
            if r.verdict == "all":
                assert r.s_min_eigen <= -1.0 + 1e-12
            elif r.verdict == "none":
                assert r.s_min_eigen == pytest.approx(1.0, abs=1e-9)

    def test_grid_density(self):
        grid = default_table1_grid()
        loss_taus = {c.tau for c in grid if c.tag == "C_loss"}
        assert len(loss_taus) == 21
        assert all(0.0 < t < 1.0 for t in loss_taus)
        nbars = {c.nbar for c in grid if c.tag == "B2"}
        assert nbars == {0.0, 0.5, 1.0, 2.0}


class TestCertify:
    def test_wigner_set_under_strong_loss(self):
        cert = certify(WIGNER_SET, from_class(ChannelClass("C_loss", 0.4, 0.0)))
        assert cert.broken
        assert cert.s_bar_set == pytest.approx(0.0)
        assert cert.s_min_channel == pytest.approx(-0.2, abs=1e-12)

    def test_wigner_set_under_mild_loss(self):
        cert = certify(WIGNER_SET, from_class(ChannelClass("C_loss", 0.6, 0.0)))
        assert not cert.broken
        assert NOT_BROKEN_NOTE in cert.note

    def test_realistic_pd_boundary_is_heterodyne(self):
        cert = certify(
            MeasurementSet((RealisticPD(0.5),)), from_class(ChannelClass("C_loss", 0.5, 0.0))
        )
        assert cert.broken
        assert cert.mother.special_case == "heterodyne_rescaled"
        assert SINGLETON_NOTE in cert.note

    def test_ideal_pd_never_certified_under_pure_loss(self):
        mset = MeasurementSet((IdealPD(),))
        for tau in np.linspace(0.05, 0.95, 10):
            cert = certify(mset, from_class(ChannelClass("C_loss", float(tau), 0.0)))
            assert not cert.broken

    def test_mother_data(self):
        ch = from_class(ChannelClass("C_loss", 0.4, 0.0))
        cert = certify(WIGNER_SET, ch)
        assert np.allclose(cert.mother.T, ch.T)
        assert np.allclose(cert.mother.noise, ch.N + cert.s_bar_set * np.eye(2))
        assert np.allclose(cert.mother.d, 0.0)

    def test_mode_mismatch(self):
        two_mode = make_channel(2, np.eye(4), np.zeros((4, 4)))
        with pytest.raises(ValidationError, match="mode"):
            certify(WIGNER_SET, two_mode)

    def test_certificate_soundness(self):
        # whenever broken, the ordering matrix passes the PSD test and every
        # member's distributions at s_bar are non-negative on the standard grid
        cases = [
            (MeasurementSet((RealisticPD(0.25), Heterodyne())), loss_with_excess(0.2, 0.0)),
            (MeasurementSet((ThermalPD(2.0), Homodyne())), loss_with_excess(0.5, 0.0)),
            (WIGNER_SET, from_class(ChannelClass("C_loss", 0.3, 0.5))),
        ]
        for mset, ch in cases:
            cert = certify(mset, ch)
            assert cert.broken
            assert breaking_test(ch, cert.s_bar_set * np.eye(2)).is_psd
            for member in mset.members:
                if isinstance(member, (Homodyne, Heterodyne)):
                    continue  # measure-level bound, no planar density to sample
                for outcome in outcomes(member):
                    assert spqd(member, outcome, cert.s_bar_set, STANDARD_MESH).min() >= -1e-12

    def test_breaking_survives_further_loss(self):
        mset = MeasurementSet((RealisticPD(0.4),))
        first = from_class(ChannelClass("C_loss", 0.3, 0.0))
        assert certify(mset, first).broken
        for tau2 in (0.9, 0.5, 0.2):
            chained = compose(first, from_class(ChannelClass("C_loss", tau2, 0.0)))
            assert s_min_isotropic(chained) <= s_min_isotropic(first) + 1e-12
            assert certify(mset, chained).broken


class TestMixedCompatibility:
    def test_pd_plus_gaussian_threshold(self):
        mset = MeasurementSet((RealisticPD(0.25), GaussianMeasurement(np.eye(2))))
        threshold = 0.25  # min over members of (s_bar + 1)/2
        for tau, expected in [(0.2, True), (0.25, True), (0.26, False), (0.5, False)]:
            cert = mixed_compatibility(mset, from_class(ChannelClass("C_loss", tau, 0.0)))
            assert cert.broken is expected, (tau, threshold)

    @pytest.mark.parametrize("eps", [0.0, 0.2])
    def test_thermal_plus_homodyne_threshold(self, eps):
        mset = MeasurementSet((ThermalPD(2.0), Homodyne()))
        threshold = min((1.0 + 2.0 * eps) / 2.0, (2.0 - 1.0 + 2.0 * eps) / 2.0)
        for tau in (threshold - 0.05, threshold, min(threshold + 0.02, 1.0)):
            cert = mixed_compatibility(mset, loss_with_excess(tau, eps))
            assert cert.broken is (tau <= threshold + 1e-12)

    def test_singleton_classical_under_identity(self):
        cert = mixed_compatibility(
            MeasurementSet((Heterodyne(),)), from_class(ChannelClass("B2_Id"))
        )
        assert cert.broken
        assert SINGLETON_NOTE in cert.note


class TestCertificateJson:
    def test_fields_and_order(self):
        cert = certify(WIGNER_SET, from_class(ChannelClass("C_loss", 0.4, 0.0)))
        payload = certificate_to_dict(cert)
        assert list(payload) == ["broken", "s_min_channel", "s_bar_set", "mother", "note"]
        assert payload["broken"] is True
        assert list(payload["mother"]) == ["T", "noise", "d"]

    def test_special_case_included_when_set(self):
        cert = certify(
            MeasurementSet((RealisticPD(0.5),)), from_class(ChannelClass("C_loss", 0.5, 0.0))
        )
        assert certificate_to_dict(cert)["mother"]["special_case"] == "heterodyne_rescaled"


def test_empty_set_rejected():
    with pytest.raises(ValidationError, match="nonempty"):
        MeasurementSet(())


def test_reproduction_is_fast():
    start = time.perf_counter()
    reproduce_table1()
    assert time.perf_counter() - start < 1.0

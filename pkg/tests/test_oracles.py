import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qslgeo import (
    MINIMAL,
    QUANTUM_FISHER,
    WIGNER_YANASE,
    AmplitudeDamping,
    BlochVector,
    DomainError,
    ParallelDephasing,
    QuadratureConfig,
    from_bloch,
    path_length,
)
from qslgeo.engine import integrate_refined
from qslgeo.oracles import (
    ADClosedFormParams,
    PDClosedFormParams,
    _carlson_rf,
    ad_length_min,
    ad_length_qf,
    ad_length_wy,
    ellip_e_incomplete,
    pd_length_min,
    pd_length_qf,
    pd_length_wy,
    unitary_qubit_tightness_gap,
)

QUAD = QuadratureConfig(panels=32, order=8)
_ORACLE_QUAD = QuadratureConfig(panels=32, order=12)


def defining_integral(phi, m):
    return integrate_refined(
        lambda y: np.sqrt(1.0 - m * np.sin(y) ** 2), 0.0, phi, _ORACLE_QUAD, rel_target=1e-13
    )


class TestEllipticIntegral:
    def test_zero_modulus_is_identity(self):
        for phi in (0.0, 0.3, 1.2, np.pi / 2):
            assert ellip_e_incomplete(phi, 0.0) == pytest.approx(phi, abs=1e-15)

    def test_complete_unit_modulus(self):
        assert ellip_e_incomplete(np.pi / 2, 1.0) == pytest.approx(1.0, abs=1e-15)

    def test_complete_half_modulus(self):
        # frozen from the defining-integral quadrature oracle
        assert ellip_e_incomplete(np.pi / 2, 0.5) == pytest.approx(1.3506438810476755, rel=1e-12)

    @settings(max_examples=150, deadline=None)
    @given(phi=st.floats(1e-3, np.pi / 2), m=st.floats(0.0, 1.0))
    def test_matches_defining_integral(self, phi, m):
        ref = defining_integral(phi, m)
        assert ellip_e_incomplete(phi, m) == pytest.approx(ref, rel=1e-12, abs=1e-14)

    def test_monotone_in_amplitude_and_modulus(self):
        phis = np.linspace(0.05, np.pi / 2, 12)
        vals = [ellip_e_incomplete(p, 0.4) for p in phis]
        assert np.all(np.diff(vals) > 0.0)
        ms = np.linspace(0.0, 1.0, 12)
        vals = [ellip_e_incomplete(1.1, m) for m in ms]
        assert np.all(np.diff(vals) < 0.0)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            ellip_e_incomplete(-0.1, 0.5)
        with pytest.raises(DomainError):
            ellip_e_incomplete(2.0, 0.5)
        with pytest.raises(DomainError):
            ellip_e_incomplete(0.5, 1.5)

    def test_carlson_special_values(self):
        assert _carlson_rf(1.0, 1.0, 1.0) == pytest.approx(1.0, rel=1e-14)
        assert _carlson_rf(0.0, 1.0, 1.0) == pytest.approx(np.pi / 2, rel=1e-13)


class TestDephasingLengths:
    def test_zero_duration(self):
        p = PDClosedFormParams(0.5, 1.0, 2.0, 0.0)
        assert pd_length_qf(p) == 0.0
        assert pd_length_wy(p) == 0.0
        assert pd_length_min(p) == 0.0

    def test_fixed_points_have_zero_length(self):
        for th in (0.0, np.pi):
            p = PDClosedFormParams(1.0, th, 1.0, 5.0)
            assert pd_length_qf(p) == 0.0

    def test_zero_frequency_reduces_to_arcsin_form(self):
        p = PDClosedFormParams(0.6, 0.9, 0.0, 4.0)
        dz = 1.0 - 0.36 * np.cos(0.9) ** 2
        alpha = np.sqrt(1.0 - (1.0 - 0.36) / dz)
        expected = 0.5 * np.sqrt(dz) * (np.arcsin(alpha) - np.arcsin(alpha * np.exp(-4.0)))
        assert pd_length_qf(p) == pytest.approx(expected, rel=1e-12)

    def test_metric_independent_regime(self):
        p = PDClosedFormParams(0.5, np.pi / 2, 0.0, 3.0)
        assert pd_length_wy(p) == pytest.approx(pd_length_qf(p), rel=1e-8)
        assert pd_length_min(p) == pytest.approx(pd_length_qf(p), rel=1e-8)

    @pytest.mark.parametrize("metric,closed", [
        (QUANTUM_FISHER, pd_length_qf),
        (WIGNER_YANASE, pd_length_wy),
        (MINIMAL, pd_length_min),
    ])
    def test_engine_agreement(self, metric, closed):
        r0, th, beta, gt = 0.25, np.pi / 4, 8.0, 10.0
        got = path_length(ParallelDephasing(beta, 1.0), from_bloch(BlochVector(r0, th, 0.0)), gt, metric, QUAD)
        assert got == pytest.approx(closed(PDClosedFormParams(r0, th, beta, gt)), rel=1e-6)

    def test_minimal_depends_on_state_only_through_alpha(self):
        # two different (r0, theta0) pairs with the same alpha = r sin(theta)/sqrt(dz)
        a = PDClosedFormParams(0.5, np.pi / 2, 2.0, 3.0)
        target = a.alpha
        r2 = 0.7
        # solve r2 sin(t)/sqrt(1 - r2^2 cos^2 t) = target for t
        from scipy.optimize import brentq

        t2 = brentq(lambda t: r2 * np.sin(t) / np.sqrt(1 - r2**2 * np.cos(t) ** 2) - target, 0.1, np.pi / 2)
        b = PDClosedFormParams(r2, t2, 2.0, 3.0)
        assert pd_length_min(b) == pytest.approx(pd_length_min(a), rel=1e-10)

    def test_monotone_in_duration(self):
        vals = [pd_length_qf(PDClosedFormParams(0.5, 1.0, 3.0, gt)) for gt in np.linspace(0.0, 8.0, 15)]
        assert np.all(np.diff(vals) >= 0.0)

    def test_parameter_validation(self):
        with pytest.raises(DomainError):
            PDClosedFormParams(1.5, 1.0, 1.0, 1.0)
        with pytest.raises(DomainError):
            PDClosedFormParams(0.5, 1.0, -1.0, 1.0)


class TestDampingLengths:
    def test_zero_duration(self):
        p = ADClosedFormParams(0.5, 1.0, 0.0)
        assert ad_length_qf(p) == 0.0
        assert ad_length_wy(p) == 0.0
        assert ad_length_min(p) == 0.0

    def test_north_pole_fixed_point(self):
        p = ADClosedFormParams(1.0, 0.0, 8.0)
        assert ad_length_qf(p) == 0.0

    def test_polar_axis_is_metric_independent(self):
        p = ADClosedFormParams(0.25, 0.0, 6.0)
        ref = ad_length_qf(p)
        expected = np.arcsin(p.varpi) - np.arcsin(p.varpi * np.exp(-3.0))
        assert ref == pytest.approx(expected, rel=1e-12)
        assert ad_length_wy(p) == pytest.approx(ref, rel=1e-8)
        assert ad_length_min(p) == pytest.approx(ref, rel=1e-10)

    @pytest.mark.parametrize("metric,closed,point", [
        (QUANTUM_FISHER, ad_length_qf, (0.25, np.pi / 2, 10.0)),
        (WIGNER_YANASE, ad_length_wy, (0.25, np.pi / 4, 10.0)),
        (MINIMAL, ad_length_min, (0.5, np.pi / 2, 5.0)),
    ])
    def test_engine_agreement(self, metric, closed, point):
        r0, th, gt = point
        got = path_length(AmplitudeDamping(1.0), from_bloch(BlochVector(r0, th, 0.0)), gt, metric, QUAD)
        assert got == pytest.approx(closed(ADClosedFormParams(r0, th, gt)), rel=1e-6)

    def test_monotone_in_duration(self):
        for fn in (ad_length_qf, ad_length_wy, ad_length_min):
            vals = [fn(ADClosedFormParams(0.5, 1.2, gt)) for gt in np.linspace(0.0, 8.0, 15)]
            assert np.all(np.diff(vals) >= 0.0)

    def test_minimal_primitive_boundary_guard(self):
        # huge durations push cos(Phi) within 1e-12 of 1, where the
        # arctanh branch blows up
        with pytest.raises(DomainError):
            ad_length_min(ADClosedFormParams(0.5, np.pi / 2, 70.0))


class TestUnitaryTightnessGap:
    def test_limits_are_zero(self):
        assert unitary_qubit_tightness_gap(0.0, 1.5) == 0.0
        assert unitary_qubit_tightness_gap(0.7, 0.0) == 0.0

    def test_interior_point_is_positive(self):
        assert unitary_qubit_tightness_gap(0.9, np.pi) > 0.0

    def test_grid_nonnegative(self):
        r = np.linspace(0.0, 0.999, 60)
        ph = np.linspace(0.0, np.pi, 60)
        gap = unitary_qubit_tightness_gap(r[:, None], ph[None, :])
        assert gap.min() >= -1e-10

    def test_small_angle_limit_matches_ratio(self):
        # as phi -> 0 the geodesic ratio tends to the path-length ratio
        r0 = 0.8
        lhs = np.sqrt((1.0 + np.sqrt(1.0 - r0**2)) / 2.0)
        gap = unitary_qubit_tightness_gap(r0, 1e-6)
        assert gap == pytest.approx(0.0, abs=1e-6)
        ratio_like = gap + lhs
        assert ratio_like == pytest.approx(lhs, rel=1e-5)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            unitary_qubit_tightness_gap(1.0, 0.5)
        with pytest.raises(DomainError):
            unitary_qubit_tightness_gap(0.5, 4.0)

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_density, random_hermitian
from qslgeo import (
    MINIMAL,
    QUANTUM_FISHER,
    WIGNER_YANASE,
    BlochVector,
    DensityOperator,
    DomainError,
    MetricDivergenceError,
    ValidationError,
    c_kernel,
    custom_mc_function,
    ds2_from_drho,
    eval_f,
    evolve,
    from_bloch,
    metric_by_kind,
    metric_tensor,
    pd_spectrum,
    skew_information,
    spectral_decompose,
    state_derivative,
    symmetrized_covariance,
    unitary_metric,
)
from qslgeo.channels import ParallelDephasing

ALL_METRICS = (QUANTUM_FISHER, WIGNER_YANASE, MINIMAL)


class TestMCFunctions:
    def test_normalization_at_one(self):
        for f in ALL_METRICS:
            assert eval_f(f, 1.0) == pytest.approx(1.0, abs=1e-15)

    def test_values_at_four(self):
        assert eval_f(QUANTUM_FISHER, 4.0) == pytest.approx(2.5)
        assert eval_f(WIGNER_YANASE, 4.0) == pytest.approx(2.25)
        assert eval_f(MINIMAL, 4.0) == pytest.approx(1.6)

    def test_limits_at_zero(self):
        assert eval_f(QUANTUM_FISHER, 0.0) == 0.5
        assert eval_f(WIGNER_YANASE, 0.0) == 0.25
        assert eval_f(MINIMAL, 0.0) == 0.0

    def test_negative_argument(self):
        with pytest.raises(DomainError):
            eval_f(QUANTUM_FISHER, -0.5)

    def test_sandwich_on_grid(self):
        t = np.logspace(-2, 2, 101)
        assert np.all(eval_f(MINIMAL, t) <= eval_f(WIGNER_YANASE, t) + 1e-14)
        assert np.all(eval_f(WIGNER_YANASE, t) <= eval_f(QUANTUM_FISHER, t) + 1e-14)

    def test_self_inversive(self):
        t = np.logspace(-2, 2, 101)
        for f in ALL_METRICS:
            assert np.max(np.abs(eval_f(f, t) - t * eval_f(f, 1.0 / t))) <= 1e-10

    def test_custom_geometric_mean_accepted(self):
        f = custom_mc_function(np.sqrt, f0=0.0, label="geometric-mean")
        assert eval_f(f, 4.0) == pytest.approx(2.0)

    def test_custom_rejects_non_self_inversive(self):
        with pytest.raises(ValidationError, match="f\\(t\\)"):
            custom_mc_function(lambda t: np.asarray(t) * 0.0 + 1.0 * np.asarray(t), f0=0.0)

    def test_custom_rejects_unnormalized(self):
        with pytest.raises(ValidationError, match="normalized"):
            custom_mc_function(lambda t: 0.55 * (1.0 + np.asarray(t)), f0=0.55)

    def test_metric_by_kind(self):
        assert metric_by_kind("qf") is QUANTUM_FISHER
        assert metric_by_kind("WY") is WIGNER_YANASE
        with pytest.raises(DomainError):
            metric_by_kind("bures")


class TestKernel:
    def test_unit_trace_pair_is_two_exactly(self):
        for p in np.linspace(0.05, 0.95, 19):
            assert c_kernel(QUANTUM_FISHER, p, 1.0 - p) == 2.0

    def test_equal_arguments(self):
        for f in ALL_METRICS:
            for p in (0.1, 0.35, 0.8):
                assert c_kernel(f, p, p) == pytest.approx(1.0 / p, rel=1e-14)

    @settings(max_examples=100, deadline=None)
    @given(
        x=st.floats(1e-3, 1.0),
        y=st.floats(1e-3, 1.0),
        alpha=st.floats(1e-2, 1e2),
    )
    def test_homogeneity(self, x, y, alpha):
        for f in ALL_METRICS:
            lhs = c_kernel(f, alpha * x, alpha * y)
            rhs = c_kernel(f, x, y) / alpha
            assert abs(lhs - rhs) <= 1e-10 * max(abs(rhs), 1.0)

    def test_symmetry(self, rng):
        for _ in range(30):
            x, y = rng.uniform(1e-3, 1, 2)
            for f in ALL_METRICS:
                assert c_kernel(f, x, y) == pytest.approx(c_kernel(f, y, x), rel=1e-12)

    def test_boundary_values(self):
        assert c_kernel(WIGNER_YANASE, 0.3, 0.0) == pytest.approx(4.0 / 0.3, rel=1e-12)
        assert c_kernel(QUANTUM_FISHER, 0.3, 0.0) == pytest.approx(2.0 / 0.3, rel=1e-12)
        with pytest.raises(MetricDivergenceError):
            c_kernel(MINIMAL, 0.3, 0.0)

    def test_double_zero_is_domain_error(self):
        with pytest.raises(DomainError):
            c_kernel(QUANTUM_FISHER, 0.0, 0.0)

    def test_kernel_ordering(self):
        grid = np.linspace(0.02, 0.98, 25)
        for x in grid:
            for y in grid:
                cm = c_kernel(MINIMAL, x, y)
                cw = c_kernel(WIGNER_YANASE, x, y)
                cq = c_kernel(QUANTUM_FISHER, x, y)
                assert cm >= cw - 1e-12 >= cq - 2e-12


class TestLineElement:
    def test_zero_displacement(self, rng):
        dec = spectral_decompose(random_density(rng, 3))
        for f in ALL_METRICS:
            assert ds2_from_drho(dec, np.zeros((3, 3)), f).total == 0.0

    def test_diagonal_family_independence(self):
        rho = DensityOperator(np.diag([0.3, 0.7]).astype(complex))
        dec = spectral_decompose(rho)
        eps = 1e-3
        drho = np.diag([eps, -eps]).astype(complex)
        expected = (eps**2 / 4.0) * (1.0 / 0.3 + 1.0 / 0.7)
        for f in ALL_METRICS:
            ms = ds2_from_drho(dec, drho, f)
            assert ms.total == pytest.approx(expected, rel=1e-12)
            assert ms.quantum == pytest.approx(0.0, abs=1e-18)

    def test_maximally_mixed_family_independence(self, rng):
        dec = spectral_decompose(DensityOperator(0.5 * np.eye(2, dtype=complex)))
        h = random_hermitian(rng)
        drho = h - 0.5 * np.trace(h) * np.eye(2)
        vals = [ds2_from_drho(dec, drho, f).total for f in ALL_METRICS]
        assert max(vals) - min(vals) <= 1e-12 * max(vals)

    def test_rejects_non_hermitian(self, rng):
        dec = spectral_decompose(random_density(rng))
        with pytest.raises(ValidationError, match="Hermitian"):
            ds2_from_drho(dec, np.array([[0.0, 1.0], [0.5, 0.0]]), QUANTUM_FISHER)

    def test_rejects_traceful(self, rng):
        dec = spectral_decompose(random_density(rng))
        with pytest.raises(ValidationError, match="traceless"):
            ds2_from_drho(dec, np.eye(2), QUANTUM_FISHER)

    def test_null_null_coherence_divergence(self):
        rho = DensityOperator(np.diag([1.0, 0.0, 0.0]).astype(complex))
        dec = spectral_decompose(rho)
        drho = np.zeros((3, 3), dtype=complex)
        drho[1, 2] = drho[2, 1] = 1e-3
        with pytest.raises(MetricDivergenceError):
            ds2_from_drho(dec, drho, MINIMAL)

    def test_gauge_invariance_in_degenerate_blocks(self, rng):
        # two-fold degenerate state: the eigenbasis inside the block is arbitrary
        p = np.array([0.4, 0.4, 0.2])
        dec_vectors = np.eye(3, dtype=complex)
        rho = DensityOperator(np.diag(p).astype(complex))
        h = random_hermitian(rng, 3)
        drho = h - np.trace(h) * np.eye(3) / 3.0
        base = spectral_decompose(rho)
        vals = [ds2_from_drho(base, drho, f).total for f in ALL_METRICS]
        theta = rng.uniform(0, 2 * np.pi)
        mix = np.eye(3, dtype=complex)
        mix[:2, :2] = [[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]]
        rotated = base.eigenvectors @ mix
        from qslgeo.qstate import SpectralDecomposition

        rot = SpectralDecomposition(base.eigenvalues, rotated, base.rank_threshold)
        for f, val in zip(ALL_METRICS, vals):
            assert ds2_from_drho(rot, drho, f).total == pytest.approx(val, abs=1e-9)


class TestMetricTensor:
    def test_zero_gauge_is_purely_classical(self):
        p = [0.6, 0.4]
        dp = np.array([[0.1, -0.1]])
        a = np.zeros((1, 2, 2), dtype=complex)
        mt = metric_tensor(p, dp, a, QUANTUM_FISHER)
        assert mt.quantum[0, 0] == 0.0
        assert mt.classical[0, 0] == pytest.approx(0.25 * (0.01 / 0.6 + 0.01 / 0.4))

    def test_constant_populations_give_zero_classical(self, rng):
        p = [0.6, 0.4]
        dp = np.zeros((2, 2))
        a = np.stack([random_hermitian(rng), random_hermitian(rng)])
        mt = metric_tensor(p, dp, a, WIGNER_YANASE)
        assert np.all(mt.classical == 0.0)
        assert np.allclose(mt.quantum, mt.quantum.T)
        assert np.min(np.linalg.eigvalsh(mt.total)) >= -1e-10

    def test_matches_line_element_on_dephasing_trajectory(self):
        b0 = BlochVector(0.6, 1.0, 0.4)
        omega0, gamma, t = 1.7, 0.8, 0.9
        ch = ParallelDephasing(omega0, gamma)
        rho0 = from_bloch(b0)
        spec_t = pd_spectrum(b0, omega0, gamma, t)
        # eigen-derivatives by central differences of the analytic spectrum
        h = 1e-6
        lo = pd_spectrum(b0, omega0, gamma, t - h)
        hi = pd_spectrum(b0, omega0, gamma, t + h)
        dp = np.array([[(hi.p_plus - lo.p_plus) / (2 * h), (hi.p_minus - lo.p_minus) / (2 * h)]])
        vecs = np.column_stack([spec_t.vec_plus, spec_t.vec_minus])
        dvecs = np.column_stack([
            (hi.vec_plus - lo.vec_plus) / (2 * h),
            (hi.vec_minus - lo.vec_minus) / (2 * h),
        ])
        a = 1j * vecs.conj().T @ dvecs
        a = np.stack([0.5 * (a + a.conj().T)])
        for f in ALL_METRICS:
            mt = metric_tensor([spec_t.p_plus, spec_t.p_minus], dp, a, f)
            ref = ds2_from_drho(
                spectral_decompose(evolve(ch, rho0, t)),
                state_derivative(ch, rho0, t),
                f,
            )
            assert mt.split().total == pytest.approx(ref.total, rel=1e-8)

    def test_shape_validation(self):
        with pytest.raises(Exception):
            metric_tensor([0.5, 0.5], np.zeros((1, 3)), np.zeros((1, 2, 2)), QUANTUM_FISHER)


class TestUnitaryMetric:
    def test_pure_plus_state_values(self):
        omega = 1.4
        h = 0.5 * omega * np.diag([1.0, -1.0]).astype(complex)
        plus = from_bloch(BlochVector(1.0, np.pi / 2, 0.0))
        dec = spectral_decompose(plus)
        qf = unitary_metric(dec, [h], QUANTUM_FISHER).split().total
        wy = unitary_metric(dec, [h], WIGNER_YANASE).split().total
        assert qf == pytest.approx(omega**2 / 4.0, rel=1e-12)
        assert wy == pytest.approx(omega**2 / 2.0, rel=1e-12)

    def test_maximally_mixed_is_stationary(self, rng):
        dec = spectral_decompose(DensityOperator(0.5 * np.eye(2, dtype=complex)))
        mt = unitary_metric(dec, [random_hermitian(rng)], QUANTUM_FISHER)
        assert mt.split().total == pytest.approx(0.0, abs=1e-15)

    def test_fisher_below_covariance(self, rng):
        for _ in range(50):
            rho = random_density(rng, 3)
            h = random_hermitian(rng, 3)
            g = unitary_metric(spectral_decompose(rho), [h], QUANTUM_FISHER).split().total
            assert g <= symmetrized_covariance(rho, h, h) + 1e-10

    def test_wigner_yanase_equals_twice_skew(self, rng):
        for _ in range(50):
            rho = random_density(rng, 3)
            h = random_hermitian(rng, 3)
            g = unitary_metric(spectral_decompose(rho), [h], WIGNER_YANASE).split().total
            assert g == pytest.approx(2.0 * skew_information(rho, h), rel=1e-9, abs=1e-12)

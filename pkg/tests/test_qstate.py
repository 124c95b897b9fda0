import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_bloch, random_density
from qslgeo import (
    AmplitudeDamping,
    BlochVector,
    DensityOperator,
    DimensionError,
    DomainError,
    ParallelDephasing,
    UnitaryChannel,
    ValidationError,
    affinity,
    evolve,
    fidelity,
    from_bloch,
    qubit_affinity,
    qubit_fidelity,
    spectral_decompose,
    to_bloch,
)

KET0 = DensityOperator(np.diag([1.0, 0.0]).astype(complex))
KET1 = DensityOperator(np.diag([0.0, 1.0]).astype(complex))
MIXED = DensityOperator(0.5 * np.eye(2, dtype=complex))


class TestDensityOperator:
    def test_rejects_non_hermitian(self):
        with pytest.raises(ValidationError, match="Hermitian"):
            DensityOperator(np.array([[0.5, 0.1], [0.3, 0.5]], dtype=complex))

    def test_rejects_wrong_trace(self):
        with pytest.raises(ValidationError, match="trace"):
            DensityOperator(np.eye(2, dtype=complex))

    def test_rejects_negative_eigenvalue(self):
        with pytest.raises(ValidationError, match="positive"):
            DensityOperator(np.diag([1.5, -0.5]).astype(complex))

    def test_rejects_non_square(self):
        with pytest.raises(DimensionError):
            DensityOperator(np.ones((2, 3), dtype=complex) / 6.0)

    def test_matrix_is_read_only(self):
        with pytest.raises(ValueError):
            MIXED.matrix[0, 0] = 0.7


class TestBloch:
    def test_zero_vector_is_maximally_mixed(self):
        np.testing.assert_allclose(from_bloch(BlochVector(0, 0, 0)).matrix, MIXED.matrix, atol=1e-15)

    def test_north_pole(self):
        np.testing.assert_allclose(from_bloch(BlochVector(1, 0, 0)).matrix, KET0.matrix, atol=1e-15)

    def test_equatorial_half_radius(self):
        expected = np.array([[0.5, 0.25], [0.25, 0.5]], dtype=complex)
        got = from_bloch(BlochVector(0.5, np.pi / 2, 0.0)).matrix
        np.testing.assert_allclose(got, expected, atol=1e-15)

    @pytest.mark.parametrize("r,theta,phi", [(1.2, 0, 0), (0.5, 4.0, 0), (0.5, 1.0, 7.0), (-0.1, 0, 0)])
    def test_domain_errors(self, r, theta, phi):
        with pytest.raises(DomainError):
            BlochVector(r, theta, phi)

    def test_to_bloch_conventions(self):
        assert to_bloch(MIXED) == BlochVector(0.0, 0.0, 0.0)
        b = to_bloch(KET0)
        assert b.r == pytest.approx(1.0, abs=1e-12) and b.theta == pytest.approx(0.0)
        b = to_bloch(DensityOperator(np.diag([0.75, 0.25]).astype(complex)))
        assert (b.r, b.theta, b.phi) == pytest.approx((0.5, 0.0, 0.0))

    def test_to_bloch_rejects_non_qubit(self):
        with pytest.raises(DimensionError):
            to_bloch(DensityOperator(np.eye(3, dtype=complex) / 3.0))

    @settings(max_examples=100, deadline=None)
    @given(
        r=st.floats(0.0, 1.0),
        theta=st.floats(0.0, np.pi),
        phi=st.floats(0.0, 2.0 * np.pi, exclude_max=True),
    )
    def test_round_trip(self, r, theta, phi):
        b = BlochVector(r, theta, phi)
        again = from_bloch(to_bloch(from_bloch(b)))
        np.testing.assert_allclose(again.matrix, from_bloch(b).matrix, atol=1e-12)


class TestSpectralDecompose:
    def test_maximally_mixed(self):
        dec = spectral_decompose(MIXED)
        np.testing.assert_allclose(dec.eigenvalues, [0.5, 0.5])

    def test_bloch_eigenvalues(self, rng):
        for _ in range(20):
            b = random_bloch(rng)
            dec = spectral_decompose(from_bloch(b))
            np.testing.assert_allclose(dec.eigenvalues, [(1 + b.r) / 2, (1 - b.r) / 2], atol=1e-12)

    def test_reconstruction_random_qutrit(self, rng):
        for _ in range(25):
            rho = random_density(rng, 3)
            dec = spectral_decompose(rho)
            assert np.max(np.abs(dec.reconstruct() - rho.matrix)) <= 1e-10

    def test_orthonormal_and_descending(self, rng):
        dec = spectral_decompose(random_density(rng, 4))
        gram = dec.eigenvectors.conj().T @ dec.eigenvectors
        np.testing.assert_allclose(gram, np.eye(4), atol=1e-10)
        assert np.all(np.diff(dec.eigenvalues) <= 1e-14)

    def test_deterministic_ordering(self, rng):
        rho = random_density(rng, 3)
        a = spectral_decompose(rho)
        b = spectral_decompose(rho)
        np.testing.assert_array_equal(a.eigenvalues, b.eigenvalues)
        np.testing.assert_array_equal(a.eigenvectors, b.eigenvectors)

    def test_rank_threshold_domain(self):
        with pytest.raises(DomainError):
            spectral_decompose(MIXED, rank_threshold=0.0)
        with pytest.raises(DomainError):
            spectral_decompose(MIXED, rank_threshold=1e-3)


class TestFidelityAffinity:
    def test_identity_cases(self, rng):
        for _ in range(5):
            rho = random_density(rng, 3)
            assert fidelity(rho, rho) == pytest.approx(1.0, abs=1e-12)
            assert affinity(rho, rho) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal_pure(self):
        assert fidelity(KET0, KET1) == pytest.approx(0.0, abs=1e-12)
        assert affinity(KET0, KET1) == pytest.approx(0.0, abs=1e-12)

    def test_pure_versus_mixed(self):
        assert fidelity(KET0, MIXED) == pytest.approx(0.5, abs=1e-12)
        assert affinity(KET0, MIXED) == pytest.approx(1.0 / np.sqrt(2.0), abs=1e-12)

    def test_symmetry_and_range(self, rng):
        for _ in range(30):
            a, b = random_density(rng, 3), random_density(rng, 3)
            f1, f2 = fidelity(a, b), fidelity(b, a)
            assert abs(f1 - f2) <= 1e-10 and 0.0 <= f1 <= 1.0
            a1, a2 = affinity(a, b), affinity(b, a)
            assert abs(a1 - a2) <= 1e-10 and 0.0 <= a1 <= 1.0

    def test_dimension_mismatch(self, rng):
        with pytest.raises(DimensionError):
            fidelity(MIXED, random_density(rng, 3))
        with pytest.raises(DimensionError):
            affinity(MIXED, random_density(rng, 3))

    def test_affinity_below_root_fidelity(self, rng):
        # empirical monotone relation, monitored rather than proven
        for _ in range(200):
            a, b = random_density(rng), random_density(rng)
            assert affinity(a, b) <= np.sqrt(fidelity(a, b)) + 1e-10


class TestQubitClosedForms:
    def test_equal_arguments(self, rng):
        b = random_bloch(rng)
        assert qubit_fidelity(b, b) == pytest.approx(1.0, abs=1e-12)
        pure = BlochVector(1.0, 0.7, 0.3)
        assert qubit_affinity(pure, pure) == pytest.approx(1.0, abs=1e-12)

    def test_antipodal_pure(self):
        a = BlochVector(1.0, 0.4, 1.0)
        b = BlochVector(1.0, np.pi - 0.4, 1.0 + np.pi)
        assert qubit_fidelity(a, b) == pytest.approx(0.0, abs=1e-12)
        assert qubit_affinity(a, b) == pytest.approx(0.0, abs=1e-12)

    def test_both_maximally_mixed(self):
        z = BlochVector(0.0, 0.0, 0.0)
        assert qubit_affinity(z, z) == pytest.approx(1.0, abs=1e-14)
        assert qubit_fidelity(z, z) == pytest.approx(1.0, abs=1e-14)

    def test_matches_general_formulas(self, rng):
        for _ in range(200):
            a, b = random_bloch(rng), random_bloch(rng)
            ra, rb = from_bloch(a), from_bloch(b)
            assert abs(qubit_fidelity(a, b) - fidelity(ra, rb)) <= 1e-10
            assert abs(qubit_affinity(a, b) - affinity(ra, rb)) <= 1e-10

    def test_one_argument_mixed_affinity(self, rng):
        z = BlochVector(0.0, 0.0, 0.0)
        for _ in range(20):
            b = random_bloch(rng)
            assert abs(qubit_affinity(z, b) - affinity(MIXED, from_bloch(b))) <= 1e-10


class TestContractivity:
    def test_angles_contract_under_channels(self, rng):
        channels = [
            ParallelDephasing(1.3, 0.7),
            AmplitudeDamping(0.9),
            UnitaryChannel.from_constant_hamiltonian(np.array([[0.3, 0.2], [0.2, -0.3]], dtype=complex)),
        ]
        for _ in range(40):
            rho, sig = random_density(rng), random_density(rng)
            ch = channels[int(rng.integers(0, len(channels)))]
            t = float(rng.uniform(0.0, 2.0))
            rho_t, sig_t = evolve(ch, rho, t), evolve(ch, sig, t)
            before = np.arccos(np.sqrt(fidelity(rho, sig)))
            after = np.arccos(np.sqrt(fidelity(rho_t, sig_t)))
            assert after <= before + 1e-9
            before = np.arccos(affinity(rho, sig))
            after = np.arccos(affinity(rho_t, sig_t))
            assert after <= before + 1e-9

"""Density operators, Bloch parameterization, and statistical distance.

The two distance primitives implemented here, Uhlmann fidelity and
quantum affinity, are the endpoints of the geodesic lengths used by the
speed-limit engine (Bures angle and Hellinger angle respectively).  For
qubits both admit closed forms in the Bloch vectors, which are exposed
separately and cross-checked against the general matrix expressions.

All matrices are dense complex numpy arrays; the design target is small
dimensions (d <= 64), where full eigendecomposition is cheap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DomainError, ValidationError

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
DEFAULT_RANK_THRESHOLD = 1e-12

sigma_x = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
sigma_y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
sigma_z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
identity2 = np.eye(2, dtype=complex)
PAULI = (sigma_x, sigma_y, sigma_z)


def _as_complex_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    return a


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """A trace-one Hermitian positive-semidefinite matrix.

    Invariants (checked at construction):
      * Hermitian to 1e-12 per entry,
      * unit trace to 1e-12,
      * smallest eigenvalue >= -1e-10.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = _as_complex_matrix(self.matrix)
        herm = np.max(np.abs(m - m.conj().T))
        if herm > HERMITICITY_TOL:
            raise ValidationError(f"matrix is not Hermitian (max deviation {herm:.3e})")
        tr = m.trace()
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValidationError(f"trace is {tr}, expected 1")
        lam_min = float(np.linalg.eigvalsh(m)[0])
        if lam_min < -PSD_TOL:
            raise ValidationError(f"matrix is not positive semidefinite (min eigenvalue {lam_min:.3e})")
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix)[0])

    def isclose(self, other: "DensityOperator", tol: float = 1e-12) -> bool:
        return self.dim == other.dim and np.max(np.abs(self.matrix - other.matrix)) <= tol


@dataclass(frozen=True)
class BlochVector:
    """Qubit state coordinates (r, theta, phi), radii in [0, 1]."""

    r: float
    theta: float
    phi: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.r <= 1.0:
            raise DomainError(f"radius r={self.r} outside [0, 1]")
        if not 0.0 <= self.theta <= np.pi:
            raise DomainError(f"polar angle theta={self.theta} outside [0, pi]")
        if not 0.0 <= self.phi < 2.0 * np.pi:
            raise DomainError(f"azimuthal angle phi={self.phi} outside [0, 2*pi)")

    def cartesian(self) -> np.ndarray:
        """The Bloch vector (x, y, z) as a real 3-array."""
        st = np.sin(self.theta)
        return self.r * np.array([st * np.cos(self.phi), st * np.sin(self.phi), np.cos(self.theta)])


def from_bloch(b: BlochVector) -> DensityOperator:
    """Build (1/2)(I + r.sigma) from Bloch coordinates."""
    x, y, z = b.cartesian()
    m = 0.5 * (identity2 + x * sigma_x + y * sigma_y + z * sigma_z)
    return DensityOperator(m)


def to_bloch(rho: DensityOperator) -> BlochVector:
    """Invert :func:`from_bloch`; requires a qubit state.

    Degenerate angles use the conventional values: theta = phi = 0 at
    the maximally mixed state, phi = 0 on the z axis.
    """
    if rho.dim != 2:
        raise DimensionError(f"Bloch coordinates require dim 2, got {rho.dim}")
    m = rho.matrix
    x = float(np.real(np.trace(m @ sigma_x)))
    y = float(np.real(np.trace(m @ sigma_y)))
    z = float(np.real(np.trace(m @ sigma_z)))
    r = float(np.sqrt(x * x + y * y + z * z))
    if r < 1e-15:
        return BlochVector(0.0, 0.0, 0.0)
    r = min(r, 1.0)
    # arctan2 of the transverse magnitude is well conditioned at the poles
    theta = float(np.arctan2(np.hypot(x, y), z))
    if abs(x) < 1e-15 and abs(y) < 1e-15:
        phi = 0.0
    else:
        phi = float(np.arctan2(y, x)) % (2.0 * np.pi)
        if phi >= 2.0 * np.pi:
            phi = 0.0
    return BlochVector(r, theta, phi)


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Eigenvalues (descending) and orthonormal eigenvectors of a state.

    ``eigenvalues[j]`` pairs with the column ``eigenvectors[:, j]``.
    Eigenvalues at or below ``rank_threshold`` are treated as exactly
    zero by the metric sums downstream.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    rank_threshold: float = DEFAULT_RANK_THRESHOLD

    def __post_init__(self):
        p = np.asarray(self.eigenvalues, dtype=float)
        v = np.asarray(self.eigenvectors, dtype=complex)
        if v.ndim != 2 or v.shape[0] != v.shape[1] or p.shape != (v.shape[0],):
            raise DimensionError("eigenvalue/eigenvector shape mismatch")
        if np.any(np.diff(p) > 1e-14):
            raise ValidationError("eigenvalues must be in descending order")
        if abs(p.sum() - 1.0) > 1e-10:
            raise ValidationError(f"eigenvalues sum to {p.sum()}, expected 1")
        if p[-1] < -1e-10:
            raise ValidationError(f"negative eigenvalue {p[-1]:.3e}")
        gram = v.conj().T @ v
        if np.max(np.abs(gram - np.eye(v.shape[0]))) > 1e-10:
            raise ValidationError("eigenvectors are not orthonormal")
        p = p.copy()
        v = v.copy()
        p.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "eigenvalues", p)
        object.__setattr__(self, "eigenvectors", v)

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def support(self) -> np.ndarray:
        """Boolean mask of eigenvalues above the rank threshold."""
        return self.eigenvalues > self.rank_threshold

    def reconstruct(self) -> np.ndarray:
        return (self.eigenvectors * self.eigenvalues) @ self.eigenvectors.conj().T


def _fix_phases(vectors: np.ndarray) -> np.ndarray:
    """Make the first non-negligible component of each column real positive."""
    v = vectors.copy()
    d = v.shape[1]
    for j in range(d):
        col = v[:, j]
        idx = np.flatnonzero(np.abs(col) > 1e-12)
        if idx.size:
            pivot = col[idx[0]]
            v[:, j] = col * (abs(pivot) / pivot)
    return v


def spectral_decompose(rho: DensityOperator, rank_threshold: float = DEFAULT_RANK_THRESHOLD) -> SpectralDecomposition:
    """Eigendecompose a state with a deterministic ordering convention.

    Eigenvalues are sorted descending; exact ties are broken by the
    lexicographic order of the phase-fixed eigenvector components.
    """
    if not 0.0 < rank_threshold <= 1e-6:
        raise DomainError(f"rank_threshold {rank_threshold} outside (0, 1e-6]")
    m = rho.matrix
    if np.max(np.abs(m - m.conj().T)) > HERMITICITY_TOL:
        raise ValidationError("input is not Hermitian")
    w, v = np.linalg.eigh(m)
    w = w[::-1]
    v = _fix_phases(v[:, ::-1])
    # stable tie-break on exactly equal eigenvalues
    order = sorted(range(w.size), key=lambda j: (-w[j], tuple(zip(v[:, j].real, v[:, j].imag))))
    w = w[order]
    v = v[:, order]
    dec = SpectralDecomposition(w, v, rank_threshold)
    resid = np.max(np.abs(dec.reconstruct() - m))
    if resid > 1e-10:
        raise ValidationError(f"spectral reconstruction residual {resid:.3e}")
    return dec


def psd_sqrt(matrix: np.ndarray) -> np.ndarray:
    """Hermitian square root, with eigenvalues clamped at zero first.

    Eigenvalues within a few machine epsilons of zero are snapped to
    exactly zero before rooting; sqrt would otherwise amplify their
    noise from O(eps) to O(sqrt(eps)).
    """
    m = _as_complex_matrix(matrix)
    w, v = np.linalg.eigh(m)
    floor = 64.0 * np.finfo(float).eps * max(float(w[-1]), 0.0)
    w = np.sqrt(np.where(w > floor, w, 0.0))
    return (v * w) @ v.conj().T


def _check_same_dim(rho: DensityOperator, sigma: DensityOperator):
    if rho.dim != sigma.dim:
        raise DimensionError(f"dimension mismatch: {rho.dim} vs {sigma.dim}")


def fidelity(rho: DensityOperator, sigma: DensityOperator) -> float:
    """Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2, in [0, 1]."""
    _check_same_dim(rho, sigma)
    s = psd_sqrt(rho.matrix)
    w = np.linalg.eigvalsh(s @ sigma.matrix @ s)
    val = float(np.sum(np.sqrt(np.clip(w, 0.0, None))) ** 2)
    return min(max(val, 0.0), 1.0)


def affinity(rho: DensityOperator, sigma: DensityOperator) -> float:
    """Quantum affinity Tr(sqrt(rho) sqrt(sigma)), in [0, 1]."""
    _check_same_dim(rho, sigma)
    val = float(np.real(np.trace(psd_sqrt(rho.matrix) @ psd_sqrt(sigma.matrix))))
    return min(max(val, 0.0), 1.0)


def qubit_fidelity(a: BlochVector, b: BlochVector) -> float:
    """Closed-form qubit fidelity from the two Bloch vectors."""
    ra = a.cartesian()
    rb = b.cartesian()
    val = 0.5 * (1.0 + float(ra @ rb) + np.sqrt(max((1.0 - a.r**2) * (1.0 - b.r**2), 0.0)))
    return min(max(val, 0.0), 1.0)


def qubit_affinity(a: BlochVector, b: BlochVector) -> float:
    """Closed-form qubit affinity from the two Bloch vectors.

    When either radius vanishes the angular term carries a factor that
    is identically zero, so it is dropped rather than evaluated as 0/0.
    """
    ep_a = np.sqrt(1.0 + a.r) + np.sqrt(1.0 - a.r)
    em_a = np.sqrt(1.0 + a.r) - np.sqrt(1.0 - a.r)
    ep_b = np.sqrt(1.0 + b.r) + np.sqrt(1.0 - b.r)
    em_b = np.sqrt(1.0 + b.r) - np.sqrt(1.0 - b.r)
    if a.r < 1e-15 or b.r < 1e-15:
        angular = 0.0
    else:
        angular = em_a * em_b * float(a.cartesian() @ b.cartesian()) / (a.r * b.r)
    val = 0.25 * (ep_a * ep_b + angular)
    return min(max(val, 0.0), 1.0)

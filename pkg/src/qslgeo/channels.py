"""Qubit dynamics: unitary evolution and three canonical noise channels.

Each channel exposes the evolved state, the analytic time derivative of
the state (the Lindblad right-hand side for the noise channels, the
commutator for unitaries), and, for the noise channels, analytic
spectral decompositions and metric contributions that serve as oracles
for the numeric pipeline.

Conventions: hbar = 1 throughout.  The dephasing channels share the
Hamiltonian (omega0/2) sigma_z and decoherence rate Gamma; parallel
dephasing damps in the sigma_z basis, transversal dephasing in the
sigma_x basis, amplitude damping contracts the Bloch sphere toward |0>.
For transversal dephasing the oscillation rate Omega = sqrt(1 - 4 beta^2)
turns imaginary for beta > 1/2; the implementation uses the real-valued
trigonometric continuation there, which is validated against direct
integration of the master equation in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DimensionError, DomainError, SingularPointError, ValidationError
from .mcmetric import MCFunction, MetricSplit, c_kernel
from .qstate import BlochVector, DensityOperator, sigma_x, sigma_z

_UNITARITY_TOL = 1e-10


def _as_times(t) -> np.ndarray:
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(ts < 0.0):
        raise DomainError("evolution times must be nonnegative")
    return ts


class ParallelDephasing:
    """Phase damping in the Hamiltonian (sigma_z) basis."""

    dim = 2

    def __init__(self, omega0: float, gamma: float):
        if gamma <= 0.0:
            raise DomainError("decoherence rate must be positive")
        self.omega0 = float(omega0)
        self.gamma = float(gamma)

    @property
    def beta(self) -> float:
        return self.omega0 / self.gamma

    def kraus_operators(self, t: float):
        """The two Kraus operators at time t."""
        ts = _as_times(t)
        q = np.exp(-self.gamma * ts[0])
        ph = np.exp(-0.5j * self.omega0 * ts[0])
        k0 = np.sqrt((1.0 + q) / 2.0) * np.array([[ph, 0.0], [0.0, np.conj(ph)]])
        k1 = np.sqrt((1.0 - q) / 2.0) * np.array([[ph, 0.0], [0.0, -np.conj(ph)]])
        return k0, k1

    def _evolve_matrices(self, rho0: np.ndarray, ts: np.ndarray) -> np.ndarray:
        q = np.exp(-self.gamma * ts)
        ph = np.exp(-1j * self.omega0 * ts)
        out = np.empty((ts.size, 2, 2), dtype=complex)
        out[:, 0, 0] = rho0[0, 0]
        out[:, 1, 1] = rho0[1, 1]
        out[:, 0, 1] = q * ph * rho0[0, 1]
        out[:, 1, 0] = np.conj(out[:, 0, 1])
        return out

    def _derivative_matrices(self, rho0: np.ndarray, ts: np.ndarray) -> np.ndarray:
        rt = self._evolve_matrices(rho0, ts)
        out = np.zeros_like(rt)
        out[:, 0, 1] = (-1j * self.omega0 - self.gamma) * rt[:, 0, 1]
        out[:, 1, 0] = np.conj(out[:, 0, 1])
        return out


class TransversalDephasing:
    """Phase damping in a basis orthogonal to the Hamiltonian (sigma_x)."""

    dim = 2

    def __init__(self, omega0: float, gamma: float):
        if gamma <= 0.0:
            raise DomainError("decoherence rate must be positive")
        self.omega0 = float(omega0)
        self.gamma = float(gamma)

    @property
    def beta(self) -> float:
        return self.omega0 / self.gamma

    def _evolve_matrices(self, rho0: np.ndarray, ts: np.ndarray) -> np.ndarray:
        a, b, c, d, f = _td_entries(self.beta, self.gamma * ts)
        r00, r01, r10, r11 = rho0[0, 0], rho0[0, 1], rho0[1, 0], rho0[1, 1]
        out = np.empty((ts.size, 2, 2), dtype=complex)
        out[:, 0, 0] = a * r00 + d * r11
        out[:, 1, 1] = d * r00 + a * r11
        out[:, 0, 1] = (b - 1j * c) * r01 + f * r10
        out[:, 1, 0] = (b + 1j * c) * r10 + f * r01
        return out

    def _derivative_matrices(self, rho0: np.ndarray, ts: np.ndarray) -> np.ndarray:
        rt = self._evolve_matrices(rho0, ts)
        return _td_lindblad_rhs(rt, self.omega0, self.gamma)


class AmplitudeDamping:
    """Dissipation toward |0> with rate Gamma (characteristic time 1/Gamma)."""

    dim = 2

    def __init__(self, gamma: float):
        if gamma <= 0.0:
            raise DomainError("damping rate must be positive")
        self.gamma = float(gamma)

    def kraus_operators(self, t: float):
        ts = _as_times(t)
        lam = -np.expm1(-self.gamma * ts[0])
        k0 = np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - lam)]], dtype=complex)
        k1 = np.array([[0.0, np.sqrt(lam)], [0.0, 0.0]], dtype=complex)
        return k0, k1

    def _evolve_matrices(self, rho0: np.ndarray, ts: np.ndarray) -> np.ndarray:
        lam = -np.expm1(-self.gamma * ts)
        out = np.empty((ts.size, 2, 2), dtype=complex)
        out[:, 0, 0] = rho0[0, 0] + lam * rho0[1, 1]
        out[:, 1, 1] = (1.0 - lam) * rho0[1, 1]
        out[:, 0, 1] = np.sqrt(1.0 - lam) * rho0[0, 1]
        out[:, 1, 0] = np.conj(out[:, 0, 1])
        return out

    def _derivative_matrices(self, rho0: np.ndarray, ts: np.ndarray) -> np.ndarray:
        rt = self._evolve_matrices(rho0, ts)
        out = np.empty_like(rt)
        out[:, 0, 0] = self.gamma * rt[:, 1, 1]
        out[:, 1, 1] = -self.gamma * rt[:, 1, 1]
        out[:, 0, 1] = -0.5 * self.gamma * rt[:, 0, 1]
        out[:, 1, 0] = np.conj(out[:, 0, 1])
        return out


class UnitaryChannel:
    """Evolution by a user-supplied propagator U(t).

    The propagator must return a unitary matrix for every t >= 0.  The
    generator driving the dynamics is recovered by finite differences of
    the propagator unless an explicit Hamiltonian function is supplied
    (as done by :meth:`from_constant_hamiltonian`, which also enables a
    vectorized exact fast path).
    """

    def __init__(self, propagator: Callable[[float], np.ndarray],
                 hamiltonian: Callable[[float], np.ndarray] | None = None):
        self.propagator = propagator
        self.hamiltonian = hamiltonian
        self._const_eig = None
        u0 = np.asarray(propagator(0.0), dtype=complex)
        if u0.ndim != 2 or u0.shape[0] != u0.shape[1]:
            raise DimensionError("propagator must return square matrices")
        self.dim = u0.shape[0]

    @classmethod
    def from_constant_hamiltonian(cls, h: np.ndarray) -> "UnitaryChannel":
        h = np.asarray(h, dtype=complex)
        if np.max(np.abs(h - h.conj().T)) > 1e-12:
            raise ValidationError("Hamiltonian must be Hermitian")
        w, v = np.linalg.eigh(h)

        def propagator(t: float) -> np.ndarray:
            return (v * np.exp(-1j * w * t)) @ v.conj().T

        ch = cls(propagator, hamiltonian=lambda t: h)
        ch._const_eig = (w, v)
        return ch

    def _propagators(self, ts: np.ndarray) -> np.ndarray:
        if self._const_eig is not None:
            w, v = self._const_eig
            phases = np.exp(-1j * np.outer(ts, w))
            return np.einsum("ij,nj,kj->nik", v, phases, v.conj())
        us = np.empty((ts.size, self.dim, self.dim), dtype=complex)
        eye = np.eye(self.dim)
        for n, t in enumerate(ts):
            u = np.asarray(self.propagator(t), dtype=complex)
            if np.max(np.abs(u.conj().T @ u - eye)) > _UNITARITY_TOL:
                raise ValidationError(f"propagator is not unitary at t = {t}")
            us[n] = u
        return us

    def _evolve_matrices(self, rho0: np.ndarray, ts: np.ndarray) -> np.ndarray:
        us = self._propagators(ts)
        return np.einsum("nij,jk,nlk->nil", us, rho0, us.conj())

    def _generators(self, ts: np.ndarray) -> np.ndarray:
        if self.hamiltonian is not None:
            return np.stack([np.asarray(self.hamiltonian(t), dtype=complex) for t in ts])
        return np.stack([unitary_generator(self.propagator, t) for t in ts])

    def _derivative_matrices(self, rho0: np.ndarray, ts: np.ndarray) -> np.ndarray:
        rt = self._evolve_matrices(rho0, ts)
        hs = self._generators(ts)
        return -1j * (hs @ rt - rt @ hs)


Channel = ParallelDephasing | TransversalDephasing | AmplitudeDamping | UnitaryChannel


def _check_scalar_time(ch: Channel, rho0: DensityOperator, t: float) -> np.ndarray:
    ts = _as_times(t)
    if ts.size != 1:
        raise DomainError("expected a scalar time")
    if rho0.dim != ch.dim:
        kind = "this channel" if isinstance(ch, UnitaryChannel) else "noise channels (qubits only)"
        raise DimensionError(f"state dimension {rho0.dim} does not match {kind} with dim {ch.dim}")
    return ts


def evolve(ch: Channel, rho0: DensityOperator, t: float) -> DensityOperator:
    """Apply the channel for a duration t >= 0."""
    ts = _check_scalar_time(ch, rho0, t)
    if ts[0] == 0.0:
        return rho0
    m = ch._evolve_matrices(rho0.matrix, ts)[0]
    m = 0.5 * (m + m.conj().T)
    return DensityOperator(m)


def state_derivative(ch: Channel, rho0: DensityOperator, t: float) -> np.ndarray:
    """d rho_t / dt as a traceless Hermitian matrix."""
    ts = _check_scalar_time(ch, rho0, t)
    m = ch._derivative_matrices(rho0.matrix, ts)[0]
    return 0.5 * (m + m.conj().T)


def unitary_generator(u: Callable[[float], np.ndarray], t: float, dt: float | None = None) -> np.ndarray:
    """Recover H_t = -i U(t) dU(t)^dag/dt by central finite differences.

    The step defaults to max(1e-6, 1e-6 * t); a one-sided second-order
    stencil is used when t - dt would be negative.
    """
    h = dt if dt is not None else max(1e-6, 1e-6 * abs(t))
    ut = np.asarray(u(t), dtype=complex)
    eye = np.eye(ut.shape[0])
    if np.max(np.abs(ut.conj().T @ ut - eye)) > _UNITARITY_TOL:
        raise ValidationError(f"propagator is not unitary at t = {t}")
    if t - h >= 0.0:
        dudag = (np.asarray(u(t + h), dtype=complex).conj().T
                 - np.asarray(u(t - h), dtype=complex).conj().T) / (2.0 * h)
    else:
        dudag = (-3.0 * ut.conj().T
                 + 4.0 * np.asarray(u(t + h), dtype=complex).conj().T
                 - np.asarray(u(t + 2.0 * h), dtype=complex).conj().T) / (2.0 * h)
    g = -1j * ut @ dudag
    return 0.5 * (g + g.conj().T)


# ---------------------------------------------------------------------------
# analytic spectra and metric contributions
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class AnalyticSpectrum:
    """Closed-form eigenvalues/eigenvectors of an evolved qubit state."""

    p_plus: float
    p_minus: float
    vec_plus: np.ndarray
    vec_minus: np.ndarray
    aux: dict = field(default_factory=dict)

    def __post_init__(self):
        if abs(self.p_plus + self.p_minus - 1.0) > 1e-12:
            raise ValidationError("analytic eigenvalues do not sum to 1")
        gram = np.array([
            [np.vdot(self.vec_plus, self.vec_plus), np.vdot(self.vec_plus, self.vec_minus)],
            [np.vdot(self.vec_minus, self.vec_plus), np.vdot(self.vec_minus, self.vec_minus)],
        ])
        if np.max(np.abs(gram - np.eye(2))) > 1e-10:
            raise ValidationError("analytic eigenvectors are not orthonormal")

    def matrix(self) -> np.ndarray:
        return (self.p_plus * np.outer(self.vec_plus, self.vec_plus.conj())
                + self.p_minus * np.outer(self.vec_minus, self.vec_minus.conj()))


def _normalized_pair(vp, vm):
    """Normalize the stated eigenvector pair, completing a vanishing one."""
    vp = np.asarray(vp, dtype=complex)
    vm = np.asarray(vm, dtype=complex)
    np_, nm = np.linalg.norm(vp), np.linalg.norm(vm)
    if np_ < 1e-12 and nm < 1e-12:
        return np.array([1.0 + 0j, 0.0]), np.array([0.0, 1.0 + 0j])
    if np_ < 1e-12:
        vm = vm / nm
        vp = np.array([-np.conj(vm[1]), np.conj(vm[0])])
        return vp, vm
    vp = vp / np_
    if nm < 1e-12:
        vm = np.array([-np.conj(vp[1]), np.conj(vp[0])])
        return vp, vm
    return vp, vm / nm


def pd_spectrum(b0: BlochVector, omega0: float, gamma: float, t: float) -> AnalyticSpectrum:
    """Spectral decomposition of a state under parallel dephasing."""
    ts = _as_times(t)
    if gamma <= 0.0:
        raise DomainError("decoherence rate must be positive")
    q = float(np.exp(-gamma * ts[0]))
    ct, st = np.cos(b0.theta), np.sin(b0.theta)
    xi = float(np.sqrt(ct * ct + q * q * st * st))
    p_plus = 0.5 * (1.0 + b0.r * xi)
    p_minus = 0.5 * (1.0 - b0.r * xi)
    if b0.r * xi < 1e-14:
        vp, vm = np.array([1.0 + 0j, 0.0]), np.array([0.0, 1.0 + 0j])
    else:
        phase = np.exp(1j * (omega0 * ts[0] + b0.phi))
        vp, vm = _normalized_pair([ct + xi, phase * q * st], [ct - xi, phase * q * st])
    return AnalyticSpectrum(p_plus, p_minus, vp, vm, {"xi": xi, "q": q})


def pd_analytic_fq(b0: BlochVector, omega0: float, gamma: float, t: float, f: MCFunction) -> MetricSplit:
    """Closed-form classical/quantum metric parts for parallel dephasing.

    Both parts are rates per physical time squared.  The classical part
    hits a boundary singularity only for pure initial states off the z
    axis at t = 0.
    """
    ts = _as_times(t)
    if gamma <= 0.0:
        raise DomainError("decoherence rate must be positive")
    q = float(np.exp(-gamma * ts[0]))
    dq = -gamma * q
    ct, st = np.cos(b0.theta), np.sin(b0.theta)
    xi2 = ct * ct + q * q * st * st
    r2 = b0.r * b0.r
    num_f = r2 * q * q * st**4 * dq * dq
    den_f = 4.0 * xi2 * (1.0 - r2 * xi2)
    if den_f < 1e-15:
        if num_f > 1e-15:
            raise SingularPointError("classical part singular at the pure-state boundary", t=ts[0])
        classical = 0.0
    else:
        classical = num_f / den_f
    xi = np.sqrt(xi2)
    p_plus = 0.5 * (1.0 + b0.r * xi)
    p_minus = 0.5 * (1.0 - b0.r * xi)
    cf = c_kernel(f, p_plus, p_minus)
    quantum = 0.125 * (omega0**2 * q * q + ct * ct * dq * dq / xi2) * r2 * st * st * cf
    return MetricSplit(float(classical), float(quantum))


def _td_osc(beta: float, u):
    """Branch-free cosh/sinhc pair for the transversal oscillation.

    Returns (ch, s) with ch = cosh(Omega u/2) and s = sinh(Omega u/2)/Omega,
    continued through imaginary Omega (beta > 1/2) and the Omega -> 0
    degeneracy via series.
    """
    u = np.asarray(u, dtype=float)
    w = (1.0 - 4.0 * beta * beta) * u * u / 4.0
    small = np.abs(w) < 1e-6
    ws = np.where(small, w, 0.0)
    ch_small = 1.0 + ws / 2.0 + ws**2 / 24.0 + ws**3 / 720.0
    sc_small = 1.0 + ws / 6.0 + ws**2 / 120.0 + ws**3 / 5040.0
    wb = np.where(small, 1.0, w)
    x = np.sqrt(np.abs(wb))
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        ch_big = np.where(wb > 0.0, np.cosh(x), np.cos(x))
        sc_big = np.where(wb > 0.0, np.sinh(x), np.sin(x)) / x
    ch = np.where(small, ch_small, ch_big)
    s = (u / 2.0) * np.where(small, sc_small, sc_big)
    return ch, s


def _td_entries(beta: float, u):
    """The five real parameters of the transversal-dephasing map at u = Gamma t."""
    u = np.asarray(u, dtype=float)
    ch, s = _td_osc(beta, u)
    eu = np.exp(-u)
    eh = np.exp(-u / 2.0)
    a = 0.5 * (1.0 + eu)
    d = 0.5 * (1.0 - eu)
    b = eh * ch
    c = 2.0 * beta * eh * s
    f = eh * s
    return a, b, c, d, f


def td_smatrix(beta: float, u: float) -> np.ndarray:
    """The 4x4 Hermitian process matrix of transversal dephasing.

    Index 0 is the identity and 1..3 the Pauli operators; the evolved
    state is (1/2) sum_ij S_ij sigma_i rho sigma_j.
    """
    if u < 0.0 or beta < 0.0:
        raise DomainError("td_smatrix requires u >= 0 and beta >= 0")
    a, b, c, d, f = (float(x) for x in _td_entries(beta, np.asarray(u, dtype=float)))
    s = np.zeros((4, 4), dtype=complex)
    s[0, 0] = a + b
    s[1, 1] = d + f
    s[2, 2] = d - f
    s[3, 3] = a - b
    s[0, 3] = 1j * c
    s[3, 0] = -1j * c
    return s


def _td_lindblad_rhs(rt: np.ndarray, omega0: float, gamma: float) -> np.ndarray:
    h = 0.5 * omega0 * sigma_z
    comm = h @ rt - rt @ h
    flip = np.einsum("ij,njk,kl->nil", sigma_x, rt, sigma_x)
    return -1j * comm - 0.5 * gamma * (rt - flip)


def _td_pure_gap(beta: float, u: float, g_val: float) -> float:
    """1 - e^{-u} G, computed stably near u = 0 where it is O(u^3)."""
    if u <= 1e-3:
        b2 = beta * beta
        return b2 * u**3 * (2.0 / 3.0 - u / 2.0 + (7.0 - 4.0 * b2) * u * u / 30.0)
    return 1.0 - np.exp(-u) * g_val


def td_plus_fq(beta: float, u: float, f: MCFunction) -> MetricSplit:
    """Closed-form metric parts for transversal dephasing of the plus state.

    Both parts are rates per dimensionless time u = Gamma t squared;
    multiply by Gamma^2 for physical-time rates.  The u -> 0 limit is
    handled by series (the classical part vanishes linearly there).
    """
    if u < 0.0 or beta < 0.0:
        raise DomainError("td_plus_fq requires u >= 0 and beta >= 0")
    if beta == 0.0:
        # without the Hamiltonian the plus state is a channel fixed point
        return MetricSplit(0.0, 0.0)
    ch, s = (float(x) for x in _td_osc(beta, np.asarray(u, dtype=float)))
    g_val = 1.0 + 2.0 * s * (s + ch)
    gap = max(_td_pure_gap(beta, u, g_val), 0.0)
    eu = float(np.exp(-u))
    if gap <= 0.0:
        classical = 0.0
    else:
        classical = 4.0 * beta**4 * eu * s**4 / (g_val * gap)
    xi = np.sqrt(eu * g_val) if u > 1e-3 else np.sqrt(max(1.0 - gap, 0.0))
    p_minus = gap / (2.0 * (1.0 + xi))
    p_plus = 1.0 - p_minus
    quantum = beta**2 * eu * c_kernel(f, p_plus, p_minus) / (8.0 * g_val)
    return MetricSplit(float(classical), float(quantum))


def ad_spectrum(b0: BlochVector, gamma: float, t: float) -> AnalyticSpectrum:
    """Spectral decomposition of a state under amplitude damping."""
    ts = _as_times(t)
    if gamma <= 0.0:
        raise DomainError("damping rate must be positive")
    lam = float(-np.expm1(-gamma * ts[0]))
    ct, st = np.cos(b0.theta), np.sin(b0.theta)
    zeta = 1.0 - b0.r**2 + lam * (1.0 - b0.r * ct) ** 2
    theta_t = float(np.sqrt(max(1.0 - zeta * (1.0 - lam), 0.0)))
    sigma_t = lam + b0.r * (1.0 - lam) * ct
    p_plus = 0.5 * (1.0 + theta_t)
    p_minus = 0.5 * (1.0 - theta_t)
    if theta_t < 1e-14:
        vp, vm = np.array([1.0 + 0j, 0.0]), np.array([0.0, 1.0 + 0j])
    else:
        w = np.exp(1j * b0.phi) * b0.r * np.sqrt(1.0 - lam) * st
        vp, vm = _normalized_pair([sigma_t + theta_t, w], [sigma_t - theta_t, w])
    return AnalyticSpectrum(p_plus, p_minus, vp, vm,
                            {"theta_t": theta_t, "zeta_t": zeta, "sigma_t": sigma_t, "lam": lam})


def ad_analytic_fq(b0: BlochVector, gamma: float, t: float, f: MCFunction) -> MetricSplit:
    """Closed-form classical/quantum metric parts for amplitude damping.

    Both parts are rates per physical time squared.  Raises
    :class:`SingularPointError` when the trajectory crosses the
    maximally mixed state (theta_t = 0), where the expressions are 0/0.
    """
    ts = _as_times(t)
    if gamma <= 0.0:
        raise DomainError("damping rate must be positive")
    lam = float(-np.expm1(-gamma * ts[0]))
    one_m = 1.0 - lam
    ct, st = np.cos(b0.theta), np.sin(b0.theta)
    zeta = 1.0 - b0.r**2 + lam * (1.0 - b0.r * ct) ** 2
    theta2 = 1.0 - zeta * one_m
    if theta2 < 1e-24:
        raise SingularPointError("amplitude-damping metric singular at the maximally mixed crossing", t=ts[0])
    sigma_t = lam + b0.r * one_m * ct
    dlam = gamma * one_m
    classical = dlam**2 * (zeta - one_m * (1.0 - b0.r * ct) ** 2) ** 2 / (16.0 * theta2 * zeta * one_m)
    theta_t = np.sqrt(theta2)
    cf = c_kernel(f, 0.5 * (1.0 + theta_t), 0.5 * (1.0 - theta_t))
    quantum = dlam**2 * b0.r**2 * st * st * (2.0 - sigma_t) ** 2 * cf / (32.0 * theta2 * one_m)
    return MetricSplit(float(classical), float(quantum))

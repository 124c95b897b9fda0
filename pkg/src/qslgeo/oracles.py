"""Closed-form path lengths and special functions used as ground truth.

These expressions evaluate the dephasing and amplitude-damping path
lengths without touching the generic quadrature engine, so the two
routes check each other.  The incomplete elliptic integral of the
second kind is computed from Carlson symmetric forms; its defining
integral doubles as the verification oracle in the test suite.

The Wigner-Yanase lengths remain one-dimensional integrals; they are
evaluated with the same Gauss-Legendre machinery as the engine but at a
tighter relative target, so the comparison error budget is dominated by
the engine side.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .engine import QuadratureConfig, integrate_refined
from .errors import DomainError

_ORACLE_QUAD = QuadratureConfig(panels=64, order=12)
_ORACLE_TARGET = 1e-10


def _carlson_rf(x: float, y: float, z: float) -> float:
    """Carlson symmetric elliptic integral R_F(x, y, z), args >= 0."""
    xn, yn, zn = float(x), float(y), float(z)
    if min(xn, yn, zn) < 0.0 or sorted((xn, yn, zn))[1] == 0.0:
        raise DomainError("R_F requires nonnegative arguments, at most one zero")
    a0 = (xn + yn + zn) / 3.0
    q = (3.0 * 2.220446049250313e-16) ** (-1.0 / 8.0) * max(abs(a0 - xn), abs(a0 - yn), abs(a0 - zn))
    a, scale = a0, 1.0
    while q >= abs(a) * scale:
        sx, sy, sz = np.sqrt(xn), np.sqrt(yn), np.sqrt(zn)
        lam = sx * sy + sx * sz + sy * sz
        xn, yn, zn = (xn + lam) / 4.0, (yn + lam) / 4.0, (zn + lam) / 4.0
        a = (a + lam) / 4.0
        scale *= 4.0
    big_x = (a0 - x) / (a * scale)
    big_y = (a0 - y) / (a * scale)
    big_z = -big_x - big_y
    e2 = big_x * big_y - big_z * big_z
    e3 = big_x * big_y * big_z
    series = (1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0
              - 5.0 * e2**3 / 208.0 + 3.0 * e3 * e3 / 104.0 + e2 * e2 * e3 / 16.0)
    return series / np.sqrt(a)


def _carlson_rd(x: float, y: float, z: float) -> float:
    """Carlson symmetric elliptic integral R_D(x, y, z), z > 0."""
    xn, yn, zn = float(x), float(y), float(z)
    if min(xn, yn) < 0.0 or zn <= 0.0 or xn + yn == 0.0:
        raise DomainError("R_D requires x, y >= 0 (not both zero) and z > 0")
    a0 = (xn + yn + 3.0 * zn) / 5.0
    q = (2.220446049250313e-16 / 4.0) ** (-1.0 / 6.0) * max(abs(a0 - xn), abs(a0 - yn), abs(a0 - zn))
    a, scale, tail = a0, 1.0, 0.0
    while q >= abs(a) * scale:
        sx, sy, sz = np.sqrt(xn), np.sqrt(yn), np.sqrt(zn)
        lam = sx * sy + sx * sz + sy * sz
        tail += 1.0 / (scale * sz * (zn + lam))
        xn, yn, zn = (xn + lam) / 4.0, (yn + lam) / 4.0, (zn + lam) / 4.0
        a = (a + lam) / 4.0
        scale *= 4.0
    big_x = (a0 - x) / (a * scale)
    big_y = (a0 - y) / (a * scale)
    big_z = -(big_x + big_y) / 3.0
    e2 = big_x * big_y - 6.0 * big_z * big_z
    e3 = (3.0 * big_x * big_y - 8.0 * big_z * big_z) * big_z
    e4 = 3.0 * (big_x * big_y - big_z * big_z) * big_z * big_z
    e5 = big_x * big_y * big_z**3
    series = (1.0 - 3.0 * e2 / 14.0 + e3 / 6.0 + 9.0 * e2 * e2 / 88.0 - 3.0 * e4 / 22.0
              - 9.0 * e2 * e3 / 52.0 + 3.0 * e5 / 26.0 - e2**3 / 16.0
              + 3.0 * e3 * e3 / 40.0 + 3.0 * e2 * e4 / 20.0 + 45.0 * e2 * e2 * e3 / 272.0
              - 9.0 * (e3 * e4 + e2 * e5) / 68.0)
    return series / (scale * a * np.sqrt(a)) + 3.0 * tail


def ellip_e_incomplete(phi: float, m: float) -> float:
    """Incomplete elliptic integral of the second kind E(phi | m).

    Defined as the integral of sqrt(1 - m sin^2 y) for y from 0 to phi,
    with phi in [0, pi/2] and modulus m in [0, 1].
    """
    if not 0.0 <= phi <= np.pi / 2.0 + 1e-12:
        raise DomainError(f"amplitude {phi} outside [0, pi/2]")
    if not 0.0 <= m <= 1.0:
        raise DomainError(f"modulus {m} outside [0, 1]")
    if phi == 0.0:
        return 0.0
    if m == 0.0:
        return float(phi)
    s = np.sin(min(phi, np.pi / 2.0))
    if m == 1.0:
        return float(s)
    c2 = max(1.0 - s * s, 0.0)
    y = 1.0 - m * s * s
    return float(s * _carlson_rf(c2, y, 1.0) - (m / 3.0) * s**3 * _carlson_rd(c2, y, 1.0))


# ---------------------------------------------------------------------------
# parallel dephasing (elliptic-integral and Wigner-Yanase forms)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PDClosedFormParams:
    """Inputs of the parallel-dephasing length formulas.

    beta is the frequency-to-rate ratio and gamma_tau the dimensionless
    duration.  States with r0 = 1 on the z axis are channel fixed points
    and all lengths vanish.
    """

    r0: float
    theta0: float
    beta: float
    gamma_tau: float

    def __post_init__(self):
        if not 0.0 <= self.r0 <= 1.0:
            raise DomainError("r0 must lie in [0, 1]")
        if not 0.0 <= self.theta0 <= np.pi:
            raise DomainError("theta0 must lie in [0, pi]")
        if self.beta < 0.0 or self.gamma_tau < 0.0:
            raise DomainError("beta and gamma_tau must be nonnegative")

    @cached_property
    def z_variance(self) -> float:
        return 1.0 - self.r0**2 * np.cos(self.theta0) ** 2

    @cached_property
    def kappa2(self) -> float:
        return self.beta**2 / (1.0 + self.beta**2)

    @cached_property
    def alpha(self) -> float:
        if self.z_variance <= 1e-15:
            return 0.0
        return float(np.sqrt(max(1.0 - (1.0 - self.r0**2) / self.z_variance, 0.0)))


def pd_length_qf(p: PDClosedFormParams) -> float:
    """Quantum Fisher path length for parallel dephasing."""
    if p.z_variance <= 1e-15 or p.gamma_tau == 0.0:
        return 0.0
    upper = np.arcsin(p.alpha)
    lower = np.arcsin(p.alpha * np.exp(-p.gamma_tau))
    pref = 0.5 * np.sqrt((1.0 + p.beta**2) * p.z_variance)
    return float(pref * (ellip_e_incomplete(upper, p.kappa2) - ellip_e_incomplete(lower, p.kappa2)))


def _pd_wy_integrand(p: PDClosedFormParams, u: np.ndarray) -> np.ndarray:
    al, k2, r0 = p.alpha, p.kappa2, p.r0
    ct2 = np.cos(p.theta0) ** 2
    st2 = np.sin(p.theta0) ** 2
    e2u = np.exp(-2.0 * u)
    a2 = al * al * e2u
    omega = r0 * r0 * (ct2 + e2u * k2 * st2) / (1.0 + np.sqrt((1.0 - r0 * r0 * ct2) * (1.0 - a2))) ** 2
    psi = np.sqrt(omega + (1.0 - k2 * a2) / (1.0 - a2))
    return al * np.exp(-u) * psi


def pd_length_wy(p: PDClosedFormParams) -> float:
    """Wigner-Yanase path length for parallel dephasing (1D integral)."""
    if p.z_variance <= 1e-15 or p.gamma_tau == 0.0:
        return 0.0
    pref = 0.5 * np.sqrt((1.0 + p.beta**2) * p.z_variance)
    val = integrate_refined(lambda u: _pd_wy_integrand(p, u), 0.0, p.gamma_tau,
                            _ORACLE_QUAD, rel_target=_ORACLE_TARGET)
    return float(pref * val)


def pd_length_min(p: PDClosedFormParams) -> float:
    """Minimal-metric path length for parallel dephasing."""
    if p.z_variance <= 1e-15 or p.gamma_tau == 0.0:
        return 0.0
    pref = 0.5 * np.sqrt(1.0 + p.beta**2)
    return float(pref * (np.arcsin(p.alpha) - np.arcsin(p.alpha * np.exp(-p.gamma_tau))))


# ---------------------------------------------------------------------------
# amplitude damping
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ADClosedFormParams:
    """Inputs of the amplitude-damping length formulas.

    The north pole (r0 = 1, theta0 = 0) is the channel fixed point; all
    lengths vanish there.
    """

    r0: float
    theta0: float
    gamma_tau: float

    def __post_init__(self):
        if not 0.0 <= self.r0 <= 1.0:
            raise DomainError("r0 must lie in [0, 1]")
        if not 0.0 <= self.theta0 <= np.pi:
            raise DomainError("theta0 must lie in [0, pi]")
        if self.gamma_tau < 0.0:
            raise DomainError("gamma_tau must be nonnegative")

    @cached_property
    def _pole_gap(self) -> float:
        return 1.0 - self.r0 * np.cos(self.theta0)

    @cached_property
    def eps2(self) -> float:
        if self._pole_gap <= 1e-15:
            return 0.0
        return float(self.r0**2 * np.sin(self.theta0) ** 2 / (2.0 * self._pole_gap))

    @cached_property
    def varpi(self) -> float:
        if self._pole_gap <= 1e-15:
            return 0.0
        return float(np.sqrt(self._pole_gap / (2.0 * (1.0 - self.eps2))))

    @cached_property
    def delta2(self) -> float:
        return self.eps2 / (4.0 * (1.0 - self.eps2))


def ad_length_qf(p: ADClosedFormParams) -> float:
    """Quantum Fisher path length for amplitude damping."""
    if p._pole_gap <= 1e-15 or p.gamma_tau == 0.0:
        return 0.0
    upper = np.arcsin(min(p.varpi, 1.0))
    lower = np.arcsin(p.varpi * np.exp(-p.gamma_tau / 2.0))
    pref = np.sqrt(1.0 - p.eps2)
    return float(pref * (ellip_e_incomplete(upper, p.eps2) - ellip_e_incomplete(lower, p.eps2)))


def _ad_wy_integrand(p: ADClosedFormParams, u: np.ndarray) -> np.ndarray:
    e2, vp = p.eps2, p.varpi
    eu = np.exp(-u)
    v2 = vp * vp * eu
    num = e2 * (1.0 + 2.0 * (1.0 - e2) * v2) ** 2
    den = (1.0 + 2.0 * (1.0 - e2) * vp * np.exp(-u / 2.0) * np.sqrt(1.0 - v2)) ** 2
    psi = np.sqrt(num / den + (1.0 - e2 * v2) / (1.0 - v2))
    return vp * np.exp(-u / 2.0) * psi


def ad_length_wy(p: ADClosedFormParams) -> float:
    """Wigner-Yanase path length for amplitude damping (1D integral)."""
    if p._pole_gap <= 1e-15 or p.gamma_tau == 0.0:
        return 0.0
    pref = 0.5 * np.sqrt(1.0 - p.eps2)
    val = integrate_refined(lambda u: _ad_wy_integrand(p, u), 0.0, p.gamma_tau,
                            _ORACLE_QUAD, rel_target=_ORACLE_TARGET)
    return float(pref * val)


def _theta_primitive(x: float, delta2: float) -> float:
    """Primitive combining arctan, arctanh and log branches.

    Valid for x in (0, pi/2]; the arctanh and log terms only enter for
    delta2 > 0 and require |cos x| < 1 - 1e-12, which bounds the
    admissible durations away from the pure-state limit.
    """
    cx, sx = np.cos(x), np.sin(x)
    root = np.sqrt(delta2 + sx * sx)
    if root <= 0.0:
        raise DomainError("primitive undefined at x = 0 with delta = 0")
    val = np.arctan2(cx, root)
    if delta2 > 0.0:
        if abs(cx) >= 1.0 - 1e-12:
            raise DomainError("primitive evaluated too close to the boundary |cos x| = 1")
        delta = np.sqrt(delta2)
        val += delta * np.arctanh(cx)
        val += 0.5 * delta * np.log1p(-2.0 * cx / (2.0 * np.cos(x / 2.0) ** 2 + delta * (delta + root)))
    return float(val)


def ad_length_min(p: ADClosedFormParams) -> float:
    """Minimal-metric path length for amplitude damping."""
    if p._pole_gap <= 1e-15 or p.gamma_tau == 0.0:
        return 0.0
    phi0 = float(np.arcsin(min(p.varpi, 1.0)))
    phi_tau = float(np.arcsin(p.varpi * np.exp(-p.gamma_tau / 2.0)))
    return _theta_primitive(phi_tau, p.delta2) - _theta_primitive(phi0, p.delta2)


# ---------------------------------------------------------------------------
# unitary qubit tightness comparison
# ---------------------------------------------------------------------------

def unitary_qubit_tightness_gap(r0, phi):
    """Margin of the Fisher-vs-Wigner-Yanase tightness criterion.

    For a qubit rotated unitarily by a Bloch angle ``phi`` from purity
    ``r0 < 1``, returns the geodesic-ratio side minus the path-ratio
    side; nonnegativity of this gap is equivalent to the Fisher metric
    giving the tighter bound.  Accepts scalars or arrays and returns the
    limiting value 0 as r0 -> 0 or phi -> 0.
    """
    r = np.asarray(r0, dtype=float)
    ph = np.asarray(phi, dtype=float)
    if np.any(r < 0.0) or np.any(r >= 1.0):
        raise DomainError("r0 must lie in [0, 1)")
    if np.any(ph < 0.0) or np.any(ph > np.pi + 1e-12):
        raise DomainError("phi must lie in [0, pi]")
    r, ph = np.broadcast_arrays(r, ph)
    sq = np.sqrt(1.0 - r * r)
    lhs = np.sqrt((1.0 + sq) / 2.0)
    # both arccos arguments have exact 1 - x forms, so rewrite through
    # arcsin to stay conditioned at small angles
    half = np.sin(ph / 2.0)
    num = np.arcsin(np.clip(r * half, 0.0, 1.0))
    den = 2.0 * np.arcsin(np.clip(half * np.sqrt((1.0 - sq) / 2.0), 0.0, 1.0))
    trivial = (r < 1e-14) | (ph < 1e-14) | (den == 0.0)
    ratio = np.where(trivial, lhs, num / np.where(trivial, 1.0, den))
    gap = np.where(trivial, 0.0, ratio - lhs)
    return float(gap) if gap.ndim == 0 else gap

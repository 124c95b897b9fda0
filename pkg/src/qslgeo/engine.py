"""Path lengths, geodesic bounds, tightness, and metric selection.

The central quantity is the length of the curve traced by the evolving
state, computed by composite Gauss-Legendre quadrature of the local
speed sqrt(ds^2/dt^2).  Comparing it with the geodesic distance between
the endpoints yields the speed-limit tightness indicator

    delta = (path_length - geodesic_length) / geodesic_length,

which vanishes exactly when the evolution follows a geodesic of the
chosen metric.  Geodesic lengths are only known in closed form for the
quantum Fisher metric (Bures angle) and the Wigner-Yanase metric
(Hellinger angle); requesting any other metric raises rather than
silently approximating.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .channels import Channel, UnitaryChannel, evolve
from .errors import (
    DegenerateEndpointError,
    DomainError,
    GeodesicUnknownError,
    MetricDivergenceError,
    QuadratureError,
    ValidationError,
)
from .mcmetric import (
    KIND_QF,
    KIND_WY,
    MCFunction,
    QUANTUM_FISHER,
    WIGNER_YANASE,
    split_from_eigendata,
)
from .qstate import (
    DEFAULT_RANK_THRESHOLD,
    DensityOperator,
    affinity,
    fidelity,
    psd_sqrt,
)

MAX_PANELS = 2**14
_REFINE_TARGET = 1e-8


@dataclass(frozen=True)
class QuadratureConfig:
    """Composite Gauss-Legendre settings with a panel-doubling check."""

    panels: int = 256
    order: int = 8
    refine: bool = True

    def __post_init__(self):
        if self.panels < 1:
            raise DomainError("panels must be >= 1")
        if not 2 <= self.order <= 16:
            raise DomainError("Gauss-Legendre order must be in 2..16")


DEFAULT_QUADRATURE = QuadratureConfig()


@dataclass(frozen=True)
class QSLReport:
    """Per-metric record of one speed-limit evaluation."""

    metric_kind: str
    path_length: float
    evolution_time: float
    geodesic_length: float | None = None
    tightness: float | None = None
    bound_time: float | None = None
    flags: tuple[str, ...] = ()

    def __post_init__(self):
        if self.path_length < -1e-12:
            raise ValidationError("path length must be nonnegative")
        if self.geodesic_length is not None and self.geodesic_length > self.path_length + 1e-9:
            raise ValidationError("geodesic length exceeds path length beyond tolerance")
        if self.tightness is not None and self.tightness < -1e-9:
            raise ValidationError("tightness must be nonnegative")
        if self.bound_time is not None and self.bound_time > self.evolution_time + 1e-9:
            raise ValidationError("bound time exceeds the evolution time")


@dataclass(frozen=True)
class BoundResult:
    """A speed-limit bound time with its time-averaged speed scale."""

    time: float
    mean_speed: float
    cascade_time: float | None = None
    flags: tuple[str, ...] = ()


@lru_cache(maxsize=None)
def _gl_rule(order: int):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    return nodes, weights


def _panel_points(t0: float, t1: float, panels: int, order: int):
    nodes, weights = _gl_rule(order)
    edges = np.linspace(t0, t1, panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1] - edges[0])
    ts = (mid[:, None] + half * nodes[None, :]).ravel()
    ws = np.broadcast_to(half * weights[None, :], (panels, order)).ravel()
    return ts, ws


def integrate_refined(fn, t0: float, t1: float, q: QuadratureConfig,
                      rel_target: float = _REFINE_TARGET, max_panels: int = MAX_PANELS) -> float:
    """Composite Gauss-Legendre with panel doubling to a relative target.

    ``fn`` must map an array of abscissas to an array of integrand
    values.  Raises :class:`QuadratureError` (carrying the last two
    estimates) if the doubling loop hits the panel cap unconverged.
    """
    if t1 < t0:
        raise DomainError("integration interval is reversed")
    if t1 == t0:
        return 0.0
    panels = q.panels
    ts, ws = _panel_points(t0, t1, panels, q.order)
    prev = float(np.dot(fn(ts), ws))
    if not q.refine:
        return prev
    while panels < max_panels:
        panels *= 2
        ts, ws = _panel_points(t0, t1, panels, q.order)
        val = float(np.dot(fn(ts), ws))
        scale = max(abs(val), abs(prev))
        if scale < 1e-13 or abs(val - prev) <= rel_target * scale:
            return val
        prev = val
    raise QuadratureError(
        f"quadrature did not reach relative target {rel_target} within {max_panels} panels",
        estimates=(prev, val),
    )


def speed_profile(ch: Channel, rho0: DensityOperator, ts, f: MCFunction,
                  rank_threshold: float = DEFAULT_RANK_THRESHOLD) -> np.ndarray:
    """Local metric speed sqrt(ds^2/dt^2) at an array of times."""
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    rt = ch._evolve_matrices(rho0.matrix, ts)
    dt = ch._derivative_matrices(rho0.matrix, ts)
    p, v = np.linalg.eigh(rt)
    dtil = np.einsum("nji,njk,nkl->nil", v.conj(), dt, v)
    classical, quantum = split_from_eigendata(p, dtil, f, rank_threshold)
    return np.sqrt(np.clip(classical + quantum, 0.0, None))


def _reject_pure_boundary(rho0: DensityOperator, f: MCFunction,
                          rank_threshold: float = DEFAULT_RANK_THRESHOLD):
    if f.f0 <= 0.0 and rho0.min_eigenvalue() <= rank_threshold:
        raise MetricDivergenceError(
            f"{f.label}: metric with f(0) = 0 is divergent on the pure-state boundary"
        )


def path_length(ch: Channel, rho0: DensityOperator, tau: float, f: MCFunction,
                q: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Metric length of the trajectory t in [0, tau] traced by the channel."""
    if tau < 0.0:
        raise DomainError("evolution time must be nonnegative")
    if tau == 0.0:
        return 0.0
    _reject_pure_boundary(rho0, f)
    return segment_length(ch, rho0, 0.0, tau, f, q)


def segment_length(ch: Channel, rho0: DensityOperator, t0: float, t1: float,
                   f: MCFunction, q: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Path length restricted to the absolute-time window [t0, t1]."""
    return integrate_refined(lambda ts: speed_profile(ch, rho0, ts, f), t0, t1, q)


def geodesic_length(rho0: DensityOperator, rho_tau: DensityOperator, f: MCFunction) -> float:
    """Geodesic distance between two states under a supported metric.

    Bures angle arccos(sqrt(fidelity)) for the quantum Fisher metric,
    Hellinger angle arccos(affinity) for the Wigner-Yanase metric.
    States equal within 1e-12 short-circuit to exactly zero; the arccos
    noise floor near coinciding states sits around sqrt(eps) otherwise.
    """
    if f.kind not in (KIND_QF, KIND_WY):
        raise GeodesicUnknownError(f"geodesic length unknown for metric {f.label!r}")
    if rho0.isclose(rho_tau, tol=1e-12):
        return 0.0
    if f.kind == KIND_QF:
        return float(np.arccos(np.sqrt(np.clip(fidelity(rho0, rho_tau), 0.0, 1.0))))
    return float(np.arccos(np.clip(affinity(rho0, rho_tau), 0.0, 1.0)))


def assemble_report(metric_kind: str, ell: float, big_l: float, tau: float) -> QSLReport:
    """Combine a path length and a geodesic length into a report.

    A vanishing geodesic length with a vanishing path length marks a
    fixed point (tightness defined as zero, flagged degenerate); with a
    non-vanishing path length the tightness ratio is undefined and a
    :class:`DegenerateEndpointError` is raised.
    """
    flags: tuple[str, ...] = ()
    if big_l <= 1e-12:
        if ell > 1e-9:
            raise DegenerateEndpointError(
                f"endpoints coincide (L = {big_l:.2e}) but the path length is {ell:.2e}"
            )
        delta = 0.0
        bound = 0.0
        flags = ("degenerate",)
    else:
        delta = max((ell - big_l) / big_l, 0.0)
        bound = tau * big_l / ell if ell > 0.0 else 0.0
    return QSLReport(
        metric_kind=metric_kind,
        path_length=ell,
        evolution_time=tau,
        geodesic_length=big_l,
        tightness=delta,
        bound_time=min(bound, tau),
        flags=flags,
    )


def tightness(ch: Channel, rho0: DensityOperator, tau: float, f: MCFunction,
              q: QuadratureConfig = DEFAULT_QUADRATURE) -> QSLReport:
    """Full speed-limit report: path length, geodesic bound, tightness."""
    ell = path_length(ch, rho0, tau, f, q)
    rho_tau = evolve(ch, rho0, tau)
    big_l = geodesic_length(rho0, rho_tau, f)
    return assemble_report(f.kind, ell, big_l, tau)


def best_metric(ch: Channel, rho0: DensityOperator, tau: float,
                candidates: Sequence[MCFunction],
                q: QuadratureConfig = DEFAULT_QUADRATURE):
    """Pick the metric with the smallest tightness indicator.

    Candidates must support geodesic lengths (quantum Fisher or
    Wigner-Yanase).  Ties within 1e-12 go to the quantum Fisher metric.
    """
    if not candidates:
        raise ValidationError("candidate list is empty")
    for f in candidates:
        if f.kind not in (KIND_QF, KIND_WY):
            raise GeodesicUnknownError(f"metric {f.label!r} has no geodesic length; cannot rank tightness")
    reports = [tightness(ch, rho0, tau, f, q) for f in candidates]
    kinds = [f.kind for f in candidates]
    deltas = [r.tightness for r in reports]
    best = int(np.argmin(deltas))
    if KIND_QF in kinds:
        iqf = kinds.index(KIND_QF)
        if abs(deltas[iqf] - deltas[best]) <= 1e-12:
            best = iqf
    return candidates[best].kind, reports


# ---------------------------------------------------------------------------
# observable statistics and unitary bound times
# ---------------------------------------------------------------------------

def _check_observable(rho: DensityOperator, h: np.ndarray) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    if h.shape != (rho.dim, rho.dim):
        raise DomainError("observable shape does not match the state")
    if np.max(np.abs(h - h.conj().T)) > 1e-10:
        raise ValidationError("observable is not Hermitian")
    return h


def variance(rho: DensityOperator, h: np.ndarray) -> float:
    """<H^2> - <H>^2 in the given state."""
    h = _check_observable(rho, h)
    mean = float(np.real(np.trace(rho.matrix @ h)))
    mean_sq = float(np.real(np.trace(rho.matrix @ h @ h)))
    return max(mean_sq - mean * mean, 0.0)


def skew_information(rho: DensityOperator, h: np.ndarray) -> float:
    """Coherence-sensitive substitute for the variance.

    -(1/2) Tr([sqrt(rho), H]^2); vanishes when the state and observable
    commute and equals the variance on pure states.
    """
    h = _check_observable(rho, h)
    s = psd_sqrt(rho.matrix)
    val = float(np.real(np.trace(rho.matrix @ h @ h) - np.trace(s @ h @ s @ h)))
    return max(val, 0.0)


def symmetrized_covariance(rho: DensityOperator, a: np.ndarray, b: np.ndarray) -> float:
    """(1/2) Tr[rho {A - <A>, B - <B>}]; reduces to the variance at A = B."""
    a = _check_observable(rho, a)
    b = _check_observable(rho, b)
    da = a - np.real(np.trace(rho.matrix @ a)) * np.eye(rho.dim)
    db = b - np.real(np.trace(rho.matrix @ b)) * np.eye(rho.dim)
    return float(np.real(0.5 * np.trace(rho.matrix @ (da @ db + db @ da))))


def _require_unitary(ch: Channel) -> UnitaryChannel:
    if not isinstance(ch, UnitaryChannel):
        raise ValidationError("this bound applies to unitary channels only")
    return ch


def _mean_speeds(ch: UnitaryChannel, rho0: DensityOperator, tau: float,
                 q: QuadratureConfig, want_skew: bool):
    """Time averages of sqrt(variance) and optionally sqrt(skew information).

    Values below the cancellation noise floor of the second moment are
    snapped to zero so stationary states integrate to exactly zero.
    """

    def profile(ts):
        rt = ch._evolve_matrices(rho0.matrix, ts)
        hs = ch._generators(ts)
        out = np.empty((2, ts.size))
        for n in range(ts.size):
            state = DensityOperator(0.5 * (rt[n] + rt[n].conj().T))
            floor = 1e-13 * max(float(np.linalg.norm(hs[n]) ** 2), 1e-300)
            var = variance(state, hs[n])
            out[0, n] = np.sqrt(var) if var > floor else 0.0
            if want_skew:
                skew = skew_information(state, hs[n])
                out[1, n] = np.sqrt(skew) if skew > floor else 0.0
            else:
                out[1, n] = 0.0
        return out

    cache = {}

    def var_component(ts):
        key = (ts[0], ts[-1], ts.size)
        if key not in cache:
            cache[key] = profile(ts)
        return cache[key][0]

    def skew_component(ts):
        key = (ts[0], ts[-1], ts.size)
        if key not in cache:
            cache[key] = profile(ts)
        return cache[key][1]

    mean_var = integrate_refined(var_component, 0.0, tau, q) / tau
    mean_skew = integrate_refined(skew_component, 0.0, tau, q) / tau if want_skew else None
    return mean_var, mean_skew


def mt_bound(ch: Channel, rho0: DensityOperator, tau: float,
             q: QuadratureConfig = DEFAULT_QUADRATURE) -> BoundResult:
    """Mandelstam-Tamm-style bound time for a unitary evolution.

    Bures angle divided by the time-averaged energy variance.  For a
    stationary state (zero average variance) the bound degenerates to
    zero and is flagged.
    """
    uch = _require_unitary(ch)
    if tau <= 0.0:
        raise DomainError("evolution time must be positive")
    big_l = geodesic_length(rho0, evolve(uch, rho0, tau), QUANTUM_FISHER)
    mean_var, _ = _mean_speeds(uch, rho0, tau, q, want_skew=False)
    if mean_var <= 1e-12:
        return BoundResult(0.0, mean_var, flags=("stationary",))
    return BoundResult(big_l / mean_var, mean_var)


def wy_bound(ch: Channel, rho0: DensityOperator, tau: float,
             q: QuadratureConfig = DEFAULT_QUADRATURE) -> BoundResult:
    """Skew-information bound time for a unitary evolution.

    Hellinger angle divided by sqrt(2) times the time-averaged root skew
    information.  ``cascade_time`` carries the weaker variance-based
    variant (an extra 1/sqrt(2) against the Fisher bound when the
    endpoints commute).
    """
    uch = _require_unitary(ch)
    if tau <= 0.0:
        raise DomainError("evolution time must be positive")
    big_l = geodesic_length(rho0, evolve(uch, rho0, tau), WIGNER_YANASE)
    mean_var, mean_skew = _mean_speeds(uch, rho0, tau, q, want_skew=True)
    if mean_skew <= 1e-12:
        return BoundResult(0.0, mean_skew, flags=("stationary",))
    cascade = big_l / (np.sqrt(2.0) * mean_var) if mean_var > 1e-12 else None
    return BoundResult(big_l / (np.sqrt(2.0) * mean_skew), mean_skew, cascade_time=cascade)

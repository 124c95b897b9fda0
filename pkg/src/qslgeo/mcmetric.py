"""The monotone-metric family: kernel, squared line element, metric tensor.

Every contractive Riemannian metric on the state space is indexed by a
normalized, self-inversive, operator-monotone function f(t).  The three
members used throughout this package are

    quantum Fisher  f(t) = (1 + t)/2          (the maximal function)
    Wigner-Yanase   f(t) = (sqrt(t) + 1)^2/4
    minimal         f(t) = 2t/(1 + t)

with kernel c(x, y) = 1/(y f(x/y)).  The squared line element between a
state and a neighbor is evaluated in the eigenbasis of the state and
splits into a classical piece (populations only, metric independent)
and a quantum piece (coherences, weighted by the kernel).  The overall
1/4 normalization makes every member collapse to the classical Fisher
information when state and displacement commute.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (
    DimensionError,
    DomainError,
    MetricDivergenceError,
    ValidationError,
)
from .qstate import DEFAULT_RANK_THRESHOLD, SpectralDecomposition

KIND_QF = "qf"
KIND_WY = "wy"
KIND_MIN = "min"
KIND_CUSTOM = "custom"

_COHERENCE_TOL = 1e-10
_VALIDATION_GRID = np.logspace(-2.0, 2.0, 41)


def _f_qf(t):
    return 0.5 * (1.0 + t)


def _f_wy(t):
    return 0.25 * (np.sqrt(t) + 1.0) ** 2


def _f_min(t):
    return 2.0 * t / (1.0 + t)


@dataclass(frozen=True, eq=False)
class MCFunction:
    """One member of the monotone-metric function family.

    ``f0`` is the limit value at t = 0; it decides whether the metric
    extends to the pure-state boundary (f0 > 0) or diverges there.
    Custom members must be stateless callables; normalization,
    self-inversiveness and the min/max sandwich are checked on a grid at
    construction, operator monotonicity cannot be verified numerically
    and is trusted.
    """

    kind: str
    label: str
    fn: Callable[[float], float]
    f0: float

    def __call__(self, t):
        return eval_f(self, t)


def _validate_mc(fn, f0, label):
    if abs(fn(1.0) - 1.0) > 1e-12:
        raise ValidationError(f"{label}: f(1) = {fn(1.0)} is not normalized")
    t = _VALIDATION_GRID
    ft = fn(t)
    if np.max(np.abs(ft - t * fn(1.0 / t))) > 1e-10:
        raise ValidationError(f"{label}: f(t) != t f(1/t) on the test grid")
    if np.any(ft > _f_qf(t) + 1e-10) or np.any(ft < _f_min(t) - 1e-10):
        raise ValidationError(f"{label}: violates the f_min <= f <= f_max sandwich")
    if f0 < -1e-12 or f0 > 0.5 + 1e-12:
        raise ValidationError(f"{label}: declared f(0) = {f0} outside [0, 1/2]")


QUANTUM_FISHER = MCFunction(KIND_QF, "quantum-fisher", _f_qf, 0.5)
WIGNER_YANASE = MCFunction(KIND_WY, "wigner-yanase", _f_wy, 0.25)
MINIMAL = MCFunction(KIND_MIN, "minimal", _f_min, 0.0)

_BY_KIND = {KIND_QF: QUANTUM_FISHER, KIND_WY: WIGNER_YANASE, KIND_MIN: MINIMAL}


def metric_by_kind(kind: str) -> MCFunction:
    """Look up a built-in metric by its short kind string."""
    try:
        return _BY_KIND[kind.lower()]
    except KeyError:
        raise DomainError(f"unknown metric kind {kind!r}; expected one of {sorted(_BY_KIND)}") from None


def custom_mc_function(fn: Callable[[float], float], f0: float, label: str = "custom") -> MCFunction:
    """Wrap a user-supplied f(t) after checking its invariants on a grid.

    The callable must be stateless and accept numpy arrays elementwise
    (plain arithmetic and numpy ufuncs qualify); it is evaluated in
    vectorized form by the quadrature engine.
    """
    _validate_mc(fn, f0, label)
    return MCFunction(KIND_CUSTOM, label, fn, f0)


def eval_f(f: MCFunction, t):
    """Evaluate f(t) for t >= 0, using the declared limit at t = 0."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0.0):
        raise DomainError("f(t) requires t >= 0")
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = np.where(t_arr > 0.0, f.fn(np.where(t_arr > 0.0, t_arr, 1.0)), f.f0)
    return float(vals) if np.isscalar(t) or t_arr.ndim == 0 else vals


def c_kernel(f: MCFunction, x: float, y: float) -> float:
    """The metric kernel c(x, y) = 1/(y f(x/y)), symmetric in (x, y).

    The boundary value c(x, 0) is taken as 1/(x f(0)); members with
    f(0) = 0 raise :class:`MetricDivergenceError` there instead of
    returning an infinity.
    """
    if x < 0.0 or y < 0.0:
        raise DomainError("kernel arguments must be nonnegative")
    if x == 0.0 and y == 0.0:
        raise DomainError("kernel undefined at x = y = 0")
    if f.kind == KIND_QF:
        return 2.0 / (x + y)
    if f.kind == KIND_WY:
        return 4.0 / (np.sqrt(x) + np.sqrt(y)) ** 2
    if f.kind == KIND_MIN:
        if x == 0.0 or y == 0.0:
            raise MetricDivergenceError("minimal-metric kernel divergent at the boundary")
        return (x + y) / (2.0 * x * y)
    # custom: exploit symmetry so the evaluation argument stays <= 1
    if x > y:
        x, y = y, x
    if x == 0.0:
        if f.f0 <= 0.0:
            raise MetricDivergenceError(f"{f.label}: kernel divergent at the boundary (f(0) = 0)")
        return 1.0 / (y * f.f0)
    return 1.0 / (y * f.fn(x / y))


def _kernel_grid(f: MCFunction, pj: np.ndarray, pl: np.ndarray, coherent: np.ndarray) -> np.ndarray:
    """Vectorized kernel over thresholded eigenvalue pairs.

    ``coherent`` marks pairs whose coherence magnitude is non-negligible;
    only those may raise on a divergent kernel, the rest contribute zero
    regardless of the kernel value.
    """
    both_zero = (pj == 0.0) & (pl == 0.0)
    if np.any(both_zero & coherent):
        raise MetricDivergenceError("metric divergent at boundary: coherence between two null eigenvectors")
    any_zero = (pj == 0.0) | (pl == 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        if f.kind == KIND_QF:
            c = 2.0 / (pj + pl)
        elif f.kind == KIND_WY:
            c = 4.0 / (np.sqrt(pj) + np.sqrt(pl)) ** 2
        elif f.kind == KIND_MIN:
            if np.any(any_zero & coherent):
                raise MetricDivergenceError("metric divergent at boundary: minimal metric on a rank-deficient state")
            c = (pj + pl) / (2.0 * pj * pl)
        else:
            if f.f0 <= 0.0 and np.any(any_zero & coherent):
                raise MetricDivergenceError(f"metric divergent at boundary: {f.label} has f(0) = 0")
            lo = np.minimum(pj, pl)
            hi = np.maximum(pj, pl)
            ratio = np.where(hi > 0.0, lo / np.where(hi > 0.0, hi, 1.0), 1.0)
            c = np.where(
                lo > 0.0,
                1.0 / (hi * f.fn(np.where(lo > 0.0, ratio, 1.0))),
                np.where(f.f0 > 0.0, 1.0 / np.where(hi > 0.0, hi, np.inf) / f.f0, np.inf),
            )
    return np.where(both_zero | (any_zero & ~np.isfinite(c)), 0.0, np.nan_to_num(c, nan=0.0, posinf=0.0))


@dataclass(frozen=True)
class MetricSplit:
    """Classical (populations) and quantum (coherences) metric parts."""

    classical: float
    quantum: float

    def __post_init__(self):
        if self.classical < -1e-12 or self.quantum < -1e-12:
            raise ValidationError("metric contributions must be nonnegative")

    @property
    def total(self) -> float:
        return self.classical + self.quantum


def split_from_eigendata(p: np.ndarray, dtil: np.ndarray, f: MCFunction,
                         rank_threshold: float = DEFAULT_RANK_THRESHOLD):
    """Classical/quantum line-element parts from eigenbasis data.

    ``p`` has shape (..., d) and ``dtil`` shape (..., d, d) holding the
    displacement expressed in the eigenbasis of the state.  Returns a
    pair of arrays shaped like ``p[..., 0]``.
    """
    p = np.asarray(p, dtype=float)
    dtil = np.asarray(dtil, dtype=complex)
    d = p.shape[-1]
    pt = np.where(p > rank_threshold, p, 0.0)

    # null-space populations are excluded from the classical sum entirely
    diag = np.real(dtil[..., np.arange(d), np.arange(d)])
    with np.errstate(divide="ignore", invalid="ignore"):
        classical = 0.25 * np.sum(np.where(pt > 0.0, diag**2 / np.where(pt > 0.0, pt, 1.0), 0.0), axis=-1)

    quantum = np.zeros_like(classical)
    for j in range(d):
        for l in range(j + 1, d):
            amp2 = np.abs(dtil[..., j, l]) ** 2
            coherent = amp2 > _COHERENCE_TOL**2
            c = _kernel_grid(f, pt[..., j], pt[..., l], coherent)
            quantum = quantum + 0.5 * c * amp2
    return classical, quantum


def ds2_from_drho(spec: SpectralDecomposition, drho: np.ndarray, f: MCFunction) -> MetricSplit:
    """Squared line element of a tangent direction at a decomposed state.

    ``drho`` must be Hermitian and traceless to 1e-10 (a physical tangent
    of the trace-one manifold).  Only |<j|drho|l>|^2 enters, so the result
    does not depend on eigenvector phase conventions.
    """
    m = np.asarray(drho, dtype=complex)
    if m.shape != (spec.dim, spec.dim):
        raise DimensionError(f"displacement shape {m.shape} does not match dim {spec.dim}")
    if np.max(np.abs(m - m.conj().T)) > 1e-10:
        raise ValidationError("displacement is not Hermitian")
    if abs(m.trace()) > 1e-10:
        raise ValidationError("displacement is not traceless")
    v = spec.eigenvectors
    dtil = v.conj().T @ m @ v
    classical, quantum = split_from_eigendata(spec.eigenvalues, dtil, f, spec.rank_threshold)
    return MetricSplit(float(max(classical, 0.0)), float(max(quantum, 0.0)))


@dataclass(frozen=True, eq=False)
class MetricTensor:
    """The (mu, nu) metric tensor split into classical and quantum parts."""

    classical: np.ndarray
    quantum: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.classical + self.quantum

    def split(self) -> MetricSplit:
        """Scalar view for single-parameter families."""
        if self.classical.shape != (1, 1):
            raise DimensionError("scalar view requires a single-parameter tensor")
        return MetricSplit(float(self.classical[0, 0]), float(self.quantum[0, 0]))


def metric_tensor(populations: Sequence[float], dpopulations: np.ndarray,
                  gauge_connections: np.ndarray, f: MCFunction,
                  rank_threshold: float = DEFAULT_RANK_THRESHOLD) -> MetricTensor:
    """Metric tensor from populations, their derivatives, and gauge data.

    ``dpopulations`` has shape (r, d) holding the parameter derivatives of
    each eigenvalue, ``gauge_connections`` shape (r, d, d) holding the
    Hermitian matrices A^mu with entries i <j | d_mu | l>.  The classical
    block is (1/4) sum_j d_mu p_j d_nu p_j / p_j and the quantum block is
    (1/2) sum_{j<l} c(p_j, p_l) (p_j - p_l)^2 Re[A^mu_jl conj(A^nu_jl)].
    """
    p = np.asarray(populations, dtype=float)
    dp = np.asarray(dpopulations, dtype=float)
    a = np.asarray(gauge_connections, dtype=complex)
    d = p.shape[0]
    if dp.ndim != 2 or dp.shape[1] != d:
        raise DimensionError(f"dpopulations shape {dp.shape} does not match {d} populations")
    r = dp.shape[0]
    if a.shape != (r, d, d):
        raise DimensionError(f"gauge connections shape {a.shape}, expected {(r, d, d)}")
    for mu in range(r):
        if np.max(np.abs(a[mu] - a[mu].conj().T)) > 1e-10:
            raise ValidationError(f"gauge connection {mu} is not Hermitian")

    pt = np.where(p > rank_threshold, p, 0.0)
    mask = pt > 0.0
    inv_p = np.zeros(d)
    inv_p[mask] = 1.0 / pt[mask]
    classical = 0.25 * np.einsum("mj,nj,j->mn", dp, dp, inv_p)

    quantum = np.zeros((r, r))
    for j in range(d):
        for l in range(j + 1, d):
            amp = a[:, j, l]
            coherent = np.array(np.max(np.abs(amp)) > _COHERENCE_TOL)
            c = float(_kernel_grid(f, np.asarray(pt[j]), np.asarray(pt[l]), coherent))
            w = c * (pt[j] - pt[l]) ** 2
            quantum += 0.5 * w * np.real(np.outer(amp, amp.conj()))
    return MetricTensor(classical, quantum)


def unitary_metric(spec: SpectralDecomposition, generators: Sequence[np.ndarray], f: MCFunction) -> MetricTensor:
    """Metric tensor of a unitary family from its Hermitian generators.

    Populations are constant under unitary evolution, so the classical
    block vanishes and only the generator coherences in the eigenbasis
    contribute.  Generators are mean-shifted internally; the shift only
    affects diagonal matrix elements, which never enter.
    """
    gens = [np.asarray(h, dtype=complex) for h in generators]
    for h in gens:
        if h.shape != (spec.dim, spec.dim):
            raise DimensionError("generator shape mismatch")
        if np.max(np.abs(h - h.conj().T)) > 1e-10:
            raise ValidationError("generator is not Hermitian")
    v = spec.eigenvectors
    rho = spec.reconstruct()
    a = np.stack([v.conj().T @ (h - np.trace(rho @ h).real * np.eye(spec.dim)) @ v for h in gens])
    dp = np.zeros((len(gens), spec.dim))
    return metric_tensor(spec.eigenvalues, dp, a, f, spec.rank_threshold)

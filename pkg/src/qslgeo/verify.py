"""Self-verification: the oracle consistency web as named checks.

Each check compares an independent closed form, structural inequality,
or regime prediction against the generic numeric pipeline.  The CLI
``verify`` command runs them and reports one pass/fail line per check;
``quick`` uses reduced sampling, ``full`` the complete grids.

Setting the environment variable ``QSL_VERIFY_FAIL`` to a check id
forces that check to report failure.  This is a negative-control hook
for testing the reporting path, nothing else reads it.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass

import numpy as np

from .channels import (
    AmplitudeDamping,
    ParallelDephasing,
    TransversalDephasing,
    UnitaryChannel,
    evolve,
    state_derivative,
    td_plus_fq,
)
from .engine import (
    QuadratureConfig,
    geodesic_length,
    path_length,
    skew_information,
    tightness,
    variance,
)
from .mcmetric import (
    MINIMAL,
    QUANTUM_FISHER,
    WIGNER_YANASE,
    c_kernel,
    ds2_from_drho,
    eval_f,
)
from .oracles import (
    ADClosedFormParams,
    PDClosedFormParams,
    ad_length_qf,
    ad_length_min,
    ad_length_wy,
    pd_length_min,
    pd_length_qf,
    pd_length_wy,
    unitary_qubit_tightness_gap,
)
from .qstate import (
    BlochVector,
    DensityOperator,
    affinity,
    fidelity,
    from_bloch,
    spectral_decompose,
)

_QUAD = QuadratureConfig(panels=64, order=8)
_QUAD_FAST = QuadratureConfig(panels=16, order=8)

_PD_GRID = [(r0, th, beta, gt)
            for r0 in (0.25, 0.75)
            for th in (np.pi / 4, np.pi / 2)
            for beta in (0.0, 8.0)
            for gt in (2.0, 10.0)]
_AD_GRID = [(r0, th, gt)
            for r0 in (0.25, 0.5)
            for th in (0.0, np.pi / 4, np.pi / 2)
            for gt in (5.0, 10.0)]


@dataclass(frozen=True)
class CheckResult:
    check_id: str
    passed: bool
    detail: str
    seconds: float


def _random_density(rng, dim=2) -> DensityOperator:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    m = g @ g.conj().T
    return DensityOperator(m / np.trace(m).real)


def _random_hermitian(rng, dim=2) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (g + g.conj().T)


def _random_unitary_run(rng):
    r0 = rng.uniform(0.05, 0.98)
    b0 = BlochVector(r0, rng.uniform(0.0, np.pi), rng.uniform(0.0, 2.0 * np.pi * 0.999))
    ch = UnitaryChannel.from_constant_hamiltonian(_random_hermitian(rng))
    tau = rng.uniform(0.1, 3.0)
    return from_bloch(b0), ch, tau


def _lindblad_rk4(h, lindblad_ops, rho0, t, steps=2000) -> np.ndarray:
    """Fixed-step RK4 master-equation integrator (verification only)."""

    def rhs(r):
        out = -1j * (h @ r - r @ h)
        for op in lindblad_ops:
            od = op.conj().T
            out += op @ r @ od - 0.5 * (od @ op @ r + r @ od @ op)
        return out

    r = np.asarray(rho0, dtype=complex).copy()
    dt = t / steps
    for _ in range(steps):
        k1 = rhs(r)
        k2 = rhs(r + 0.5 * dt * k1)
        k3 = rhs(r + 0.5 * dt * k2)
        k4 = rhs(r + dt * k3)
        r = r + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return 0.5 * (r + r.conj().T)


# ---------------------------------------------------------------------------
# individual checks (each returns (passed, detail))
# ---------------------------------------------------------------------------

def _check_pd_oracle(metric, closed_form, tol=1e-6):
    worst = 0.0
    for r0, th, beta, gt in _PD_GRID:
        rho0 = from_bloch(BlochVector(r0, th, 0.0))
        ch = ParallelDephasing(beta, 1.0)
        eng = path_length(ch, rho0, gt, metric, _QUAD)
        ref = closed_form(PDClosedFormParams(r0, th, beta, gt))
        worst = max(worst, abs(eng - ref) / ref)
    return worst <= tol, f"worst relative deviation {worst:.2e} (tol {tol:.0e})"


def check_pd_oracle_qf(level):
    return _check_pd_oracle(QUANTUM_FISHER, pd_length_qf)


def check_pd_oracle_wy(level):
    return _check_pd_oracle(WIGNER_YANASE, pd_length_wy)


def check_pd_oracle_min(level):
    return _check_pd_oracle(MINIMAL, pd_length_min)


def check_ad_oracle(level):
    worst = 0.0
    pairs = ((QUANTUM_FISHER, ad_length_qf), (WIGNER_YANASE, ad_length_wy), (MINIMAL, ad_length_min))
    for r0, th, gt in _AD_GRID:
        rho0 = from_bloch(BlochVector(r0, th, 0.0))
        ch = AmplitudeDamping(1.0)
        for metric, closed_form in pairs:
            eng = path_length(ch, rho0, gt, metric, _QUAD)
            ref = closed_form(ADClosedFormParams(r0, th, gt))
            worst = max(worst, abs(eng - ref) / ref)
    return worst <= 1e-6, f"worst relative deviation {worst:.2e} (tol 1e-06)"


def check_qsl_inequality(level):
    runs = 500 if level == "full" else 100
    rng = np.random.default_rng(271828)
    worst = -np.inf
    for r0, th, beta, gt in _PD_GRID:
        rho0 = from_bloch(BlochVector(r0, th, 0.0))
        ch = ParallelDephasing(beta, 1.0)
        for f in (QUANTUM_FISHER, WIGNER_YANASE):
            ell = path_length(ch, rho0, gt, f, _QUAD)
            big_l = geodesic_length(rho0, evolve(ch, rho0, gt), f)
            worst = max(worst, big_l - ell)
    for r0, th, gt in _AD_GRID:
        rho0 = from_bloch(BlochVector(r0, th, 0.0))
        ch = AmplitudeDamping(1.0)
        for f in (QUANTUM_FISHER, WIGNER_YANASE):
            ell = path_length(ch, rho0, gt, f, _QUAD)
            big_l = geodesic_length(rho0, evolve(ch, rho0, gt), f)
            worst = max(worst, big_l - ell)
    for _ in range(runs):
        rho0, ch, tau = _random_unitary_run(rng)
        for f in (QUANTUM_FISHER, WIGNER_YANASE):
            ell = path_length(ch, rho0, tau, f, _QUAD_FAST)
            big_l = geodesic_length(rho0, evolve(ch, rho0, tau), f)
            worst = max(worst, big_l - ell)
    return worst <= 1e-8, f"worst L - ell = {worst:.2e} over {runs} random runs plus oracle grids (tol 1e-08)"


def check_unitary_dominance(level):
    runs = 1000 if level == "full" else 200
    rng = np.random.default_rng(314159)
    worst = -np.inf
    for _ in range(runs):
        rho0, ch, tau = _random_unitary_run(rng)
        dq = tightness(ch, rho0, tau, QUANTUM_FISHER, _QUAD_FAST).tightness
        dw = tightness(ch, rho0, tau, WIGNER_YANASE, _QUAD_FAST).tightness
        worst = max(worst, dq - dw)
    return worst <= 1e-9, f"worst delta_qf - delta_wy = {worst:.2e} over {runs} runs (tol 1e-09)"


def check_tightness_gap_grid(level):
    n = 200 if level == "full" else 50
    r = np.linspace(0.0, 0.999, n)
    ph = np.linspace(0.0, np.pi, n)
    gap = unitary_qubit_tightness_gap(r[:, None], ph[None, :])
    return gap.min() >= -1e-10, f"min gap {gap.min():.2e} on a {n}x{n} grid (tol -1e-10)"


def check_saturation_dephasing(level):
    rho0 = from_bloch(BlochVector(0.5, np.pi / 2, 0.0))
    ch = ParallelDephasing(0.0, 1.0)
    worst = 0.0
    for gt in (0.5, 1.0, 2.0):
        for f in (QUANTUM_FISHER, WIGNER_YANASE):
            worst = max(worst, tightness(ch, rho0, gt, f, _QUAD).tightness)
    return worst <= 1e-3, f"worst saturated-case delta {worst:.2e} (tol 1e-03)"


def check_saturation_unitary(level):
    from .engine import mt_bound

    omega = 1.0
    ch = UnitaryChannel.from_constant_hamiltonian(0.5 * omega * np.diag([1.0, -1.0]).astype(complex))
    plus = from_bloch(BlochVector(1.0, np.pi / 2, 0.0))
    tau = np.pi / omega
    rep = tightness(ch, plus, tau, QUANTUM_FISHER, _QUAD)
    mb = mt_bound(ch, plus, tau, _QUAD)
    ok = rep.tightness <= 1e-6 and abs(mb.time - tau) <= 1e-6 * tau
    return ok, f"great-circle delta {rep.tightness:.2e}, MT bound {mb.time:.9f} vs tau {tau:.9f}"


def check_regime_dephasing(level):
    rho0 = from_bloch(BlochVector(0.5, np.pi / 4, 0.0))
    out = {}
    for beta in (0.01, 10.0):
        ch = ParallelDephasing(beta, 1.0)
        dq = tightness(ch, rho0, 10.0, QUANTUM_FISHER, _QUAD).tightness
        dw = tightness(ch, rho0, 10.0, WIGNER_YANASE, _QUAD).tightness
        out[beta] = dq - dw
    ok = out[0.01] > 0.0 and out[10.0] < 0.0
    return ok, f"ddelta(beta=0.01) = {out[0.01]:+.2e}, ddelta(beta=10) = {out[10.0]:+.2e}"


def check_regime_damping_grid(level):
    n = 50 if level == "full" else 12
    ch = AmplitudeDamping(1.0)
    diff = np.empty((n, n))
    wy = np.empty((n, n))
    for i, r0 in enumerate(np.linspace(0.02, 0.98, n)):
        for j, th in enumerate(np.linspace(np.pi / 8, np.pi, n)):
            rho0 = from_bloch(BlochVector(r0, th, 0.0))
            dq = tightness(ch, rho0, 10.0, QUANTUM_FISHER, _QUAD).tightness
            dw = tightness(ch, rho0, 10.0, WIGNER_YANASE, _QUAD).tightness
            diff[i, j] = dq - dw
            wy[i, j] = dw
    frac_diff = float(np.mean(diff >= -1e-6))
    frac_wy = float(np.mean(wy <= 1e-2))
    ok = frac_diff >= 0.95 and frac_wy >= 0.90
    return ok, f"{n}x{n} grid: ddelta >= -1e-6 on {frac_diff:.1%}, delta_wy <= 1e-2 on {frac_wy:.1%}"


def check_transversal_closed_forms(level):
    plus = from_bloch(BlochVector(1.0, np.pi / 2, 0.0))
    worst = 0.0
    for beta in (0.1, 0.4, 1.0):
        ch = TransversalDephasing(beta, 1.0)
        for u in (0.5, 1.0, 3.0):
            spec = spectral_decompose(evolve(ch, plus, u))
            drho = state_derivative(ch, plus, u)
            for f in (QUANTUM_FISHER, WIGNER_YANASE, MINIMAL):
                ref = td_plus_fq(beta, u, f)
                num = ds2_from_drho(spec, drho, f)
                worst = max(worst, abs(ref.total - num.total) / num.total)
    # the beta > 1/2 continuation against direct master-equation integration
    ch = TransversalDephasing(1.0, 1.0)
    rho_me = _lindblad_rk4(0.5 * np.diag([1.0, -1.0]).astype(complex),
                           [np.sqrt(0.5) * np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)],
                           plus.matrix, 1.5)
    rho_map = evolve(ch, plus, 1.5).matrix
    me_dev = float(np.max(np.abs(rho_me - rho_map)))
    ok = worst <= 1e-8 and me_dev <= 1e-6
    return ok, f"closed-form worst rel {worst:.2e} (tol 1e-08); continuation vs integrator {me_dev:.2e} (tol 1e-06)"


def check_transversal_short_time(level):
    plus = from_bloch(BlochVector(1.0, np.pi / 2, 0.0))
    ch = TransversalDephasing(0.01, 0.1)
    found = None
    for t in (0.5, 1.0, 2.0, 5.0, 10.0):
        dq = tightness(ch, plus, t, QUANTUM_FISHER, _QUAD).tightness
        dw = tightness(ch, plus, t, WIGNER_YANASE, _QUAD).tightness
        if dw < dq:
            found = t
            break
    return found is not None, f"delta_wy < delta_qf first seen at t = {found}"


def check_skew_vs_variance(level):
    n = 10000 if level == "full" else 2000
    rng = np.random.default_rng(161803)
    worst = -np.inf
    for _ in range(n):
        dim = int(rng.integers(2, 5))
        rho = _random_density(rng, dim)
        h = _random_hermitian(rng, dim)
        worst = max(worst, skew_information(rho, h) - variance(rho, h))
    return worst <= 1e-10, f"worst skew - variance = {worst:.2e} over {n} pairs (tol 1e-10)"


def check_kernel_structure(level):
    t = np.logspace(-2, 2, 201)
    sandwich = np.all(eval_f(MINIMAL, t) <= eval_f(WIGNER_YANASE, t) + 1e-14) and \
        np.all(eval_f(WIGNER_YANASE, t) <= eval_f(QUANTUM_FISHER, t) + 1e-14)
    order_ok = True
    grid = np.linspace(0.01, 0.99, 33)
    for x in grid:
        for y in grid:
            cq = c_kernel(QUANTUM_FISHER, x, y)
            cw = c_kernel(WIGNER_YANASE, x, y)
            cm = c_kernel(MINIMAL, x, y)
            if not (cm >= cw - 1e-12 and cw >= cq - 1e-12):
                order_ok = False
    unit = all(c_kernel(QUANTUM_FISHER, p, 1.0 - p) == 2.0 for p in np.linspace(0.05, 0.95, 19))
    ok = bool(sandwich and order_ok and unit)
    return ok, f"sandwich {sandwich}, kernel ordering {order_ok}, c_qf(p, 1-p) == 2 exactly {unit}"


def check_contractivity(level):
    n = 200 if level == "full" else 60
    rng = np.random.default_rng(577215)
    worst = -np.inf
    for _ in range(n):
        rho = _random_density(rng)
        sig = _random_density(rng)
        kind = rng.integers(0, 4)
        if kind == 0:
            ch = ParallelDephasing(rng.uniform(0, 3), rng.uniform(0.2, 2))
        elif kind == 1:
            ch = TransversalDephasing(rng.uniform(0, 3), rng.uniform(0.2, 2))
        elif kind == 2:
            ch = AmplitudeDamping(rng.uniform(0.2, 2))
        else:
            ch = UnitaryChannel.from_constant_hamiltonian(_random_hermitian(rng))
        t = rng.uniform(0.0, 2.0)
        rho_t, sig_t = evolve(ch, rho, t), evolve(ch, sig, t)
        bures_gap = np.arccos(np.sqrt(fidelity(rho_t, sig_t))) - np.arccos(np.sqrt(fidelity(rho, sig)))
        hell_gap = np.arccos(affinity(rho_t, sig_t)) - np.arccos(affinity(rho, sig))
        worst = max(worst, float(bures_gap), float(hell_gap))
    return worst <= 1e-9, f"worst distance growth {worst:.2e} over {n} channel applications (tol 1e-09)"


CHECKS = (
    ("c1-pd-oracle-qf", check_pd_oracle_qf),
    ("c2-pd-oracle-wy", check_pd_oracle_wy),
    ("c2-pd-oracle-min", check_pd_oracle_min),
    ("c3-ad-oracle", check_ad_oracle),
    ("c4-qsl-inequality", check_qsl_inequality),
    ("c5-unitary-dominance", check_unitary_dominance),
    ("c5-tightness-gap-grid", check_tightness_gap_grid),
    ("c6-saturation-dephasing", check_saturation_dephasing),
    ("c6-saturation-unitary", check_saturation_unitary),
    ("c7-regime-dephasing", check_regime_dephasing),
    ("c7-regime-damping-grid", check_regime_damping_grid),
    ("c8-transversal-closed-forms", check_transversal_closed_forms),
    ("c8-transversal-short-time", check_transversal_short_time),
    ("c9-skew-vs-variance", check_skew_vs_variance),
    ("c9-kernel-structure", check_kernel_structure),
    ("c9-contractivity", check_contractivity),
)


def run_verification(level: str = "quick", only: list[str] | None = None) -> dict:
    """Run the named checks and return a machine-readable summary."""
    if level not in ("quick", "full"):
        raise ValueError(f"unknown verification level {level!r}")
    if only:
        known = {check_id for check_id, _ in CHECKS}
        unknown = sorted(set(only) - known)
        if unknown:
            raise ValueError(f"unknown check ids: {', '.join(unknown)}")
    inject = os.environ.get("QSL_VERIFY_FAIL", "")
    results = []
    for check_id, fn in CHECKS:
        if only and check_id not in only:
            continue
        start = time.perf_counter()
        if inject == check_id:
            passed, detail = False, "forced failure via QSL_VERIFY_FAIL"
        else:
            passed, detail = fn(level)
        results.append(CheckResult(check_id, bool(passed), detail, time.perf_counter() - start))
    return {
        "level": level,
        "passed": all(r.passed for r in results),
        "checks": [
            {"id": r.check_id, "passed": r.passed, "detail": r.detail, "seconds": round(r.seconds, 3)}
            for r in results
        ],
    }

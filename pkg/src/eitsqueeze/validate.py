"""
Self-checks that cross two independent routes or test a structural property.

Each check returns a :class:`CheckResult`; :func:`run_all` runs the full set
and is what the ``validate`` command calls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .effective_model import ADJOINT, noise_model
from .fullmodel import compare_effective, full_steady_state
from .noise import (
    integrate_spectrum,
    solve_lyapunov,
    spin_spectrum,
    spectrum_analytic,
    variance_analytic,
    variance_pipeline,
)
from .params import EffectiveParams, derive_effective, realize_raw

REFERENCE_POINT = dict(C=100.0, rho=1 / 2000, Gamma_p=5.5, Gamma_p_prime=25.0)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    tolerance: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name}: {self.value:.3e} (tol {self.tolerance:.1e}) {self.detail}".rstrip()


def random_points(n=100, seed=0):
    """Log-uniform sample of the resonant zero-field parameter space."""
    rng = np.random.default_rng(seed)
    C = 10 ** rng.uniform(0, 4, n)
    rho = 10 ** rng.uniform(-4, -2, n)
    gp = 10 ** rng.uniform(-1, 2, n)
    gq = 10 ** rng.uniform(-1, 2, n)
    return [EffectiveParams.from_rates(*args) for args in zip(C, rho, gp, gq)]


def reference_params(**overrides) -> EffectiveParams:
    args = {**REFERENCE_POINT, **overrides}
    return EffectiveParams.from_rates(args["C"], args["rho"], args["Gamma_p"], args["Gamma_p_prime"])


def check_master_equivalence(n=100, seed=0, tol=1e-8) -> CheckResult:
    """Matrix pipeline against the closed-form Sy variance."""
    worst = 0.0
    for ep in random_points(n, seed):
        rep, cov, _ = variance_pipeline(ep)
        ref = variance_analytic(ep)
        worst = max(worst, abs(cov.spin_covariance[1, 1] / ref.var_min - 1), abs(rep.dS_min / ref.dS_min - 1))
    return CheckResult("master equivalence", worst <= tol, worst, tol, f"({n} points)")


def check_eit_alone(tol=1e-10) -> CheckResult:
    """Without the Raman pump the Sy variance is the coherent-state value."""
    worst = 0.0
    for gq in (0.5, 4.0, 25.0, 300.0):
        ep = EffectiveParams.from_rates(100.0, 1 / 2000, 0.0, gq)
        rep, cov, _ = variance_pipeline(ep)
        worst = max(
            worst,
            abs(cov.spin_covariance[1, 1] / (ep.N / 4) - 1),
            abs(rep.dS_min / (1 + ep.gamma0 / gq) - 1),
        )
    return CheckResult("EIT pumping alone", worst <= tol, worst, tol)


def check_lyapunov_residual(n=50, seed=1, tol=1e-10) -> CheckResult:
    worst = 0.0
    for ep in random_points(n, seed):
        model = noise_model(ep)
        cov = solve_lyapunov(model.B, model.D)
        worst = max(worst, cov.residual)
    return CheckResult("Lyapunov residual / |D|", worst <= tol, worst, tol)


def check_adjoint_symmetry(n=50, seed=2, tol=1e-10) -> CheckResult:
    """``M[i, j] = conj(M[adj j, adj i])`` for plain products of noise and fluctuations."""
    worst = 0.0
    for ep in random_points(n, seed):
        model = noise_model(ep)
        cov = solve_lyapunov(model.B, model.D)
        for M in (model.D[:, ADJOINT], cov.products):
            worst = max(worst, np.abs(M - M[ADJOINT][:, ADJOINT].T.conj()).max() / np.abs(M).max())
    return CheckResult("adjoint-pairing symmetry", worst <= tol, worst, tol)


def check_positive_semidefinite(n=50, seed=3, tol=1e-10) -> CheckResult:
    """Spin covariance and atomic diffusion block have no negative eigenvalues."""
    worst = 0.0
    for ep in random_points(n, seed):
        model = noise_model(ep)
        cov = solve_lyapunov(model.B, model.D)
        low = np.linalg.eigvalsh(cov.spin_covariance).min() / ep.N
        Dat = model.D[2:, 2:]
        low_d = np.linalg.eigvalsh((Dat + Dat.conj().T) / 2).min() / np.abs(Dat).max()
        worst = max(worst, -low, -low_d)
    return CheckResult("positive semidefinite", worst <= tol, max(worst, 0.0), tol)


def check_n_scaling(tol=1e-10) -> CheckResult:
    ep = reference_params()
    big = ep.with_rates(N=10 * ep.N)
    r1, c1, _ = variance_pipeline(ep)
    r2, c2, _ = variance_pipeline(big)
    err = max(
        abs(r2.dS_min / r1.dS_min - 1),
        abs(c2.spin_covariance[1, 1] / (10 * c1.spin_covariance[1, 1]) - 1),
    )
    return CheckResult("atom-number scaling", err <= tol, err, tol)


def check_gauge_invariance(tol=1e-10) -> CheckResult:
    """Different raw constants with the same effective constants agree."""
    a = REFERENCE_POINT
    base = dict(C=a["C"], rho=a["rho"], gamma0=1.0, Gamma_p=a["Gamma_p"], Gamma_p_prime=a["Gamma_p_prime"], N=1e6)
    reports = []
    for kwargs in ({}, {"Delta_over_gamma": 200.0}, {"gamma_over_gamma0": 1e5}):
        ep = derive_effective(realize_raw(**base, **kwargs))
        reports.append(variance_pipeline(ep)[0].dS_min)
    err = max(abs(r / reports[0] - 1) for r in reports)
    return CheckResult("gauge invariance", err <= tol, err, tol)


def check_resonance_optimal(points=5) -> CheckResult:
    """Zero two-photon and cavity detunings beat a grid of detuned points."""
    ep = reference_params()
    best = variance_pipeline(ep)[0].dS_min
    span = 0.5 * ep.gamma0_tilde
    lowest = math.inf
    for dt in np.linspace(-span, span, points):
        for dc in np.linspace(-span, span, points):
            if dt == 0 and dc == 0:
                continue
            ds = variance_pipeline(ep.with_detunings(dt, dc))[0].dS_min
            lowest = min(lowest, ds)
    margin = lowest - best
    return CheckResult("resonance optimality", margin >= 0, margin, 0.0, "(grid minimum minus resonant value)")


def check_wiener_khinchin(tol=1e-3) -> CheckResult:
    ep = reference_params()
    model = noise_model(ep)
    cov = solve_lyapunov(model.B, model.D)
    G = integrate_spectrum(model.B, model.D)
    err = np.abs(G - cov.G0).max() / np.abs(cov.G0).max()
    return CheckResult("Wiener-Khinchin integral", err <= tol, err, tol)


def check_spectrum_routes(tol=1e-8) -> CheckResult:
    ep = reference_params()
    w = np.concatenate([[0.0], np.geomspace(1e-4, 1e2, 60)])
    ref = np.array([p.total for p in spectrum_analytic(ep, w)])
    got = spin_spectrum(noise_model(ep), w, gamma0=ep.gamma0)
    err = np.abs(got / ref - 1).max()
    return CheckResult("matrix vs closed-form spectrum", err <= tol, err, tol)


def check_full_model(tol=0.05) -> CheckResult:
    """Four-level mean-field solution against the effective steady state."""
    p = realize_raw(100.0, 1 / 2000, 1.0, REFERENCE_POINT["Gamma_p"], REFERENCE_POINT["Gamma_p_prime"], 1e6)
    cmp = compare_effective(p, full_steady_state(p))
    err = max(cmp.s_plus_discrepancy, cmp.s_z_discrepancy)
    excited = max(cmp.excited_fraction, cmp.eit_excited_fraction)
    ok = err <= tol and excited <= 1e-3
    return CheckResult("four-level oracle", ok, err, tol, f"(excited fraction {excited:.1e})")


def check_dark_state(tol=0.02) -> CheckResult:
    p = realize_raw(100.0, 1 / 2000, 1.0, 0.0, 100.0, 1e6)
    state = full_steady_state(p)
    coherence = state.Pr.real / p.N
    err = abs(coherence / -0.5 - 1)
    return CheckResult("dark-state coherence", err <= tol, err, tol, f"(Pr/N = {coherence:.5f})")


CHECKS = (
    check_master_equivalence,
    check_eit_alone,
    check_lyapunov_residual,
    check_adjoint_symmetry,
    check_positive_semidefinite,
    check_n_scaling,
    check_gauge_invariance,
    check_resonance_optimal,
    check_wiener_khinchin,
    check_spectrum_routes,
    check_full_model,
    check_dark_state,
)


def run_all() -> list[CheckResult]:
    return [check() for check in CHECKS]


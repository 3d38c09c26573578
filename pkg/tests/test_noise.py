import math
import warnings

import mpmath
import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from eitsqueeze.effective_model import SteadyState, noise_model, steady_state_zero_field
from eitsqueeze.exceptions import NonStationaryError, ParameterError, UndefinedSpinError
from eitsqueeze.noise import (
    Covariance,
    dS_min_closed_form,
    integrate_spectrum,
    solve_lyapunov,
    spectrum_analytic,
    spectrum_matrix,
    spin_spectrum,
    spin_variance_report,
    variance_analytic,
    variance_pipeline,
)
from eitsqueeze.params import EffectiveParams

RHO = 1 / 2000


# ---------------------------------------------------------------- Lyapunov


def test_lyapunov_identity_and_diagonal():
    cov = solve_lyapunov(np.eye(3), 2 * np.eye(3))
    assert np.allclose(cov.G0, np.eye(3), atol=1e-15)
    B = np.diag([1.0, 2.0 + 3j, 5.0])
    D = np.diag([2.0, 4.0, 1.0])
    cov = solve_lyapunov(B, D)
    assert np.allclose(np.diag(cov.G0), [1.0, 1.0, 0.1], atol=1e-15)
    assert cov.residual < 1e-15 and cov.warning is None


@st.composite
def stable_system(draw):
    n = draw(st.integers(2, 5))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    shift = np.abs(np.linalg.eigvals(A).real).max() + draw(st.floats(0.1, 5))
    B = A + shift * np.eye(n)
    F = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return B, F @ F.conj().T


@settings(max_examples=60, deadline=None)
@given(stable_system())
def test_lyapunov_matches_scipy(system):
    B, D = system
    ours = solve_lyapunov(B, D).G0
    # scipy solves A X + X A^H = Q; ours is B G + G B^H = D.
    theirs = scipy.linalg.solve_continuous_lyapunov(B, D)
    assert np.abs(ours - theirs).max() <= 1e-9 * np.abs(theirs).max()
    assert np.abs(ours - ours.conj().T).max() <= 1e-9 * np.abs(ours).max()


def test_unstable_drift_raises():
    with pytest.raises(NonStationaryError):
        solve_lyapunov(np.diag([1.0, -0.1]), np.eye(2))
    with pytest.raises(NonStationaryError):
        solve_lyapunov(np.diag([1.0, 1j]), np.eye(2))


def test_ill_conditioned_system_warns():
    cov = solve_lyapunov(np.diag([1.0, 1e-14]), np.eye(2))
    assert cov.warning is not None and cov.condition > 1e12


# ---------------------------------------------------------------- spin report


def _isotropic(v):
    G = np.zeros((5, 5), dtype=complex)
    # <dS+ dS-> = <dS- dS+> = 2v, <dSz^2> = v gives Var(Sx) = Var(Sy) = Var(Sz) = v.
    G[2, 2] = G[3, 3] = 2 * v
    G[4, 4] = v
    return Covariance(G0=G, residual=0.0, condition=1.0)


def test_isotropic_covariance():
    ss = SteadyState(S_plus=-10.0 + 0j, S_z=5.0, A2=0j)
    rep = spin_variance_report(_isotropic(3.0), ss, 100)
    assert rep.var_min == pytest.approx(3.0, rel=1e-14)
    assert rep.spin_half == pytest.approx(math.hypot(10, 5) / 2, rel=1e-15)
    assert np.allclose(rep.spin_cov, 3.0 * np.eye(3), atol=1e-14)


def test_zero_spin_is_undefined():
    ss = SteadyState(S_plus=0j, S_z=0.0, A2=0j)
    with pytest.raises(UndefinedSpinError):
        spin_variance_report(_isotropic(1.0), ss, 100)
    with pytest.raises(UndefinedSpinError):
        variance_pipeline(EffectiveParams.from_rates(100, RHO, 0.0, 0.0))


def test_squeezed_component_is_sy_on_resonance():
    rep, _, _ = variance_pipeline(EffectiveParams.from_rates(100, RHO, 5.5, 25.0))
    assert abs(rep.angle) < 1e-6
    assert rep.var_min == pytest.approx(rep.var_sy, rel=1e-9)


def test_raman_off_gives_projection_noise():
    ep = EffectiveParams.from_rates(100, RHO, 0.0, 25.0)
    rep, _, _ = variance_pipeline(ep)
    assert rep.dS_min == pytest.approx(1.04, rel=1e-12)
    assert variance_analytic(ep).dS_min == pytest.approx(1.04, rel=1e-14)


def _mp_lyapunov_sy(C, rho, gp, gq):
    """Sy variance per N/4 from a 50-digit solve of the (X, Sy) pair, which
    closes on its own in the resonant zero-field problem."""
    mpmath.mp.dps = 50
    C, rho, gp, gq = (mpmath.mpf(x) for x in (C, rho, gp, gq))
    g0 = mpmath.mpf(1)
    g0t = g0 + gp + gq
    kappa = g0 / rho
    # Units N = 1, tau = 1: g^2 = 2 kappa C Gamma_p.
    g = mpmath.sqrt(2 * kappa * C * gp)
    sz = gp / (2 * g0t)
    # X = dA2 + dA2^dag couples only to Sy:
    # X' = -kappa X - 2 g Sy and Sy' = -g0t Sy + g Sz X.
    B = mpmath.matrix([[kappa, 2 * g], [-g * sz, g0t]])
    D = mpmath.matrix([[2 * kappa, 0], [0, g0t / 2]])
    # Real symmetric Lyapunov B V + V B^T = D solved as a 3-unknown system.
    b = B
    M = mpmath.matrix(
        [
            [2 * b[0, 0], 2 * b[0, 1], 0],
            [b[1, 0], b[0, 0] + b[1, 1], b[0, 1]],
            [0, 2 * b[1, 0], 2 * b[1, 1]],
        ]
    )
    v = mpmath.lu_solve(M, mpmath.matrix([D[0, 0], D[0, 1], D[1, 1]]))
    return v[2] * 4


def test_sy_variance_against_high_precision_oracle():
    ep = EffectiveParams.from_rates(100, RHO, 2.0, 25.0)
    rep, cov, _ = variance_pipeline(ep)
    oracle = float(_mp_lyapunov_sy(100, RHO, 2.0, 25.0))
    assert cov.spin_covariance[1, 1] / (ep.N / 4) == pytest.approx(oracle, rel=1e-9)
    assert oracle == pytest.approx(0.5374995, abs=5e-7)
    assert rep.dS_min == pytest.approx(0.60008, abs=5e-5)


def test_reference_point_squeezing():
    rep = variance_analytic(EffectiveParams.from_rates(100, RHO, 5.5, 25.0))
    assert rep.dS_min == pytest.approx(0.37, abs=0.01)
    assert 100 * rep.squeezing == pytest.approx(63, abs=1)
    assert rep.squeezing_db == pytest.approx(4.3, abs=0.05)
    assert rep.squeezing_db == pytest.approx(-10 * math.log10(rep.dS_min), rel=1e-15)


def test_closed_form_rejects_detuning():
    with pytest.raises(ParameterError):
        variance_analytic(EffectiveParams.from_rates(100, RHO, 2.0, 25.0, delta_tilde=1.0))
    with pytest.raises(ParameterError):
        spectrum_analytic(EffectiveParams.from_rates(100, RHO, 2.0, 25.0, Delta_c=1.0), [0.0])


@settings(max_examples=40, deadline=None)
@given(
    C=st.floats(1, 1e4),
    gp=st.floats(0.1, 100),
    gq=st.floats(0.1, 100),
    N=st.floats(1e2, 1e9),
)
def test_squeezing_figure_independent_of_n(C, gp, gq, N):
    a = variance_pipeline(EffectiveParams.from_rates(C, RHO, gp, gq, N=N))[0]
    b = variance_pipeline(EffectiveParams.from_rates(C, RHO, gp, gq, N=1e6))[0]
    assert a.dS_min == pytest.approx(b.dS_min, rel=1e-8)
    assert a.var_min / N == pytest.approx(b.var_min / 1e6, rel=1e-8)
    assert dS_min_closed_form(C, RHO, gp, gq) == pytest.approx(b.dS_min, rel=1e-8)


# ---------------------------------------------------------------- spectrum


def test_spectrum_tails():
    ep = EffectiveParams.from_rates(100, RHO, 5.5, 25.0)
    w = np.array([1e4, 1e5])
    pts = spectrum_analytic(ep, w)
    sf = np.array([p.S_f for p in pts])
    sat = np.array([p.S_at for p in pts])
    assert sf[0] / sf[1] == pytest.approx(1e4, rel=1e-3)
    assert sat[0] / sat[1] == pytest.approx(1e2, rel=1e-3)


def test_spectrum_integrates_to_variance():
    ep = EffectiveParams.from_rates(100, RHO, 5.5, 25.0)
    var = variance_analytic(ep).var_min

    def total(w):
        return spectrum_analytic(ep, [w])[0].total

    scale = ep.rho_tilde
    integral = 2 * sum(
        quad(total, a, b, limit=500, epsrel=1e-10)[0]
        for a, b in [(0, scale), (scale, 10 * scale), (10 * scale, 1.0), (1.0, np.inf)]
    )
    assert integral / (2 * np.pi) == pytest.approx(var, rel=1e-3)


def test_scalar_lorentzian_spectrum():
    B = np.array([[3.0]])
    D = np.array([[2.0]])
    w = np.array([0.0, 1.0, 3.0])
    S = spectrum_matrix(B, D, w)[:, 0, 0].real
    assert np.allclose(S, 2.0 / (9 + w**2), rtol=1e-15)


def test_integrated_matrix_spectrum_recovers_covariance():
    model = noise_model(EffectiveParams.from_rates(100, RHO, 5.5, 25.0))
    G = integrate_spectrum(model.B, model.D)
    cov = solve_lyapunov(model.B, model.D)
    assert np.abs(G - cov.G0).max() <= 1e-6 * np.abs(cov.G0).max()


def test_spectrum_routes_agree():
    ep = EffectiveParams.from_rates(100, RHO, 2.0, 25.0)
    model = noise_model(ep, steady_state_zero_field(ep))
    w = np.geomspace(1e-5, 1e2, 60)
    ref = np.array([p.total for p in spectrum_analytic(ep, w)])
    assert np.allclose(spin_spectrum(model, w, gamma0=ep.gamma0), ref, rtol=1e-9, atol=0)


def test_spectral_width():
    ep = EffectiveParams.from_rates(100, RHO, 5.5, 25.0)
    assert 2 * ep.gamma_plus == pytest.approx(447, rel=0.01)
    # The width is set by the squeezing pole of the two-mode system.
    w = ep.gamma_plus / ep.kappa
    s0 = spectrum_analytic(ep, [0.0])[0].total
    sw = spectrum_analytic(ep, [w])[0].total
    assert sw < s0


def test_lyapunov_suppresses_warning_for_reference_model():
    model = noise_model(EffectiveParams.from_rates(100, RHO, 5.5, 25.0))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        cov = solve_lyapunov(model.B, model.D)
    assert cov.warning is None and cov.residual < 1e-12

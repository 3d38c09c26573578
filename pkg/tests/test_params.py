import cmath
import dataclasses
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eitsqueeze.exceptions import ParameterError
from eitsqueeze.noise import variance_pipeline
from eitsqueeze.params import EffectiveParams, SystemParams, derive_effective, realize_raw


def raw(**overrides):
    """Hand-built raw constants: gamma = 1e6, Delta = 1e8, Gamma_p = 2, Gamma_p' = 25."""
    gamma = 1e6
    Delta = 1e8
    g_prime = 10.0
    base = dict(
        N=1e6,
        gamma0=1.0,
        gamma=gamma,
        gamma_prime=gamma,
        kappa=2000.0,
        kappa_prime=1e8,
        g=20.0,
        g_prime=g_prime,
        Omega1=Delta * math.sqrt(2 / gamma),
        Delta1=Delta,
        Delta2=Delta,
        Theta_drive=math.sqrt(25 * gamma / 2) / g_prime,
    )
    base.update(overrides)
    return SystemParams(**base)


def test_derived_decay_is_direct_sum():
    ep = derive_effective(raw())
    assert ep.Gamma_p == pytest.approx(2, rel=1e-14)
    assert ep.Gamma_p_prime == pytest.approx(25, rel=1e-14)
    assert ep.gamma0_tilde == pytest.approx(28, rel=1e-14)
    assert ep.rho_tilde == pytest.approx(ep.rho * ep.gamma0_tilde / ep.gamma0, rel=1e-15)
    assert ep.Lambda12_tilde == pytest.approx(-ep.N * 25 / 2, rel=1e-14)


def test_drives_off():
    ep = derive_effective(raw(Omega1=0.0, Theta_drive=0.0))
    assert ep.Gamma_p == 0 and ep.Gamma_p_prime == 0
    assert ep.gamma0_tilde == ep.gamma0
    assert ep.Lambda12_tilde == 0


def test_cooperativity_identity():
    a = derive_effective(raw(g=20.0, kappa=2000.0, N=1e6))
    b = derive_effective(raw(g=40.0, kappa=8000.0, N=1e6))
    c = derive_effective(raw(g=20.0, kappa=4000.0, N=2e6))
    assert a.C == pytest.approx(b.C, rel=1e-15)
    assert a.C == pytest.approx(c.C, rel=1e-15)
    assert a.C == pytest.approx(20.0**2 * 1e6 / (2 * 2000 * 1e6), rel=1e-15)


def test_light_shift_and_coupling():
    p = raw(Delta1=1e8 + 50, Delta2=1e8 - 50)
    ep = derive_effective(p)
    assert ep.delta_tilde == pytest.approx(100 + abs(p.Omega1) ** 2 / p.Delta, rel=1e-14)
    assert ep.g_tilde == pytest.approx(p.g * abs(p.Omega1) / p.Delta, rel=1e-15)


def test_omega_phase_is_absorbed():
    p = raw()
    q = raw(Omega1=p.Omega1 * cmath.exp(1.3j))
    assert derive_effective(p).key() == pytest.approx(derive_effective(q).key(), rel=1e-14)


@pytest.mark.parametrize(
    "overrides",
    [
        dict(Delta1=0.0, Delta2=0.0),
        dict(Delta1=5.0, Delta2=-5.0),
    ],
)
def test_zero_detuning_rejected(overrides):
    with pytest.raises(ParameterError):
        derive_effective(raw(**overrides))


@pytest.mark.parametrize(
    "overrides",
    [
        dict(gamma0=-1.0),
        dict(gamma=0.0),
        dict(kappa=-5.0),
        dict(N=0.5),
        dict(g=-1.0),
        dict(Lambda1=1.0, Lambda2=1.0),
    ],
)
def test_invalid_raw_parameters(overrides):
    with pytest.raises(ParameterError):
        raw(**overrides)


def test_repopulation_defaults_are_symmetric():
    p = raw()
    assert p.Lambda1 == p.Lambda2 == p.N * p.gamma0 / 2


def test_validity_flags():
    assert derive_effective(raw()).validity.ok
    stressed = derive_effective(raw(Theta_drive=math.sqrt(0.5e6 * 1e6 / 2) / 10.0))
    assert "Gamma_p_prime/gamma_prime" in stressed.validity.violations
    near = derive_effective(raw(Delta1=2e6, Delta2=2e6, Omega1=2e6 * math.sqrt(2 / 1e6)))
    assert "gamma/|Delta|" in near.validity.violations


def test_effective_params_are_frozen():
    ep = EffectiveParams.from_rates(100, 1 / 2000, 2, 25)
    with pytest.raises(dataclasses.FrozenInstanceError):
        ep.C = 3


def test_from_rates_coupling():
    ep = EffectiveParams.from_rates(100, 1 / 2000, 2, 25, N=1e6)
    assert ep.g_tilde**2 == pytest.approx(2 * ep.kappa * ep.tau * ep.C * ep.Gamma_p / ep.N, rel=1e-15)
    with pytest.raises(ParameterError):
        EffectiveParams.from_rates(100, 1 / 2000, -1, 25)


def test_realize_raw_example_round_trip():
    p = realize_raw(100, 1 / 2000, 1.0, 2.0, 25.0, 1e6)
    ep = derive_effective(p)
    assert ep.key() == pytest.approx((100, 1 / 2000, 1.0, 2.0, 25.0, 1e6), rel=1e-12)
    assert p.tau == 1 and p.gamma == 1e6 and p.Delta == pytest.approx(1e8)


def test_realize_raw_rejects_zero_cooperativity():
    with pytest.raises(ParameterError):
        realize_raw(0.0, 1 / 2000, 1.0, 2.0, 25.0, 1e6)


@settings(max_examples=200, deadline=None)
@given(
    C=st.floats(1, 1e5),
    rho=st.floats(1e-5, 0.5),
    Gamma_p=st.floats(0.01, 1e3),
    Gamma_p_prime=st.floats(0.01, 1e3),
    N=st.floats(1e3, 1e10),
    delta_tilde=st.floats(-50, 50),
)
def test_round_trip_property(C, rho, Gamma_p, Gamma_p_prime, N, delta_tilde):
    p = realize_raw(C, rho, 1.0, Gamma_p, Gamma_p_prime, N, delta_tilde=delta_tilde)
    ep = derive_effective(p)
    for got, want in zip(ep.key(), (C, rho, 1.0, Gamma_p, Gamma_p_prime, N)):
        assert got == pytest.approx(want, rel=1e-12)
    # delta = Delta1 - Delta2 with both near 1e8 gamma0: a few ulps of Delta.
    assert ep.delta_tilde == pytest.approx(delta_tilde, abs=8 * math.ulp(p.Delta))


def test_gauge_invariance_of_squeezing():
    args = (100, 1 / 2000, 1.0, 5.5, 25.0, 1e6)
    a = variance_pipeline(derive_effective(realize_raw(*args)))[0].dS_min
    b = variance_pipeline(derive_effective(realize_raw(*args, Delta_over_gamma=200)))[0].dS_min
    assert b == pytest.approx(a, rel=1e-10)


@given(
    base=st.tuples(st.floats(0.1, 10), st.floats(0, 100), st.floats(0, 100)),
    which=st.integers(0, 2),
    bump=st.floats(1e-3, 10),
)
def test_effective_decay_is_monotone(base, which, bump):
    g0, gp, gq = base
    ep = EffectiveParams.from_rates(100, 1 / 2000, gp, gq, gamma0=g0)
    up = [g0, gp, gq]
    up[which] += bump
    ep2 = EffectiveParams.from_rates(100, 1 / 2000, up[1], up[2], gamma0=up[0])
    assert ep2.gamma0_tilde > ep.gamma0_tilde

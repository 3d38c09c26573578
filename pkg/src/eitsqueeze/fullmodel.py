"""
Mean-field steady state of the complete four-level double-Lambda model.

Levels 1 and 2 are the ground sublevels, 3 the excited state of the Raman
transitions and 4 the excited state of the EIT transitions.  Noise operators
are dropped, leaving c-number equations for four populations, five
coherences and the two cavity fields.  The solver is an independent check
on the adiabatic elimination behind the effective model.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .effective_model import steady_state_with_field, steady_state_zero_field
from .exceptions import ConvergenceError, ParameterError
from .params import SystemParams, Validity, derive_effective, realize_raw

RESIDUAL_TOL = 1e-10
MAX_ITERATIONS = 200
MIN_STEP = 2.0**-20
RAMP_STEPS = 10

# Smallest drive-to-detuning ratio used for variable scaling.
_FLOOR = 1e-8


@dataclass(frozen=True)
class FullModelState:
    """Stationary mean values (atom numbers for atomic operators)."""

    Pi1: float
    Pi2: float
    Pi3: float
    Pi4: float
    P13: complex
    P23: complex
    P14: complex
    P24: complex
    Pr: complex
    A2: complex
    Theta: complex
    residual: float = 0.0
    iterations: int = 0

    @property
    def populations(self) -> np.ndarray:
        return np.array([self.Pi1, self.Pi2, self.Pi3, self.Pi4])

    @property
    def ground_population(self) -> float:
        return self.Pi1 + self.Pi2

    @property
    def S_z(self) -> float:
        """Ground-state inversion ``(Pi2 - Pi1) / 2``."""
        return (self.Pi2 - self.Pi1) / 2


@dataclass(frozen=True)
class EffectiveComparison:
    """Full-model means set against the effective model at the same field."""

    full: FullModelState
    S_plus_full: complex
    S_plus_effective: complex
    S_z_full: float
    S_z_effective: float
    excited_fraction: float
    eit_excited_fraction: float
    validity: Validity

    @property
    def s_plus_discrepancy(self) -> float:
        return _relative(self.S_plus_full, self.S_plus_effective, self.full_scale)

    @property
    def s_z_discrepancy(self) -> float:
        return _relative(self.S_z_full, self.S_z_effective, self.full_scale)

    @property
    def full_scale(self) -> float:
        return self.full.ground_population

    def within(self, tol=0.05) -> bool:
        return self.s_plus_discrepancy <= tol and self.s_z_discrepancy <= tol


def _relative(a, b, scale):
    # Relative to the effective value, falling back to an absolute
    # difference per atom when both are essentially zero.
    ref = max(abs(a), abs(b))
    if ref <= 1e-12 * scale:
        return abs(a - b) / scale
    return abs(a - b) / abs(b) if abs(b) > 0 else math.inf


def _theta_input(p: SystemParams, theta_drive):
    return complex(p.kappa_prime, p.Delta_c_prime) * theta_drive / math.sqrt(2 * p.kappa_prime / p.tau_prime)


class _System:
    """Residual of the mean-field equations in scaled variables."""

    def __init__(self, p: SystemParams):
        self.p = p
        g_tilde = p.g * abs(p.Omega1) / abs(p.Delta) if p.Delta != 0 else 0.0
        if g_tilde > 0:
            a_scale = p.gamma0 / g_tilde
        elif p.g > 0:
            a_scale = p.gamma / p.g
        else:
            a_scale = 1.0
        if abs(p.Theta_drive) > 0:
            t_scale = abs(p.Theta_drive)
        elif p.g_prime > 0:
            t_scale = math.sqrt(p.gamma0 * p.gamma_prime / 2) / p.g_prime
        else:
            t_scale = 1.0
        N = p.N
        # Optical coherences and excited populations are scaled by their
        # perturbative size (drive over detuning), which keeps the Newton
        # Jacobian well conditioned across the rate hierarchy.
        raman = max(abs(p.Omega1) / min(abs(complex(p.gamma, p.Delta1)), abs(complex(p.gamma, p.Delta2))), _FLOOR)
        eit = max(p.g_prime * abs(p.Theta_drive) / p.gamma_prime, _FLOOR)
        self.var_scale = np.array(
            [N, N, N * raman**2, N * eit**2, N * raman, N * raman, N * eit, N * eit, N, a_scale, t_scale]
        )
        rates = np.array(
            [
                p.gamma0,
                p.gamma0,
                2 * p.gamma,
                2 * p.gamma_prime,
                abs(complex(p.gamma, p.Delta1)),
                abs(complex(p.gamma, p.Delta2)),
                p.gamma_prime,
                p.gamma_prime,
                p.gamma0,
                abs(complex(p.kappa, p.Delta_c)),
                abs(complex(p.kappa_prime, p.Delta_c_prime)),
            ]
        )
        self.res_scale = rates * self.var_scale
        self.set_drive(1.0)

    def set_drive(self, s, input_factor=None):
        p = self.p
        self.Omega1 = s * complex(p.Omega1)
        self.Theta_in = s * _theta_input(p, p.Theta_drive)
        self.A2_in = (s if input_factor is None else input_factor) * complex(p.A2_in)

    def unpack(self, x):
        z = x[4:11] + 1j * x[11:18]
        v = np.concatenate([x[:4].astype(complex), z]) * self.var_scale
        return v

    def pack(self, v):
        v = np.asarray(v, dtype=complex) / self.var_scale
        return np.concatenate([v[:4].real, v[4:].real, v[4:].imag])

    def rhs(self, v):
        p = self.p
        Pi1, Pi2, Pi3, Pi4, P13, P23, P14, P24, Pr, A2, Th = v
        g, gp = p.g, p.g_prime
        Om = self.Omega1
        c = np.conj
        pump3 = 1j * c(Om) * P13 - 1j * Om * c(P13)
        cav3 = 1j * g * c(A2) * P23 - 1j * g * A2 * c(P23)
        eit1 = 1j * gp * c(Th) * P14 - 1j * gp * Th * c(P14)
        eit2 = 1j * gp * c(Th) * P24 - 1j * gp * Th * c(P24)
        back = p.gamma * Pi3 + p.gamma_prime * Pi4
        return np.array(
            [
                pump3 + eit1 + back - p.gamma0 * Pi1 + p.Lambda1,
                cav3 + eit2 + back - p.gamma0 * Pi2 + p.Lambda2,
                -pump3 - cav3 - 2 * p.gamma * Pi3,
                -eit1 - eit2 - 2 * p.gamma_prime * Pi4,
                -complex(p.gamma, p.Delta1) * P13 + 1j * Om * (Pi1 - Pi3) + 1j * g * A2 * c(Pr),
                -complex(p.gamma, p.Delta2) * P23 + 1j * g * A2 * (Pi2 - Pi3) + 1j * Om * Pr,
                -p.gamma_prime * P14 + 1j * gp * Th * (Pi1 - Pi4) + 1j * gp * Th * c(Pr),
                -p.gamma_prime * P24 + 1j * gp * Th * (Pi2 - Pi4) + 1j * gp * Th * Pr,
                -complex(p.gamma0, -p.delta) * Pr
                + 1j * c(Om) * P23
                - 1j * g * A2 * c(P13)
                + 1j * gp * c(Th) * P24
                - 1j * gp * Th * c(P14),
                -complex(p.kappa, p.Delta_c) * A2
                + 1j * g / p.tau * P23
                + math.sqrt(2 * p.kappa / p.tau) * self.A2_in,
                -complex(p.kappa_prime, p.Delta_c_prime) * Th
                + 1j * gp / p.tau_prime * (P14 + P24)
                + math.sqrt(2 * p.kappa_prime / p.tau_prime) * self.Theta_in,
            ]
        )

    def residual(self, x):
        r = self.rhs(self.unpack(x)) / self.res_scale
        return np.concatenate([r[:4].real, r[4:].real, r[4:].imag])

    def jacobian(self, x, h=1e-3):
        # The equations are at most quadratic, so central differences are
        # exact up to rounding.
        n = x.size
        J = np.empty((n, n))
        for k in range(n):
            e = np.zeros(n)
            e[k] = h
            J[:, k] = (self.residual(x + e) - self.residual(x - e)) / (2 * h)
        return J


def _atomic_source(p: SystemParams, s):
    # Zero-field Raman emission of the effective model with both drives
    # scaled by s.
    q = dataclasses.replace(p, Omega1=s * p.Omega1, Theta_drive=s * p.Theta_drive)
    try:
        ep = derive_effective(q)
    except ParameterError:
        return 0j
    return ep.g_tilde * steady_state_zero_field(ep).S_plus


def _input_ramp(p: SystemParams, ramp):
    """Scale factors for the Raman cavity input along the drive ramp.

    The input follows the atomic emission it competes with, so an input
    tuned against that emission stays tuned at every stage.  Without an
    atomic source the input is ramped with the drives.
    """
    full = _atomic_source(p, 1.0)
    if abs(full) == 0:
        return list(ramp)
    return [_atomic_source(p, s) / full for s in ramp]


def _newton(system, x, tol, max_iter):
    r = system.residual(x)
    norm = np.max(np.abs(r))
    for it in range(max_iter):
        if norm <= tol:
            return x, norm, it
        try:
            dx = np.linalg.solve(system.jacobian(x), -r)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError("singular Jacobian in full-model solve", norm) from exc
        step = 1.0
        while True:
            x_new = x + step * dx
            r_new = system.residual(x_new)
            norm_new = np.max(np.abs(r_new))
            if norm_new < norm or step <= MIN_STEP:
                break
            step /= 2
        if not norm_new < norm:
            raise ConvergenceError(f"full-model Newton stalled at residual {norm:.3e}", norm)
        x, r, norm = x_new, r_new, norm_new
    if norm <= tol:
        return x, norm, max_iter
    raise ConvergenceError(
        f"full-model Newton did not converge in {max_iter} iterations (residual {norm:.3e})", norm
    )


def full_steady_state(p: SystemParams, *, tol=RESIDUAL_TOL, max_iter=MAX_ITERATIONS) -> FullModelState:
    """Stationary c-number solution of the four-level model.

    Starts from the unpumped state and ramps the Raman pump and the EIT
    drive over geometric steps, with the Raman cavity input following the
    atomic emission, and solves each stage by damped Newton iteration.  The
    residual is measured per equation in units of that equation's own decay
    rate times the variable's scale, so ``tol`` is a relative tolerance.  Returns the branch connected to the
    unpumped state.
    """
    system = _System(p)
    v0 = np.zeros(11, dtype=complex)
    v0[0] = p.Lambda1 / p.gamma0
    v0[1] = p.Lambda2 / p.gamma0
    x = system.pack(v0)
    total = 0
    norm = 0.0
    ramp = np.geomspace(1e-3, 1.0, RAMP_STEPS)
    for s, f in zip(ramp, _input_ramp(p, ramp)):
        system.set_drive(s, f)
        x, norm, it = _newton(system, x, tol, max_iter)
        total += it
    v = system.unpack(x)
    return FullModelState(
        *(float(t.real) for t in v[:4]),
        *(complex(t) for t in v[4:]),
        residual=float(norm),
        iterations=total,
    )


def compare_effective(p: SystemParams, state: FullModelState | None = None) -> EffectiveComparison:
    """Check the effective model against the four-level solution.

    The effective model is evaluated with the intracavity Raman field of the
    full solution, so the comparison tests the atomic elimination only.  The
    phase of ``Omega1`` is moved onto the field, which is how the effective
    model keeps its coupling real.
    """
    if state is None:
        state = full_steady_state(p)
    ep = derive_effective(p)
    if abs(p.Omega1) > 0:
        phase = complex(p.Omega1).conjugate() / abs(p.Omega1)
    else:
        phase = 1.0
    if ep.g_tilde == 0:
        # Without a Raman coupling the field does not act on the spins.
        eff = steady_state_zero_field(ep)
    else:
        eff = steady_state_with_field(ep, state.A2 * phase)
    return EffectiveComparison(
        full=state,
        S_plus_full=state.Pr,
        S_plus_effective=eff.S_plus,
        S_z_full=state.S_z,
        S_z_effective=eff.S_z,
        excited_fraction=state.Pi3 / p.N,
        eit_excited_fraction=state.Pi4 / p.N,
        validity=ep.validity,
    )


def dark_state_params(Gamma_p_prime, N=1e6, gamma0=1.0) -> SystemParams:
    """EIT drive only: no Raman pump and an empty Raman cavity input."""
    if Gamma_p_prime <= 0:
        raise ParameterError("the dark-state limit needs a positive EIT pumping rate")
    return realize_raw(1.0, 1e-3, gamma0, 0.0, Gamma_p_prime, N)

"""
Steady state and linearized noise model of the effective ground-state system.

The fluctuation vector is ordered ``[dA2, dA2^dag, dS+, dS-, dSz]``.  Second
moments follow the bra-ket convention ``G_ij = <dxi_i dxi_j^dag>`` and
``<F_i(t) F_j^dag(t')> = D_ij delta(t - t')``, for which the stationary
covariance obeys ``B G + G B^dag = D`` with ``d(dxi)/dt = -B dxi + F``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ParameterError
from .params import EffectiveParams

BASIS = ("dA2", "dA2+", "dS+", "dS-", "dSz")
# Index of the adjoint of each basis operator.
ADJOINT = np.array([1, 0, 3, 2, 4])


@dataclass(frozen=True)
class SteadyState:
    """Mean values of the effective model (atom units, field in sqrt(photons/s))."""

    S_plus: complex
    S_z: float
    A2: complex = 0j

    @property
    def S_minus(self) -> complex:
        return complex(self.S_plus).conjugate()

    @property
    def mean_spin(self) -> np.ndarray:
        """``(<Sx>, <Sy>, <Sz>)`` with ``S+ = Sx + i Sy``."""
        s = complex(self.S_plus)
        return np.array([s.real, s.imag, float(self.S_z)])

    @property
    def spin_length(self) -> float:
        return float(np.linalg.norm(self.mean_spin))


@dataclass(frozen=True)
class NoiseModel:
    """Drift and diffusion matrices of the linearized fluctuations."""

    B: np.ndarray
    D: np.ndarray
    kappa: float
    basis: tuple = BASIS

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.B)

    @property
    def is_stable(self) -> bool:
        return bool(np.all(self.eigenvalues().real > 0))


def steady_state_zero_field(ep: EffectiveParams) -> SteadyState:
    """Mean spin when the intracavity Raman field has zero mean.

    ``<Sz> = (Lambda2~ - Lambda1~) / 2 gamma0~`` and
    ``<S+> = Lambda12~ / (gamma0~ - i delta~)``, which reduces to
    ``-N Gamma_p' / 2 gamma0~`` on two-photon resonance.
    """
    s_plus = ep.Lambda12_tilde / complex(ep.gamma0_tilde, -ep.delta_tilde)
    return SteadyState(S_plus=s_plus, S_z=ep.Lambda_diff / (2 * ep.gamma0_tilde), A2=0j)


def steady_state_with_field(ep: EffectiveParams, A2_mean: complex) -> SteadyState:
    """Mean spin for a prescribed intracavity field ``<A2>``.

    Solves the three stationary mean-value equations for ``(S+, S-, Sz)``
    with the field held fixed; the field itself is not solved for.
    """
    a = complex(A2_mean)
    ac = a.conjugate()
    g = ep.g_tilde
    g0t = ep.gamma0_tilde
    dt = ep.delta_tilde
    M = np.array(
        [
            [-(g0t - 1j * dt), 0, 2j * g * a],
            [0, -(g0t + 1j * dt), -2j * g * ac],
            [1j * g * ac, -1j * g * a, -g0t],
        ],
        dtype=complex,
    )
    rhs = -np.array([ep.Lambda12_tilde, np.conj(ep.Lambda12_tilde), ep.Lambda_diff / 2], dtype=complex)
    try:
        s_plus, _, s_z = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError as exc:
        raise ParameterError("singular steady-state system (gamma0_tilde = 0?)") from exc
    return SteadyState(S_plus=complex(s_plus), S_z=float(s_z.real), A2=a)


def drift_matrix(ep: EffectiveParams, ss: SteadyState) -> np.ndarray:
    """Linearized evolution matrix ``B`` in the basis :data:`BASIS`."""
    g = ep.g_tilde
    tau = ep.tau
    a = complex(ss.A2)
    B = np.zeros((5, 5), dtype=complex)
    B[0, 0] = ep.kappa + 1j * ep.Delta_c
    B[0, 2] = -1j * g / tau
    B[1, 1] = ep.kappa - 1j * ep.Delta_c
    B[1, 3] = 1j * g / tau
    B[2, 0] = -2j * g * ss.S_z
    B[2, 2] = ep.gamma0_tilde - 1j * ep.delta_tilde
    B[2, 4] = -2j * g * a
    B[3, 1] = 2j * g * ss.S_z
    B[3, 3] = ep.gamma0_tilde + 1j * ep.delta_tilde
    B[3, 4] = 2j * g * a.conjugate()
    B[4, 0] = 1j * g * ss.S_minus
    B[4, 1] = -1j * g * ss.S_plus
    B[4, 2] = -1j * g * a.conjugate()
    B[4, 3] = 1j * g * a
    B[4, 4] = ep.gamma0_tilde
    return B


def atomic_diffusion(ep: EffectiveParams, s_plus: complex, s_z: float) -> np.ndarray:
    """Atomic diffusion block for the means ``<S+> = s_plus``, ``<Sz> = s_z``.

    The single-atom ground state is subject to three incoherent processes:
    transit-time renewal at ``gamma0`` into the mixed state, Raman pumping
    at ``Gamma_p`` out of level 1, and EIT pumping at ``Gamma_p'`` out of the
    bright superposition.  The coefficients are the Einstein-relation
    values of those processes summed over ``N`` independent atoms; they are
    linear in the means, so they stay valid when the field or the two-photon
    detuning moves the steady state.
    """
    g0 = ep.gamma0
    gp = ep.Gamma_p
    gq = ep.Gamma_p_prime
    u = complex(s_plus) / ep.N
    w = u.conjugate()
    z = float(s_z) / ep.N
    re = (u + w) / 2
    D = np.array(
        [
            [
                g0 * (1 + z) + gp * (1.5 + z) + gq * (1 + z + re),
                gq * u,
                -gp * u - g0 * u / 2 + gq * (0.25 + z / 2 - u / 2),
            ],
            [
                gq * w,
                g0 * (1 - z) + gp * (0.5 - z) + gq * (1 - z + re),
                g0 * w / 2 + gq * (w / 2 + z / 2 - 0.25),
            ],
            [
                -gp * w - g0 * w / 2 + gq * (0.25 + z / 2 - w / 2),
                g0 * u / 2 + gq * (u / 2 + z / 2 - 0.25),
                g0 / 2 + gp * (0.5 - z) + gq / 2,
            ],
        ],
        dtype=complex,
    )
    return ep.N * D


def resonant_atomic_diffusion(ep: EffectiveParams) -> np.ndarray:
    """Closed form of :func:`atomic_diffusion` at zero field and detuning."""
    g0t = ep.gamma0_tilde
    gp = ep.Gamma_p
    gq = ep.Gamma_p_prime
    q = gq**2 / (2 * g0t)
    c_plus = (g0t + gp) * gq / (2 * g0t)
    c_minus = (gp - g0t) * gq / (2 * g0t)
    D = np.array(
        [
            [g0t + gp - q, -q, c_plus],
            [-q, g0t - gp - q, c_minus],
            [c_plus, c_minus, g0t / 2 - gp**2 / (2 * g0t)],
        ]
    )
    return ep.N * D


def diffusion_matrix(ep: EffectiveParams, ss: SteadyState, *, frozen: bool = False) -> np.ndarray:
    """Full 5x5 diffusion matrix.

    The only field entry is ``<F_A F_A^dag> = 2 kappa / tau`` (coherent or
    vacuum input).  With ``frozen=True`` the atomic block is evaluated at the
    zero-field resonant steady state whatever ``ss`` is.
    """
    D = np.zeros((5, 5), dtype=complex)
    D[0, 0] = 2 * ep.kappa / ep.tau
    if frozen:
        D[2:, 2:] = resonant_atomic_diffusion(ep)
    else:
        D[2:, 2:] = atomic_diffusion(ep, ss.S_plus, ss.S_z)
    return D


def noise_model(ep: EffectiveParams, ss: SteadyState | None = None, *, frozen: bool = False) -> NoiseModel:
    """Assemble ``B`` and ``D``; defaults to the zero-field steady state."""
    if ss is None:
        ss = steady_state_zero_field(ep)
    return NoiseModel(B=drift_matrix(ep, ss), D=diffusion_matrix(ep, ss, frozen=frozen), kappa=ep.kappa)

"""
Physical parameters of the double-Lambda cavity scheme.

Two parameter sets live here:

``SystemParams``
    raw constants of the four-level atoms, the Raman cavity mode and the EIT
    cavity mode (decay rates, couplings, detunings, drives).
``EffectiveParams``
    constants of the two-level ground-state model obtained once the excited
    states and optical coherences are adiabatically eliminated.

All rates are angular frequencies.  The rest of the package works in units
where the ground-state decay rate ``gamma0`` is 1, which is also what the
command-line tool expects, but nothing here assumes it.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

from .exceptions import ParameterError

# Canonical gauge used by realize_raw: scale separations between the
# ground-state, optical and cavity time scales.
GAMMA_OVER_GAMMA0 = 1e6
DELTA_OVER_GAMMA = 100.0
EIT_CAVITY_OVER_GAMMA = 100.0
EIT_COOPERATIVITY = 1e-3

# A ratio that should be "much smaller than one" is flagged above this.
ADIABATIC_THRESHOLD = 0.1


def _require_positive(**values):
    for name, value in values.items():
        if not value > 0:
            raise ParameterError(f"{name} must be strictly positive, got {value!r}")


def _require_non_negative(**values):
    for name, value in values.items():
        if not value >= 0:
            raise ParameterError(f"{name} must be non-negative, got {value!r}")


@dataclass(frozen=True)
class SystemParams:
    """Raw constants of the full four-level model.

    ``Omega1`` is the classical Rabi frequency ``g * A1`` of the Raman pump and
    may be complex.  ``Theta_drive`` is the intracavity amplitude of the EIT
    mode that the effective model uses; the full model drives its EIT cavity
    so that the empty-cavity field equals it.  ``Lambda1``/``Lambda2`` default
    to the symmetric repopulation ``N * gamma0 / 2``.
    """

    N: float
    gamma0: float
    gamma: float
    gamma_prime: float
    kappa: float
    kappa_prime: float
    g: float
    g_prime: float
    Omega1: complex
    Delta1: float
    Delta2: float
    Theta_drive: complex
    tau: float = 1.0
    tau_prime: float = 1.0
    Delta_c: float = 0.0
    Delta_c_prime: float = 0.0
    A2_in: complex = 0.0
    Lambda1: float | None = None
    Lambda2: float | None = None

    def __post_init__(self):
        if not self.N >= 1:
            raise ParameterError(f"N must be at least 1, got {self.N!r}")
        _require_positive(
            gamma0=self.gamma0,
            gamma=self.gamma,
            gamma_prime=self.gamma_prime,
            kappa=self.kappa,
            kappa_prime=self.kappa_prime,
            tau=self.tau,
            tau_prime=self.tau_prime,
        )
        _require_non_negative(g=self.g, g_prime=self.g_prime)
        half = self.N * self.gamma0 / 2
        if self.Lambda1 is None:
            object.__setattr__(self, "Lambda1", half)
        if self.Lambda2 is None:
            object.__setattr__(self, "Lambda2", half)
        _require_non_negative(Lambda1=self.Lambda1, Lambda2=self.Lambda2)
        total = self.N * self.gamma0
        if abs(self.Lambda1 + self.Lambda2 - total) > 1e-12 * total:
            raise ParameterError(
                "Lambda1 + Lambda2 must equal N * gamma0 to keep the population constant"
            )

    @property
    def Delta(self) -> float:
        """Mean optical detuning of the Raman transitions."""
        return (self.Delta1 + self.Delta2) / 2

    @property
    def delta(self) -> float:
        """Two-photon (ground-state) detuning before the light shift."""
        return self.Delta1 - self.Delta2


@dataclass(frozen=True)
class Validity:
    """Scale-separation ratios of an effective parameter set.

    ``ratios`` maps a label to a number that should be small; any entry above
    :data:`ADIABATIC_THRESHOLD` is listed in ``violations``.
    """

    ratios: dict = field(default_factory=dict)
    violations: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    @classmethod
    def from_ratios(cls, ratios):
        bad = tuple(k for k, v in ratios.items() if v > ADIABATIC_THRESHOLD)
        return cls(ratios=dict(ratios), violations=bad)


@dataclass(frozen=True)
class EffectiveParams:
    """Constants of the effective ground-state model.

    Build instances with :func:`derive_effective` or :meth:`from_rates`; the
    derived fields (``gamma0_tilde``, ``rho_tilde``, ``g_tilde``, in-terms) are
    only consistent when created through those.
    """

    N: float
    gamma0: float
    C: float
    rho: float
    Gamma_p: float
    Gamma_p_prime: float
    gamma0_tilde: float
    rho_tilde: float
    g_tilde: float
    delta_tilde: float
    Lambda12_tilde: float
    Lambda_diff: float
    kappa: float
    tau: float
    Delta_c: float
    gamma: float = GAMMA_OVER_GAMMA0
    gamma_prime: float = GAMMA_OVER_GAMMA0
    validity: Validity = field(default_factory=Validity, compare=False)

    @classmethod
    def from_rates(
        cls,
        C,
        rho,
        Gamma_p,
        Gamma_p_prime,
        N=1e6,
        gamma0=1.0,
        delta_tilde=0.0,
        Delta_c=0.0,
        tau=1.0,
        gamma=None,
        gamma_prime=None,
    ) -> "EffectiveParams":
        """Effective constants straight from the dimensionless figure axes.

        The Raman coupling follows from ``C`` and ``Gamma_p`` through
        ``g_tilde**2 = 2 kappa tau C Gamma_p / N``.  ``gamma``/``gamma_prime``
        are only used for the validity ratios and default to the canonical
        ``1e6 * gamma0``.
        """
        _require_positive(C=C, rho=rho, N=N, gamma0=gamma0, tau=tau)
        _require_non_negative(Gamma_p=Gamma_p, Gamma_p_prime=Gamma_p_prime)
        gamma = GAMMA_OVER_GAMMA0 * gamma0 if gamma is None else gamma
        gamma_prime = GAMMA_OVER_GAMMA0 * gamma0 if gamma_prime is None else gamma_prime
        kappa = gamma0 / rho
        g_tilde = math.sqrt(2 * kappa * tau * C * Gamma_p / N)
        return _assemble(
            N=N,
            gamma0=gamma0,
            C=C,
            kappa=kappa,
            tau=tau,
            Gamma_p=Gamma_p,
            Gamma_p_prime=Gamma_p_prime,
            g_tilde=g_tilde,
            delta_tilde=delta_tilde,
            Delta_c=Delta_c,
            Lambda_diff=N * Gamma_p,
            gamma=gamma,
            gamma_prime=gamma_prime,
            extra_ratios={},
        )

    def with_rates(self, Gamma_p=None, Gamma_p_prime=None, N=None) -> "EffectiveParams":
        """Same cavity and cooperativity, different pump rates or atom number."""
        return EffectiveParams.from_rates(
            self.C,
            self.rho,
            self.Gamma_p if Gamma_p is None else Gamma_p,
            self.Gamma_p_prime if Gamma_p_prime is None else Gamma_p_prime,
            N=self.N if N is None else N,
            gamma0=self.gamma0,
            delta_tilde=self.delta_tilde,
            Delta_c=self.Delta_c,
            tau=self.tau,
            gamma=self.gamma,
            gamma_prime=self.gamma_prime,
        )

    def with_detunings(self, delta_tilde=None, Delta_c=None) -> "EffectiveParams":
        return dataclasses.replace(
            self,
            delta_tilde=self.delta_tilde if delta_tilde is None else delta_tilde,
            Delta_c=self.Delta_c if Delta_c is None else Delta_c,
        )

    @property
    def gamma_plus(self) -> float:
        """Decay rate of the squeezed spin component once the cavity is eliminated."""
        return self.gamma0_tilde + 2 * self.C * self.Gamma_p**2 / self.gamma0_tilde

    def key(self) -> tuple:
        """The tuple realize_raw is asked to reproduce."""
        return (self.C, self.rho, self.gamma0, self.Gamma_p, self.Gamma_p_prime, self.N)


def _assemble(
    *,
    N,
    gamma0,
    C,
    kappa,
    tau,
    Gamma_p,
    Gamma_p_prime,
    g_tilde,
    delta_tilde,
    Delta_c,
    Lambda_diff,
    gamma,
    gamma_prime,
    extra_ratios,
):
    gamma0_tilde = gamma0 + Gamma_p + Gamma_p_prime
    rho = gamma0 / kappa
    ratios = {
        "Gamma_p/gamma": Gamma_p / gamma,
        "Gamma_p_prime/gamma_prime": Gamma_p_prime / gamma_prime,
        "gamma0_tilde/kappa": gamma0_tilde / kappa,
        "gamma0/gamma": gamma0 / gamma,
    }
    ratios.update(extra_ratios)
    return EffectiveParams(
        N=N,
        gamma0=gamma0,
        C=C,
        rho=rho,
        Gamma_p=Gamma_p,
        Gamma_p_prime=Gamma_p_prime,
        gamma0_tilde=gamma0_tilde,
        rho_tilde=rho * gamma0_tilde / gamma0,
        g_tilde=g_tilde,
        delta_tilde=delta_tilde,
        Lambda12_tilde=-N * Gamma_p_prime / 2,
        Lambda_diff=Lambda_diff,
        kappa=kappa,
        tau=tau,
        Delta_c=Delta_c,
        gamma=gamma,
        gamma_prime=gamma_prime,
        validity=Validity.from_ratios(ratios),
    )


def derive_effective(p: SystemParams) -> EffectiveParams:
    """Adiabatically eliminate the excited states of ``p``.

    The Raman pump gives ``Gamma_p = gamma |Omega1|^2 / Delta^2``, a light
    shift ``|Omega1|^2 / Delta`` and an effective coupling
    ``g_tilde = g |Omega1| / Delta``; the EIT mode gives
    ``Gamma_p_prime = 2 g'^2 |Theta|^2 / gamma'``.  The phase of ``Omega1``
    is absorbed into the ground-state coherence, so ``g_tilde`` is real.
    The returned ``validity`` lists every scale separation that is not met.
    """
    Delta = p.Delta
    if Delta == 0:
        raise ParameterError("mean optical detuning Delta must be non-zero")
    om2 = abs(p.Omega1) ** 2
    Gamma_p = p.gamma * om2 / Delta**2
    Gamma_p_prime = 2 * p.g_prime**2 * abs(p.Theta_drive) ** 2 / p.gamma_prime
    C = p.g**2 * p.N / (2 * p.kappa * p.tau * p.gamma)
    extra = {
        "gamma/|Delta|": p.gamma / abs(Delta),
        "|delta|/|Delta|": abs(p.delta) / abs(Delta),
    }
    return _assemble(
        N=p.N,
        gamma0=p.gamma0,
        C=C,
        kappa=p.kappa,
        tau=p.tau,
        Gamma_p=Gamma_p,
        Gamma_p_prime=Gamma_p_prime,
        g_tilde=p.g * abs(p.Omega1) / Delta,
        delta_tilde=p.delta + om2 / Delta,
        Delta_c=p.Delta_c,
        Lambda_diff=p.Lambda2 - p.Lambda1 + p.N * Gamma_p,
        gamma=p.gamma,
        gamma_prime=p.gamma_prime,
        extra_ratios=extra,
    )


def realize_raw(
    C,
    rho,
    gamma0,
    Gamma_p,
    Gamma_p_prime,
    N,
    *,
    delta_tilde=0.0,
    Delta_c=0.0,
    tau=1.0,
    gamma_over_gamma0=GAMMA_OVER_GAMMA0,
    Delta_over_gamma=DELTA_OVER_GAMMA,
    null_cavity_field=True,
) -> SystemParams:
    """Concrete raw constants whose effective model has the requested rates.

    Gauge: ``gamma = gamma_prime = 1e6 gamma0`` and ``Delta = 100 gamma``
    unless overridden.  The Raman detunings are split so that the light shift
    is compensated and the effective two-photon detuning equals
    ``delta_tilde``.  The EIT mode sits in a bad cavity
    (``kappa' = 100 gamma'``) with a weak cooperativity of 1e-3 so that the
    atoms barely load it.

    With ``null_cavity_field`` the input amplitude ``A2_in`` is chosen so the
    mean intracavity Raman field of the effective model vanishes, which is
    the regime the zero-field analysis assumes.
    """
    _require_positive(C=C, rho=rho, gamma0=gamma0, N=N, tau=tau)
    _require_non_negative(Gamma_p=Gamma_p, Gamma_p_prime=Gamma_p_prime)
    gamma = gamma_over_gamma0 * gamma0
    gamma_prime = gamma
    Delta = Delta_over_gamma * gamma
    kappa = gamma0 / rho
    g = math.sqrt(2 * kappa * tau * gamma * C / N)
    Omega1 = abs(Delta) * math.sqrt(Gamma_p / gamma)
    light_shift = Omega1**2 / Delta
    delta = delta_tilde - light_shift

    kappa_prime = EIT_CAVITY_OVER_GAMMA * gamma_prime
    tau_prime = 1.0
    g_prime = math.sqrt(2 * kappa_prime * tau_prime * gamma_prime * EIT_COOPERATIVITY / N)
    Theta = math.sqrt(Gamma_p_prime * gamma_prime / 2) / g_prime

    A2_in = 0j
    if null_cavity_field and Gamma_p > 0:
        g_tilde = g * Omega1 / Delta
        s_plus = -N * Gamma_p_prime / 2 / (gamma0 + Gamma_p + Gamma_p_prime - 1j * delta_tilde)
        A2_in = -1j * g_tilde * s_plus / tau / math.sqrt(2 * kappa / tau)

    return SystemParams(
        N=N,
        gamma0=gamma0,
        gamma=gamma,
        gamma_prime=gamma_prime,
        kappa=kappa,
        kappa_prime=kappa_prime,
        g=g,
        g_prime=g_prime,
        Omega1=Omega1,
        Delta1=Delta + delta / 2,
        Delta2=Delta - delta / 2,
        Theta_drive=Theta,
        tau=tau,
        tau_prime=tau_prime,
        Delta_c=Delta_c,
        A2_in=A2_in,
    )

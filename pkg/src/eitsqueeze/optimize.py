"""
Pump-rate optimization, cooperativity scaling and field-amplitude scans.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .exceptions import NonStationaryError, ParameterError
from .noise import (
    dS_min_closed_form,
    solve_lyapunov,
    spin_variance_report,
    sy_variance_closed_form,
    variance_analytic,
    variance_pipeline,
)
from .effective_model import noise_model, steady_state_zero_field
from .params import ADIABATIC_THRESHOLD, GAMMA_OVER_GAMMA0, EffectiveParams

# Prefactor of the C^(-1/3) law, quoted for rho = 1/2000 only.
LAMBDA_RHO_2000 = 1.74


@dataclass(frozen=True)
class OptimumResult:
    Gamma_p_star: float
    Gamma_p_prime_star: float
    dS_min_star: float
    squeezing_db: float
    evaluations: int
    at_boundary: bool = False

    @property
    def squeezing(self) -> float:
        return 1.0 - self.dS_min_star


@dataclass(frozen=True)
class AsymptoticOptimum:
    Gamma_p_star: float
    Gamma_p_prime_star: float
    dS_min_star: float


@dataclass(frozen=True)
class ScalingStudy:
    C: np.ndarray
    dS_min_star: np.ndarray
    optima: list = field(repr=False)
    slope: float
    prefactor: float
    large_c_prefactor: float

    def rows(self):
        return list(zip(self.C.tolist(), self.dS_min_star.tolist()))


@dataclass(frozen=True)
class FieldScanPoint:
    amplitude: float
    dS_min: float
    stable: bool
    angle: float = math.nan


def optimize_pumps(
    C,
    rho,
    *,
    lower=1e-2,
    upper=1e3,
    grid=41,
    rtol=1e-6,
    gamma0=1.0,
    gamma=None,
    gamma_prime=None,
) -> OptimumResult:
    """Pump rates minimizing the zero-field squeezing figure.

    A ``grid x grid`` logarithmic scan of ``[lower, upper]^2`` seeds a
    bounded Nelder-Mead search in log-rates.  Each rate is also capped at a
    tenth of its optical decay rate so the adiabatic elimination stays
    justified.  ``at_boundary`` is set (and a warning issued) when the
    optimum sits on the search box.
    """
    if not C >= 1:
        raise ParameterError(f"C must be >= 1, got {C!r}")
    if not 0 < rho < 1:
        raise ParameterError(f"rho must lie in (0, 1), got {rho!r}")
    gamma = GAMMA_OVER_GAMMA0 * gamma0 if gamma is None else gamma
    gamma_prime = GAMMA_OVER_GAMMA0 * gamma0 if gamma_prime is None else gamma_prime
    hi_p = min(upper, ADIABATIC_THRESHOLD * gamma)
    hi_q = min(upper, ADIABATIC_THRESHOLD * gamma_prime)
    bounds = [(math.log(lower), math.log(hi_p)), (math.log(lower), math.log(hi_q))]

    xs = np.linspace(*bounds[0], grid)
    ys = np.linspace(*bounds[1], grid)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    F = dS_min_closed_form(C, rho, np.exp(X), np.exp(Y), gamma0)
    i, j = np.unravel_index(np.argmin(F), F.shape)

    def objective(v):
        return float(dS_min_closed_form(C, rho, math.exp(v[0]), math.exp(v[1]), gamma0))

    res = minimize(
        objective,
        [xs[i], ys[j]],
        method="Nelder-Mead",
        bounds=bounds,
        options={"xatol": 1e-9, "fatol": rtol * 1e-3 * float(F[i, j]), "maxiter": 20000},
    )
    x = res.x
    edge = 1e-6
    at_boundary = any(min(abs(v - lo), abs(v - hi)) < edge for v, (lo, hi) in zip(x, bounds))
    if at_boundary:
        warnings.warn("pump optimum lies on the search boundary", RuntimeWarning, stacklevel=2)
    ds = float(res.fun)
    return OptimumResult(
        Gamma_p_star=math.exp(x[0]),
        Gamma_p_prime_star=math.exp(x[1]),
        dS_min_star=ds,
        squeezing_db=-10 * math.log10(ds),
        evaluations=grid * grid + int(res.nfev),
        at_boundary=at_boundary,
    )


def asymptotic_pumps(C, rho, gamma0=1.0) -> AsymptoticOptimum:
    """Large-C, small-rho optimum.

    ``dS_min_star`` uses the prefactor measured at ``rho = 1/2000``; it is a
    reference value, not a law for other ``rho``.
    """
    if C < 10 or rho > 0.01:
        warnings.warn("asymptotic pump rates need C >> 1 and rho << 1", RuntimeWarning, stacklevel=2)
    k = math.sqrt(1.5) * gamma0
    return AsymptoticOptimum(
        Gamma_p_star=k / math.sqrt(rho * C),
        Gamma_p_prime_star=k / math.sqrt(rho * C ** (1 / 3)),
        dS_min_star=LAMBDA_RHO_2000 / C ** (1 / 3),
    )


def scaling_study(C_values, rho, **kwargs) -> ScalingStudy:
    """Optimize at each cooperativity and fit ``log dS* = log(lambda) + s log C``.

    ``large_c_prefactor`` is the mean of ``dS* C^(1/3)`` over the upper half
    of the ``C`` values, the quantity a fixed ``-1/3`` law would keep constant.
    """
    Cs = np.sort(np.asarray(C_values, dtype=float))
    if Cs.size < 2 or Cs[-1] / Cs[0] < 100:
        raise ParameterError("C values must span at least two decades")
    optima = [optimize_pumps(c, rho, **kwargs) for c in Cs]
    ds = np.array([o.dS_min_star for o in optima])
    slope, intercept = np.polyfit(np.log10(Cs), np.log10(ds), 1)
    upper = Cs >= np.median(Cs)
    lam = ds * Cs ** (1 / 3)
    return ScalingStudy(
        C=Cs,
        dS_min_star=ds,
        optima=optima,
        slope=float(slope),
        prefactor=float(10**intercept),
        large_c_prefactor=float(lam[upper].mean()),
    )


def _field_for_amplitude(ep, amplitude):
    if ep.g_tilde == 0:
        raise ParameterError("field amplitude scan needs a non-zero Raman coupling")
    return complex(amplitude * ep.gamma0 / ep.g_tilde)


def field_scan(ep: EffectiveParams, amplitudes, *, frozen=False) -> list[FieldScanPoint]:
    """Squeezing figure versus ``|g_tilde <A2>|`` (in ``gamma0`` units).

    The mean field is taken real and positive.  Points where the linearized
    system is unstable are kept with ``stable=False`` and a NaN figure.
    """
    out = []
    for a in amplitudes:
        if a < 0:
            raise ParameterError("field amplitudes must be non-negative")
        try:
            rep, _, _ = variance_pipeline(ep, _field_for_amplitude(ep, a), frozen=frozen)
        except NonStationaryError:
            out.append(FieldScanPoint(float(a), math.nan, False))
            continue
        out.append(FieldScanPoint(float(a), rep.dS_min, True, rep.angle))
    return out


def _zero_field_variances(ep):
    var_y = float(sy_variance_closed_form(ep.C, ep.rho, ep.Gamma_p, ep.Gamma_p_prime, ep.N, ep.gamma0))
    model = noise_model(ep, steady_state_zero_field(ep))
    cov = solve_lyapunov(model.B, model.D)
    var_z = float(cov.spin_covariance[2, 2])
    return var_y, var_z


def field_limit_condition(ep: EffectiveParams, amplitude) -> float:
    """Ratio ``4 a^2 <dSz^2> / (gamma_+^2 <dSy^2>)``; 1 at the field limit."""
    var_y, var_z = _zero_field_variances(ep)
    return 4 * amplitude**2 * var_z / (ep.gamma_plus**2 * var_y)


def field_limit(ep: EffectiveParams) -> float:
    """Amplitude ``|g_tilde <A2>|`` at which the Sz leakage matches the Sy noise.

    ``<dSy^2>`` comes from the closed form and ``<dSz^2>`` from the zero-field
    Lyapunov covariance.
    """
    var_y, var_z = _zero_field_variances(ep)
    if var_z <= 0:
        raise ParameterError("Sz variance vanishes; field limit undefined")
    return ep.gamma_plus * math.sqrt(var_y / var_z) / 2 / ep.gamma0


def zero_field_report(ep: EffectiveParams):
    """Closed-form report, a shortcut for scans that stay on resonance."""
    return variance_analytic(ep)


def matrix_report(ep: EffectiveParams):
    ss = steady_state_zero_field(ep)
    model = noise_model(ep, ss)
    return spin_variance_report(solve_lyapunov(model.B, model.D), ss, ep.N)

"""
Stationary covariances, spin-squeezing figures and noise spectra.

Matrix route: ``B G + G B^dag = D`` solved for ``G`` by vectorization, then
rotated to the Hermitian spin components.  Closed-form route: the Sy
variance, mean spin and Sy spectrum of the resonant zero-field regime.  The
two routes are independent and are checked against each other in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad_vec

from .effective_model import ADJOINT, NoiseModel, SteadyState, noise_model, steady_state_with_field
from .exceptions import NonStationaryError, ParameterError, UndefinedSpinError
from .params import EffectiveParams

CONDITION_LIMIT = 1e12

# Rows: Sx = (S+ + S-)/2, Sy = (S+ - S-)/2i, Sz.
SPIN_ROTATION = np.array(
    [
        [0.5, 0.5, 0.0],
        [-0.5j, 0.5j, 0.0],
        [0.0, 0.0, 1.0],
    ]
)


@dataclass(frozen=True)
class Covariance:
    """Zero-time correlation matrix ``G0[i, j] = <dxi_i dxi_j^dag>``."""

    G0: np.ndarray
    residual: float
    condition: float
    warning: str | None = None

    @property
    def products(self) -> np.ndarray:
        """Plain second moments ``<dxi_i dxi_j>``, i.e. ``G0`` with columns adjoint-permuted."""
        return self.G0[:, ADJOINT]

    @property
    def spin_covariance(self) -> np.ndarray:
        """Symmetrized real covariance of ``(dSx, dSy, dSz)``."""
        M = self.products[2:, 2:]
        return (SPIN_ROTATION @ M @ SPIN_ROTATION.T).real


@dataclass(frozen=True)
class VarianceReport:
    var_min: float
    spin_half: float
    dS_min: float
    angle: float
    squeezing_db: float
    spin_cov: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def squeezing(self) -> float:
        """Fractional noise reduction ``1 - dS_min``."""
        return 1.0 - self.dS_min

    @property
    def var_sy(self) -> float:
        if self.spin_cov is None:
            return self.var_min
        return float(self.spin_cov[1, 1])


@dataclass(frozen=True)
class SpectrumPoint:
    omega_bar: float
    S_f: float
    S_at: float

    @property
    def total(self) -> float:
        return self.S_f + self.S_at


def _to_db(ratio):
    return -10.0 * math.log10(ratio)


def solve_lyapunov(B, D) -> Covariance:
    """Unique solution of ``B G + G B^dag = D`` for a stable ``B``.

    Column-stacking turns the equation into
    ``(I kron B + conj(B) kron I) vec(G) = vec(D)``, a dense system solved by
    LU with partial pivoting.  A condition number above 1e12 is reported in
    ``warning`` rather than raised.
    """
    B = np.asarray(B, dtype=complex)
    D = np.asarray(D, dtype=complex)
    n = B.shape[0]
    eig = np.linalg.eigvals(B)
    if np.any(eig.real <= 0):
        raise NonStationaryError(
            f"non-stationary system: drift eigenvalue with real part {eig.real.min():.3g}"
        )
    eye = np.eye(n)
    K = np.kron(eye, B) + np.kron(B.conj(), eye)
    G = np.linalg.solve(K, D.reshape(-1, order="F")).reshape(n, n, order="F")
    cond = float(np.linalg.cond(K))
    warning = None
    if cond > CONDITION_LIMIT:
        warning = f"ill-conditioned Lyapunov system (condition {cond:.2e})"
    scale = np.linalg.norm(D)
    resid = np.linalg.norm(B @ G + G @ B.conj().T - D)
    return Covariance(G0=G, residual=float(resid / scale) if scale else float(resid), condition=cond, warning=warning)


def _orthogonal_frame(n):
    """Unit vectors spanning the plane orthogonal to ``n``; the first is the
    projection of y onto the plane (x when ``n`` is along y)."""
    ref = np.array([0.0, 1.0, 0.0])
    e1 = ref - n.dot(ref) * n
    if np.linalg.norm(e1) < 1e-9:
        ref = np.array([1.0, 0.0, 0.0])
        e1 = ref - n.dot(ref) * n
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(n, e1)


def spin_variance_report(cov: Covariance, ss: SteadyState, N=None) -> VarianceReport:
    """Minimal variance orthogonal to the mean spin and the squeezing figure.

    ``angle`` is measured in the orthogonal plane from the projected y axis
    (0 means the squeezed component is ``Sy``) and folded into (-pi/2, pi/2].
    """
    V = cov.spin_covariance
    s = ss.mean_spin
    length = np.linalg.norm(s)
    if length == 0:
        raise UndefinedSpinError("mean spin vanishes; squeezing criterion undefined")
    e1, e2 = _orthogonal_frame(s / length)
    E = np.array([e1, e2])
    W = E @ V @ E.T
    vals, vecs = np.linalg.eigh(W)
    var_min = float(vals[0])
    v = vecs[:, 0]
    angle = math.atan2(v[1], v[0])
    if angle <= -math.pi / 2:
        angle += math.pi
    elif angle > math.pi / 2:
        angle -= math.pi
    spin_half = length / 2
    ds = var_min / spin_half
    return VarianceReport(
        var_min=var_min,
        spin_half=float(spin_half),
        dS_min=float(ds),
        angle=angle,
        squeezing_db=_to_db(ds) if ds > 0 else math.inf,
        spin_cov=V,
    )


def sy_variance_closed_form(C, rho, Gamma_p, Gamma_p_prime, N=1.0, gamma0=1.0):
    """Resonant zero-field ``<dSy^2>``; accepts numpy arrays."""
    g0t = gamma0 + Gamma_p + Gamma_p_prime
    rho_t = rho * g0t / gamma0
    reduction = (2 * C / (1 + rho_t)) * Gamma_p**2 * (gamma0 + Gamma_p_prime) / (g0t * (g0t**2 + 2 * C * Gamma_p**2))
    return N / 4 * (1 - reduction)


def spin_half_closed_form(Gamma_p, Gamma_p_prime, N=1.0, gamma0=1.0):
    g0t = gamma0 + Gamma_p + Gamma_p_prime
    return N * np.hypot(Gamma_p, Gamma_p_prime) / (4 * g0t)


def dS_min_closed_form(C, rho, Gamma_p, Gamma_p_prime, gamma0=1.0):
    """Squeezing figure of the resonant zero-field regime (independent of N)."""
    return sy_variance_closed_form(C, rho, Gamma_p, Gamma_p_prime, 1.0, gamma0) / spin_half_closed_form(
        Gamma_p, Gamma_p_prime, 1.0, gamma0
    )


def _require_resonant(ep):
    # Detunings enter the squeezing figure quadratically, so this residue
    # (from Delta1 - Delta2 rounding in raw parameter sets) is harmless.
    tol = 1e-6 * ep.gamma0_tilde
    if abs(ep.delta_tilde) > tol or abs(ep.Delta_c) > tol:
        raise ParameterError("closed forms require delta_tilde = Delta_c = 0")


def variance_analytic(ep: EffectiveParams) -> VarianceReport:
    """Closed-form squeezing figure on resonance with ``<A2> = 0``."""
    _require_resonant(ep)
    var = float(sy_variance_closed_form(ep.C, ep.rho, ep.Gamma_p, ep.Gamma_p_prime, ep.N, ep.gamma0))
    half = float(spin_half_closed_form(ep.Gamma_p, ep.Gamma_p_prime, ep.N, ep.gamma0))
    if half == 0:
        raise UndefinedSpinError("mean spin vanishes; squeezing criterion undefined")
    ds = var / half
    return VarianceReport(var_min=var, spin_half=half, dS_min=ds, angle=0.0, squeezing_db=_to_db(ds))


def variance_pipeline(ep: EffectiveParams, A2_mean=0j, *, frozen=False):
    """Matrix route: steady state, ``B``, ``D``, Lyapunov, minimal variance.

    Returns ``(report, covariance, model)``.
    """
    ss = steady_state_with_field(ep, A2_mean)
    model = noise_model(ep, ss, frozen=frozen)
    cov = solve_lyapunov(model.B, model.D)
    return spin_variance_report(cov, ss, ep.N), cov, model


def _denominator(ep, omega_bar):
    w = np.asarray(omega_bar, dtype=float)
    return (1 - 1j * w) * (ep.rho_tilde - 1j * w) + 2 * ep.rho * ep.C * ep.Gamma_p**2 / (ep.gamma0 * ep.gamma0_tilde)


def spectrum_analytic(ep: EffectiveParams, omega_bars) -> list[SpectrumPoint]:
    """Sy noise spectrum split into input-field and atomic contributions.

    Densities are per unit ``omega_bar = omega / kappa`` and scaled so that
    ``(1/2pi) * integral(S_f + S_at, d omega_bar) = <dSy^2> / gamma0``; in
    ``gamma0 = 1`` units this is the Sy variance itself.
    """
    _require_resonant(ep)
    w = np.atleast_1d(np.asarray(omega_bars, dtype=float))
    den = np.abs(_denominator(ep, w)) ** 2
    g0, g0t = ep.gamma0, ep.gamma0_tilde
    s_f = ep.N * ep.rho * ep.C * ep.Gamma_p**3 / (g0 * g0t**2) / den
    s_at = ep.N * ep.rho * g0t / (2 * g0) * (1 + w**2) / den
    return [SpectrumPoint(float(a), float(b), float(c)) for a, b, c in zip(w, s_f, s_at)]


def spectrum_matrix(B, D, omegas) -> np.ndarray:
    """``S(w) = (B - i w)^-1 D (B^dag + i w)^-1`` for each angular frequency.

    Returns an array of shape ``(len(omegas), n, n)``; integrating over ``w``
    with weight ``1/2pi`` gives back the Lyapunov covariance.
    """
    B = np.asarray(B, dtype=complex)
    D = np.asarray(D, dtype=complex)
    if np.any(np.linalg.eigvals(B).real <= 0):
        raise NonStationaryError("non-stationary system: resolvent is singular")
    eye = np.eye(B.shape[0])
    out = []
    for w in np.atleast_1d(omegas):
        R = np.linalg.inv(B - 1j * w * eye)
        out.append(R @ D @ R.conj().T)
    return np.array(out)


def spin_spectrum(model: NoiseModel, omega_bars, direction=(0.0, 1.0, 0.0), gamma0=1.0) -> np.ndarray:
    """Symmetrized spectrum of one spin component from the matrix route.

    Normalized like :func:`spectrum_analytic` (per unit ``omega_bar``,
    divided by ``gamma0``) so the two can be compared point by point.
    """
    e = np.asarray(direction, dtype=float)
    proj = e @ SPIN_ROTATION
    w = np.atleast_1d(np.asarray(omega_bars, dtype=float)) * model.kappa
    plus = spectrum_matrix(model.B, model.D, w)[:, :, ADJOINT][:, 2:, 2:]
    minus = spectrum_matrix(model.B, model.D, -w)[:, :, ADJOINT][:, 2:, 2:]
    s = np.einsum("i,kij,j->k", proj, plus + minus, proj).real / 2
    return s * model.kappa / gamma0


def integrate_spectrum(B, D, *, epsrel=1e-10) -> np.ndarray:
    """``(1/2pi) * integral S(w) dw`` over the real line, element-wise.

    Adaptive quadrature on ``|w| <= W`` with ``W`` a thousand times the
    largest drift rate; the remainder uses the ``D / w^2`` asymptote.
    """
    B = np.asarray(B, dtype=complex)
    D = np.asarray(D, dtype=complex)
    rates = np.abs(np.linalg.eigvals(B))
    cutoff = 1e3 * rates.max()
    eye = np.eye(B.shape[0])

    def integrand(w):
        R = np.linalg.inv(B - 1j * w * eye)
        return R @ D @ R.conj().T

    points = sorted({float(r) for r in rates} | {float(-r) for r in rates})
    body, _ = quad_vec(integrand, -cutoff, cutoff, epsrel=epsrel, points=points, limit=2000)
    tail = D / (np.pi * cutoff)
    return (body / (2 * np.pi)) + tail


def gamma_plus(ep: EffectiveParams) -> float:
    """Half width of the Sy spectrum in the bad-cavity limit."""
    return ep.gamma_plus

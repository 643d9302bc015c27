"""Self-consistent steady state of the Bloch-mode rate equations.

Per mode the photon balance reads

    0 = -gamma_a n_k + F_k n_k (2 n_sigma - 1) + F_k n_sigma

and the emitters obey

    0 = P - (P + gamma_sigma + F) n_sigma - (2 n_sigma - 1) F_tilde

with ``F`` and ``F_tilde`` the lattice averages of ``F_k`` and ``F_k n_k``.
Solving the first equation for ``n_k`` leaves a scalar equation in
``n_sigma`` that is bracketed on ``[0, n_max]`` and bisected.
"""

from dataclasses import dataclass
import math

import numpy as np

from .exceptions import NoBracketError, NonPhysicalError, ParameterError
from .model import LatticeSpec, build_spectrum

__all__ = ["SteadyState", "SingleSiteClosedForm", "LasingBenchmarks",
           "mode_population", "mode_population_direct", "emitter_residual",
           "solve", "polarization", "closed_form_single_site",
           "lasing_benchmarks"]


@dataclass(frozen=True)
class SteadyState:
    """Solution of the rate equations on a lattice.

    ``n_k`` is aligned with ``spectrum.k``. ``delta_sq`` is the squared
    Lorentzian width of ``n_k`` in detuning space; it can be negative for
    far-detuned, strongly pumped states where no mode sits near resonance,
    while every mode population stays finite and positive.
    """

    spectrum: object
    n_sigma: float
    n_k: np.ndarray
    n_a: float
    F: float
    F_tilde: float
    delta_sq: float
    residual: float

    @property
    def params(self):
        return self.spectrum.params

    @property
    def lattice(self):
        return self.spectrum.lattice

    @property
    def delta(self):
        """Lorentzian width, ``nan`` when ``delta_sq <= 0``."""
        return math.sqrt(self.delta_sq) if self.delta_sq > 0 else math.nan

    @property
    def validated_regime(self):
        """Whether the pump lies above the quantum regime (P > gamma_a, gamma_sigma)."""
        p = self.params
        return p.P_sigma > p.gamma_a and p.P_sigma > p.gamma_sigma


@dataclass(frozen=True)
class SingleSiteClosedForm:
    zeta_sigma: float
    chi_sq: float
    n_a: float
    n_sigma: float


@dataclass(frozen=True)
class LasingBenchmarks:
    n_a_L: float
    n_sigma_L: float
    kappa_sigma: float
    Delta_max: float
    has_window: bool


def _require_cavity_decay(params):
    if not params.gamma_a > 0:
        raise ParameterError("gamma_a must be > 0 for a steady state")


def delta_squared(n_sigma, params):
    """Squared width ``kappa Gamma [Gamma/kappa - (2 n_sigma - 1)]``."""
    Gamma = params.Gamma
    return Gamma**2 - params.kappa_sigma * Gamma * (2 * n_sigma - 1)


def mode_population(n_sigma, Delta_k, params):
    """Lorentzian photon population of modes with detuning ``Delta_k``.

    Raises
    ------
    NonPhysicalError
        If gain reaches loss for any of the modes.
    """
    _require_cavity_decay(params)
    Delta_k = np.asarray(Delta_k, dtype=float)
    denom = delta_squared(n_sigma, params) / 4 + Delta_k**2
    if np.any(denom <= 0):
        raise NonPhysicalError(
            f"gain exceeds loss at n_sigma={n_sigma!r}: no steady state")
    return params.kappa_sigma * params.Gamma / 4 * n_sigma / denom


def mode_population_direct(n_sigma, F_k, gamma_a):
    """Algebraic solution of the per-mode photon balance."""
    F_k = np.asarray(F_k, dtype=float)
    denom = gamma_a - F_k * (2 * n_sigma - 1)
    if np.any(denom <= 0):
        raise NonPhysicalError(
            f"gain exceeds loss at n_sigma={n_sigma!r}: no steady state")
    return F_k * n_sigma / denom


def emitter_residual(n_sigma, spectrum):
    """Residual of the emitter balance with ``n_k`` eliminated.

    Returns ``-inf`` once any mode is past its gain-clamping point, which is
    the limit approached from below.
    """
    p = spectrum.params
    s = 2 * n_sigma - 1
    denom = p.gamma_a - spectrum.F_k * s
    if np.any(denom <= 0):
        return -math.inf
    n_k = spectrum.F_k * n_sigma / denom
    F = spectrum.F_k.mean()
    F_tilde = np.mean(spectrum.F_k * n_k)
    return p.P_sigma - (p.P_sigma + p.gamma_sigma + F) * n_sigma - s * F_tilde


def _bisect(func, lo, hi, xtol):
    f_lo, f_hi = func(lo), func(hi)
    if f_lo == 0:
        return lo, f_lo
    if f_hi == 0:
        return hi, f_hi
    if not (f_lo > 0 > f_hi):
        raise NoBracketError(f"no sign change on [{lo}, {hi}]: R={f_lo}, {f_hi}")
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        f_mid = func(mid)
        if f_mid == 0:
            return mid, f_mid
        if f_mid > 0:
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
    if abs(f_lo) <= abs(f_hi):
        return lo, f_lo
    return hi, f_hi


def solve(params, lattice=None, xtol=0.0):
    """Solve the rate equations for the steady state.

    Parameters
    ----------
    params : ModelParams
    lattice : LatticeSpec, optional
        Defaults to a single site.
    xtol : float
        Bisection stops once the bracket on ``n_sigma`` is narrower than
        this. The default of zero bisects to floating-point resolution.

    Returns
    -------
    SteadyState
    """
    _require_cavity_decay(params)
    lattice = lattice or LatticeSpec()
    spectrum = build_spectrum(params, lattice)
    F_k = spectrum.F_k

    if params.P_sigma == 0:
        zeros = np.zeros_like(F_k)
        return SteadyState(spectrum, 0.0, zeros, 0.0, float(F_k.mean()), 0.0,
                           float(delta_squared(0.0, params)), 0.0)

    # the largest Purcell rate sets the gain-clamping pole in n_sigma
    pole = 0.5 * (1 + params.gamma_a / F_k.max())
    hi = min(1.0, pole)
    n_sigma, res = _bisect(lambda x: emitter_residual(x, spectrum), 0.0, hi, xtol)

    n_k = mode_population_direct(n_sigma, F_k, params.gamma_a)
    return SteadyState(
        spectrum=spectrum,
        n_sigma=float(n_sigma),
        n_k=n_k,
        n_a=float(n_k.mean()),
        F=float(F_k.mean()),
        F_tilde=float(np.mean(F_k * n_k)),
        delta_sq=float(delta_squared(n_sigma, params)),
        residual=float(abs(res)),
    )


def polarization(k_index, r, steady):
    """Photon-assisted polarization <p_k^dagger sigma_r> of a solved state."""
    spec = steady.spectrum
    p = steady.params
    k = spec.k[k_index]
    r = np.atleast_1d(np.asarray(r, dtype=float))
    G = p.g * spec.lattice.n_sites ** -0.5 * np.exp(-1j * np.dot(k, r))
    n_k = steady.n_k[k_index]
    n_s = steady.n_sigma
    return 1j * G * (n_s - n_k + 2 * n_k * n_s) / (p.Gamma / 2 + 1j * spec.Delta_k[k_index])


def closed_form_single_site(params):
    """Analytic steady state of the one-emitter laser (single site)."""
    _require_cavity_decay(params)
    F = float(build_spectrum(params, LatticeSpec(1, 1)).F_k[0])
    P, ga = params.P_sigma, params.gamma_a
    zeta = P + params.gamma_sigma
    disc = (F * (2 * P + zeta + ga) + ga * zeta) ** 2 - 8 * F * P * zeta * (F + ga)
    if disc < 0:
        raise NonPhysicalError(f"negative discriminant {disc!r}")
    chi_sq = math.sqrt(disc)
    n_a = (F * (2 * P - zeta - ga) - ga * zeta + chi_sq) / (4 * F * ga)
    n_sigma = (P - ga * n_a) / zeta if zeta > 0 else 0.0
    return SingleSiteClosedForm(zeta_sigma=zeta, chi_sq=chi_sq, n_a=n_a, n_sigma=n_sigma)


def lasing_benchmarks(params):
    """Ideal lasing populations and the half-width of the lasing window in detuning.

    ``Delta_max`` is ``nan`` and ``has_window`` False when the pump exceeds
    the Purcell rate ``kappa_sigma``.
    """
    _require_cavity_decay(params)
    P = params.P_sigma
    kappa = params.kappa_sigma
    arg = P * (kappa - P)
    has_window = arg >= 0
    return LasingBenchmarks(
        n_a_L=P / (2 * params.gamma_a),
        n_sigma_L=0.5,
        kappa_sigma=kappa,
        Delta_max=0.5 * math.sqrt(arg) if has_window else math.nan,
        has_window=bool(has_window),
    )

"""First-order spatial coherence, damped-oscillation fits and decay constants.

The normalized coherence between cavities a displacement ``r`` apart is the
lattice Fourier transform of the Bloch-mode populations,

    C(r) = (n_a N^m)^-1 sum_k exp(-i k.r) n_k.
"""

from dataclasses import dataclass
import cmath
import math

import numpy as np
from scipy.optimize import least_squares

from .exceptions import (DegenerateNormalizationError, FitError,
                         ParameterError)
from .model import axis_momenta
from .steady import delta_squared

__all__ = ["CorrelationProfile", "FitResult", "AnalyticDecay",
           "RegimeEstimates", "FastDecayReport", "correlation_profile",
           "fit_decay", "analytic_decay_1d", "bulk_decay_estimate",
           "edge_decay_estimate", "regime_estimates", "fast_decay_check",
           "damped_oscillation"]

DIRECT_MAX_N = 256
ZERO_LEVEL = 1e-8


@dataclass(frozen=True)
class CorrelationProfile:
    """``C(r)`` on the displacement grid ``-N//2 <= r_alpha <= N//2``.

    ``values`` has one axis per lattice dimension, indexed like ``r``.
    For even ``N`` the two end points of each axis label the same site.
    """

    r: np.ndarray
    values: np.ndarray
    n_a: float
    N: int
    m: int
    imag_residue: float
    steady: object = None

    def at(self, *r):
        """``C`` at the integer displacement ``r`` (periodic)."""
        idx = tuple(_wrap(int(ri), self.N) + self.N // 2 for ri in r)
        return self.values[idx]

    def positive_axis(self):
        """``(x, C(x))`` for ``0 <= x <= N//2`` of a 1D profile."""
        if self.m != 1:
            raise ParameterError("positive_axis is defined for 1D profiles")
        half = self.N // 2
        return self.r[half:].copy(), self.values[half:].copy()

    def site_values(self):
        """Values on the ``N**m`` distinct sites, indexed by ``r mod N``."""
        out = np.empty((self.N,) * self.m)
        for idx in np.ndindex(*out.shape):
            out[idx] = self.at(*idx)
        return out


def _wrap(r, N):
    # representative of r mod N in [-N//2, N//2], preferring the positive end
    w = (r + N // 2) % N - N // 2
    if N % 2 == 0 and w == -N // 2:
        w = N // 2
    return w


def _profile_direct(n_grid, axis_k, r):
    phase = np.exp(-1j * np.outer(r, axis_k))
    out = n_grid.astype(complex)
    for axis in range(n_grid.ndim):
        out = np.moveaxis(np.tensordot(phase, out, axes=([1], [axis])), 0, axis)
    return out


def _profile_fft(n_grid, axis_k, r):
    N = len(axis_k)
    j = np.rint(axis_k * N / (2 * np.pi)).astype(int) % N
    ordered = np.empty_like(n_grid)
    ordered[np.ix_(*([j] * n_grid.ndim))] = n_grid
    full = np.fft.fftn(ordered)
    rmod = np.asarray(r) % N
    return full[np.ix_(*([rmod] * n_grid.ndim))]


def correlation_profile(steady, method="auto"):
    """Normalized coherence ``C(r)`` of a solved steady state.

    Parameters
    ----------
    steady : SteadyState
    method : {"auto", "direct", "fft"}
        ``auto`` uses the direct sum up to ``N = 256`` and the FFT above.

    Raises
    ------
    DegenerateNormalizationError
        If the state has no photons.
    """
    if not steady.n_a > 0:
        raise DegenerateNormalizationError("C(r) is undefined for n_a = 0")
    lattice = steady.lattice
    N, m = lattice.N, lattice.m
    if method == "auto":
        method = "direct" if N <= DIRECT_MAX_N else "fft"
    if method not in ("direct", "fft"):
        raise ValueError(f"unknown method {method!r}")

    spec = steady.spectrum
    # symmetrize so that the transform of an even function is real
    n_k = 0.5 * (steady.n_k + steady.n_k[spec.mirror_index()])
    n_grid = n_k.reshape((N,) * m)
    axis_k = axis_momenta(N)
    r = np.arange(-(N // 2), N // 2 + 1)

    raw = (_profile_direct if method == "direct" else _profile_fft)(n_grid, axis_k, r)
    raw = raw / (steady.n_a * N**m)
    values = raw.real.copy()
    values[(N // 2,) * m] = 1.0
    return CorrelationProfile(r=r, values=values, n_a=steady.n_a, N=N, m=m,
                              imag_residue=float(np.abs(raw.imag).max()),
                              steady=steady)


def damped_oscillation(x, c1, c2, nu, lam):
    """``[c1 cos(nu x) + c2 sin(nu x)] exp(-lam x)``."""
    return (c1 * np.cos(nu * x) + c2 * np.sin(nu * x)) * np.exp(-lam * x)


@dataclass(frozen=True)
class FitResult:
    c1: float
    c2: float
    nu: float
    lam: float
    rms_residual: float
    fit_window: tuple
    fragile: bool
    nfev: int


def _envelope_seed(x, y):
    a = np.abs(y)
    peaks = [i for i in range(len(a))
             if a[i] > ZERO_LEVEL
             and (i == 0 or a[i] >= a[i - 1])
             and (i == len(a) - 1 or a[i] >= a[i + 1])]
    if len(peaks) < 2:
        peaks = [i for i in range(len(a)) if a[i] > ZERO_LEVEL]
    if len(peaks) < 2:
        return 1.0
    slope = np.polyfit(x[peaks], np.log(a[peaks]), 1)[0]
    return max(-slope, 0.0)


def _linear_amplitudes(x, y, nu, lam):
    basis = np.stack([np.cos(nu * x), np.sin(nu * x)], axis=1) * np.exp(-lam * x)[:, None]
    coef, *_ = np.linalg.lstsq(basis, y, rcond=None)
    return coef


def fit_decay(profile, nu_seed=None):
    """Least-squares fit of a damped oscillation to a 1D profile.

    The fit runs over ``1 <= x <= w`` where ``w`` is the last distance with
    ``|C(x)| > 1e-8``, capped at ``N//2 - 1``. The wave number is seeded from
    the analytic decay constants when the profile carries a steady state with
    ``J > 0`` (else from the most populated Bloch mode, or ``nu_seed``) and
    the decay rate from the envelope of ``|C|`` at its local maxima.

    Raises
    ------
    FitError
        If the optimizer reports failure.
    """
    if profile.m != 1:
        raise ParameterError("fits are only defined for 1D profiles")
    if profile.N < 16:
        raise ParameterError(f"fit requires N >= 16, got {profile.N}")
    x_all, c_all = profile.positive_axis()
    cap = profile.N // 2 - 1
    above = np.nonzero(np.abs(c_all[1:cap + 1]) > ZERO_LEVEL)[0]
    w = int(above.max()) + 1 if len(above) else 1
    fragile = w <= 3
    w = max(w, 4)
    x, y = x_all[1:w + 1].astype(float), c_all[1:w + 1]

    if nu_seed is None:
        nu_seed = _nu_seed(profile)
    lam_seed = _envelope_seed(x, y)
    c1, c2 = _linear_amplitudes(x, y, nu_seed, lam_seed)

    result = least_squares(
        lambda th: damped_oscillation(x, *th) - y,
        x0=[c1, c2, nu_seed, lam_seed],
        bounds=([-np.inf, -np.inf, 0.0, 0.0], [np.inf, np.inf, np.pi, np.inf]),
        x_scale="jac", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=5000,
    )
    if not result.success:
        raise FitError(f"fit failed (status {result.status}): {result.message}; "
                       f"window 1..{w}, cost {result.cost:.3e}")
    c1, c2, nu, lam = (float(v) for v in result.x)
    return FitResult(c1=c1, c2=c2, nu=nu, lam=lam,
                     rms_residual=float(np.sqrt(np.mean(result.fun**2))),
                     fit_window=(1, w), fragile=fragile, nfev=int(result.nfev))


def _nu_seed(profile):
    steady = profile.steady
    if steady is None:
        return np.pi / 2
    p = steady.params
    if p.J > 0 and steady.delta_sq > 0:
        return abs(analytic_decay_1d(p, steady.n_sigma).q)
    spec = steady.spectrum
    return float(abs(spec.k[np.argmax(steady.n_k), 0]))


@dataclass(frozen=True)
class AnalyticDecay:
    """Roots of ``z**2 - u z + 1`` with ``|zeta1| <= 1 <= |zeta2|``."""

    u: complex
    zeta1: complex
    zeta2: complex
    lam: float
    q: float
    critical: bool


def analytic_decay_1d(params, n_sigma, critical_tol=1e-9):
    """Infinite-chain decay rate and oscillation momentum of ``C(x)``.

    ``critical`` is set when the decay rate vanishes to within
    ``critical_tol`` while the emitter lies inside the band.
    """
    if not params.J > 0:
        raise ParameterError("analytic decay requires J > 0")
    d2 = delta_squared(n_sigma, params)
    if not d2 > 0:
        raise ParameterError(f"analytic decay requires delta^2 > 0, got {d2!r}")
    u = complex(params.delta, math.sqrt(d2) / 2) / params.J
    root = cmath.sqrt(u * u - 4)
    a, b = (u + root) / 2, (u - root) / 2
    zeta2, zeta1 = (a, b) if abs(a) >= abs(b) else (b, a)
    lam = math.log(abs(zeta2))
    q = -cmath.phase(zeta1)
    critical = lam < critical_tol and abs(params.delta) <= 2 * params.J
    return AnalyticDecay(u=u, zeta1=zeta1, zeta2=zeta2, lam=lam, q=q, critical=critical)


def _decay_bracket(params, n_sigma):
    g2, Gamma, ga = params.g**2, params.Gamma, params.gamma_a
    return g2 * Gamma / ga * (ga * Gamma / (4 * g2) - (2 * n_sigma - 1))


def bulk_decay_estimate(params, n_sigma):
    """Small-decay estimate ``(delta/2) / sqrt(4 J^2 - Delta^2)`` inside the band."""
    span = 4 * params.J**2 - params.delta**2
    if not span > 0:
        raise ParameterError("bulk estimate requires |Delta| < 2J")
    return math.sqrt(_decay_bracket(params, n_sigma) / span)


def edge_decay_estimate(params, n_sigma):
    """Decay rate with the emitter at the band edge, ``(delta / 4J)**(1/2)``."""
    if not params.J > 0:
        raise ParameterError("edge estimate requires J > 0")
    return (_decay_bracket(params, n_sigma) / (4 * params.J**2)) ** 0.25


@dataclass(frozen=True)
class RegimeEstimates:
    lambda_bulk: float
    lambda_edge: float


def regime_estimates(params, n_sigma):
    """Both large-J estimates; ``lambda_bulk`` is ``nan`` outside the band."""
    try:
        bulk = bulk_decay_estimate(params, n_sigma)
    except ParameterError:
        bulk = math.nan
    return RegimeEstimates(lambda_bulk=bulk, lambda_edge=edge_decay_estimate(params, n_sigma))


@dataclass(frozen=True)
class FastDecayReport:
    """Outer-half share of the moment sums ``sum_r |r|^(2n) |C(r)|^2``.

    ``tail_ratios[n-1]`` is the fraction of the n-th moment sum contributed by
    shells with ``|r| > R/2`` (``R`` the largest shell radius). Values near
    zero mean the sum has converged inside the lattice; values near one mean
    the weight keeps growing out to the lattice boundary.
    """

    orders: tuple
    sums: tuple
    tail_ratios: tuple
    flagged: tuple
    threshold: float

    @property
    def passed(self):
        return not any(self.flagged)


def fast_decay_check(profile, n_max=4, threshold=0.5):
    """Check that the moment sums of ``|C(r)|^2`` converge on the lattice."""
    if profile.m > 2:
        raise ParameterError("fast-decay check is defined for 1D and 2D profiles")
    vals = profile.site_values()
    N = profile.N
    axes = [np.array([_wrap(i, N) for i in range(N)])] * profile.m
    grids = np.meshgrid(*axes, indexing="ij")
    radius = np.sqrt(sum(g.astype(float) ** 2 for g in grids))
    weight = np.abs(vals) ** 2
    R = radius.max()
    outer = radius > R / 2
    orders, sums, ratios, flags = [], [], [], []
    for n in range(1, n_max + 1):
        terms = radius ** (2 * n) * weight
        total = float(terms.sum())
        tail = float(terms[outer].sum())
        ratio = tail / total if total > 0 else 0.0
        orders.append(n)
        sums.append(total)
        ratios.append(ratio)
        flags.append(ratio > threshold)
    return FastDecayReport(tuple(orders), tuple(sums), tuple(ratios), tuple(flags), threshold)

"""Emitter emission spectrum under a semiclassical multimode drive.

The cavity field seen by an emitter is replaced by the classical drive
``Omega(t) = sum_k g sqrt(n_k / N) exp(-i omega_k t)``. A second two-level
system (the detector, frequency ``omega``, linewidth ``Gamma_d``) is coupled
to the emitter with strength ``epsilon``; its time-averaged population traces
out the emission spectrum as ``omega`` is scanned.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import null_space
from scipy.signal import find_peaks

__all__ = ["DriveField", "SpectrumResult", "multimode_drive",
           "detector_spectrum", "detector_population", "sideband_positions",
           "spectral_peaks", "default_grid"]

FREQ_MERGE_TOL = 1e-9


@dataclass(frozen=True)
class DriveField:
    """Classical multimode drive, one component per Bloch mode."""

    amplitudes: np.ndarray
    frequencies: np.ndarray

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        phases = np.exp(-1j * np.multiply.outer(t, self.frequencies))
        return phases @ self.amplitudes

    def merged(self):
        """Components summed over equal frequencies, sorted by frequency.

        Degenerate modes oscillate in phase and add coherently.
        """
        order = np.argsort(self.frequencies, kind="stable")
        freqs, amps = [], []
        for i in order:
            w, A = self.frequencies[i], self.amplitudes[i]
            if freqs and abs(w - freqs[-1]) <= FREQ_MERGE_TOL * max(1.0, abs(w)):
                amps[-1] += A
            else:
                freqs.append(w)
                amps.append(A)
        return np.array(freqs), np.array(amps, dtype=complex)

    def mean_power(self):
        """Long-time average of ``|Omega(t)|^2``."""
        _, amps = self.merged()
        return float(np.sum(np.abs(amps) ** 2))

    def slowest_beat(self):
        """Smallest separation between distinct drive frequencies (``inf`` if one)."""
        freqs, amps = self.merged()
        freqs = freqs[np.abs(amps) > 0]
        if len(freqs) < 2:
            return np.inf
        return float(np.min(np.diff(freqs)))


def multimode_drive(steady, spectrum=None):
    """Drive assembled from the Bloch-mode populations of a steady state."""
    spectrum = spectrum or steady.spectrum
    g = spectrum.params.g
    n_sites = spectrum.lattice.n_sites
    amps = g * np.sqrt(np.clip(steady.n_k, 0, None) / n_sites)
    return DriveField(amplitudes=amps.astype(complex), frequencies=spectrum.omega_k.copy())


@dataclass
class SpectrumResult:
    omega_grid: np.ndarray
    S: np.ndarray
    S_raw: np.ndarray
    Gamma_d: float
    epsilon: float
    t0: np.ndarray
    T: float
    settled: np.ndarray
    method: str
    normalization: str = "peak"
    metadata: dict = field(default_factory=dict)

    def peaks(self, min_height=0.05):
        return spectral_peaks(self.omega_grid, self.S, min_height)


def default_grid(center=0.0, half_width=25.0, points=601):
    return np.linspace(center - half_width, center + half_width, points)


# two emitters: source (sigma) (x) detector (d), basis |g>,|e> each
_SM = np.array([[0.0, 1.0], [0.0, 0.0]])
_I2 = np.eye(2)
_SIG = np.kron(_SM, _I2)
_DET = np.kron(_I2, _SM)
_I4 = np.eye(4)


def _dissipator(c):
    cd = c.conj().T
    cdc = cd @ c
    return np.kron(c.conj(), c) - 0.5 * np.kron(_I4, cdc) - 0.5 * np.kron(cdc.T, _I4)


def _commutator(H):
    return -1j * (np.kron(_I4, H) - np.kron(H.T, _I4))


def _static_liouvillian(params, omega_det, omega_ref, Gamma_d, epsilon):
    sd, dd = _SIG.conj().T, _DET.conj().T
    H = ((params.omega_sigma - omega_ref) * sd @ _SIG
         + (omega_det - omega_ref) * dd @ _DET
         + epsilon * (sd @ _DET + dd @ _SIG))
    L = _commutator(H) + Gamma_d * _dissipator(_DET)
    if params.P_sigma:
        L = L + params.P_sigma * _dissipator(sd)
    if params.gamma_sigma:
        L = L + params.gamma_sigma * _dissipator(_SIG)
    if params.gamma_phi:
        L = L + params.gamma_phi * _dissipator(sd @ _SIG)
    return L


_L_PLUS = _commutator(_SIG.conj().T)   # drive term Omega sigma^dagger
_L_MINUS = _commutator(_SIG)            # drive term Omega^* sigma
_DET_POP = np.kron(_I2, np.array([[0.0, 0.0], [0.0, 1.0]]))
_POP_ROW = _DET_POP.T.ravel(order="F")  # tr(P rho) = sum_ij P_ji rho_ij


def _steady_population(L):
    ns = null_space(L)
    if ns.shape[1] != 1:
        raise ValueError(f"steady state not unique (null space dimension {ns.shape[1]})")
    v = ns[:, 0]
    rho = v.reshape((4, 4), order="F")
    rho = rho / np.trace(rho)
    return float(np.real(_POP_ROW @ rho.ravel(order="F")))


def _integrate_population(L0, freqs, amps, T, rtol, atol, settle_tol, max_windows):
    def rhs(t, y):
        Om = np.dot(amps, np.exp(-1j * freqs * t))
        L = L0 + Om * _L_PLUS + np.conj(Om) * _L_MINUS
        v = y[:16]
        dv = L @ v
        return np.concatenate([dv, [np.real(_POP_ROW @ v)]])

    y = np.zeros(17, dtype=complex)
    y[0] = 1.0  # both two-level systems in their ground state
    t, prev = 0.0, None
    for _ in range(max_windows):
        y = y.copy()
        y[16] = 0.0
        sol = solve_ivp(rhs, (t, t + T), y, method="DOP853", rtol=rtol, atol=atol)
        if not sol.success:
            return np.nan, t, False
        y = sol.y[:, -1]
        avg = float(np.real(y[16])) / T
        if prev is not None and abs(avg - prev) <= settle_tol * abs(avg):
            return avg, t, True
        prev = avg
        t += T
    return prev, t - T, False


def detector_population(params, drive, omega_det, Gamma_d=0.3, epsilon=1e-3,
                        method="auto", T=None, rtol=1e-9, atol=1e-15,
                        settle_tol=1e-3, max_windows=60):
    """Time-averaged detector population at detector frequency ``omega_det``.

    With a single distinct drive frequency the problem is static in the
    frame rotating with the drive and is solved exactly (``method="steady"``);
    otherwise the master equation is integrated window by window until two
    consecutive window averages agree to ``settle_tol``.

    Returns
    -------
    population, t0, settled, method
    """
    freqs, amps = drive.merged()
    active = np.abs(amps) > 0
    if active.any():
        ref = freqs[active][np.argmax(np.abs(amps[active]))]
        freqs, amps = freqs[active] - ref, amps[active]
    else:
        ref, freqs, amps = params.omega_a, freqs[:0], amps[:0]
    if method == "auto":
        method = "steady" if len(freqs) <= 1 else "integrate"

    L0 = _static_liouvillian(params, omega_det, ref, Gamma_d, epsilon)
    if method == "steady":
        if len(freqs) > 1:
            raise ValueError("a multi-frequency drive has no steady state")
        A = amps[0] if len(amps) else 0.0
        return _steady_population(L0 + A * _L_PLUS + np.conj(A) * _L_MINUS), 0.0, True, method
    if method != "integrate":
        raise ValueError(f"unknown method {method!r}")
    if T is None:
        beat = drive.slowest_beat()
        T = 50.0 / Gamma_d if not np.isfinite(beat) else 20 * 2 * np.pi / beat
    pop, t0, settled = _integrate_population(L0, freqs, amps, T, rtol, atol,
                                             settle_tol, max_windows)
    return pop, t0, settled, method


def _grid_point(args):
    params, drive, w, kwargs = args
    return detector_population(params, drive, w, **kwargs)


def detector_spectrum(params, drive, omega_grid=None, Gamma_d=0.3, epsilon=1e-3,
                      workers=1, **kwargs):
    """Peak-normalized emission spectrum on ``omega_grid``.

    Extra keyword arguments go to :func:`detector_population`. Grid points are
    independent and run on ``workers`` processes when ``workers > 1``.
    """
    omega_grid = default_grid() if omega_grid is None else np.asarray(omega_grid, dtype=float)
    kwargs = dict(kwargs, Gamma_d=Gamma_d, epsilon=epsilon)
    jobs = [(params, drive, float(w), kwargs) for w in omega_grid]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_grid_point, jobs))
    else:
        results = [_grid_point(j) for j in jobs]
    raw = np.array([r[0] for r in results])
    t0 = np.array([r[1] for r in results])
    settled = np.array([r[2] for r in results])
    method = results[0][3] if results else ""
    peak = np.nanmax(raw) if len(raw) else np.nan
    S = raw / peak if peak > 0 else raw.copy()
    T = kwargs.get("T")
    if T is None:
        beat = drive.slowest_beat()
        T = 50.0 / Gamma_d if not np.isfinite(beat) else 20 * 2 * np.pi / beat
    return SpectrumResult(omega_grid=omega_grid, S=S, S_raw=raw, Gamma_d=Gamma_d,
                          epsilon=epsilon, t0=t0, T=float(T), settled=settled,
                          method=method)


def spectral_peaks(omega_grid, S, min_height=0.05):
    """Frequencies and heights of local maxima above ``min_height`` of the peak."""
    S = np.asarray(S, dtype=float)
    top = np.nanmax(S)
    idx, _ = find_peaks(S, height=min_height * top)
    return np.asarray(omega_grid)[idx], S[idx]


def sideband_positions(steady, spectrum=None, use_computed=False):
    """Expected Mollow sideband frequencies around the dominant Bloch mode.

    The dominant mode frequency is shifted by ``2 sqrt(2) g sqrt(n)`` when it
    is shared by a degenerate ``+-k`` pair and by ``2 g sqrt(n)`` otherwise
    (band-edge modes and the single-site case), with ``n`` the ideal lasing
    population ``P / (2 gamma_a)`` or, if ``use_computed``, the solved ``n_a``.
    """
    spectrum = spectrum or steady.spectrum
    p = spectrum.params
    n = steady.n_a if use_computed else p.P_sigma / (2 * p.gamma_a)
    w = spectrum.omega_k[np.argmax(steady.n_k)]
    shared = np.sum(np.abs(spectrum.omega_k - w) <= FREQ_MERGE_TOL * max(1.0, abs(w)))
    split = (2 * np.sqrt(2) if shared >= 2 else 2.0) * p.g * np.sqrt(max(n, 0.0))
    return [float(w - split), float(w + split)]

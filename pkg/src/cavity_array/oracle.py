"""Exact master-equation steady state on a truncated Fock space.

Each site carries a cavity truncated at ``cutoff`` photons and a two-level
emitter, ordered ``cavity (x) emitter``. Sites are tensored left to right.
Density matrices are vectorized column-major, so that
``vec(A X B) = (B^T (x) A) vec(X)``.
"""

from dataclasses import dataclass
import math
import warnings

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import solve_ivp

from .exceptions import ConvergenceError, DimensionError, ParameterError

__all__ = ["FockTruncation", "OracleResult", "site_operators",
           "hopping_matrix", "hamiltonian", "build_liouvillian",
           "steady_density_matrix", "observables", "solve_oracle",
           "choose_cutoff", "lindblad_dissipator"]

DIRECT_MAX_DIM = 400
MAX_DIM = 4096
LEAKAGE_TOL = 1e-6


@dataclass(frozen=True)
class FockTruncation:
    cutoff: int

    def __post_init__(self):
        if int(self.cutoff) != self.cutoff or self.cutoff < 0:
            raise ParameterError(f"cutoff must be a non-negative integer, got {self.cutoff!r}")

    @property
    def site_dim(self):
        return 2 * (self.cutoff + 1)

    def dim(self, N):
        return self.site_dim ** N


def choose_cutoff(n_target):
    """Fock cutoff large enough for a Poisson-like photon distribution of mean ``n_target``."""
    n = max(float(n_target), 0.0)
    return int(math.ceil(n + 5 * math.sqrt(n) + 4))


@dataclass
class OracleResult:
    """Steady state of the full master equation and its observables.

    Per-site quantities are arrays of length ``N``. ``g2`` entries are
    ``None`` where the cavity is empty. ``cross_coherence`` is
    ``<a_0^dagger a_1>`` and only set for two sites.
    """

    rho: np.ndarray
    N: int
    trunc: FockTruncation
    n_a: np.ndarray
    n_sigma: np.ndarray
    g2: list
    mean_field: np.ndarray
    sigma_mean: np.ndarray
    cross_coherence: complex = None
    leakage: float = 0.0
    residual: float = 0.0
    method: str = ""
    bond_convention: str = ""

    @property
    def cutoff_sufficient(self):
        return self.leakage < LEAKAGE_TOL


def _embed(op, site, N, d):
    out = sp.identity(1, format="csr", dtype=complex)
    for j in range(N):
        out = sp.kron(out, op if j == site else sp.identity(d, format="csr"), format="csr")
    return out


def site_operators(N, trunc):
    """Cavity and emitter lowering operators ``(a_j, sigma_j)`` for every site."""
    c = trunc.cutoff
    d = trunc.site_dim
    a1 = sp.diags(np.sqrt(np.arange(1, c + 1, dtype=float)), 1, shape=(c + 1, c + 1))
    s1 = sp.csr_matrix(np.array([[0.0, 1.0], [0.0, 0.0]]))
    a_loc = sp.kron(a1, sp.identity(2), format="csr").astype(complex)
    s_loc = sp.kron(sp.identity(c + 1), s1, format="csr").astype(complex)
    a = [_embed(a_loc, j, N, d) for j in range(N)]
    s = [_embed(s_loc, j, N, d) for j in range(N)]
    return a, s


def hopping_matrix(N, J, convention="bloch"):
    """Single-particle tunneling matrix of the ``N``-site ring.

    ``bloch`` sums over both neighbours of every site, ``J (S + S^T)`` with
    ``S`` the cyclic shift, so the eigenvalues are ``2 J cos k`` exactly as in
    the Bloch band. For two sites that doubles the single bond to ``2J``, and a
    lone site picks up ``2J`` on its diagonal. ``single`` counts each
    unordered bond once and has no self-coupling.
    """
    if convention == "bloch":
        shift = np.roll(np.eye(N), 1, axis=1)
        return J * (shift + shift.T)
    if convention == "single":
        T = np.zeros((N, N))
        for j in range(N):
            l = (j + 1) % N
            if l != j:
                T[j, l] = T[l, j] = J
        return T
    raise ParameterError(f"unknown bond convention {convention!r}")


def hamiltonian(params, N, trunc, convention="bloch"):
    a, s = site_operators(N, trunc)
    H = sp.csr_matrix((trunc.dim(N),) * 2, dtype=complex)
    for j in range(N):
        ad = a[j].getH()
        sd = s[j].getH()
        H = H + params.omega_a * (ad @ a[j]) + params.omega_sigma * (sd @ s[j])
        H = H + params.g * (ad @ s[j] + a[j] @ sd)
    T = hopping_matrix(N, params.J, convention)
    for j in range(N):
        for l in range(N):
            if T[j, l] != 0:
                H = H + T[j, l] * (a[j].getH() @ a[l])
    return H.tocsr()


def lindblad_dissipator(c):
    """Superoperator of ``c rho c^dagger - {c^dagger c, rho}/2``."""
    d = c.shape[0]
    eye = sp.identity(d, format="csr")
    cdc = c.getH() @ c
    return (sp.kron(c.conj(), c) - 0.5 * sp.kron(eye, cdc) - 0.5 * sp.kron(cdc.T, eye)).tocsr()


def build_liouvillian(params, N, trunc, convention="bloch", max_dim=MAX_DIM):
    """Sparse Liouvillian acting on column-stacked density matrices.

    Raises
    ------
    DimensionError
        If the Hilbert-space dimension exceeds ``max_dim``.
    """
    if N not in (1, 2):
        raise ParameterError(f"the exact solver supports N = 1 or 2, got {N}")
    if trunc.cutoff < 1:
        raise ParameterError("cutoff must be at least 1")
    D = trunc.dim(N)
    if D > max_dim:
        raise DimensionError(f"Hilbert dimension {D} exceeds cap {max_dim}")
    H = hamiltonian(params, N, trunc, convention)
    eye = sp.identity(D, format="csr")
    L = -1j * (sp.kron(eye, H) - sp.kron(H.T, eye))
    a, s = site_operators(N, trunc)
    for j in range(N):
        if params.gamma_a:
            L = L + params.gamma_a * lindblad_dissipator(a[j])
        if params.gamma_sigma:
            L = L + params.gamma_sigma * lindblad_dissipator(s[j])
        if params.P_sigma:
            L = L + params.P_sigma * lindblad_dissipator(s[j].getH().tocsr())
        if params.gamma_phi:
            L = L + params.gamma_phi * lindblad_dissipator((s[j].getH() @ s[j]).tocsr())
    return L.tocsr()


def _trace_row(D):
    return np.eye(D).ravel(order="F")


def _direct_steady(L, D):
    A = L.tolil()
    A[0, :] = _trace_row(D)
    b = np.zeros(D * D, dtype=complex)
    b[0] = 1.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", spla.MatrixRankWarning)
        try:
            x = spla.spsolve(A.tocsc(), b)
        except spla.MatrixRankWarning as exc:
            raise ConvergenceError("steady state is not unique (singular system)") from exc
    if not np.all(np.isfinite(x)):
        raise ConvergenceError("steady state is not unique (singular system)")
    return x


def _integrate_steady(L, D, tol, chunk, t_max, rho0=None):
    if rho0 is None:
        rho0 = np.zeros((D, D), dtype=complex)
        rho0[0, 0] = 1.0
    y = rho0.ravel(order="F").astype(complex)
    t = 0.0
    while t < t_max:
        sol = solve_ivp(lambda _t, v: L @ v, (t, t + chunk), y, method="DOP853",
                        rtol=1e-12, atol=1e-14)
        if not sol.success:
            raise ConvergenceError(f"time integration failed: {sol.message}")
        y = sol.y[:, -1]
        t += chunk
        if np.linalg.norm(L @ y) < tol:
            return y
    raise ConvergenceError(f"no steady state reached by t = {t_max} (|d rho/dt| = "
                           f"{np.linalg.norm(L @ y):.2e})")


def steady_density_matrix(L, D, method="auto", tol=1e-10, chunk=50.0, t_max=1e5,
                          direct_max_dim=DIRECT_MAX_DIM):
    """Trace-one null vector of ``L`` reshaped to a ``D x D`` matrix.

    ``method="auto"`` solves directly when ``D <= direct_max_dim`` and
    integrates the master equation in time otherwise.

    Returns
    -------
    rho : ndarray
    residual : float
        ``|L vec(rho)|``.
    method : str
    """
    if method == "auto":
        method = "direct" if D <= direct_max_dim else "integrate"
    if method == "direct":
        x = _direct_steady(L, D)
    elif method == "integrate":
        x = _integrate_steady(L, D, tol, chunk, t_max)
    else:
        raise ValueError(f"unknown method {method!r}")
    rho = x.reshape((D, D), order="F")
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real
    residual = float(np.linalg.norm(L @ rho.ravel(order="F")))
    return rho, residual, method


def _expect(op, rho):
    return complex(np.sum(op.multiply(rho.T)))


def observables(rho, N, trunc):
    """Populations, ``g2``, coherences and photon-number leakage of ``rho``."""
    a, s = site_operators(N, trunc)
    n_a, n_s, g2, mean_a, mean_s, leak = [], [], [], [], [], []
    c = trunc.cutoff
    top = sp.kron(sp.diags([0.0] * c + [1.0]), sp.identity(2), format="csr")
    d = trunc.site_dim
    for j in range(N):
        ad = a[j].getH()
        na = _expect(ad @ a[j], rho).real
        n_a.append(na)
        n_s.append(_expect(s[j].getH() @ s[j], rho).real)
        if na < 1e-12:
            g2.append(None)
        else:
            g2.append(_expect(ad @ ad @ a[j] @ a[j], rho).real / na**2)
        mean_a.append(_expect(a[j], rho))
        mean_s.append(_expect(s[j], rho))
        leak.append(_expect(_embed(top, j, N, d), rho).real)
    cross = _expect(a[0].getH() @ a[1], rho) if N == 2 else None
    return dict(n_a=np.array(n_a), n_sigma=np.array(n_s), g2=g2,
                mean_field=np.array(mean_a), sigma_mean=np.array(mean_s),
                cross_coherence=cross, leakage=float(max(leak)))


def solve_oracle(params, N=1, cutoff=None, convention="bloch", method="auto",
                 max_dim=MAX_DIM, min_cutoff=1, grow=1.5, **kwargs):
    """Build, solve and evaluate the master equation in one call.

    When ``cutoff`` is omitted it starts from the rate-equation photon number
    of the same parameters (at least ``min_cutoff``) and is enlarged by
    ``grow`` until the top Fock level holds less than ``LEAKAGE_TOL`` or the
    dimension cap is reached. Thermal-like states need this; their photon
    distributions are much wider than a Poissonian of the same mean.
    """
    adaptive = cutoff is None
    if adaptive:
        from .model import LatticeSpec
        from .steady import solve
        n_target = solve(params, LatticeSpec(N)).n_a if params.gamma_a > 0 else 0.0
        cutoff = max(choose_cutoff(n_target), int(min_cutoff))
    trunc = cutoff if isinstance(cutoff, FockTruncation) else FockTruncation(cutoff)
    while True:
        L = build_liouvillian(params, N, trunc, convention, max_dim=max_dim)
        D = trunc.dim(N)
        rho, residual, used = steady_density_matrix(L, D, method=method, **kwargs)
        obs = observables(rho, N, trunc)
        if not adaptive or obs["leakage"] < LEAKAGE_TOL:
            break
        bigger = FockTruncation(max(trunc.cutoff + 1, int(math.ceil(trunc.cutoff * grow))))
        if bigger.dim(N) > max_dim:
            break
        trunc = bigger
    return OracleResult(rho=rho, N=N, trunc=trunc, residual=residual, method=used,
                        bond_convention=convention, **obs)

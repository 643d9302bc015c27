"""Physical parameters and the Bloch-mode decomposition of a periodic lattice.

All rates and frequencies are in units of the light-matter coupling ``g``
and the cavity frequency ``omega_a`` defaults to zero, so the emitter
frequency ``omega_sigma`` doubles as the emitter-cavity detuning.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import ParameterError

__all__ = ["ModelParams", "LatticeSpec", "BlochSpectrum",
           "axis_momenta", "build_momenta", "build_spectrum"]


@dataclass(frozen=True)
class ModelParams:
    """Rates and frequencies of a homogeneous cavity-emitter array.

    Parameters
    ----------
    omega_sigma : float
        Emitter transition frequency.
    J : float
        Photon tunneling rate between neighbouring cavities.
    gamma_a : float
        Cavity photon decay rate.
    gamma_sigma : float
        Emitter spontaneous decay rate.
    P_sigma : float
        Incoherent pump rate of each emitter.
    gamma_phi : float
        Emitter pure-dephasing rate. Only enters through ``Gamma``.
    g : float
        Light-matter coupling, the unit of everything else.
    omega_a : float
        Cavity frequency.
    """

    omega_sigma: float = 0.0
    J: float = 0.0
    gamma_a: float = 0.1
    gamma_sigma: float = 0.01
    P_sigma: float = 5.0
    gamma_phi: float = 0.0
    g: float = 1.0
    omega_a: float = 0.0

    def __post_init__(self):
        for name in ("J", "gamma_a", "gamma_sigma", "P_sigma", "gamma_phi"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise ParameterError(f"{name} must be finite and >= 0, got {value!r}")
        if not self.g > 0:
            raise ParameterError(f"g must be > 0, got {self.g!r}")
        if not self.Gamma > 0:
            raise ParameterError("total decoherence rate Gamma must be > 0")

    @classmethod
    def from_detuning(cls, delta, **kwargs):
        """Build parameters from the detuning ``delta = omega_sigma - omega_a``."""
        omega_a = kwargs.pop("omega_a", 0.0)
        return cls(omega_sigma=omega_a + delta, omega_a=omega_a, **kwargs)

    def replace(self, **changes):
        """Return a copy with some fields changed; ``delta`` is accepted too."""
        if "delta" in changes:
            delta = changes.pop("delta")
            changes["omega_sigma"] = changes.get("omega_a", self.omega_a) + delta
        return replace(self, **changes)

    @property
    def delta(self):
        return self.omega_sigma - self.omega_a

    @property
    def Gamma(self):
        """Total decoherence rate of the emitter polarization."""
        return self.gamma_a + self.P_sigma + self.gamma_sigma + self.gamma_phi

    @property
    def kappa_sigma(self):
        """Purcell-enhanced emitter decay through its own cavity, 4 g^2 / gamma_a."""
        if self.gamma_a == 0:
            raise ParameterError("kappa_sigma is undefined for gamma_a = 0")
        return 4 * self.g**2 / self.gamma_a


@dataclass(frozen=True)
class LatticeSpec:
    """Hypercubic periodic lattice of dimension ``m`` and edge length ``N``."""

    N: int = 1
    m: int = 1

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ParameterError(f"N must be a positive integer, got {self.N!r}")
        if int(self.m) != self.m or not 1 <= self.m <= 3:
            raise ParameterError(f"m must be 1, 2 or 3, got {self.m!r}")

    @property
    def n_sites(self):
        return self.N ** self.m


def axis_momenta(N):
    """Momenta along one lattice axis, in grid order."""
    l = np.arange(1, N + 1)
    if N % 2 == 0:
        return 2 * np.pi / N * (-N / 2 + l)
    return 2 * np.pi / N * (-(N + 1) / 2 + l)


def build_momenta(lattice):
    """Momentum grid of the lattice, shape ``(N**m, m)``.

    Rows are ordered lexicographically in the per-axis index ``l``, with the
    last axis varying fastest. Components lie in ``(-pi, pi]``.
    """
    axis = axis_momenta(lattice.N)
    grids = np.meshgrid(*([axis] * lattice.m), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=-1)


@dataclass(frozen=True)
class BlochSpectrum:
    """Per-mode frequencies, detunings, effective couplings and Purcell rates.

    Arrays are aligned with the rows of ``k``.
    """

    params: ModelParams
    lattice: LatticeSpec
    k: np.ndarray
    omega_k: np.ndarray
    Delta_k: np.ndarray
    g_eff: np.ndarray
    F_k: np.ndarray
    Gamma: float = field(default=0.0)

    @property
    def kappa_sigma(self):
        return self.params.kappa_sigma

    @property
    def n_modes(self):
        return len(self.omega_k)

    def modes(self):
        """Iterate over ``(k, omega_k, Delta_k, g_eff, F_k)`` tuples."""
        return zip(self.k, self.omega_k, self.Delta_k, self.g_eff, self.F_k)

    def mirror_index(self):
        """Index array mapping each mode ``k`` onto the mode ``-k``."""
        N = self.lattice.N
        idx = np.rint(self.k * N / (2 * np.pi)).astype(int)
        neg = np.mod(-idx, N)
        # grid index along each axis: even N stores j = l - N/2, odd N stores j = l - (N+1)/2
        offset = N // 2 if N % 2 == 0 else (N + 1) // 2
        pos = np.mod(neg + offset - 1, N)
        flat = np.ravel_multi_index(tuple(pos.T), (N,) * self.lattice.m)
        return flat


def build_spectrum(params, lattice):
    """Bloch-mode dispersion and Purcell rates for ``params`` on ``lattice``."""
    k = build_momenta(lattice)
    omega_k = params.omega_a + 2 * params.J * np.cos(k).sum(axis=1)
    Delta_k = params.omega_sigma - omega_k
    Gamma = params.Gamma
    g_eff = params.g / np.sqrt(1 + (2 * Delta_k / Gamma) ** 2)
    F_k = 4 * g_eff**2 / Gamma
    return BlochSpectrum(params=params, lattice=lattice, k=k, omega_k=omega_k,
                         Delta_k=Delta_k, g_eff=g_eff, F_k=F_k, Gamma=Gamma)

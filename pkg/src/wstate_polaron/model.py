"""Lattice model parameters, bare dispersion and the excitation-boson vertex.

The model is a single spinless fermion hopping on a ring of ``N`` sites,
coupled to dispersionless bosons through a breathing-mode term (density at
``n`` against displacements at ``n - 1`` and ``n + 1``) and a Peierls term
(hopping on bond ``(n, n + 1)`` against displacements at ``n + 1`` and ``n``).
All energies are carried in a single unit; ``ModelParams.unit_ghz`` records
how many GHz (energy divided by Planck's constant) one unit corresponds to,
which only matters when converting to physical time.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ModelParams:
    """Parameters of the effective lattice Hamiltonian.

    Parameters
    ----------
    t_e : float
        Excitation hopping amplitude.
    hbar_omega_b : float
        Boson quantum.
    g : float
        Dimensionless coupling strength.
    n_sites : int
        Ring length ``N``.
    boson_cutoff : int
        Maximum total boson number ``M`` kept in the truncated Fock space.
    unit_ghz : float
        Frequency (GHz, i.e. E/h) of one energy unit.
    """

    t_e: float
    hbar_omega_b: float
    g: float
    n_sites: int
    boson_cutoff: int
    unit_ghz: float = 1.0

    def __post_init__(self):
        if not self.t_e > 0:
            raise ValueError(f"t_e must be positive, got {self.t_e}")
        if not self.hbar_omega_b > 0:
            raise ValueError(f"hbar_omega_b must be positive, got {self.hbar_omega_b}")
        if not self.g >= 0:
            raise ValueError(f"g must be non-negative, got {self.g}")
        if int(self.n_sites) != self.n_sites or self.n_sites < 2:
            raise ValueError(f"n_sites must be an integer >= 2, got {self.n_sites}")
        if int(self.boson_cutoff) != self.boson_cutoff or self.boson_cutoff < 0:
            raise ValueError(f"boson_cutoff must be an integer >= 0, got {self.boson_cutoff}")
        if not self.unit_ghz > 0:
            raise ValueError(f"unit_ghz must be positive, got {self.unit_ghz}")

    @property
    def lambda_eb(self) -> float:
        return effective_lambda(self)

    def momenta(self) -> list[Quasimomentum]:
        return [Quasimomentum(m, self.n_sites) for m in range(self.n_sites)]


@dataclass(frozen=True)
class Quasimomentum:
    """Lattice momentum ``2*pi*index/n_sites`` stored as an exact integer index."""

    index: int
    n_sites: int

    def __post_init__(self):
        if self.n_sites < 1:
            raise ValueError("n_sites must be >= 1")
        object.__setattr__(self, "index", int(self.index) % self.n_sites)

    @property
    def value(self) -> float:
        return 2.0 * math.pi * self.index / self.n_sites

    @property
    def signed_index(self) -> int:
        """Index folded into ``(-N/2, N/2]``."""
        m = self.index
        return m - self.n_sites if m > self.n_sites // 2 else m

    def _check(self, other: Quasimomentum):
        if other.n_sites != self.n_sites:
            raise ValueError("quasimomenta live on different grids")

    def __add__(self, other: Quasimomentum) -> Quasimomentum:
        self._check(other)
        return Quasimomentum(self.index + other.index, self.n_sites)

    def __sub__(self, other: Quasimomentum) -> Quasimomentum:
        self._check(other)
        return Quasimomentum(self.index - other.index, self.n_sites)

    def __neg__(self) -> Quasimomentum:
        return Quasimomentum(-self.index, self.n_sites)


def _momentum_value(k) -> float:
    return k.value if isinstance(k, Quasimomentum) else k


def vertex_gamma(k, q, params: ModelParams) -> complex:
    """Excitation-boson vertex ``2i g hbar*omega_b [sin k + sin q - sin(k+q)]``.

    Accepts floats, arrays or :class:`Quasimomentum` instances.
    """
    k = _momentum_value(k)
    q = _momentum_value(q)
    amplitude = 2.0 * params.g * params.hbar_omega_b
    return 1j * amplitude * (np.sin(k) + np.sin(q) - np.sin(np.add(k, q)))


def bare_dispersion(k, params: ModelParams):
    """Bare excitation band ``-2 t_e cos k`` (band-centre offset omitted)."""
    return -2.0 * params.t_e * np.cos(_momentum_value(k))


def effective_lambda(params: ModelParams) -> float:
    """Effective coupling ``2 g^2 hbar*omega_b / t_e``."""
    if params.t_e == 0:
        raise ValueError("effective coupling is undefined for t_e = 0")
    return 2.0 * params.g**2 * params.hbar_omega_b / params.t_e

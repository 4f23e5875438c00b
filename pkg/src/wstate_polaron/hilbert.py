"""Truncated boson Fock space and single-excitation bases.

Boson configurations are occupation vectors over the ``N`` ring sites with
total occupation at most ``M``. They are ordered shell by shell (increasing
total), lexicographically ascending inside a shell, so the vacuum always has
index 0.

Two single-excitation bases are built on top:

* :class:`RealSpaceBasis` -- excitation site ``n`` times absolute boson
  configuration, flat index ``n * D_b + b``.
* :class:`KSectorBasis` -- translation-symmetrised states of fixed total
  quasimomentum ``K``::

      |K; nu> = N^{-1/2} sum_n exp(-i K n) T^n |0; nu>

  where ``|0; nu>`` has the excitation on site 0 and ``nu`` is the boson
  configuration measured relative to it. The phase ``exp(-i k n)`` matches
  the Bloch convention ``c_k^+ |0> = N^{-1/2} sum_n exp(-i k n) c_n^+ |0>``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np
import scipy.sparse as sp

from .model import ModelParams, Quasimomentum

#: Default bound on the number of stored states (boson configs times sites).
MAX_DIMENSION = 5_000_000


class DimensionError(ValueError):
    """Requested basis exceeds the configured memory bound."""

    def __init__(self, dimension: int, bound: int):
        super().__init__(f"basis dimension {dimension} exceeds the bound {bound}")
        self.dimension = dimension
        self.bound = bound


def boson_dimension(n_sites: int, cutoff: int) -> int:
    """Number of boson configurations, ``sum_{m<=M} C(N+m-1, m) = C(N+M, M)``."""
    return sum(comb(n_sites + m - 1, m) for m in range(cutoff + 1))


def _compositions(total: int, parts: int):
    # ascending lexicographic order
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


@dataclass(frozen=True, eq=False)
class BosonBasis:
    """All boson configurations of ``n_sites`` modes with total ``<= cutoff``."""

    n_sites: int
    cutoff: int
    occupations: np.ndarray = field(repr=False)
    _index: dict = field(repr=False)

    @property
    def dimension(self) -> int:
        return len(self.occupations)

    @property
    def totals(self) -> np.ndarray:
        return self.occupations.sum(axis=1)

    def index_of(self, config) -> int:
        return self._index[tuple(int(x) for x in config)]

    def get(self, config, default=None):
        return self._index.get(config, default)

    def config_of(self, index: int) -> tuple[int, ...]:
        return tuple(int(x) for x in self.occupations[index])

    def __len__(self):
        return self.dimension


@lru_cache(maxsize=32)
def _boson_basis(n_sites: int, cutoff: int) -> BosonBasis:
    configs = [c for m in range(cutoff + 1) for c in _compositions(m, n_sites)]
    occupations = np.array(configs, dtype=np.int64).reshape(len(configs), n_sites)
    occupations.setflags(write=False)
    index = {c: i for i, c in enumerate(configs)}
    return BosonBasis(n_sites, cutoff, occupations, index)


def enumerate_boson_configs(n_sites: int, cutoff: int, max_dimension: int = MAX_DIMENSION) -> BosonBasis:
    """Enumerate boson configurations in canonical order.

    Raises
    ------
    DimensionError
        If the number of configurations exceeds ``max_dimension``.
    """
    if n_sites < 1:
        raise ValueError(f"n_sites must be >= 1, got {n_sites}")
    if cutoff < 0:
        raise ValueError(f"cutoff must be >= 0, got {cutoff}")
    dim = boson_dimension(n_sites, cutoff)
    if dim > max_dimension:
        raise DimensionError(dim, max_dimension)
    return _boson_basis(int(n_sites), int(cutoff))


@dataclass(frozen=True, eq=False)
class RealSpaceBasis:
    """Excitation position times absolute boson configuration."""

    bosons: BosonBasis

    @property
    def n_sites(self) -> int:
        return self.bosons.n_sites

    @property
    def cutoff(self) -> int:
        return self.bosons.cutoff

    @property
    def dimension(self) -> int:
        return self.n_sites * self.bosons.dimension

    def index_of(self, site: int, config) -> int:
        return (site % self.n_sites) * self.bosons.dimension + self.bosons.index_of(config)

    def state_of(self, index: int) -> tuple[int, tuple[int, ...]]:
        site, b = divmod(index, self.bosons.dimension)
        return site, self.bosons.config_of(b)


def build_real_space_basis(params: ModelParams, max_dimension: int = MAX_DIMENSION) -> RealSpaceBasis:
    d_b = boson_dimension(params.n_sites, params.boson_cutoff)
    if d_b * params.n_sites > max_dimension:
        raise DimensionError(d_b * params.n_sites, max_dimension)
    return RealSpaceBasis(enumerate_boson_configs(params.n_sites, params.boson_cutoff, max_dimension))


@dataclass(frozen=True, eq=False)
class KSectorBasis:
    """Fixed total-quasimomentum basis; entry ``nu`` is a relative boson config.

    Entry 0 is the zero-boson state, i.e. the bare Bloch state of momentum K.
    """

    k: Quasimomentum
    bosons: BosonBasis

    @property
    def n_sites(self) -> int:
        return self.bosons.n_sites

    @property
    def cutoff(self) -> int:
        return self.bosons.cutoff

    @property
    def dimension(self) -> int:
        return self.bosons.dimension

    def bare_index(self) -> int:
        return 0

    def to_real_space(self, vector: np.ndarray, real_basis: RealSpaceBasis | None = None) -> np.ndarray:
        """Expand a sector vector into the real-space basis."""
        if real_basis is None:
            real_basis = RealSpaceBasis(self.bosons)
        vector = np.asarray(vector)
        if vector.shape != (self.dimension,):
            raise ValueError(f"expected vector of length {self.dimension}, got {vector.shape}")
        n = self.n_sites
        d_b = self.dimension
        out = np.zeros(n * d_b, dtype=complex)
        occ = self.bosons.occupations
        for site in range(n):
            phase = np.exp(-1j * self.k.value * site) / np.sqrt(n)
            shifted = np.roll(occ, site, axis=1)
            rows = [site * d_b + self.bosons.index_of(c) for c in shifted]
            out[rows] += phase * vector
        return out


def build_k_sector_basis(params: ModelParams, k: Quasimomentum | int, max_dimension: int = MAX_DIMENSION) -> KSectorBasis:
    if not isinstance(k, Quasimomentum):
        k = Quasimomentum(k, params.n_sites)
    if k.n_sites != params.n_sites:
        raise ValueError("momentum grid does not match n_sites")
    return KSectorBasis(k, enumerate_boson_configs(params.n_sites, params.boson_cutoff, max_dimension))


def translation_operator(basis: RealSpaceBasis) -> sp.csr_matrix:
    """Permutation ``T`` moving the excitation and every boson one site forward."""
    n = basis.n_sites
    d_b = basis.bosons.dimension
    shifted = np.roll(basis.bosons.occupations, 1, axis=1)
    perm_b = np.array([basis.bosons.index_of(c) for c in shifted], dtype=np.int64)
    cols = np.arange(n * d_b)
    sites, b = np.divmod(cols, d_b)
    rows = ((sites + 1) % n) * d_b + perm_b[b]
    return sp.csr_matrix((np.ones(n * d_b), (rows, cols)), shape=(n * d_b, n * d_b))


def translation_orbits(bosons: BosonBasis) -> tuple[np.ndarray, list[np.ndarray]]:
    """Group boson configurations into orbits under cyclic shifts.

    Returns the orbit label of every configuration and the member indices of
    each orbit, orbits numbered in order of their smallest member.
    """
    label = np.full(bosons.dimension, -1, dtype=np.int64)
    members = []
    for i in range(bosons.dimension):
        if label[i] >= 0:
            continue
        c = bosons.occupations[i]
        orbit = sorted({bosons.index_of(np.roll(c, s)) for s in range(bosons.n_sites)})
        label[orbit] = len(members)
        members.append(np.array(orbit, dtype=np.int64))
    return label, members

"""Hamiltonian in the fixed-K basis (matrix-free) and in real space (oracle).

Real-space terms, periodic ring, excitation on site ``m``::

    hopping     -t_e               |m> -> |m+1>, |m-1>
    bosons      hbar*omega_b * (total occupation)
    breathing   g*hbar*omega_b * (B_{m-1} - B_{m+1})
    Peierls     g*hbar*omega_b * (B_{m+1} - B_m)      with |m> -> |m+1>
                g*hbar*omega_b * (B_m - B_{m-1})      with |m> -> |m-1>

with ``B_s = b_s + b_s^+``. Any boson creation that would exceed the total
cutoff ``M`` is dropped, which keeps the truncated matrix Hermitian.

In the K sector the same terms act on the frame attached to the excitation.
A move of the excitation by ``j`` sites relabels the relative boson
coordinates by ``-j`` and picks up ``exp(+i K j)`` (the ``c_{n+1}^+ c_n``
hop carries ``exp(+i K)`` in the Bloch convention of :mod:`.hilbert`)::

    H_K = A_0 + exp(iK) A_{+1} + exp(-iK) A_{-1}
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator

from .hilbert import (
    MAX_DIMENSION,
    DimensionError,
    KSectorBasis,
    RealSpaceBasis,
    build_k_sector_basis,
    build_real_space_basis,
    enumerate_boson_configs,
)
from .model import ModelParams, Quasimomentum

#: Largest K block that :meth:`KBlockOperator.to_dense` materialises by default.
DENSE_THRESHOLD = 2000


def _displace(config: tuple, site: int, cutoff: int):
    """Terms of ``(b_site + b_site^+) |config>`` inside the truncated space."""
    site %= len(config)
    n = config[site]
    out = []
    if n > 0:
        lowered = config[:site] + (n - 1,) + config[site + 1:]
        out.append((lowered, np.sqrt(n)))
    if sum(config) < cutoff:
        raised = config[:site] + (n + 1,) + config[site + 1:]
        out.append((raised, np.sqrt(n + 1)))
    return out


def _roll(config: tuple, shift: int) -> tuple:
    shift %= len(config)
    return config[-shift:] + config[:-shift] if shift else config


@dataclass(frozen=True, eq=False)
class _KStructure:
    """Parameter-free pieces of the K block for one ``(N, M)``."""

    bosons: sp.csr_matrix  # total occupation, diagonal
    breathing: sp.csr_matrix  # j = 0
    hop_plus: sp.csr_matrix
    hop_minus: sp.csr_matrix
    peierls_plus: sp.csr_matrix
    peierls_minus: sp.csr_matrix


@lru_cache(maxsize=16)
def _k_structure(n_sites: int, cutoff: int) -> _KStructure:
    basis = enumerate_boson_configs(n_sites, cutoff)
    d = basis.dimension
    acc = {name: ([], [], []) for name in ("breathing", "hop_plus", "hop_minus", "peierls_plus", "peierls_minus")}

    def add(name, config, value, col, move):
        rows, cols, vals = acc[name]
        rows.append(basis.index_of(_roll(config, -move)))
        cols.append(col)
        vals.append(value)

    for col in range(d):
        c = basis.config_of(col)
        add("hop_plus", c, 1.0, col, +1)
        add("hop_minus", c, 1.0, col, -1)
        for new, amp in _displace(c, -1, cutoff):
            add("breathing", new, amp, col, 0)
        for new, amp in _displace(c, +1, cutoff):
            add("breathing", new, -amp, col, 0)
        for new, amp in _displace(c, +1, cutoff):
            add("peierls_plus", new, amp, col, +1)
        for new, amp in _displace(c, 0, cutoff):
            add("peierls_plus", new, -amp, col, +1)
        for new, amp in _displace(c, 0, cutoff):
            add("peierls_minus", new, amp, col, -1)
        for new, amp in _displace(c, -1, cutoff):
            add("peierls_minus", new, -amp, col, -1)

    mats = {name: sp.csr_matrix((v, (r, c)), shape=(d, d)) for name, (r, c, v) in acc.items()}
    diag = sp.diags(basis.totals.astype(float), format="csr")
    return _KStructure(bosons=diag, **mats)


class KBlockOperator:
    """Matrix-free ``H_K`` on a :class:`KSectorBasis`."""

    def __init__(self, basis: KSectorBasis, params: ModelParams):
        if basis.n_sites != params.n_sites or basis.cutoff != params.boson_cutoff:
            raise ValueError("basis does not match the model parameters")
        self.basis = basis
        self.params = params
        s = _k_structure(params.n_sites, params.boson_cutoff)
        w = params.hbar_omega_b
        gw = params.g * w
        self.diagonal = (w * s.bosons + gw * s.breathing).tocsr()
        self.forward = (-params.t_e * s.hop_plus + gw * s.peierls_plus).tocsr()
        self.backward = (-params.t_e * s.hop_minus + gw * s.peierls_minus).tocsr()
        self.phase_forward = np.exp(1j * basis.k.value)
        self.phase_backward = np.exp(-1j * basis.k.value)

    @classmethod
    def build(cls, params: ModelParams, k: Quasimomentum | int, max_dimension: int = MAX_DIMENSION):
        return cls(build_k_sector_basis(params, k, max_dimension), params)

    @property
    def shape(self) -> tuple[int, int]:
        d = self.basis.dimension
        return (d, d)

    dtype = np.dtype(complex)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return (
            self.diagonal @ v
            + self.phase_forward * (self.forward @ v)
            + self.phase_backward * (self.backward @ v)
        )

    def sparse(self) -> sp.csr_matrix:
        return (
            self.diagonal + self.phase_forward * self.forward + self.phase_backward * self.backward
        ).tocsr()

    def to_dense(self, threshold: int = DENSE_THRESHOLD) -> np.ndarray:
        d = self.basis.dimension
        if d > threshold:
            raise DimensionError(d, threshold)
        return self.sparse().toarray()

    def as_linear_operator(self) -> LinearOperator:
        return LinearOperator(self.shape, matvec=self.matvec, dtype=complex)


def apply_k_block(op: KBlockOperator, v) -> np.ndarray:
    """Return ``H_K v``."""
    v = np.asarray(v)
    if v.shape != (op.basis.dimension,):
        raise ValueError(f"vector has shape {v.shape}, block dimension is {op.basis.dimension}")
    return op.matvec(v)


@dataclass(frozen=True, eq=False)
class RealSpaceOperator:
    """Real symmetric Hamiltonian on :class:`RealSpaceBasis`, split as ``H_0 + H_eb``."""

    basis: RealSpaceBasis
    params: ModelParams
    h0: sp.csr_matrix = field(repr=False)
    heb: sp.csr_matrix = field(repr=False)

    @property
    def matrix(self) -> sp.csr_matrix:
        return (self.h0 + self.heb).tocsr()

    @property
    def shape(self):
        return self.h0.shape


def build_real_space(params: ModelParams, max_dimension: int = MAX_DIMENSION) -> RealSpaceOperator:
    """Assemble the full Hamiltonian in position representation."""
    basis = build_real_space_basis(params, max_dimension)
    m_cut = params.boson_cutoff
    t, w = params.t_e, params.hbar_omega_b
    gw = params.g * w
    h0 = ([], [], [])
    heb = ([], [], [])

    def add(target, site, config, value, col):
        target[0].append(basis.index_of(site, config))
        target[1].append(col)
        target[2].append(value)

    for col in range(basis.dimension):
        site, c = basis.state_of(col)
        add(h0, site, c, w * sum(c), col)
        add(h0, site + 1, c, -t, col)
        add(h0, site - 1, c, -t, col)
        if gw == 0:
            continue
        for new, amp in _displace(c, site - 1, m_cut):
            add(heb, site, new, gw * amp, col)
        for new, amp in _displace(c, site + 1, m_cut):
            add(heb, site, new, -gw * amp, col)
        for new, amp in _displace(c, site + 1, m_cut):
            add(heb, site + 1, new, gw * amp, col)
        for new, amp in _displace(c, site, m_cut):
            add(heb, site + 1, new, -gw * amp, col)
        for new, amp in _displace(c, site, m_cut):
            add(heb, site - 1, new, gw * amp, col)
        for new, amp in _displace(c, site - 1, m_cut):
            add(heb, site - 1, new, -gw * amp, col)

    dim = basis.dimension

    def assemble(parts):
        rows, cols, vals = parts
        return sp.csr_matrix((np.asarray(vals, dtype=float), (rows, cols)), shape=(dim, dim))

    return RealSpaceOperator(basis, params, assemble(h0), assemble(heb))


def bloch_state(basis: RealSpaceBasis, k: Quasimomentum | int) -> np.ndarray:
    """Bare Bloch state ``N^{-1/2} sum_n exp(-i k n) |n> (x) |0>_b`` in real space."""
    if not isinstance(k, Quasimomentum):
        k = Quasimomentum(k, basis.n_sites)
    n = basis.n_sites
    psi = np.zeros(basis.dimension, dtype=complex)
    vac = basis.bosons.index_of((0,) * n)
    for site in range(n):
        psi[site * basis.bosons.dimension + vac] = np.exp(-1j * k.value * site) / np.sqrt(n)
    return psi


def heb_residual_on_bare(params: ModelParams, k: Quasimomentum | int = 0, operator: RealSpaceOperator | None = None) -> float:
    """Norm of ``H_eb`` acting on the bare Bloch state of momentum ``k``.

    Vanishes for ``k = 0`` at every coupling; generically nonzero otherwise.
    """
    if operator is None:
        operator = build_real_space(params)
    return float(np.linalg.norm(operator.heb @ bloch_state(operator.basis, k)))

"""Microwave-driven W-state preparation.

The drive ``Omega(t) = beta(t)/sqrt(N) sum_n (s_n^+ exp(-i q n) + h.c.)`` acts
on the space of zero and one flipped qubits (excitation sectors 0 and 1).
Starting from the vacuum, the drive creates the twisted W state
``|W_N(q)> (x) |0>_b``; for ``q = 0`` that is the bare K = 0 Bloch state.
Two-flip states are outside the simulated space; their coupling to the
target is reported by :func:`out_of_sector_coupling`.

Two representations of the same dynamics are provided:

* ``TwoSectorSpace.k_resolved``: sector 1 is the K = q block, sector 0 the
  translation-symmetric combinations of boson configurations (one per orbit).
  This is the invariant subspace reached from the vacuum.
* ``TwoSectorSpace.real_space``: sector 0 keeps every absolute boson
  configuration and sector 1 the full real-space basis; the drive acts site
  by site at fixed boson configuration. Used as an oracle.

Energies are in model units; ``ModelParams.unit_ghz`` converts them to
angular frequencies, ``omega = 2 pi * unit_ghz * 1e9 * E`` in rad/s.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .hamiltonian import KBlockOperator, build_real_space, bloch_state
from .hilbert import enumerate_boson_configs, translation_orbits
from .model import ModelParams, Quasimomentum
from .solver import krylov_expm

# commutator-free fourth-order Magnus: two Gauss nodes, two exponentials
_C1 = 0.5 - math.sqrt(3.0) / 6.0
_C2 = 0.5 + math.sqrt(3.0) / 6.0
_A1 = (3.0 - 2.0 * math.sqrt(3.0)) / 12.0
_A2 = (3.0 + 2.0 * math.sqrt(3.0)) / 12.0

SHAPES = ("cosine", "rwa")

#: Above this dimension the static RWA problem is propagated with Krylov steps.
DENSE_RWA_LIMIT = 1500


def angular_rate(params: ModelParams) -> float:
    """rad/s per model energy unit."""
    return 2.0 * math.pi * params.unit_ghz * 1e9


def drive_matrix_element(q_d: Quasimomentum | int, k: Quasimomentum | int, n_sites: int) -> complex:
    """``<W_N(k)| Omega_{q_d} |0> / beta(t)`` evaluated as an explicit Bloch sum."""
    q_d = q_d if isinstance(q_d, Quasimomentum) else Quasimomentum(q_d, n_sites)
    k = k if isinstance(k, Quasimomentum) else Quasimomentum(k, n_sites)
    if q_d.n_sites != n_sites or k.n_sites != n_sites:
        raise ValueError("momenta are not on the n_sites grid")
    sites = np.arange(n_sites)
    target = np.exp(-1j * k.value * sites) / math.sqrt(n_sites)
    driven = np.exp(-1j * q_d.value * sites) / math.sqrt(n_sites)
    return complex(np.vdot(target, driven))


def out_of_sector_coupling(n_sites: int, q_d: Quasimomentum | int = 0) -> float:
    """``|| P_2 Omega_{q_d} |W_N(q_d)> || / beta``, the drive strength into two-flip states."""
    q = q_d.value if isinstance(q_d, Quasimomentum) else 2.0 * math.pi * q_d / n_sites
    amp = {}
    for n in range(n_sites):  # W component on qubit n
        for m in range(n_sites):  # flip qubit m
            if m == n:
                continue
            pair = (min(m, n), max(m, n))
            amp[pair] = amp.get(pair, 0.0) + np.exp(-1j * q * n) * np.exp(-1j * q * m) / n_sites
    return float(np.sqrt(sum(abs(a) ** 2 for a in amp.values())))


def prep_time(beta_p: float, params: ModelParams | None = None, unit_ghz: float | None = None) -> float:
    """Preparation time ``pi hbar / (2 beta_p)`` in seconds; ``beta_p`` in model units."""
    if not beta_p > 0:
        raise ValueError("drive amplitude must be positive")
    if unit_ghz is None:
        unit_ghz = params.unit_ghz if params is not None else 1.0
    return math.pi / (2.0 * beta_p * 2.0 * math.pi * unit_ghz * 1e9)


@dataclass(frozen=True)
class DriveParams:
    q_d: int = 0
    beta_p: float = 0.1
    hbar_omega_d: float | None = None  # None: resonant with the target
    shape: str = "cosine"
    detuning: float = 0.0

    def __post_init__(self):
        if self.beta_p < 0:
            raise ValueError("beta_p must be non-negative")
        if self.shape not in SHAPES:
            raise ValueError(f"shape must be one of {SHAPES}, got {self.shape!r}")
        if self.hbar_omega_d is not None and self.shape == "cosine" and not self.hbar_omega_d > 0:
            raise ValueError("drive frequency must be positive")


@dataclass(eq=False)
class TwoSectorSpace:
    """Sectors with zero and one excitation, laid out as ``[sector 0 | sector 1]``."""

    params: ModelParams
    q: Quasimomentum
    h0: sp.csr_matrix = field(repr=False)
    drive: sp.csr_matrix = field(repr=False)  # Hermitian; Omega(t) = beta(t) * drive
    n_zero: int
    vacuum_index: int
    target: np.ndarray = field(repr=False)
    representation: str

    @property
    def dimension(self) -> int:
        return self.h0.shape[0]

    @property
    def one_excitation(self) -> slice:
        return slice(self.n_zero, self.dimension)

    @classmethod
    def k_resolved(cls, params: ModelParams, q_d: int | Quasimomentum = 0) -> TwoSectorSpace:
        q = q_d if isinstance(q_d, Quasimomentum) else Quasimomentum(q_d, params.n_sites)
        block = KBlockOperator.build(params, q)
        bosons = enumerate_boson_configs(params.n_sites, params.boson_cutoff)
        label, orbits = translation_orbits(bosons)
        n_zero = len(orbits)
        d = bosons.dimension
        totals = bosons.totals
        zero_energy = params.hbar_omega_b * np.array([totals[o[0]] for o in orbits], dtype=float)
        h0 = sp.block_diag([sp.diags(zero_energy), block.sparse()], format="csr").astype(complex)
        sizes = np.array([len(o) for o in orbits], dtype=float)
        rows = n_zero + np.arange(d)
        coupling = sp.csr_matrix((1.0 / np.sqrt(sizes[label]), (rows, label)), shape=(n_zero + d, n_zero + d))
        target = np.zeros(n_zero + d, dtype=complex)
        target[n_zero + block.basis.bare_index()] = 1.0
        return cls(params, q, h0, (coupling + coupling.T).tocsr().astype(complex), n_zero, int(label[0]), target, "k")

    @classmethod
    def real_space(cls, params: ModelParams, q_d: int | Quasimomentum = 0) -> TwoSectorSpace:
        q = q_d if isinstance(q_d, Quasimomentum) else Quasimomentum(q_d, params.n_sites)
        op = build_real_space(params)
        basis = op.basis
        n, d = params.n_sites, basis.bosons.dimension
        zero_energy = params.hbar_omega_b * basis.bosons.totals.astype(float)
        h0 = sp.block_diag([sp.diags(zero_energy), op.matrix], format="csr").astype(complex)
        cols = np.tile(np.arange(d), n)
        sites = np.repeat(np.arange(n), d)
        rows = d + sites * d + cols
        vals = np.exp(-1j * q.value * sites) / math.sqrt(n)
        coupling = sp.csr_matrix((vals, (rows, cols)), shape=(d + n * d, d + n * d))
        target = np.concatenate([np.zeros(d, dtype=complex), bloch_state(basis, q)])
        vacuum = basis.bosons.index_of((0,) * n)
        return cls(params, q, h0, (coupling + coupling.conj().T).tocsr(), d, vacuum, target, "real")

    def vacuum_state(self) -> TwoSectorState:
        psi = np.zeros(self.dimension, dtype=complex)
        psi[self.vacuum_index] = 1.0
        return TwoSectorState(self, psi, 0.0)

    def target_state(self) -> TwoSectorState:
        return TwoSectorState(self, self.target.copy(), 0.0)

    def transition_energy(self) -> float:
        """``E_target - E_vacuum`` from the model Hamiltonian."""
        e_t = np.vdot(self.target, self.h0 @ self.target).real
        e_v = self.h0[self.vacuum_index, self.vacuum_index].real
        return float(e_t - e_v)


@dataclass
class TwoSectorState:
    space: TwoSectorSpace
    amplitudes: np.ndarray
    time: float = 0.0

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass
class EvolutionResult:
    times: np.ndarray  # s
    fidelity: np.ndarray
    vacuum_population: np.ndarray
    other_population: np.ndarray  # one-excitation weight outside the target
    norm_drift: np.ndarray
    tau_first_max: float | None  # s
    hbar_omega_d: float
    leakage_coupling_ratio: float  # two-flip drive strength over hbar*omega_d
    final: TwoSectorState = field(repr=False)

    @property
    def times_ns(self) -> np.ndarray:
        return self.times * 1e9


def first_maximum(times: np.ndarray, values: np.ndarray, threshold: float = 0.5) -> float | None:
    """Time of the maximum of the first lobe of ``values`` above ``threshold``.

    Refined by a parabola through the three samples around the discrete peak.
    """
    above = np.flatnonzero(values >= threshold)
    if len(above) == 0:
        return None
    start = above[0]
    stop = start
    while stop + 1 < len(values) and values[stop + 1] >= threshold:
        stop += 1
    i = start + int(np.argmax(values[start : stop + 1]))
    if 0 < i < len(values) - 1:
        y0, y1, y2 = values[i - 1 : i + 2]
        denom = y0 - 2.0 * y1 + y2
        if denom < 0:
            h = times[i + 1] - times[i]
            return float(times[i] + 0.5 * h * (y0 - y2) / denom)
    return float(times[i])


def _norm_estimate(m: sp.spmatrix) -> float:
    # Hermitian: spectral norm <= max absolute row sum
    return float(np.abs(m).sum(axis=1).max()) if m.nnz else 0.0


def evolve(
    initial: TwoSectorState,
    drive: DriveParams,
    t_max: float,
    dt: float,
    record_every: int = 1,
    max_phase_step: float = 0.1,
) -> EvolutionResult:
    """Integrate the driven two-sector dynamics from ``initial``.

    ``shape="cosine"`` uses ``beta(t) = 2 beta_p cos(omega_d t)`` in the frame
    of the model Hamiltonian, integrated with a fourth-order commutator-free
    Magnus scheme and Krylov exponentials. ``shape="rwa"`` drops the
    counter-rotating part: in the frame rotating with the drive the problem is
    static and is propagated exactly through its eigendecomposition.

    Raises
    ------
    ValueError
        If the initial state is not normalised, the drive does not match the
        space, or ``dt`` does not resolve the fastest scale
        (``dt * ||H|| / hbar >= max_phase_step``).
    """
    space = initial.space
    params = space.params
    if drive.q_d % params.n_sites != space.q.index:
        raise ValueError(f"drive momentum {drive.q_d} does not match the space (q index {space.q.index})")
    psi0 = np.asarray(initial.amplitudes, dtype=complex)
    if abs(np.linalg.norm(psi0) - 1.0) > 1e-12:
        raise ValueError(f"initial state is not normalised (norm {np.linalg.norm(psi0)})")
    if not (dt > 0 and t_max >= 0):
        raise ValueError("need dt > 0 and t_max >= 0")
    n_steps = int(round(t_max / dt))
    if abs(n_steps * dt - t_max) > 1e-9 * max(dt, t_max):
        raise ValueError("t_max must be an integer multiple of dt")
    record_every = max(1, int(record_every))

    rate = angular_rate(params)
    transition = space.transition_energy()
    hbar_omega_d = drive.hbar_omega_d if drive.hbar_omega_d is not None else abs(transition)
    hbar_omega_d += drive.detuning
    if drive.shape == "cosine" and not hbar_omega_d > 0:
        raise ValueError("drive frequency must be positive")

    one = np.zeros(space.dimension)
    one[space.one_excitation] = 1.0
    # rotating-frame shift that brings the target onto the vacuum energy
    frame_sign = -1.0 if transition > 0 else 1.0
    if drive.shape == "rwa":
        h_frame = (space.h0 + frame_sign * hbar_omega_d * sp.diags(one) + drive.beta_p * space.drive).tocsr()
        scale = _norm_estimate(h_frame)
    else:
        scale = max(_norm_estimate(space.h0) + 2.0 * drive.beta_p * _norm_estimate(space.drive), hbar_omega_d)
    if dt * rate * scale >= max_phase_step:
        raise ValueError(
            f"dt = {dt:.3g} s is too coarse: dt*||H||/hbar = {dt * rate * scale:.3g} >= {max_phase_step}"
        )

    record_steps = list(range(0, n_steps + 1, record_every))
    if record_steps[-1] != n_steps:
        record_steps.append(n_steps)
    times = initial.time + dt * np.array(record_steps, dtype=float)
    target = space.target
    one_mask = one.astype(bool)

    def observables(psi):
        fid = abs(np.vdot(target, psi)) ** 2
        vac = abs(psi[space.vacuum_index]) ** 2
        other = float(np.sum(np.abs(psi[one_mask]) ** 2) - fid)
        return fid, vac, max(other, 0.0), abs(np.linalg.norm(psi) - 1.0)

    rows = []
    if drive.shape == "rwa" and space.dimension <= DENSE_RWA_LIMIT:
        evals, evecs = np.linalg.eigh(h_frame.toarray())
        coeffs = evecs.conj().T @ psi0
        for t in times - initial.time:
            psi = evecs @ (np.exp(-1j * rate * evals * t) * coeffs)
            rows.append(observables(psi))
    elif drive.shape == "rwa":
        # static frame Hamiltonian: Krylov propagation with phase <= 1 rad per substep
        psi = psi0.copy()
        rows.append(observables(psi))
        substep_max = 1.0 / (rate * max(scale, 1e-300))
        for t_prev, t_next in zip(times[:-1], times[1:]):
            span = t_next - t_prev
            n_sub = max(1, int(math.ceil(span / substep_max)))
            for _ in range(n_sub):
                psi = krylov_expm(h_frame.dot, psi, -1j * rate * span / n_sub)
            rows.append(observables(psi))
    else:
        omega_d = rate * hbar_omega_d
        h0, v = space.h0, space.drive
        psi = psi0.copy()
        rows.append(observables(psi))
        next_record = 1
        t = initial.time
        h = dt
        for step in range(1, n_steps + 1):
            f1 = 2.0 * drive.beta_p * math.cos(omega_d * (t + _C1 * h))
            f2 = 2.0 * drive.beta_p * math.cos(omega_d * (t + _C2 * h))
            for w in (_A2 * f1 + _A1 * f2, _A1 * f1 + _A2 * f2):
                psi = krylov_expm(lambda x, w=w: 0.5 * (h0 @ x) + w * (v @ x), psi, -1j * rate * h)
            t = initial.time + step * h
            if next_record < len(record_steps) and step == record_steps[next_record]:
                rows.append(observables(psi))
                next_record += 1

    if drive.shape == "rwa":
        # back to the lab frame at the final time
        t_end = times[-1] - initial.time
        psi = psi * np.where(one_mask, np.exp(1j * frame_sign * rate * hbar_omega_d * t_end), 1.0)
    fid, vac, other, drift = (np.array(col) for col in zip(*rows))
    return EvolutionResult(
        times=times,
        fidelity=fid,
        vacuum_population=vac,
        other_population=other,
        norm_drift=drift,
        tau_first_max=first_maximum(times, fid),
        hbar_omega_d=hbar_omega_d,
        leakage_coupling_ratio=drive.beta_p * out_of_sector_coupling(params.n_sites, space.q) / hbar_omega_d
        if hbar_omega_d
        else math.inf,
        final=TwoSectorState(space, psi, float(times[-1])),
    )

"""K-resolved spectra, the bare/polaron level crossing and W-state overlaps."""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .circuit import CircuitParams, flux_for_lambda, model_at_lambda
from .hamiltonian import KBlockOperator
from .hilbert import KSectorBasis, RealSpaceBasis
from .model import ModelParams, Quasimomentum, effective_lambda
from .solver import ConvergenceError, LanczosConfig, dense_ground_state, lanczos_extremal

#: Relative tolerance below which two sector minima count as degenerate.
DEGENERACY_RTOL = 1e-9


@dataclass
class SectorResult:
    k: Quasimomentum
    energies: np.ndarray
    residue: float
    ground_vector: np.ndarray | None = field(default=None, repr=False)
    converged: bool = True


@dataclass
class SpectrumResult:
    params: ModelParams
    sectors: list[SectorResult]
    k_gs: Quasimomentum
    E_gs: float
    gap: float  # lowest excitation over all sectors
    gap_k0: float  # lowest excitation inside the K = 0 sector
    lambda_eb: float

    def sector(self, k: int | Quasimomentum) -> SectorResult:
        index = k.index if isinstance(k, Quasimomentum) else int(k) % self.params.n_sites
        return self.sectors[index]

    @property
    def residue_gs(self) -> float:
        return self.sector(self.k_gs).residue

    def sector_difference(self) -> float:
        """``E(K=0) - min_{K!=0} E(K)``; negative while the bare state is the ground state."""
        e0 = self.sectors[0].energies[0]
        others = [s.energies[0] for s in self.sectors[1:]]
        return float(e0 - min(others))


def _default_threads(threads):
    if threads is None:
        return os.cpu_count() or 1
    return max(1, int(threads))


def _solve_sector(params: ModelParams, k: Quasimomentum, cfg: LanczosConfig, keep_vector: bool) -> SectorResult:
    op = KBlockOperator.build(params, k)
    n_pairs = min(cfg.n_eigenpairs, op.basis.dimension)
    converged = True
    if op.basis.dimension <= max(3 * n_pairs, 8):
        result = dense_ground_state(op.to_dense(), n_pairs)
    else:
        try:
            result = lanczos_extremal(op, cfg.replace(n_eigenpairs=n_pairs))
        except ConvergenceError as err:
            if err.result is None:
                raise
            result, converged = err.result, False
    vec = result.eigenvectors[:, 0]
    residue = float(min(1.0, abs(vec[op.basis.bare_index()]) ** 2))
    return SectorResult(k, result.eigenvalues.copy(), residue, vec if keep_vector else None, converged)


def sector_scan(
    params: ModelParams,
    cfg: LanczosConfig = LanczosConfig(),
    threads: int | None = None,
    keep_vectors: bool = False,
    min_pairs: int = 2,
) -> SpectrumResult:
    """Lowest eigenvalues of every K block and the derived ground-state data.

    Each block is solved for at least ``min_pairs`` levels so the first
    excited state is always available. The residue ``Z_K`` is the weight of
    the sector ground state on the bare Bloch state.
    """
    cfg = cfg.replace(n_eigenpairs=max(cfg.n_eigenpairs, min_pairs))
    momenta = params.momenta()
    workers = min(_default_threads(threads), len(momenta))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            sectors = list(pool.map(lambda k: _solve_sector(params, k, cfg, keep_vectors), momenta))
    else:
        sectors = [_solve_sector(params, k, cfg, keep_vectors) for k in momenta]

    minima = np.array([s.energies[0] for s in sectors])
    e_gs = float(minima.min())
    tie = DEGENERACY_RTOL * max(1.0, abs(e_gs))
    candidates = [s.k for s in sectors if s.energies[0] - e_gs <= tie]
    # among degenerate partners report the one with the smallest positive signed index
    k_gs = min(candidates, key=lambda k: (abs(k.signed_index), -k.signed_index))

    levels = np.sort(np.concatenate([s.energies for s in sectors]))
    gap = float(levels[1] - levels[0]) if len(levels) > 1 else math.inf
    k0 = sectors[0].energies
    gap_k0 = float(k0[1] - k0[0]) if len(k0) > 1 else math.inf
    return SpectrumResult(params, sectors, k_gs, e_gs, max(gap, 0.0), max(gap_k0, 0.0), effective_lambda(params))


class NoBracketError(ValueError):
    """The control grid shows no sign change of the sector-energy difference."""

    def __init__(self, message: str, diagnostics: dict):
        super().__init__(message)
        self.diagnostics = diagnostics


@dataclass
class CrossingResult:
    lambda_c: float
    bracket: tuple[float, float]
    control_c: float
    control_name: str
    resolution: float
    phi_dc_over_pi: float | None = None
    evaluations: list[tuple[float, float]] = field(default_factory=list, repr=False)


def find_critical_coupling(
    grid: Sequence[float],
    params_at: Callable[[float], ModelParams],
    cfg: LanczosConfig = LanczosConfig(),
    tolerance: float = 1e-4,
    threads: int | None = None,
    control_name: str = "lambda",
) -> CrossingResult:
    """Locate the level crossing between the bare K = 0 state and the K != 0 polaron.

    ``params_at`` maps a control value (lambda, flux, ...) to model
    parameters. The grid is scanned for the first sign change of
    ``E(K=0) - min_{K!=0} E(K)``, then the bracket is bisected down to
    ``tolerance`` in the control variable.
    """
    cfg = cfg.replace(n_eigenpairs=1)
    evaluations = []

    def difference(x):
        spec = sector_scan(params_at(x), cfg, threads=threads, min_pairs=1)
        d = spec.sector_difference()
        evaluations.append((float(x), d))
        return d

    grid = list(grid)
    if len(grid) < 2:
        raise ValueError("need at least two grid points")
    values = [difference(x) for x in grid]
    for (x0, d0), (x1, d1) in zip(zip(grid, values), zip(grid[1:], values[1:])):
        if d0 < 0 <= d1 or d0 >= 0 > d1:
            lo, hi, f_lo = x0, x1, d0
            break
    else:
        raise NoBracketError(
            "no level crossing inside the grid",
            {"first": (grid[0], values[0]), "last": (grid[-1], values[-1])},
        )

    while abs(hi - lo) > tolerance:
        mid = 0.5 * (lo + hi)
        f_mid = difference(mid)
        if (f_mid < 0) == (f_lo < 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    x_c = 0.5 * (lo + hi)
    lam_c = effective_lambda(params_at(x_c))
    return CrossingResult(lam_c, (lo, hi), x_c, control_name, abs(hi - lo), evaluations=evaluations)


def critical_coupling_from_circuit(
    cp: CircuitParams,
    n_sites: int,
    boson_cutoff: int,
    lambda_grid: Sequence[float] = tuple(np.linspace(0.5, 1.0, 6)),
    cfg: LanczosConfig = LanczosConfig(),
    tolerance: float = 1e-4,
    threads: int | None = None,
) -> CrossingResult:
    """Crossing along the dc-flux sweep of a circuit, with the flux reported too."""
    result = find_critical_coupling(
        lambda_grid,
        lambda lam: model_at_lambda(cp, lam, n_sites, boson_cutoff),
        cfg,
        tolerance,
        threads,
    )
    result.phi_dc_over_pi = flux_for_lambda(cp, result.lambda_c) / math.pi
    return result


def w_state_overlap(vector, basis: KSectorBasis | RealSpaceBasis) -> float:
    """Weight ``|<W_N (x) 0_b | v>|^2`` of a normalised state."""
    vector = np.asarray(vector)
    if vector.shape != (basis.dimension,):
        raise ValueError(f"vector has shape {vector.shape}, basis dimension is {basis.dimension}")
    if isinstance(basis, KSectorBasis):
        if basis.k.index != 0:
            return 0.0
        return float(abs(vector[basis.bare_index()]) ** 2)
    n = basis.n_sites
    d_b = basis.bosons.dimension
    vac = basis.bosons.index_of((0,) * n)
    amp = vector[vac::d_b].sum() / math.sqrt(n)
    return float(abs(amp) ** 2)

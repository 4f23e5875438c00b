"""Extremal eigenpairs of Hermitian operators.

:func:`lanczos_extremal` runs Lanczos with full reorthogonalisation and finds
the lowest few eigenpairs one at a time, each run deflated against the pairs
already locked. Deflation gives correct multiplicities for degenerate levels,
which a single Krylov sequence cannot resolve. :func:`dense_ground_state` is
the full-spectrum oracle. :func:`krylov_expm` reuses the same recursion for
short-time propagators.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.sparse.linalg import aslinearoperator

#: Largest matrix handed to the dense eigensolver by default.
DENSE_BOUND = 6000


class ConvergenceError(RuntimeError):
    """Lanczos did not reach the residual tolerance."""

    def __init__(self, message: str, result: EigenResult | None = None):
        super().__init__(message)
        self.result = result


@dataclass(frozen=True)
class LanczosConfig:
    max_iterations: int = 600
    tolerance: float = 1e-10
    reorthogonalization: str = "full"
    n_eigenpairs: int = 1
    seed: int = 0

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.n_eigenpairs < 1:
            raise ValueError("n_eigenpairs must be >= 1")
        if self.max_iterations < self.n_eigenpairs:
            raise ValueError("max_iterations must be >= n_eigenpairs")
        if self.reorthogonalization not in ("full", "none"):
            raise ValueError(f"unknown reorthogonalization {self.reorthogonalization!r}")

    def replace(self, **changes) -> LanczosConfig:
        return LanczosConfig(**{**self.__dict__, **changes})


@dataclass
class EigenResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns
    residuals: np.ndarray
    iterations: int = 0
    ritz_history: list = field(default_factory=list, repr=False)

    @property
    def ground_energy(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def ground_state(self) -> np.ndarray:
        return self.eigenvectors[:, 0]


def _as_operator(op):
    if hasattr(op, "as_linear_operator"):
        return op.as_linear_operator()
    return aslinearoperator(op)


def _orthogonalize(w, basis):
    # classical Gram-Schmidt applied twice
    if basis is None or basis.shape[1] == 0:
        return w
    for _ in range(2):
        w = w - basis @ (basis.conj().T @ w)
    return w


def _lowest_in_complement(matvec, dim, dtype, locked, cfg, rng):
    """One deflated Lanczos run; returns (value, vector, residual, iterations, history)."""
    eps = np.finfo(float).eps
    start = rng.standard_normal(dim)
    if np.issubdtype(dtype, np.complexfloating):
        start = start + 1j * rng.standard_normal(dim)
    start = _orthogonalize(start.astype(dtype), locked)
    v = start / np.linalg.norm(start)

    capacity = min(cfg.max_iterations, dim - (0 if locked is None else locked.shape[1]))
    V = np.zeros((dim, capacity), dtype=dtype)
    alphas, betas = [], []
    history = []
    v_prev = None
    beta_prev = 0.0
    theta, y = None, None
    for j in range(capacity):
        V[:, j] = v
        w = matvec(v)
        w = _orthogonalize(w, locked)
        alpha = np.vdot(v, w).real
        w = w - alpha * v
        if v_prev is not None:
            w = w - beta_prev * v_prev
        if cfg.reorthogonalization == "full":
            w = _orthogonalize(w, V[:, : j + 1])
        beta = np.linalg.norm(w)
        alphas.append(alpha)

        evals, evecs = scipy.linalg.eigh_tridiagonal(
            np.array(alphas), np.array(betas), select="i", select_range=(0, 0)
        )
        theta, y = evals[0], evecs[:, 0]
        history.append(theta)
        estimate = beta * abs(y[-1])
        scale = max(1.0, abs(theta))
        exhausted = j + 1 == capacity
        if estimate <= cfg.tolerance * scale or exhausted:
            vec = V[:, : j + 1] @ y
            vec /= np.linalg.norm(vec)
            residual = np.linalg.norm(_orthogonalize(matvec(vec), locked) - theta * vec)
            if residual <= cfg.tolerance * scale or exhausted:
                return theta, vec, residual, j + 1, history

        if beta <= 1e3 * eps * max(scale, 1.0):
            # invariant subspace: continue from a fresh direction orthogonal to it
            fresh = rng.standard_normal(dim).astype(dtype)
            if np.issubdtype(dtype, np.complexfloating):
                fresh = fresh + 1j * rng.standard_normal(dim)
            fresh = _orthogonalize(_orthogonalize(fresh, locked), V[:, : j + 1])
            v_prev, v = v, fresh / np.linalg.norm(fresh)
            betas.append(0.0)
            beta_prev = 0.0
            continue
        betas.append(beta)
        v_prev, v = v, w / beta
        beta_prev = beta

    vec = V[:, :capacity] @ y
    vec /= np.linalg.norm(vec)
    residual = np.linalg.norm(_orthogonalize(matvec(vec), locked) - theta * vec)
    return theta, vec, residual, capacity, history


def lanczos_extremal(op, cfg: LanczosConfig = LanczosConfig()) -> EigenResult:
    """Lowest ``cfg.n_eigenpairs`` eigenpairs of a Hermitian operator.

    ``op`` may be a dense or sparse matrix, a ``LinearOperator`` or anything
    with an ``as_linear_operator`` method. Results are deterministic in
    ``cfg.seed``.

    Raises
    ------
    ConvergenceError
        If some pair misses the residual bound after ``cfg.max_iterations``;
        the best available pairs are attached as ``err.result``.
    """
    lin = _as_operator(op)
    dim = lin.shape[0]
    if lin.shape != (dim, dim):
        raise ValueError(f"operator must be square, got {lin.shape}")
    if dim < cfg.n_eigenpairs:
        raise ValueError(f"operator dimension {dim} is smaller than the {cfg.n_eigenpairs} requested pairs")
    dtype = np.result_type(lin.dtype, np.float64)
    matvec = lin.matvec

    values, vectors, residuals, history = [], [], [], []
    locked = None
    iterations = 0
    for i in range(cfg.n_eigenpairs):
        rng = np.random.default_rng([cfg.seed, i])
        theta, vec, res, its, hist = _lowest_in_complement(matvec, dim, dtype, locked, cfg, rng)
        values.append(theta)
        vectors.append(vec)
        residuals.append(res)
        history.append(hist)
        iterations += its
        locked = np.column_stack(vectors)

    order = np.argsort(values, kind="stable")
    result = EigenResult(
        eigenvalues=np.asarray(values)[order],
        eigenvectors=np.column_stack(vectors)[:, order],
        residuals=np.asarray(residuals)[order],
        iterations=iterations,
        ritz_history=[history[k] for k in order],
    )
    bad = result.residuals > cfg.tolerance * np.maximum(1.0, np.abs(result.eigenvalues))
    if np.any(bad):
        raise ConvergenceError(
            f"Lanczos did not converge: residuals {result.residuals[bad]} after {iterations} iterations",
            result,
        )
    return result


def dense_ground_state(matrix, n_eigenpairs: int | None = None, bound: int = DENSE_BOUND) -> EigenResult:
    """Full Hermitian eigendecomposition; returns every pair unless ``n_eigenpairs`` is given."""
    if hasattr(matrix, "toarray"):
        dim = matrix.shape[0]
        if dim > bound:
            raise ValueError(f"dimension {dim} exceeds the dense bound {bound}")
        matrix = matrix.toarray()
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"matrix must be square, got {matrix.shape}")
    if matrix.shape[0] > bound:
        raise ValueError(f"dimension {matrix.shape[0]} exceeds the dense bound {bound}")
    evals, evecs = np.linalg.eigh(matrix)
    if n_eigenpairs is not None:
        evals, evecs = evals[:n_eigenpairs], evecs[:, :n_eigenpairs]
    residuals = np.linalg.norm(matrix @ evecs - evecs * evals, axis=0)
    return EigenResult(evals, evecs, residuals, iterations=0)


def krylov_expm(matvec, v: np.ndarray, tau: complex, tol: float = 1e-13, max_dim: int = 60) -> np.ndarray:
    """Approximate ``exp(tau * H) v`` for Hermitian ``H`` on a Lanczos subspace.

    For imaginary ``tau`` the returned vector has the norm of ``v`` up to the
    orthogonality of the Krylov basis, independently of the truncation error.
    """
    norm = np.linalg.norm(v)
    if norm == 0:
        return v.copy()
    dim = v.shape[0]
    m_max = min(max_dim, dim)
    V = np.zeros((dim, m_max), dtype=complex)
    V[:, 0] = v / norm
    alphas, betas = [], []
    beta = 0.0
    for j in range(m_max):
        w = matvec(V[:, j])
        alpha = np.vdot(V[:, j], w).real
        w = w - alpha * V[:, j]
        if j > 0:
            w = w - betas[-1] * V[:, j - 1]
        w = _orthogonalize(w, V[:, : j + 1])
        beta = np.linalg.norm(w)
        alphas.append(alpha)
        evals, evecs = scipy.linalg.eigh_tridiagonal(np.array(alphas), np.array(betas))
        coeffs = evecs @ (np.exp(tau * evals) * evecs[0].conj())
        if beta * abs(coeffs[-1]) < tol or j + 1 == m_max or beta < 1e-14:
            break
        betas.append(beta)
        V[:, j + 1] = w / beta
    return norm * (V[:, : len(alphas)] @ coeffs)

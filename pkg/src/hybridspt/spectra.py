"""Lowest-eigenpair solvers and truncation-convergence control."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from math import ceil
from typing import Callable

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConvergenceFailure, NotHermitian, ShapeError
from .hilbert import HilbertSpace, SparseOperator

log = logging.getLogger(__name__)

DENSE_THRESHOLD = 4096
RESIDUAL_TOL = 1e-8
CLUSTER_TOL = 1e-6


@dataclass(frozen=True)
class SpectrumResult:
    """Lowest ``k`` eigenpairs of a truncated Hamiltonian.

    ``eigenvectors`` has shape ``(dim, k)``; column ``i`` pairs with
    ``eigenvalues[i]``.  ``displacement`` is the real shift ``b -> b + beta``
    applied to the first bosonic mode before truncation (0 if none).
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    space: HilbertSpace | None = None
    solver: str = "dense"
    residual: float = 0.0
    converged: bool = True
    convergence_metric: float = 0.0
    displacement: float = 0.0
    history: tuple = field(default=(), repr=False)

    @property
    def truncation_dims(self) -> tuple[int, ...]:
        return self.space.boson_dims if self.space is not None else ()

    @property
    def gap(self) -> float:
        if len(self.eigenvalues) < 2:
            return float("nan")
        return float(self.eigenvalues[1] - self.eigenvalues[0])

    @property
    def ground_energy(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def ground_state(self) -> np.ndarray:
        return self.eigenvectors[:, 0]

    def state(self, i: int) -> np.ndarray:
        return self.eigenvectors[:, i]


@dataclass(frozen=True)
class TruncatedProblem:
    """What a cutoff-parameterized builder hands to :func:`converge_truncation`."""

    hamiltonian: SparseOperator
    space: HilbertSpace
    symmetry: SparseOperator | None = None
    displacement: float = 0.0


def _real_if_possible(m):
    if m.dtype.kind == "c" and not np.any(m.data.imag):
        return m.real
    return m


def diagonalize(H: SparseOperator, k: int = 2, *, symmetry: SparseOperator | None = None,
                space: HilbertSpace | None = None, dense_threshold: int = DENSE_THRESHOLD,
                method: str | None = None, maxiter: int | None = None,
                ncv: int | None = None) -> SpectrumResult:
    """Lowest ``k`` eigenpairs of a Hermitian operator.

    Dense LAPACK below ``dense_threshold`` (total dimension), restarted Lanczos
    above it.  When a diagonal ``symmetry`` (entries +-1) is given, the
    returned vectors are made symmetry-definite: near-degenerate clusters are
    rotated to diagonalize the symmetry, each vector is projected onto its
    sector and a Rayleigh-Ritz step is done per sector.
    """
    if not H.hermitian:
        raise NotHermitian("diagonalize needs a Hermitian operator")
    dim = H.dim
    if not 1 <= k <= dim:
        raise ShapeError(f"k = {k} outside 1..{dim}")
    if space is not None and space.total_dim != dim:
        raise ShapeError("space does not match operator dimension")
    if method is None:
        method = "dense" if dim <= dense_threshold else "iterative"
    k_int = min(dim, k + 2) if symmetry is not None else k

    if method == "dense":
        vals, vecs = _dense(H, k_int)
    elif method == "iterative":
        vals, vecs = _iterative(H, k_int, maxiter=maxiter, ncv=ncv)
    else:
        raise ValueError(f"unknown method {method!r}")

    if symmetry is not None:
        vals, vecs = _symmetrize(H, vals, vecs, symmetry)
    vals, vecs = vals[:k], vecs[:, :k].astype(complex)
    resid = _residuals(H, vals, vecs)
    bound = RESIDUAL_TOL * np.maximum(1.0, np.abs(vals))
    worst = float(np.max(resid / bound)) if len(vals) else 0.0
    if worst > 1.0:
        raise ConvergenceFailure(
            f"eigenpair residual {float(np.max(resid)):.3e} exceeds contract", residual=float(np.max(resid)))
    return SpectrumResult(eigenvalues=vals, eigenvectors=vecs, space=space, solver=method,
                          residual=float(np.max(resid)))


def _dense(H: SparseOperator, k: int):
    A = _real_if_possible(H.matrix).toarray()
    vals, vecs = scipy.linalg.eigh(A, subset_by_index=[0, k - 1], driver="evr")
    return vals, vecs


def _iterative(H: SparseOperator, k: int, maxiter=None, ncv=None):
    A = _real_if_possible(H.matrix)
    dim = A.shape[0]
    v0 = np.ones(dim) / np.sqrt(dim)
    if ncv is None:
        ncv = min(dim, max(2 * k + 1, 40))
    try:
        vals, vecs = spla.eigsh(A, k=k, which="SA", v0=v0, tol=0, ncv=ncv,
                                maxiter=maxiter or 100 * dim)
    except spla.ArpackNoConvergence as exc:
        raise ConvergenceFailure(f"Lanczos did not converge: {exc}") from exc
    order = np.argsort(vals)
    return vals[order], vecs[:, order]


def _symmetrize(H, vals, vecs, symmetry):
    d = symmetry.matrix.diagonal().real
    off = symmetry.matrix - sp.diags(symmetry.matrix.diagonal(), 0, format="csr")
    if off.count_nonzero() or not np.all(np.abs(np.abs(d) - 1) < 1e-12):
        raise ValueError("symmetry operator must be diagonal with entries +-1")
    vecs = vecs.astype(complex)
    # rotate inside near-degenerate clusters
    i, n = 0, len(vals)
    while i < n:
        j = i + 1
        while j < n and vals[j] - vals[j - 1] <= CLUSTER_TOL * max(1.0, abs(vals[i])):
            j += 1
        if j - i > 1:
            block = vecs[:, i:j]
            s = block.conj().T @ (d[:, None] * block)
            _, u = np.linalg.eigh(0.5 * (s + s.conj().T))
            vecs[:, i:j] = block @ u
        i = j
    # project onto sectors and redo Rayleigh-Ritz per sector
    sector = np.sign(np.real(np.einsum("ij,i,ij->j", vecs.conj(), d, vecs)))
    out_vals, out_vecs = [], []
    for s_val in (1.0, -1.0):
        cols = np.where(sector == s_val)[0]
        if not len(cols):
            continue
        mask = (d == s_val)[:, None]
        V = np.where(mask, vecs[:, cols], 0.0)
        Q, _ = np.linalg.qr(V)
        h = Q.conj().T @ (H.matrix @ Q)
        w, u = np.linalg.eigh(0.5 * (h + h.conj().T))
        out_vals.append(w)
        out_vecs.append(Q @ u)
    vals = np.concatenate(out_vals)
    vecs = np.concatenate(out_vecs, axis=1)
    order = np.argsort(vals, kind="stable")
    return vals[order], vecs[:, order]


def _residuals(H, vals, vecs):
    R = H.matrix @ vecs - vecs * vals[None, :]
    return np.linalg.norm(R, axis=0)


def converge_truncation(builder: Callable[[int], TruncatedProblem],
                        observable: Callable[[SpectrumResult], float], *,
                        tol: float = 1e-6, initial_cutoff: int = 20, growth: float = 1.5,
                        ceiling: int = 16384, k: int = 2, **diag_kwargs) -> SpectrumResult:
    """Grow the boson cutoff until ``observable`` settles to relative ``tol``.

    Returns the result at the last cutoff.  If the ceiling is reached first the
    result carries ``converged=False``; it is never silently accepted.
    ``history`` holds ``(cutoff, observable, ground_energy)`` per step.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if growth <= 1:
        raise ValueError("growth factor must exceed 1")
    cutoff = max(2, int(initial_cutoff))
    history = []
    prev = None
    while True:
        prob = builder(cutoff)
        res = diagonalize(prob.hamiltonian, k, symmetry=prob.symmetry, space=prob.space,
                          **diag_kwargs)
        res = replace(res, displacement=prob.displacement)
        val = float(observable(res))
        history.append((cutoff, val, res.ground_energy))
        if prev is not None:
            delta = abs(val - prev)
            metric = 0.0 if delta == 0 else (delta / abs(val) if val else float("inf"))
            if metric <= tol:
                return replace(res, converged=True, convergence_metric=metric,
                               history=tuple(history))
        else:
            metric = float("inf")
        if cutoff >= ceiling:
            log.warning("cutoff ceiling %d reached without convergence (metric %.3g)", ceiling, metric)
            return replace(res, converged=False, convergence_metric=metric, history=tuple(history))
        prev = val
        cutoff = min(ceiling, int(ceil(cutoff * growth)))


def detect_degeneracy(result: SpectrumResult, rel_tol: float = 1e-3,
                      energy_scale: float = 1.0) -> int:
    """Number of levels within ``rel_tol * energy_scale`` of the ground energy."""
    vals = np.asarray(result.eigenvalues)
    return int(np.sum(vals - vals[0] <= rel_tol * energy_scale))

"""Order parameters from eigenvectors: occupation, g2(0), coherence, parity, quadrature moments.

All mode observables go through :func:`mode_operator`, which returns the
physical lowering operator of a bosonic mode as a sparse matrix on the
truncated space::

    b_phys = cosh(r) (b + beta) - sinh(r) (b^dag + beta)

``beta`` undoes a pre-displacement of the Hamiltonian and ``r`` maps the
squeezed-frame mode to the lab frame (``r = 0`` keeps the squeezed frame).
The map is applied as a Bogoliubov combination rather than by conjugating
with a truncated squeeze matrix, so it adds no truncation error of its own.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from math import comb, cosh, sinh

import numpy as np
import scipy.sparse as sp

from . import analytic
from . import hilbert as hs
from .errors import InvalidOrder, ShapeError, SymmetryError
from .hilbert import HilbertSpace, SparseOperator
from .model import SqueezedFrame

log = logging.getLogger(__name__)

OCCUPATION_FLOOR = 1e-6
COHERENT_TOL = 0.05


def expectation(state: np.ndarray, op: SparseOperator | sp.spmatrix) -> complex:
    """``<psi|op|psi>``; renormalizes with a warning if the norm is off by < 1e-6."""
    m = op.matrix if isinstance(op, SparseOperator) else op
    state = np.asarray(state)
    if state.shape != (m.shape[0],):
        raise ShapeError(f"state of shape {state.shape} vs operator dim {m.shape[0]}")
    state = _normalized(state)
    return complex(np.vdot(state, m @ state))


def _normalized(state):
    nrm = np.linalg.norm(state)
    if abs(nrm - 1) > 1e-6:
        raise ValueError(f"state norm {nrm} is not 1")
    if abs(nrm - 1) > 1e-12:
        log.warning("renormalizing state with norm %.12f", nrm)
        state = state / nrm
    return state


def mode_operator(space: HilbertSpace, mode: int = 0, *, shift: float = 0.0,
                  frame_r: float = 0.0) -> sp.csr_matrix:
    b = hs.embed(space, space.boson_slot(mode), hs.annihilation(space.boson_dims[mode])).matrix
    ident = sp.identity(space.total_dim, format="csr", dtype=complex)
    bs = b + shift * ident
    if frame_r == 0.0:
        return bs.tocsr()
    return (cosh(frame_r) * bs - sinh(frame_r) * bs.conj().T).tocsr()


@dataclass(frozen=True)
class CorrelationReport:
    n_mean: float
    g2: float
    coherence: complex
    parity: float
    phase_label: str
    occupation_guard_triggered: bool
    n2_factorial: float = 0.0  # <b^dag b^dag b b>


def g2_numeric(state: np.ndarray, space: HilbertSpace, mode: int = 0, *, shift: float = 0.0,
               frame_r: float = 0.0, occupation_floor: float = OCCUPATION_FLOOR,
               coherent_tol: float = COHERENT_TOL) -> CorrelationReport:
    """Phonon statistics of ``state``.

    ``phase_label`` here is the statistical verdict only: ``SP`` when
    ``|g2 - 1| < coherent_tol`` (Poissonian), ``NP`` otherwise (bunched), and
    ``UNDEFINED`` when the occupation is below ``occupation_floor``.
    """
    state = np.asarray(state)
    if state.shape != (space.total_dim,):
        raise ShapeError("state does not live on the given space")
    state = _normalized(state)
    b = mode_operator(space, mode, shift=shift, frame_r=frame_r)
    bv = b @ state
    bbv = b @ bv
    n = float(np.vdot(bv, bv).real)
    n2 = float(np.vdot(bbv, bbv).real)
    coh = complex(np.vdot(state, bv))
    par = float(np.real(np.vdot(state, hs.parity_operator(space).matrix @ state)))
    if n < occupation_floor:
        return CorrelationReport(n, float("nan"), coh, par, "UNDEFINED", True, n2)
    g2 = n2 / n ** 2
    label = "SP" if abs(g2 - 1) < coherent_tol else "NP"
    return CorrelationReport(n, g2, coh, par, label, False, n2)


def factorial_moment_from_distribution(state: np.ndarray, space: HilbertSpace, mode: int = 0) -> float:
    """``<n(n-1)>`` from the Fock-number distribution of one mode."""
    amps = np.asarray(state).reshape(space.factor_dims)
    axis = space.boson_slot(mode)
    probs = np.moveaxis(np.abs(amps) ** 2, axis, 0).reshape(space.boson_dims[mode], -1).sum(axis=1)
    n = np.arange(space.boson_dims[mode])
    return float(np.sum(probs * n * (n - 1)))


@dataclass(frozen=True)
class BrokenPair:
    plus: np.ndarray
    minus: np.ndarray
    coherence_plus: complex
    coherence_minus: complex


def symmetry_broken_pair(v0: np.ndarray, v1: np.ndarray, space: HilbertSpace, mode: int = 0, *,
                         shift: float = 0.0, frame_r: float = 0.0) -> BrokenPair:
    """``|+-> = (v0 +- e^{i phi} v1)/sqrt 2`` with phi fixed so ``<+|(b + b^dag)|+> >= 0``."""
    par = hs.parity_operator(space).matrix
    p0 = np.vdot(v0, par @ v0).real
    p1 = np.vdot(v1, par @ v1).real
    if abs(abs(p0) - 1) > 1e-6 or abs(abs(p1) - 1) > 1e-6:
        raise SymmetryError("inputs must be parity eigenstates")
    if p0 * p1 > 0:
        raise SymmetryError("inputs have the same parity")
    b = mode_operator(space, mode, shift=shift, frame_r=frame_r)
    # opposite parities: only the cross terms of b survive in <+|b|+>
    c01 = np.vdot(v0, b @ v1)
    c10 = np.vdot(v1, b @ v0)
    phi = -np.angle(c01 + np.conj(c10)) if abs(c01 + np.conj(c10)) > 0 else 0.0
    plus = (v0 + np.exp(1j * phi) * v1) / np.sqrt(2)
    minus = (v0 - np.exp(1j * phi) * v1) / np.sqrt(2)
    return BrokenPair(plus, minus, complex(np.vdot(plus, b @ plus)), complex(np.vdot(minus, b @ minus)))


@dataclass(frozen=True)
class QuadratureMoments:
    orders: tuple[int, ...]
    moments: dict[int, float]
    thresholds: dict[int, float]
    frame: str
    mean_P: float
    variance_check: float
    normal_ordered: dict[int, float] = field(default_factory=dict)
    bch: dict[int, float] = field(default_factory=dict)

    @property
    def squeezed(self) -> dict[int, bool]:
        return {N: self.moments[N] < self.thresholds[N] for N in self.orders}

    def ratio(self, N: int) -> float:
        return self.moments[N] / self.thresholds[N]


def quadrature_moments(state: np.ndarray, space: HilbertSpace, mode: int = 0,
                       orders=(2, 4, 6, 8), *, frame: str = "squeezed", frame_r: float = 0.0,
                       shift: float = 0.0, cross_check: bool = True) -> QuadratureMoments:
    """Central moments ``<(dP)^N>`` with ``P = (b - b^dag)/(2i)``.

    The direct path applies ``dP`` N times to the state.  With ``cross_check``
    the normal-ordered moments are computed on an independent path and fed to
    the BCH expansion; both are kept on the result.
    """
    orders = tuple(int(N) for N in orders)
    for N in orders:
        if N < 2 or N % 2:
            raise InvalidOrder(f"quadrature moments need even orders >= 2, got {N}")
    if frame not in ("squeezed", "lab"):
        raise ValueError(f"unknown frame {frame!r}")
    r = frame_r if frame == "lab" else 0.0
    state = _normalized(np.asarray(state))
    b = mode_operator(space, mode, shift=shift, frame_r=r)
    bd = b.conj().T.tocsr()
    P = (b - bd) / 2j
    mean_p = float(np.vdot(state, P @ state).real)

    moments = {}
    w = state.copy()
    for n in range(1, max(orders) + 1):
        w = P @ w - mean_p * w
        if n in orders:
            moments[n] = float(np.vdot(state, w).real)
    Pv = P @ state
    var_check = float(np.vdot(Pv, Pv).real - mean_p ** 2)

    normal, bch = {}, {}
    if cross_check:
        normal = normal_ordered_moments(state, b, max(orders))
        for N in orders:
            if N <= analytic.MAX_ORDER:
                bch[N] = analytic.bch_moment_expansion(normal, N)
    thresholds = {N: analytic.coherent_threshold(N) for N in orders}
    return QuadratureMoments(orders, moments, thresholds, frame, mean_p, var_check, normal, bch)


def normal_ordered_moments(state: np.ndarray, b: sp.spmatrix, max_order: int) -> dict[int, float]:
    """``<:(dP)^j:>`` for j = 1..max_order from ``<d^dag^l d^(j-l)>``, ``d = b - <b>``.

    ``:(dP)^j: = sum_l C(j, l) mu^l lam^(j-l) d^dag^l d^(j-l)`` with
    ``dP = lam d + mu d^dag``, ``lam = 1/(2i)``, ``mu = -1/(2i)``.
    """
    beta = np.vdot(state, b @ state)
    dim = b.shape[0]
    d = (b - beta * sp.identity(dim, format="csr")).tocsr()
    powers = [state]
    for _ in range(max_order):
        powers.append(d @ powers[-1])
    lam, mu = 1 / 2j, -1 / 2j
    out = {}
    for j in range(1, max_order + 1):
        total = 0j
        for l in range(j + 1):
            # <d^dag^l d^(j-l)> = <d^l psi | d^(j-l) psi>
            total += comb(j, l) * mu ** l * lam ** (j - l) * np.vdot(powers[l], powers[j - l])
        out[j] = float(total.real)
    return out


@dataclass(frozen=True)
class PhaseClassification:
    analytic_label: str
    statistical_label: str
    degeneracy: int | None = None

    @property
    def label(self) -> str:
        return self.analytic_label

    @property
    def agree(self) -> bool:
        return self.statistical_label == self.analytic_label


def classify_phase(frame: SqueezedFrame | float, report: CorrelationReport,
                   degeneracy: int | None = None) -> PhaseClassification:
    """Analytic label from ``g~_c^s`` set beside the statistical evidence.

    A guard-triggered report yields ``UNDEFINED`` regardless of the coupling.
    """
    x = frame.gtilde_c_s if isinstance(frame, SqueezedFrame) else float(frame)
    if report.occupation_guard_triggered:
        return PhaseClassification("UNDEFINED", "UNDEFINED", degeneracy)
    if x < 1:
        lab = "NP"
    elif x > 1:
        lab = "SP"
    else:
        lab = "CRITICAL"
    return PhaseClassification(lab, report.phase_label, degeneracy)

"""Parameter sets, the squeezed frame, and Hamiltonian builders.

Conventions
-----------
* Energies carry explicit units; most helpers take ``omega_b = 1``.
* The squeezing transformation ``S(r) = exp[r (b^2 - b^dag^2)/2]`` maps the
  effective Hamiltonian onto the standard Rabi form with
  ``omega_s = omega_b e^{2r}`` and ``g_s = g e^{-r}``.  The lab-frame mode is
  ``b_lab = cosh(r) b_s - sinh(r) b_s^dag`` so that ``b_lab + b_lab^dag =
  e^{-r} (b_s + b_s^dag)``; this is the sign that makes ``g_s = g e^{-r}``.
* ``S^dag H_eff S = H_s + (omega_s - omega_b)/2``; the constant is exposed as
  :attr:`SqueezedFrame.energy_offset`.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import exp, isfinite, log, sqrt

from . import hilbert as hs
from .errors import (
    DispersiveRegimeError,
    MechanicalInstability,
    PhaseDomainError,
    ResonanceError,
    ShapeError,
)
from .hilbert import HilbertSpace, SparseOperator

RESONANCE_TOL = 1e-9


@dataclass(frozen=True)
class LinearizedParams:
    G: float
    delta_a_tilde: float
    omega_b: float
    mu: float
    nu: float
    delta_plus: float
    delta_minus: float
    xi: float


def compute_xi(G: float, delta_a_tilde: float, omega_b: float) -> LinearizedParams:
    """Induced quadratic coefficient from eliminating the dispersive cavity.

    ``xi = (G^2/2)(1/Delta_+ + 1/Delta_-)`` with ``Delta_pm = Delta_a ~ +- omega_b``.
    """
    dp = delta_a_tilde + omega_b
    dm = delta_a_tilde - omega_b
    if abs(dp) < RESONANCE_TOL * omega_b or abs(dm) < RESONANCE_TOL * omega_b:
        raise ResonanceError(
            f"cavity detuning {delta_a_tilde} resonant with mechanical frequency {omega_b}")
    xi = 0.5 * G * G * (1.0 / dp + 1.0 / dm)
    return LinearizedParams(G=G, delta_a_tilde=delta_a_tilde, omega_b=omega_b,
                            mu=G / dp, nu=-G / dm, delta_plus=dp, delta_minus=dm, xi=xi)


@dataclass(frozen=True)
class ModelParams:
    """Physical inputs.  Supply either ``xi`` or the pair ``(G, delta_a_tilde)``."""

    omega_b: float
    Omega: float
    alpha: float
    g: float
    xi: float | None = None
    G: float | None = None
    delta_a_tilde: float | None = None
    dispersive_threshold: float = 0.1

    def __post_init__(self):
        if not self.omega_b > 0:
            raise ValueError("omega_b must be positive")
        if not self.Omega > 0:
            raise ValueError("Omega must be positive")
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")
        if self.g < 0:
            raise ValueError("g must be non-negative")
        cavity = (self.G is not None, self.delta_a_tilde is not None)
        if self.xi is not None:
            if any(cavity):
                raise ValueError("give either xi or (G, delta_a_tilde), not both")
        else:
            if not all(cavity):
                raise ValueError("need xi or both G and delta_a_tilde")
            lin = compute_xi(self.G, self.delta_a_tilde, self.omega_b)
            ratio = abs(self.G) / abs(lin.delta_minus)
            if ratio >= self.dispersive_threshold:
                raise DispersiveRegimeError(
                    f"G/|Delta_a - omega_b| = {ratio:.4g} violates the dispersive "
                    f"threshold {self.dispersive_threshold}")

    @property
    def linearized(self) -> LinearizedParams | None:
        if self.G is None:
            return None
        return compute_xi(self.G, self.delta_a_tilde, self.omega_b)

    @property
    def xi_value(self) -> float:
        return self.xi if self.xi is not None else self.linearized.xi

    @property
    def g_c(self) -> float:
        return 0.5 * sqrt(self.omega_b * self.Omega)

    @property
    def gtilde_c(self) -> float:
        return self.g / self.g_c

    @classmethod
    def from_ratios(cls, gtilde_c: float, alpha: float = 0.0, xi_ratio: float = 0.0, *,
                    Omega_over_omega_b: float | None = None,
                    Omega_over_omega_s: float | None = None,
                    omega_b: float = 1.0) -> ModelParams:
        """Build parameters from dimensionless inputs.

        Exactly one of the two frequency ratios must be given.  With
        ``Omega_over_omega_s`` the qubit frequency is chosen after the squeezing
        parameter is known (r depends only on the dimensionless inputs).
        """
        if (Omega_over_omega_b is None) == (Omega_over_omega_s is None):
            raise ValueError("give exactly one of Omega_over_omega_b, Omega_over_omega_s")
        if Omega_over_omega_b is not None:
            Omega = Omega_over_omega_b * omega_b
        else:
            r = squeezing_parameter(alpha, gtilde_c, xi_ratio)
            Omega = Omega_over_omega_s * omega_b * exp(2 * r)
        g = gtilde_c * 0.5 * sqrt(omega_b * Omega)
        return cls(omega_b=omega_b, Omega=Omega, alpha=alpha, g=g, xi=xi_ratio * omega_b)


def squeezing_parameter(alpha: float, gtilde_c: float, xi_ratio: float) -> float:
    """``r = ln(1 + alpha g~_c^2 - 4 xi/omega_b) / 4``."""
    arg = 1.0 + alpha * gtilde_c ** 2 - 4.0 * xi_ratio
    if not arg > 0:
        raise MechanicalInstability(
            f"1 + alpha*g~_c^2 - 4*xi/omega_b = {arg:.6g} <= 0: quadratic form not positive")
    return 0.25 * log(arg)


@dataclass(frozen=True)
class SqueezedFrame:
    r: float
    omega_b: float
    omega_s: float
    Omega: float
    g: float
    g_s: float
    g_c: float
    gtilde_c: float
    g_c_s: float
    gtilde_c_s: float

    @property
    def energy_offset(self) -> float:
        """Constant in ``S^dag H_eff S = H_s + energy_offset``."""
        return 0.5 * (self.omega_s - self.omega_b)

    @property
    def omega_ratio(self) -> float:
        """``Omega / omega_s``."""
        return self.Omega / self.omega_s


def derive_squeezed_frame(params: ModelParams) -> SqueezedFrame:
    r = squeezing_parameter(params.alpha, params.gtilde_c, params.xi_value / params.omega_b)
    g_c = params.g_c
    g_c_s = g_c * exp(r)
    g_s = params.g * exp(-r)
    return SqueezedFrame(
        r=r, omega_b=params.omega_b, omega_s=params.omega_b * exp(2 * r),
        Omega=params.Omega, g=params.g, g_s=g_s, g_c=g_c,
        gtilde_c=params.gtilde_c, g_c_s=g_c_s, gtilde_c_s=g_s / g_c_s,
    )


def qrm_frame(x: float, Omega_over_omega_s: float, omega_s: float = 1.0) -> SqueezedFrame:
    """Identity frame (alpha = xi = 0) of the plain Rabi model at ``g~_c^s = x``."""
    params = ModelParams.from_ratios(x, Omega_over_omega_s=Omega_over_omega_s, omega_b=omega_s)
    return derive_squeezed_frame(params)


@dataclass(frozen=True)
class NoTransition:
    """No critical coupling exists; ``reason`` is ``"alpha_one"`` or ``"radicand"``."""

    reason: str

    def __bool__(self):
        return False


def critical_coupling(alpha: float, xi_ratio: float) -> float | NoTransition:
    """Bare rescaled coupling g~_c at which g~_c^s = 1."""
    if alpha == 1.0:
        return NoTransition("alpha_one")
    rad = (1.0 - 4.0 * xi_ratio) / (1.0 - alpha)
    if not (rad > 0 and isfinite(rad)):
        return NoTransition("radicand")
    return sqrt(rad)


def gtilde_c_for_squeezed_coupling(x: float, alpha: float, xi_ratio: float) -> float:
    """Invert ``g~_c^s = g~_c e^{-2r}`` for the bare coupling g~_c."""
    num = x * x * (1.0 - 4.0 * xi_ratio)
    den = 1.0 - alpha * x * x
    if den == 0 or not num / den > 0:
        raise PhaseDomainError(
            f"g~_c^s = {x} unreachable for alpha = {alpha}, xi/omega_b = {xi_ratio}")
    return sqrt(num / den)


# --- Hamiltonians -----------------------------------------------------------

def _require(space: HilbertSpace, qubit: bool, bosons: int):
    if space.has_qubit != qubit or len(space.boson_dims) != bosons:
        kind = ("qubit + " if qubit else "") + f"{bosons} boson(s)"
        raise ShapeError(f"expected {kind}, got {space}")


def _mode_ops(space: HilbertSpace, mode: int = 0):
    slot = space.boson_slot(mode)
    b = hs.embed(space, slot, hs.annihilation(space.boson_dims[mode]))
    return b, b.dag()


def _rabi_core(space, Omega, g, omega):
    b, bd = _mode_ops(space, 0)
    sz = hs.embed(space, 0, hs.pauli("z"))
    sx = hs.embed(space, 0, hs.pauli("x"))
    return omega * (bd @ b) + (Omega / 2) * sz + g * ((b + bd) @ sx), b, bd


def build_H_s(frame: SqueezedFrame, space: HilbertSpace) -> SparseOperator:
    """Standard Rabi form ``omega_s b^dag b + (Omega/2) sz + g_s (b + b^dag) sx``."""
    _require(space, True, 1)
    H, _, _ = _rabi_core(space, frame.Omega, frame.g_s, frame.omega_s)
    return H


def build_H_s_displaced(frame: SqueezedFrame, space: HilbertSpace, beta: float) -> SparseOperator:
    """``H_s`` with ``b -> b + beta`` substituted exactly before truncation.

    Used to pre-center deep-superradiant ground states.  Observables on its
    eigenvectors must add ``beta`` back to the mode operator.
    """
    _require(space, True, 1)
    H, b, bd = _rabi_core(space, frame.Omega, frame.g_s, frame.omega_s)
    ident = hs.identity(space.total_dim)
    sx = hs.embed(space, 0, hs.pauli("x"))
    return (H + (frame.omega_s * beta) * (b + bd)
            + (frame.omega_s * beta * beta) * ident
            + (2 * frame.g_s * beta) * sx)


def build_H_eff(params: ModelParams, space: HilbertSpace) -> SparseOperator:
    """Effective single-mode model with the A^2 term and the induced counter-term."""
    _require(space, True, 1)
    H, b, bd = _rabi_core(space, params.Omega, params.g, params.omega_b)
    quad = params.alpha * params.g ** 2 / params.Omega - params.xi_value
    if quad != 0.0:
        X = b + bd
        H = H + quad * (X @ X)
    return H


def build_H_linearized(params: ModelParams, space: HilbertSpace) -> SparseOperator:
    """Qubit, cavity ``a`` (mode 0) and mechanics ``b`` (mode 1) before elimination."""
    _require(space, True, 2)
    if params.G is None:
        raise ValueError("linearized Hamiltonian needs G and delta_a_tilde")
    a, ad = _mode_ops(space, 0)
    b, bd = _mode_ops(space, 1)
    sz = hs.embed(space, 0, hs.pauli("z"))
    sx = hs.embed(space, 0, hs.pauli("x"))
    Xb = b + bd
    H = ((params.Omega / 2) * sz + params.g * (Xb @ sx)
         + params.delta_a_tilde * (ad @ a) + params.omega_b * (bd @ b)
         + params.G * ((a + ad) @ Xb))
    if params.alpha:
        H = H + (params.alpha * params.g ** 2 / params.Omega) * (Xb @ Xb)
    return H


def _single_mode(space: HilbertSpace):
    _require(space, False, 1)
    b = hs.annihilation(space.boson_dims[0])
    return b, b.dag(), hs.identity(space.total_dim)


def build_H_np(frame: SqueezedFrame, space: HilbertSpace) -> SparseOperator:
    """Normal-phase effective Hamiltonian with the qubit projected on its ground state."""
    x = frame.gtilde_c_s
    if x >= 1:
        raise PhaseDomainError(f"normal-phase Hamiltonian needs g~_c^s < 1, got {x}")
    b, bd, ident = _single_mode(space)
    X = b + bd
    ws = frame.omega_s
    return ws * (bd @ b) - (x * x * ws / 4) * (X @ X) - (frame.Omega / 2) * ident


def build_H_sp(frame: SqueezedFrame, space: HilbertSpace) -> SparseOperator:
    """Superradiant-phase fluctuation Hamiltonian about one displaced minimum.

    The constant is the mean-field energy ``-(Omega/4)(x^2 + x^-2)``, which
    includes the rotated-qubit energy ``-Omega x^2 / 2``; with it the ground
    energy equals the closed-form ``E_G,sp``.
    """
    x = frame.gtilde_c_s
    if x <= 1:
        raise PhaseDomainError(f"superradiant Hamiltonian needs g~_c^s > 1, got {x}")
    b, bd, ident = _single_mode(space)
    X = b + bd
    ws = frame.omega_s
    const = -(frame.Omega / 4) * (x * x + x ** -2)
    return ws * (bd @ b) - (ws / (4 * x ** 4)) * (X @ X) + const * ident

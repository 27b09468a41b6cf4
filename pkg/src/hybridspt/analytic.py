"""Closed-form results in the limit omega_s/Omega -> 0 and Gaussian-state oracles.

Squeezing convention for states: ``S(t) = exp[t (b^dag^2 - b^2)/2]`` so that
``S(t)|0>`` has ``<b^dag b> = sinh^2 t``, ``<b b> = sinh t cosh t`` and a
squeezed P quadrature for ``t > 0``.  The operator ``S(r)`` used to define the
squeezed frame is ``exp[r (b^2 - b^dag^2)/2]``, i.e. the same family at
``t = -r``.

Normal-phase ground state (squeezed frame): ``S(t)|0>`` with ``t = -r_np``.
Superradiant ground states: displaced by ``+-beta_g`` and squeezed with
``t = -r_sp``.  In the lab frame the squeezing adds ``-r`` and the
displacement picks up ``e^{-r}``.
"""
from __future__ import annotations

import numbers
from dataclasses import dataclass
from math import cosh, exp, factorial, inf, log, perm, sinh, sqrt, tanh
from typing import Mapping

from .errors import IncompleteInput, InvalidOrder, PhaseDomainError, UndefinedCorrelation

QUADRATURE_C = 0.25  # [X, P] = 2 i C for X = (b + b^dag)/2, P = (b - b^dag)/(2i)
MAX_ORDER = 20


@dataclass(frozen=True)
class NpSolution:
    x: float
    omega_s: float
    Omega: float
    epsilon_np: float
    E_G_np: float
    r_np: float


@dataclass(frozen=True)
class SpSolution:
    x: float
    omega_s: float
    Omega: float
    r: float
    epsilon_sp: float
    E_G_sp: float
    r_sp: float
    beta_g: float
    t_tilde: float

    @property
    def coherence(self) -> tuple[float, float]:
        """Lab-frame ``<b>`` on the two broken-symmetry ground states."""
        c = exp(-self.r) * self.beta_g
        return (c, -c)

    @property
    def Omega_bar(self) -> float:
        """Rotated qubit splitting at the mean-field minimum, ``Omega x^2``."""
        return self.Omega * self.x ** 2

    @property
    def tan_2theta(self) -> float:
        """Qubit rotation angle, ``tan 2 theta = 4 g~_c^s beta / Omega``."""
        return 4 * self.x * self.beta_g / self.Omega

    def gaussian_state(self, frame: str = "lab") -> GaussianState:
        if frame == "lab":
            return GaussianState(beta=exp(-self.r) * self.beta_g, t_total=-self.t_tilde)
        if frame == "squeezed":
            return GaussianState(beta=self.beta_g, t_total=-self.r_sp)
        raise ValueError(f"unknown frame {frame!r}")


def np_solution(x: float, omega_s: float, Omega: float) -> NpSolution:
    if not 0 <= x < 1:
        raise PhaseDomainError(f"normal phase needs 0 <= g~_c^s < 1, got {x}")
    root = sqrt(1 - x * x)
    eps = omega_s * root
    return NpSolution(x=x, omega_s=omega_s, Omega=Omega, epsilon_np=eps,
                      E_G_np=(eps - omega_s) / 2 - Omega / 2,
                      r_np=0.25 * log(1 - x * x))


def sp_solution(x: float, omega_s: float, Omega: float, r: float = 0.0) -> SpSolution:
    if not x > 1:
        raise PhaseDomainError(f"superradiant phase needs g~_c^s > 1, got {x}")
    q = 1 - x ** -4
    root = sqrt(q)
    r_sp = 0.25 * log(q)
    return SpSolution(
        x=x, omega_s=omega_s, Omega=Omega, r=r,
        epsilon_sp=omega_s * root,
        E_G_sp=(omega_s / 2) * (root - 1) - (Omega / 4) * (x * x + x ** -2),
        r_sp=r_sp,
        beta_g=sqrt(Omega / (4 * omega_s) * (x * x - x ** -2)),
        t_tilde=r + r_sp,
    )


@dataclass(frozen=True)
class GaussianState:
    """Pure displaced squeezed vacuum ``D(beta) S(t_total) |0>`` with real beta."""

    beta: float
    t_total: float

    @property
    def n_c(self) -> float:
        return sinh(self.t_total) ** 2

    @property
    def m_c(self) -> float:
        return sinh(self.t_total) * cosh(self.t_total)

    @property
    def occupation(self) -> float:
        return self.n_c + self.beta ** 2


def g2_gaussian(state: GaussianState) -> float:
    """Equal-time ``g2(0)`` of a pure Gaussian state from Wick's theorem."""
    n, m, b2 = state.n_c, state.m_c, state.beta ** 2
    occ = n + b2
    if occ <= 0:
        raise UndefinedCorrelation("zero occupation: g2(0) undefined")
    num = 2 * n * n + m * m + 4 * n * b2 + 2 * b2 * m + b2 * b2
    return num / occ ** 2


@dataclass(frozen=True)
class G2Comparison:
    """Oracle value next to the value of the closed form as printed in the source."""

    value: float
    printed_formula: float


def g2_np_analytic(x: float) -> G2Comparison:
    """Normal-phase ``g2(0)`` of the squeezed-frame mode, ``3 + 1/sinh^2 r_np``.

    ``x == 0`` has zero occupation and returns ``inf`` for both values.
    """
    if x == 0:
        return G2Comparison(inf, inf)
    if not 0 < x < 1:
        raise PhaseDomainError(f"normal phase needs 0 < g~_c^s < 1, got {x}")
    r_np = 0.25 * log(1 - x * x)
    value = g2_gaussian(GaussianState(beta=0.0, t_total=-r_np))
    return G2Comparison(value, 1.0 / tanh(r_np) ** 2)


def g2_sp_analytic(x: float, omega_s: float, Omega: float, r: float = 0.0) -> G2Comparison:
    """Superradiant ``g2(0)`` of the lab-frame mode (squeezed frame when r = 0)."""
    sol = sp_solution(x, omega_s, Omega, r)
    value = g2_gaussian(sol.gaussian_state("lab"))
    # printed form: (1/2) sinh^2 t [3 cosh 2t + 8 beta^2 - 1] + 2 beta^4 over (sinh^2 t + beta^2)^2
    t, b2 = sol.t_tilde, sol.beta_g ** 2
    num = 0.5 * sinh(t) ** 2 * (3 * cosh(2 * t) + 8 * b2 - 1) + 2 * b2 * b2
    printed = num / (sinh(t) ** 2 + b2) ** 2
    return G2Comparison(value, printed)


def _check_order(N: int):
    if isinstance(N, bool) or not isinstance(N, numbers.Integral):
        raise InvalidOrder(f"order must be an integer, got {N!r}")
    if N < 2 or N % 2:
        raise InvalidOrder(f"order must be even and >= 2, got {N}")
    if N > MAX_ORDER:
        raise InvalidOrder(f"orders above {MAX_ORDER} are not supported, got {N}")


def double_factorial(n: int) -> int:
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def coherent_threshold(N: int) -> float:
    """``<(dP)^N>`` of any coherent state, ``C^{N/2} (N-1)!!``."""
    _check_order(N)
    return QUADRATURE_C ** (N // 2) * double_factorial(N - 1)


def gaussian_moment(sigma2: float, N: int) -> float:
    """Central moment of order N of a zero-mean Gaussian with variance sigma2."""
    _check_order(N)
    if not sigma2 > 0:
        raise ValueError("variance must be positive")
    return double_factorial(N - 1) * sigma2 ** (N // 2)


def bch_moment_expansion(normal_ordered_moments: Mapping[int, float], N: int) -> float:
    """``<(dP)^N>`` from normal-ordered centered moments.

    ``sum_k N!/(k! (N-2k)!) (C/2)^k <:(dP)^{N-2k}:> + C^{N/2} (N-1)!!``.
    The coefficient is the falling factorial ``N^(2k) = N!/(N-2k)!`` over k!.
    """
    _check_order(N)
    total = coherent_threshold(N)
    for k in range(N // 2):
        order = N - 2 * k
        if order not in normal_ordered_moments:
            raise IncompleteInput(f"missing normal-ordered moment of order {order}")
        coef = perm(N, 2 * k) / factorial(k) * (QUADRATURE_C / 2) ** k
        total += coef * normal_ordered_moments[order]
    return total


import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from hybridspt import hilbert as hs
from hybridspt import model
from hybridspt.analytic import np_solution, sp_solution
from hybridspt.errors import (
    DispersiveRegimeError, MechanicalInstability, PhaseDomainError, ResonanceError, ShapeError,
)
from hybridspt.model import ModelParams


def lowest(H, k=6):
    return scipy.linalg.eigvalsh(H.toarray())[:k]


# --- linearized cavity parameters ---------------------------------------------

def test_xi_direct_arithmetic():
    lp = model.compute_xi(0.1, 10.0, 1.0)
    assert lp.xi == pytest.approx(0.005 * (1 / 11 + 1 / 9), rel=1e-14)
    assert lp.mu == pytest.approx(0.1 / 11)
    assert lp.nu == pytest.approx(-0.1 / 9)


def test_xi_zero_coupling():
    lp = model.compute_xi(0.0, 10.0, 1.0)
    assert lp.xi == 0 and lp.mu == 0 and lp.nu == 0


def test_xi_far_detuned_approximation():
    # relative correction to G^2/Delta is exactly (w/D)^2 / (1 - (w/D)^2) = 1.0001e-4
    lp = model.compute_xi(0.1, 100.0, 1.0)
    rel = (lp.xi - 1e-4) / 1e-4
    assert rel == pytest.approx(1e-4 / (1 - 1e-4), rel=1e-9)
    assert rel < 1.0002e-4


def test_resonant_detuning_rejected():
    with pytest.raises(ResonanceError):
        model.compute_xi(0.1, 1.0, 1.0)
    with pytest.raises(ResonanceError):
        model.compute_xi(0.1, -1.0, 1.0)


def test_dispersive_threshold_enforced():
    with pytest.raises(DispersiveRegimeError):
        ModelParams(omega_b=1, Omega=10, alpha=0, g=0.1, G=1.0, delta_a_tilde=5.0)
    ModelParams(omega_b=1, Omega=10, alpha=0, g=0.1, G=0.1, delta_a_tilde=20.0)


def test_params_need_exactly_one_quadratic_source():
    with pytest.raises(ValueError):
        ModelParams(omega_b=1, Omega=10, alpha=0, g=0.1)
    with pytest.raises(ValueError):
        ModelParams(omega_b=1, Omega=10, alpha=0, g=0.1, xi=0.1, G=0.1, delta_a_tilde=20.0)


# --- squeezed frame ------------------------------------------------------------

def test_identity_frame():
    p = ModelParams(omega_b=1.0, Omega=100.0, alpha=0.0, g=0.7, xi=0.0)
    f = model.derive_squeezed_frame(p)
    assert f.r == 0 and f.omega_s == 1.0 and f.g_s == 0.7
    assert f.gtilde_c_s == pytest.approx(f.gtilde_c)


def test_squeezing_parameter_value():
    assert model.squeezing_parameter(0.0, 0.3, 0.245) == pytest.approx(0.25 * math.log(0.02), rel=1e-12)
    assert model.squeezing_parameter(0.0, 0.3, 0.245) == pytest.approx(-0.97800, abs=1e-5)


def test_mechanical_instability_at_boundary():
    with pytest.raises(MechanicalInstability):
        model.squeezing_parameter(0.0, 1.0, 0.25)
    with pytest.raises(MechanicalInstability):
        model.derive_squeezed_frame(ModelParams.from_ratios(0.5, 0.0, 0.25, Omega_over_omega_b=10))


def test_frame_relations():
    p = ModelParams.from_ratios(0.2, 1.5, 0.26, Omega_over_omega_b=100.0)
    f = model.derive_squeezed_frame(p)
    assert f.omega_s == pytest.approx(p.omega_b * math.exp(2 * f.r))
    assert f.g_s == pytest.approx(p.g * math.exp(-f.r))
    assert f.gtilde_c_s == pytest.approx(p.gtilde_c * math.exp(-2 * f.r))
    assert f.energy_offset == pytest.approx((f.omega_s - f.omega_b) / 2)


def test_from_ratios_fixes_squeezed_frequency_ratio():
    p = ModelParams.from_ratios(0.2, 1.5, 0.26, Omega_over_omega_s=1e3)
    assert model.derive_squeezed_frame(p).omega_ratio == pytest.approx(1e3, rel=1e-12)


def test_critical_coupling_values():
    assert model.critical_coupling(0.0, 0.245) == pytest.approx(math.sqrt(0.02), rel=1e-12)
    assert model.critical_coupling(1.5, 0.26) == pytest.approx(math.sqrt(0.08), rel=1e-12)
    assert model.critical_coupling(0.0, 0.0) == 1.0


def test_no_transition_cases():
    nt = model.critical_coupling(1.0, 0.1)
    assert not nt and nt.reason == "alpha_one"
    nt = model.critical_coupling(1.5, 0.1)
    assert not nt and nt.reason == "radicand"


@settings(max_examples=60, deadline=None)
@given(st.floats(0.0, 3.0), st.floats(0.0, 0.4), st.floats(0.05, 3.0))
def test_squeezed_coupling_inversion_roundtrip(alpha, xi, x):
    try:
        g = model.gtilde_c_for_squeezed_coupling(x, alpha, xi)
        r = model.squeezing_parameter(alpha, g, xi)
    except (PhaseDomainError, MechanicalInstability):
        return
    assert g * math.exp(-2 * r) == pytest.approx(x, rel=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.0, 3.0), st.floats(0.0, 0.24))
def test_critical_coupling_lands_on_unit_squeezed_coupling(alpha, xi):
    crit = model.critical_coupling(alpha, xi)
    if not crit:
        return
    r = model.squeezing_parameter(alpha, crit, xi)
    assert crit * math.exp(-2 * r) == pytest.approx(1.0, rel=1e-9)


# --- builders --------------------------------------------------------------------

def test_decoupled_spectrum():
    f = model.qrm_frame(0.0, 10.0)
    vals = lowest(model.build_H_s(f, hs.HilbertSpace((12,))), 8)
    expected = sorted([n + s * 5.0 for n in range(12) for s in (-1, 1)])[:8]
    assert np.allclose(vals, expected, atol=1e-12)
    p = ModelParams(omega_b=1.0, Omega=10.0, alpha=0.0, g=0.0, xi=0.0)
    assert np.allclose(lowest(model.build_H_eff(p, hs.HilbertSpace((12,))), 8), expected, atol=1e-12)


def test_identity_frame_matches_effective_model():
    space = hs.HilbertSpace((15,))
    p = ModelParams.from_ratios(0.7, Omega_over_omega_b=20.0)
    Hs = model.build_H_s(model.derive_squeezed_frame(p), space)
    He = model.build_H_eff(p, space)
    assert (Hs - He).matrix.count_nonzero() == 0


def test_a_squared_and_induced_terms_cancel():
    space = hs.HilbertSpace((10,))
    g, Omega, alpha = 0.8, 20.0, 1.5
    xi = alpha * g * g / Omega
    H1 = model.build_H_eff(ModelParams(omega_b=1.0, Omega=Omega, alpha=alpha, g=g, xi=xi), space)
    H0 = model.build_H_eff(ModelParams(omega_b=1.0, Omega=Omega, alpha=0.0, g=g, xi=0.0), space)
    assert np.allclose(H1.toarray(), H0.toarray(), atol=1e-14, rtol=0)


def test_builders_check_space_shape():
    f = model.qrm_frame(0.5, 10.0)
    with pytest.raises(ShapeError):
        model.build_H_s(f, hs.HilbertSpace((5, 5)))
    with pytest.raises(ShapeError):
        model.build_H_np(f, hs.HilbertSpace((5,)))


def test_effective_and_squeezed_spectra_differ_by_offset():
    # S^dag H_eff S = H_s + (omega_s - omega_b)/2, checked on converged low spectra
    p = ModelParams.from_ratios(0.35, 0.0, 0.2, Omega_over_omega_b=40.0)
    f = model.derive_squeezed_frame(p)
    Ee = lowest(model.build_H_eff(p, hs.HilbertSpace((160,))))
    Es = lowest(model.build_H_s(f, hs.HilbertSpace((160,))))
    assert np.allclose(Ee, Es + f.energy_offset, atol=1e-8, rtol=0)


def test_ground_states_related_by_truncated_squeeze():
    dim = 120
    p = ModelParams.from_ratios(0.35, 0.0, 0.2, Omega_over_omega_b=40.0)
    f = model.derive_squeezed_frame(p)
    space = hs.HilbertSpace((dim,))
    _, ve = scipy.linalg.eigh(model.build_H_eff(p, space).toarray(), subset_by_index=[0, 0])
    _, vs = scipy.linalg.eigh(model.build_H_s(f, space).toarray(), subset_by_index=[0, 0])
    S = np.kron(np.eye(2), hs.squeeze_matrix(dim, f.r))
    overlap = abs(np.vdot(ve[:, 0], S @ vs[:, 0]))
    assert overlap == pytest.approx(1.0, abs=1e-8)


def test_linearized_decouples_at_zero_G():
    space2 = hs.HilbertSpace((4, 30))
    two = ModelParams(omega_b=1.0, Omega=3.0, alpha=0.0, g=0.4, G=0.0, delta_a_tilde=20.0)
    eff = ModelParams(omega_b=1.0, Omega=3.0, alpha=0.0, g=0.4, xi=0.0)
    E2 = lowest(model.build_H_linearized(two, space2), 3)
    E1 = lowest(model.build_H_eff(eff, hs.HilbertSpace((30,))), 3)
    # the cavity sits in vacuum for the lowest levels, so energies add with 0
    assert np.allclose(E2, E1, atol=1e-10)


def test_linearized_close_to_effective_in_dispersive_regime():
    delta = 20.0
    G = 0.02 * delta
    two = ModelParams(omega_b=1.0, Omega=2.0, alpha=0.0, g=0.35, G=G, delta_a_tilde=delta)
    eff = ModelParams(omega_b=1.0, Omega=2.0, alpha=0.0, g=0.35, xi=two.xi_value)
    E2 = lowest(model.build_H_linearized(two, hs.HilbertSpace((6, 40))), 1)[0]
    E1 = lowest(model.build_H_eff(eff, hs.HilbertSpace((40,))), 1)[0]
    assert abs(E2 - E1) < 1e-3


def test_mode_relabelling_is_isospectral():
    two = ModelParams(omega_b=1.0, Omega=2.0, alpha=0.3, g=0.35, G=0.3, delta_a_tilde=20.0)
    H = model.build_H_linearized(two, hs.HilbertSpace((3, 4))).toarray()
    # permute the product basis from (q, a, b) to (q, b, a)
    perm = np.arange(24).reshape(2, 3, 4).transpose(0, 2, 1).ravel()
    Hp = H[np.ix_(perm, perm)]
    assert np.allclose(scipy.linalg.eigvalsh(H), scipy.linalg.eigvalsh(Hp), atol=1e-12)


def test_normal_phase_hamiltonian():
    f = model.qrm_frame(0.0, 50.0)
    vals = lowest(model.build_H_np(f, hs.HilbertSpace((20,), has_qubit=False)), 3)
    assert np.allclose(vals, np.arange(3) - 25.0, atol=1e-12)
    f = model.qrm_frame(0.6, 50.0)
    vals = lowest(model.build_H_np(f, hs.HilbertSpace((200,), has_qubit=False)), 2)
    assert vals[1] - vals[0] == pytest.approx(0.8, abs=1e-10)
    assert vals[0] == pytest.approx(np_solution(0.6, 1.0, 50.0).E_G_np, abs=1e-8)
    with pytest.raises(PhaseDomainError):
        model.build_H_np(model.qrm_frame(1.2, 50.0), hs.HilbertSpace((5,), has_qubit=False))


def test_superradiant_phase_hamiltonian():
    x = 2 ** 0.25  # x^-4 = 1/2
    f = model.qrm_frame(x, 100.0)
    vals = lowest(model.build_H_sp(f, hs.HilbertSpace((200,), has_qubit=False)), 2)
    sol = sp_solution(x, 1.0, 100.0)
    assert vals[1] - vals[0] == pytest.approx(math.sqrt(0.5), abs=1e-10)
    assert vals[0] == pytest.approx(sol.E_G_sp, abs=1e-8)
    with pytest.raises(PhaseDomainError):
        model.build_H_sp(model.qrm_frame(0.5, 50.0), hs.HilbertSpace((5,), has_qubit=False))


def test_rabi_ground_energy_near_normal_phase_formula():
    f = model.qrm_frame(0.5, 1e3)
    E0 = lowest(model.build_H_s(f, hs.HilbertSpace((60,))), 1)[0]
    ref = np_solution(0.5, 1.0, 1e3).E_G_np
    assert abs(E0 - ref) / abs(ref) < 0.02


def test_displaced_builder_is_a_shift_of_the_rabi_model():
    f = model.qrm_frame(1.5, 100.0)
    beta = sp_solution(1.5, 1.0, 100.0).beta_g
    E_plain = lowest(model.build_H_s(f, hs.HilbertSpace((400,))), 1)[0]
    E_shift = lowest(model.build_H_s_displaced(f, hs.HilbertSpace((60,)), beta), 1)[0]
    assert E_shift == pytest.approx(E_plain, abs=1e-8)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.0, 2.0), st.floats(0.0, 0.24), st.floats(0.0, 2.0), st.integers(2, 12))
def test_all_builders_hermitian(alpha, xi, gt, cutoff):
    try:
        p = ModelParams.from_ratios(gt, alpha, xi, Omega_over_omega_b=10.0)
        f = model.derive_squeezed_frame(p)
    except MechanicalInstability:
        return
    space = hs.HilbertSpace((cutoff,))
    assert model.build_H_s(f, space).hermitian
    assert model.build_H_eff(p, space).hermitian
    assert model.build_H_s_displaced(f, space, 1.3).hermitian
    lin = ModelParams(omega_b=1.0, Omega=10.0, alpha=alpha, g=p.g, G=0.5, delta_a_tilde=20.0)
    assert model.build_H_linearized(lin, hs.HilbertSpace((3, cutoff))).hermitian
    bare = hs.HilbertSpace((cutoff,), has_qubit=False)
    if f.gtilde_c_s < 1:
        assert model.build_H_np(f, bare).hermitian
    elif f.gtilde_c_s > 1:
        assert model.build_H_sp(f, bare).hermitian


@settings(max_examples=25, deadline=None)
@given(st.floats(0.0, 3.0), st.floats(1.0, 1e4), st.integers(2, 40))
def test_rabi_model_commutes_with_parity(x, ratio, cutoff):
    space = hs.HilbertSpace((cutoff,))
    H = model.build_H_s(model.qrm_frame(x, ratio), space)
    c = hs.commutator(H, hs.parity_operator(space))
    assert c.matrix.count_nonzero() == 0 or np.abs(c.matrix.data).max() == 0

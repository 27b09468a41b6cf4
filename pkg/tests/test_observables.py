import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from hybridspt import analytic, model, observables as ob, spectra
from hybridspt import hilbert as hs
from hybridspt.errors import InvalidOrder, ShapeError, SymmetryError


def bare(dim):
    return hs.HilbertSpace((dim,), has_qubit=False)


def qubit_ground(dim, v):
    # qubit in |down> with the boson in v
    return np.kron([0.0, 1.0], v)


def rabi_ground(x, ratio, cutoff, k=2):
    space = hs.HilbertSpace((cutoff,))
    H = model.build_H_s(model.qrm_frame(x, ratio), space)
    return spectra.diagonalize(H, k, symmetry=hs.parity_operator(space), space=space)


def test_expectation_number_operator():
    n = hs.number(10)
    assert ob.expectation(hs.fock_state(10, 0), n) == 0
    assert ob.expectation(hs.fock_state(10, 7), n) == pytest.approx(7)
    with pytest.raises(ShapeError):
        ob.expectation(hs.fock_state(5, 0), n)


def test_expectation_renormalizes_small_drift(caplog):
    v = hs.fock_state(10, 3) * (1 + 1e-8)
    assert ob.expectation(v, hs.number(10)) == pytest.approx(3, rel=1e-12)
    assert "renormalizing" in caplog.text
    with pytest.raises(ValueError):
        ob.expectation(hs.fock_state(10, 3) * 1.1, hs.number(10))


def test_expectation_coherent_amplitude():
    v = hs.coherent_state(200, 2.0)
    assert abs(ob.expectation(v, hs.annihilation(200)) - 2.0) < 1e-8


def test_g2_fock_and_coherent():
    assert ob.g2_numeric(hs.fock_state(10, 2), bare(10)).g2 == pytest.approx(0.5)
    rep = ob.g2_numeric(hs.coherent_state(200, 2.0), bare(200))
    assert rep.g2 == pytest.approx(1.0, abs=1e-6)
    assert rep.phase_label == "SP"


def test_g2_squeezed_vacuum_oracle():
    t = 0.25541
    rep = ob.g2_numeric(hs.squeezed_vacuum(400, t), bare(400))
    assert rep.g2 == pytest.approx(3 + 1 / math.sinh(t) ** 2, abs=1e-4)
    assert rep.phase_label == "NP"


def test_g2_guard_on_vacuum():
    rep = ob.g2_numeric(qubit_ground(10, hs.fock_state(10, 0)), hs.HilbertSpace((10,)))
    assert rep.occupation_guard_triggered and rep.phase_label == "UNDEFINED"
    assert math.isnan(rep.g2)
    assert ob.classify_phase(0.5, rep).label == "UNDEFINED"


def test_g2_shape_checked():
    with pytest.raises(ShapeError):
        ob.g2_numeric(hs.fock_state(5, 1), bare(6))


def test_lab_frame_mode_of_squeezed_vacuum():
    # the squeezed-frame vacuum is a squeezed state of the lab mode
    r = -0.3
    rep = ob.g2_numeric(qubit_ground(80, hs.fock_state(80, 0)), hs.HilbertSpace((80,)), frame_r=r)
    assert rep.n_mean == pytest.approx(math.sinh(r) ** 2, rel=1e-12)


def test_broken_pair_from_cat_states():
    dim, beta = 200, 3.0
    c = hs.coherent_state(dim, beta)
    m = hs.coherent_state(dim, -beta)
    even = (c + m) / np.linalg.norm(c + m)
    odd = (c - m) / np.linalg.norm(c - m)
    space = hs.HilbertSpace((dim,))
    pair = ob.symmetry_broken_pair(qubit_ground(dim, odd), qubit_ground(dim, even), space)
    assert pair.coherence_plus == pytest.approx(3.0, abs=1e-6)
    assert pair.coherence_minus == pytest.approx(-3.0, abs=1e-6)


def test_broken_pair_two_level():
    space = hs.HilbertSpace((4,))
    v0 = qubit_ground(4, hs.fock_state(4, 0))
    v1 = qubit_ground(4, hs.fock_state(4, 1))
    pair = ob.symmetry_broken_pair(v0, v1, space)
    assert pair.coherence_plus == pytest.approx(0.5)
    assert pair.coherence_minus == pytest.approx(-0.5)


def test_broken_pair_rejects_same_parity():
    space = hs.HilbertSpace((4,))
    with pytest.raises(SymmetryError):
        ob.symmetry_broken_pair(qubit_ground(4, hs.fock_state(4, 0)),
                                qubit_ground(4, hs.fock_state(4, 2)), space)


def test_broken_pair_of_rabi_doublet():
    res = rabi_ground(1.5, 1e3, 1200)
    pair = ob.symmetry_broken_pair(res.state(0), res.state(1), res.space)
    beta = analytic.sp_solution(1.5, 1.0, 1e3).beta_g
    assert abs(abs(pair.coherence_plus) - beta) / beta < 0.03
    X = ob.mode_operator(res.space) + ob.mode_operator(res.space).conj().T
    assert np.vdot(pair.plus, X @ pair.plus).real >= 0
    # eigenstates themselves carry no coherence
    b = ob.mode_operator(res.space)
    for i in range(2):
        assert abs(np.vdot(res.state(i), b @ res.state(i))) < 1e-12


def test_quadrature_vacuum_thresholds():
    q = ob.quadrature_moments(hs.fock_state(30, 0), bare(30), orders=(2, 4))
    assert q.moments[2] == pytest.approx(0.25, abs=1e-14)
    assert q.moments[4] == pytest.approx(3 / 16, abs=1e-14)
    assert q.squeezed == {2: False, 4: False}


def test_quadrature_squeezed_vacuum():
    q = ob.quadrature_moments(hs.squeezed_vacuum(300, 0.5), bare(300))
    assert q.moments[2] == pytest.approx(math.exp(-1) / 4, abs=1e-12)
    for N in (2, 4, 6, 8):
        assert q.moments[N] == pytest.approx(analytic.gaussian_moment(math.exp(-1) / 4, N), abs=1e-8)
        assert q.squeezed[N]


def test_quadrature_odd_order_rejected():
    with pytest.raises(InvalidOrder):
        ob.quadrature_moments(hs.fock_state(5, 0), bare(5), orders=(3,))


def test_quadrature_at_critical_point_fourth_order_squeezed():
    res = rabi_ground(1.0, 1e3, 150)
    q = ob.quadrature_moments(res.ground_state, res.space, orders=(4,))
    assert q.moments[4] < 3 / 16 and q.squeezed[4]


@pytest.mark.parametrize("state", ["vacuum", "coherent", "squeezed", "displaced_squeezed"])
def test_bch_cross_check(state):
    dim = 300
    v = {
        "vacuum": hs.fock_state(dim, 0),
        "coherent": hs.coherent_state(dim, 2.0),
        "squeezed": hs.squeezed_vacuum(dim, 0.5),
        "displaced_squeezed": hs.displacement_matrix(dim, 1.2j) @ hs.squeezed_vacuum(dim, -0.3),
    }[state]
    q = ob.quadrature_moments(v, bare(dim))
    assert q.variance_check == pytest.approx(q.moments[2], abs=1e-12)
    for N in (4, 6, 8):
        assert q.bch[N] == pytest.approx(q.moments[N], abs=1e-8)


def test_factorial_moment_paths_on_rabi_state():
    res = rabi_ground(0.9, 100.0, 80)
    rep = ob.g2_numeric(res.ground_state, res.space)
    assert rep.n2_factorial == pytest.approx(
        ob.factorial_moment_from_distribution(res.ground_state, res.space), abs=1e-10)


def test_classify_phase_labels():
    rep = ob.g2_numeric(hs.squeezed_vacuum(100, 0.3), bare(100))
    assert ob.classify_phase(0.5, rep).label == "NP"
    assert ob.classify_phase(1.5, rep).label == "SP"
    c = ob.classify_phase(model.qrm_frame(1.5, 10.0), rep, degeneracy=2)
    assert not c.agree and c.degeneracy == 2


def test_normal_phase_g2_approaches_oracle_with_ratio():
    oracle = analytic.g2_np_analytic(0.5).value
    errs = []
    for ratio in (1e2, 1e3, 1e4):
        res = rabi_ground(0.5, ratio, 60)
        errs.append(abs(ob.g2_numeric(res.ground_state, res.space).g2 - oracle))
    assert errs[0] > errs[1] > errs[2]


def test_normal_phase_g2_x08_at_large_ratio():
    res = rabi_ground(0.8, 1e4, 80)
    g2 = ob.g2_numeric(res.ground_state, res.space).g2
    assert abs(g2 - analytic.g2_np_analytic(0.8).value) / g2 < 0.03


def test_superradiant_g2_near_oracle():
    res = rabi_ground(1.5, 1e3, 1200)
    pair = ob.symmetry_broken_pair(res.state(0), res.state(1), res.space)
    g2 = ob.g2_numeric(pair.plus, res.space).g2
    assert abs(g2 - analytic.g2_sp_analytic(1.5, 1.0, 1e3).value) < 0.05 * g2


unit_vectors = arrays(np.complex128, 24,
                      elements=st.complex_numbers(max_magnitude=1.0, allow_nan=False,
                                                  allow_infinity=False)).filter(
    lambda v: np.linalg.norm(v) > 1e-3).map(lambda v: v / np.linalg.norm(v))


@settings(max_examples=40, deadline=None)
@given(unit_vectors)
def test_factorial_moment_two_paths(v):
    space = hs.HilbertSpace((12,))
    rep = ob.g2_numeric(v, space)
    assert rep.n2_factorial == pytest.approx(ob.factorial_moment_from_distribution(v, space), abs=1e-10)
    assert abs(rep.parity) <= 1 + 1e-10
    if not rep.occupation_guard_triggered:
        assert rep.g2 >= 0


@settings(max_examples=40, deadline=None)
@given(unit_vectors)
def test_parity_definite_states_have_no_coherence(v):
    space = hs.HilbertSpace((12,))
    d = hs.parity_operator(space).matrix.diagonal().real
    for sign in (1, -1):
        w = np.where(d == sign, v, 0)
        if np.linalg.norm(w) < 1e-6:
            continue
        w = w / np.linalg.norm(w)
        assert abs(np.vdot(w, ob.mode_operator(space) @ w)) < 1e-12


@settings(max_examples=30, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-0.6, 0.6))
def test_even_moments_nonnegative_and_bch_agrees(re, im, t):
    dim = 160
    v = hs.displacement_matrix(dim, complex(re, im)) @ hs.squeezed_vacuum(dim, t)
    q = ob.quadrature_moments(v, bare(dim))
    for N in (2, 4, 6, 8):
        assert q.moments[N] >= 0
    assert q.variance_check == pytest.approx(q.moments[2], abs=1e-12)
    for N in (4, 6, 8):
        assert q.bch[N] == pytest.approx(q.moments[N], abs=1e-8)

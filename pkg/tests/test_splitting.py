import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dynsplit.errors import ContractError, UnsupportedSchemeError
from dynsplit.operators import DomainParams, dirichlet_lift, heat_propagate, matrix_exp
from dynsplit.presets import example1_problem, example2_problem
from dynsplit.splitting import (
    LIE,
    NAIVE_LIE,
    STRANG,
    CoupledState,
    Problem,
    Scheme,
    TriangularState,
    apply_T1,
    apply_T2,
    apply_T3,
    apply_Vn,
    coupling_block,
    from_triangular,
    run,
    run_final,
    step,
    step_closed_form,
    step_naive,
    to_triangular,
)

P = DomainParams(1.0, 2.0, 64)
SCHEMES = [LIE, STRANG, Scheme.weighted(0.3), Scheme.weighted(0.5)]


def random_state(rng, p=P):
    return TriangularState(rng.standard_normal(p.n_interior), rng.standard_normal(2))


def random_B(rng):
    return rng.standard_normal((2, 2))


def rel(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300)


# -- types -------------------------------------------------------------------------


def test_states_are_immutable():
    s = TriangularState(np.zeros(63), np.zeros(2))
    with pytest.raises(ValueError):
        s.w[0] = 1.0


def test_scheme_validation():
    with pytest.raises(ContractError):
        Scheme.weighted(1.5)
    assert Scheme("strang") == STRANG
    assert Scheme.weighted(0.3).label == "weighted(0.3)"


def test_problem_validation():
    with pytest.raises(ContractError):
        Problem(P, np.eye(2), np.zeros(10), np.zeros(2), 1.0)
    with pytest.raises(ContractError):
        Problem(P, np.eye(3), np.zeros(63), np.zeros(2), 1.0)
    with pytest.raises(ContractError):
        Problem(P, np.eye(2), np.zeros(63), np.zeros(2), 0.0)


# -- coordinate change ----------------------------------------------------------------


def test_triangular_with_zero_boundary():
    u = np.random.default_rng(1).standard_normal(63)
    tri = to_triangular(CoupledState(u, [0.0, 0.0]), P)
    np.testing.assert_array_equal(tri.w, u)
    np.testing.assert_array_equal(from_triangular(TriangularState(u, [0.0, 0.0]), P).u, u)


def test_lift_maps_to_zero_w():
    v = np.array([0.4, -1.2])
    tri = to_triangular(CoupledState(dirichlet_lift(v, P), v), P)
    assert np.abs(tri.w).max() <= 1e-15
    np.testing.assert_array_equal(from_triangular(TriangularState(np.zeros(63), v), P).u, dirichlet_lift(v, P))


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_triangular_roundtrip(seed):
    rng = np.random.default_rng(seed)
    s = CoupledState(rng.standard_normal(63), rng.standard_normal(2))
    back = from_triangular(to_triangular(s, P), P)
    np.testing.assert_allclose(back.u, s.u, rtol=0, atol=4 * np.finfo(float).eps * (1 + np.abs(s.v).max() + np.abs(s.u).max()))
    np.testing.assert_array_equal(back.v, s.v)


def test_triangular_size_mismatch():
    with pytest.raises(ContractError):
        to_triangular(CoupledState(np.zeros(10), np.zeros(2)), P)


# -- sub-flows -----------------------------------------------------------------------


def test_T1():
    rng = np.random.default_rng(2)
    s = random_state(rng)
    np.testing.assert_allclose(apply_T1(s, 0.0, P).w, s.w, atol=1e-13)
    out = apply_T1(s, 0.3, P)
    assert out.v is s.v or np.array_equal(out.v, s.v)
    np.testing.assert_array_equal(out.v, s.v)
    e1 = TriangularState(np.sin(np.pi * P.x / P.beta), [3.0, 4.0])
    np.testing.assert_allclose(apply_T1(e1, 0.3, P).w, math.exp(-P.eigenvalues[0] * 0.3) * e1.w, atol=1e-14)
    with pytest.raises(ContractError):
        apply_T1(s, -0.1, P)


def test_T2():
    rng = np.random.default_rng(3)
    s = random_state(rng)
    B = random_B(rng)
    np.testing.assert_array_equal(apply_T2(s, 0.0, B, P).w, s.w)
    np.testing.assert_array_equal(apply_T2(s, 0.7, np.zeros((2, 2)), P).w, s.w)
    two = apply_T2(apply_T2(s, 0.2, B, P), 0.5, B, P)
    np.testing.assert_allclose(two.w, apply_T2(s, 0.7, B, P).w, rtol=1e-14, atol=1e-14)
    hat = TriangularState(np.zeros(63), [1.0, 0.0])
    np.testing.assert_allclose(apply_T2(hat, 1.0, np.eye(2), P).w, -(P.beta - P.x) / P.beta, atol=1e-15)


def test_T3():
    rng = np.random.default_rng(4)
    s = random_state(rng)
    B = random_B(rng)
    np.testing.assert_array_equal(apply_T3(s, 0.0, B).v, s.v)
    np.testing.assert_array_equal(apply_T3(s, 1.0, np.zeros((2, 2))).v, s.v)
    np.testing.assert_array_equal(apply_T3(s, 1.0, B).w, s.w)
    v0 = TriangularState(np.zeros(63), [1.0, math.sinh(math.pi)])
    np.testing.assert_allclose(apply_T3(v0, 1.5, np.diag([-0.25, 1.0])).v,
                               [math.exp(-1.5 / 4), math.exp(1.5) * math.sinh(math.pi)], rtol=1e-13)


# -- one step -----------------------------------------------------------------------


def test_weighted_theta_one_is_lie_bitwise():
    rng = np.random.default_rng(5)
    for _ in range(10):
        s, B = random_state(rng), random_B(rng)
        a = step(Scheme.weighted(1.0), s, 0.1, B, P)
        b = step(LIE, s, 0.1, B, P)
        assert np.array_equal(a.w, b.w) and np.array_equal(a.v, b.v)


@pytest.mark.parametrize("scheme", SCHEMES + [NAIVE_LIE], ids=lambda s: s.label)
def test_steady_state_without_boundary_dynamics(scheme):
    s = TriangularState(np.zeros(63), [0.0, 0.0])
    out = step(scheme, s, 0.2, np.zeros((2, 2)), P)
    assert not out.w.any() and not out.v.any()


@pytest.mark.parametrize("scheme", SCHEMES, ids=lambda s: s.label)
def test_composition_matches_closed_form(scheme):
    rng = np.random.default_rng(6)
    for _ in range(20):
        s, B, tau = random_state(rng), random_B(rng), rng.uniform(0.01, 1.0)
        a = step(scheme, s, tau, B, P)
        b = step_closed_form(scheme, s, tau, B, P)
        assert rel(a.as_vector(), b.as_vector()) <= 1e-10


def test_closed_form_pure_heat_when_v_zero():
    rng = np.random.default_rng(7)
    s = TriangularState(rng.standard_normal(63), [0.0, 0.0])
    for scheme in SCHEMES:
        out = step_closed_form(scheme, s, 0.4, random_B(rng), P)
        np.testing.assert_allclose(out.w, heat_propagate(s.w, 0.4, P), atol=1e-14)


def test_strang_block_is_lie_block_at_half_times():
    rng = np.random.default_rng(8)
    y, B, tau = rng.standard_normal(2), random_B(rng), 0.3
    strang = coupling_block(STRANG, tau, y, B, P)
    half = -tau * heat_propagate(dirichlet_lift(B @ matrix_exp(B, tau / 2) @ y, P), tau / 2, P)
    np.testing.assert_allclose(strang, half, rtol=1e-13, atol=1e-14)


def test_closed_form_rejects_naive():
    with pytest.raises(UnsupportedSchemeError):
        step_closed_form(NAIVE_LIE, TriangularState(np.zeros(63), [1.0, 1.0]), 0.1, np.eye(2), P)


@pytest.mark.parametrize("tau", [0.0, -0.1])
def test_step_rejects_nonpositive_tau(tau):
    with pytest.raises(ContractError):
        step(LIE, TriangularState(np.zeros(63), [0.0, 0.0]), tau, np.eye(2), P)
    with pytest.raises(ContractError):
        step_naive(CoupledState(np.zeros(63), [0.0, 0.0]), tau, np.eye(2), P)


@settings(max_examples=30, deadline=None)
@given(theta=st.floats(0, 1), seed=st.integers(0, 2**32 - 1))
def test_weighted_interpolates_orderings(theta, seed):
    rng = np.random.default_rng(seed)
    s, B, tau = random_state(rng), random_B(rng), 0.25
    lie = apply_T1(apply_T2(apply_T3(s, tau, B), tau, B, P), tau, P)
    rev = apply_T3(apply_T2(apply_T1(s, tau, P), tau, B, P), tau, B)
    got = step(Scheme.weighted(theta), s, tau, B, P)
    np.testing.assert_allclose(got.w, theta * lie.w + (1 - theta) * rev.w, rtol=0, atol=1e-14 * (1 + np.abs(lie.w).max()))
    np.testing.assert_allclose(got.v, theta * lie.v + (1 - theta) * rev.v, rtol=0, atol=1e-14 * (1 + np.abs(lie.v).max()))


# -- naive scheme --------------------------------------------------------------------


def test_naive_fixed_point():
    v = np.array([0.7, -0.3])
    s = CoupledState(dirichlet_lift(v, P), v)
    out = step_naive(s, 0.3, np.zeros((2, 2)), P)
    np.testing.assert_allclose(out.u, s.u, atol=1e-14)
    np.testing.assert_array_equal(out.v, v)


def test_naive_pure_heat():
    u = np.random.default_rng(9).standard_normal(63)
    out = step_naive(CoupledState(u, [0.0, 0.0]), 0.2, np.zeros((2, 2)), P)
    np.testing.assert_allclose(out.u, heat_propagate(u, 0.2, P), atol=1e-14)


# -- trajectories --------------------------------------------------------------------


@pytest.mark.parametrize("scheme", SCHEMES + [NAIVE_LIE], ids=lambda s: s.label)
def test_boundary_component_is_exact(scheme):
    prob = example2_problem(nx=32)
    traj = run(prob, scheme, 40)
    tau = prob.t_max / 40
    for k in (1, 10, 40):
        expected = matrix_exp(prob.B, k * tau) @ prob.v0
        assert rel(traj[k].v, expected) <= 1e-10


@pytest.mark.parametrize("scheme", SCHEMES + [NAIVE_LIE], ids=lambda s: s.label)
def test_zero_data_stays_zero(scheme):
    p = DomainParams(1.0, 1.0, 16)
    prob = Problem(p, np.array([[1.0, 2.0], [-3.0, 0.5]]), np.zeros(15), np.zeros(2), 1.0)
    for state in run(prob, scheme, 8):
        assert not state.u.any() and not state.v.any()


def test_run_length_and_initial_state():
    prob = example1_problem(nx=64)
    traj = run(prob, LIE, 20)
    assert len(traj) == 21
    np.testing.assert_array_equal(traj[0].u, prob.u0)


def test_run_rejects_bad_step_count():
    with pytest.raises(ContractError):
        run(example1_problem(nx=16), LIE, 0)


@pytest.mark.parametrize("scheme", SCHEMES + [NAIVE_LIE], ids=lambda s: s.label)
def test_run_final_matches_literal_run(scheme):
    prob = example2_problem(nx=128)
    a = run(prob, scheme, 50)[-1]
    b = run_final(prob, scheme, 50)
    assert rel(b.as_vector(), a.as_vector()) <= 1e-12


@pytest.mark.parametrize("scheme", SCHEMES, ids=lambda s: s.label)
def test_n_step_operator_is_linear(scheme):
    rng = np.random.default_rng(10)
    B = random_B(rng) * 0.5
    s = random_state(rng)
    only_w = TriangularState(s.w, [0.0, 0.0])
    only_v = TriangularState(np.zeros(63), s.v)
    a, b, c = s, only_w, only_v
    for _ in range(12):
        a = step(scheme, a, 0.05, B, P)
        b = step(scheme, b, 0.05, B, P)
        c = step(scheme, c, 0.05, B, P)
    assert rel(b.as_vector() + c.as_vector(), a.as_vector()) <= 1e-12


def test_steady_state_over_many_steps():
    p = DomainParams(0.5, 1.0, 128)
    v = np.array([2.0, -1.0])
    prob = Problem(p, np.zeros((2, 2)), dirichlet_lift(v, p), v, 1.0)
    for scheme in SCHEMES + [NAIVE_LIE]:
        final = run(prob, scheme, 100)[-1]
        assert rel(final.as_vector(), prob.initial_state.as_vector()) <= 1e-10


# -- n-step coupling block -----------------------------------------------------------------


@pytest.mark.parametrize("scheme", SCHEMES, ids=lambda s: s.label)
def test_Vn_single_term(scheme):
    y, B = np.array([0.5, -1.0]), np.array([[0.0, 1.0], [-4.0, 0.1]])
    np.testing.assert_allclose(apply_Vn(scheme, 1, 0.3, y, B, P), coupling_block(scheme, 0.3, y, B, P), rtol=1e-14)


def test_Vn_weighted_one_equals_lie():
    y, B = np.array([0.5, -1.0]), np.array([[0.0, 1.0], [-4.0, 0.1]])
    for n in (1, 3, 8):
        np.testing.assert_allclose(apply_Vn(Scheme.weighted(1.0), n, 1.0, y, B, P),
                                   apply_Vn(LIE, n, 1.0, y, B, P), rtol=0, atol=1e-15)


@pytest.mark.parametrize("scheme", SCHEMES, ids=lambda s: s.label)
def test_Vn_is_block_of_n_steps(scheme):
    y, B = np.array([0.5, -1.0]), np.array([[0.0, 1.0], [-4.0, 0.1]])
    n, t = 16, 1.2
    s = TriangularState(np.zeros(63), y)
    for _ in range(n):
        s = step_closed_form(scheme, s, t / n, B, P)
    assert rel(apply_Vn(scheme, n, t, y, B, P), s.w) <= 1e-12


def test_Vn_rejects_naive():
    with pytest.raises(UnsupportedSchemeError):
        apply_Vn(NAIVE_LIE, 4, 1.0, [1.0, 0.0], np.eye(2), P)

"""Operator algebra, states, measures and master-equation propagation."""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from hybridsim.quantum import (CollapseTerm, DegenerateSteadyState, DensityMatrix, HilbertLayout,
                               InvariantViolation, LayoutError, LindbladModel, QOperator,
                               basis_state, destroy, evolve, expectation, fidelity, number,
                               partial_trace, propagate_expm, recording, spin_ops, steady_state,
                               thermal_state, trace_distance)
from hybridsim.quantum.states import POSITIVITY_TOL, TRACE_TOL

# ---------------------------------------------------------------------------
# layout and operators
# ---------------------------------------------------------------------------


def test_destroy_matrix_elements_on_middle_factor():
    lay = HilbertLayout.of(spin=2, mech=4, cav=3)
    a = destroy(lay, "mech").matrix
    local = np.diag(np.sqrt([1.0, 2.0, 3.0]), k=1)
    ref = np.kron(np.kron(np.eye(2), local), np.eye(3))
    assert lay.total_dim == 24
    assert np.array_equal(a, ref)


def test_ladder_examples():
    a = destroy(HilbertLayout.of(mech=3), "mech").matrix
    assert np.array_equal(a, np.array([[0, 1, 0], [0, 0, np.sqrt(2)], [0, 0, 0]], dtype=complex))
    b = destroy(HilbertLayout.of(spin=2, mech=2), "mech").matrix
    assert np.array_equal(b, np.kron(np.eye(2), [[0, 1], [0, 0]]))


def test_truncated_commutator_is_identity_below_cutoff():
    n = 6
    lay = HilbertLayout.of(mech=n)
    a = destroy(lay, "mech")
    comm = a.commutator(a.dag()).matrix
    # identity except the top level, which carries -(n-1)
    assert np.allclose(comm, np.diag([1.0] * (n - 1) + [-(n - 1.0)]))
    rho = thermal_state(lay, "mech", 0.5, support=n - 1)
    assert np.real(np.trace(rho.matrix @ comm)) == pytest.approx(1.0, abs=1e-14)


def test_spin_operator_algebra():
    lay = HilbertLayout.of(spin=2)
    s = spin_ops(lay, "spin")
    assert np.allclose(s.sz.matrix, np.diag([1.0, -1.0]))
    # [sigma_+, sigma_-] = sigma_z
    assert np.allclose(s.sp.commutator(s.sm).matrix, s.sz.matrix)
    assert np.allclose((s.sp @ s.sm + s.sm @ s.sp).matrix, np.eye(2))
    assert np.allclose(s.sz.commutator(s.sp).matrix, 2 * s.sp.matrix)


def test_unknown_label_and_mixed_layouts_raise():
    lay = HilbertLayout.of(spin=2, cav=3)
    with pytest.raises(LayoutError):
        destroy(lay, "mech")
    with pytest.raises(LayoutError):
        destroy(lay, "cav") + destroy(HilbertLayout.of(spin=2, cav=4), "cav")
    with pytest.raises(LayoutError):
        spin_ops(lay, "cav")


def test_hermitian_flag_is_checked():
    lay = HilbertLayout.of(cav=3)
    with pytest.raises(ValueError):
        QOperator(lay, destroy(lay, "cav").matrix, hermitian=True)


# ---------------------------------------------------------------------------
# states and measures
# ---------------------------------------------------------------------------


def test_thermal_state_mean_occupation():
    lay = HilbertLayout.of(mech=10)
    rho = thermal_state(lay, "mech", 0.3)
    assert expectation(rho, number(lay, "mech")) == pytest.approx(0.3, abs=1e-3)


def test_zero_temperature_state_is_vacuum():
    lay = HilbertLayout.of(mech=5)
    assert np.array_equal(thermal_state(lay, "mech", 0.0).matrix, np.diag([1.0, 0, 0, 0, 0]).astype(complex))


def test_thermal_ground_population():
    lay = HilbertLayout.of(mech=10)
    p0 = thermal_state(lay, "mech", 0.1).populations()[0]
    # Gibbs ground weight 1/(1 + n)
    assert p0 == pytest.approx(1.0 / 1.1, rel=1e-9)


def test_fidelity_and_trace_distance_extremes():
    lay = HilbertLayout.of(cav=3)
    r0 = basis_state(lay, {"cav": 0})
    r1 = basis_state(lay, {"cav": 1})
    assert fidelity(r0, r0) == pytest.approx(1.0, abs=1e-12)
    assert fidelity(r0, r1) == pytest.approx(0.0, abs=1e-12)
    assert trace_distance(r0, r1) == pytest.approx(1.0, abs=1e-12)


def test_partial_trace_of_bell_state_is_maximally_mixed():
    lay = HilbertLayout.of(a=2, b=2)
    ket = np.array([1.0, 0.0, 0.0, 1.0]) / np.sqrt(2)
    red = partial_trace(DensityMatrix.from_ket(lay, ket), "a")
    assert np.allclose(red.matrix, np.eye(2) / 2, atol=1e-14)


def test_invalid_states_are_rejected():
    lay = HilbertLayout.of(cav=2)
    with pytest.raises(InvariantViolation):
        DensityMatrix.from_matrix(lay, np.diag([0.6, 0.6]))
    with pytest.raises(InvariantViolation):
        DensityMatrix.from_matrix(lay, np.diag([1.1, -0.1]))


def _random_state(rng, n, rank=None):
    k = n if rank is None else rank
    z = rng.normal(size=(n, k)) + 1j * rng.normal(size=(n, k))
    m = z @ z.conj().T
    return m / np.trace(m)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(2, 6))
def test_fidelity_symmetric_and_bounded(seed, n):
    rng = np.random.default_rng(seed)
    lay = HilbertLayout.of(x=n)
    a = DensityMatrix.from_matrix(lay, _random_state(rng, n))
    b = DensityMatrix.from_matrix(lay, _random_state(rng, n))
    f_ab, f_ba = fidelity(a, b), fidelity(b, a)
    assert 0.0 <= f_ab <= 1.0
    assert f_ab == pytest.approx(f_ba, abs=1e-8)
    # Fuchs-van de Graaf bounds
    d = trace_distance(a, b)
    assert 1 - np.sqrt(f_ab) <= d + 1e-9
    assert d <= np.sqrt(1 - f_ab) + 1e-9


# ---------------------------------------------------------------------------
# propagation
# ---------------------------------------------------------------------------


def _decay_model(n=5, kappa=1.0, n_th=0.0, omega=0.0):
    lay = HilbertLayout.of(cav=n)
    a = destroy(lay, "cav")
    h = QOperator(lay, omega * number(lay, "cav").matrix, hermitian=True)
    coll = [CollapseTerm(a, kappa * (n_th + 1))]
    if n_th > 0:
        coll.append(CollapseTerm(a.dag(), kappa * n_th))
    return lay, LindbladModel(lay, h, (), tuple(coll))


def test_single_photon_decays_exponentially():
    lay, model = _decay_model(kappa=1.3)
    t = np.linspace(0, 3, 31)
    res = evolve(model, basis_state(lay, {"cav": 1}), t, {"n": number(lay, "cav")})
    assert np.max(np.abs(res.series["n"] - np.exp(-1.3 * t))) < 1e-6


def test_swap_at_quarter_period():
    lay = HilbertLayout.of(a=3, b=3)
    g = 2.0
    a, b = destroy(lay, "a"), destroy(lay, "b")
    h = g * (a.dag() @ b + a @ b.dag())
    model = LindbladModel(lay, QOperator(lay, h.matrix, hermitian=True))
    res = evolve(model, basis_state(lay, {"a": 1}), [0.0, np.pi / (2 * g)],
                 {"na": number(lay, "a"), "nb": number(lay, "b")})
    assert res.series["na"][-1] == pytest.approx(0.0, abs=1e-7)
    assert res.series["nb"][-1] == pytest.approx(1.0, abs=1e-7)


def test_steady_state_of_pure_decay_is_vacuum():
    lay, model = _decay_model(n=4)
    ss = steady_state(model)
    assert ss.state.populations()[0] == pytest.approx(1.0, abs=1e-10)


def test_steady_state_of_thermal_bath():
    lay, model = _decay_model(n=25, n_th=0.5)
    ss = steady_state(model)
    assert expectation(ss.state, number(lay, "cav")) == pytest.approx(0.5, rel=1e-6)
    ss2 = steady_state(model, method="direct")
    assert np.allclose(ss.state.matrix, ss2.state.matrix, atol=1e-10)


def test_degenerate_steady_state_detected():
    lay, model = _decay_model(kappa=0.0, omega=1.0)
    with pytest.raises(DegenerateSteadyState):
        steady_state(model)


def test_dense_and_sparse_paths_agree():
    lay = HilbertLayout.of(a=4, b=4)
    a, b = destroy(lay, "a"), destroy(lay, "b")
    h = 0.7 * (a.dag() @ b + a @ b.dag()) + 0.3 * number(lay, "a")
    model = LindbladModel(lay, QOperator(lay, h.matrix, hermitian=True), (),
                          (CollapseTerm(a, 0.2), CollapseTerm(b.dag(), 0.05)))
    rho0 = basis_state(lay, {"a": 2})
    t = np.linspace(0, 5, 11)
    obs = {"na": number(lay, "a")}
    dense = evolve(model, rho0, t, obs, sparse=False, rtol=1e-10, atol=1e-12).series["na"]
    sparse = evolve(model, rho0, t, obs, sparse=True, rtol=1e-10, atol=1e-12).series["na"]
    exact = evolve(model, rho0, t, obs, method="expm").series["na"]
    assert np.max(np.abs(dense - sparse)) < 1e-8
    assert np.max(np.abs(dense - exact)) < 1e-8


def test_expm_method_rejects_driven_models():
    from hybridsim.quantum import DriveTerm
    lay = HilbertLayout.of(cav=2)
    a = destroy(lay, "cav")
    model = LindbladModel(lay, None, (DriveTerm(a, lambda t: 1.0), DriveTerm(a.dag(), lambda t: 1.0)))
    with pytest.raises(ValueError):
        evolve(model, basis_state(lay, {}), [0, 1], method="expm")


def test_run_log_records_every_evolution():
    lay, model = _decay_model()
    with recording() as log:
        evolve(model, basis_state(lay, {"cav": 2}), [0, 1, 2])
        evolve(model, basis_state(lay, {"cav": 1}), [0, 1])
    assert len(log) == 2
    worst = log.worst()
    assert worst.trace_error < TRACE_TOL
    assert worst.min_eigenvalue > POSITIVITY_TOL


def _random_model(rng, n):
    lay = HilbertLayout.of(x=n)
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    h = QOperator(lay, 0.5 * (z + z.conj().T), hermitian=True)
    coll = []
    for _ in range(2):
        c = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        coll.append(CollapseTerm(QOperator(lay, c / np.linalg.norm(c)), float(rng.uniform(0, 1))))
    return lay, LindbladModel(lay, h, (), tuple(coll))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(2, 6))
def test_evolution_preserves_state_invariants(seed, n):
    rng = np.random.default_rng(seed)
    lay, model = _random_model(rng, n)
    rho0 = DensityMatrix.from_matrix(lay, _random_state(rng, n, rank=1))
    res = evolve(model, rho0, np.linspace(0, 2, 9), store_states=True, rtol=1e-10, atol=1e-12)
    assert res.max_trace_error < TRACE_TOL
    assert res.max_hermiticity_error < 1e-9
    assert res.min_eigenvalue > POSITIVITY_TOL


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(2, 6))
def test_evolution_matches_matrix_exponential(seed, n):
    rng = np.random.default_rng(seed)
    lay, model = _random_model(rng, n)
    rho0 = DensityMatrix.from_matrix(lay, _random_state(rng, n))
    t = np.linspace(0, 1.5, 4)
    res = evolve(model, rho0, t, store_states=True, rtol=1e-10, atol=1e-12)
    ref = propagate_expm(model, rho0, t)
    for s, r in zip(res.states, ref):
        assert np.max(np.abs(s.matrix - r)) < 1e-7


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1), st.floats(0.0, 1.0))
def test_evolution_is_linear_in_the_initial_state(seed, w):
    rng = np.random.default_rng(seed)
    n = 4
    lay, model = _random_model(rng, n)
    r1, r2 = _random_state(rng, n), _random_state(rng, n)
    t = [0.0, 1.0]

    def final(m):
        return evolve(model, DensityMatrix.from_matrix(lay, m), t, rtol=1e-11, atol=1e-13).final_state.matrix

    mix = final(w * r1 + (1 - w) * r2)
    assert np.max(np.abs(mix - (w * final(r1) + (1 - w) * final(r2)))) < 1e-8


def test_liouvillian_generator_is_reference_exponential():
    # independent construction of the vectorized generator (row-major vec)
    rng = np.random.default_rng(3)
    lay, model = _random_model(rng, 3)
    n = 3
    eye = np.eye(n)
    h = model.hamiltonian.matrix
    lv = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for c in model.collapse_terms:
        m = c.operator.matrix
        cdc = m.conj().T @ m
        lv += c.rate * (np.kron(m, m.conj()) - 0.5 * np.kron(cdc, eye) - 0.5 * np.kron(eye, cdc.T))
    rho0 = DensityMatrix.from_matrix(lay, _random_state(rng, n))
    ref = (expm(lv * 0.8) @ rho0.matrix.ravel()).reshape(n, n)
    got = propagate_expm(model, rho0, [0.0, 0.8])[-1]
    assert np.max(np.abs(got - ref)) < 1e-12

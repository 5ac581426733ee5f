"""Tripartite Hamiltonian, polaritons, Rabi exchange, transfer and elimination."""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hybridsim.constants import TWO_PI
from hybridsim.cooling import CoolingParams, cooling_master_equation
from hybridsim.interface import (EffectiveParams, PulseSchedule, TripartiteParams, bright_polariton_coupling,
                                 build_effective_model, build_tripartite_hamiltonian, dark_polariton_check,
                                 effective_vs_full_comparison, excitation_number, initial_state,
                                 interaction_hamiltonian, polariton_basis, rabi_scenario,
                                 single_excitation_energies, spin_state_matrix, stirap_transfer,
                                 tripartite_model)
from hybridsim.quantum import (SPIN_MINUS1, DensityMatrix, HilbertLayout, basis_projector, destroy, evolve,
                               number, projector, spin_ops, steady_state)

LAYOUT = HilbertLayout.of(spin=2, mech=3, cav=3)


# ---------------------------------------------------------------------------
# Hamiltonian
# ---------------------------------------------------------------------------


def test_uncoupled_hamiltonian_is_diagonal():
    p = TripartiteParams(omega_plus=3.0, omega_m=1.3, detuning=0.7, g=0.0, lam=0.0, n_mech=3, n_cav=4)
    h = build_tripartite_hamiltonian(p).matrix
    assert np.allclose(h, np.diag(np.diag(h)), atol=0)
    lay = p.layout
    for ms, s in ((+1, 0), (-1, 1)):
        for nb in range(3):
            for nc in range(4):
                i = lay.basis_index({"spin": s, "mech": nb, "cav": nc})
                assert h[i, i].real == pytest.approx(ms * 3.0 / 2 + nb * 1.3 + nc * 0.7, abs=1e-14)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 5.0), st.floats(0.0, 5.0), st.floats(0.5, 20.0))
def test_single_excitation_spectrum(g, lam, omega):
    p = TripartiteParams(omega_plus=omega, omega_m=omega, detuning=omega, g=g, lam=lam, n_mech=3, n_cav=3)
    h = build_tripartite_hamiltonian(p).matrix
    assert np.max(np.abs(h - h.conj().T)) < 1e-14
    r = math.hypot(g, lam)
    ev = single_excitation_energies(p)
    assert np.allclose(ev, [omega - r, omega, omega + r], rtol=1e-10, atol=1e-10 * omega)


def test_single_excitation_eigenvectors_orthonormal():
    p = TripartiteParams(omega_plus=2.0, omega_m=2.0, detuning=2.0, g=0.7, lam=0.4, n_mech=2, n_cav=2)
    lay = p.layout
    h = build_tripartite_hamiltonian(p).matrix
    idx = [lay.basis_index({"spin": SPIN_MINUS1}), lay.basis_index({"spin": 1, "mech": 1}),
           lay.basis_index({"spin": 1, "cav": 1})]
    _, vecs = np.linalg.eigh(h[np.ix_(idx, idx)])
    assert np.allclose(vecs.conj().T @ vecs, np.eye(3), atol=1e-12)


def test_excitation_number_commutes_with_coherent_hamiltonian():
    p = TripartiteParams(omega_plus=2.0, omega_m=1.5, detuning=1.1, g=0.3, lam=0.5, n_mech=4, n_cav=3)
    h = build_tripartite_hamiltonian(p)
    n = excitation_number(p.layout)
    assert np.max(np.abs(h.commutator(n).matrix)) < 1e-13


# ---------------------------------------------------------------------------
# polaritons
# ---------------------------------------------------------------------------


def test_polariton_limits():
    b = polariton_basis(1.0, 0.0, 5.0, LAYOUT)
    assert b.theta == 0.0
    assert np.allclose(b.p_dark.matrix, spin_ops(LAYOUT, "spin").sm.matrix)
    b = polariton_basis(0.0, 1.0, 5.0, LAYOUT)
    assert b.theta == pytest.approx(math.pi / 2)
    assert np.allclose(b.p_dark.matrix, -destroy(LAYOUT, "cav").matrix, atol=1e-15)
    b = polariton_basis(2.0, 2.0, 5.0, LAYOUT)
    assert b.theta == pytest.approx(math.pi / 4)
    assert b.omega_plus == pytest.approx(5.0 + math.sqrt(2) * 2.0)
    assert b.omega_minus == pytest.approx(5.0 - math.sqrt(2) * 2.0)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.0, math.pi / 2), st.floats(0.1, 10.0))
def test_dark_polariton_decouples_and_bright_couples(theta, r):
    g, lam = r * math.cos(theta), r * math.sin(theta)
    basis = polariton_basis(g, lam, 1.0, LAYOUT)
    h = interaction_hamiltonian(LAYOUT, g, lam)
    assert dark_polariton_check(basis, h) < 1e-12
    assert bright_polariton_coupling(basis, h) == pytest.approx(math.hypot(g, lam), rel=1e-12)


# ---------------------------------------------------------------------------
# Rabi exchange
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("g,lam", [(1.0, 1.0), (1.0, 0.5), (0.3, 1.2)])
def test_coherent_exchange_matches_three_level_oracle(g, lam):
    # single-excitation block at resonance: spin amplitude (g^2 + lam^2 cos rt) / r^2
    p = TripartiteParams(omega_plus=1.0, omega_m=1.0, detuning=1.0, g=g, lam=lam, n_mech=3, n_cav=3)
    r = math.hypot(g, lam)
    res = rabi_scenario(p, 4 * math.pi / r, n_times=81, dissipative=False, n_m0=0.0)
    t = res.series.times
    expect = ((g ** 2 + lam ** 2 * np.cos(r * t)) / r ** 2) ** 2
    assert np.max(np.abs(res.series["P_spin"] - expect)) < 1e-7
    assert res.max_excitation_drift < 1e-8


def test_decoupled_spin_is_frozen():
    p = TripartiteParams(omega_plus=1.0, omega_m=1.0, detuning=1.0, g=1.0, lam=0.0, n_mech=3, n_cav=3)
    res = rabi_scenario(p, 10.0, n_times=21, dissipative=False, n_m0=0.3)
    assert np.max(np.abs(res.series["P_spin"] - 1.0)) < 1e-10


def test_dissipative_rabi_reaches_cavity():
    s = TWO_PI
    p = TripartiteParams(omega_plus=s * 320e3, omega_m=s * 320e3, detuning=s * 320e3, g=s * 16e3,
                         lam=s * 16e3, kappa=s * 6e3, gamma_m=s * 3.2, gamma_s=s * 2e3, n_th=1000.0,
                         n_mech=6, n_cav=4)
    res = rabi_scenario(p, 100e-6, n_times=101, n_m0=0.3)
    assert res.series["n_a"].max() > 0.2
    # damped: late-time spin population oscillation smaller than early
    ps = res.series["P_spin"]
    assert np.ptp(ps[60:]) < np.ptp(ps[:40])


@settings(max_examples=8, deadline=None)
@given(st.floats(0.2, 5.0))
def test_trajectories_invariant_under_common_rescaling(f):
    base = TripartiteParams(omega_plus=1.0, omega_m=1.0, detuning=1.0, g=1.0, lam=0.8, kappa=0.1,
                            gamma_m=0.01, gamma_s=0.05, n_th=0.5, n_mech=4, n_cav=3)
    t = np.linspace(0, 6, 13)

    def run(p, times):
        lay = p.layout
        return evolve(tripartite_model(p), initial_state(p, spin_state_matrix([1, 0]), 0.2), times,
                      {"s": projector(lay, "spin", SPIN_MINUS1), "a": number(lay, "cav")},
                      rtol=1e-10, atol=1e-12).series

    a, b = run(base, t), run(base.scaled(f), t / f)
    for k in ("s", "a"):
        assert np.max(np.abs(a[k] - b[k])) < 1e-7


# ---------------------------------------------------------------------------
# transfer
# ---------------------------------------------------------------------------

TRANSFER = TripartiteParams(omega_plus=0.0, omega_m=0.0, detuning=0.0, g=0.0, lam=1.0, kappa=0.1,
                            gamma_m=1e-4, gamma_s=0.1, n_th=1000.0, n_mech=8, n_cav=5)


def test_schedule_ordering_and_shape():
    s = PulseSchedule(g0=1.8, lam=1.0)
    assert s.g(0.0) == pytest.approx(1.8)
    assert s.g(8.0) < 1e-6 * 1.8
    assert s.theta(0.0) < math.pi / 4 < s.theta(8.0)
    with pytest.raises(ValueError):
        PulseSchedule(g0=0.5, lam=1.0)


def test_constant_schedule_does_not_transfer():
    s = PulseSchedule(g0=1.8, lam=1.0, shape="constant")
    r = stirap_transfer(TRANSFER.without_dissipation(), s, n_m0=0.0, dissipative=False)
    assert r.fidelity < 0.9


def test_slow_dissipation_free_transfer_converges_above_099():
    sched = PulseSchedule(g0=1.8, lam=1.0)
    p = TRANSFER.without_dissipation()
    prev = stirap_transfer(p, sched, n_m0=0.0, dissipative=False).fidelity
    factor = 1.0
    for _ in range(4):
        factor *= 2.0
        f = stirap_transfer(p, sched.stretched(factor), n_m0=0.0, dissipative=False).fidelity
        converged = abs(f - prev) < 0.01
        prev = f
        if converged:
            break
    assert converged
    assert prev > 0.99


def test_adiabaticity_guard():
    with pytest.raises(ValueError):
        stirap_transfer(TRANSFER, PulseSchedule(g0=1.8, lam=1.0, width=0.1), max_adiabaticity=0.1)


# ---------------------------------------------------------------------------
# adiabatic elimination
# ---------------------------------------------------------------------------


def test_effective_parameters_reference_case():
    g = 1.0
    e = EffectiveParams(delta1=10 * g, delta2=10 * g, g=g, lam=g, kappa=0.1)
    assert e.g_eff == pytest.approx(0.1 * g, rel=1e-14)
    assert e.kappa_eff1 == pytest.approx(e.kappa)
    assert e.kappa_eff2 == e.gamma_eff1 == e.gamma_eff2 == 0.0
    assert EffectiveParams(delta1=10.0, delta2=10.0, g=1.0, lam=0.0).g_eff == 0.0


def test_effective_coupling_from_khz_example():
    e = EffectiveParams(delta1=TWO_PI * 300e3, delta2=TWO_PI * 300e3, g=TWO_PI * 60e3, lam=TWO_PI * 40e3)
    assert e.g_eff / TWO_PI == pytest.approx(10e3, rel=0.25)


@settings(max_examples=40, deadline=None)
@given(st.floats(1.0, 100.0), st.floats(0.01, 1.0), st.floats(0.01, 1.0), st.floats(0.0, 1e3),
       st.floats(0.0, 1.0))
def test_effective_rate_identities(d1, g, lam, n_th, gm):
    e = EffectiveParams(delta1=d1, delta2=d1, g=g, lam=lam, kappa=0.3, gamma_m=gm, n_th=n_th)
    beta2, alpha2 = (g / d1) ** 2, (lam / d1) ** 2
    # the subtraction is exact up to rounding of kappa_eff1
    assert e.kappa_eff1 - e.kappa == pytest.approx(beta2 * (n_th + 1) * gm, rel=1e-12,
                                                   abs=4 * np.finfo(float).eps * e.kappa_eff1)
    assert e.kappa_eff2 == pytest.approx(beta2 * n_th * gm, rel=1e-12, abs=1e-300)
    assert e.gamma_eff1 == pytest.approx(alpha2 * (n_th + 1) * gm, rel=1e-12, abs=1e-300)
    assert e.gamma_eff2 == pytest.approx(alpha2 * n_th * gm, rel=1e-12, abs=1e-300)


def test_decoupled_effective_spin_stays_excited():
    e = EffectiveParams(delta1=10.0, delta2=10.0, g=1.0, lam=0.0)
    m = build_effective_model(e, 3)
    lay = m.layout
    rho0 = DensityMatrix.from_matrix(lay, lay.product({"spin": spin_state_matrix([1, 0]),
                                                       "cav": basis_projector(3, 0)}))
    s = evolve(m, rho0, np.linspace(0, 50, 11), {"s": projector(lay, "spin", SPIN_MINUS1)}).series["s"]
    assert np.max(np.abs(s - 1.0)) < 1e-12


def _elimination_params(ratio):
    g = 1.0
    d1 = ratio * g
    eff = EffectiveParams(delta1=d1, delta2=0.0, g=g, lam=g)
    wp = 50.0
    return TripartiteParams(omega_plus=wp, omega_m=wp + d1, detuning=wp + eff.resonant_delta2(), g=g, lam=g,
                            kappa=0.01, gamma_m=0.01, gamma_s=0.01, n_th=0.0, n_mech=4, n_cav=3)


def test_elimination_accuracy_improves_with_detuning():
    td = [effective_vs_full_comparison(_elimination_params(r), n_times=101).max_trace_distance
          for r in (10, 30, 100)]
    assert td[0] < 0.1
    assert td[0] > td[1] > td[2]


def test_rwa_cooling_variant_close_at_large_frequency():
    p = CoolingParams(g=0.3, omega_m=20.0, kappa=1.0, gamma_m=0.05, n_th=0.5)
    nb = []
    for rwa in (False, True):
        m = cooling_master_equation(p, 5, 9, frame="lab", rwa=rwa)
        nb.append(float(np.real(np.trace(steady_state(m).state.matrix @ number(m.layout, "mech").matrix))))
    # counter-rotating corrections are of order (g / omega_m)^2
    assert abs(nb[0] - nb[1]) < 10 * (0.3 / 20.0) ** 2

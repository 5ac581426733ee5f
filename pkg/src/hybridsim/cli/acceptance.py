"""Acceptance suite: twelve numbered criteria, each with its own runtime budget.

Every criterion returns a :class:`CriterionResult` holding the individual
checks it made.  A criterion passes when all its checks pass and it finished
within its budget.  Dynamics run while the suite executes are logged so that
criterion 11 can audit their invariant diagnostics.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .. import cooling, device, interface
from ..constants import TWO_PI
from ..quantum import (CollapseTerm, basis_projector, HilbertLayout, LindbladModel, QOperator, destroy, evolve,
                       number, propagate_expm, recording, RunLog, spin_ops,
                       thermal_state)
from ..quantum.lindblad import EVOLVE_HERM_TOL
from ..quantum.states import POSITIVITY_TOL, TRACE_TOL
from . import scenarios
from .config import load_preset


@dataclass
class Check:
    name: str
    passed: bool
    detail: str


@dataclass
class CriterionResult:
    id: int
    title: str
    checks: list
    runtime: float
    budget: float

    @property
    def within_budget(self) -> bool:
        return self.runtime < self.budget

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks) and self.within_budget

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        failed = [c for c in self.checks if not c.passed]
        why = "; ".join(f"{c.name}: {c.detail}" for c in failed)
        if not self.within_budget:
            why = (why + "; " if why else "") + f"runtime {self.runtime:.1f} s >= {self.budget:g} s"
        return f"[{status}] criterion {self.id:2d} {self.title} ({self.runtime:.2f} s)" + \
            (f" -- {why}" if why else "")

    def as_dict(self) -> dict:
        return {"id": self.id, "title": self.title, "passed": self.passed,
                "runtime_s": self.runtime, "budget_s": self.budget,
                "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail}
                           for c in self.checks]}


def _within(name: str, value: float, lo: float, hi: float, fmt: str = ".6g") -> Check:
    ok = lo <= value <= hi
    return Check(name, bool(ok), f"{value:{fmt}} in [{lo:{fmt}}, {hi:{fmt}}]")


def _below(name: str, value: float, bound: float) -> Check:
    return Check(name, bool(value < bound), f"{value:.3e} < {bound:.1e}")


def _rel(value: float, ref: float, tol: float, name: str) -> Check:
    r = abs(value - ref) / abs(ref)
    return Check(name, bool(r <= tol), f"{value:.6g} vs {ref:.6g} (rel {r:.3e} <= {tol:g})")


# ---------------------------------------------------------------------------
# criteria
# ---------------------------------------------------------------------------

def c1_device_parameters() -> list[Check]:
    s = scenarios.run_params(load_preset("params_device")).scalars
    return [
        _rel(s["omega_c_Hz"], 6e9, 0.05, "omega_c/2pi"),
        _rel(s["field_zpf_V_per_m"], 0.76, 0.05, "vacuum field"),
        _rel(s["omega_m_Hz"], 320e3, 0.25, "omega_m/2pi"),
        _within("|g|/2pi", abs(s["g_Hz"]), 8e3, 32e3),
        _within("lambda/2pi", abs(s["lam_Hz"]), 8e3, 32e3),
        _rel(s["kappa_Hz"], 6e3, 0.05, "kappa/2pi"),
        _rel(s["gamma_m_Hz"], 3.2, 0.05, "gamma_m/2pi"),
        _within("n_th", s["n_th"], 900, 1500),
    ]


def c2_magnet_gradient() -> list[Check]:
    grad = device.magnet_gradient(device.MagnetSpec(length=200e-9, width=50e-9, thickness=50e-9,
                                                    magnetization=1.5e6, standoff=60e-9))
    return [_within("dB/dx [T/m]", grad, 1e7, 2e7, ".4e")]


def _reference_cooling(n_th: float, g: float = TWO_PI * 16e3, kappa: float = TWO_PI * 6e3):
    return cooling.CoolingParams(g=g, omega_m=TWO_PI * 320e3, kappa=kappa,
                                 gamma_m=TWO_PI * 3.2, n_th=n_th)


def c3_cooling_exactness() -> list[Check]:
    p = _reference_cooling(2.0)
    xc = cooling.cooling_trajectory_crosscheck(p, t_end=200e-6, n_bar0=2.0)
    return [Check("moments vs master equation n_b(t)", xc.max_relative_deviation < 1e-3,
                  f"max rel {xc.max_relative_deviation:.3e} < 1e-3 "
                  f"(top Fock population {xc.top_level_population:.1e})")]


def c4_analytic_limits() -> list[Check]:
    out = []
    kappa = TWO_PI * 6e3
    w = TWO_PI * 320e3
    for n in (0.0, 10.0, 1000.0):
        p = _reference_cooling(n, g=kappa / 20)
        out.append(_rel(cooling.steady_moments(p).n_b.real,
                        cooling.final_occupancy_formulas(p).n_f_weak, 0.05, f"weak limit n_th={n:g}"))
        g = w / 20
        p = _reference_cooling(n, g=g, kappa=g / 10)
        out.append(_rel(cooling.steady_moments(p).n_b.real,
                        cooling.final_occupancy_formulas(p).n_f_strong, 0.10, f"strong limit n_th={n:g}"))
    return out


def c5_ground_state_time() -> list[Check]:
    cfg = load_preset("cool_trajectory")
    _, p = scenarios._cooling_params(cfg)
    times = np.linspace(0.0, 300e-6, 3001)
    ser = cooling.evolve_moments(p, cooling.thermal_moments(0.0, p.n_th), times)
    window = (times >= 30e-6) & (times <= 300e-6)
    nb = ser["n_b"][window]
    hit = times[window][nb < 1.0]
    first = cooling.ground_state_entry(ser).first_below
    detail = (f"n_b(0)={ser['n_b'][0]:.0f}; min n_b in window {nb.min():.3f}; "
              f"first t in window with n_b<1: {hit[0] * 1e6:.1f} us" if hit.size else
              f"min n_b in window {nb.min():.3f}")
    detail += f"; first crossing overall {first * 1e6:.1f} us" if first is not None else ""
    return [Check("n_b < 1 for some t in [30, 300] us", bool(hit.size), detail)]


def c6_polaron_spectrum(n_pairs: int = 20, seed: int = 6) -> list[Check]:
    rng = np.random.default_rng(seed)
    w = TWO_PI * 320e3
    worst = 0.0
    for g, lam in rng.uniform(0.1e3, 50e3, size=(n_pairs, 2)) * TWO_PI:
        p = interface.TripartiteParams(w, w, w, g, lam, n_mech=3, n_cav=3)
        r = math.hypot(g, lam)
        ref = np.array([w - r, w, w + r])
        e = np.sort(interface.single_excitation_energies(p))
        worst = max(worst, float(np.max(np.abs(e - ref) / ref)))
    return [_below(f"max rel eigenvalue error over {n_pairs} pairs", worst, 1e-10)]


def c7_dark_state(n_pairs: int = 20, seed: int = 7) -> list[Check]:
    # couplings in units of a reference rate (hbar = 1, frequencies ~ 1)
    rng = np.random.default_rng(seed)
    lay = HilbertLayout.of(spin=2, mech=3, cav=3)
    worst = 0.0
    for g, lam in rng.uniform(0.1, 5.0, size=(n_pairs, 2)):
        basis = interface.polariton_basis(g, lam, 1.0, lay)
        worst = max(worst, interface.dark_polariton_check(basis, interface.interaction_hamiltonian(lay, g, lam)))
    return [_below(f"max ||H_int P_d^dag|vac>|| over {n_pairs} pairs", worst, 1e-12)]


def _transfer(overrides: dict | None = None) -> interface.TransferResult:
    cfg = load_preset("transfer_gaussian")
    for k, v in (overrides or {}).items():
        cfg = cfg.with_value(k, v)
    p, sched = scenarios.transfer_setup(cfg)
    return interface.stirap_transfer(p, sched, n_m0=cfg.raw("transfer.n_m0"),
                                     n_times=cfg.raw("numerics.n_times"),
                                     dissipative=cfg.raw("transfer.dissipative"))


def c8_stirap() -> list[Check]:
    r = _transfer()
    free = _transfer({"transfer.dissipative": False})
    return [
        Check("fidelity with dissipation", r.fidelity > 0.90,
              f"{r.fidelity:.4f} > 0.90 (adiabaticity {r.adiabaticity:.3f})"),
        Check("fidelity without dissipation", free.fidelity > 0.99, f"{free.fidelity:.4f} > 0.99"),
    ]


def c9_noise_immunity() -> list[Check]:
    base = _transfer()
    cfg = load_preset("transfer_gaussian")
    doubled = _transfer({"transfer.n_th": 2 * cfg.raw("transfer.n_th")})
    d = abs(doubled.fidelity - base.fidelity)
    return [Check("fidelity change on doubling gamma_m n_th", d < 0.02,
                  f"|{doubled.fidelity:.4f} - {base.fidelity:.4f}| = {d:.4f} < 0.02")]


def c10_effective_model() -> list[Check]:
    eff = interface.EffectiveParams(delta1=10.0, delta2=0.0, g=1.0, lam=1.0)
    out = [Check("g_eff = 0.1 g at delta = 10 g, g = lambda", eff.g_eff == 0.1, f"g_eff = {eff.g_eff!r}")]
    cfg = load_preset("effective_model")
    tds = []
    for delta in (10.0, 30.0, 100.0):
        p = scenarios.effective_setup(cfg.with_value("effective.delta_per_g", delta))
        tds.append(interface.effective_vs_full_comparison(p, n_times=cfg.raw("numerics.n_times")).max_trace_distance)
    out.append(_below("max trace distance at delta = 10 g", tds[0], 0.1))
    out.append(Check("trace distance decreasing at 30 g, 100 g", tds[0] > tds[1] > tds[2],
                     " > ".join(f"{x:.3e}" for x in tds)))
    fit = interface.fit_effective_rabi_frequency(scenarios.effective_setup(cfg),
                                                 n_periods=cfg.raw("effective.fit_periods"))
    out.append(_rel(fit.frequency, fit.expected, 0.05, "fitted Rabi frequency vs 2 g_eff"))
    return out


def _oracle_models() -> list[tuple[str, LindbladModel, object]]:
    """Small autonomous models (dim <= 6) in units of a reference rate."""
    models = []
    lay = HilbertLayout.of(spin=2, cav=3)
    a, s = destroy(lay, "cav"), spin_ops(lay, "spin")
    h = 0.7 * number(lay, "cav") + 0.35 * s.sz + 0.9 * (a.dag() @ s.sm + a @ s.sp)
    m = LindbladModel(lay, QOperator(lay, h.matrix, hermitian=True), (),
                      (CollapseTerm(a, 0.2), CollapseTerm(s.sz, 0.05)))
    models.append(("spin-cavity", m, thermal_state(lay, "cav", 0.4, others={"spin": basis_projector(2, 0)})))
    lay = HilbertLayout.of(spin=2, mech=3)
    b, s = destroy(lay, "mech"), spin_ops(lay, "spin")
    h = 1.1 * number(lay, "mech") + 0.55 * s.sz + 0.6 * (b @ s.sp + b.dag() @ s.sm)
    m = LindbladModel(lay, QOperator(lay, h.matrix, hermitian=True), (),
                      (CollapseTerm(b, 0.1 * 1.5), CollapseTerm(b.dag(), 0.1 * 0.5)))
    models.append(("spin-phonon thermal", m, thermal_state(lay, "mech", 0.3, others={"spin": basis_projector(2, 1)})))
    lay = HilbertLayout.of(cav=2, mech=3)
    a, b = destroy(lay, "cav"), destroy(lay, "mech")
    x = (a + a.dag()) @ (b + b.dag())
    h = 1.0 * number(lay, "cav") + 1.0 * number(lay, "mech") + 0.15 * x
    m = LindbladModel(lay, QOperator(lay, h.matrix, hermitian=True), (),
                      (CollapseTerm(a, 0.3), CollapseTerm(b, 0.02)))
    models.append(("beam-splitter cooling", m, thermal_state(lay, "mech", 0.5)))
    return models


def _invariant_checks(runs) -> list[Check]:
    w = runs.worst()
    return [
        Check(f"trace over {len(runs)} runs", w.trace_error <= TRACE_TOL,
              f"max |Tr rho - 1| = {w.trace_error:.2e} <= {TRACE_TOL:.0e}"),
        Check(f"Hermiticity over {len(runs)} runs", w.hermiticity_error <= EVOLVE_HERM_TOL,
              f"max = {w.hermiticity_error:.2e} <= {EVOLVE_HERM_TOL:.0e}"),
        Check(f"positivity over {len(runs)} runs", w.min_eigenvalue > POSITIVITY_TOL,
              f"min eigenvalue {w.min_eigenvalue:.2e} > {POSITIVITY_TOL:.0e}"),
    ]


def c11_invariants(previous=None) -> list[Check]:
    earlier = RunLog(list(previous.records)) if previous is not None else RunLog()
    with recording() as own:
        # excitation number: resonant Rabi exchange and a time-dependent pulse, no dissipation
        cfg = load_preset("rabi_dissipative").with_value("rabi.dissipative", False).with_value("rabi.n_m0", 0.0)
        rabi = scenarios.run_rabi(cfg).scalars["max_excitation_drift"]
        tcfg = load_preset("transfer_gaussian")
        p, sched = scenarios.transfer_setup(tcfg)
        model = interface.tripartite_model(p, g_schedule=lambda t: float(sched.g(t)), dissipative=False)
        rho0 = interface.initial_state(p, interface.spin_state_matrix([1 / math.sqrt(2)] * 2), 0.0)
        n_exc = interface.excitation_number(p.layout)
        ts = np.linspace(sched.t_start, sched.t_end, 101)
        ser = evolve(model, rho0, ts, {"N": n_exc}, rtol=1e-10, atol=1e-12).series["N"]
        pulse = float(np.max(np.abs(ser - ser[0])))
        # integrator against exact propagators
        worst, worst_name = 0.0, ""
        for name, m, rho in _oracle_models():
            t = np.linspace(0.0, 10.0, 21)
            res = evolve(m, rho, t, store_states=True)
            ref = propagate_expm(m, rho, t)
            d = max(float(np.max(np.abs(s.matrix - r))) for s, r in zip(res.states, ref))
            if d >= worst:
                worst, worst_name = d, name
    checks = [_below("excitation drift, Rabi exchange", rabi, 1e-8),
              _below("excitation drift, pulsed coupling", pulse, 1e-8),
              _below(f"RK45 vs expm, max |delta rho| (worst: {worst_name})", worst, 1e-7)]
    checks += _invariant_checks(own)
    if len(earlier):
        checks += [Check("earlier criteria: " + c.name, c.passed, c.detail)
                   for c in _invariant_checks(earlier)]
    return checks


def c12_decoherence() -> list[Check]:
    s = scenarios.run_params(load_preset("params_device")).scalars
    return [
        _within("gamma_sc [1/s]", s["gamma_sc_per_s"], 1e-6, 1e-4, ".3e"),
        _below("strain spin-spin strength [Hz]", s["strain_coupling_Hz"], 1e-4),
        Check("both flagged negligible vs gamma_m", s["gamma_sc_negligible"] and s["strain_negligible"],
              f"gamma_sc {s['gamma_sc_negligible']}, strain {s['strain_negligible']}"),
    ]


@dataclass(frozen=True)
class Criterion:
    id: int
    title: str
    budget: float
    fn: Callable


CRITERIA = (
    Criterion(1, "device parameters", 1.0, c1_device_parameters),
    Criterion(2, "magnet gradient", 1.0, c2_magnet_gradient),
    Criterion(3, "cooling moments vs master equation", 60.0, c3_cooling_exactness),
    Criterion(4, "cooling analytic limits", 5.0, c4_analytic_limits),
    Criterion(5, "ground-state cooling time", 5.0, c5_ground_state_time),
    Criterion(6, "polaron spectrum", 5.0, c6_polaron_spectrum),
    Criterion(7, "dark polariton decoupling", 5.0, c7_dark_state),
    Criterion(8, "dark-state transfer fidelity", 120.0, c8_stirap),
    Criterion(9, "mechanical-noise immunity", 240.0, c9_noise_immunity),
    Criterion(10, "effective spin-cavity model", 120.0, c10_effective_model),
    Criterion(11, "invariant suite", 60.0, c11_invariants),
    Criterion(12, "decoherence estimates", 1.0, c12_decoherence),
)
CRITERION_IDS = tuple(c.id for c in CRITERIA)


def run_criterion(crit: Criterion, previous=None) -> CriterionResult:
    start = time.perf_counter()
    try:
        checks = crit.fn(previous) if crit.id == 11 else crit.fn()
    except Exception as exc:  # a crash is a failed criterion, not a failed report
        checks = [Check("completed", False, f"{type(exc).__name__}: {exc}")]
    return CriterionResult(crit.id, crit.title, checks, time.perf_counter() - start, crit.budget)


def run_acceptance(ids=None, echo: Callable[[str], None] | None = None) -> list[CriterionResult]:
    wanted = CRITERION_IDS if ids is None else tuple(ids)
    unknown = set(wanted) - set(CRITERION_IDS)
    if unknown:
        raise ValueError(f"unknown criterion ids {sorted(unknown)}")
    results = []
    with recording() as runs:
        for crit in CRITERIA:
            if crit.id not in wanted:
                continue
            res = run_criterion(crit, runs)
            results.append(res)
            if echo is not None:
                echo(res.line())
    return results

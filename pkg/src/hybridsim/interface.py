"""Spin-mechanics-cavity dynamics.

Layout is always (spin:2, mech:N_m, cav:N_c) with the spin basis (|-1>, |0>).
The tripartite Hamiltonian (hbar = 1) is

    H = (ω+/2) σz + ω_m b†b + Δ a†a + g (a†b + a b†) + λ (b σ+ + b† σ-)

with dissipators κ D[a], γ_s D[σz], γ_m (n_th+1) D[b], γ_m n_th D[b†].
Couplings enter through their magnitudes.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import curve_fit

from .quantum import (SPIN_MINUS1, SPIN_ZERO, CollapseTerm, DensityMatrix, DriveTerm,
                      HilbertLayout, LindbladModel, QOperator, TimeSeries, basis_projector,
                      destroy, evolve, fidelity, ket_projector, number, partial_trace, projector,
                      spin_ops, thermal_populations, trace_distance)


@dataclass(frozen=True)
class TripartiteParams:
    """Frequencies in rad/s, rates in 1/s, Fock cutoffs for mechanics and cavity."""

    omega_plus: float
    omega_m: float
    detuning: float
    g: float
    lam: float
    kappa: float = 0.0
    gamma_m: float = 0.0
    gamma_s: float = 0.0
    n_th: float = 0.0
    n_mech: int = 8
    n_cav: int = 8

    def __post_init__(self):
        if min(self.n_mech, self.n_cav) < 2:
            raise ValueError("cutoffs must be at least 2")
        if min(self.kappa, self.gamma_m, self.gamma_s, self.n_th) < 0:
            raise ValueError("rates and n_th must be non-negative")

    @property
    def layout(self) -> HilbertLayout:
        return HilbertLayout.of(spin=2, mech=self.n_mech, cav=self.n_cav)

    @classmethod
    def from_couplings(cls, cs, omega_plus: float | None = None, n_mech: int = 8,
                       n_cav: int = 8) -> "TripartiteParams":
        """Resonant working point (ω+ = Δ = ω_m unless ``omega_plus`` given)."""
        wp = cs.omega_m if omega_plus is None else omega_plus
        return cls(omega_plus=wp, omega_m=cs.omega_m, detuning=cs.detuning, g=abs(cs.g),
                   lam=abs(cs.lam), kappa=cs.kappa, gamma_m=cs.gamma_m, gamma_s=cs.gamma_s,
                   n_th=cs.n_th, n_mech=n_mech, n_cav=n_cav)

    def without_dissipation(self) -> "TripartiteParams":
        return replace(self, kappa=0.0, gamma_m=0.0, gamma_s=0.0)

    def scaled(self, factor: float) -> "TripartiteParams":
        """All frequencies and rates multiplied by ``factor``."""
        f = factor
        return replace(self, omega_plus=f * self.omega_plus, omega_m=f * self.omega_m,
                       detuning=f * self.detuning, g=f * self.g, lam=f * self.lam,
                       kappa=f * self.kappa, gamma_m=f * self.gamma_m, gamma_s=f * self.gamma_s)


@dataclass(frozen=True)
class _Ops:
    a: QOperator
    b: QOperator
    sz: QOperator
    sp: QOperator
    sm: QOperator


def _ops(layout: HilbertLayout) -> _Ops:
    s = spin_ops(layout, "spin")
    return _Ops(destroy(layout, "cav"), destroy(layout, "mech"), s.sz, s.sp, s.sm)


def photon_phonon_exchange(layout: HilbertLayout) -> QOperator:
    o = _ops(layout)
    return QOperator(layout, (o.a.dag() @ o.b + o.a @ o.b.dag()).matrix, hermitian=True)


def spin_phonon_exchange(layout: HilbertLayout) -> QOperator:
    o = _ops(layout)
    return QOperator(layout, (o.b @ o.sp + o.b.dag() @ o.sm).matrix, hermitian=True)


def interaction_hamiltonian(layout: HilbertLayout, g: float, lam: float) -> QOperator:
    """H_int = g (a†b + a b†) + λ (b σ+ + b† σ-)."""
    return abs(g) * photon_phonon_exchange(layout) + abs(lam) * spin_phonon_exchange(layout)


def excitation_number(layout: HilbertLayout) -> QOperator:
    """N = a†a + b†b + |-1><-1|, conserved by the dissipation-free Hamiltonian."""
    return number(layout, "cav") + number(layout, "mech") + projector(layout, "spin", SPIN_MINUS1)


def build_tripartite_hamiltonian(params: TripartiteParams, frame_frequency: float = 0.0,
                                 include_g: bool = True) -> QOperator:
    """Tripartite Hamiltonian, optionally in a frame rotating at ``frame_frequency``.

    The frame removes ω_f (a†a + b†b + σz/2), which commutes with the
    interaction and leaves the dissipators unchanged.
    """
    lay = params.layout
    o = _ops(lay)
    wf = frame_frequency
    h = (0.5 * (params.omega_plus - wf)) * o.sz \
        + (params.omega_m - wf) * number(lay, "mech") \
        + (params.detuning - wf) * number(lay, "cav")
    h = h + abs(params.lam) * spin_phonon_exchange(lay)
    if include_g:
        h = h + abs(params.g) * photon_phonon_exchange(lay)
    return QOperator(lay, h.matrix, hermitian=True)


def tripartite_collapse(params: TripartiteParams) -> tuple[CollapseTerm, ...]:
    lay = params.layout
    o = _ops(lay)
    return (CollapseTerm(o.a, params.kappa),
            CollapseTerm(o.sz, params.gamma_s),
            CollapseTerm(o.b, params.gamma_m * (params.n_th + 1.0)),
            CollapseTerm(o.b.dag(), params.gamma_m * params.n_th))


def tripartite_model(params: TripartiteParams, frame_frequency: float | None = None,
                     g_schedule: Callable[[float], float] | None = None,
                     dissipative: bool = True) -> LindbladModel:
    """Master-equation model of the tripartite system.

    ``frame_frequency`` defaults to ω_m.  With ``g_schedule`` the
    photon-phonon coupling is the time-dependent ``g_schedule(t)`` and
    ``params.g`` is ignored.
    """
    wf = params.omega_m if frame_frequency is None else frame_frequency
    lay = params.layout
    h = build_tripartite_hamiltonian(params, wf, include_g=g_schedule is None)
    drives = ()
    if g_schedule is not None:
        drives = (DriveTerm(photon_phonon_exchange(lay), g_schedule),)
    collapse = tripartite_collapse(params) if dissipative else ()
    return LindbladModel(lay, h, drives, collapse)


def spin_state_matrix(amplitudes: Sequence[complex]) -> np.ndarray:
    """Spin density matrix from amplitudes in the (|-1>, |0>) basis."""
    return ket_projector(np.asarray(amplitudes, dtype=complex))


def initial_state(params: TripartiteParams, spin: np.ndarray, n_m0: float,
                  cavity: np.ndarray | None = None) -> DensityMatrix:
    """spin ⊗ thermal(n_m0) ⊗ cavity (vacuum by default)."""
    lay = params.layout
    cav = basis_projector(params.n_cav, 0) if cavity is None else cavity
    mech = np.diag(thermal_populations(n_m0, params.n_mech))
    return DensityMatrix.from_matrix(lay, lay.product({"spin": spin, "mech": mech, "cav": cav}))


# ---------------------------------------------------------------------------
# spectrum and polaritons
# ---------------------------------------------------------------------------

def single_excitation_energies(params: TripartiteParams) -> np.ndarray:
    """Eigenvalues of the one-excitation block relative to the ground state |0; 0, 0>."""
    lay = params.layout
    h = build_tripartite_hamiltonian(params).matrix
    idx = [lay.basis_index({"spin": SPIN_MINUS1}), lay.basis_index({"spin": SPIN_ZERO, "mech": 1}),
           lay.basis_index({"spin": SPIN_ZERO, "cav": 1})]
    ground = h[lay.basis_index({"spin": SPIN_ZERO}), lay.basis_index({"spin": SPIN_ZERO})].real
    block = h[np.ix_(idx, idx)]
    return np.linalg.eigvalsh(block) - ground


@dataclass(frozen=True)
class PolaritonBasis:
    """Mixing angle, polariton/polaron operators and their frequencies."""

    theta: float
    p_dark: QOperator
    p_bright: QOperator
    p_plus: QOperator
    p_minus: QOperator
    omega: float
    omega_plus: float
    omega_minus: float


def polariton_basis(g: float, lam: float, omega: float, layout: HilbertLayout) -> PolaritonBasis:
    """Spin-photon polaritons and their hybrids with the mechanical mode.

    tan θ = λ/g, P_d = cos θ σ- − sin θ a, P_b = sin θ σ- + cos θ a,
    P_± = (P_b ± b)/√2 with frequencies Ω ± sqrt(g² + λ²).
    """
    g, lam = abs(g), abs(lam)
    if g == 0 and lam == 0:
        raise ValueError("polariton basis needs g or lambda nonzero")
    th = math.atan2(lam, g)
    o = _ops(layout)
    pd = math.cos(th) * o.sm - math.sin(th) * o.a
    pb = math.sin(th) * o.sm + math.cos(th) * o.a
    r = math.hypot(g, lam)
    return PolaritonBasis(th, pd, pb, (pb + o.b) / math.sqrt(2), (pb - o.b) / math.sqrt(2),
                          omega, omega + r, omega - r)


def vacuum_ket(layout: HilbertLayout) -> np.ndarray:
    v = np.zeros(layout.total_dim, dtype=complex)
    v[layout.basis_index({"spin": SPIN_ZERO})] = 1.0
    return v


def dark_polariton_check(basis: PolaritonBasis, h_int: QOperator) -> float:
    """||H_int P_d† |vac>||: zero when the dark polariton decouples from the mechanics."""
    vac = vacuum_ket(h_int.layout)
    return float(np.linalg.norm(h_int.matrix @ (basis.p_dark.dag().matrix @ vac)))


def bright_polariton_coupling(basis: PolaritonBasis, h_int: QOperator) -> float:
    """||H_int P_b† |vac>||, equal to sqrt(g² + λ²)."""
    vac = vacuum_ket(h_int.layout)
    return float(np.linalg.norm(h_int.matrix @ (basis.p_bright.dag().matrix @ vac)))


# ---------------------------------------------------------------------------
# Rabi exchange
# ---------------------------------------------------------------------------

@dataclass
class RabiResult:
    series: TimeSeries
    t_half: float
    photon_distribution: np.ndarray  # cavity Fock populations at t_half
    max_excitation_drift: float
    evolution: object


def rabi_scenario(params: TripartiteParams, t_max: float, n_times: int = 401,
                  dissipative: bool = True, n_m0: float = 0.3) -> RabiResult:
    """Vacuum Rabi exchange from |-1> ⊗ thermal(n_m0) ⊗ |0>_cav at resonance.

    The photon-number distribution is sampled at t_half = π / sqrt(g² + λ²),
    where a resonant single excitation with g = λ has fully left the spin.
    """
    lay = params.layout
    model = tripartite_model(params, dissipative=dissipative)
    rho0 = initial_state(params, spin_state_matrix([1.0, 0.0]), n_m0)
    t_half = math.pi / math.hypot(params.g, params.lam)
    times = np.union1d(np.linspace(0.0, t_max, n_times), [t_half])
    times = times[times <= max(t_max, t_half)]
    obs = {"P_spin": projector(lay, "spin", SPIN_MINUS1), "n_a": number(lay, "cav"),
           "n_b": number(lay, "mech"), "N_exc": excitation_number(lay)}
    for k in range(params.n_cav):
        obs[f"p_cav_{k}"] = projector(lay, "cav", k)
    # near-pure states sit on the positivity boundary; tighter steps keep the
    # zero eigenvalues within the checked bound
    res = evolve(model, rho0, times, obs, rtol=1e-10, atol=1e-12)
    i = int(np.argmin(np.abs(res.series.times - t_half)))
    dist = np.array([res.series[f"p_cav_{k}"][i] for k in range(params.n_cav)])
    drift = float(np.max(np.abs(res.series["N_exc"] - res.series["N_exc"][0])))
    return RabiResult(res.series, t_half, dist, drift, res)


# ---------------------------------------------------------------------------
# dark-polariton transfer
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PulseSchedule:
    """Photon-phonon coupling g(t) with constant spin-phonon coupling λ.

    ``shape="gaussian"``: g(t) = g0 exp(-((t - t_center)/width)²);
    ``shape="constant"``: g(t) = g0.
    """

    g0: float
    lam: float
    width: float = 2.0
    t_center: float = 0.0
    t_start: float = 0.0
    t_end: float = 8.0
    shape: str = "gaussian"

    def __post_init__(self):
        if self.shape not in ("gaussian", "constant"):
            raise ValueError("shape must be 'gaussian' or 'constant'")
        if self.g0 < 0 or self.lam < 0 or self.width <= 0:
            raise ValueError("g0, lam must be non-negative and width positive")
        if self.t_end <= self.t_start:
            raise ValueError("t_end must exceed t_start")
        if self.shape == "gaussian" and not self.g(self.t_start) > self.lam:
            raise ValueError("counter-intuitive ordering needs g(t_start) > lambda")

    def g(self, t):
        if self.shape == "constant":
            return self.g0 + 0.0 * np.asarray(t, dtype=float)
        x = (np.asarray(t, dtype=float) - self.t_center) / self.width
        return self.g0 * np.exp(-x * x)

    def g_dot(self, t):
        if self.shape == "constant":
            return 0.0 * np.asarray(t, dtype=float)
        x = (np.asarray(t, dtype=float) - self.t_center) / self.width
        return -2.0 * x / self.width * self.g(t)

    def theta(self, t):
        return np.arctan2(self.lam, self.g(t))

    def adiabaticity(self, n: int = 4001) -> float:
        """max |dθ/dt| / sqrt(g² + λ²) over the window."""
        t = np.linspace(self.t_start, self.t_end, n)
        g = self.g(t)
        r2 = g * g + self.lam ** 2
        theta_dot = -self.lam * self.g_dot(t) / r2
        return float(np.max(np.abs(theta_dot) / np.sqrt(r2)))

    def stretched(self, factor: float) -> "PulseSchedule":
        """Same pulse played ``factor`` times slower."""
        return replace(self, width=self.width * factor, t_center=self.t_center * factor,
                       t_start=self.t_start * factor, t_end=self.t_end * factor)


def cavity_target(n_cav: int, phase: float = 0.0) -> DensityMatrix:
    """(|0> + e^{iφ}|1>)/√2 on the cavity."""
    ket = np.zeros(n_cav, dtype=complex)
    ket[0] = 1.0
    ket[1] = np.exp(1j * phase)
    return DensityMatrix.from_ket(HilbertLayout.of(cav=n_cav), ket)


@dataclass
class TransferResult:
    series: TimeSeries
    cavity_state: DensityMatrix
    fidelity: float  # maximized over the relative phase of the target
    fidelity_unmaximized: float  # against (|0> + |1>)/√2
    phase: float
    adiabaticity: float
    evolution: object


def transfer_fidelity(cavity_state: DensityMatrix) -> tuple[float, float, float]:
    """(phase-maximized fidelity, fidelity at φ = 0, optimal φ)."""
    rho = cavity_state.matrix
    phase = float(-np.angle(rho[0, 1])) if abs(rho[0, 1]) > 0 else 0.0
    n = cavity_state.layout.total_dim
    f_best = fidelity(cavity_state, cavity_target(n, phase))
    f0 = fidelity(cavity_state, cavity_target(n, 0.0))
    return f_best, f0, phase


def stirap_transfer(params: TripartiteParams, schedule: PulseSchedule,
                    spin_amplitudes: Sequence[complex] = (1 / math.sqrt(2), 1 / math.sqrt(2)),
                    n_m0: float = 0.1, n_times: int = 201, dissipative: bool = True,
                    max_adiabaticity: float | None = None) -> TransferResult:
    """Move a spin superposition into the cavity along the mechanically dark polariton.

    ``params.g`` and ``params.lam`` are replaced by the schedule.  The spin
    amplitudes are given in the (|-1>, |0>) basis.  If ``max_adiabaticity``
    is set and the schedule's adiabaticity parameter exceeds it, a
    ``ValueError`` is raised before integrating.
    """
    ad = schedule.adiabaticity()
    if max_adiabaticity is not None and ad > max_adiabaticity:
        raise ValueError(f"schedule too fast: adiabaticity {ad:.3f} > {max_adiabaticity}")
    p = replace(params, lam=schedule.lam)
    lay = p.layout
    model = tripartite_model(p, g_schedule=lambda t: float(schedule.g(t)), dissipative=dissipative)
    rho0 = initial_state(p, spin_state_matrix(spin_amplitudes), n_m0)
    times = np.linspace(schedule.t_start, schedule.t_end, n_times)
    obs = {"P_spin": projector(lay, "spin", SPIN_MINUS1), "n_a": number(lay, "cav"),
           "n_b": number(lay, "mech")}
    res = evolve(model, rho0, times, obs, rtol=1e-10, atol=1e-12)
    cols = dict(res.series.values)
    cols["g"] = schedule.g(times)
    series = TimeSeries(times, cols)
    cav = partial_trace(res.final_state, ["cav"])
    f, f0, ph = transfer_fidelity(cav)
    return TransferResult(series, cav, f, f0, ph, ad, res)


# ---------------------------------------------------------------------------
# adiabatic elimination
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EffectiveParams:
    """Spin-cavity model after eliminating a far-detuned mechanical mode.

    Δ1 = ω_m − ω+, Δ2 = Δ − ω+ (frame rotating at ω+).
    """

    delta1: float
    delta2: float
    g: float
    lam: float
    kappa: float = 0.0
    gamma_m: float = 0.0
    gamma_s: float = 0.0
    n_th: float = 0.0

    def __post_init__(self):
        if self.delta1 == 0:
            raise ValueError("delta1 must be nonzero")

    @classmethod
    def from_tripartite(cls, p: TripartiteParams) -> "EffectiveParams":
        return cls(p.omega_m - p.omega_plus, p.detuning - p.omega_plus, abs(p.g), abs(p.lam),
                   p.kappa, p.gamma_m, p.gamma_s, p.n_th)

    @property
    def alpha(self) -> float:
        return self.lam / self.delta1

    @property
    def beta(self) -> float:
        return self.g / self.delta1

    @property
    def g_eff(self) -> float:
        return self.alpha * self.g

    @property
    def kappa_eff1(self) -> float:
        return self.kappa + self.beta ** 2 * (self.n_th + 1.0) * self.gamma_m

    @property
    def kappa_eff2(self) -> float:
        return self.beta ** 2 * self.n_th * self.gamma_m

    @property
    def gamma_eff1(self) -> float:
        return self.alpha ** 2 * (self.n_th + 1.0) * self.gamma_m

    @property
    def gamma_eff2(self) -> float:
        return self.alpha ** 2 * self.n_th * self.gamma_m

    @property
    def adiabatic(self) -> bool:
        return abs(self.alpha) < 0.2 and abs(self.beta) < 0.2

    def resonant_delta2(self) -> float:
        """Δ2 that makes the Stark-shifted cavity and spin resonant."""
        return (self.beta ** 2 - self.alpha ** 2) * self.delta1


def effective_layout(n_cav: int) -> HilbertLayout:
    return HilbertLayout.of(spin=2, cav=n_cav)


def build_effective_model(eff: EffectiveParams, n_cav: int = 4) -> LindbladModel:
    """H_eff = (Δ2 − β²Δ1) a†a − (α²Δ1/2) σz + g_eff (a†σ- + a σ+) with effective losses."""
    if not eff.adiabatic:
        warnings.warn(f"adiabatic elimination outside its regime (alpha={eff.alpha:.3f}, "
                      f"beta={eff.beta:.3f})", stacklevel=2)
    lay = effective_layout(n_cav)
    a = destroy(lay, "cav")
    s = spin_ops(lay, "spin")
    h = (eff.delta2 - eff.beta ** 2 * eff.delta1) * number(lay, "cav") \
        - (0.5 * eff.alpha ** 2 * eff.delta1) * s.sz \
        + eff.g_eff * (a.dag() @ s.sm + a @ s.sp)
    collapse = (CollapseTerm(a, eff.kappa_eff1), CollapseTerm(s.sz, eff.gamma_s),
                CollapseTerm(s.sm, eff.gamma_eff1), CollapseTerm(a.dag(), eff.kappa_eff2),
                CollapseTerm(s.sp, eff.gamma_eff2))
    return LindbladModel(lay, QOperator(lay, h.matrix, hermitian=True), (), collapse)


@dataclass
class EffectiveComparison:
    times: np.ndarray
    trace_distance: np.ndarray
    max_trace_distance: float
    spin_full: np.ndarray
    spin_effective: np.ndarray
    effective: EffectiveParams


def effective_vs_full_comparison(params: TripartiteParams, horizon: float | None = None,
                                 n_times: int = 201) -> EffectiveComparison:
    """Reduced spin-cavity state of the full model against the effective model.

    Both start from |-1> ⊗ |0>_mech ⊗ |0>_cav.  The full model runs in the
    frame rotating at ω+; ``horizon`` defaults to one effective Rabi period
    π/g_eff.  Eliminating a mode detuned by +Δ1 yields the exchange
    −(λg/Δ1)(a†σ- + aσ+), which the cavity parity (-1)^{a†a} maps onto the
    +g_eff convention used by :func:`build_effective_model`; that map is
    applied before comparing.
    """
    eff = EffectiveParams.from_tripartite(params)
    if eff.g_eff == 0:
        raise ValueError("effective coupling vanishes")
    t_end = math.pi / abs(eff.g_eff) if horizon is None else horizon
    times = np.linspace(0.0, t_end, n_times)
    full = tripartite_model(params, frame_frequency=params.omega_plus)
    rho_full = initial_state(params, spin_state_matrix([1.0, 0.0]), 0.0)
    rf = evolve(full, rho_full, times, store_states=True, method="expm")
    model = build_effective_model(eff, params.n_cav)
    lay = model.layout
    rho_eff = DensityMatrix.from_matrix(lay, lay.product({"spin": spin_state_matrix([1.0, 0.0]),
                                                            "cav": basis_projector(params.n_cav, 0)}))
    re = evolve(model, rho_eff, times, store_states=True, method="expm")
    parity = np.diag(lay.embed("cav", np.diag((-1.0) ** np.arange(params.n_cav))))
    td = np.empty(times.size)
    s_full = np.empty(times.size)
    s_eff = np.empty(times.size)
    for i, (sf, se) in enumerate(zip(rf.states, re.states)):
        red = partial_trace(sf, ["spin", "cav"])
        mapped = DensityMatrix.from_matrix(lay, (parity[:, None] * se.matrix) * parity[None, :])
        td[i] = trace_distance(red, mapped)
        s_full[i] = _spin_population(red)
        s_eff[i] = _spin_population(se)
    return EffectiveComparison(times, td, float(td.max()), s_full, s_eff, eff)


def _spin_population(rho: DensityMatrix) -> float:
    return float(partial_trace(rho, ["spin"]).matrix[SPIN_MINUS1, SPIN_MINUS1].real)


@dataclass
class RabiFit:
    frequency: float
    expected: float  # 2 g_eff
    ratio: float
    amplitude: float
    offset: float


def fit_effective_rabi_frequency(params: TripartiteParams, n_periods: float = 3.0,
                                 n_times: int = 601) -> RabiFit:
    """Fit A cos(w t + φ) + B to the spin population of the dissipation-free full model."""
    p = params.without_dissipation()
    eff = EffectiveParams.from_tripartite(p)
    w0 = 2 * abs(eff.g_eff)
    times = np.linspace(0.0, n_periods * 2 * math.pi / w0, n_times)
    model = tripartite_model(p, frame_frequency=p.omega_plus, dissipative=False)
    rho0 = initial_state(p, spin_state_matrix([1.0, 0.0]), 0.0)
    res = evolve(model, rho0, times, {"P_spin": projector(p.layout, "spin", SPIN_MINUS1)},
                 rtol=1e-10, atol=1e-12)
    y = res.series["P_spin"]
    model_fn = lambda t, a, w, ph, b: a * np.cos(w * t + ph) + b  # noqa: E731
    popt, _ = curve_fit(model_fn, times, y, p0=[0.5, w0, 0.0, 0.5])
    w = abs(popt[1])
    return RabiFit(w, w0, w / w0, float(popt[0]), float(popt[3]))

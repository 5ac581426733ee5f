"""Sideband cooling of the beam's fundamental mode.

The model is a cavity mode ``a`` (detuning Δ in the drive frame) coupled to
the mechanical mode ``b`` through H = Δ a†a + ω_m b†b + g (a + a†)(b + b†),
with cavity loss κ and a thermal mechanical bath (γ_m, n_th).  Because the
model is quadratic, the six second-order moments close on themselves and are
integrated exactly; the full master equation on truncated Fock spaces is
kept as an independent cross-check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .quantum import (CollapseTerm, DensityMatrix, DriveTerm, HilbertLayout, IntegrationError,
                      LindbladModel, QOperator, TimeSeries, destroy, evolve, expectation, number,
                      projector, steady_state, thermal_state)


class UnstableCoolingError(ValueError):
    """Linearized dynamics have a non-decaying mode; no physical steady state."""


class CutoffError(RuntimeError):
    """Fock-space truncation is not adequate for the requested accuracy."""


@dataclass(frozen=True)
class CoolingParams:
    """Rates in 1/s, frequencies in rad/s.  ``detuning=None`` means Δ = ω_m."""

    g: float
    omega_m: float
    kappa: float
    gamma_m: float
    n_th: float
    detuning: float | None = None

    def __post_init__(self):
        if min(self.kappa, self.gamma_m, self.n_th) < 0:
            raise ValueError("rates and n_th must be non-negative")
        if self.omega_m <= 0:
            raise ValueError("omega_m must be positive")
        if self.detuning is None:
            object.__setattr__(self, "detuning", self.omega_m)

    @classmethod
    def from_couplings(cls, cs, n_th: float | None = None) -> "CoolingParams":
        return cls(g=abs(cs.g), omega_m=cs.omega_m, kappa=cs.kappa, gamma_m=cs.gamma_m,
                   n_th=cs.n_th if n_th is None else n_th, detuning=cs.detuning)


@dataclass(frozen=True)
class MomentState:
    """Second-order moments <a†a>, <b†b>, <a†b>, <ab>, <a²>, <b²>."""

    n_a: complex
    n_b: complex
    c_ab: complex = 0j
    s_ab: complex = 0j
    s_aa: complex = 0j
    s_bb: complex = 0j

    FIELDS = ("n_a", "n_b", "c_ab", "s_ab", "s_aa", "s_bb")

    def as_complex(self) -> np.ndarray:
        return np.array([getattr(self, f) for f in self.FIELDS], dtype=complex)

    @classmethod
    def from_complex(cls, z) -> "MomentState":
        return cls(*[complex(v) for v in z])

    def to_real(self) -> np.ndarray:
        return _pack(self.as_complex())

    @classmethod
    def from_real(cls, y) -> "MomentState":
        return cls.from_complex(_unpack(np.asarray(y)))

    def physicality(self, tol: float = 1e-9) -> dict:
        """Post-hoc checks: real non-negative occupations and Cauchy-Schwarz bounds."""
        na, nb = self.n_a.real, self.n_b.real
        return {
            "occupations_real": abs(self.n_a.imag) < tol and abs(self.n_b.imag) < tol,
            "occupations_nonnegative": na > -tol and nb > -tol,
            "cauchy_schwarz": abs(self.c_ab) ** 2 <= na * nb + tol,
            "squeezing_bound_a": abs(self.s_aa) <= na + 0.5 + tol,
            "squeezing_bound_b": abs(self.s_bb) <= nb + 0.5 + tol,
        }


def thermal_moments(n_a: float = 0.0, n_b: float = 0.0) -> MomentState:
    return MomentState(n_a, n_b)


def _pack(z: np.ndarray) -> np.ndarray:
    y = np.empty(2 * z.size)
    y[0::2] = z.real
    y[1::2] = z.imag
    return y


def _unpack(y: np.ndarray) -> np.ndarray:
    return y[0::2] + 1j * y[1::2]


def _rhs_complex(z: np.ndarray, p: CoolingParams, form: str) -> np.ndarray:
    na, nb, c, s, saa, sbb = z
    g, w, d, k, gm = p.g, p.omega_m, p.detuning, p.kappa, p.gamma_m
    dna = -1j * g * (np.conj(s) + c - np.conj(c) - s) - k * na
    dnb = -1j * g * (np.conj(s) - c + np.conj(c) - s) - gm * nb + gm * p.n_th
    if form == "corrected":
        dc = (1j * (d - w) - (gm + k) / 2) * c - 1j * g * (np.conj(saa) - sbb - nb + na)
    else:
        dc = -(gm + k) / 2 * c - 1j * g * (np.conj(saa) - np.conj(sbb) - nb + na)
    ds = (-1j * (w + d) - (gm + k) / 2) * s - 1j * g * (1 + sbb + saa + na + nb)
    dsaa = -2j * g * (np.conj(c) + s) - (k + 2j * d) * saa
    dsbb = -2j * g * (c + s) - (gm + 2j * w) * sbb
    return np.array([dna, dnb, dc, ds, dsaa, dsbb])


MOMENT_FORMS = ("corrected", "conjugate_source")


def moment_rhs(state: MomentState, params: CoolingParams, form: str = "corrected") -> MomentState:
    """Time derivative of the six moments.

    ``form="corrected"`` is the Heisenberg-picture result for the quadratic
    Hamiltonian above; ``form="conjugate_source"`` is a variant
    in which the <a†b> equation carries <b†²> instead of <b²> and omits the
    i(Δ − ω_m) rotation.  The two coincide when Δ = ω_m and <b²> is real.
    """
    if form not in MOMENT_FORMS:
        raise ValueError(f"form must be one of {MOMENT_FORMS}")
    return MomentState.from_complex(_rhs_complex(state.as_complex(), params, form))


def moment_system(params: CoolingParams, form: str = "corrected") -> tuple[np.ndarray, np.ndarray]:
    """Real affine system dy/dt = M y + c in the packed 12-dimensional form."""
    f = lambda y: _pack(_rhs_complex(_unpack(y), params, form))  # noqa: E731
    c = f(np.zeros(12))
    m = np.empty((12, 12))
    for j in range(12):
        e = np.zeros(12)
        e[j] = 1.0
        m[:, j] = f(e) - c
    return m, c


def evolve_moments(params: CoolingParams, initial: MomentState, times: Sequence[float],
                   form: str = "corrected", rtol: float = 1e-10, atol: float = 1e-12) -> TimeSeries:
    """Integrate the moment equations and sample at ``times``.

    The returned series has columns ``n_a``, ``n_b`` and real/imaginary parts
    of the four coherences.
    """
    t = np.asarray(times, dtype=float)
    m, c = moment_system(params, form)
    sol = solve_ivp(lambda _t, y: m @ y + c, (t[0], t[-1]), initial.to_real(), method="DOP853",
                    t_eval=t, rtol=rtol, atol=atol)
    if sol.status != 0:
        raise IntegrationError(sol.message)
    z = _unpack(sol.y)
    cols = {"n_a": z[0].real, "n_b": z[1].real}
    for i, name in enumerate(MomentState.FIELDS[2:], start=2):
        cols[f"{name}_re"] = z[i].real
        cols[f"{name}_im"] = z[i].imag
    return TimeSeries(t, cols)


def moment_eigenvalues(params: CoolingParams, form: str = "corrected") -> np.ndarray:
    return np.linalg.eigvals(moment_system(params, form)[0])


def steady_moments(params: CoolingParams, form: str = "corrected") -> MomentState:
    """Fixed point of the moment equations.

    Raises :class:`UnstableCoolingError` when some eigenvalue of the linear
    system has a non-negative real part (the fixed point is not reached).
    """
    m, c = moment_system(params, form)
    ev = np.linalg.eigvals(m)
    if np.max(ev.real) >= 0:
        raise UnstableCoolingError(f"moment dynamics not damped (max Re eig = {np.max(ev.real):.3e})")
    y = np.linalg.solve(m, -c)
    return MomentState.from_real(y)


@dataclass(frozen=True)
class FinalOccupancy:
    n_f_weak: float
    n_f_strong: float
    Gamma: float


def final_occupancy_formulas(params: CoolingParams) -> FinalOccupancy:
    """Closed-form final phonon numbers.

    weak:   γ n_th / (Γ + γ) + κ² / (16 ω_m²),   Γ = 4 g² / κ
    strong: γ n_th / (κ + γ) + g² / (2 (ω_m² − 4 g²))
    """
    g, w, k, gm, n = params.g, params.omega_m, params.kappa, params.gamma_m, params.n_th
    if 2 * abs(g) >= w:
        raise ValueError("strong-coupling formula requires 2g < omega_m")
    big = math.inf if k == 0 else 4 * g * g / k
    weak = (0.0 if math.isinf(big) or big + gm == 0 else gm * n / (big + gm)) + k * k / (16 * w * w)
    strong = (gm * n / (k + gm) if k + gm > 0 else n) + g * g / (2 * (w * w - 4 * g * g))
    return FinalOccupancy(weak, strong, big)


@dataclass(frozen=True)
class CoolingDiagnostics:
    stable: bool
    cooperativity: float
    cooperativity_ok: bool
    sideband_resolution: float
    resolved: bool


def stability_and_cooperativity(params: CoolingParams, cooperativity_min: float = 10.0) -> CoolingDiagnostics:
    """2g < ω_m, C = 4g²/(γ_m κ) (compared with ``cooperativity_min``), ω_m/κ > 1."""
    g, w, k, gm = abs(params.g), params.omega_m, params.kappa, params.gamma_m
    denom = gm * k
    if denom == 0:
        coop = math.inf if g > 0 else math.nan
    else:
        coop = 4 * g * g / denom
    res = math.inf if k == 0 else w / k
    return CoolingDiagnostics(2 * g < w, coop, bool(coop > cooperativity_min), res, res > 1)


@dataclass(frozen=True)
class GroundStateEntry:
    first_below: float | None  # first sample with n_b < threshold
    settled_below: float | None  # first sample after which n_b stays below
    minimum: float
    time_of_minimum: float


def ground_state_entry(series: TimeSeries, threshold: float = 1.0, key: str = "n_b") -> GroundStateEntry:
    nb = series[key]
    t = series.times
    below = nb < threshold
    first = float(t[np.argmax(below)]) if below.any() else None
    settled = None
    if below[-1]:
        above = np.nonzero(~below)[0]
        settled = float(t[0] if above.size == 0 else t[above[-1] + 1])
    i = int(np.argmin(nb))
    return GroundStateEntry(first, settled, float(nb[i]), float(t[i]))


# ---------------------------------------------------------------------------
# master-equation cross-check
# ---------------------------------------------------------------------------

def cooling_layout(n_cav: int, n_mech: int) -> HilbertLayout:
    return HilbertLayout.of(cav=n_cav, mech=n_mech)


def cooling_master_equation(params: CoolingParams, n_cav: int, n_mech: int,
                            frame: str = "lab", rwa: bool = False) -> LindbladModel:
    """Master equation of the cooling model on a truncated Fock space.

    Parameters
    ----------
    frame : {"lab", "interaction"}
        ``lab`` keeps Δ a†a + ω_m b†b in a time-independent Hamiltonian (use
        for steady states).  ``interaction`` removes them, leaving the
        coupling with phases e^{±i(Δ ∓ ω_m)t}; occupations are identical in
        both frames and the interaction frame is far cheaper to integrate.
    rwa : bool
        Drop the a b and a† b† terms.
    """
    lay = cooling_layout(n_cav, n_mech)
    a, b = destroy(lay, "cav"), destroy(lay, "mech")
    ad, bd = a.dag(), b.dag()
    g, d, w = params.g, params.detuning, params.omega_m
    collapse = (CollapseTerm(a, params.kappa),
                CollapseTerm(b, params.gamma_m * (params.n_th + 1.0)),
                CollapseTerm(bd, params.gamma_m * params.n_th))
    if frame == "lab":
        h = d * (ad @ a) + w * (bd @ b)
        if rwa:
            h = h + g * (ad @ b + a @ bd)
        else:
            h = h + g * ((a + ad) @ (b + bd))
        return LindbladModel(lay, QOperator(lay, h.matrix, hermitian=True), (), collapse)
    if frame != "interaction":
        raise ValueError("frame must be 'lab' or 'interaction'")
    drives = []
    static = None
    if d == w:
        static = QOperator(lay, (g * (ad @ b + a @ bd)).matrix, hermitian=True)
    else:
        dm = d - w
        drives += [DriveTerm(g * (ad @ b), lambda t, dm=dm: np.exp(1j * dm * t)),
                   DriveTerm(g * (a @ bd), lambda t, dm=dm: np.exp(-1j * dm * t))]
    if not rwa:
        dp = d + w
        drives += [DriveTerm(g * (a @ b), lambda t, dp=dp: np.exp(-1j * dp * t)),
                   DriveTerm(g * (ad @ bd), lambda t, dp=dp: np.exp(1j * dp * t))]
    return LindbladModel(lay, static, tuple(drives), collapse)


def moments_from_state(rho: DensityMatrix) -> MomentState:
    lay = rho.layout
    a, b = destroy(lay, "cav"), destroy(lay, "mech")
    e = lambda op: complex(np.sum(rho.matrix * op.matrix.T))  # noqa: E731
    return MomentState(e(a.dag() @ a), e(b.dag() @ b), e(a.dag() @ b), e(a @ b), e(a @ a), e(b @ b))


@dataclass
class TrajectoryCrosscheck:
    times: np.ndarray
    n_b_master: np.ndarray
    n_b_moments: np.ndarray
    max_relative_deviation: float
    top_level_population: float
    initial_n_b: float
    wall_time: float


def cooling_trajectory_crosscheck(params: CoolingParams, t_end: float = 200e-6, n_samples: int = 201,
                                  n_bar0: float = 2.0, support: int = 12, n_mech: int = 15,
                                  n_cav: int = 15, form: str = "corrected",
                                  headroom_tol: float = 1e-5) -> TrajectoryCrosscheck:
    """Compare n_b(t) from the moment equations and the full master equation.

    The mechanics starts in a thermal state with mean ``n_bar0`` whose Gibbs
    weights are restricted to the lowest ``support`` levels; the Fock space
    keeps ``n_mech - support`` empty levels of headroom.  Both solvers start
    from the exact moments of that state, so any disagreement is due to
    the equations, not the initial condition.  The population of the top Fock
    level of each mode is tracked and :class:`CutoffError` is raised if it
    exceeds ``headroom_tol``.
    """
    import time as _time
    start = _time.perf_counter()
    model = cooling_master_equation(params, n_cav, n_mech, frame="interaction")
    lay = model.layout
    rho0 = thermal_state(lay, "mech", n_bar0, support=support)
    times = np.linspace(0.0, t_end, n_samples)
    obs = {"n_b": number(lay, "mech"), "n_a": number(lay, "cav"),
           "top_mech": projector(lay, "mech", n_mech - 1), "top_cav": projector(lay, "cav", n_cav - 1)}
    res = evolve(model, rho0, times, obs)
    top = float(max(res.series["top_mech"].max(), res.series["top_cav"].max()))
    if top > headroom_tol:
        raise CutoffError(f"top Fock level population {top:.2e} exceeds {headroom_tol:.1e}")
    mom = evolve_moments(params, moments_from_state(rho0), times, form=form)
    me = res.series["n_b"]
    rel = np.abs(mom["n_b"] - me) / np.abs(me)
    return TrajectoryCrosscheck(times, me, mom["n_b"], float(rel.max()), top,
                                float(me[0]), _time.perf_counter() - start)


@dataclass
class SteadyCrosscheck:
    g_over_kappa: np.ndarray
    n_b_moments: np.ndarray
    n_b_master: np.ndarray
    relative_deviation: np.ndarray
    cutoff_change: float  # relative n_b change on doubling the cutoffs at the first grid point

    @property
    def max_relative_deviation(self) -> float:
        return float(np.max(self.relative_deviation))


def cooling_me_crosscheck(params: CoolingParams, g_over_kappa: Sequence[float], n_cav: int = 4,
                          n_mech: int = 6, doubling_tol: float = 1e-4,
                          check_cutoff: bool = True) -> SteadyCrosscheck:
    """Steady-state n_b from moments and from the master equation over a g/κ grid.

    ``params.g`` is ignored; each grid point sets g = x κ.  The cutoff test
    doubles both cutoffs at the grid point with the largest phonon number
    and raises :class:`CutoffError` if n_b moves by more than ``doubling_tol``
    (relative).
    """
    if params.n_th > 5:
        raise ValueError("master-equation cross-check needs n_th <= 5")
    xs = np.asarray(g_over_kappa, dtype=float)
    mom = np.empty(xs.size)
    me = np.empty(xs.size)
    for i, x in enumerate(xs):
        p = replace(params, g=x * params.kappa)
        mom[i] = steady_moments(p).n_b.real
        me[i] = _me_steady_nb(p, n_cav, n_mech)
    change = math.nan
    if check_cutoff:
        i = int(np.argmax(me))
        p = replace(params, g=xs[i] * params.kappa)
        big = _me_steady_nb(p, 2 * n_cav, 2 * n_mech)
        change = abs(big - me[i]) / abs(big)
        if change > doubling_tol:
            raise CutoffError(f"doubling cutoffs changes n_b by {change:.2e}")
    return SteadyCrosscheck(xs, mom, me, np.abs(me - mom) / np.abs(mom), change)


def _me_steady_nb(p: CoolingParams, n_cav: int, n_mech: int) -> float:
    model = cooling_master_equation(p, n_cav, n_mech, frame="lab")
    ss = steady_state(model, method="direct")
    return expectation(ss.state, number(model.layout, "mech"))

"""Closed-form device formulas: beam mechanics, cavity field, couplings, noise.

All returned frequencies are angular (rad/s), rates are in 1/s, fields in
V/m, lengths in m.  ``CouplingSet`` gathers everything the dynamics modules
need.

References
----------
Euler-Bernoulli beam theory for doubly clamped beams; depolarization factors
of a prolate spheroid (Osborn 1945); quasi-static coplanar-waveguide field
expansion with magnetic side walls (Simons, *Coplanar Waveguide Circuits*).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import brentq

from .constants import C_LIGHT, D_NV, DIAMOND, EPS0, G_NV, HBAR, KB, MU0, MU_B, TWO_PI, Z0

log = logging.getLogger(__name__)

# k_n l for the first five flexural modes of a doubly clamped beam
CLAMPED_ROOTS = (4.730, 7.853, 10.996, 14.137, 17.279)


class SeriesConvergenceError(RuntimeError):
    """Truncated cavity-field series did not converge at the requested point."""


# ---------------------------------------------------------------------------
# specs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BeamSpec:
    """Cylindrical diamond beam clamped at both ends.

    ``inertia`` selects the area moment used in the bending stiffness:
    ``"reduced"`` is pi r^4 / 8, ``"standard"`` is the solid-rod value
    pi r^4 / 4.
    """

    length: float
    radius: float
    youngs_modulus: float = DIAMOND.youngs_modulus
    density: float = DIAMOND.density
    relative_permittivity: float = DIAMOND.relative_permittivity
    quality_factor: float = 1.06e5
    inertia: str = "reduced"

    def __post_init__(self):
        if not (self.length > self.radius > 0):
            raise ValueError("beam requires length > radius > 0")
        if min(self.youngs_modulus, self.density, self.quality_factor) <= 0:
            raise ValueError("Young's modulus, density and Q must be positive")
        if self.relative_permittivity <= 1:
            raise ValueError("relative permittivity must exceed 1")
        if self.inertia not in ("reduced", "standard"):
            raise ValueError("inertia must be 'reduced' or 'standard'")

    @property
    def area(self) -> float:
        return math.pi * self.radius ** 2

    @property
    def volume(self) -> float:
        return self.area * self.length

    @property
    def mass(self) -> float:
        return self.density * self.volume

    @property
    def moment_of_inertia(self) -> float:
        div = 8.0 if self.inertia == "reduced" else 4.0
        return math.pi * self.radius ** 4 / div


@dataclass(frozen=True)
class ElectrodeConfig:
    """Beam above a narrow electrode tip instead of the open gap.

    The cavity voltage u0 = sqrt(hbar w_c / C) needs either ``u0_override``
    or ``capacitance``.
    """

    geometry_factor: float
    height: float
    u0_override: float | None = None
    capacitance: float | None = None

    def __post_init__(self):
        if self.height <= 0 or self.geometry_factor < 0:
            raise ValueError("electrode height must be positive and geometry factor non-negative")


@dataclass(frozen=True)
class CavitySpec:
    """Half-wave coplanar-waveguide resonator.

    ``beam_position`` is (x0, y0, z0): height above the gap plane, lateral
    coordinate inside the side-wall period, axial position.  ``y0=None``
    places the beam mid-period.  The lateral period ``b`` defaults to 10 d.
    The two anchors are the mode-function magnitude and slope used for the
    coupling when the raw series is not trusted.
    """

    stripline_length: float = 1e-2
    electrode_distance: float = 5e-6
    effective_permittivity: float = 6.0
    quality_factor: float = 1e6
    beam_position: tuple = (1e-6, None, 0.0)
    lateral_period: float | None = None
    mode_amplitude_anchor: float = math.exp(-0.2)
    mode_gradient_anchor: float = 1.0 / 2e-6
    electrode: ElectrodeConfig | None = None

    def __post_init__(self):
        if not (self.stripline_length > self.electrode_distance > 0):
            raise ValueError("cavity requires L > d > 0")
        if self.effective_permittivity < 1:
            raise ValueError("effective permittivity must be >= 1")
        if self.quality_factor <= 0:
            raise ValueError("cavity Q must be positive")

    @property
    def period(self) -> float:
        return 10.0 * self.electrode_distance if self.lateral_period is None else self.lateral_period

    @property
    def mode_volume(self) -> float:
        return math.pi * self.electrode_distance ** 2 * self.stripline_length


@dataclass(frozen=True)
class DriveSpec:
    """Classical ac field polarizing the beam.  ``ac_frequency=None`` means
    red-sideband resonance, Δ = ω_p − ω_c = ω_m."""

    ac_amplitude: float = 1e7
    ac_frequency: float | None = None

    def __post_init__(self):
        if self.ac_amplitude < 0:
            raise ValueError("drive amplitude must be non-negative")


@dataclass(frozen=True)
class MagnetSpec:
    """Rectangular micromagnet treated as a point dipole."""

    length: float = 200e-9
    width: float = 50e-9
    thickness: float = 50e-9
    magnetization: float = 1.5e6
    standoff: float = 60e-9
    bias_field: float = 0.1

    def __post_init__(self):
        if min(self.length, self.width, self.thickness, self.standoff) <= 0:
            raise ValueError("magnet dimensions and standoff must be positive")
        if self.magnetization < 0 or self.bias_field < 0:
            raise ValueError("magnetization and bias field must be non-negative")


@dataclass(frozen=True)
class DeviceSpec:
    beam: BeamSpec
    cavity: CavitySpec = field(default_factory=CavitySpec)
    drive: DriveSpec = field(default_factory=DriveSpec)
    magnet: MagnetSpec = field(default_factory=MagnetSpec)
    temperature: float = 0.02
    gamma_s: float = TWO_PI * 2e3
    # None: derive from the magnet geometry
    field_gradient: float | None = 1e7

    @classmethod
    def reference(cls) -> "DeviceSpec":
        """The 80 µm / 100 nm beam, 1 cm cavity, 10 V/µm drive working point."""
        return cls(beam=BeamSpec(length=80e-6, radius=100e-9))


# ---------------------------------------------------------------------------
# beam mechanics
# ---------------------------------------------------------------------------

def clamped_beam_roots(n_modes: int, solve: bool = False) -> tuple[float, ...]:
    """Roots k_n l of cos(kl) cosh(kl) = 1.

    The first five come from the table; more require ``solve=True``.
    """
    if n_modes < 1:
        raise ValueError("n_modes must be >= 1")
    if n_modes <= len(CLAMPED_ROOTS):
        return CLAMPED_ROOTS[:n_modes]
    if not solve:
        raise ValueError(f"only {len(CLAMPED_ROOTS)} tabulated roots; pass solve=True for more")
    roots = list(CLAMPED_ROOTS)
    for k in range(len(CLAMPED_ROOTS), n_modes):
        # for large kl the roots approach (k + 3/2) pi; cos x = 1/cosh x is the
        # well-conditioned form of cos x cosh x = 1
        centre = (k + 1.5) * math.pi
        roots.append(brentq(lambda x: math.cos(x) - 1.0 / math.cosh(x), centre - 0.5, centre + 0.5))
    return tuple(roots)


def beam_mode_frequencies(beam: BeamSpec, n_modes: int = 1, solve: bool = False) -> np.ndarray:
    """Flexural mode frequencies ω_n = k_n² sqrt(E I / ρ A) (rad/s)."""
    roots = np.asarray(clamped_beam_roots(n_modes, solve))
    k = roots / beam.length
    return k ** 2 * math.sqrt(beam.youngs_modulus * beam.moment_of_inertia / (beam.density * beam.area))


def zero_point_motion(mass: float, omega: float) -> float:
    return math.sqrt(HBAR / (2.0 * mass * omega))


@dataclass(frozen=True)
class ModeSeparation:
    delta: float
    ratio: float
    ok: bool


def mode_separation_check(cs: "CouplingSet", threshold: float = 10.0) -> ModeSeparation:
    """Gap between the first two flexural modes relative to |g|."""
    delta = cs.omega_1 - cs.omega_m
    ratio = math.inf if cs.g == 0 else delta / abs(cs.g)
    return ModeSeparation(delta, ratio, ratio >= threshold)


# ---------------------------------------------------------------------------
# polarizability
# ---------------------------------------------------------------------------

def depolarization_factors(aspect: float) -> tuple[float, float]:
    """(N_z, N_perp) for a prolate spheroid with r/l = ``aspect`` < 1."""
    if not 0 < aspect < 1:
        raise ValueError("radius must be smaller than length")
    x = aspect ** 2  # 1 - e^2
    e = math.sqrt(1.0 - x)
    if e < 0.1:
        # (1-e^2) * sum_k e^(2k) / (2k+3)
        s = sum(e ** (2 * k) / (2 * k + 3) for k in range(30))
        nz = x * s
    else:
        one_minus_e = x / (1.0 + e)
        log_ratio = math.log1p(e) - math.log(one_minus_e)
        nz = x / (2.0 * e ** 3) * (log_ratio - 2.0 * e)
    return nz, 0.5 * (1.0 - nz)


@dataclass(frozen=True)
class Polarizability:
    perp: float  # F m^-1 (ε0-scaled; multiply by volume and field for a dipole)
    axial: float
    n_z: float
    n_perp: float


def polarizability(beam: BeamSpec) -> Polarizability:
    nz, nperp = depolarization_factors(beam.radius / beam.length)
    chi = beam.relative_permittivity - 1.0
    return Polarizability(EPS0 * chi / (1.0 + nperp * chi), EPS0 * chi / (1.0 + nz * chi), nz, nperp)


# ---------------------------------------------------------------------------
# cavity
# ---------------------------------------------------------------------------

def cavity_frequency(cavity: CavitySpec) -> float:
    """Half-wave resonance ω_c = π c / (L sqrt(ε_eff))."""
    return math.pi * C_LIGHT / (cavity.stripline_length * math.sqrt(cavity.effective_permittivity))


def vacuum_field(cavity: CavitySpec, omega_c: float | None = None) -> float:
    """Single-photon field amplitude sqrt(ħ ω_c / ε0 V_c)."""
    w = cavity_frequency(cavity) if omega_c is None else omega_c
    return math.sqrt(HBAR * w / (EPS0 * cavity.mode_volume))


@dataclass(frozen=True)
class CPWMode:
    omega_c: float
    field_zpf: float
    e_tr: np.ndarray  # (e_x, e_y) at the evaluation point
    grad_x: np.ndarray  # ∂x (e_x, e_y)
    n_terms: int
    converged: bool


def cpw_mode(cavity: CavitySpec, x: float | None = None, y: float | None = None,
             n_terms: int = 50, rel_tol: float = 1e-6) -> CPWMode:
    """Transverse mode function of the CPW cavity from its side-wall series.

    Sums ``n_terms`` odd harmonics n = 1, 3, 5, ...  and raises
    :class:`SeriesConvergenceError` if the last term exceeds ``rel_tol``
    times the partial sum (for either the field or its x-derivative).
    """
    x0 = cavity.beam_position[0] if x is None else x
    y0 = cavity.beam_position[1] if y is None else y
    b = cavity.period
    if y0 is None:
        y0 = 0.5 * b
    w_c = cavity_frequency(cavity)
    lam0 = TWO_PI * C_LIGHT / w_c
    v = math.sqrt(cavity.effective_permittivity - 1.0)
    delta = cavity.electrode_distance / b
    n = np.arange(1, 2 * n_terms, 2, dtype=float)
    f_n = np.sqrt(1.0 + (2.0 * b * v / (n * lam0)) ** 2)
    gamma_n = n * math.pi * f_n / b
    half = n * math.pi * delta / 2.0
    s_n = np.sin(half) / half * np.sin(half)  # δ̄ taken equal to δ
    decay = np.exp(-gamma_n * x0)
    ex_terms = -(s_n / f_n) * np.cos(n * math.pi * y0 / b) * decay
    ey_terms = s_n * np.sin(n * math.pi * y0 / b) * decay
    terms = np.stack([ex_terms, ey_terms])
    dterms = -gamma_n * terms
    e = terms.sum(axis=1)
    de = dterms.sum(axis=1)
    last = max(np.linalg.norm(terms[:, -1]) / max(np.linalg.norm(e), 1e-300),
               np.linalg.norm(dterms[:, -1]) / max(np.linalg.norm(de), 1e-300))
    converged = bool(last < rel_tol)
    if not converged:
        raise SeriesConvergenceError(f"mode series not converged at x={x0:.3g} m after {n_terms} odd "
                                     f"terms (last/partial = {last:.2e})")
    return CPWMode(w_c, vacuum_field(cavity, w_c), e, de, n_terms, converged)


# ---------------------------------------------------------------------------
# couplings
# ---------------------------------------------------------------------------

def photon_phonon_coupling_gap(beam: BeamSpec, cavity: CavitySpec, drive: DriveSpec,
                               mode_gradient: float | None = None,
                               omega_m: float | None = None) -> float:
    """Drive-enhanced photon-phonon coupling for a beam above the open gap.

    g = -(1/ħ) V α⊥ ℰ0 E_p ∂x e_tr x_zpf   (signed, rad/s)

    ``mode_gradient`` defaults to the cavity's anchor value.
    """
    w_m = beam_mode_frequencies(beam)[0] if omega_m is None else omega_m
    grad = cavity.mode_gradient_anchor if mode_gradient is None else mode_gradient
    alpha = polarizability(beam).perp
    xz = zero_point_motion(beam.mass, w_m)
    return -beam.volume * alpha * vacuum_field(cavity) * drive.ac_amplitude * grad * xz / HBAR


def electrode_voltage(cavity: CavitySpec) -> float:
    el = cavity.electrode
    if el is None:
        raise ValueError("cavity has no electrode configuration")
    if el.u0_override is not None:
        return el.u0_override
    if el.capacitance is None:
        raise ValueError("electrode configuration needs u0_override or capacitance")
    return math.sqrt(HBAR * cavity_frequency(cavity) / el.capacitance)


def electrode_field_gradient(cavity: CavitySpec) -> float:
    """|∂E/∂x| ~ u0 ζ / h² per photon above the electrode tip (V/m²)."""
    el = cavity.electrode
    if el is None:
        raise ValueError("cavity has no electrode configuration")
    return electrode_voltage(cavity) * el.geometry_factor / el.height ** 2


def photon_phonon_coupling_electrode(beam: BeamSpec, cavity: CavitySpec, drive: DriveSpec,
                                     omega_m: float | None = None) -> float:
    """Coupling for a beam a height h above an electrode tip.

    Field gradient |∂E/∂x| ~ u0 ζ / h², so
    g = -V α⊥ E_p (u0 ζ / h²) / sqrt(2 m ħ ω_m).
    """
    w_m = beam_mode_frequencies(beam)[0] if omega_m is None else omega_m
    alpha = polarizability(beam).perp
    grad = electrode_field_gradient(cavity)
    return -beam.volume * alpha * drive.ac_amplitude * grad / math.sqrt(2.0 * beam.mass * HBAR * w_m)


def magnet_gradient(magnet: MagnetSpec) -> float:
    """Dipole-field gradient 3 μ0 |m| / (4π d0⁴) at the standoff (T/m)."""
    moment = magnet.length * magnet.width * magnet.thickness * magnet.magnetization
    return 3.0 * MU0 * moment / (4.0 * math.pi * magnet.standoff ** 4)


def spin_motion_coupling(mass: float, omega_m: float, field_gradient: float) -> float:
    """λ = g_NV μ_B ∂B/∂x x_zpf / (√2 ħ)  (rad/s)."""
    return G_NV * MU_B * field_gradient * zero_point_motion(mass, omega_m) / (math.sqrt(2.0) * HBAR)


def thermal_occupation(omega: float, temperature: float) -> float:
    """Bose occupation 1 / (exp(ħω / k_B T) - 1)."""
    if temperature < 0:
        raise ValueError("temperature must be non-negative")
    if temperature == 0:
        return 0.0
    x = HBAR * omega / (KB * temperature)
    if x > 700:
        return 0.0
    return 1.0 / math.expm1(x)


def spin_transition_frequency(bias_field: float) -> float:
    """ω_+ = D − g_NV μ_B B0 / ħ for the |0> ↔ |−1> transition (rad/s)."""
    return D_NV - G_NV * MU_B * bias_field / HBAR


# ---------------------------------------------------------------------------
# coupling set
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CouplingSet:
    """Derived frequencies and rates of the tripartite device.

    Frequencies in rad/s, rates in 1/s, ``field_zpf`` in V/m, ``x_zpf`` in m,
    ``mass`` in kg.  ``g`` and ``lam`` keep their sign; dynamics use
    magnitudes.  ``overridden`` names fields supplied externally rather than
    derived.
    """

    omega_m: float
    omega_1: float
    omega_c: float
    detuning: float
    field_zpf: float
    x_zpf: float
    g: float
    lam: float
    kappa: float
    gamma_m: float
    gamma_s: float
    n_th: float
    mass: float
    field_gradient: float = math.nan
    mode_gradient: float = math.nan
    overridden: frozenset = frozenset()

    UNITS = {
        "omega_m": "rad/s", "omega_1": "rad/s", "omega_c": "rad/s", "detuning": "rad/s",
        "field_zpf": "V/m", "x_zpf": "m", "g": "rad/s", "lam": "rad/s", "kappa": "1/s",
        "gamma_m": "1/s", "gamma_s": "1/s", "n_th": "1", "mass": "kg",
        "field_gradient": "T/m", "mode_gradient": "1/m",
    }

    def __post_init__(self):
        for name in ("omega_m", "omega_1", "omega_c", "detuning"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.n_th < 0:
            raise ValueError("n_th must be non-negative")
        if min(self.kappa, self.gamma_m, self.gamma_s) < 0:
            raise ValueError("rates must be non-negative")
        expect = zero_point_motion(self.mass, self.omega_m)
        if abs(self.x_zpf - expect) > 1e-12 * expect:
            raise ValueError("x_zpf inconsistent with mass and omega_m")

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.UNITS}

    def in_hz(self, name: str) -> float:
        """Value divided by 2π (for angular frequencies and rates quoted as ν/2π)."""
        return getattr(self, name) / TWO_PI


COUPLING_FIELDS = tuple(CouplingSet.UNITS)


def build_coupling_set(device: DeviceSpec, variant: str = "gap",
                       overrides: Mapping[str, float] | None = None) -> CouplingSet:
    """Assemble a :class:`CouplingSet` from a device description.

    Parameters
    ----------
    device : DeviceSpec
    variant : {"gap", "electrode"}
        Which photon-phonon coupling geometry to use.
    overrides : mapping, optional
        Field name -> value.  An overridden quantity replaces the derived one
        and feeds every later derivation (overriding ``omega_m`` changes
        ``x_zpf``, ``g``, ``lam``, ``gamma_m`` and ``n_th``).  ``x_zpf`` and
        ``omega_1`` follow from mass and ``omega_m`` and cannot be overridden
        independently.

    Returns
    -------
    CouplingSet
    """
    ov = dict(overrides or {})
    unknown = set(ov) - set(COUPLING_FIELDS)
    if unknown or "x_zpf" in ov:
        raise ValueError(f"cannot override {sorted(unknown | ({'x_zpf'} & set(ov)))}")
    used = set()

    def pick(name, derive):
        if name in ov:
            used.add(name)
            log.info("override %s = %r", name, ov[name])
            return float(ov[name])
        return float(derive())

    beam, cav = device.beam, device.cavity
    mass = pick("mass", lambda: beam.mass)
    w_m = pick("omega_m", lambda: beam_mode_frequencies(beam)[0])
    ratio = (CLAMPED_ROOTS[1] / CLAMPED_ROOTS[0]) ** 2
    w_1 = pick("omega_1", lambda: w_m * ratio)
    w_c = pick("omega_c", lambda: cavity_frequency(cav))
    e0 = pick("field_zpf", lambda: vacuum_field(cav, w_c))
    xz = zero_point_motion(mass, w_m)
    alpha = polarizability(beam).perp

    def drive_detuning():
        if device.drive.ac_frequency is None:
            return w_m
        return device.drive.ac_frequency - w_c

    delta = pick("detuning", drive_detuning)
    mode_grad = pick("mode_gradient", lambda: cav.mode_gradient_anchor)
    if variant == "gap":
        g_fn = lambda: -beam.volume * alpha * e0 * device.drive.ac_amplitude * mode_grad * xz / HBAR  # noqa: E731
    elif variant == "electrode":
        g_fn = lambda: (-beam.volume * alpha * device.drive.ac_amplitude  # noqa: E731
                        * electrode_field_gradient(cav) * xz / HBAR)
    else:
        raise ValueError(f"unknown coupling variant {variant!r}")
    g = pick("g", g_fn)
    grad = pick("field_gradient",
                lambda: magnet_gradient(device.magnet) if device.field_gradient is None
                else device.field_gradient)
    lam = pick("lam", lambda: spin_motion_coupling(mass, w_m, grad))
    kappa = pick("kappa", lambda: w_c / cav.quality_factor)
    gamma_m = pick("gamma_m", lambda: w_m / beam.quality_factor)
    gamma_s = pick("gamma_s", lambda: device.gamma_s)
    n_th = pick("n_th", lambda: thermal_occupation(w_m, device.temperature))
    return CouplingSet(omega_m=w_m, omega_1=w_1, omega_c=w_c, detuning=delta, field_zpf=e0,
                       x_zpf=xz, g=g, lam=lam, kappa=kappa, gamma_m=gamma_m, gamma_s=gamma_s,
                       n_th=n_th, mass=mass, field_gradient=grad, mode_gradient=mode_grad,
                       overridden=frozenset(used))


@dataclass(frozen=True)
class StrongCoupling:
    min_coupling: float
    max_decoherence: float
    ok: bool


def strong_coupling(cs: CouplingSet) -> StrongCoupling:
    """min(|g|, |λ|) against max(n_th γ_m, κ, γ_s)."""
    c = min(abs(cs.g), abs(cs.lam))
    d = max(cs.n_th * cs.gamma_m, cs.kappa, cs.gamma_s)
    return StrongCoupling(c, d, c > d)


@dataclass(frozen=True)
class LengthSweep:
    lengths: np.ndarray
    omega_m: np.ndarray
    g: np.ndarray
    lam: np.ndarray
    n_th: np.ndarray
    crossing: float | None  # length where |g| = |λ|


def length_sweep(device: DeviceSpec, lengths: Sequence[float], variant: str = "gap") -> LengthSweep:
    """Coupling strengths against beam length at fixed cross-section."""
    ls = np.asarray(lengths, dtype=float)
    rows = [build_coupling_set(replace(device, beam=replace(device.beam, length=float(l))), variant)
            for l in ls]
    g = np.array([abs(r.g) for r in rows])
    lam = np.array([abs(r.lam) for r in rows])
    return LengthSweep(ls, np.array([r.omega_m for r in rows]), g, lam,
                       np.array([r.n_th for r in rows]), coupling_crossing(ls, g, lam))


def coupling_crossing(x: np.ndarray, g: np.ndarray, lam: np.ndarray) -> float | None:
    """First x where g - λ changes sign (linear interpolation)."""
    d = np.asarray(g) - np.asarray(lam)
    idx = np.nonzero(np.sign(d[:-1]) * np.sign(d[1:]) < 0)[0]
    if idx.size == 0:
        return None
    i = idx[0]
    return float(x[i] - d[i] * (x[i + 1] - x[i]) / (d[i + 1] - d[i]))


# ---------------------------------------------------------------------------
# decoherence
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecoherenceEstimates:
    gamma_sc: float  # recoil heating rate, 1/s
    photon_scattering: float  # Γ_sc, photons/s
    strain_coupling: float  # 2 g_s² / Δ expressed in Hz (cyclic)
    gamma_m: float
    sc_negligible: bool
    strain_negligible: bool


def decoherence_estimates(device: DeviceSpec, cs: CouplingSet, strain_coupling: float = TWO_PI * 1.0,
                          strain_detuning: float = TWO_PI * 300e3,
                          negligible_fraction: float = 1e-2) -> DecoherenceEstimates:
    """Photon-recoil heating and strain-mediated spin-spin coupling.

    The induced dipole p = V α⊥ E_p radiates Γ_sc = c² Z0 k⁴ |p|² / (12π ħ ω)
    photons per second at the drive frequency; each recoil deposits
    ħ ω_r = ħ²k²/2m, giving a phonon heating rate γ_sc ≈ (ω_r / ω_m) Γ_sc.
    ``strain_coupling`` and ``strain_detuning`` are angular; the dispersive
    strength 2 g²/Δ is returned in cyclic Hz.  Both are flagged negligible
    when below ``negligible_fraction`` × γ_m.
    """
    beam = device.beam
    w_p = device.drive.ac_frequency
    if w_p is None:
        w_p = cs.omega_c + cs.detuning
    k = w_p / C_LIGHT
    p = beam.volume * polarizability(beam).perp * device.drive.ac_amplitude
    big_gamma = C_LIGHT ** 2 * Z0 * k ** 4 * p ** 2 / (12.0 * math.pi * HBAR * w_p)
    w_r = HBAR * k ** 2 / (2.0 * cs.mass)
    gamma_sc = w_r / cs.omega_m * big_gamma
    strain = 2.0 * strain_coupling ** 2 / strain_detuning
    limit = negligible_fraction * cs.gamma_m
    return DecoherenceEstimates(gamma_sc, big_gamma, strain / TWO_PI, cs.gamma_m,
                                gamma_sc < limit, strain < limit)

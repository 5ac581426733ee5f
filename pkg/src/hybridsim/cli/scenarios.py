"""Scenario implementations: config in, tables and headline scalars out."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .. import cooling, device, interface
from ..constants import TWO_PI
from .config import ScenarioConfig, check_sweep_var, device_spec, parse_grid


@dataclass
class ScenarioOutput:
    tables: dict = field(default_factory=dict)  # name -> {column: array}
    scalars: dict = field(default_factory=dict)
    resolved: dict = field(default_factory=dict)  # derived parameters, SI units
    overridden: list = field(default_factory=list)


def couplings(cfg: ScenarioConfig) -> device.CouplingSet:
    return device.build_coupling_set(device_spec(cfg), cfg.raw("device.variant"), cfg.overrides())


def _resolved(cs: device.CouplingSet) -> dict:
    """Derived couplings in SI units, each tagged with whether it was overridden."""
    return {k: {"value": v, "unit": cs.UNITS[k], "overridden": k in cs.overridden}
            for k, v in cs.as_dict().items()}


def _hz(x: float) -> float:
    return x / TWO_PI


def run_params(cfg: ScenarioConfig) -> ScenarioOutput:
    dev = device_spec(cfg)
    cs = couplings(cfg)
    sc = device.strong_coupling(cs)
    sep = device.mode_separation_check(cs)
    dec = device.decoherence_estimates(dev, cs)
    scalars = {
        "omega_m_Hz": _hz(cs.omega_m), "omega_1_Hz": _hz(cs.omega_1), "omega_c_Hz": _hz(cs.omega_c),
        "detuning_Hz": _hz(cs.detuning), "field_zpf_V_per_m": cs.field_zpf, "x_zpf_m": cs.x_zpf,
        "g_Hz": _hz(cs.g), "lam_Hz": _hz(cs.lam), "kappa_Hz": _hz(cs.kappa),
        "gamma_m_Hz": _hz(cs.gamma_m), "gamma_s_Hz": _hz(cs.gamma_s), "n_th": cs.n_th,
        "mass_kg": cs.mass, "field_gradient_T_per_m": cs.field_gradient,
        "magnet_gradient_T_per_m": device.magnet_gradient(dev.magnet),
        "strong_coupling": sc.ok, "mode_separation_ratio": sep.ratio,
        "gamma_sc_per_s": dec.gamma_sc, "strain_coupling_Hz": dec.strain_coupling,
        "gamma_sc_negligible": dec.sc_negligible, "strain_negligible": dec.strain_negligible,
    }
    return ScenarioOutput({}, scalars, _resolved(cs), sorted(cs.overridden))


def _cooling_params(cfg: ScenarioConfig):
    cs = couplings(cfg)
    return cs, cooling.CoolingParams.from_couplings(cs)


def run_cool(cfg: ScenarioConfig) -> ScenarioOutput:
    cs, p = _cooling_params(cfg)
    diag = cooling.stability_and_cooperativity(p)
    scalars = {"cooperativity": diag.cooperativity, "sideband_resolution": diag.sideband_resolution,
               "stable": diag.stable}
    try:
        fo = cooling.final_occupancy_formulas(p)
        scalars.update(n_f_weak=fo.n_f_weak, n_f_strong=fo.n_f_strong)
    except ValueError:
        scalars.update(n_f_weak=math.nan, n_f_strong=math.nan)
    form = cfg.raw("cool.form")
    tables = {}
    if cfg.raw("cool.mode") == "trajectory":
        n_b0 = p.n_th if cfg.raw("cool.n_b0") is None else cfg.raw("cool.n_b0")
        times = np.linspace(0.0, cfg.raw("numerics.t_end_s"), cfg.raw("numerics.n_times"))
        ser = cooling.evolve_moments(p, cooling.thermal_moments(0.0, n_b0), times, form=form)
        tables["trajectory"] = {"t_s": times, "n_a": ser["n_a"], "n_b": ser["n_b"]}
        entry = cooling.ground_state_entry(ser)
        scalars.update(n_f=float(ser["n_b"][-1]), n_b_min=entry.minimum,
                       t_min_s=entry.time_of_minimum, first_below_1_s=entry.first_below,
                       settled_below_1_s=entry.settled_below)
        if diag.stable:
            scalars["n_f_steady"] = float(cooling.steady_moments(p, form).n_b.real)
    else:
        xs = np.linspace(cfg.raw("cool.g_over_kappa_start"), cfg.raw("cool.g_over_kappa_stop"),
                         cfg.raw("cool.g_over_kappa_num"))
        mom, weak, strong = [], [], []
        for x in xs:
            q = cooling.CoolingParams(g=x * p.kappa, omega_m=p.omega_m, kappa=p.kappa,
                                      gamma_m=p.gamma_m, n_th=p.n_th, detuning=p.detuning)
            try:
                mom.append(float(cooling.steady_moments(q, form).n_b.real))
            except cooling.UnstableCoolingError:
                mom.append(math.nan)
            try:
                fo = cooling.final_occupancy_formulas(q)
                weak.append(fo.n_f_weak)
                strong.append(fo.n_f_strong)
            except ValueError:
                weak.append(math.nan)
                strong.append(math.nan)
        mom = np.array(mom)
        if np.all(np.isnan(mom)):
            raise cooling.UnstableCoolingError("no stable point on the g/kappa grid")
        tables["steady"] = {"g_over_kappa": xs, "n_f": mom, "n_f_weak": np.array(weak),
                            "n_f_strong": np.array(strong)}
        i = int(np.nanargmin(mom))
        scalars.update(n_f=float(mom[i]), g_over_kappa_at_min=float(xs[i]))
    return ScenarioOutput(tables, scalars, _resolved(cs), sorted(cs.overridden))


def run_rabi(cfg: ScenarioConfig) -> ScenarioOutput:
    cs = couplings(cfg)
    p = interface.TripartiteParams.from_couplings(cs, n_mech=cfg.raw("numerics.n_mech"),
                                                  n_cav=cfg.raw("numerics.n_cav"))
    r = interface.rabi_scenario(p, cfg.raw("numerics.t_end_s"), cfg.raw("numerics.n_times"),
                                dissipative=cfg.raw("rabi.dissipative"), n_m0=cfg.raw("rabi.n_m0"))
    s = r.series
    tables = {
        "rabi": {"t_s": s.times, "P_spin": s["P_spin"], "n_a": s["n_a"], "n_b": s["n_b"],
                 "N_exc": s["N_exc"]},
        "photon_distribution": {"n": np.arange(p.n_cav), "p": r.photon_distribution},
    }
    i = int(np.argmin(np.abs(s.times - r.t_half)))
    scalars = {"t_half_s": r.t_half, "P_spin_at_t_half": float(s["P_spin"][i]),
               "max_excitation_drift": r.max_excitation_drift,
               "n_b_final": float(s["n_b"][-1])}
    for k in range(min(3, p.n_cav)):
        scalars[f"p_cav_{k}"] = float(r.photon_distribution[k])
    return ScenarioOutput(tables, scalars, _resolved(cs), sorted(cs.overridden))


def transfer_setup(cfg: ScenarioConfig):
    v = cfg.raw
    p = interface.TripartiteParams(0.0, 0.0, 0.0, v("transfer.g0_per_lam"), 1.0,
                                   kappa=v("transfer.kappa_per_lam"),
                                   gamma_m=v("transfer.gamma_m_per_lam"),
                                   gamma_s=v("transfer.gamma_s_per_lam"), n_th=v("transfer.n_th"),
                                   n_mech=v("numerics.n_mech"), n_cav=v("numerics.n_cav"))
    sched = interface.PulseSchedule(v("transfer.g0_per_lam"), 1.0, width=v("transfer.width_inv_lam"),
                                    t_center=v("transfer.t_center_inv_lam"),
                                    t_start=v("transfer.t_start_inv_lam"),
                                    t_end=v("transfer.t_end_inv_lam"), shape=v("transfer.shape"))
    return p, sched


def run_transfer(cfg: ScenarioConfig) -> ScenarioOutput:
    p, sched = transfer_setup(cfg)
    r = interface.stirap_transfer(p, sched, n_m0=cfg.raw("transfer.n_m0"),
                                  n_times=cfg.raw("numerics.n_times"),
                                  dissipative=cfg.raw("transfer.dissipative"))
    s = r.series
    tables = {"transfer": {"t_inv_lam": s.times, "g_per_lam": s["g"], "P_spin": s["P_spin"],
                           "n_a": s["n_a"], "n_b": s["n_b"]}}
    scalars = {"fidelity": r.fidelity, "fidelity_unmaximized": r.fidelity_unmaximized,
               "phase_rad": r.phase, "adiabaticity": r.adiabaticity}
    resolved = {"g0_per_lam": p.g, "kappa_per_lam": p.kappa, "gamma_m_per_lam": p.gamma_m,
                "gamma_s_per_lam": p.gamma_s, "n_th": p.n_th}
    return ScenarioOutput(tables, scalars, resolved, [])


def effective_setup(cfg: ScenarioConfig) -> interface.TripartiteParams:
    """Full-model parameters in units of g, with Δ2 at the shifted resonance."""
    v = cfg.raw
    base = interface.TripartiteParams(0.0, v("effective.delta_per_g"), 0.0, 1.0, v("effective.lam_per_g"),
                                      n_mech=v("numerics.n_mech"), n_cav=v("numerics.n_cav"))
    eff = interface.EffectiveParams.from_tripartite(base)
    ge = abs(eff.g_eff)
    return interface.TripartiteParams(0.0, base.omega_m, eff.resonant_delta2(), 1.0, base.lam,
                                      kappa=v("effective.kappa_per_geff") * ge,
                                      gamma_m=v("effective.gamma_m_per_geff") * ge,
                                      gamma_s=v("effective.gamma_s_per_geff") * ge,
                                      n_th=v("effective.n_th"), n_mech=base.n_mech, n_cav=base.n_cav)


def run_effective(cfg: ScenarioConfig) -> ScenarioOutput:
    p = effective_setup(cfg)
    c = interface.effective_vs_full_comparison(p, n_times=cfg.raw("numerics.n_times"))
    fit = interface.fit_effective_rabi_frequency(p, n_periods=cfg.raw("effective.fit_periods"))
    tables = {"effective": {"t_inv_g": c.times, "trace_distance": c.trace_distance,
                            "P_spin_full": c.spin_full, "P_spin_effective": c.spin_effective}}
    e = c.effective
    scalars = {"g_eff_per_g": e.g_eff, "alpha": e.alpha, "beta": e.beta,
               "max_trace_distance": c.max_trace_distance, "fitted_frequency_per_g": fit.frequency,
               "fit_ratio": fit.ratio}
    resolved = {"delta1_per_g": e.delta1, "delta2_per_g": e.delta2, "lam_per_g": e.lam,
                "kappa_per_g": p.kappa, "gamma_m_per_g": p.gamma_m, "gamma_s_per_g": p.gamma_s,
                "n_th": p.n_th}
    return ScenarioOutput(tables, scalars, resolved, [])


def run_validate(cfg: ScenarioConfig) -> ScenarioOutput:
    from .acceptance import run_acceptance

    flt = cfg.raw("validate.filter")
    ids = None if flt is None else [int(x) for x in str(flt).split(",")]
    report = run_acceptance(ids)
    tables = {"criteria": {"id": np.array([r.id for r in report]),
                           "passed": np.array([int(r.passed) for r in report]),
                           "runtime_s": np.array([r.runtime for r in report])}}
    scalars = {f"criterion_{r.id}_passed": r.passed for r in report}
    scalars["n_passed"] = sum(r.passed for r in report)
    scalars["n_failed"] = sum(not r.passed for r in report)
    return ScenarioOutput(tables, scalars, {"report": [r.as_dict() for r in report]}, [])


RUNNERS = {"params": run_params, "cool": run_cool, "rabi": run_rabi, "transfer": run_transfer,
           "effective": run_effective, "validate": run_validate}


def sweep_base(cfg: ScenarioConfig) -> str:
    return "params" if cfg.scenario == "sweep" else cfg.scenario


def run_sweep(cfg: ScenarioConfig, var: str, grid: list[float]) -> ScenarioOutput:
    """Re-run the base scenario at each grid value and tabulate numeric headline scalars."""
    check_sweep_var(var)
    base = sweep_base(cfg)
    if base == "validate":
        raise ValueError("the validate scenario cannot be swept")
    runner = RUNNERS[base]
    rows = []
    for x in grid:
        out = runner(cfg.with_value(var, x))
        row = {var: float(x)}
        row.update({k: float(v) for k, v in out.scalars.items()
                    if isinstance(v, (int, float)) and v is not None})
        rows.append(row)
    cols = list(rows[0])
    table = {c: np.array([r.get(c, math.nan) for r in rows]) for c in cols}
    # a single grid point reports the same scalars as a plain run
    scalars = dict(out.scalars) if len(rows) == 1 else {}
    if base == "params" and len(rows) > 1:
        scalars["g_lam_crossing"] = device.coupling_crossing(table[var], np.abs(table["g_Hz"]),
                                                             np.abs(table["lam_Hz"]))
    scalars["n_points"] = len(rows)
    return ScenarioOutput({"sweep": table}, scalars, out.resolved, out.overridden)


def run(cfg: ScenarioConfig) -> ScenarioOutput:
    if cfg.raw("sweep.var") is not None and cfg.raw("sweep.grid") is not None:
        return run_sweep(cfg, cfg.raw("sweep.var"), parse_grid(cfg.raw("sweep.grid")))
    if cfg.scenario == "sweep":
        raise ValueError("sweep scenario needs sweep.grid (or --grid)")
    return RUNNERS[cfg.scenario](cfg)

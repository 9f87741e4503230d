"""Command-line front end: flux sweeps and scripted protocol runs.

Every invocation is driven by one TOML scenario config and writes its
outputs atomically into one directory: the protocol record (JSON), any
tables or state dumps, the effective config that reproduces the run, and
a run record with the config hash, tool version, wall time, and output
manifest. Outputs are deterministic; only the timing fields (wall_time_s,
runtime_s) differ between repeated runs of the same effective config.

Exit codes: 0 success, 2 malformed config or usage, 3 physics/domain
failure (reported as an error JSON on stdout).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .circuit import (
    SWEEP_COLUMNS,
    ModeParams,
    enumerate_branches,
    mode_params,
    solve_equilibrium,
    sweep_rows,
)
from .config import (
    ScenarioConfig,
    config_hash,
    effective_toml,
    load_config,
    parse_config,
)
from .dynamics import (
    LindbladModel,
    add_z_drive,
    adiabatic_model,
    build_two_mode_model,
    evolve,
)
from .errors import ConfigError, NoStabilization, PhysicsError
from .fock import (
    ModeSpace,
    Operator,
    adequate_dim,
    annihilation,
    cat_state,
    coherent_state,
    fock_state,
)
from .io import (
    atomic_write_text,
    save_state,
    save_wigner,
    sweep_to_csv,
    trajectory_to_csv,
    wigner_to_csv,
    write_record,
)
from .protocols import (
    MixedCatModel,
    TransmonPopulationTable,
    bias_preservation_scan,
    bitflip_time,
    buffer_thermal_occupation,
    cnot_gate_time,
    cnot_sequence,
    decay_wigner_maps,
    detuned_photon_number,
    extract_kappa2,
    ideal_z_rates,
    kappa1_from_fock_decay,
    phaseflip_rate,
    semiclassical_buffer,
    stabilization_threshold,
    transmon_bitflip_bound,
    z_rotation,
)
from .wigner import (
    default_axes,
    parity_point,
    photon_number_from_grid,
    wigner_numeric,
)

TWO_PI = 2.0 * math.pi
_MHZ = TWO_PI * 1e6
_KHZ = TWO_PI * 1e3

PROTOCOLS = (
    "kappa2", "kappa1", "bitflip", "phaseflip", "zgate", "bias_scan",
    "semiclassical", "transmon_bound", "cnot", "wigner",
)

BRANCH_COLUMNS = (
    "phi_ext[phi0]", "branch", "phi_J_bar[rad]", "phi_W_bar[rad]",
    "EJ_eff[GHz]", "EW_eff[GHz]", "stable",
)


def _json_safe(obj):
    """Mirror of params into strict-JSON types; non-finite numbers to null."""
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (bool, str)) or obj is None:
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, (complex, np.complexfloating)):
        return _json_safe([obj.real, obj.imag])
    raise TypeError(f"cannot serialize {type(obj).__name__} into a record")


def _materialize(args, protocol_arg: str | None
                 ) -> tuple[ScenarioConfig, str]:
    """Parse the config with CLI overrides folded into [run].

    The folded text is what gets emitted as effective_config.toml, so the
    run is governed by exactly the config it reports.
    """
    base = load_config(args.config)
    raw = {sec: dict(tab) for sec, tab in base.raw.items()}
    run_tab = raw.setdefault("run", {})
    if protocol_arg is not None:
        run_tab["protocol"] = protocol_arg
    if args.seed is not None:
        run_tab["seed"] = int(args.seed)
    run_tab.setdefault("seed", 0)
    cfg = parse_config(effective_toml(
        ScenarioConfig(ring=None, overrides={}, rates=base.rates,
                       drive=base.drive, run=base.run, raw=raw)))
    return cfg, effective_toml(cfg)


def _resolve_out(args, cfg: ScenarioConfig) -> str:
    out = args.out or cfg.run.out or os.getcwd()
    os.makedirs(out, exist_ok=True)
    return out


def _write_run_artifacts(cfg: ScenarioConfig, eff_text: str, out_dir: str,
                         protocol: str, outputs: list[str],
                         wall: float) -> None:
    atomic_write_text(os.path.join(out_dir, "effective_config.toml"),
                      eff_text)
    record = {
        "config_hash": config_hash(cfg),
        "version": __version__,
        "protocol": protocol,
        "seed": int(cfg.run.seed),
        "wall_time_s": float(wall),
        "outputs": sorted(outputs + ["effective_config.toml"]),
    }
    atomic_write_text(os.path.join(out_dir, "run_record.json"),
                      json.dumps(record, sort_keys=True, indent=2) + "\n")


def _circuit_rates(cfg: ScenarioConfig) -> dict:
    """Mode couplings for dynamics: explicit overrides win, the rest are
    derived from the ring when one is configured."""
    vals = dict(cfg.overrides)
    if cfg.ring is not None:
        eq = solve_equilibrium(cfg.ring)
        mp = mode_params(eq, cfg.ring.E_C,
                         zpf_m=vals.get("zpf_m"), zpf_b=vals.get("zpf_b"),
                         omega_m=vals.get("omega_m"),
                         omega_b=vals.get("omega_b"))
        for name in ("omega_m", "omega_b", "zpf_m", "zpf_b",
                     "g2", "chi_mm", "chi_bb", "chi_mb"):
            vals.setdefault(name, getattr(mp, name))
    if "g2" not in vals:
        raise ConfigError(
            "[circuit] needs g2_MHz or the full ring parameters")
    return vals


def _mode_set(cfg: ScenarioConfig) -> ModeParams:
    vals = _circuit_rates(cfg)
    return ModeParams(
        omega_m=vals.get("omega_m", 0.0), omega_b=vals.get("omega_b", 0.0),
        zpf_m=vals.get("zpf_m", 0.0), zpf_b=vals.get("zpf_b", 0.0),
        g2=vals["g2"], chi_mm=vals.get("chi_mm", 0.0),
        chi_bb=vals.get("chi_bb", 0.0), chi_mb=vals.get("chi_mb", 0.0))


def _adiabatic(cfg: ScenarioConfig, alpha: complex,
               dim: int | None) -> LindbladModel:
    vals = _circuit_rates(cfg)
    if cfg.rates.kappa_b <= 0:
        raise ConfigError("[rates] needs kappa_b_MHz > 0 for the "
                          "adiabatic single-mode model")
    return adiabatic_model(vals["g2"], cfg.rates.kappa_b, alpha,
                           rates=cfg.rates, chi_mm=vals.get("chi_mm", 0.0),
                           Delta_m=cfg.drive.Delta_m, dim=dim)


def _time_grid(run, default_span: float | None = None,
               default_n: int = 9) -> np.ndarray:
    if run.times is not None:
        t = np.asarray(run.times, dtype=float)
        if t.size < 2 or np.any(np.diff(t) <= 0):
            raise ConfigError("[run] times_ns must be strictly increasing "
                              "with at least two samples")
        return t
    span = run.t_max if run.t_max is not None else default_span
    if span is None:
        raise ConfigError("[run] needs times_ns or t_max_us")
    if span <= 0:
        raise ConfigError("[run] t_max_us must be positive")
    n = run.n_samples if run.n_samples is not None else default_n
    if n < 2:
        raise ConfigError("[run] n_samples must be >= 2")
    return np.linspace(0.0, span, n)


def _pmap(fn, items, jobs: int) -> list:
    if jobs > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


# protocol handlers: return (value, stderr, method, params, outputs)

def _run_kappa2(cfg, out_dir, jobs):
    run = cfg.run
    alpha = run.target_alpha()
    p_plus = run.p_plus if run.p_plus is not None else 0.9
    k2_true = run.require("kappa2")
    guess = run.kappa2_guess if run.kappa2_guess is not None else k2_true
    a2 = abs(alpha) ** 2
    times = _time_grid(run, default_span=2.0 / (k2_true * max(a2, 0.25)),
                       default_n=5)
    if times[0] != 0.0:
        raise ConfigError("[run] kappa2 needs the first frame at t = 0 "
                          "(the initial cat is fitted from it)")
    if cfg.ring is not None:
        chi_mm = _circuit_rates(cfg)["chi_mm"]
    else:
        chi_mm = cfg.overrides.get("chi_mm", 0.0)
    extent = run.grid_extent if run.grid_extent is not None else abs(alpha) + 1.8
    pts = run.grid_points if run.grid_points is not None else 45
    axis = np.linspace(-extent, extent, pts)
    maps = decay_wigner_maps(MixedCatModel(alpha, p_plus), times, k2_true,
                             kappa_1=cfg.rates.kappa_1, chi_mm=chi_mm,
                             dim=run.dim, grid=(axis, axis))
    outputs = []
    for k, g in enumerate(maps):
        name = f"kappa2_map_{k:03d}.csv"
        wigner_to_csv(os.path.join(out_dir, name), g)
        outputs.append(name)
    x_tol = run.x_tol if run.x_tol is not None else 2e-3
    fit = extract_kappa2(maps, times, guess, kappa_1=cfg.rates.kappa_1,
                         chi_mm=chi_mm, dim=run.dim, x_tol=x_tol)
    params = {
        "alpha": abs(alpha), "p_plus": p_plus,
        "generator_kappa2_MHz": k2_true / _MHZ,
        "recovered_kappa2_MHz": fit.value / _MHZ,
        "rel_error": fit.value / k2_true - 1.0,
        "n_frames": len(maps), "times_ns": [t * 1e9 for t in times],
        "x_tol": x_tol,
    }
    return fit.value, fit.stderr, fit.method, params, outputs


def _run_kappa1(cfg, out_dir, jobs):
    run = cfg.run
    kappa_1 = cfg.rates.kappa_1
    dim = run.dim if run.dim is not None else 8
    times = _time_grid(
        run, default_span=(2.0 / kappa_1 if kappa_1 > 0 else None))
    sm = ModeSpace(dim)
    space = (sm,)
    collapse = ()
    if kappa_1 > 0:
        m = annihilation(sm).matrix
        collapse = (Operator(space, math.sqrt(kappa_1) * m),)
    model = LindbladModel(
        space, Operator(space, np.zeros((dim, dim)), hermitian=True), (),
        collapse, 0j)
    states = evolve(model, fock_state(sm, 1), times)
    trajectory_to_csv(os.path.join(out_dir, "kappa1_trajectory.csv"),
                      times, states, include_w0=True)
    fit = kappa1_from_fock_decay(times, [parity_point(st) for st in states])
    params = {
        "kappa_1_input_kHz": kappa_1 / _KHZ,
        "recovered_kappa_1_kHz": fit.value / _KHZ,
        "dim": dim, "n_samples": len(times),
    }
    return fit.value, fit.stderr, fit.method, params, ["kappa1_trajectory.csv"]


def _run_bitflip(cfg, out_dir, jobs):
    run = cfg.run
    driven = cfg.drive.epsilon_Z != 0
    if run.dims is not None and len(run.dims) == 2:
        if cfg.drive.epsilon_d == 0:
            raise ConfigError("[drive] needs epsilon_d_MHz to stabilize "
                              "the two-mode model")
        model = build_two_mode_model(_mode_set(cfg), cfg.rates, cfg.drive,
                                     tuple(run.dims))
        alpha = model.alpha_target
    else:
        alpha = run.target_alpha()
        model = _adiabatic(cfg, alpha, run.dim)
        if driven:
            model = add_z_drive(model, cfg.drive.epsilon_Z,
                                cfg.drive.theta_z)
    symmetry = "joined" if driven else "parity-odd"
    method = "fit" if run.times is not None else "spectral"
    res = bitflip_time(model, method=method,
                       times=run.times, symmetry=symmetry)
    params = {
        "alpha_sq": abs(alpha) ** 2, "symmetry": symmetry,
        "T_X_us": res.value * 1e6 if math.isfinite(res.value) else None,
        "lower_bound_s": res.lower_bound,
    }
    return res.value, res.stderr, res.method, params, []


def _run_phaseflip(cfg, out_dir, jobs):
    run = cfg.run
    alpha = run.target_alpha()
    a2 = abs(alpha) ** 2
    gamma_ideal = 2.0 * a2 * cfg.rates.kappa_1
    dim = run.dim
    if dim is None:
        dim = int(math.ceil(a2 + 4.0 * math.sqrt(a2) + 6.0)) + 1
    model = _adiabatic(cfg, alpha, dim)
    times = _time_grid(
        run, default_span=(0.8 / gamma_ideal if gamma_ideal > 0 else None))
    fit = phaseflip_rate(model, times, alpha=alpha)
    states = evolve(model, cat_state(model.space[0], alpha), times)
    trajectory_to_csv(os.path.join(out_dir, "phaseflip_trajectory.csv"),
                      times, states, include_w0=run.include_w0)
    params = {
        "alpha_sq": a2, "dim": dim,
        "Gamma_Z_ideal_per_s": gamma_ideal,
        "ratio_to_ideal": fit.value / gamma_ideal if gamma_ideal > 0 else None,
    }
    return (fit.value, fit.stderr, fit.method, params,
            ["phaseflip_trajectory.csv"])


def _run_zgate(cfg, out_dir, jobs):
    run = cfg.run
    eps_Z = cfg.drive.epsilon_Z
    if eps_Z == 0:
        raise ConfigError("[drive] needs epsilon_Z_MHz != 0 for zgate")
    vals = _circuit_rates(cfg)
    if run.dims is not None and len(run.dims) == 2:
        if cfg.drive.epsilon_d == 0:
            raise ConfigError("[drive] needs epsilon_d_MHz to stabilize "
                              "the two-mode model")
        model = build_two_mode_model(_mode_set(cfg), cfg.rates, cfg.drive,
                                     tuple(run.dims))
        alpha = model.alpha_target
    else:
        alpha = run.target_alpha()
        model = add_z_drive(_adiabatic(cfg, alpha, run.dim), eps_Z,
                            cfg.drive.theta_z)
    omega_ideal, kappa_ideal = ideal_z_rates(
        alpha, eps_Z, cfg.rates.kappa_1, cfg.rates.kappa_b, vals["g2"])
    if run.t_max is not None:
        duration = run.t_max
    elif omega_ideal > 0:
        duration = 2.0 * TWO_PI / omega_ideal
    else:
        raise ConfigError("[run] needs t_max_us (ideal Omega_Z is not "
                          "positive, no natural period)")
    n = run.n_samples if run.n_samples is not None else 48
    zres = z_rotation(model, duration, n)
    sweep_to_csv(os.path.join(out_dir, "zgate_parity.csv"),
                 ("t[ns]", "parity"),
                 [(t * 1e9, p) for t, p in zip(zres.times, zres.parity)])
    params = {
        "alpha_sq": abs(alpha) ** 2,
        "Omega_Z_MHz": zres.omega_z / _MHZ,
        "kappa_Z_MHz": zres.kappa_z / _MHZ,
        "fidelity_pi": zres.fidelity_pi,
        "fidelity_pi_half": zres.fidelity_pi_half,
        "Omega_Z_ideal_MHz": omega_ideal / _MHZ,
        "kappa_Z_ideal_MHz": kappa_ideal / _MHZ,
    }
    stderr = zres.fit.frequency_stderr
    return (zres.omega_z, stderr if stderr is not None else 0.0,
            zres.fit.method, params, ["zgate_parity.csv"])


def _run_bias_scan(cfg, out_dir, jobs):
    run = cfg.run
    alpha = run.target_alpha()
    model = _adiabatic(cfg, alpha, run.dim)
    eps = run.require("eps_list")
    scan = bias_preservation_scan(model, eps, jobs=jobs)
    sweep_to_csv(os.path.join(out_dir, "bias_scan.csv"),
                 ("eps_Z_MHz", "T_X_s"),
                 [(e / _MHZ, t) for e, t in zip(scan.eps_values,
                                                scan.bitflip_times)])
    ref = scan.bitflip_times[scan.eps_values == 0.0]
    value = float(ref[0]) if ref.size else float(scan.bitflip_times[0])
    params = {
        "alpha_sq": abs(alpha) ** 2,
        "knee_MHz": scan.knee / _MHZ if scan.knee is not None else None,
        "eps_Z_MHz": [e / _MHZ for e in scan.eps_values],
        "T_X_s": list(scan.bitflip_times),
    }
    return value, 0.0, "spectral-scan", params, ["bias_scan.csv"]


def _run_semiclassical(cfg, out_dir, jobs):
    run = cfg.run
    vals = _circuit_rates(cfg)
    alpha = run.target_alpha()
    a2 = abs(alpha) ** 2
    lam = semiclassical_buffer(
        cfg.drive.Delta_m, vals.get("chi_mm", 0.0), vals.get("chi_mb", 0.0),
        vals["g2"], alpha, kappa_1=cfg.rates.kappa_1,
        kappa_phi_m=cfg.rates.kappa_phi_m)
    params = {
        "alpha_sq": a2,
        "Delta_m_MHz": cfg.drive.Delta_m / _MHZ,
        "lambda_re": lam.real, "lambda_im": lam.imag,
    }
    if cfg.rates.kappa_b > 0:
        params["threshold_MHz"] = stabilization_threshold(
            a2, cfg.rates.kappa_b, vals["g2"]) / _MHZ
        try:
            params["detuned_alpha_sq"] = detuned_photon_number(
                a2, cfg.drive.Delta_m, cfg.rates.kappa_b, vals["g2"])
        except NoStabilization:
            params["detuned_alpha_sq"] = None
        params["n_th_buffer"] = buffer_thermal_occupation(
            cfg.rates.kappa_phi_b, cfg.rates.kappa_b, lam)
    return abs(lam), 0.0, "fixed-point", params, []


def _run_transmon_bound(cfg, out_dir, jobs):
    run = cfg.run
    T1 = run.require("T1")
    try:
        table = TransmonPopulationTable(
            photon_axis=np.asarray(run.require("photon_axis"), dtype=float),
            populations=np.asarray(run.require("populations"), dtype=float),
            hybridized_mass=np.asarray(run.require("hybridized_mass"),
                                       dtype=float))
    except ValueError as exc:
        raise ConfigError(f"[run] transmon population table: {exc}") from exc
    bounds = transmon_bitflip_bound(table, 1.0 / T1)
    sweep_to_csv(os.path.join(out_dir, "transmon_bound.csv"),
                 ("n_photons", "bound_s"),
                 list(zip(table.photon_axis, bounds)))
    finite = bounds[np.isfinite(bounds)]
    value = float(finite.min()) if finite.size else math.inf
    params = {
        "T1_us": T1 * 1e6, "gamma_1to0_per_s": 1.0 / T1,
        "n_rows": int(table.photon_axis.size),
        "bounds_s": list(bounds),
    }
    return value, 0.0, "population-budget", params, ["transmon_bound.csv"]


def _run_cnot(cfg, out_dir, jobs):
    run = cfg.run
    alpha_c = run.require("alpha_c")
    alpha_t = run.alpha_t if run.alpha_t is not None else alpha_c
    g = run.require("g_cnot")
    dim = run.dim if run.dim is not None else adequate_dim(alpha_t)
    restab = run.restabilize_kappa2 if run.restabilize_kappa2 is not None else 0.0

    def leg(sign):
        return cnot_sequence(complex(sign * alpha_c), complex(alpha_t), g,
                             dim, kappa_1=cfg.rates.kappa_1,
                             restabilize_kappa2=restab)

    res_p, res_m = _pmap(leg, [1.0, -1.0], jobs)
    outputs = []
    for tag, res in (("plus", res_p), ("minus", res_m)):
        name = f"cnot_control_{tag}.acqs"
        save_state(os.path.join(out_dir, name), res.state)
        outputs.append(name)
    params = {
        "gate_time_ns": res_p.gate_time * 1e9,
        "g_cnot_MHz": g / _MHZ, "dim": dim,
        "fidelity_control_plus": res_p.fidelity,
        "fidelity_control_minus": res_m.fidelity,
        "rotation_plus_rad": res_p.rotation,
        "rotation_minus_rad": res_m.rotation,
    }
    value = min(res_p.fidelity, res_m.fidelity)
    return value, 0.0, "three-step-sequence", params, outputs


def _run_wigner(cfg, out_dir, jobs):
    run = cfg.run
    kind = run.state if run.state is not None else "cat"
    if kind == "cat":
        alpha = run.target_alpha()
        dim = run.dim if run.dim is not None else adequate_dim(alpha)
        st = cat_state(ModeSpace(dim), alpha)
    elif kind == "coherent":
        alpha = run.target_alpha()
        dim = run.dim if run.dim is not None else adequate_dim(alpha)
        st = coherent_state(ModeSpace(dim), alpha)
    elif kind == "fock":
        n = run.require("fock_n")
        dim = run.dim if run.dim is not None else n + 8
        st = fock_state(ModeSpace(dim), n)
    else:
        raise ConfigError(f"[run] unknown state '{kind}' "
                          "(cat, coherent, fock)")
    pts = run.grid_points if run.grid_points is not None else 161
    if run.grid_extent is not None:
        ax = np.linspace(-run.grid_extent, run.grid_extent, pts)
        grid = (ax, ax)
    else:
        grid = default_axes(st, pts)
    g = wigner_numeric(st, grid=grid)
    wigner_to_csv(os.path.join(out_dir, "wigner.csv"), g)
    save_wigner(os.path.join(out_dir, "wigner.acqs"), g)
    params = {
        "state": kind, "dim": dim,
        "n_bar_grid": photon_number_from_grid(g),
        "W0": parity_point(st),
    }
    return (photon_number_from_grid(g), 0.0, "displaced-parity", params,
            ["wigner.csv", "wigner.acqs"])


_HANDLERS = {
    "kappa2": _run_kappa2,
    "kappa1": _run_kappa1,
    "bitflip": _run_bitflip,
    "phaseflip": _run_phaseflip,
    "zgate": _run_zgate,
    "bias_scan": _run_bias_scan,
    "semiclassical": _run_semiclassical,
    "transmon_bound": _run_transmon_bound,
    "cnot": _run_cnot,
    "wigner": _run_wigner,
}


def _phi_grid(cfg: ScenarioConfig) -> np.ndarray:
    run = cfg.run
    if (run.phi_start is not None or run.phi_stop is not None
            or run.n_points is not None):
        start = run.require("phi_start")
        stop = run.require("phi_stop")
        n = run.require("n_points")
        if n < 1:
            raise ConfigError("[run] n_points must be >= 1: sweep range "
                              "is empty")
        return np.linspace(start, stop, n)
    return np.array([cfg.ring.phi_ext])


def _cmd_circuit(args) -> None:
    cfg, eff_text = _materialize(args, None)
    if cfg.ring is None:
        raise ConfigError("[circuit] the circuit subcommand needs the ring "
                          "keys E_J_GHz, E_W_GHz, E_C_GHz, phi_ext_phi0")
    out_dir = _resolve_out(args, cfg)
    t0 = time.perf_counter()
    phis = _phi_grid(cfg)
    if cfg.ring.beta_J >= 0.5:
        def branches(f):
            return [(f, k, br.phi_J_bar, br.phi_W_bar, br.E_J_eff,
                     br.E_W_eff, br.stable)
                    for k, br in enumerate(enumerate_branches(
                        cfg.ring, phi_ext=float(f)))]

        rows = [r for chunk in _pmap(branches, list(phis), args.jobs)
                for r in chunk]
        name = "circuit_branches.csv"
        sweep_to_csv(os.path.join(out_dir, name), BRANCH_COLUMNS, rows)
    else:
        zm = cfg.overrides.get("zpf_m")
        zb = cfg.overrides.get("zpf_b")

        def one(f):
            return sweep_rows(cfg.ring, [float(f)], zpf_m=zm, zpf_b=zb)[0]

        rows = _pmap(one, list(phis), args.jobs)
        name = "circuit_sweep.csv"
        sweep_to_csv(os.path.join(out_dir, name), SWEEP_COLUMNS, rows)
    _write_run_artifacts(cfg, eff_text, out_dir, "circuit", [name],
                         time.perf_counter() - t0)


def _cmd_run(args) -> None:
    cfg, eff_text = _materialize(args, args.protocol)
    protocol = cfg.run.protocol
    if protocol is None:
        raise ConfigError("no protocol: give one on the command line or "
                          "as [run] protocol")
    if protocol not in _HANDLERS:
        raise ConfigError(f"unknown protocol '{protocol}' "
                          f"(choose from {', '.join(PROTOCOLS)})")
    out_dir = _resolve_out(args, cfg)
    t0 = time.perf_counter()
    value, stderr, method, params, outputs = _HANDLERS[protocol](
        cfg, out_dir, args.jobs)
    runtime = time.perf_counter() - t0
    record_name = f"{protocol}_record.json"
    write_record(os.path.join(out_dir, record_name), protocol,
                 _json_safe(params), value, stderr, method, runtime)
    _write_run_artifacts(cfg, eff_text, out_dir, protocol,
                         outputs + [record_name],
                         time.perf_counter() - t0)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="autocat",
        description="Cat-qubit stabilization models: circuit sweeps and "
                    "protocol runs from TOML scenario configs.")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="cmd", required=True)

    def common(sp):
        sp.add_argument("--config", required=True, metavar="PATH",
                        help="TOML scenario config")
        sp.add_argument("--out", metavar="DIR",
                        help="output directory (default: [run] out or cwd)")
        sp.add_argument("--jobs", type=int, default=1, metavar="N",
                        help="max parallel sweep evaluations")
        sp.add_argument("--seed", type=int, default=None, metavar="N",
                        help="override [run] seed")

    circ = sub.add_parser(
        "circuit", help="flux sweep: equilibrium phases, energies, modes")
    common(circ)
    runp = sub.add_parser(
        "run", help="run a protocol and write its record")
    runp.add_argument("protocol", nargs="?", choices=PROTOCOLS,
                      help="protocol (default: [run] protocol)")
    common(runp)
    return parser


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        if args.cmd == "circuit":
            _cmd_circuit(args)
        else:
            _cmd_run(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except PhysicsError as exc:
        sys.stdout.write(json.dumps(
            {"error": type(exc).__name__, "message": str(exc)},
            sort_keys=True) + "\n")
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())

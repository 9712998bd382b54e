"""Scenario dispatch, scans and output writing for the command-line runner."""

from __future__ import annotations

import hashlib
import math
import platform
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy

from . import __version__, photon, rates, zeeman
from .io import dumps, write_csv, write_json
from .master_eq import (
    DensityMatrix,
    DipoleDipoleSpec,
    StepControl,
    assemble,
    build_basis,
    dipole_dipole_element,
    evolve,
    snapshot_table,
)
from .master_eq.observables import observables
from .quadrature import SphereRule
from .recoil import LambDickeConfig, alpha_coefficients

DEFAULT_DD_ELEMENTS = [
    [[0, 0, 0], [0, 0, 0], [0, 0, 1], [0, 0, 1]],
    [[0, 0, 0], [0, 0, 0], [1, 0, 0], [1, 0, 0]],
]


@dataclass
class Result:
    scalars: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)
    payload: dict = field(default_factory=dict)
    controls: dict = field(default_factory=dict)
    summary: list = field(default_factory=list)
    groups: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)


def _rule(v):
    n = v.get("quadrature_order", 16)
    if n < 4:
        raise ValueError("quadrature_order must be at least 4")
    return SphereRule(n, 2 * n)


def _unit(vec, name):
    v = np.asarray(vec, dtype=float)
    n = np.linalg.norm(v)
    if n == 0.0:
        raise ValueError(f"{name} must be a non-zero vector")
    return tuple(v / n)


def _ld_config(v, default_dipole=(0.0, 0.0, 1.0)):
    eta = v["eta"]
    nu = v.get("nu", 1.0)
    if isinstance(eta, float):
        if "dipole" in v:
            raise ValueError("give 'orientation' with a scalar eta, or an eta vector with 'dipole'")
        return LambDickeConfig.one_axis(eta, v.get("orientation", 0.0), nu)
    return LambDickeConfig(eta=tuple(eta), nu=(nu,) * 3, dipole=_unit(v.get("dipole", default_dipole), "dipole"))


def run_rates(v):
    mode = v.get("mode", "1d")
    res = Result(controls={"mode": mode})
    if mode == "1d":
        if not isinstance(v["eta"], float):
            raise ValueError("mode '1d' takes a scalar eta")
        c = v.get("orientation", 0.0)
        g = rates.gamma_eff_1d(v["eta"], c, v.get("blocked", True))
        alpha = (2.0 - c * c) / 5.0
        res.scalars = {"eta": v["eta"], "orientation": c, "gamma_eff": g, "gamma_ld": alpha * v["eta"] ** 2}
        res.controls.update({"quadrature": "Gauss-Legendre, order doubling", "mode_sum_rel": 1e-14})
    else:
        eta = v["eta"]
        if isinstance(eta, float):
            cfg = LambDickeConfig.isotropic(eta, _unit(v.get("dipole", [0.0, 0.0, 1.0]), "dipole"))
        else:
            cfg = _ld_config(v)
        rule = _rule(v)
        if mode == "laser":
            init = rates.laser_recoil(_unit(v.get("k_laser", [1.0, 0.0, 0.0]), "k_laser"), cfg)
        elif "amplitudes" in v:
            amps = {}
            for item in v["amplitudes"]:
                amps[tuple(item["n"])] = complex(item.get("re", 0.0), item.get("im", 0.0))
            init = rates.InitialMotionalState(amps, tuple(v.get("blocking_mode", [0, 0, 0])), v.get("blocked", True))
        else:
            init = rates.InitialMotionalState.ground(v.get("blocked", True))
        g = rates.gamma_eff_general(init, cfg, rule)
        ld = float(np.dot(alpha_coefficients(cfg.d_hat), np.square(cfg.eta)))
        res.scalars = {"gamma_eff": g, "gamma_ld": ld}
        res.controls.update({"sphere_rule": [rule.n_theta, rule.n_phi], "rtol": 1e-12})
    res.summary.append(f"Gamma_eff = {res.scalars['gamma_eff']:.10g} Gamma (leading order {res.scalars['gamma_ld']:.10g})")
    return res


def _zeeman_params(v):
    sign = v.get("a_sign", -1)
    if "b_field" in v:
        if "species" not in v or "species_file" not in v:
            raise ValueError("b_field needs 'species' and 'species_file'")
        table = zeeman.load_species(v["species_file"])
        if v["species"] not in table:
            raise ValueError(f"species {v['species']!r} not in {v['species_file']}")
        return zeeman.HyperfineParams(b_field=v["b_field"], species=table[v["species"]])
    return zeeman.HyperfineParams(x=v.get("x", 1.0), a_sign=sign, nuclear_ratio=v.get("nuclear_ratio", 0.0))


def run_zeeman(v):
    p = _zeeman_params(v)
    res = Result(controls={"solver": "numpy.linalg.eigh on 2x2 blocks", "root_xtol": 1e-14})
    res.scalars["x"] = p.x_value
    energies, noflip = ["x"], ["x"]
    for s in zeeman.eigensystem(p):
        key = f"E_{s.m_f:+g}{s.branch}"
        res.scalars[key] = s.energy
        energies.append(key)
    for m_f in (1.5, 0.5, -0.5):
        key = f"P_noflip_{m_f:+g}"
        res.scalars[key] = zeeman.state(p, m_f, "+").c_up ** 2
        noflip.append(key)
    res.groups = {"energies": energies, "noflip": noflip}
    res.summary.append(
        f"x = {p.x_value:.6g}: no-flip P(+1/2) = {res.scalars['P_noflip_+0.5']:.6f}, "
        f"P(-1/2) = {res.scalars['P_noflip_-0.5']:.6f}"
    )
    if "level" in v:
        for m_f in (0.5, -0.5):
            xc = zeeman.no_flip_crossing(m_f, v["level"], p.sign)
            res.scalars[f"x_cross_{m_f:+g}"] = xc
            res.summary.append(f"no-flip >= {v['level']} for m_F = {m_f:+g} above x = {xc:.6g}")
    return res


def run_evolve(v):
    cfg = _ld_config(v)
    n_max = v.get("n_max") or [6 if e > 0 else 0 for e in cfg.eta]
    sectors = tuple(v.get("sectors", [0, 1]))
    basis = build_basis(n_max, sectors)
    dd = DipoleDipoleSpec(cutoff=v.get("cutoff", 0.01), include=v.get("dipole_dipole", False))
    rule = _rule(v)
    bundle = assemble(cfg, basis, dd, rule)
    if v.get("initial", "blocked") == "blocked":
        g_mode = (0, 0, 0)
    else:
        g_mode = tuple(1 if j == int(np.argmax(cfg.eta)) else 0 for j in range(3))
    psi = basis.ket(("g", g_mode), ("e", (0, 0, 0)))
    rho0 = DensityMatrix.pure(psi, basis)
    ctrl = StepControl(rtol=v.get("rtol", 1e-7), atol=v.get("atol", 1e-10))
    times = np.linspace(0.0, v["t_final"], v.get("n_snapshots", 101))
    traj = evolve(rho0, bundle, v["t_final"], ctrl, times)
    n_e = basis.number_operator("e")
    slope = -float(np.real(np.sum(n_e * np.diag(bundle.rhs(rho0.data)))))
    header, rows = snapshot_table(traj)
    final = observables(traj.states[-1])
    res = Result()
    res.scalars = {
        "initial_slope": slope,
        "p_excited_final": final["p_excited"],
        "trace_final": final["trace"],
    }
    if isinstance(v["eta"], float) and g_mode == (0, 0, 0):
        res.scalars["gamma_eff_reference"] = rates.gamma_eff_1d(v["eta"], v.get("orientation", 0.0))
    res.tables["snapshots"] = (header, rows)
    res.payload["snapshots"] = [
        {k: o[k] for k in ("time", "p_excited", "trace", "sector_populations", "motional_distribution")}
        for o in map(observables, traj.states)
    ]
    res.payload["metadata"] = bundle.metadata
    res.controls = {
        "n_max": list(basis.n_max),
        "sectors": list(sectors),
        "dim": basis.dim,
        "rtol": ctrl.rtol,
        "atol": ctrl.atol,
        "sphere_rule": [rule.n_theta, rule.n_phi],
        "steps": traj.n_steps,
        "rejected": traj.n_rejected,
        "deficit_max": bundle.metadata["deficit_max"],
        "dipole_dipole": dd.include,
        "cutoff": dd.cutoff,
    }
    res.summary.append(
        f"P_e(t={v['t_final']:.6g}/Gamma) = {final['p_excited']:.6g}, trace = {final['trace']:.12g}, "
        f"initial slope = {slope:.8g} Gamma"
    )
    return res


def run_photon(v):
    s = photon.PhotonScenario(v["eta"], v["nu"], rates=v.get("rates", "exact"))
    kind = v.get("state", "shaped")
    if kind == "shaped":
        init = photon.SuperpositionInit.shaped(v["eta"])
    elif kind == "mu0":
        init = photon.SuperpositionInit(1.0, 0.0)
    elif kind == "mu1":
        init = photon.SuperpositionInit(0.0, 1.0)
    else:
        init = photon.SuperpositionInit(v["mu0"], v["mu1"])
    rate = s.gamma0 if abs(init.mu0) > 0 else s.gamma1
    t = v.get("t", photon.REGIME_FACTOR / rate)
    prof = photon.profile_along_axis(s, init, t, v.get("n_points", 4001))
    header, data = prof.columns()
    f, bw = photon.beat_frequency(prof)
    res = Result()
    res.scalars = {
        "gamma0": s.gamma0,
        "gamma1": s.gamma1,
        "t": t,
        "front_ratio": float(prof.total[0] / prof.total[-1]),
        "beat_frequency": f,
        "beat_bin": bw,
        "emitted_norm": photon.emitted_norm(s, init, t),
    }
    res.tables["profile"] = (header, data.tolist())
    res.payload["metadata"] = prof.meta
    res.controls = {"n_points": prof.x.size, "mode_sum_rel": photon.MODE_SUM_REL, "rates": s.rates}
    res.summary.append(
        f"I(-ct)/I(+ct) = {res.scalars['front_ratio']:.4g}, beat {f:.6g} per c/Gamma "
        f"(nu/2pi = {s.nu / (2 * math.pi):.6g}), emitted norm {res.scalars['emitted_norm']:.8f}"
    )
    return res


def run_dipole_dipole(v):
    eta = v["eta"]
    if isinstance(eta, float):
        cfg = LambDickeConfig.isotropic(eta, _unit(v.get("dipole", [0.0, 0.0, 1.0]), "dipole"))
    else:
        cfg = _ld_config(v)
    cutoff = v.get("cutoff", 0.01)
    rule = _rule(v)
    header = ["np_x", "np_y", "np_z", "mp_x", "mp_y", "mp_z", "m_x", "m_y", "m_z", "n_x", "n_y", "n_z",
              "value", "cutoff_sensitivity", "error", "value_eta3"]
    rows = []
    eta3 = float(np.prod(cfg.eta))
    for el in v.get("elements", DEFAULT_DD_ELEMENTS):
        if len(el) != 4 or any(len(x) != 3 for x in el):
            raise ValueError(f"element {el!r} must be four 3-tuples")
        e = dipole_dipole_element(*[tuple(x) for x in el], cfg, cutoff, rule)
        rows.append([*sum((list(x) for x in el), []), e.value, e.cutoff_sensitivity, e.error, e.value * eta3])
    lead = max(rows, key=lambda r: abs(r[12]))
    res = Result(controls={"cutoff": cutoff, "sphere_rule": [rule.n_theta, rule.n_phi]})
    res.scalars = {"leading_value": lead[12], "leading_value_eta3": lead[15], "leading_cutoff_sensitivity": lead[13]}
    res.tables["elements"] = (header, rows)
    res.summary.append(f"leading |L| = {abs(lead[12]):.6g} Gamma, |L| eta_x eta_y eta_z = {abs(lead[15]):.6g}")
    return res


def run_quench(v):
    g1p = v["gamma_1p"]
    delta = v.get("delta_dr", v.get("delta_over_gamma_1p", 10.0) * g1p)
    q = rates.QuenchConfig(
        v["omega_dr"], delta, g1p, v.get("eta", 0.0), v.get("eta_dr", 0.0), v.get("c_up_sq", 1.0), v.get("c_dn_sq", 0.0)
    )
    g = rates.quench_rate(q)
    res = Result(controls={"formula": "Omega^2 Gamma_1P / (4 Delta^2)"})
    res.scalars = {"gamma_quench": g, "gamma_tot": rates.total_rate(q)}
    rows = []
    for t in v.get("times", []):
        rows.append([t, *rates.rate_equation_solution(q, t).as_tuple()])
    if rows:
        res.tables["populations"] = (["time_s", "p_e_up", "p_g_up", "p_g_dn"], rows)
    res.summary.append(f"quench rate Gamma = {g:.6g} s^-1 (total {res.scalars['gamma_tot']:.6g} s^-1)")
    return res


RUNNERS = {
    "rates": run_rates,
    "zeeman": run_zeeman,
    "evolve": run_evolve,
    "photon": run_photon,
    "dipole_dipole": run_dipole_dipole,
    "quench": run_quench,
}


def run_point(scenario, values):
    """Run one scenario point, capturing warnings as strings."""
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        res = RUNNERS[scenario](values)
    res.warnings = [f"{w.category.__name__}: {w.message}" for w in caught]
    return res


def _run_star(args):
    return run_point(*args)


def versions():
    return {"pauliblock": __version__, "numpy": np.__version__, "scipy": scipy.__version__, "python": platform.python_version()}


def _write_table(out, stem, name, header, rows, fmt, files):
    if fmt == "csv":
        p = write_csv(out / f"{stem}_{name}.csv", header, rows)
    else:
        p = write_json(out / f"{stem}_{name}.json", {"columns": header, "rows": rows})
    files.append(p)


def execute(config, out_dir, parallel=1, log=None):
    """Run a parsed config, write artifacts and the manifest; returns (Result list, manifest)."""
    log = log or (lambda msg: None)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem, fmt = config.output["path"], config.output["format"]
    start = time.perf_counter()
    grid = config.grid()
    files = []
    if grid is None:
        jobs = [(config.scenario, config.values())]
    else:
        name = config.scan["parameter"]
        jobs = [(config.scenario, config.values({name: float(x)})) for x in grid]
    log(f"running {len(jobs)} point(s) of scenario {config.scenario!r}")
    if parallel > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            results = list(pool.map(_run_star, jobs))  # map keeps grid order
    else:
        results = [_run_star(j) for j in jobs]

    if grid is None:
        r = results[0]
        for name, (header, rows) in r.tables.items():
            _write_table(out, stem, name, header, rows, fmt, files)
        payload = {"scalars": r.scalars, **r.payload}
    else:
        keys = list(results[0].scalars)
        pname = config.scan["parameter"]
        header = ["index", pname] + [k for k in keys if k != pname]
        rows = [[i, x] + [r.scalars[k] for k in keys if k != pname] for i, (x, r) in enumerate(zip(grid, results))]
        _write_table(out, stem, "scan", header, rows, fmt, files)
        for gname, cols in results[0].groups.items():
            cols = [c for c in cols if c != pname]
            grows = [[x] + [r.scalars[c] for c in cols] for x, r in zip(grid, results)]
            _write_table(out, stem, gname, [pname] + cols, grows, fmt, files)
        for i, r in enumerate(results):
            for name, (h, rws) in r.tables.items():
                _write_table(out, stem, f"{name}_{i:04d}", h, rws, fmt, files)
        payload = {"scan": {"parameter": pname, "unit": config.scan["unit"], "values": grid},
                   "points": [{"scalars": r.scalars, **r.payload} for r in results]}
    files.append(write_json(out / f"{stem}.json", payload))

    wall = time.perf_counter() - start
    warns = sorted({w for r in results for w in r.warnings})
    manifest = {
        "config_hash": config.config_hash,
        "scenario": config.scenario,
        "versions": versions(),
        "numerical_controls": results[0].controls,
        "inputs_canonical": config.canonical_inputs(),
        "scan": None if grid is None else {"parameter": config.scan["parameter"], "unit": config.scan["unit"], "points": len(grid)},
        "parallel": parallel,
        "wall_time_s": wall,
        "warnings": warns,
        "files": {p.name: hashlib.sha256(p.read_bytes()).hexdigest() for p in files},
    }
    mpath = out / f"{stem}.manifest.json"
    mpath.write_text(dumps(manifest))
    for r in results[:1] if grid is None else []:
        for line in r.summary:
            log(line, always=True)
    if grid is not None:
        log(f"scan over {config.scan['parameter']}: {len(grid)} points written to {stem}_scan", always=True)
    return results, manifest

"""Acceptance criteria 1-8. Each test prints one PASS/FAIL line and asserts it."""

import math
import os
import time

import numpy as np
import pytest

from pauliblock.master_eq import DensityMatrix, StepControl, assemble, build_basis, evolve, observables
from pauliblock.master_eq.dipole import dipole_dipole_element
from pauliblock.photon import (
    PhotonScenario,
    SuperpositionInit,
    beat_frequency,
    emitted_norm,
    profile_along_axis,
    tail_rate,
)
from pauliblock.rates import InitialMotionalState, QuenchConfig, gamma_eff_1d, gamma_eff_general, laser_recoil, quench_rate
from pauliblock.recoil import LambDickeConfig, alpha_quadrature
from pauliblock.zeeman import (
    HyperfineParams,
    load_species,
    mixing_coefficients,
    no_flip_crossing,
    no_flip_probability,
    state,
)


def test_1_isotropic_rate(record):
    t0 = time.perf_counter()
    errs = {}
    for eta in (0.1, 0.05):
        g = gamma_eff_general(InitialMotionalState.ground(), LambDickeConfig.isotropic(eta))
        errs[eta] = g - eta**2
    dt = time.perf_counter() - t0
    in_band = abs(errs[0.1]) <= 2 * 0.1**4
    ratio = errs[0.1] / errs[0.05]
    ok = in_band and abs(ratio / 16 - 1) <= 0.2 and dt < 1.0
    record("1", ok, f"Gamma-eta^2 = {errs[0.1]:.4e} (band {2e-4:.0e}), halving ratio {ratio:.3f}, {dt:.2f}s")
    assert ok


def test_2_alpha_coefficients(record):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst, worst_sum = 0.0, 0.0
    for _ in range(20):
        d = rng.normal(size=3)
        d /= np.linalg.norm(d)
        a = alpha_quadrature(d)
        worst = max(worst, float(np.max(np.abs(a - (2 - d**2) / 5))))
        worst_sum = max(worst_sum, abs(float(a.sum()) - 1))
    dt = time.perf_counter() - t0
    ok = worst < 1e-8 and worst_sum < 1e-8 and dt < 5.0
    record("2", ok, f"max |alpha - (2-d^2)/5| = {worst:.2e}, max |sum - 1| = {worst_sum:.2e}, {dt:.2f}s")
    assert ok


def test_3_laser_recoil_factor_two(record):
    # for k_L = x, d = z: 2 eta^2 - 2.8 eta^4 <= Gamma <= 2 eta^2
    t0 = time.perf_counter()
    coeffs, ok = [], True
    for eta in (0.05, 0.1, 0.2):
        cfg = LambDickeConfig.isotropic(eta)
        g = gamma_eff_general(laser_recoil((1.0, 0.0, 0.0), cfg), cfg)
        c = (g - 2 * eta**2) / eta**4
        coeffs.append(c)
        ok &= -2.8 - 1e-6 <= c <= 1e-6
    dt = time.perf_counter() - t0
    ok &= dt < 5.0
    record("3", ok, "(Gamma - 2 eta^2)/eta^4 = " + ", ".join(f"{c:.3f}" for c in coeffs) + f" in [-2.8, 0], {dt:.2f}s")
    assert ok


def test_4_quench_number(record):
    g1p = 2 * math.pi * 29e6
    g = quench_rate(QuenchConfig(omega_dr=4e6, delta_dr=10 * g1p, gamma_1p=g1p))
    ok = abs(g / 220 - 1) < 0.01
    record("4", ok, f"Gamma = {g:.3f} s^-1 vs 220 s^-1 ({100 * (g / 220 - 1):+.2f}%)")
    assert ok


def test_5_zeeman(record):
    t0 = time.perf_counter()
    worst = 0.0
    for x in np.geomspace(1e-3, 1e3, 200):
        for m_f in (0.5, -0.5):
            s = state(HyperfineParams(x=float(x)), m_f, "+")
            cu, cd = mixing_coefficients(m_f, float(x))
            worst = max(worst, abs(s.c_up - cu), abs(s.c_dn - cd))
    stretched = all(no_flip_probability(1.5, x) == 1.0 for x in np.geomspace(1e-3, 1e3, 50))
    xc = no_flip_crossing(-0.5)
    dt = time.perf_counter() - t0
    ok = worst < 1e-10 and stretched and abs(xc - 2.3) <= 0.05 and dt < 5.0
    record("5", ok, f"closed vs numeric {worst:.1e}, m_F=3/2 no-flip == 1: {stretched}, x_95(-1/2) = {xc:.5f}, {dt:.2f}s")
    assert ok


def test_5_conditional_field_check(record):
    """0.05 T gives > 95 % no-flip for m_F = +-1/2 when species constants are supplied."""
    path = os.environ.get("PAULIBLOCK_SPECIES_FILE")
    supplied = path is not None
    if not supplied:
        path = os.path.join(os.path.dirname(__file__), "..", "configs", "species.json")
    species = next(iter(load_species(path).values()))
    p = HyperfineParams(b_field=0.05, species=species)
    probs = {m: state(p, m, "+").c_up ** 2 for m in (0.5, -0.5)}
    ok = all(v > 0.95 for v in probs.values())
    detail = f"{species.name}: x = {p.x_value:.4f}, P(+1/2) = {probs[0.5]:.4f}, P(-1/2) = {probs[-0.5]:.4f}"
    if not supplied:
        record("5c", None, detail + " (illustrative constants, not asserted)")
        pytest.skip("no species constants supplied via PAULIBLOCK_SPECIES_FILE")
    record("5c", ok, detail)
    assert ok


def test_6_master_equation(record):
    t0 = time.perf_counter()
    eta = 0.1
    g_eff = gamma_eff_1d(eta)
    basis = build_basis((6, 0, 0), sectors=(0, 1))
    bundle = assemble(LambDickeConfig.one_axis(eta, 0.0, nu=1.0), basis)
    rho0 = DensityMatrix.pure(basis.ket(("g", (0, 0, 0)), ("e", (0, 0, 0))), basis)
    n_e = basis.number_operator("e")
    slope = -float(np.real(np.sum(n_e * np.diag(bundle.rhs(rho0.data)))))
    t_final = 5.0 / g_eff
    traj = evolve(rho0, bundle, t_final, StepControl(rtol=1e-7), np.linspace(0.0, t_final, 101))
    obs = [observables(r) for r in traj.states]
    trace_err = max(abs(o["trace"] - 1) for o in obs)
    pe = np.array([o["p_excited"] for o in obs])
    monotone = bool(np.all(np.diff(pe) <= 0))

    basis0 = build_basis((6, 0, 0), sectors=(0, 1))
    b0 = assemble(LambDickeConfig.one_axis(0.0), basis0)
    r0 = DensityMatrix.pure(basis0.ket(("g", (0, 0, 0)), ("e", (0, 0, 0))), basis0)
    stationary = float(np.max(np.abs(b0.rhs(r0.data)))) == 0.0
    dt = time.perf_counter() - t0
    ok = trace_err < 1e-4 and monotone and abs(slope / g_eff - 1) < 0.01 and stationary and dt < 120
    record(
        "6",
        ok,
        f"trace err {trace_err:.1e}, P_e monotone {monotone}, slope/Gamma_eff - 1 = {slope / g_eff - 1:.1e}, "
        f"eta=0 stationary {stationary}, P_e(5/Gamma_eff) = {pe[-1]:.5f}, {dt:.1f}s",
    )
    assert ok


def test_7_dipole_dipole(record):
    t0 = time.perf_counter()
    lead = ((0, 0, 0), (0, 0, 0), (0, 0, 1), (0, 0, 1))
    el = {eta: dipole_dipole_element(*lead, LambDickeConfig.isotropic(eta)) for eta in (0.2, 0.4)}
    ratio = el[0.2].value / el[0.4].value
    scaled = abs(el[0.2].value) * 0.2**3  # in units of Gamma / eta^3; target 1/100
    halving = max(e.cutoff_sensitivity / abs(e.value) for e in el.values())
    dt = time.perf_counter() - t0
    ok = abs(ratio / 8 - 1) <= 0.25 and 0.1 <= scaled / 0.01 <= 10 and halving < 0.05 and dt < 120
    record("7", ok, f"ratio {ratio:.4f} (8), |L| eta^3 = {scaled:.4f} (0.01), cutoff halving {halving:.1e}, {dt:.2f}s")
    assert ok


@pytest.fixture(scope="module")
def photon_setup():
    s = PhotonScenario(0.28, 20.0)
    return s, SuperpositionInit.shaped(0.28)


def test_8a_tail_fits(record, photon_setup):
    s, _ = photon_setup
    t0 = time.perf_counter()
    p0 = profile_along_axis(s, SuperpositionInit(1.0, 0.0), 10 / s.gamma0)
    p1 = profile_along_axis(s, SuperpositionInit(0.0, 1.0), 10 / s.gamma1)
    e0 = tail_rate(p0) / s.gamma0 - 1
    e1 = tail_rate(p1) / s.gamma1 - 1
    dt = time.perf_counter() - t0
    ok = abs(e0) < 0.01 and abs(e1) < 0.01 and dt < 30
    record("8a", ok, f"fit/Gamma0 - 1 = {e0:.1e}, fit/Gamma1 - 1 = {e1:.1e}, {dt:.2f}s")
    assert ok


def test_8b_front_suppression(record, photon_setup):
    s, init = photon_setup
    p = profile_along_axis(s, init, 10 / s.gamma0)
    ratio = p.total[0] / p.total[-1]
    psi1_ratio = p.psi1[0] / p.total[-1]
    ok = ratio < 1e-3
    record("8b", ok, f"I(-ct)/I(+ct) = {ratio:.3e} (|Psi_1|^2 alone {psi1_ratio:.2e}); threshold 1e-3")
    assert ok


def test_8c_beat_period(record, photon_setup):
    s, init = photon_setup
    t0 = time.perf_counter()
    p = profile_along_axis(s, init, 10 / s.gamma0, 40001)
    f, bw = beat_frequency(p)
    target = s.nu / (2 * math.pi)
    dt = time.perf_counter() - t0
    ok = abs(f - target) <= bw and dt < 30
    record("8c", ok, f"beat {f:.6f} vs nu/2pi c = {target:.6f}, bin {bw:.1e}, {dt:.2f}s")
    assert ok


def test_8d_emitted_norm(record, photon_setup):
    s, init = photon_setup
    vals = {k: emitted_norm(s, k_init, 10 / s.gamma0) for k, k_init in
            (("shaped", init), ("mu0", SuperpositionInit(1.0, 0.0)), ("mu1", SuperpositionInit(0.0, 1.0)))}
    worst = max(abs(v - 1) for v in vals.values())
    ok = worst < 1e-3
    record("8d", ok, "emitted norm at t = 10/Gamma0: " + ", ".join(f"{k} {v:.6f}" for k, v in vals.items()))
    assert ok

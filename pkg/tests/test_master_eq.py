import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pauliblock.master_eq import (
    DensityMatrix,
    DipoleDipoleSpec,
    StepControl,
    apply_ops,
    assemble,
    build_basis,
    evolve,
    export_snapshots,
    observables,
    pair_distribution,
)
from pauliblock.master_eq.basis import MAX_SINGLE_PARTICLE_MODES, TwoFermionBasis
from pauliblock.rates import gamma_eff_1d
from pauliblock.recoil import LambDickeConfig


def _random_rho(dim, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def _blocked(basis):
    return DensityMatrix.pure(basis.ket(("g", (0, 0, 0)), ("e", (0, 0, 0))), basis)


@given(st.lists(st.integers(0, 7), min_size=0, max_size=4, unique=True), st.integers(0, 7), st.integers(0, 7))
def test_canonical_anticommutator(occ, a, b):
    state = tuple(sorted(occ))

    def as_dict(res):
        return {} if res is None else {res[1]: res[0]}

    lhs = as_dict(apply_ops([("-", a), ("+", b)], state))
    for k, v in as_dict(apply_ops([("+", b), ("-", a)], state)).items():
        lhs[k] = lhs.get(k, 0) + v
    lhs = {k: v for k, v in lhs.items() if v != 0}
    assert lhs == ({state: 1} if a == b else {})


def test_pauli_exclusion():
    basis = build_basis((2, 0, 0))
    with pytest.raises(ValueError):
        basis.state_of(("g", (1, 0, 0)), ("g", (1, 0, 0)))
    _, s1 = basis.state_of(("g", (0, 0, 0)), ("e", (1, 0, 0)))
    _, s2 = basis.state_of(("e", (1, 0, 0)), ("g", (0, 0, 0)))
    assert s1 == -s2


def test_basis_sizes_and_guard():
    assert build_basis((3, 0, 0)).dim == 28  # C(8, 2)
    assert build_basis((3, 0, 0), sectors=(1,)).dim == 16
    assert build_basis((3, 0, 0), n_particles=1).dim == 8
    with pytest.raises(MemoryError):
        TwoFermionBasis((10, 10, 0))
    assert MAX_SINGLE_PARTICLE_MODES == 200


@pytest.mark.parametrize(
    "n_max,sectors,n_particles,cfg",
    [
        ((3, 0, 0), (0, 1, 2), 2, LambDickeConfig.one_axis(0.3, 0.4)),
        ((1, 1, 1), (0, 1, 2), 2, LambDickeConfig(eta=(0.2, 0.3, 0.25), dipole=(0.6, 0.0, 0.8))),
        ((4, 0, 0), (0, 1), 1, LambDickeConfig.one_axis(0.3)),
    ],
)
def test_recycling_equals_jump_sum(n_max, sectors, n_particles, cfg):
    basis = build_basis(n_max, sectors, n_particles)
    bundle = assemble(cfg, basis)
    rho = _random_rho(basis.dim, 3)
    ref = sum(w * (j @ (j @ rho).conj().T) for j, w in bundle.jump_channels)
    assert np.allclose(bundle.recycle(rho), ref, atol=1e-13)


def test_effective_hamiltonian_is_trace_compensating():
    """H_1 differs from -i/2 sum_a w_a J_a^dag J_a only by the truncated one-body part."""
    basis = build_basis((3, 0, 0), (0, 1, 2))
    bundle = assemble(LambDickeConfig.one_axis(0.3), basis)
    m = basis.n_modes
    jj = sum(w * (j.conj().T @ j).toarray() for j, w in bundle.jump_channels)
    k4 = bundle.kernel.reshape(m, m, m, m)
    d = np.einsum("anam->nm", k4)
    one_body = np.zeros((basis.dim, basis.dim), dtype=complex)
    for n in range(m):
        for n2 in range(m):
            op = basis.operator([("+", m + n), ("-", m + n2)]).toarray()
            one_body += d[n, n2] * op
    expected = -0.5j * jj - 0.5j * (np.diag(basis.number_operator("e")) - one_body)
    assert np.allclose(bundle.h_eff1, expected, atol=1e-12)


def test_initial_slope_matches_rate():
    eta = 0.1
    basis = build_basis((6, 0, 0), (0, 1))
    bundle = assemble(LambDickeConfig.one_axis(eta), basis)
    rho0 = _blocked(basis)
    n_e = basis.number_operator("e")
    slope = -np.real(np.sum(n_e * np.diag(bundle.rhs(rho0.data))))
    assert slope == pytest.approx(gamma_eff_1d(eta), rel=1e-10)


def test_eta_zero_blocked_state_is_stationary():
    basis = build_basis((3, 0, 0), (0, 1))
    bundle = assemble(LambDickeConfig.one_axis(0.0), basis)
    assert np.max(np.abs(bundle.rhs(_blocked(basis).data))) == 0.0


def test_evolution_properties():
    eta = 0.3
    basis = build_basis((5, 0, 0), (0, 1))
    bundle = assemble(LambDickeConfig.one_axis(eta, nu=1.0), basis)
    t_final = 40.0
    traj = evolve(_blocked(basis), bundle, t_final, StepControl(rtol=1e-8), np.linspace(0, t_final, 9))
    deficit = bundle.metadata["deficit_max"]
    pe = [observables(r)["p_excited"] for r in traj.states]
    assert np.all(np.diff(pe) < 0)
    for r in traj.states:
        r.check(tol_trunc=deficit * t_final + 1e-8)
    assert pe[-1] == pytest.approx(np.exp(-gamma_eff_1d(eta) * t_final), rel=0.05)


@settings(max_examples=5, deadline=None)
@given(st.integers(0, 1000))
def test_rhs_preserves_hermiticity(seed):
    basis = build_basis((2, 0, 0), (0, 1, 2))
    bundle = assemble(LambDickeConfig.one_axis(0.2, 0.3), basis)
    d = bundle.rhs(_random_rho(basis.dim, seed))
    assert np.allclose(d, d.conj().T, atol=1e-13)


def test_dipole_dipole_block_hermitian():
    basis = build_basis((1, 1, 1), (0, 1))
    cfg = LambDickeConfig.isotropic(0.3)
    bundle = assemble(cfg, basis, DipoleDipoleSpec(include=True))
    h0 = bundle.h_eff0
    assert np.allclose(h0, h0.conj().T)
    assert bundle.metadata["dipole_dipole"] is True


def test_density_matrix_check():
    basis = build_basis((1, 0, 0), (0, 1))
    bad = np.eye(basis.dim, dtype=complex)
    with pytest.raises(ValueError):
        DensityMatrix(bad, 0.0, basis).check()


def test_export(tmp_path):
    basis = build_basis((2, 0, 0), (0, 1))
    bundle = assemble(LambDickeConfig.one_axis(0.2), basis)
    traj = evolve(_blocked(basis), bundle, 1.0, times=[0.0, 0.5, 1.0])
    csv, js = export_snapshots(traj, tmp_path / "snap", bundle.metadata)
    lines = csv.read_text().splitlines()
    assert lines[0] == "time,p_excited,sector_0,sector_1"
    assert len(lines) == 4
    pd = pair_distribution(traj.states[-1], sector=0)
    assert sum(pd.values()) == pytest.approx(observables(traj.states[-1])["sector_populations"][0])

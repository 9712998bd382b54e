import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pauliblock.zeeman import (
    HyperfineParams,
    build_hamiltonian,
    eigensystem,
    load_species,
    mixing_coefficients,
    no_flip_crossing,
    no_flip_probability,
    state,
    track_branches,
)

# root of the closed form, 1/3 + sqrt(0.72 / 0.19)
X_CROSS = 1.0 / 3.0 + math.sqrt(0.72 / 0.19)


def test_zero_field_levels():
    w = np.linalg.eigvalsh(build_hamiltonian(HyperfineParams(x=0.0)))
    assert np.allclose(sorted(w), [-0.5] * 4 + [1.0] * 2, atol=1e-14)


def test_hamiltonian_symmetric_and_coupling():
    h = build_hamiltonian(HyperfineParams(x=0.7))
    assert np.allclose(h, h.T)
    # <m_J=1, m_I=-1/2| H |m_J=0, m_I=+1/2> = A / sqrt(2) with A = -1
    assert h[1, 2] == pytest.approx(-1 / math.sqrt(2), abs=1e-15)


@pytest.mark.parametrize("a_sign", [-1, 1])
@pytest.mark.parametrize("m_f", [0.5, -0.5])
def test_closed_form_vs_numeric(m_f, a_sign):
    for x in np.geomspace(1e-3, 1e3, 61):
        s = state(HyperfineParams(x=float(x), a_sign=a_sign), m_f, "+")
        c_up, c_dn = mixing_coefficients(m_f, float(x), a_sign)
        assert s.c_up == pytest.approx(c_up, abs=1e-10)
        assert s.c_dn == pytest.approx(c_dn, abs=1e-10)


@given(st.floats(0.0, 1e3))
def test_stretched_state_never_flips(x):
    assert no_flip_probability(1.5, x) == 1.0
    assert state(HyperfineParams(x=x), 1.5).c_up == 1.0


@given(st.floats(0.0, 50.0), st.floats(0.0, 50.0))
def test_no_flip_monotone(x1, x2):
    lo, hi = sorted((x1, x2))
    for m_f in (0.5, -0.5):
        assert no_flip_probability(m_f, lo) <= no_flip_probability(m_f, hi) + 1e-15


def test_crossing_value():
    assert no_flip_crossing(-0.5) == pytest.approx(X_CROSS, abs=1e-10)
    assert no_flip_probability(-0.5, X_CROSS) == pytest.approx(0.95, abs=1e-12)


def test_plus_branch_is_lower_state():
    for x in (0.0, 0.3, 2.0, 40.0):
        es = {(s.m_f, s.branch): s.energy for s in eigensystem(HyperfineParams(x=x))}
        for m_f in (0.5, -0.5):
            assert es[(m_f, "+")] <= es[(m_f, "-")]


def test_branch_tracking_continuous():
    x = np.linspace(0, 4, 400)
    e = track_branches(x)
    assert np.max(np.abs(np.diff(e, axis=0))) < 0.05


def test_species_loader(tmp_path):
    p = tmp_path / "s.json"
    p.write_text('{"_c": "x", "Foo": {"A_MHz": -100.0, "g_J": 1.0, "g_I": 0.5}}')
    sp = load_species(p)["Foo"]
    assert sp.a_mhz == -100.0
    pars = HyperfineParams(b_field=0.01, species=sp)
    assert pars.sign == -1 and pars.x_value > 0
    with pytest.raises(ValueError):
        load_species({"Bar": {"A_MHz": 1.0, "g_J": 1.0, "g_I": 0.0, "gJ": 2}})


def test_params_validation():
    with pytest.raises(ValueError):
        HyperfineParams()
    with pytest.raises(ValueError):
        HyperfineParams(x=-1.0)

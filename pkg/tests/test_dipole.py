import pytest

from pauliblock.master_eq.dipole import dipole_dipole_element, overlap_polynomial, relative_overlap
from pauliblock.recoil import LambDickeConfig

LEAD = ((0, 0, 0), (0, 0, 0), (0, 0, 1), (0, 0, 1))


def test_parity_selection():
    el = dipole_dipole_element((0, 0, 0), (0, 0, 0), (0, 0, 0), (0, 0, 1), LambDickeConfig.isotropic(0.2))
    assert el.value == 0.0


def test_eta_cubed_scaling():
    a = dipole_dipole_element(*LEAD, LambDickeConfig.isotropic(0.2)).value
    b = dipole_dipole_element(*LEAD, LambDickeConfig.isotropic(0.4)).value
    assert a / b == pytest.approx(8.0, rel=1e-8)


def test_cutoff_insensitive():
    el = dipole_dipole_element(*LEAD, LambDickeConfig.isotropic(0.2))
    assert el.cutoff_sensitivity < 1e-3 * abs(el.value)


def test_needs_positive_eta():
    with pytest.raises(ValueError):
        dipole_dipole_element(*LEAD, LambDickeConfig.one_axis(0.2))


def test_cutoff_range():
    with pytest.raises(ValueError):
        dipole_dipole_element(*LEAD, LambDickeConfig.isotropic(0.2), cutoff=2.0)

"""Quench rate for the dressing parameters used in the text, with angular units throughout."""

import math

from pauliblock.rates import QuenchConfig, quench_rate, total_rate

gamma_1p = 2 * math.pi * 29e6
q = QuenchConfig(omega_dr=4e6, delta_dr=10 * gamma_1p, gamma_1p=gamma_1p, eta=0.28, eta_dr=0.09)
print(f"Gamma_quench = {quench_rate(q):.4f} s^-1")
print(f"blocked total rate (m_F = 3/2) = {total_rate(q):.4f} s^-1")

"""Density-matrix container and an embedded Dormand-Prince 5(4) integrator."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4

POSITIVITY_TOL = 1e-6


class StepUnderflowError(RuntimeError):
    pass


class PositivityError(ArithmeticError):
    def __init__(self, message, time, min_eigenvalue):
        super().__init__(message)
        self.time = time
        self.min_eigenvalue = min_eigenvalue


@dataclass
class DensityMatrix:
    data: np.ndarray
    time: float = 0.0
    basis: object = field(default=None, repr=False)

    @classmethod
    def pure(cls, vec, basis=None, time=0.0):
        vec = np.asarray(vec, dtype=complex)
        vec = vec / np.linalg.norm(vec)
        return cls(np.outer(vec, vec.conj()), time, basis)

    @property
    def trace(self):
        return float(np.real(np.trace(self.data)))

    def check(self, tol_trunc=0.0, herm_tol=1e-10, eig_tol=1e-8):
        """Raise ValueError if hermiticity, trace or positivity bounds fail."""
        rho = self.data
        if np.max(np.abs(rho - rho.conj().T)) > herm_tol:
            raise ValueError("density matrix is not hermitian")
        tr = self.trace
        if not 1.0 - tol_trunc - 1e-9 <= tr <= 1.0 + 1e-9:
            raise ValueError(f"trace {tr!r} outside [1 - {tol_trunc}, 1 + 1e-9]")
        lo = float(np.linalg.eigvalsh(rho).min())
        if lo < -eig_tol:
            raise ValueError(f"density matrix has eigenvalue {lo:.3e}")
        return self


@dataclass(frozen=True)
class StepControl:
    rtol: float = 1e-8
    atol: float = 1e-10
    h_initial: float | None = None
    h_min: float = 1e-12
    h_max: float | None = None
    max_steps: int = 1_000_000


@dataclass
class Trajectory:
    times: np.ndarray
    states: list
    n_steps: int
    n_rejected: int
    n_rhs: int

    def __len__(self):
        return len(self.states)


def _error_norm(err, y, y_new, ctrl):
    scale = ctrl.atol + ctrl.rtol * max(np.linalg.norm(y), np.linalg.norm(y_new))
    return float(np.linalg.norm(err)) / scale


def _check_positive(rho, t):
    lo = float(np.linalg.eigvalsh(rho).min())
    if lo < -POSITIVITY_TOL:
        raise PositivityError(f"positivity violated at t = {t:.6g}: min eigenvalue {lo:.3e}", t, lo)


def evolve(rho0, bundle, t_final, dt_ctrl=StepControl(), times=None):
    """Integrate d rho/dt = -i (H rho - rho H^dag) + recycle(rho) up to t_final.

    Returns snapshots at ``times`` (default: start and end). Step size is set
    by the Frobenius-norm error of the embedded 4th-order solution.
    """
    ctrl = dt_ctrl
    basis = rho0.basis
    t0 = rho0.time
    if times is None:
        times = [t0, t_final]
    times = np.asarray(sorted(set(float(t) for t in times)), dtype=float)
    if times[0] < t0 or times[-1] > t_final + 1e-12:
        raise ValueError("snapshot times must lie within [t0, t_final]")
    f = bundle.rhs
    y = np.array(rho0.data, dtype=complex)
    t = t0
    h_max = ctrl.h_max or (t_final - t0) or 1.0
    k1 = f(y)
    n_rhs = 1
    if ctrl.h_initial:
        h = ctrl.h_initial
    else:
        d0 = np.linalg.norm(y)
        d1 = np.linalg.norm(k1)
        h = 0.01 * d0 / d1 if d1 > 1e-14 else h_max
    h = min(h, h_max)

    snaps, snap_times = [], []
    next_snap = 0
    while next_snap < times.size and times[next_snap] <= t + 1e-14:
        _check_positive(y, t)
        snaps.append(DensityMatrix(y.copy(), t, basis))
        snap_times.append(t)
        next_snap += 1

    n_steps = n_rej = 0
    while next_snap < times.size:
        if n_steps + n_rej >= ctrl.max_steps:
            raise StepUnderflowError(f"step budget exhausted at t = {t:.6g}")
        target = times[next_snap]
        h = min(h, target - t)
        if h < ctrl.h_min and target - t > ctrl.h_min:
            raise StepUnderflowError(f"step size {h:.3e} below minimum at t = {t:.6g}")
        ks = [k1]
        for s in range(1, 7):
            ys = y + h * sum(a * k for a, k in zip(_A[s], ks) if a != 0.0)
            ks.append(f(ys))
        n_rhs += 6
        y_new = ys  # row 6 of the tableau equals the 5th-order weights (FSAL)
        err = h * sum(e * k for e, k in zip(_E, ks) if e != 0.0)
        en = _error_norm(err, y, y_new, ctrl)
        if en <= 1.0:
            t += h
            y = 0.5 * (y_new + y_new.conj().T)
            k1 = ks[6] if np.array_equal(y, y_new) else f(y)
            n_rhs += 0 if k1 is ks[6] else 1
            n_steps += 1
            if abs(t - target) <= 1e-12 * max(1.0, abs(target)):
                t = target
                _check_positive(y, t)
                snaps.append(DensityMatrix(y.copy(), t, basis))
                snap_times.append(t)
                next_snap += 1
            fac = 5.0 if en == 0.0 else min(5.0, 0.9 * en ** -0.2)
        else:
            n_rej += 1
            fac = max(0.2, 0.9 * en ** -0.2)
        h = min(h * fac, h_max)
    return Trajectory(np.array(snap_times), snaps, n_steps, n_rej, n_rhs)

"""Adaptive integration of the free-gyrostat equations.

A hand-rolled Dormand-Prince 5(4) pair with a PI step controller drives
the six-dimensional system (omega, nu).  After every accepted step the
Poisson vector is pulled back onto the unit sphere; the deviation seen
*before* that projection feeds the drift report, so renormalization
cannot hide integration error.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .core import GyrostatParams, IntegralConstants, SphereCurve, State, integrals
from .errors import StepFailure

__all__ = ["Trajectory", "DriftReport", "integrate", "project"]

# Dormand-Prince 5(4) tableau; 5th-order weights propagate, E = b5 - b4
# gives the embedded local error estimate.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_E = _B - np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0
_PI_ALPHA = 0.7 / 5.0
_PI_BETA = 0.4 / 5.0

#: relative-drift denominators are floored at this fraction of the
#: largest integral magnitude so exact zeros do not blow the report up
_DRIFT_FLOOR = 1e-6


@dataclass(frozen=True)
class DriftReport:
    """Max deviation of each conserved quantity over a trajectory.

    k1, k2, k3 are relative to their initial values (denominator floored,
    see `_DRIFT_FLOOR`); nu_norm is the max of | |nu|^2 - 1 | observed
    *before* the per-step renormalization.
    """

    k1: float
    k2: float
    k3: float
    nu_norm: float

    def max_integral_drift(self) -> float:
        return max(self.k1, self.k2, self.k3)


class Trajectory:
    """Accepted integration steps of one run.

    Attributes
    ----------
    times : ndarray, shape (n,)
        Strictly increasing step times starting at 0.
    omegas, nus : ndarray, shape (n, 3)
        States at the step times (nu renormalized).
    drift : DriftReport
    """

    def __init__(self, times, omegas, nus, drift, params):
        self.times = np.asarray(times, dtype=float)
        self.omegas = np.asarray(omegas, dtype=float)
        self.nus = np.asarray(nus, dtype=float)
        self.drift = drift
        self.params = params
        if len(self.times) != len(self.omegas) or len(self.times) != len(self.nus):
            raise ValueError("times and states must have equal length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    def __len__(self):
        return len(self.times)

    def state(self, i: int) -> State:
        return State(omega=self.omegas[i], nu=self.nus[i])

    @property
    def states(self):
        return [self.state(i) for i in range(len(self))]

    def at(self, t: float):
        """Dense output by linear interpolation between accepted steps."""
        omega = np.array([np.interp(t, self.times, self.omegas[:, j]) for j in range(3)])
        nu = np.array([np.interp(t, self.times, self.nus[:, j]) for j in range(3)])
        return omega, nu

    def integral_values(self) -> np.ndarray:
        """(n, 3) array of (k1, k2, k3) at every stored state."""
        m = self.params.A * self.omegas + self.params.lam
        k1 = np.einsum("ij,ij->i", m, m)
        k2 = np.einsum("ij,ij->i", self.params.A * self.omegas, self.omegas)
        k3 = np.einsum("ij,ij->i", m, self.nus)
        return np.stack([k1, k2, k3], axis=1)

    def to_csv(self, path_or_file):
        """Write t, omega1..3, nu1..3, K1..3 with 17 significant digits."""
        ks = self.integral_values()
        own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
        fh = open(path_or_file, "w", newline="") if own else path_or_file
        try:
            fh.write("t,omega1,omega2,omega3,nu1,nu2,nu3,K1,K2,K3\n")
            for i in range(len(self)):
                row = [self.times[i], *self.omegas[i], *self.nus[i], *ks[i]]
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
        finally:
            if own:
                fh.close()

    def to_csv_string(self) -> str:
        buf = io.StringIO()
        self.to_csv(buf)
        return buf.getvalue()


def _error_norm(err, y0, y1, tol):
    scale = tol + tol * np.maximum(np.abs(y0), np.abs(y1))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def _initial_step(f, y0, t_end, tol):
    # first guess from the rhs magnitude, refined with one Euler probe
    f0 = f(y0)
    d0 = np.linalg.norm(y0)
    d1 = np.linalg.norm(f0)
    h0 = 0.01 * d0 / d1 if d1 > 1e-10 * max(d0, 1.0) else 1e-6 * max(t_end, 1.0)
    h0 = min(h0, t_end)
    y1 = y0 + h0 * f0
    d2 = np.linalg.norm(f(y1) - f0) / max(h0, 1e-300)
    if max(d1, d2) > 1e-15:
        h1 = (0.01 * tol ** (1 / 5)) ** 0.5 / max(d1, d2) ** 0.5
    else:
        h1 = max(1e-6, h0 * 1e-3)
    return min(100 * h0, h1, t_end)


def integrate(
    state0: State,
    params: GyrostatParams,
    t_end: float,
    tol: float = 1e-10,
    reverse: bool = False,
    max_steps: int = 2_000_000,
) -> Trajectory:
    """Integrate the free motion from ``state0`` for duration ``t_end``.

    Parameters
    ----------
    t_end : float
        Positive duration; times in the result run from 0 to t_end.
    tol : float
        Local error tolerance, in [1e-14, 1e-3]; used as both absolute
        and relative weight in the error norm.
    reverse : bool
        Integrate the time-reversed vector field (the flow run backwards);
        composing a forward run with a reversed run from its endpoint
        returns to the start up to accumulated local error.

    Raises
    ------
    StepFailure
        If the controller drives the step size below representable size.
    """
    if not (t_end > 0.0):
        raise ValueError(f"t_end must be positive, got {t_end}")
    if not (1e-14 <= tol <= 1e-3):
        raise ValueError(f"tol must lie in [1e-14, 1e-3], got {tol}")

    A, a, lam = params.A, params.a, params.lam
    sign = -1.0 if reverse else 1.0

    def f(y):
        omega, nu = y[:3], y[3:]
        m = A * omega + lam
        return sign * np.concatenate([-a * np.cross(omega, m), np.cross(nu, omega)])

    y = np.concatenate([state0.omega, state0.nu])
    t = 0.0
    times = [0.0]
    ys = [y.copy()]
    nu_norm_dev = 0.0

    h = _initial_step(f, y, t_end, tol)
    h_min = 1e-14 * max(1.0, t_end)
    err_prev = 1.0
    k = np.empty((7, 6))

    steps = 0
    while t < t_end:
        if h < h_min or not np.isfinite(h):
            raise StepFailure(t)
        h = min(h, t_end - t)
        k[0] = f(y)
        for i in range(1, 7):
            k[i] = f(y + h * (_A[i] @ k[:i]))
        y_new = y + h * (_B @ k)
        err_vec = h * (_E @ k)
        err = _error_norm(err_vec, y, y_new, tol)

        if np.isfinite(err) and err <= 1.0:
            t += h
            nu = y_new[3:]
            n2 = nu @ nu
            nu_norm_dev = max(nu_norm_dev, abs(n2 - 1.0))
            y_new[3:] = nu / np.sqrt(n2)
            y = y_new
            times.append(t)
            ys.append(y.copy())
            factor = _SAFETY * max(err, 1e-12) ** (-_PI_ALPHA) * err_prev**_PI_BETA
            h *= min(_MAX_FACTOR, max(_MIN_FACTOR, factor))
            err_prev = max(err, 1e-12)
        else:
            if not np.isfinite(err):
                h *= 0.1
            else:
                h *= max(0.1, _SAFETY * err ** (-0.2))
        steps += 1
        if steps > max_steps:
            raise StepFailure(t, f"step budget {max_steps} exhausted at t={t}")

    ys = np.asarray(ys)
    omegas, nus = ys[:, :3], ys[:, 3:]

    ks0 = integrals(state0, params).asarray()
    m = A * omegas + lam
    ks = np.stack(
        [
            np.einsum("ij,ij->i", m, m),
            np.einsum("ij,ij->i", A * omegas, omegas),
            np.einsum("ij,ij->i", m, nus),
        ],
        axis=1,
    )
    denom = np.maximum(np.abs(ks0), _DRIFT_FLOOR * max(1.0, np.max(np.abs(ks0))))
    rel = np.max(np.abs(ks - ks0) / denom, axis=0)
    drift = DriftReport(k1=float(rel[0]), k2=float(rel[1]), k3=float(rel[2]),
                        nu_norm=float(nu_norm_dev))
    return Trajectory(times, omegas, nus, drift, params)


def project(traj: Trajectory) -> SphereCurve:
    """Project a trajectory to the Poisson sphere (its nu history)."""
    return SphereCurve(points=traj.nus, closed=False)


def containment_check(traj: Trajectory, k: IntegralConstants | None = None):
    """Fraction of projected points whose fiber is nonempty.

    The fiber solver is evaluated at every stored nu against the
    trajectory's own integral constants (or explicit ``k``).  Returns
    (fraction, counts array).
    """
    from .rpm.fibers import fiber_counts

    if k is None:
        k = integrals(traj.state(0), traj.params)
    batch = fiber_counts(traj.nus, k, traj.params)
    frac = float(np.mean(batch.counts >= 1))
    return frac, batch.counts

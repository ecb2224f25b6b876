"""Tracing the angular-velocity level curves by continuation.

The common level of the first two integrals is the intersection of a
sphere (in momentum coordinates ``m = A omega + lam``) with an ellipsoid
of the inertia metric; a closed-form parametrization exists but is not
needed.  Seeds on the momentum sphere are projected onto the level by
Gauss-Newton, then each component is followed with a tangent predictor
(cross product of the two gradients) and a Gauss-Newton corrector until
the trace returns to its start.
"""

from __future__ import annotations

import numpy as np

from ..core import GyrostatParams
from ..errors import EmptyLevelError, TraceStall

__all__ = ["trace_omega_curve"]

#: corrector target for the scaled level residuals
CORRECTOR_TOL = 1e-12
#: a trace closes when it returns within this distance of its start
CLOSURE_TOL = 1e-6


def _fib_sphere(n):
    i = np.arange(n)
    phi = np.pi * (3.0 - np.sqrt(5.0)) * i
    z = 1.0 - 2.0 * (i + 0.5) / n
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=-1)


class _Level:
    """Residuals and gradients of the two level equations in m-space."""

    def __init__(self, k1, k2, params):
        self.k1 = float(k1)
        self.k2 = float(k2)
        self.a = params.a
        self.lam = params.lam
        self.scale = np.array([max(1.0, abs(k1)), max(1.0, abs(k2))])

    def residual(self, m):
        g1 = m @ m - self.k1
        g2 = self.a * (m - self.lam) @ (m - self.lam) - self.k2
        return np.array([g1, g2])

    def jacobian(self, m):
        return np.stack([2.0 * m, 2.0 * self.a * (m - self.lam)])

    def scaled_norm(self, r):
        return float(np.max(np.abs(r) / self.scale))

    def correct(self, m, max_iter=25):
        """Gauss-Newton (least-norm) projection onto the level; None on failure."""
        for _ in range(max_iter):
            r = self.residual(m)
            if self.scaled_norm(r) <= CORRECTOR_TOL:
                return m
            J = self.jacobian(m)
            JJt = J @ J.T
            try:
                y = np.linalg.solve(JJt, r)
            except np.linalg.LinAlgError:
                return None
            step = J.T @ y
            m_new = m - step
            if not np.all(np.isfinite(m_new)):
                return None
            m = m_new
        return m if self.scaled_norm(self.residual(m)) <= CORRECTOR_TOL else None

    def tangent(self, m):
        J = self.jacobian(m)
        t = np.cross(J[0], J[1])
        nt = np.linalg.norm(t)
        if nt < 1e-10 * (np.linalg.norm(J[0]) * np.linalg.norm(J[1]) + 1e-300):
            raise TraceStall(
                "gradients of the level equations are parallel (critical point)"
            )
        return t / nt


def _trace_loop(level, m0, step, max_points):
    pts = [m0]
    t_prev = level.tangent(m0)
    m = m0
    h = step
    for _ in range(max_points):
        t = level.tangent(m)
        if t @ t_prev < 0:
            t = -t
        m_pred = m + h * t
        m_new = level.correct(m_pred)
        if m_new is None:
            h *= 0.5
            if h < step / 64.0:
                raise TraceStall("corrector kept failing while tracing the level curve")
            continue
        pts.append(m_new)
        t_prev = t
        m = m_new
        h = min(step, h * 1.3)
        if len(pts) > 4 and np.linalg.norm(m - m0) < 0.9 * step:
            if level.tangent(m) @ level.tangent(m0) > 0.5:
                pts.append(m0)
                return np.asarray(pts)
    raise TraceStall(f"trace did not close within {max_points} points")


def trace_omega_curve(k1: float, k2: float, params: GyrostatParams,
                      step: float | None = None, n_seeds: int = 256,
                      max_points: int = 20000):
    """Closed polylines (in omega space) of the level {K1 = k1, K2 = k2}.

    Components are found by projecting a coarse momentum-sphere seed grid
    onto the level and tracing every seed not already covered by a traced
    curve.  Each polyline is closed: its last point repeats the first.

    Raises EmptyLevelError when no seed converges, TraceStall when the
    tangent degenerates (critical level) or a trace fails to close.
    """
    k1 = float(k1)
    k2 = float(k2)
    if not (k1 > 0.0):
        raise EmptyLevelError(f"momentum sphere has radius sqrt(k1); k1={k1:g}")
    level = _Level(k1, k2, params)
    radius = np.sqrt(k1)
    if step is None:
        step = 2.0 * np.pi * radius / 400.0

    seeds = []
    for p in _fib_sphere(n_seeds) * radius:
        m = level.correct(p.copy(), max_iter=60)
        if m is not None:
            seeds.append(m)
    if not seeds:
        raise EmptyLevelError(f"no seed converged onto the level k1={k1:g}, k2={k2:g}")

    curves_m = []
    for seed in seeds:
        covered = any(
            np.min(np.linalg.norm(curve - seed, axis=1)) < 2.0 * step
            for curve in curves_m
        )
        if covered:
            continue
        curves_m.append(_trace_loop(level, seed, step, max_points))

    # momentum back to angular velocity
    return [params.a * (curve - params.lam) for curve in curves_m]

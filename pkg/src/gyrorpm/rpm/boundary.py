"""Generalized boundary of a region of possible motion.

Over every angular velocity of the level curve {K1 = k1, K2 = k2}, the
critical points of the sphere projection have Poisson vectors coplanar
with the velocity and the momentum:

    nu = [k3 + s1 (k2 + omega.lam) Q] (A omega + lam) / k1 + s2 Q omega,
    Q  = sqrt((k1 - k3^2) / (k1 |omega|^2 - (k2 + omega.lam)^2)).

The two sign slots are evaluated as four independent candidates and kept
only when the unit-norm, third-integral and coplanarity residuals all
pass; in practice the two anti-correlated patterns survive.  Accepted
points, walked in the order of the traced velocity curve, chain into
closed boundary loops; where the square-root factor leaves its domain a
chain terminates and the open arc is reported as such.
"""

from __future__ import annotations

import numpy as np

from ..core import GyrostatParams, IntegralConstants, SphereCurve
from ..errors import DomainError
from .tracing import trace_omega_curve

__all__ = ["generalized_boundary", "BOUNDARY_RESIDUAL_TOL", "SIGN_PATTERNS"]

#: each accepted point satisfies unit-norm, k3 and coplanarity residuals below this
BOUNDARY_RESIDUAL_TOL = 1e-8

SIGN_PATTERNS = ((1, 1), (1, -1), (-1, 1), (-1, -1))


def _candidate_nus(omega_curve, k, params, s1, s2):
    """Boundary candidates and their residuals along one velocity curve."""
    w = omega_curve
    m = params.A * w + params.lam
    P = k.k2 + w @ params.lam
    W = np.einsum("ij,ij->i", w, w)
    den = k.k1 * W - P**2
    num = k.k1 - k.k3**2
    good = den > 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        Q = np.sqrt(np.where(good, num / np.where(good, den, 1.0), np.nan))
    nu = ((k.k3 + s1 * P * Q) / k.k1)[:, None] * m + (s2 * Q)[:, None] * w
    r_norm = np.abs(np.einsum("ij,ij->i", nu, nu) - 1.0)
    r_k3 = np.abs(np.einsum("ij,ij->i", m, nu) - k.k3) / max(1.0, abs(k.k3))
    r_cop = np.abs(np.einsum("ij,ij->i", np.cross(w, m), nu))
    ok = (
        good
        & np.isfinite(nu).all(axis=1)
        & (r_norm < BOUNDARY_RESIDUAL_TOL)
        & (r_k3 < BOUNDARY_RESIDUAL_TOL)
        & (r_cop < BOUNDARY_RESIDUAL_TOL)
    )
    return nu, ok


def _runs_circular(mask):
    """Maximal runs of True in a cyclically-indexed mask.

    The last sample of a closed polyline repeats the first, so index
    n - 1 is dropped before wrapping.  Returns (runs, full) where each
    run is a list of indices and full means the whole circle passed.
    """
    m = mask[:-1]
    n = len(m)
    if n == 0:
        return [], False
    if np.all(m):
        return [list(range(n))], True
    if not np.any(m):
        return [], False
    idx = np.flatnonzero(m)
    # split at circular gaps
    breaks = np.flatnonzero(np.diff(idx) > 1)
    runs = np.split(idx, breaks + 1)
    if m[0] and m[-1] and len(runs) > 1:
        runs[0] = np.concatenate([runs[-1], runs[0]])
        runs = runs[:-1]
    return [r.tolist() for r in runs], False


def boundary_with_velocities(k: IntegralConstants, params: GyrostatParams,
                             step: float | None = None):
    """Boundary curves paired with the velocities they were built over.

    Returns a list of (SphereCurve, omega_points) with matching row
    counts; see :func:`generalized_boundary` for the curve semantics.
    """
    params.require_generic()
    if k.k1 < k.k3**2:
        raise DomainError("numerator", f"k1 - k3^2 = {k.k1 - k.k3**2:g} is negative")

    curves = trace_omega_curve(k.k1, k.k2, params, step=step)
    out = []
    for ci, w_curve in enumerate(curves):
        for s1, s2 in SIGN_PATTERNS:
            nu, ok = _candidate_nus(w_curve, k, params, s1, s2)
            runs, full = _runs_circular(ok)
            for run in runs:
                pts = nu[run]
                ws = w_curve[run]
                if full:
                    pts = np.vstack([pts, pts[:1]])
                    ws = np.vstack([ws, ws[:1]])
                elif len(run) < 2:
                    continue
                curve = SphereCurve(points=pts, closed=full,
                                    sign_pattern=(s1, s2), source_curve=ci)
                out.append((curve, ws))
    return out


def generalized_boundary(k: IntegralConstants, params: GyrostatParams,
                         step: float | None = None):
    """Boundary curves of the region of possible motion at constants ``k``.

    Returns a list of SphereCurve (possibly empty: a projection with no
    critical points is a legitimate outcome).  Raises DomainError when
    ``k1 < k3^2`` (the whole level is empty, there is nothing to bound)
    and propagates tracing errors.
    """
    return [curve for curve, _ in boundary_with_velocities(k, params, step=step)]

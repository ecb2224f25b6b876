"""Bifurcation diagram of the integral map and the four-region classifier.

The critical values of the constrained energy on spheres of constant
squared momentum form a plane curve parametrized by the Lagrange
multiplier ``sigma``:

    k1(sigma) = sum_i a_i^2 lam_i^2 / (sigma - a_i)^2
    k2(sigma) = sigma^2 * sum_i a_i lam_i^2 / (sigma - a_i)^2

with poles at the inverse inertias ``a_i``.  The poles split the curve
into four one-valued arcs: the arc below the smallest pole is the lower
envelope (minimum of the constrained energy), the arc above the largest
pole the upper envelope, and the two middle arcs carry the saddle /
secondary-extremum values where the momentum-energy level curve changes
between one and two loops.

The set of integral constants at which the level topology changes is

    Sigma = {k on the curve cylinder : k1 >= k3^2}
            union {k1 = k3^2 : low(k1) <= k2 <= high(k1)},

and its complement splits into four open regions:

    R1  band between the envelopes, outside both middle wedges: one torus
    R2  wedge between the critical values from the (poles[0], poles[1])
        multiplier interval: two tori
    R3  same for the (poles[1], poles[2]) interval: two tori
    R4  everything with an empty level

The R2/R3 assignment to the two wedges is a fixed convention of this
package (recorded in output metadata); the geometry does not single out
an ordering.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .core import GyrostatParams, IntegralConstants
from .errors import NonMonotoneError, OutOfRangeError, PoleError

__all__ = [
    "Branch",
    "RegionLabel",
    "BifurcationCurveSample",
    "critical_curve",
    "curve_samples",
    "branch_low",
    "branch_high",
    "wedge_intervals",
    "distance_to_bifurcation_set",
    "classify",
    "torus_count",
    "jk_type",
    "REGION_CONVENTION",
]

REGION_CONVENTION = (
    "R1: one torus (band between envelope branches, outside both wedges); "
    "R2: two tori, wedge of critical values with multiplier between the two "
    "smallest inverse inertias; R3: two tori, wedge with multiplier between "
    "the two largest inverse inertias; R4: empty level set. ON_SIGMA within "
    "tolerance of the bifurcation set."
)

#: sigma closer to a pole than this (relative to max inverse inertia) is rejected
POLE_TOL = 1e-12

_PRESCAN_SAMPLES = 1024


class Branch(enum.Enum):
    LOW = "LOW"    # sigma below the smallest pole
    MID1 = "MID1"  # between poles[0] and poles[1]
    MID2 = "MID2"  # between poles[1] and poles[2]
    HIGH = "HIGH"  # above the largest pole


class RegionLabel(enum.Enum):
    R1 = "R1"
    R2 = "R2"
    R3 = "R3"
    R4 = "R4"
    ON_SIGMA = "ON_SIGMA"


@dataclass(frozen=True)
class BifurcationCurveSample:
    sigma: float
    k1: float
    k2: float
    branch: Branch


def _k1_sigma(sigma, params):
    a, lam = params.a, params.lam
    sigma = np.asarray(sigma, dtype=float)
    return np.sum((a**2 * lam**2) / (sigma[..., None] - a) ** 2, axis=-1)


def _k2_sigma(sigma, params):
    a, lam = params.a, params.lam
    sigma = np.asarray(sigma, dtype=float)
    return sigma**2 * np.sum((a * lam**2) / (sigma[..., None] - a) ** 2, axis=-1)


def _dk1_sigma(sigma, params):
    a, lam = params.a, params.lam
    return -2.0 * np.sum((a**2 * lam**2) / (sigma - a) ** 3)


def _branch_of(sigma, poles) -> Branch:
    if sigma < poles[0]:
        return Branch.LOW
    if sigma < poles[1]:
        return Branch.MID1
    if sigma < poles[2]:
        return Branch.MID2
    return Branch.HIGH


def critical_curve(sigma: float, params: GyrostatParams):
    """Evaluate the bifurcation curve at multiplier ``sigma``.

    Returns ``(k1, k2)``.  Raises PoleError when ``sigma`` is within
    ``POLE_TOL * max(a)`` of an inverse inertia.
    """
    sigma = float(sigma)
    guard = POLE_TOL * float(np.max(params.a))
    if np.min(np.abs(sigma - params.a)) <= guard:
        raise PoleError(f"sigma={sigma} is within {guard:g} of an inverse-inertia pole")
    return float(_k1_sigma(sigma, params)), float(_k2_sigma(sigma, params))


def curve_point(sigma: float, params: GyrostatParams) -> BifurcationCurveSample:
    k1, k2 = critical_curve(sigma, params)
    return BifurcationCurveSample(sigma, k1, k2, _branch_of(sigma, params.poles))


def _segment_thetas(params, n):
    """Per-branch theta = arctan(sigma) grids, poles excluded.

    Returns a list of (theta_lo, theta_hi, thetas) per segment, ascending.
    The compactified parameter handles sigma = +-inf and pole
    neighborhoods uniformly.
    """
    poles = params.poles
    tp = np.arctan(poles)
    # stay ~1e-6 away from each pole in theta and 1e-8 from +-pi/2
    eps_t = 1e-6
    ends = [(-np.pi / 2 + 1e-8, tp[0] - eps_t),
            (tp[0] + eps_t, tp[1] - eps_t),
            (tp[1] + eps_t, tp[2] - eps_t),
            (tp[2] + eps_t, np.pi / 2 - 1e-8)]
    out = []
    per = max(n // 4, 8)
    for lo, hi in ends:
        th = np.linspace(lo, hi, per)
        if lo < 0.0 < hi:  # force sigma = 0 into the grid
            th = np.unique(np.concatenate([th, [0.0]]))
        out.append((lo, hi, th))
    return out


def curve_samples(params: GyrostatParams, n: int = 512):
    """Sample the whole curve, ``n`` points split over the four branches."""
    params.require_generic()
    samples = []
    for _, _, thetas in _segment_thetas(params, n):
        sigmas = np.tan(thetas)
        k1s = _k1_sigma(sigmas, params)
        k2s = _k2_sigma(sigmas, params)
        for s, k1, k2 in zip(sigmas, k1s, k2s):
            samples.append(
                BifurcationCurveSample(float(s), float(k1), float(k2),
                                       _branch_of(s, params.poles))
            )
    return samples


def _monotone_prescan(params, lo, hi, expect_increasing):
    """Verify k1(sigma) is strictly monotone on (lo, hi) before inverting."""
    sigmas = np.tan(np.linspace(np.arctan(lo), np.arctan(hi), _PRESCAN_SAMPLES))
    k1s = _k1_sigma(sigmas, params)
    d = np.diff(k1s)
    ok = np.all(d > 0) if expect_increasing else np.all(d < 0)
    if not ok:
        raise NonMonotoneError(
            f"k1(sigma) is not monotone on ({lo:g}, {hi:g}); branch inversion aborted"
        )


def _invert_k1_on_branch(k1_target, params, branch):
    """Solve k1(sigma) = k1_target on an envelope branch, return sigma."""
    if not np.isfinite(k1_target) or k1_target <= 0.0:
        raise OutOfRangeError(f"branch image is k1 > 0, got k1={k1_target}")
    poles = params.poles
    far = 1e8
    if branch is Branch.LOW:
        pole = poles[0]
        outer = -far
        expect_increasing = True
    else:
        pole = poles[2]
        outer = far
        expect_increasing = False

    k1_outer = float(_k1_sigma(np.array(outer), params))
    if k1_target <= k1_outer:
        raise OutOfRangeError(
            f"k1={k1_target:g} is below the resolvable branch range (> {k1_outer:g})"
        )
    # approach the pole geometrically until the target is bracketed
    d = 0.1 * (poles[1] - poles[0] if branch is Branch.LOW else poles[2] - poles[1])
    inner = pole - d if branch is Branch.LOW else pole + d
    for _ in range(200):
        if float(_k1_sigma(np.array(inner), params)) > k1_target:
            break
        d *= 0.5
        if d < 1e-14 * pole:
            raise OutOfRangeError(f"k1={k1_target:g} exceeds the resolvable branch range")
        inner = pole - d if branch is Branch.LOW else pole + d
    else:
        raise OutOfRangeError(f"k1={k1_target:g} exceeds the resolvable branch range")

    lo, hi = (outer, inner) if branch is Branch.LOW else (inner, outer)
    _monotone_prescan(params, lo, hi, expect_increasing)
    sigma = brentq(lambda s: float(_k1_sigma(np.array(s), params)) - k1_target,
                   lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=200)
    return float(sigma)


def branch_low(k1: float, params: GyrostatParams) -> float:
    """k2 on the lower envelope branch (multiplier below the smallest pole).

    This is the minimum of the constrained energy on the momentum sphere
    of radius sqrt(k1).
    """
    sigma = _invert_k1_on_branch(float(k1), params, Branch.LOW)
    return float(_k2_sigma(np.array(sigma), params))


def branch_high(k1: float, params: GyrostatParams) -> float:
    """k2 on the upper envelope branch (multiplier above the largest pole)."""
    sigma = _invert_k1_on_branch(float(k1), params, Branch.HIGH)
    return float(_k2_sigma(np.array(sigma), params))


def _interval_minimum(params, lo, hi):
    """Minimum of the strictly convex k1(sigma) on a middle pole interval."""
    span = hi - lo
    d = 1e-9 * span
    sigma_min = brentq(lambda s: _dk1_sigma(s, params), lo + d, hi - d,
                       xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=200)
    return float(sigma_min), float(_k1_sigma(np.array(sigma_min), params))


def wedge_intervals(k1: float, params: GyrostatParams):
    """The k2-interval of each middle-branch wedge at momentum level ``k1``.

    Returns a two-element list (one entry per middle pole interval,
    ascending); entries are ``(k2_lo, k2_hi)`` or None when the vertical
    line misses that wedge.  Inside an interval the momentum-energy level
    curve has two loops.
    """
    k1 = float(k1)
    poles = params.poles
    out = []
    for lo, hi in [(poles[0], poles[1]), (poles[1], poles[2])]:
        sigma_min, k1_min = _interval_minimum(params, lo, hi)
        if not k1 > k1_min:
            out.append(None)
            continue
        span = hi - lo
        roots = []
        for a_end, b_end in [(lo, sigma_min), (sigma_min, hi)]:
            # push toward the pole until k1 exceeds the target
            d = 0.25 * span
            for _ in range(200):
                probe = a_end + d if a_end == lo else b_end - d
                if float(_k1_sigma(np.array(probe), params)) > k1:
                    break
                d *= 0.5
            else:
                out.append(None)
                break
            lo_b, hi_b = (probe, sigma_min) if a_end == lo else (sigma_min, probe)
            roots.append(brentq(
                lambda s: float(_k1_sigma(np.array(s), params)) - k1,
                lo_b, hi_b, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=200))
        else:
            k2s = sorted(float(_k2_sigma(np.array(r), params)) for r in roots)
            out.append((k2s[0], k2s[1]))
    return out


def _curve_distance_2d(k1: float, k2: float, params, n=4096):
    """Scaled in-plane distance from (k1, k2) to the curve.

    Coarse theta sampling per branch segment followed by iterative grid
    refinement around the best sample; scalar minimizers stall at a
    sqrt(machine-eps) parameter floor, the grid refinement does not.
    """
    s1 = max(1.0, abs(k1))
    s2 = max(1.0, abs(k2))

    def dist2_theta(thetas):
        sig = np.tan(thetas)
        return (((_k1_sigma(sig, params) - k1) / s1) ** 2
                + ((_k2_sigma(sig, params) - k2) / s2) ** 2)

    best = np.inf
    for lo, hi, thetas in _segment_thetas(params, n):
        d2 = dist2_theta(thetas)
        i = int(np.argmin(d2))
        best = min(best, float(d2[i]))
        t_best = thetas[i]
        width = thetas[1] - thetas[0] if len(thetas) > 1 else (hi - lo)
        for _ in range(7):
            grid = np.linspace(max(lo, t_best - width), min(hi, t_best + width), 65)
            d2g = dist2_theta(grid)
            j = int(np.argmin(d2g))
            t_best = grid[j]
            best = min(best, float(d2g[j]))
            width = grid[1] - grid[0]
    return float(np.sqrt(best))


def distance_to_bifurcation_set(k: IntegralConstants, params: GyrostatParams,
                                tol: float = 1e-9) -> float:
    """Approximate distance from ``k`` to the bifurcation set.

    Distances are measured in (k1, k2, k3) with each coordinate scaled by
    ``max(1, |k_i|)``; first-order (residual / gradient) estimates are
    used for the parabolic-cylinder stratum, which is accurate at the
    tolerance scales where membership matters.
    """
    k1, k2, k3 = k.astuple()
    s1, s2, s3 = max(1.0, abs(k1)), max(1.0, abs(k2)), max(1.0, abs(k3))

    # parabolic cylinder k1 = k3^2, restricted to the envelope band
    d_wall = np.inf
    if k1 > 0.0:
        try:
            f_val = branch_low(k1, params)
            g_val = branch_high(k1, params)
            fuzz = 10.0 * tol * s2
            if f_val - fuzz <= k2 <= g_val + fuzz:
                grad = float(np.hypot(s1, 2.0 * k3 * s3))
                d_wall = abs(k1 - k3**2) / grad
        except OutOfRangeError:
            pass

    # cylinder over the curve, restricted to k1 >= k3^2
    d_curve = _curve_distance_2d(k1, k2, params)
    shortfall = max(0.0, k3**2 - k1) / float(np.hypot(s1, 2.0 * k3 * s3))
    d_cyl = float(np.hypot(d_curve, shortfall))

    return min(d_cyl, d_wall)


def classify(k: IntegralConstants, params: GyrostatParams,
             tol: float = 1e-9) -> RegionLabel:
    """Assign ``k`` to one of the four regions or to the bifurcation set.

    Membership in the bifurcation set is decided first, at scaled
    distance ``tol``.  Region identity follows the level-set geometry:
    empty level (R4) whenever ``k1 < k3^2`` or ``k2`` leaves the envelope
    band; otherwise the wedge membership of ``k2`` among the middle-branch
    critical values decides between one torus (R1) and two (R2/R3), with
    the wedge naming convention of ``REGION_CONVENTION``.
    """
    params.require_generic()
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    k1, k2, k3 = k.astuple()

    if distance_to_bifurcation_set(k, params, tol) <= tol:
        return RegionLabel.ON_SIGMA
    if k1 <= 0.0 or k1 <= k3**2:
        return RegionLabel.R4
    f_val = branch_low(k1, params)
    g_val = branch_high(k1, params)
    if k2 < f_val or k2 > g_val:
        return RegionLabel.R4
    w1, w2 = wedge_intervals(k1, params)
    if w1 is not None and w1[0] < k2 < w1[1]:
        return RegionLabel.R2
    if w2 is not None and w2[0] < k2 < w2[1]:
        return RegionLabel.R3
    return RegionLabel.R1


def torus_count(label: RegionLabel):
    """Number of tori in the integral level for a region label (None on Sigma)."""
    return {RegionLabel.R1: 1, RegionLabel.R2: 2, RegionLabel.R3: 2,
            RegionLabel.R4: 0, RegionLabel.ON_SIGMA: None}[label]


def jk_type(label: RegionLabel) -> str:
    """Topology tag of the integral level: T2, 2T2, empty or critical."""
    return {RegionLabel.R1: "T2", RegionLabel.R2: "2T2", RegionLabel.R3: "2T2",
            RegionLabel.R4: "empty", RegionLabel.ON_SIGMA: "critical"}[label]

"""Reproducible sampling of integral constants from each region.

Samples are built directly from the region geometry (envelope band,
wedge intervals, parabolic wall) and then confirmed by the classifier.
For the two-torus regions the vertical-momentum component is drawn from
the sub-range where the two tori project to disjoint sets on the sphere:
each torus covers the band of points at angular distance
``arccos(|k3| / sqrt(k1))`` from its normalized momentum circle, and two
such bands are disjoint exactly when twice that radius stays below the
minimum angular gap ``delta`` between the circles.  Without that
restriction the two images overlap for small |k3| and merge into a
single visible component, which is a feature of the projection rather
than of the level topology.
"""

from __future__ import annotations

import numpy as np

from . import bifurcation
from .bifurcation import RegionLabel, classify
from .core import GyrostatParams, IntegralConstants
from .rpm.tracing import trace_omega_curve

__all__ = ["sample_regions", "separated_k3_range", "momentum_circle_gap"]


def momentum_circle_gap(k1: float, k2: float, params: GyrostatParams) -> float:
    """Minimum angular distance between the normalized momentum circles.

    Only meaningful for (k1, k2) inside a wedge (two-loop level); raises
    if the traced level does not have exactly two components.
    """
    curves = trace_omega_curve(k1, k2, params)
    if len(curves) != 2:
        raise ValueError(f"expected a two-loop level, traced {len(curves)} loops")
    mhats = [
        (params.A * c + params.lam) / np.sqrt(k1) for c in curves
    ]
    dots = np.clip(mhats[0] @ mhats[1].T, -1.0, 1.0)
    return float(np.min(np.arccos(dots)))


def separated_k3_range(k1: float, k2: float, params: GyrostatParams,
                       margin: float = 0.8):
    """|k3| interval on which the two torus images are provably disjoint.

    Returns (k3_lo, k3_hi); the lower end applies the safety ``margin``
    to the circle-gap bound, the upper end stays off the parabolic wall.
    """
    gap = momentum_circle_gap(k1, k2, params)
    lo = np.sqrt(k1) * np.cos(0.5 * margin * gap)
    hi = np.sqrt(k1) * 0.995
    if not lo < hi:
        raise ValueError(
            f"no separated k3 range at (k1, k2) = ({k1:g}, {k2:g}); gap={gap:g}"
        )
    return float(lo), float(hi)


def _r1_candidate(params, rng):
    poles = params.poles
    k1 = float(rng.uniform(0.05, 8.0))
    f = bifurcation.branch_low(k1, params)
    g = bifurcation.branch_high(k1, params)
    wedges = bifurcation.wedge_intervals(k1, params)
    for _ in range(64):
        k2 = float(rng.uniform(f + 0.04 * (g - f), g - 0.04 * (g - f)))
        clear = all(
            w is None or not (w[0] - 0.06 * (w[1] - w[0]) <= k2 <= w[1] + 0.06 * (w[1] - w[0]))
            for w in wedges
        )
        if clear:
            k3 = float(rng.uniform(-0.85, 0.85) * np.sqrt(k1))
            return IntegralConstants(k1, k2, k3)
    return None


def _wedge_candidate(params, rng, which):
    poles = params.poles
    lo, hi = (poles[0], poles[1]) if which == 0 else (poles[1], poles[2])
    _, k1_min = bifurcation._interval_minimum(params, lo, hi)
    k1 = float(k1_min * rng.uniform(1.25, 3.0))
    wedge = bifurcation.wedge_intervals(k1, params)[which]
    if wedge is None:
        return None
    span = wedge[1] - wedge[0]
    k2 = float(rng.uniform(wedge[0] + 0.3 * span, wedge[1] - 0.3 * span))
    try:
        k3_lo, k3_hi = separated_k3_range(k1, k2, params)
    except ValueError:
        return None
    sign = 1.0 if rng.random() < 0.5 else -1.0
    k3 = float(sign * rng.uniform(k3_lo, min(k3_hi, 0.5 * (k3_lo + k3_hi) + 0.25 * (k3_hi - k3_lo))))
    return IntegralConstants(k1, k2, k3)


def _r4_candidate(params, rng):
    kind = rng.integers(0, 3)
    k1 = float(rng.uniform(0.05, 6.0))
    if kind == 0:  # outside the parabolic wall
        k3 = float(np.sqrt(k1) * rng.uniform(1.15, 2.0) * (1 if rng.random() < 0.5 else -1))
        k2 = float(rng.uniform(0.0, 3.0))
        return IntegralConstants(k1, k2, k3)
    f = bifurcation.branch_low(k1, params)
    g = bifurcation.branch_high(k1, params)
    k3 = float(rng.uniform(-0.8, 0.8) * np.sqrt(k1))
    if kind == 1:  # above the upper envelope
        return IntegralConstants(k1, float(g + rng.uniform(0.2, 2.0) * max(1.0, g)), k3)
    # below the lower envelope (energy is nonnegative, so stay in [0, f))
    if f <= 1e-3:
        return None
    return IntegralConstants(k1, float(f * rng.uniform(0.05, 0.7)), k3)


def sample_regions(params: GyrostatParams, n_per_region: int = 5,
                   seed: int = 0, tol: float = 1e-9):
    """Classifier-confirmed samples of every region.

    Returns a dict RegionLabel -> list[IntegralConstants] with
    ``n_per_region`` entries for R1..R4.  Deterministic for a fixed seed.
    """
    params.require_generic()
    rng = np.random.default_rng(seed)
    makers = {
        RegionLabel.R1: lambda: _r1_candidate(params, rng),
        RegionLabel.R2: lambda: _wedge_candidate(params, rng, 0),
        RegionLabel.R3: lambda: _wedge_candidate(params, rng, 1),
        RegionLabel.R4: lambda: _r4_candidate(params, rng),
    }
    out = {label: [] for label in makers}
    for label, make in makers.items():
        attempts = 0
        while len(out[label]) < n_per_region:
            attempts += 1
            if attempts > 400:
                raise RuntimeError(f"could not sample {n_per_region} points in {label}")
            k = make()
            if k is None:
                continue
            if classify(k, params, tol=tol) is label:
                out[label].append(k)
    return out

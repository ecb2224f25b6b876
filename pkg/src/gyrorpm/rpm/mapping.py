"""Region-of-possible-motion maps on an icosphere grid.

Fiber counts are solved per vertex (batched; optionally chunked over a
thread pool), connected components of the positive-count set are taken
over the mesh edge graph, and the generalized boundary curves are
attached.  Vertices flagged uncertain by the fiber solver sit too close
to a fold for their count to be trusted and are excluded from component
adjacency.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .. import bifurcation
from ..core import GyrostatParams, IntegralConstants, SphereCurve
from ..errors import DomainError, EmptyLevelError, TraceStall
from .boundary import generalized_boundary
from .fibers import fiber_counts
from .icosphere import SphereMesh, icosphere, level_for_resolution

__all__ = ["RpmComponent", "RpmReport", "rpm_map"]


@dataclass(frozen=True, eq=False)
class RpmComponent:
    """One connected component of the positive-fiber-count set."""

    vertices: np.ndarray
    count_profile: tuple

    @property
    def size(self) -> int:
        return len(self.vertices)


@dataclass(eq=False)
class RpmReport:
    """Fiber-count field, components and boundary for one set of constants."""

    k: IntegralConstants
    grid: dict
    counts: np.ndarray
    uncertain: np.ndarray
    components: list
    boundary: list
    meta: dict = field(default_factory=dict)

    @property
    def n_components(self) -> int:
        return len(self.components)

    def to_dict(self) -> dict:
        return {
            "k": {"k1": self.k.k1, "k2": self.k.k2, "k3": self.k.k3},
            "grid": self.grid,
            "counts": self.counts.tolist(),
            "uncertain": np.flatnonzero(self.uncertain).tolist(),
            "components": [
                {
                    "size": c.size,
                    "count_profile": list(c.count_profile),
                    "vertices": c.vertices.tolist(),
                }
                for c in self.components
            ],
            "boundary": [
                {
                    "curve_id": i,
                    "closed": b.closed,
                    "sign_pattern": list(b.sign_pattern) if b.sign_pattern else None,
                    "source_curve": b.source_curve,
                    "points": b.points.tolist(),
                }
                for i, b in enumerate(self.boundary)
            ],
            "meta": self.meta,
        }


def _solve_counts(mesh: SphereMesh, k, params, threads):
    nus = mesh.vertices
    if not threads or threads <= 1 or len(nus) < 4096:
        return fiber_counts(nus, k, params)
    chunks = np.array_split(np.arange(len(nus)), threads * 4)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda ix: fiber_counts(nus[ix], k, params), chunks))
    return _concat_batches(parts)


def _concat_batches(parts):
    from .fibers import FiberBatch

    return FiberBatch(
        counts=np.concatenate([p.counts for p in parts]),
        omegas=np.concatenate([p.omegas for p in parts]),
        valid=np.concatenate([p.valid for p in parts]),
        residuals=np.concatenate([p.residuals for p in parts]),
        uncertain=np.concatenate([p.uncertain for p in parts]),
    )


def _components(mesh: SphereMesh, counts, uncertain):
    keep = (counts > 0) & ~uncertain
    idx = np.flatnonzero(keep)
    if len(idx) == 0:
        return []
    remap = -np.ones(mesh.n_vertices, dtype=np.int64)
    remap[idx] = np.arange(len(idx))
    e = mesh.edges
    both = keep[e[:, 0]] & keep[e[:, 1]]
    rows, cols = remap[e[both, 0]], remap[e[both, 1]]
    graph = sp.coo_matrix(
        (np.ones(len(rows)), (rows, cols)), shape=(len(idx), len(idx))
    )
    n_comp, labels = connected_components(graph, directed=False)
    comps = []
    for c in range(n_comp):
        verts = idx[labels == c]
        profile = tuple(sorted(set(counts[verts].tolist())))
        comps.append(RpmComponent(vertices=verts, count_profile=profile))
    comps.sort(key=lambda c: (-c.size, int(c.vertices[0])))
    return comps


def rpm_map(k: IntegralConstants, params: GyrostatParams,
            resolution=(64, 128), with_boundary: bool = True,
            threads: int | None = None) -> RpmReport:
    """Fiber-count map of the region of possible motion.

    ``resolution`` is an icosphere subdivision level or a lat x long pair
    (minimum 16 x 32 equivalent).  Component counting runs on the mesh
    edge graph restricted to trusted positive-count vertices; boundary
    curves come from the critical-point formula and are attached when the
    level is nonempty.
    """
    params.require_generic()
    level = level_for_resolution(resolution)
    mesh = icosphere(level)
    batch = _solve_counts(mesh, k, params, threads)
    comps = _components(mesh, batch.counts, batch.uncertain)

    boundary: list[SphereCurve] = []
    boundary_note = ""
    if with_boundary and np.any(batch.counts > 0):
        try:
            boundary = generalized_boundary(k, params)
        except (DomainError, EmptyLevelError, TraceStall) as exc:
            boundary_note = f"boundary unavailable: {exc}"

    meta = {
        "region_convention": bifurcation.REGION_CONVENTION,
        "uncertain_vertices": int(np.count_nonzero(batch.uncertain)),
        "max_residual": float(np.max(batch.residuals)) if len(batch.residuals) else 0.0,
    }
    if boundary_note:
        meta["boundary_note"] = boundary_note

    return RpmReport(
        k=k,
        grid=mesh.descriptor(),
        counts=batch.counts,
        uncertain=batch.uncertain,
        components=comps,
        boundary=boundary,
        meta=meta,
    )

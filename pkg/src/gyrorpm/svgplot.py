"""Static SVG rendering of a region-of-possible-motion map.

Two orthographic hemispheres side by side (+z on the left, -z mirrored
on the right), mesh triangles shaded by fiber count, boundary polylines
drawn on top.  Output is deterministic for identical reports.
"""

from __future__ import annotations

import numpy as np

from .rpm.icosphere import icosphere
from .rpm.mapping import RpmReport

__all__ = ["render_rpm_svg"]

_SIZE = 420.0
_PAD = 10.0
_SHADES = {0: "#ffffff", 1: "#d9c8e8", 2: "#9ecae1", 3: "#6baed6", 4: "#2171b5"}
_CURVE_COLORS = ["#d62728", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b", "#e377c2"]


def _proj(xyz, hemisphere):
    """Orthographic map; the -z hemisphere is mirrored in x to keep
    outlines matching along the equator."""
    x, y = xyz[..., 0], xyz[..., 1]
    if hemisphere < 0:
        x = -x
    r = _SIZE / 2.0 - _PAD
    cx = _PAD + _SIZE / 2.0 + (0 if hemisphere > 0 else _SIZE)
    cy = _PAD + _SIZE / 2.0
    return cx + r * x, cy - r * y


def render_rpm_svg(report: RpmReport, path) -> None:
    mesh = icosphere(report.grid["level"])
    counts = report.counts
    uncertain = report.uncertain
    verts = mesh.vertices
    faces = mesh.faces

    w = 2 * _SIZE + 2 * _PAD
    h = _SIZE + 3 * _PAD + 16
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0f}" height="{h:.0f}" '
        f'viewBox="0 0 {w:.0f} {h:.0f}">',
        f'<rect width="{w:.0f}" height="{h:.0f}" fill="#fbfbfb"/>',
    ]

    centroids = verts[faces].mean(axis=1)
    face_count = np.max(counts[faces], axis=1)
    face_unc = np.any(uncertain[faces], axis=1)
    for hemi in (1, -1):
        sel = np.flatnonzero(centroids[:, 2] * hemi >= 0)
        # painter order by depth keeps the silhouette clean
        order = sel[np.argsort(hemi * centroids[sel, 2])]
        for fi in order:
            tri = verts[faces[fi]]
            xs, ys = _proj(tri, hemi)
            fill = _SHADES.get(min(int(face_count[fi]), 4), "#08306b")
            if face_unc[fi]:
                fill = "#f4cccc"
            pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys))
            parts.append(f'<polygon points="{pts}" fill="{fill}" stroke="none"/>')
        # equator outline
        cx = _PAD + _SIZE / 2.0 + (0 if hemi > 0 else _SIZE)
        parts.append(
            f'<circle cx="{cx:.1f}" cy="{_PAD + _SIZE / 2.0:.1f}" '
            f'r="{_SIZE / 2.0 - _PAD:.1f}" fill="none" stroke="#444" stroke-width="1"/>'
        )

    for i, curve in enumerate(report.boundary):
        color = _CURVE_COLORS[i % len(_CURVE_COLORS)]
        for hemi in (1, -1):
            pts = curve.points
            mask = hemi * pts[:, 2] >= 0
            if not np.any(mask):
                continue
            # split the polyline where it dips below the horizon
            runs = np.split(np.flatnonzero(mask), np.flatnonzero(np.diff(np.flatnonzero(mask)) > 1) + 1)
            for run in runs:
                if len(run) < 2:
                    continue
                xs, ys = _proj(pts[run], hemi)
                d = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys))
                parts.append(
                    f'<polyline points="{d}" fill="none" stroke="{color}" stroke-width="1.6"/>'
                )

    k = report.k
    parts.append(
        f'<text x="{_PAD}" y="{h - 6:.0f}" font-family="monospace" font-size="12">'
        f"k1={k.k1:.6g} k2={k.k2:.6g} k3={k.k3:.6g} | components={report.n_components} "
        f"| shades: fiber count 0..4, red tint: uncertain</text>"
    )
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")

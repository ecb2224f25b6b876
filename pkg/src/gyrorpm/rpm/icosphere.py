"""Icosphere triangulations of the unit sphere.

Subdividing the icosahedron gives near-uniform triangles, which keeps
component counting free of the polar clustering a latitude-longitude
grid would introduce.  Meshes are cached per subdivision level.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["SphereMesh", "icosphere", "level_for_resolution"]

_CACHE: dict[int, "SphereMesh"] = {}

MAX_LEVEL = 8


@dataclass(frozen=True, eq=False)
class SphereMesh:
    vertices: np.ndarray  # (V, 3), unit norm
    faces: np.ndarray     # (F, 3) vertex indices
    edges: np.ndarray     # (E, 2) sorted vertex index pairs, unique
    level: int

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @property
    def mean_edge_length(self) -> float:
        p, q = self.vertices[self.edges[:, 0]], self.vertices[self.edges[:, 1]]
        return float(np.mean(np.linalg.norm(p - q, axis=1)))

    def descriptor(self) -> dict:
        return {
            "type": "icosphere",
            "level": self.level,
            "vertices": self.n_vertices,
            "faces": self.n_faces,
            "mean_edge_length": self.mean_edge_length,
        }


def _base_icosahedron():
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array([
        (-1, phi, 0), (1, phi, 0), (-1, -phi, 0), (1, -phi, 0),
        (0, -1, phi), (0, 1, phi), (0, -1, -phi), (0, 1, -phi),
        (phi, 0, -1), (phi, 0, 1), (-phi, 0, -1), (-phi, 0, 1),
    ], dtype=float)
    verts /= np.linalg.norm(verts, axis=1, keepdims=True)
    faces = np.array([
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ], dtype=np.int64)
    return verts, faces


def _subdivide(verts, faces):
    verts = list(verts)
    midpoint: dict[tuple[int, int], int] = {}

    def mid(i, j):
        key = (i, j) if i < j else (j, i)
        idx = midpoint.get(key)
        if idx is None:
            p = verts[i] + verts[j]
            p = p / np.linalg.norm(p)
            idx = len(verts)
            verts.append(p)
            midpoint[key] = idx
        return idx

    new_faces = np.empty((4 * len(faces), 3), dtype=np.int64)
    for f, (i, j, k) in enumerate(faces):
        ij, jk, ki = mid(i, j), mid(j, k), mid(k, i)
        new_faces[4 * f: 4 * f + 4] = [(i, ij, ki), (j, jk, ij), (k, ki, jk), (ij, jk, ki)]
    return np.asarray(verts), new_faces


def _edges_of(faces):
    e = np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]])
    e.sort(axis=1)
    return np.unique(e, axis=0)


def icosphere(level: int) -> SphereMesh:
    """Mesh at subdivision ``level`` (10 * 4**level + 2 vertices)."""
    if not 0 <= level <= MAX_LEVEL:
        raise ValueError(f"level must be in [0, {MAX_LEVEL}], got {level}")
    mesh = _CACHE.get(level)
    if mesh is None:
        verts, faces = _base_icosahedron()
        for _ in range(level):
            verts, faces = _subdivide(verts, faces)
        verts = verts / np.linalg.norm(verts, axis=1, keepdims=True)
        mesh = SphereMesh(vertices=verts, faces=faces, edges=_edges_of(faces),
                          level=level)
        _CACHE[level] = mesh
    return mesh


def level_for_resolution(resolution) -> int:
    """Smallest subdivision level matching a grid resolution.

    ``resolution`` is either an explicit level (int) or a latitude x
    longitude pair whose cell count sets the vertex budget.  Grids below
    the 16 x 32 equivalent are rejected.
    """
    if isinstance(resolution, (int, np.integer)):
        level = int(resolution)
    else:
        rows, cols = (int(v) for v in resolution)
        if rows <= 0 or cols <= 0:
            raise ValueError(f"resolution must be positive, got {resolution}")
        cells = rows * cols
        level = 0
        while 10 * 4**level + 2 < cells and level < MAX_LEVEL:
            level += 1
    if level < 3:
        raise ValueError(
            f"resolution below the 16x32-equivalent minimum (level 3), got {resolution}"
        )
    return level

"""Quadrature on segments, polygons and polyhedra.

Simplex rules are collapsed-coordinate (Duffy) tensor products of
Gauss-Jacobi rules, so any degree is available.  Polygons are split into
triangles and polyhedra into tetrahedra with apex at an interior point.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

from .geometry import Cell, Edge, Face, GeometryError


@dataclass(frozen=True, eq=False)
class QuadRule:
    points: np.ndarray  # (n, 3)
    weights: np.ndarray  # (n,)
    exact_degree: int
    domain_measure: float

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """Integral of sampled values; leading axis indexes points."""
        return np.tensordot(self.weights, values, axes=(0, 0))


def _n_points(degree: int) -> int:
    return max(1, (degree + 2) // 2)


@lru_cache(maxsize=None)
def _gauss_jacobi01(n: int, alpha: int) -> tuple[np.ndarray, np.ndarray]:
    """Rule on [0, 1] for the weight (1 - t)^alpha."""
    x, w = roots_jacobi(n, alpha, 0)
    return (1 + x) / 2, w / 2 ** (alpha + 1)


@lru_cache(maxsize=None)
def reference_segment(degree: int):
    return _gauss_jacobi01(_n_points(degree), 0)


@lru_cache(maxsize=None)
def reference_triangle(degree: int):
    """Rule on the triangle (0,0), (1,0), (0,1); barycentric-free coordinates."""
    n = _n_points(degree)
    u, wu = _gauss_jacobi01(n, 1)
    v, wv = _gauss_jacobi01(n, 0)
    U, V = np.meshgrid(u, v, indexing="ij")
    pts = np.stack([U.ravel(), (V * (1 - U)).ravel()], axis=1)
    return pts, np.outer(wu, wv).ravel()


@lru_cache(maxsize=None)
def reference_tetrahedron(degree: int):
    n = _n_points(degree)
    u, wu = _gauss_jacobi01(n, 2)
    v, wv = _gauss_jacobi01(n, 1)
    w, ww = _gauss_jacobi01(n, 0)
    U, V, W = np.meshgrid(u, v, w, indexing="ij")
    pts = np.stack([U.ravel(), (V * (1 - U)).ravel(), (W * (1 - U) * (1 - V)).ravel()], axis=1)
    return pts, np.einsum("i,j,k->ijk", wu, wv, ww).ravel()


def simplex_rule(vertices: np.ndarray, degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Points and weights on a triangle or tetrahedron given by its vertices in R^3."""
    vertices = np.asarray(vertices, float)
    d = len(vertices) - 1
    a = vertices[0]
    J = (vertices[1:] - a).T  # (3, d)
    if d == 2:
        ref, w = reference_triangle(degree)
        jac = np.linalg.norm(np.cross(J[:, 0], J[:, 1]))
    elif d == 3:
        ref, w = reference_tetrahedron(degree)
        jac = abs(np.linalg.det(J))
    else:
        raise ValueError("simplex must be a triangle or tetrahedron")
    return a + ref @ J.T, w * jac


def segment_rule(edge: Edge, degree: int) -> QuadRule:
    s, w = reference_segment(degree)
    pts = edge.x1 + np.outer(s, edge.x2 - edge.x1)
    return QuadRule(pts, w * edge.length, degree, edge.length)


def face_rule(face: Face, degree: int) -> QuadRule:
    P, W = [], []
    for tri in face.triangles:
        p, w = simplex_rule(tri, degree)
        P.append(p)
        W.append(w)
    return QuadRule(np.concatenate(P), np.concatenate(W), degree, face.area)


def cell_rule(cell: Cell, degree: int) -> QuadRule:
    if cell.dim == 2:
        return face_rule(cell.faces[0], degree)
    P, W = [], []
    tiny = 1e-13 * cell.diameter**3
    for F, om in zip(cell.faces, cell.omega):
        for tri in F.triangles:
            a, b, c = tri if om > 0 else tri[::-1]
            vol = np.linalg.det(np.array([a - cell.apex, b - cell.apex, c - cell.apex]))
            if vol < -tiny:
                raise GeometryError(
                    f"cell {cell.id}: inverted sub-tetrahedron; the cell is not star-shaped "
                    "with respect to its centroid. Supply an interior point for this cell "
                    "under 'interior_points' in the mesh file."
                )
            if vol <= tiny:
                continue
            p, w = simplex_rule(np.array([cell.apex, a, b, c]), degree)
            P.append(p)
            W.append(w)
    return QuadRule(np.concatenate(P), np.concatenate(W), degree, cell.measure)

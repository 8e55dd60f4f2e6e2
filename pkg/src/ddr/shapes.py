"""Built-in test cells as mesh documents (the JSON mesh format as dicts)."""

from __future__ import annotations

import numpy as np


def _doc(vertices, faces, cells=None) -> dict:
    vertices = [[float(c) for c in v] for v in vertices]
    if cells is None:
        cells = [list(range(len(faces)))]
    return {"vertices": vertices, "faces": [list(f) for f in faces], "cells": cells}


def _polygon(xy) -> dict:
    return _doc([[x, y, 0.0] for x, y in xy], [list(range(len(xy)))], [[0]])


def triangle() -> dict:
    return _polygon([(0, 0), (1, 0), (0, 1)])


def square() -> dict:
    return _polygon([(0, 0), (1, 0), (1, 1), (0, 1)])


def rectangle() -> dict:
    return _polygon([(0, 0), (2, 0), (2, 1), (0, 1)])


def pentagon() -> dict:
    """Regular pentagon with circumradius 1."""
    a = 2 * np.pi * np.arange(5) / 5 + np.pi / 2
    return _polygon(np.stack([np.cos(a), np.sin(a)], axis=1))


def l_hexagon() -> dict:
    """Non-convex L-shaped hexagon."""
    return _polygon([(0, 0), (1, 0), (1, 0.5), (0.5, 0.5), (0.5, 1), (0, 1)])


def tetrahedron() -> dict:
    # loops deliberately mix inward and outward normals
    return _doc(
        [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]],
        [[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 3, 2]],
    )


def cube() -> dict:
    v = [[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0], [0, 0, 1], [1, 0, 1], [1, 1, 1], [0, 1, 1]]
    f = [[0, 3, 2, 1], [4, 5, 6, 7], [0, 1, 5, 4], [2, 3, 7, 6], [1, 2, 6, 5], [0, 4, 7, 3]]
    return _doc(v, f)


def hexahedron() -> dict:
    return cube()


def prism() -> dict:
    """Right triangular prism."""
    v = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 0, 1], [0, 1, 1]]
    f = [[0, 2, 1], [3, 4, 5], [0, 1, 4, 3], [1, 2, 5, 4], [0, 3, 5, 2]]
    return _doc(v, f)


def l_prism() -> dict:
    """Non-convex prism over the L-shaped hexagon (faces include two non-convex hexagons)."""
    xy = [(0, 0), (1, 0), (1, 0.5), (0.5, 0.5), (0.5, 1), (0, 1)]
    v = [[x, y, 0.0] for x, y in xy] + [[x, y, 1.0] for x, y in xy]
    f = [[5, 4, 3, 2, 1, 0], [6, 7, 8, 9, 10, 11]]
    for i in range(6):
        j = (i + 1) % 6
        f.append([i, j, j + 6, i + 6])
    return _doc(v, f)


def affine(doc: dict, A, b=None) -> dict:
    """Image of a mesh document under x -> A x + b."""
    A = np.asarray(A, float)
    b = np.zeros(3) if b is None else np.asarray(b, float)
    out = dict(doc)
    out["vertices"] = [list(A @ np.asarray(v) + b) for v in doc["vertices"]]
    return out


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] *= -1
    return q


def random_pentagon(rng: np.random.Generator) -> dict:
    """Star-shaped pentagon with jittered angles and radii, randomly placed in R^3."""
    a = np.sort(2 * np.pi * (np.arange(5) + rng.uniform(-0.3, 0.3, 5)) / 5)
    r = rng.uniform(0.6, 1.0, 5)
    doc = _polygon(np.stack([r * np.cos(a), r * np.sin(a)], axis=1))
    return affine(doc, random_rotation(rng), rng.uniform(-1, 1, 3))


def random_hexahedron(rng: np.random.Generator) -> dict:
    """Cube under a random well-conditioned affine map (faces stay planar)."""
    A = np.eye(3) + 0.3 * rng.uniform(-1, 1, (3, 3))
    return affine(cube(), random_rotation(rng) @ A, rng.uniform(-1, 1, 3))


SHAPES_2D = {
    "triangle": triangle,
    "square": square,
    "rectangle": rectangle,
    "pentagon": pentagon,
    "l_hexagon": l_hexagon,
}
SHAPES_3D = {
    "tetra": tetrahedron,
    "cube": cube,
    "hexa": hexahedron,
    "prism": prism,
    "l_prism": l_prism,
}
SHAPES = {**SHAPES_2D, **SHAPES_3D}


def shape_document(name: str) -> dict:
    """Mesh document of a built-in shape, tagged with its name."""
    if name not in SHAPES:
        raise KeyError(f"unknown shape {name!r}; choose from {sorted(SHAPES)}")
    doc = SHAPES[name]()
    doc["name"] = name
    return doc

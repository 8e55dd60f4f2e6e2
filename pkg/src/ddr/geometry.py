"""Polygonal and polyhedral cells with orientation bookkeeping.

Everything lives in R^3.  A polygon used as a two-dimensional cell is a
planar face whose normal is fixed by the order of its vertex loop.

Conventions
-----------
* Edge tangent ``t_E`` points from the lower to the higher vertex id.
* Face normal ``n_F`` comes from Newell's method over the loop, so the loop
  is counter-clockwise with respect to ``n_F``.
* ``n_FE = n_F x t_E`` and ``omega_FE`` is +1 when ``t_E`` runs against the
  counter-clockwise loop, so that ``omega_FE * n_FE`` points out of ``F``.
* ``omega_TF`` is +1 when ``n_F`` points out of ``T``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

PLANARITY_TOL = 1e-10


class GeometryError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Vertex:
    id: int
    x: np.ndarray


@dataclass(frozen=True, eq=False)
class Edge:
    id: int
    v1: int
    v2: int
    x1: np.ndarray
    x2: np.ndarray
    t: np.ndarray
    length: float

    @property
    def midpoint(self) -> np.ndarray:
        return 0.5 * (self.x1 + self.x2)


@dataclass(frozen=True, eq=False)
class Face:
    id: int
    loop: tuple[int, ...]
    points: np.ndarray  # loop coordinates, (m, 3)
    edges: tuple[Edge, ...]  # sorted by id
    omega: tuple[int, ...]  # omega_FE aligned with ``edges``
    normal: np.ndarray
    tau1: np.ndarray
    tau2: np.ndarray
    centroid: np.ndarray
    area: float
    diameter: float
    vertex_ids: tuple[int, ...]  # sorted
    vertex_coords: dict
    triangles: tuple[np.ndarray, ...]  # (3, 3) arrays, counter-clockwise w.r.t. normal

    def edge_normal(self, i: int) -> np.ndarray:
        """In-plane normal n_FE of the i-th edge (not multiplied by omega)."""
        return np.cross(self.normal, self.edges[i].t)

    def to_frame(self, vectors: np.ndarray) -> np.ndarray:
        """Tangential frame components of ambient vectors, shape (..., 2)."""
        return np.stack([vectors @ self.tau1, vectors @ self.tau2], axis=-1)

    def from_frame(self, comps: np.ndarray) -> np.ndarray:
        return comps[..., :1] * self.tau1 + comps[..., 1:2] * self.tau2


@dataclass(frozen=True, eq=False)
class Cell:
    id: int
    dim: int
    vertex_ids: tuple[int, ...]
    vertex_coords: dict
    edges: tuple[Edge, ...]
    faces: tuple[Face, ...]
    omega: tuple[int, ...]  # omega_TF aligned with ``faces``
    centroid: np.ndarray
    measure: float
    diameter: float
    apex: np.ndarray  # interior point used to split the cell into tetrahedra
    label: str = ""

    @property
    def n_vertices(self) -> int:
        return len(self.vertex_ids)


def face_frame(face: Face) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    return face.tau1, face.tau2, face.normal


def _diameter(pts: np.ndarray) -> float:
    d = pts[:, None, :] - pts[None, :, :]
    return float(np.sqrt((d**2).sum(-1)).max())


def _newell(pts: np.ndarray) -> np.ndarray:
    c = pts.mean(axis=0)
    p = pts - c
    return 0.5 * np.cross(p, np.roll(p, -1, axis=0)).sum(axis=0)


def _segments_cross(a, b, c, d, eps) -> bool:
    """Proper or touching intersection of closed 2D segments ab and cd."""

    def orient(p, q, r):
        return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])

    def on_seg(p, q, r):
        return min(p[0], q[0]) - eps <= r[0] <= max(p[0], q[0]) + eps and min(
            p[1], q[1]
        ) - eps <= r[1] <= max(p[1], q[1]) + eps

    o1, o2, o3, o4 = orient(a, b, c), orient(a, b, d), orient(c, d, a), orient(c, d, b)
    if ((o1 > eps and o2 < -eps) or (o1 < -eps and o2 > eps)) and (
        (o3 > eps and o4 < -eps) or (o3 < -eps and o4 > eps)
    ):
        return True
    for o, p, q, r in ((o1, a, b, c), (o2, a, b, d), (o3, c, d, a), (o4, c, d, b)):
        if abs(o) <= eps and on_seg(p, q, r):
            return True
    return False


def _signed_area2(a, b, c) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _ear_clip(uv: np.ndarray) -> list[tuple[int, int, int]]:
    idx = list(range(len(uv)))
    tris = []
    guard = 0
    while len(idx) > 3:
        guard += 1
        if guard > 10 * len(uv) ** 2:
            raise GeometryError("ear clipping failed; loop is likely self-intersecting")
        m = len(idx)
        for i in range(m):
            a, b, c = idx[i - 1], idx[i], idx[(i + 1) % m]
            if _signed_area2(uv[a], uv[b], uv[c]) <= 0:
                continue
            inside = False
            for j in idx:
                if j in (a, b, c):
                    continue
                p = uv[j]
                if (
                    _signed_area2(uv[a], uv[b], p) >= 0
                    and _signed_area2(uv[b], uv[c], p) >= 0
                    and _signed_area2(uv[c], uv[a], p) >= 0
                ):
                    inside = True
                    break
            if not inside:
                tris.append((a, b, c))
                idx.pop(i)
                break
        else:
            raise GeometryError("ear clipping found no ear; loop is likely self-intersecting")
    tris.append(tuple(idx))
    return tris


def _triangulate(points: np.ndarray, centroid: np.ndarray, tau1, tau2) -> tuple[np.ndarray, ...]:
    """Fan from the centroid when the polygon is star-shaped w.r.t. it, else ear clipping."""
    uv = np.stack([(points - centroid) @ tau1, (points - centroid) @ tau2], axis=1)
    m = len(uv)
    scale = np.abs(uv).max() ** 2
    fan_ok = all(_signed_area2(np.zeros(2), uv[i], uv[(i + 1) % m]) > 1e-12 * scale for i in range(m))
    if m == 3:
        return (points.copy(),)
    if fan_ok:
        return tuple(np.array([centroid, points[i], points[(i + 1) % m]]) for i in range(m))
    return tuple(points[list(t)] for t in _ear_clip(uv))


def _build_face(fid: int, loop, coords: dict, edge_lookup: dict) -> Face:
    loop = tuple(int(v) for v in loop)
    if len(loop) < 3:
        raise GeometryError(f"face {fid} has fewer than 3 vertices")
    if len(set(loop)) != len(loop):
        raise GeometryError(f"face {fid}: loop repeats a vertex (self-intersecting loop)")
    pts = np.array([coords[v] for v in loop], dtype=float)
    h = _diameter(pts)
    N = _newell(pts)
    area_guess = np.linalg.norm(N)
    if area_guess <= 1e-14 * h * h:
        raise GeometryError(f"face {fid}: degenerate normal")
    n = N / area_guess
    dist = np.abs((pts - pts.mean(axis=0)) @ n)
    if dist.max() > PLANARITY_TOL * h:
        raise GeometryError(
            f"face {fid} is not planar: max distance {dist.max():.3e} > {PLANARITY_TOL:g} * h_F"
        )
    t1 = pts[1] - pts[0]
    t1 = t1 - (t1 @ n) * n
    tau1 = t1 / np.linalg.norm(t1)
    tau2 = np.cross(n, tau1)

    m = len(loop)
    uv = np.stack([pts @ tau1, pts @ tau2], axis=1)
    for i in range(m):
        for j in range(i + 1, m):
            if j == i + 1 or (i == 0 and j == m - 1):
                continue
            if _segments_cross(uv[i], uv[(i + 1) % m], uv[j], uv[(j + 1) % m], 1e-12 * h * h):
                raise GeometryError(f"face {fid}: self-intersecting loop")

    # exact polygon centroid via signed triangles from an arbitrary point
    p0 = pts.mean(axis=0)
    areas, cents = [], []
    for i in range(m):
        a, b = pts[i], pts[(i + 1) % m]
        areas.append(0.5 * np.cross(a - p0, b - p0) @ n)
        cents.append((p0 + a + b) / 3.0)
    areas = np.array(areas)
    area = areas.sum()
    centroid = (areas[:, None] * np.array(cents)).sum(axis=0) / area

    edges, omega = [], []
    for i in range(m):
        a, b = loop[i], loop[(i + 1) % m]
        key = (min(a, b), max(a, b))
        if key not in edge_lookup:
            raise GeometryError(f"face {fid}: edge {key} not found")
        E = edge_lookup[key]
        # t_E along the counter-clockwise loop gives omega_FE = -1
        omega.append(-1 if a == E.v1 else 1)
        edges.append(E)
    order = np.argsort([E.id for E in edges], kind="stable")
    edges = tuple(edges[i] for i in order)
    omega = tuple(omega[i] for i in order)

    return Face(
        id=fid,
        loop=loop,
        points=pts,
        edges=edges,
        omega=omega,
        normal=n,
        tau1=tau1,
        tau2=tau2,
        centroid=centroid,
        area=float(area),
        diameter=h,
        vertex_ids=tuple(sorted(loop)),
        vertex_coords={v: coords[v] for v in loop},
        triangles=_triangulate(pts, centroid, tau1, tau2),
    )


def _make_edge(eid: int, a: int, b: int, coords: dict, scale: float) -> Edge:
    v1, v2 = (a, b) if a < b else (b, a)
    x1, x2 = np.asarray(coords[v1], float), np.asarray(coords[v2], float)
    length = float(np.linalg.norm(x2 - x1))
    if length <= 1e-14 * max(scale, 1.0):
        raise GeometryError(f"edge {eid} ({v1}, {v2}) is degenerate (zero length)")
    return Edge(id=eid, v1=v1, v2=v2, x1=x1, x2=x2, t=(x2 - x1) / length, length=length)


def _ray_hits(origin, direction, tri) -> bool:
    a, b, c = tri
    e1, e2 = b - a, c - a
    p = np.cross(direction, e2)
    det = e1 @ p
    if abs(det) < 1e-14:
        return False
    inv = 1.0 / det
    s = origin - a
    u = (s @ p) * inv
    if u < 0 or u > 1:
        return False
    q = np.cross(s, e1)
    v = (direction @ q) * inv
    if v < 0 or u + v > 1:
        return False
    return (e2 @ q) * inv > 0


def _edge_orientation_sums(faces, omega_tf) -> dict:
    sums: dict[int, int] = {}
    for F, wt in zip(faces, omega_tf):
        for E, wf in zip(F.edges, F.omega):
            sums[E.id] = sums.get(E.id, 0) + int(wt) * int(wf)
    return sums


def _orient_by_centroid(faces, center) -> list[int]:
    out = []
    for F in faces:
        s = F.normal @ (F.centroid - center)
        out.append(1 if s > 0 else -1 if s < 0 else 0)
    return out


def _orient_by_rays(faces) -> list[int]:
    direction_jitter = np.array([0.2718281828, 0.3141592653, 0.1618033988]) * 1e-3
    out = []
    for i, F in enumerate(faces):
        tri = F.triangles[0]
        p = tri.mean(axis=0) + 1e-7 * F.diameter * F.normal
        d = F.normal + direction_jitter
        d /= np.linalg.norm(d)
        hits = 0
        for j, G in enumerate(faces):
            if j == i:
                continue
            hits += sum(_ray_hits(p, d, t) for t in G.triangles)
        # odd count: the offset point is inside, so n_F points inward
        out.append(-1 if hits % 2 else 1)
    return out


def _cell_volume_centroid(faces, omega_tf):
    p0 = np.mean([F.centroid for F in faces], axis=0)
    vol, mom = 0.0, np.zeros(3)
    for F, w in zip(faces, omega_tf):
        for a, b, c in F.triangles:
            v = w * np.linalg.det(np.array([a - p0, b - p0, c - p0])) / 6.0
            vol += v
            mom += v * (p0 + a + b + c) / 4.0
    return vol, mom / vol


def _collect_edges(doc, face_loops, coords, scale):
    lookup = {}
    if doc.get("edges") is not None:
        for eid, (a, b) in enumerate(doc["edges"]):
            E = _make_edge(eid, int(a), int(b), coords, scale)
            lookup[(E.v1, E.v2)] = E
        return lookup
    keys = set()
    for loop in face_loops:
        m = len(loop)
        for i in range(m):
            a, b = int(loop[i]), int(loop[(i + 1) % m])
            keys.add((min(a, b), max(a, b)))
    for eid, (a, b) in enumerate(sorted(keys)):
        lookup[(a, b)] = _make_edge(eid, a, b, coords, scale)
    return lookup


def load_cell(document, cell_id: int = 0) -> Cell:
    """Build cell ``cell_id`` from a mesh document (dict or JSON text).

    A cell listing a single face is a polygon (two-dimensional cell).
    """
    doc = json.loads(document) if isinstance(document, str) else document
    verts = np.asarray(doc["vertices"], dtype=float)
    if verts.ndim != 2 or verts.shape[1] != 3 or not np.all(np.isfinite(verts)):
        raise GeometryError("vertices must be a list of finite [x, y, z] triples")
    all_faces = doc["faces"]
    cells = doc.get("cells") or [[i for i in range(len(all_faces))]]
    if not 0 <= cell_id < len(cells):
        raise GeometryError(f"cell id {cell_id} out of range (0..{len(cells) - 1})")
    face_ids = [int(f) for f in cells[cell_id]]
    for f in face_ids:
        if not 0 <= f < len(all_faces):
            raise GeometryError(f"cell {cell_id} references unknown face {f}")
    loops = [all_faces[f] for f in face_ids]
    for loop in loops:
        for v in loop:
            if not 0 <= int(v) < len(verts):
                raise GeometryError(f"face references unknown vertex {v}")
    used = sorted({int(v) for loop in loops for v in loop})
    name = doc.get("name")
    label = (name if len(cells) == 1 else f"{name}:{cell_id}") if name else f"cell{cell_id}"
    coords = {v: verts[v] for v in used}
    scale = _diameter(verts[used])

    edge_lookup = _collect_edges(doc, loops, coords, scale)
    faces = [_build_face(f, all_faces[f], coords, edge_lookup) for f in face_ids]
    order = np.argsort(face_ids, kind="stable")
    faces = [faces[i] for i in order]
    cell_edges = sorted({E.id: E for F in faces for E in F.edges}.values(), key=lambda E: E.id)

    if len(faces) == 1:
        F = faces[0]
        return Cell(
            id=cell_id,
            dim=2,
            vertex_ids=F.vertex_ids,
            vertex_coords=F.vertex_coords,
            edges=F.edges,
            faces=(F,),
            omega=(1,),
            centroid=F.centroid,
            measure=F.area,
            diameter=F.diameter,
            apex=F.centroid,
            label=label,
        )

    counts: dict[int, int] = {}
    for F in faces:
        for E in F.edges:
            counts[E.id] = counts.get(E.id, 0) + 1
    bad = [e for e, c in counts.items() if c != 2]
    if bad:
        raise GeometryError(f"cell {cell_id}: boundary is not closed (edges {bad} not shared by two faces)")
    V, E_, F_ = len(used), len(cell_edges), len(faces)
    if V - E_ + F_ != 2:
        raise GeometryError(
            f"cell {cell_id}: Euler characteristic V-E+F = {V - E_ + F_} != 2 (non-simply-connected input)"
        )

    vertex_avg = verts[used].mean(axis=0)
    omega = _orient_by_centroid(faces, vertex_avg)
    sums = _edge_orientation_sums(faces, omega)
    if 0 in omega or any(s != 0 for s in sums.values()):
        omega = _orient_by_rays(faces)
        sums = _edge_orientation_sums(faces, omega)
        if any(s != 0 for s in sums.values()):
            raise GeometryError(f"cell {cell_id}: could not determine consistent face orientations")
    vol, centroid = _cell_volume_centroid(faces, omega)
    if vol <= 0:
        raise GeometryError(f"cell {cell_id}: non-positive volume {vol}")

    apex = centroid
    interior = doc.get("interior_points")
    if interior is not None:
        p = interior.get(str(cell_id)) if isinstance(interior, dict) else interior[cell_id]
        if p is not None:
            apex = np.asarray(p, dtype=float)

    return Cell(
        id=cell_id,
        dim=3,
        vertex_ids=tuple(used),
        vertex_coords=coords,
        edges=tuple(cell_edges),
        faces=tuple(faces),
        omega=tuple(int(w) for w in omega),
        centroid=centroid,
        measure=float(vol),
        diameter=scale,
        apex=apex,
        label=label,
    )


def read_mesh(path) -> dict:
    path = Path(path)
    with path.open() as fh:
        return json.load(fh)


def n_cells(document) -> int:
    doc = json.loads(document) if isinstance(document, str) else document
    return len(doc.get("cells") or [None])


# --- orientation checks and fault injection -------------------------------


@dataclass(frozen=True)
class OrientationReport:
    edge_sums: dict
    random_sum: int
    righthanded_residual: float
    ok: bool


def check_orientation_identities(cell: Cell, rng: np.random.Generator | None = None) -> OrientationReport:
    """Cancellation of edge terms in the double sum over faces and edges.

    The omega products are integers, and so are the random edge values, so
    the reported sum is exact.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    sums = _edge_orientation_sums(cell.faces, cell.omega)
    a = {e: int(rng.integers(-1000, 1001)) for e in sums}
    total = sum(sums[e] * a[e] for e in sums)
    res = 0.0
    for F in cell.faces:
        for i, E in enumerate(F.edges):
            z = rng.standard_normal(3)
            # (n_F x z) . n_FE = z . t_E for the right-handed triple (t_E, n_FE, n_F)
            res = max(res, abs(np.cross(F.normal, z) @ F.edge_normal(i) - z @ E.t))
    ok = (cell.dim == 2 or (all(s == 0 for s in sums.values()) and total == 0)) and res <= 1e-13
    return OrientationReport(edge_sums=sums, random_sum=total, righthanded_residual=res, ok=ok)


def flip_face_orientation(cell: Cell, face_index: int) -> Cell:
    """Copy of ``cell`` with one omega_TF negated (deliberately corrupt)."""
    omega = list(cell.omega)
    omega[face_index] *= -1
    return replace(cell, omega=tuple(omega))


def flip_edge_orientation(cell: Cell, face_index: int, edge_index: int) -> Cell:
    """Copy of ``cell`` with one omega_FE negated on one face (deliberately corrupt)."""
    F = cell.faces[face_index]
    om = list(F.omega)
    om[edge_index] *= -1
    faces = list(cell.faces)
    faces[face_index] = replace(F, omega=tuple(om))
    return replace(cell, faces=tuple(faces))

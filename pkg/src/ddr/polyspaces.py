"""Orthonormal polynomial bases on segments, faces and cells.

Bases are hierarchical: the first ``dim P^m`` functions of a degree-l basis
span P^m for every m <= l.  L2 projection onto P^m is therefore a
truncation of coordinates, and a basis is built once at the highest degree
needed and truncated as required.

Derivatives are exact: they are computed on the raw (monomial) family and
mapped back through the triangular orthonormalization matrix, without
quadrature.

Vector-valued coordinates are component-major: all coefficients of the
first component, then the second, and so on.  Face vectors have two
components in the face frame (tau1, tau2); cell vectors have three
Cartesian components.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from math import comb

import numpy as np
from numpy.polynomial import legendre as npleg
from scipy.linalg import cholesky, solve_triangular

from .geometry import Cell, Edge, Face
from .quadrature import QuadRule, cell_rule, face_rule, segment_rule

RANK_TOL = 1e-10


class BasisError(RuntimeError):
    pass


class SubspaceDimensionError(RuntimeError):
    pass


def dim_p(degree: int, n: int) -> int:
    """dim P^degree in n variables (0 for negative degree)."""
    return comb(degree + n, n) if degree >= 0 else 0


# --- domains ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Domain:
    kind: str  # "edge" | "face" | "cell"
    geom: object
    center: np.ndarray
    axes: np.ndarray  # (n, 3), orthonormal rows
    scale: float
    measure: float
    _rules: dict = field(default_factory=dict, repr=False)

    @property
    def n(self) -> int:
        return len(self.axes)

    def local(self, pts: np.ndarray) -> np.ndarray:
        return (np.atleast_2d(pts) - self.center) @ self.axes.T / self.scale

    def rule(self, degree: int) -> QuadRule:
        degree = max(int(degree), 0)
        if degree not in self._rules:
            if self.kind == "edge":
                self._rules[degree] = segment_rule(self.geom, degree)
            elif self.kind == "face":
                self._rules[degree] = face_rule(self.geom, degree)
            else:
                self._rules[degree] = cell_rule(self.geom, degree)
        return self._rules[degree]


def edge_domain(edge: Edge) -> Domain:
    return Domain("edge", edge, edge.midpoint, edge.t[None, :], edge.length, edge.length)


def face_domain(face: Face) -> Domain:
    return Domain("face", face, face.centroid, np.stack([face.tau1, face.tau2]), face.diameter, face.area)


def cell_domain(cell: Cell) -> Domain:
    if cell.dim == 2:
        return face_domain(cell.faces[0])
    return Domain("cell", cell, cell.centroid, np.eye(3), cell.diameter, cell.measure)


# --- raw families ----------------------------------------------------------


def exponents(degree: int, n: int) -> np.ndarray:
    """Multi-indices ordered by total degree, lexicographically descending within a degree."""
    out = []
    for d in range(degree + 1):
        block = [a for a in np.ndindex(*(d + 1,) * n) if sum(a) == d]
        out.extend(sorted(block, reverse=True))
    return np.array(out, dtype=int).reshape(-1, n)


def _vander1d(family: str, x: np.ndarray, degree: int) -> np.ndarray:
    if family == "monomial":
        return np.vander(x, degree + 1, increasing=True)
    return npleg.legvander(x, degree)


def _der1d(family: str, degree: int) -> np.ndarray:
    """Matrix of d/dx on the raw 1D family: column j holds the coefficients of the derivative of function j."""
    D = np.zeros((degree + 1, degree + 1))
    for j in range(1, degree + 1):
        if family == "monomial":
            D[j - 1, j] = j
        else:
            e = np.zeros(j + 1)
            e[j] = 1.0
            d = npleg.legder(e)
            D[: len(d), j] = d
    return D


def _int1d(family: str, degree: int) -> np.ndarray:
    """Antiderivative on the raw 1D family, from degree ``degree`` to ``degree + 1``."""
    A = np.zeros((degree + 2, degree + 1))
    for j in range(degree + 1):
        if family == "monomial":
            A[j + 1, j] = 1.0 / (j + 1)
        else:
            e = np.zeros(j + 1)
            e[j] = 1.0
            a = npleg.legint(e)
            A[: len(a), j] = a
    return A


# --- bases -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PolyBasis:
    """L2-orthonormal basis of P^degree on a domain (per component).

    ``coeffs`` maps raw-family coordinates to orthonormal functions:
    phi_j = sum_i raw_i * coeffs[i, j]; it is upper triangular.
    """

    domain: Domain
    degree: int
    exps: np.ndarray
    coeffs: np.ndarray
    components: int = 1
    family: str = "monomial"
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def scalar_dim(self) -> int:
        return len(self.exps)

    @property
    def dim(self) -> int:
        return self.scalar_dim * self.components

    def size(self, degree: int) -> int:
        """Number of leading functions spanning P^degree."""
        return dim_p(degree, self.domain.n)

    def truncate(self, degree: int, components: int | None = None) -> "PolyBasis":
        m = self.size(degree)
        return PolyBasis(
            self.domain,
            degree,
            self.exps[:m],
            self.coeffs[:m, :m],
            self.components if components is None else components,
            self.family,
        )

    def with_components(self, components: int) -> "PolyBasis":
        return PolyBasis(self.domain, self.degree, self.exps, self.coeffs, components, self.family, self._cache)

    def _raw(self, pts: np.ndarray) -> np.ndarray:
        xi = self.domain.local(pts)
        V = np.ones((len(xi), len(self.exps)))
        for d in range(self.domain.n):
            v1 = _vander1d(self.family, xi[:, d], self.degree)
            V *= v1[:, self.exps[:, d]]
        return V

    def _raw_deriv(self, pts: np.ndarray, d: int) -> np.ndarray:
        xi = self.domain.local(pts)
        V = np.ones((len(xi), len(self.exps)))
        D1 = _der1d(self.family, self.degree)
        for e in range(self.domain.n):
            v1 = _vander1d(self.family, xi[:, e], self.degree)
            if e == d:
                v1 = v1 @ D1
            V *= v1[:, self.exps[:, e]]
        return V / self.domain.scale

    def eval(self, pts: np.ndarray) -> np.ndarray:
        """Scalar basis values, shape (npts, scalar_dim)."""
        return self._raw(pts) @ self.coeffs

    def grad(self, pts: np.ndarray) -> np.ndarray:
        """Derivatives along the domain axes, shape (npts, scalar_dim, n)."""
        return np.stack([self._raw_deriv(pts, d) @ self.coeffs for d in range(self.domain.n)], axis=-1)

    def _raw_derivative_matrix(self, d: int) -> np.ndarray:
        D1 = _der1d(self.family, self.degree)
        index = {tuple(a): i for i, a in enumerate(self.exps)}
        N = len(self.exps)
        D = np.zeros((N, N))
        for j, a in enumerate(self.exps):
            for p in range(a[d]):
                if D1[p, a[d]] == 0.0:
                    continue
                b = a.copy()
                b[d] = p
                D[index[tuple(b)], j] = D1[p, a[d]]
        return D

    def derivative(self, d: int) -> np.ndarray:
        """Column j: orthonormal coordinates of the derivative of phi_j along axis d (exact)."""
        key = ("D", d)
        if key not in self._cache:
            D = self._raw_derivative_matrix(d)
            self._cache[key] = solve_triangular(self.coeffs, D @ self.coeffs) / self.domain.scale
        return self._cache[key]

    def antiderivative(self) -> np.ndarray:
        """Edge bases only: maps P^{degree-1} coordinates to an antiderivative in P^degree coordinates."""
        if self.domain.n != 1:
            raise ValueError("antiderivative is defined for segment bases")
        A1 = _int1d(self.family, self.degree - 1)  # raw degree-1 -> raw degree
        C = self.coeffs
        m = self.degree
        return solve_triangular(C, A1 @ C[:m, :m]) * self.domain.scale

    def constant_coords(self, value: float = 1.0) -> np.ndarray:
        out = np.zeros(self.scalar_dim)
        out[0] = value / self.coeffs[0, 0]
        return out

    def poly(self, coords: np.ndarray) -> "Poly":
        return Poly(self, np.asarray(coords, float))


def build_basis(domain: Domain, degree: int, components: int = 1, family: str = "monomial") -> PolyBasis:
    """Orthonormal basis of P^degree on ``domain`` (Gram-Cholesky plus one refinement pass)."""
    n = domain.n
    exps = exponents(max(degree, -1), n) if degree >= 0 else np.zeros((0, n), dtype=int)
    basis = PolyBasis(domain, degree, exps, np.eye(len(exps)), components, family)
    if degree < 0:
        return basis
    rule = domain.rule(2 * degree)
    V = basis._raw(rule.points)
    C = np.eye(len(exps))
    for _ in range(2):
        Phi = V @ C
        G = Phi.T @ (rule.weights[:, None] * Phi)
        try:
            L = cholesky(G, lower=True)
        except np.linalg.LinAlgError as exc:
            raise BasisError(
                f"Gram matrix numerically singular on {domain.kind} (condition ~ {np.linalg.cond(G):.2e})"
            ) from exc
        C = C @ solve_triangular(L.T, np.eye(len(exps)))
    return PolyBasis(domain, degree, exps, C, components, family)


@dataclass(frozen=True, eq=False)
class Poly:
    """A polynomial given by coordinates in an orthonormal basis; vector coordinates are component-major."""

    basis: PolyBasis
    coords: np.ndarray

    @property
    def components(self) -> int:
        return len(self.coords) // self.basis.scalar_dim

    def _split(self) -> np.ndarray:
        return self.coords.reshape(self.components, self.basis.scalar_dim)

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        vals = self.basis.eval(pts) @ self._split().T
        if self.components == 1:
            return vals[:, 0]
        return vals

    def ambient(self, pts: np.ndarray) -> np.ndarray:
        """Vector values in R^3 (frame components mapped through the domain axes)."""
        vals = self.basis.eval(pts) @ self._split().T
        return vals @ self.basis.domain.axes if self.components == self.basis.domain.n else vals

    def grad_ambient(self, pts: np.ndarray) -> np.ndarray:
        """Gradient of a scalar polynomial as R^3 vectors (tangential for faces)."""
        g = np.einsum("pjd,j->pd", self.basis.grad(pts), self.coords)
        return g @ self.basis.domain.axes


# --- vector bookkeeping ----------------------------------------------------


def vector_embedding(n_small: int, n_big: int, comps: int) -> np.ndarray:
    """0/1 matrix embedding component-major P^small coordinates into P^big coordinates."""
    E = np.zeros((comps * n_big, comps * n_small))
    for c in range(comps):
        E[c * n_big + np.arange(n_small), c * n_small + np.arange(n_small)] = 1.0
    return E


def vector_truncation(n_big: int, n_small: int, comps: int) -> np.ndarray:
    return vector_embedding(n_small, n_big, comps).T


# --- differential operators on coordinates --------------------------------


def _D(basis: PolyBasis, d: int, frm: int, to: int) -> np.ndarray:
    return basis.derivative(d)[: basis.size(to), : basis.size(frm)]


def grad_matrix(basis: PolyBasis, frm: int, to: int) -> np.ndarray:
    """Gradient (along domain axes) from P^frm to P^to vectors."""
    return np.vstack([_D(basis, d, frm, to) for d in range(basis.domain.n)])


def div_matrix(basis: PolyBasis, frm: int, to: int) -> np.ndarray:
    return np.hstack([_D(basis, d, frm, to) for d in range(basis.domain.n)])


def vrot_matrix(basis: PolyBasis, frm: int, to: int) -> np.ndarray:
    """Face only: vrot r = rotation by -pi/2 of the gradient, (a, b) -> (b, -a)."""
    return np.vstack([_D(basis, 1, frm, to), -_D(basis, 0, frm, to)])


def rot_matrix(basis: PolyBasis, frm: int, to: int) -> np.ndarray:
    """Face only: scalar rot v = d1 v2 - d2 v1."""
    return np.hstack([-_D(basis, 1, frm, to), _D(basis, 0, frm, to)])


def curl_matrix(basis: PolyBasis, frm: int, to: int) -> np.ndarray:
    n_to, n_frm = basis.size(to), basis.size(frm)
    D = [_D(basis, d, frm, to) for d in range(3)]
    Z = np.zeros((n_to, n_frm))
    return np.block([[Z, -D[2], D[1]], [D[2], Z, -D[0]], [-D[1], D[0], Z]])


# --- subspaces -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SubspaceBasis:
    """Orthonormal columns in component-major coordinates of P^degree vectors on ``basis.domain``."""

    basis: PolyBasis  # any basis of degree >= ``degree``; only its leading functions are used
    degree: int
    components: int
    matrix: np.ndarray
    tag: str

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def in_degree(self, degree: int) -> np.ndarray:
        """The same columns expressed in P^degree coordinates (degree >= self.degree)."""
        n_small, n_big = self.basis.size(self.degree), self.basis.size(degree)
        return vector_embedding(n_small, n_big, self.components) @ self.matrix


def orthonormal_image(A: np.ndarray, expected_rank: int, rank_tol: float = RANK_TOL, what: str = ""):
    """Orthonormal bases of range(A) and its orthogonal complement via a full SVD."""
    m = A.shape[0]
    if m == 0:
        return np.zeros((0, 0)), np.zeros((0, 0))
    if A.shape[1] == 0:
        U, r = np.eye(m), 0
    else:
        U, s, _ = np.linalg.svd(A, full_matrices=True)
        r = int((s > rank_tol * s[0]).sum()) if s.size and s[0] > 0 else 0
    if r != expected_rank:
        raise SubspaceDimensionError(f"{what}: numerical rank {r} differs from expected {expected_rank}")
    return U[:, :r], U[:, r:]


def expected_dims(kind: str, degree: int) -> dict:
    """Closed-form dimensions of G, R and complements in P^degree vectors."""
    if degree < 0:
        return {"G": 0, "Gperp": 0, "R": 0, "Rperp": 0}
    if kind == "face":
        g = dim_p(degree + 1, 2) - 1
        tot = 2 * dim_p(degree, 2)
        return {"G": g, "Gperp": tot - g, "R": g, "Rperp": tot - g}
    g = dim_p(degree + 1, 3) - 1
    r = 3 * dim_p(degree + 1, 3) - (dim_p(degree + 2, 3) - 1)
    tot = 3 * dim_p(degree, 3)
    return {"G": g, "Gperp": tot - g, "R": r, "Rperp": tot - r}


class Subspaces:
    """Lazily built G, G-perp, R, R-perp on a face or cell basis."""

    def __init__(self, basis: PolyBasis, rank_tol: float = RANK_TOL):
        if basis.domain.kind not in ("face", "cell"):
            raise ValueError("subspaces are defined on faces and cells")
        self.basis = basis
        self.rank_tol = rank_tol
        self.kind = basis.domain.kind
        self.comps = basis.domain.n
        self._store: dict = {}

    def _build(self, family: str, degree: int):
        key = (family, degree)
        if key in self._store:
            return self._store[key]
        B = self.basis
        if degree + 1 > B.degree:
            raise ValueError(f"basis degree {B.degree} too low for subspaces of degree {degree}")
        exp = expected_dims(self.kind, degree)
        if degree < 0:
            A = np.zeros((0, 0))
        elif family == "G":
            A = grad_matrix(B, degree + 1, degree)
        elif self.kind == "face":
            A = vrot_matrix(B, degree + 1, degree)
        else:
            A = curl_matrix(B, degree + 1, degree)
        img, perp = orthonormal_image(A, exp[family], self.rank_tol, f"{family}^{degree}({self.kind})")
        out = (
            SubspaceBasis(B, degree, self.comps, img, family),
            SubspaceBasis(B, degree, self.comps, perp, family + "perp"),
        )
        self._store[key] = out
        return out

    def G(self, degree: int) -> SubspaceBasis:
        return self._build("G", degree)[0]

    def Gperp(self, degree: int) -> SubspaceBasis:
        return self._build("G", degree)[1]

    def R(self, degree: int) -> SubspaceBasis:
        return self._build("R", degree)[0]

    def Rperp(self, degree: int) -> SubspaceBasis:
        return self._build("R", degree)[1]


def build_subspaces(basis: PolyBasis, degree: int, rank_tol: float = RANK_TOL) -> dict:
    S = Subspaces(basis, rank_tol)
    return {"G": S.G(degree), "Gperp": S.Gperp(degree), "R": S.R(degree), "Rperp": S.Rperp(degree)}


# --- projection ------------------------------------------------------------


def l2_project(f, basis: PolyBasis, degree: int | None = None, components: int = 1, quad_degree: int | None = None):
    """Coordinates of the L2 projection of ``f`` onto P^degree (component-major for vectors).

    ``f`` maps points (npts, 3) to values (npts,) or (npts, components).
    Vector values are taken in the domain frame as returned by ``f``.
    """
    degree = basis.degree if degree is None else degree
    if degree < 0:
        return np.zeros(0)
    qd = 2 * degree + 3 if quad_degree is None else quad_degree
    rule = basis.domain.rule(qd)
    phi = basis.eval(rule.points)[:, : basis.size(degree)]
    vals = np.asarray(f(rule.points), float)
    if vals.ndim == 1:
        vals = vals[:, None]
    out = (phi * rule.weights[:, None]).T @ vals  # (N, comps)
    return out.T.ravel()


def mass_between(b1: PolyBasis, d1: int, b2: PolyBasis, d2: int, rule: QuadRule, weight=None) -> np.ndarray:
    """Matrix of integrals of phi_i psi_j over the rule's domain (P^d1 on b1 times P^d2 on b2)."""
    p = b1.eval(rule.points)[:, : b1.size(d1)]
    q = b2.eval(rule.points)[:, : b2.size(d2)]
    w = rule.weights if weight is None else rule.weights * weight
    return (p * w[:, None]).T @ q


# --- continuous traces on the edge skeleton -------------------------------


class TraceError(ValueError):
    pass


class TraceBasis:
    """Continuous piecewise P^degree functions on a set of edges.

    DOFs: for every edge (ascending id) the moments against the first
    ``degree - 1`` orthonormal edge functions, then the value at every
    vertex (ascending id).  ``reconstruction[e]`` maps DOFs to the
    orthonormal P^degree(E) coordinates of the function on edge ``e``.
    """

    def __init__(self, edges, degree: int, edge_bases: dict):
        if degree < 1:
            raise ValueError("trace degree must be at least 1")
        self.edges = tuple(sorted(edges, key=lambda E: E.id))
        self.degree = degree
        self.edge_bases = edge_bases
        self.n_moments = degree - 1
        self.vertex_ids = tuple(sorted({v for E in self.edges for v in (E.v1, E.v2)}))
        self._check_connected()
        nE = len(self.edges)
        self.edge_offset = {E.id: i * self.n_moments for i, E in enumerate(self.edges)}
        self.vertex_offset = {v: nE * self.n_moments + i for i, v in enumerate(self.vertex_ids)}
        self.n_dofs = nE * self.n_moments + len(self.vertex_ids)
        self.reconstruction = {E.id: self._edge_reconstruction(E) for E in self.edges}

    def _check_connected(self):
        adj = {v: set() for v in self.vertex_ids}
        for E in self.edges:
            adj[E.v1].add(E.v2)
            adj[E.v2].add(E.v1)
        seen, stack = set(), [self.vertex_ids[0]]
        while stack:
            v = stack.pop()
            if v in seen:
                continue
            seen.add(v)
            stack.extend(adj[v] - seen)
        if len(seen) != len(self.vertex_ids):
            raise TraceError("boundary edge graph is disconnected")

    def _edge_reconstruction(self, E: Edge) -> np.ndarray:
        B = self.edge_bases[E.id]
        m, n = self.n_moments, self.degree + 1
        M = np.zeros((n, n))
        M[:m, :m] = np.eye(m)
        M[m] = B.eval(E.x1[None])[0, :n]
        M[m + 1] = B.eval(E.x2[None])[0, :n]
        sel = np.zeros((n, self.n_dofs))
        o = self.edge_offset[E.id]
        sel[np.arange(m), o + np.arange(m)] = 1.0
        sel[m, self.vertex_offset[E.v1]] = 1.0
        sel[m + 1, self.vertex_offset[E.v2]] = 1.0
        return np.linalg.solve(M, sel)

    def interpolate(self, q, quad_degree: int | None = None) -> np.ndarray:
        """Edge moments and vertex values of a function q: (npts, 3) -> (npts,)."""
        out = np.zeros(self.n_dofs)
        qd = 2 * self.degree + 3 if quad_degree is None else quad_degree
        for E in self.edges:
            if self.n_moments:
                B = self.edge_bases[E.id]
                out[self.edge_offset[E.id] + np.arange(self.n_moments)] = l2_project(
                    q, B, self.n_moments - 1, quad_degree=qd
                )
        verts = {}
        for E in self.edges:
            verts[E.v1], verts[E.v2] = E.x1, E.x2
        pts = np.array([verts[v] for v in self.vertex_ids])
        vals = np.asarray(q(pts), float)
        for v, val in zip(self.vertex_ids, vals):
            out[self.vertex_offset[v]] = val
        return out

    def dof_map_matrix(self) -> np.ndarray:
        """DOF functionals applied to the reconstructed functions of every DOF basis vector."""
        out = np.zeros((self.n_dofs, self.n_dofs))
        m = self.n_moments
        for E in self.edges:
            R = self.reconstruction[E.id]
            out[self.edge_offset[E.id] + np.arange(m)] = R[:m]
        for v in self.vertex_ids:
            vals = []
            for E in self.edges:
                if v in (E.v1, E.v2):
                    x = E.x1 if v == E.v1 else E.x2
                    B = self.edge_bases[E.id]
                    vals.append(B.eval(x[None])[0, : self.degree + 1] @ self.reconstruction[E.id])
            out[self.vertex_offset[v]] = vals[0]
        return out

    def continuity_defect(self) -> float:
        """Largest jump at a vertex between values of incident edges, over all DOF basis vectors."""
        worst = 0.0
        for v in self.vertex_ids:
            vals = []
            for E in self.edges:
                if v in (E.v1, E.v2):
                    x = E.x1 if v == E.v1 else E.x2
                    B = self.edge_bases[E.id]
                    vals.append(B.eval(x[None])[0, : self.degree + 1] @ self.reconstruction[E.id])
            vals = np.array(vals)
            worst = max(worst, float(np.abs(vals - vals[0]).max()))
        return worst


def build_trace_basis(edges, degree: int, edge_bases: dict | None = None) -> TraceBasis:
    if edge_bases is None:
        edge_bases = {E.id: build_basis(edge_domain(E), degree) for E in edges}
    return TraceBasis(edges, degree, edge_bases)

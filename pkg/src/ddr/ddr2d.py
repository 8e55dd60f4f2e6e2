"""Discrete grad-rot sequence on a polygon.

Spaces and layouts (k >= 0):

* ``Xgrad(F)``: block ``F`` holds P^{k-1}(F) coordinates, then for every
  edge (ascending id) ``k`` moments of the boundary function, then one
  value per vertex (ascending id).
* ``Xrot(F)``: ``F:R`` holds coordinates in R^{k-1}(F), ``F:Rperp`` in the
  complement of R^k(F), then P^k(E) coordinates for every edge.

Face vectors are stored in the face frame (tau1, tau2).  The "full" rot
space replaces the two face blocks by all of P^k(F)^2.  All operators are
dense matrices acting on these coordinate vectors.
"""

from __future__ import annotations

from functools import cached_property, lru_cache

import numpy as np
from scipy.linalg import block_diag

from .geometry import Face
from .layout import Block, DofLayout
from .polyspaces import (
    RANK_TOL,
    Subspaces,
    TraceBasis,
    build_basis,
    dim_p,
    div_matrix,
    edge_domain,
    face_domain,
    l2_project,
    mass_between,
    vector_embedding,
    vrot_matrix,
)


class IncompatibleDataError(ValueError):
    pass


def edge_bases_for(edges, k: int, family: str = "monomial") -> dict:
    return {E.id: build_basis(edge_domain(E), k + 1, family=family) for E in edges}


def _solve(A: np.ndarray, B: np.ndarray, what: str) -> np.ndarray:
    """Dense QR solve of a square system, refusing numerically singular matrices."""
    if A.shape[0] == 0:
        return np.zeros((0, B.shape[1]))
    Q, R = np.linalg.qr(A)
    d = np.abs(np.diag(R))
    if d.min() <= 1e-13 * d.max():
        raise np.linalg.LinAlgError(f"{what}: defining system is singular")
    return np.linalg.solve(R, Q.T @ B)


class FaceSequence:
    """All discrete objects of the grad-rot sequence of degree ``k`` on a face."""

    def __init__(self, face: Face, k: int, edge_bases: dict | None = None, rank_tol: float = RANK_TOL,
                 alternative: bool = False, family: str = "monomial"):
        if k < 0:
            raise ValueError("degree k must be non-negative")
        self.face = face
        self.k = k
        self.alternative = alternative
        self.domain = face_domain(face)
        self.basis = build_basis(self.domain, k + 3, family=family)
        self.edge_bases = edge_bases if edge_bases is not None else edge_bases_for(face.edges, k, family)
        self.sub = Subspaces(self.basis, rank_tol)
        self.trace = TraceBasis(face.edges, k + 1, self.edge_bases)
        self.nP = lambda m: dim_p(m, 2)
        self._mass: dict = {}

    # --- layouts -----------------------------------------------------------

    @cached_property
    def grad_layout(self) -> DofLayout:
        k = self.k
        blocks = [Block("F", "F", self.nP(k - 1))]
        blocks += [Block(f"E{E.id}", "E", k) for E in self.trace.edges]
        blocks += [Block(f"V{v}", "V", 1) for v in self.trace.vertex_ids]
        return DofLayout("Xgrad", tuple(blocks))

    @cached_property
    def rot_layout(self) -> DofLayout:
        k = self.k
        blocks = [Block("F:R", "F", self.R.shape[1]), Block("F:Rperp", "F", self.Rperp.shape[1])]
        blocks += [Block(f"E{E.id}", "E", k + 1) for E in self.face.edges]
        return DofLayout("Xrot", tuple(blocks))

    @cached_property
    def full_rot_layout(self) -> DofLayout:
        k = self.k
        blocks = [Block("F:full", "F", 2 * self.nP(k))]
        blocks += [Block(f"E{E.id}", "E", k + 1) for E in self.face.edges]
        return DofLayout("Xrot_full", tuple(blocks))

    @property
    def n_grad(self) -> int:
        return self.grad_layout.dim

    @property
    def n_rot(self) -> int:
        return self.rot_layout.dim

    @property
    def n_edges(self) -> int:
        return len(self.face.edges)

    # --- subspace matrices in P^k(F)^2 coordinates -------------------------

    @cached_property
    def R(self) -> np.ndarray:
        return self.sub.R(self.k - 1).in_degree(self.k)

    @cached_property
    def Rperp(self) -> np.ndarray:
        return self.sub.Rperp(self.k).matrix

    @cached_property
    def S(self) -> np.ndarray:
        """Columns of R^{k-1} then R^k-perp, in P^k(F)^2 coordinates."""
        return np.hstack([self.R, self.Rperp])

    @cached_property
    def embed_rot(self) -> np.ndarray:
        """Xrot -> full rot space."""
        return block_diag(self.S, np.eye(self.n_edges * (self.k + 1)))

    # --- integrals ------------------------------------------------------------

    def edge_mass(self, i: int, face_degree: int, edge_degree: int) -> np.ndarray:
        """Integrals over edge i of face basis (P^face_degree) times edge basis (P^edge_degree)."""
        key = (i, face_degree, edge_degree)
        if key not in self._mass:
            E = self.face.edges[i]
            B = self.edge_bases[E.id]
            rule = B.domain.rule(face_degree + edge_degree)
            self._mass[key] = mass_between(self.basis, face_degree, B, edge_degree, rule)
        return self._mass[key]

    def trace_columns(self, i: int) -> np.ndarray:
        """Maps Xgrad DOFs to P^{k+1}(E) coordinates of the boundary function on edge i."""
        E = self.face.edges[i]
        out = np.zeros((self.k + 2, self.n_grad))
        out[:, self.nP(self.k - 1):] = self.trace.reconstruction[E.id]
        return out

    def edge_columns(self, i: int) -> np.ndarray:
        """Selects the P^k(E) block of edge i from an Xrot vector."""
        E = self.face.edges[i]
        return self.rot_layout.selector([f"E{E.id}"])

    def _boundary_flux(self, m: int) -> np.ndarray:
        """Rows indexed by P^m(F)^2: sum over edges of omega_FE * int_E q_dF (phi e_c . n_FE)."""
        n = self.nP(m)
        out = np.zeros((2 * n, self.n_grad))
        for i in range(self.n_edges):
            nu = self.face.to_frame(self.face.edge_normal(i))
            blk = self.face.omega[i] * self.edge_mass(i, m, self.k + 1) @ self.trace_columns(i)
            out[:n] += nu[0] * blk
            out[n:] += nu[1] * blk
        return out

    # --- gradient -------------------------------------------------------------

    @cached_property
    def full_gradient(self) -> np.ndarray:
        """G_F^full: Xgrad -> P^k(F)^2."""
        k, B = self.k, self.basis
        nk, nkm1 = self.nP(k), self.nP(k - 1)
        out = self._boundary_flux(k)
        for c in range(2):
            out[c * nk:(c + 1) * nk, :nkm1] -= B.derivative(c)[:nkm1, :nk].T
        return out

    @cached_property
    def edge_gradient(self) -> np.ndarray:
        """G_dF: Xgrad -> prod_E P^k(E), the edgewise derivative along t_E."""
        k = self.k
        rows = []
        for i, E in enumerate(self.face.edges):
            D = self.edge_bases[E.id].derivative(0)[: k + 1, : k + 2]
            rows.append(D @ self.trace_columns(i))
        return np.vstack(rows)

    @cached_property
    def full_uG(self) -> np.ndarray:
        """Xgrad -> full rot space (P^k(F)^2 x edges)."""
        return np.vstack([self.full_gradient, self.edge_gradient])

    @cached_property
    def uG(self) -> np.ndarray:
        """Discrete gradient Xgrad -> Xrot."""
        return np.vstack([self.S.T @ self.full_gradient, self.edge_gradient])

    # --- curl -----------------------------------------------------------------

    @cached_property
    def full_curl(self) -> np.ndarray:
        """C_F^full: full rot space -> P^k(F)."""
        k, B = self.k, self.basis
        nk = self.nP(k)
        vol = np.hstack([B.derivative(1)[:nk, :nk].T, -B.derivative(0)[:nk, :nk].T])
        edges = [-self.face.omega[i] * self.edge_mass(i, k, k) for i in range(self.n_edges)]
        return np.hstack([vol] + edges)

    @cached_property
    def C(self) -> np.ndarray:
        """Discrete curl Xrot -> P^k(F)."""
        return self.full_curl @ self.embed_rot

    # --- potentials -----------------------------------------------------------

    @cached_property
    def scalar_trace(self) -> np.ndarray:
        """gamma_F: Xgrad -> P^{k+1}(F)."""
        k = self.k
        Sp = self.sub.Rperp(k + 2).matrix
        A = (div_matrix(self.basis, k + 2, k + 1) @ Sp).T
        E = vector_embedding(self.nP(k), self.nP(k + 2), 2)
        rhs = -Sp.T @ (E @ self.full_gradient) + Sp.T @ self._boundary_flux(k + 2)
        out = _solve(A, rhs, "scalar trace")
        nkm1 = self.nP(k - 1)
        out[:nkm1] = 0.0
        out[np.arange(nkm1), np.arange(nkm1)] = 1.0
        return out

    @cached_property
    def tangential_trace_standard(self) -> np.ndarray:
        k = self.k
        nk, nk1 = self.nP(k), self.nP(k + 1)
        rows_a = vrot_matrix(self.basis, k + 1, k)[:, 1:].T
        rhs_a = np.zeros((nk1, self.n_rot))
        rhs_a[:nk] = self.C
        for i in range(self.n_edges):
            rhs_a += self.face.omega[i] * self.edge_mass(i, k + 1, k) @ self.edge_columns(i)
        rows_b = self.Rperp.T
        rhs_b = self.rot_layout.selector(["F:Rperp"])
        return _solve(np.vstack([rows_a, rows_b]), np.vstack([rhs_a[1:], rhs_b]), "tangential trace")

    @cached_property
    def tangential_trace(self) -> np.ndarray:
        """gamma_t,F: Xrot -> P^k(F)^2 (frame components)."""
        g = self.tangential_trace_standard
        if not self.alternative:
            return g
        return g - self.R @ (self.R.T @ g) + self.R @ self.rot_layout.selector(["F:R"])

    # --- interpolators ----------------------------------------------------------

    def interp_grad(self, q, quad_degree: int | None = None) -> np.ndarray:
        qd = 2 * self.k + 3 if quad_degree is None else quad_degree
        return np.concatenate([l2_project(q, self.basis, self.k - 1, quad_degree=qd),
                               self.trace.interpolate(q, qd)])

    def _tangential_parts(self, v, quad_degree):
        F = self.face
        qd = 2 * self.k + 3 if quad_degree is None else quad_degree
        face = l2_project(lambda p: F.to_frame(v(p)), self.basis, self.k, components=2, quad_degree=qd)
        edges = [l2_project(lambda p, E=E: v(p) @ E.t, self.edge_bases[E.id], self.k, quad_degree=qd)
                 for E in F.edges]
        return face, np.concatenate(edges)

    def interp_rot(self, v, quad_degree: int | None = None) -> np.ndarray:
        """v maps points to R^3 vectors; its tangential part is interpolated."""
        face, edges = self._tangential_parts(v, quad_degree)
        return np.concatenate([self.S.T @ face, edges])

    def interp_rot_full(self, v, quad_degree: int | None = None) -> np.ndarray:
        face, edges = self._tangential_parts(v, quad_degree)
        return np.concatenate([face, edges])

    def interp_grad_matrix(self, m: int) -> np.ndarray:
        """Interpolator restricted to P^m(F), acting on orthonormal coordinates."""
        k = self.k
        n = self.nP(m)
        out = np.zeros((self.n_grad, n))
        nkm1 = self.nP(k - 1)
        out[:nkm1, :min(nkm1, n)] = np.eye(nkm1, min(nkm1, n))
        lay = self.grad_layout
        for i, E in enumerate(self.face.edges):
            if k:
                out[lay.slice(f"E{E.id}")] = self.edge_mass(i, m, k - 1).T
        for v in self.trace.vertex_ids:
            out[lay.slice(f"V{v}")] = self.basis.eval(self.face.vertex_coords[v][None])[:, :n]
        return out

    def interp_rot_matrix(self) -> np.ndarray:
        """Interpolator restricted to P^k(F)^2 (frame coordinates)."""
        k = self.k
        nk = self.nP(k)
        rows = [self.S.T]
        for i, E in enumerate(self.face.edges):
            tc = self.face.to_frame(E.t)
            M = self.edge_mass(i, k, k).T
            rows.append(np.hstack([tc[0] * M, tc[1] * M]))
        out = np.vstack(rows)
        assert out.shape == (self.n_rot, 2 * nk)
        return out

    # --- L2 products -------------------------------------------------------------

    @cached_property
    def grad_gram(self) -> np.ndarray:
        k = self.k
        G = self.scalar_trace
        delta = self.interp_grad_matrix(k + 1) @ G - np.eye(self.n_grad)
        nkm1 = self.nP(k - 1)
        out = G.T @ G + delta[:nkm1].T @ delta[:nkm1]
        dtr = delta[nkm1:]
        for E in self.face.edges:
            e = self.trace.reconstruction[E.id] @ dtr
            out += self.face.diameter * e.T @ e
        return 0.5 * (out + out.T)

    @cached_property
    def rot_gram(self) -> np.ndarray:
        g = self.tangential_trace
        delta = self.interp_rot_matrix() @ g - np.eye(self.n_rot)
        nf = self.S.shape[1]
        out = g.T @ g + delta[:nf].T @ delta[:nf] + self.face.diameter * delta[nf:].T @ delta[nf:]
        return 0.5 * (out + out.T)

    # --- constructive lifting of boundary gradients --------------------------------

    def edge_integrals(self, r: np.ndarray) -> np.ndarray:
        """Integral over each edge of the P^k(E) function stored in edge coordinates r."""
        k = self.k
        out = []
        for i, E in enumerate(self.face.edges):
            c1 = self.edge_bases[E.id].constant_coords(1.0)[: k + 1]
            out.append(r[i * (k + 1):(i + 1) * (k + 1)] @ c1)
        return np.array(out)

    def lift_boundary_gradient(self, r: np.ndarray, tol: float = 1e-10) -> np.ndarray:
        """Trace DOFs q_dF with G_dF q = r, by integrating r around the loop.

        Requires sum_E omega_FE int_E r_E = 0; raises IncompatibleDataError otherwise.
        """
        k, F = self.k, self.face
        ints = self.edge_integrals(r)
        lengths = np.array([E.length for E in F.edges])
        scale = np.sum(np.sqrt(lengths) * np.abs(r).reshape(self.n_edges, k + 1).max(axis=1)) + 1e-300
        mismatch = float(np.dot(F.omega, ints))
        if abs(mismatch) > tol * scale:
            raise IncompatibleDataError(
                f"boundary data violates the zero-sum condition: sum omega_FE int_E r = {mismatch:.3e}"
            )
        pos = {E.id: i for i, E in enumerate(F.edges)}
        lookup = {(E.v1, E.v2): E for E in F.edges}
        values = {F.loop[0]: 0.0}
        edge_polys = {}
        m = len(F.loop)
        for j in range(m):
            a, b = F.loop[j], F.loop[(j + 1) % m]
            E = lookup[(min(a, b), max(a, b))]
            i = pos[E.id]
            B = self.edge_bases[E.id]
            Q = B.antiderivative() @ r[i * (k + 1):(i + 1) * (k + 1)]
            q1, q2 = B.eval(np.array([E.x1, E.x2])) @ Q
            if a == E.v1:
                shift = values[a] - q1
                end = q2 + shift
            else:
                shift = values[a] - q2
                end = q1 + shift
            Q = Q + shift * B.constant_coords(1.0)
            edge_polys[E.id] = Q
            if j < m - 1:
                values[b] = end
        dofs = np.zeros(self.trace.n_dofs)
        for E in F.edges:
            dofs[self.trace.edge_offset[E.id] + np.arange(k)] = edge_polys[E.id][:k]
        for v in self.trace.vertex_ids:
            dofs[self.trace.vertex_offset[v]] = values[v]
        return dofs


@lru_cache(maxsize=256)
def face_sequence(face: Face, k: int) -> FaceSequence:
    return FaceSequence(face, k)


def interp_grad_2d(q, face: Face, k: int) -> np.ndarray:
    return face_sequence(face, k).interp_grad(q)


def full_gradient_2d(face: Face, k: int) -> tuple[np.ndarray, np.ndarray]:
    s = face_sequence(face, k)
    return s.full_gradient, s.edge_gradient


def discrete_gradient_2d(face: Face, k: int) -> np.ndarray:
    return face_sequence(face, k).uG


def discrete_curl_2d(face: Face, k: int) -> np.ndarray:
    return face_sequence(face, k).C


def scalar_trace_2d(face: Face, k: int) -> np.ndarray:
    return face_sequence(face, k).scalar_trace


def tangential_trace_2d(face: Face, k: int) -> np.ndarray:
    return face_sequence(face, k).tangential_trace


def l2_products_2d(face: Face, k: int) -> tuple[np.ndarray, np.ndarray]:
    s = face_sequence(face, k)
    return s.grad_gram, s.rot_gram


__all__ = [
    "FaceSequence",
    "IncompatibleDataError",
    "face_sequence",
    "interp_grad_2d",
    "full_gradient_2d",
    "discrete_gradient_2d",
    "discrete_curl_2d",
    "scalar_trace_2d",
    "tangential_trace_2d",
    "l2_products_2d",
]

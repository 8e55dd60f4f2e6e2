"""Discrete grad-curl-div sequence on a polyhedron.

Layouts (faces in ascending id order, then edges, then vertices):

* ``Xgrad(T)``: ``T`` in P^{k-1}(T); ``F<id>`` in P^{k-1}(F); ``E<id>`` holds
  ``k`` edge moments; ``V<id>`` one vertex value.
* ``Xcurl(T)``: ``T:R`` in R^{k-1}(T), ``T:Rperp`` in the complement of
  R^k(T); ``F<id>:R`` and ``F<id>:Rperp`` as on the face; ``E<id>`` in P^k(E).
* ``Xdiv(T)``: ``T:G`` in G^{k-1}(T), ``T:Gperp`` in the complement of
  G^k(T); ``F<id>`` in P^k(F).

Restricting an Xcurl vector to the blocks of one face (and its edges)
gives that face's Xrot vector, so face operators are reused verbatim.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .ddr2d import FaceSequence, IncompatibleDataError, _solve, edge_bases_for
from .geometry import Cell
from .layout import Block, DofLayout
from .polyspaces import (
    RANK_TOL,
    SubspaceBasis,
    Subspaces,
    TraceBasis,
    build_basis,
    cell_domain,
    curl_matrix,
    dim_p,
    div_matrix,
    grad_matrix,
    l2_project,
    mass_between,
    orthonormal_image,
    vector_embedding,
)

_EPS = np.zeros((3, 3, 3))
_EPS[0, 1, 2] = _EPS[1, 2, 0] = _EPS[2, 0, 1] = 1.0
_EPS[0, 2, 1] = _EPS[2, 1, 0] = _EPS[1, 0, 2] = -1.0


@dataclass(frozen=True, eq=False)
class TrimmedFE:
    nedelec: SubspaceBasis
    raviart_thomas: SubspaceBasis


def nedelec_dim(k: int) -> int:
    return (k + 1) * (k + 3) * (k + 4) // 2


def raviart_thomas_dim(k: int) -> int:
    return (k + 1) * (k + 2) * (k + 4) // 2


class CellSequence:
    """All discrete objects of the grad-curl-div sequence of degree ``k`` on a polyhedron."""

    def __init__(self, cell: Cell, k: int, rank_tol: float = RANK_TOL, alternative: bool = False,
                 family: str = "monomial"):
        if cell.dim != 3:
            raise ValueError("CellSequence needs a three-dimensional cell")
        if k < 0:
            raise ValueError("degree k must be non-negative")
        self.cell = cell
        self.k = k
        self.rank_tol = rank_tol
        self.alternative = alternative
        self.domain = cell_domain(cell)
        self.basis = build_basis(self.domain, k + 3, family=family)
        self.edge_bases = edge_bases_for(cell.edges, k, family)
        self.faces = [FaceSequence(F, k, self.edge_bases, rank_tol, alternative, family) for F in cell.faces]
        self.trace = TraceBasis(cell.edges, k + 1, self.edge_bases)
        self.sub = Subspaces(self.basis, rank_tol)
        self.nP = lambda m: dim_p(m, 3)
        self.nP2 = lambda m: dim_p(m, 2)
        self._mass: dict = {}

    # --- layouts -----------------------------------------------------------

    @cached_property
    def grad_layout(self) -> DofLayout:
        k = self.k
        blocks = [Block("T", "T", self.nP(k - 1))]
        blocks += [Block(f"F{F.id}", "F", self.nP2(k - 1)) for F in self.cell.faces]
        blocks += [Block(f"E{E.id}", "E", k) for E in self.trace.edges]
        blocks += [Block(f"V{v}", "V", 1) for v in self.trace.vertex_ids]
        return DofLayout("Xgrad", tuple(blocks))

    @cached_property
    def curl_layout(self) -> DofLayout:
        blocks = [Block("T:R", "T", self.RT.shape[1]), Block("T:Rperp", "T", self.RTperp.shape[1])]
        for F, fs in zip(self.cell.faces, self.faces):
            blocks += [Block(f"F{F.id}:R", "F", fs.R.shape[1]), Block(f"F{F.id}:Rperp", "F", fs.Rperp.shape[1])]
        blocks += [Block(f"E{E.id}", "E", self.k + 1) for E in self.cell.edges]
        return DofLayout("Xcurl", tuple(blocks))

    @cached_property
    def div_layout(self) -> DofLayout:
        blocks = [Block("T:G", "T", self.GT.shape[1]), Block("T:Gperp", "T", self.GTperp.shape[1])]
        blocks += [Block(f"F{F.id}", "F", self.nP2(self.k)) for F in self.cell.faces]
        return DofLayout("Xdiv", tuple(blocks))

    @property
    def n_grad(self) -> int:
        return self.grad_layout.dim

    @property
    def n_curl(self) -> int:
        return self.curl_layout.dim

    @property
    def n_div(self) -> int:
        return self.div_layout.dim

    # --- subspaces in P^k(T)^3 coordinates -----------------------------------

    @cached_property
    def RT(self) -> np.ndarray:
        return self.sub.R(self.k - 1).in_degree(self.k)

    @cached_property
    def RTperp(self) -> np.ndarray:
        return self.sub.Rperp(self.k).matrix

    @cached_property
    def GT(self) -> np.ndarray:
        return self.sub.G(self.k - 1).in_degree(self.k)

    @cached_property
    def GTperp(self) -> np.ndarray:
        return self.sub.Gperp(self.k).matrix

    @cached_property
    def S_curl(self) -> np.ndarray:
        return np.hstack([self.RT, self.RTperp])

    @cached_property
    def S_div(self) -> np.ndarray:
        return np.hstack([self.GT, self.GTperp])

    # --- restrictions to faces ---------------------------------------------------

    def grad_restriction(self, i: int) -> np.ndarray:
        """Xgrad(T) -> Xgrad(F) for the i-th face."""
        F, fs = self.cell.faces[i], self.faces[i]
        names = [f"F{F.id}" if b.name == "F" else b.name for b in fs.grad_layout.blocks]
        return self.grad_layout.selector(names)

    def curl_restriction(self, i: int) -> np.ndarray:
        """Xcurl(T) -> Xrot(F) for the i-th face."""
        F, fs = self.cell.faces[i], self.faces[i]
        names = [f"F{F.id}" + b.name[1:] if b.name.startswith("F:") else b.name for b in fs.rot_layout.blocks]
        return self.curl_layout.selector(names)

    @property
    def trace_offset(self) -> int:
        return self.nP(self.k - 1) + len(self.cell.faces) * self.nP2(self.k - 1)

    def trace_columns(self, E) -> np.ndarray:
        """Maps Xgrad DOFs to P^{k+1}(E) coordinates of the boundary function on edge E."""
        out = np.zeros((self.k + 2, self.n_grad))
        out[:, self.trace_offset:] = self.trace.reconstruction[E.id]
        return out

    # --- integrals -----------------------------------------------------------

    def face_mass(self, i: int, cell_degree: int, face_degree: int) -> np.ndarray:
        key = ("F", i, cell_degree, face_degree)
        if key not in self._mass:
            fs = self.faces[i]
            rule = fs.domain.rule(cell_degree + face_degree)
            self._mass[key] = mass_between(self.basis, cell_degree, fs.basis, face_degree, rule)
        return self._mass[key]

    def edge_mass(self, E, cell_degree: int, edge_degree: int) -> np.ndarray:
        key = ("E", E.id, cell_degree, edge_degree)
        if key not in self._mass:
            B = self.edge_bases[E.id]
            rule = B.domain.rule(cell_degree + edge_degree)
            self._mass[key] = mass_between(self.basis, cell_degree, B, edge_degree, rule)
        return self._mass[key]

    def _normal_flux(self, m: int) -> np.ndarray:
        """Rows P^m(T)^3: sum_F omega_TF int_F gamma_F(q) (phi e_c . n_F)."""
        n = self.nP(m)
        out = np.zeros((3 * n, self.n_grad))
        for i, (F, w) in enumerate(zip(self.cell.faces, self.cell.omega)):
            fs = self.faces[i]
            blk = w * self.face_mass(i, m, self.k + 1) @ fs.scalar_trace @ self.grad_restriction(i)
            for c in range(3):
                out[c * n:(c + 1) * n] += F.normal[c] * blk
        return out

    def tangential_pairing(self, i: int, m: int) -> np.ndarray:
        """Rows P^m(T)^3, columns frame coordinates of P^k(F)^2: int_F w_F . (phi e_c x n_F)."""
        F = self.cell.faces[i]
        n, nk2 = self.nP(m), self.nP2(self.k)
        M = self.face_mass(i, m, self.k)
        out = np.zeros((3 * n, 2 * nk2))
        for c in range(3):
            mu = F.to_frame(np.cross(np.eye(3)[c], F.normal))
            out[c * n:(c + 1) * n] = np.hstack([mu[0] * M, mu[1] * M])
        return out

    def _tangential_flux(self, m: int) -> np.ndarray:
        """Rows P^m(T)^3: sum_F omega_TF int_F gamma_t,F(v) . (phi e_c x n_F)."""
        out = np.zeros((3 * self.nP(m), self.n_curl))
        for i, w in enumerate(self.cell.omega):
            gt = self.faces[i].tangential_trace @ self.curl_restriction(i)
            out += w * self.tangential_pairing(i, m) @ gt
        return out

    # --- gradient ------------------------------------------------------------

    @cached_property
    def full_gradient(self) -> np.ndarray:
        """G_T^full: Xgrad(T) -> P^k(T)^3."""
        k, B = self.k, self.basis
        nk, nkm1 = self.nP(k), self.nP(k - 1)
        out = self._normal_flux(k)
        for c in range(3):
            out[c * nk:(c + 1) * nk, :nkm1] -= B.derivative(c)[:nkm1, :nk].T
        return out

    @cached_property
    def edge_gradient(self) -> np.ndarray:
        k = self.k
        rows = []
        for E in self.cell.edges:
            D = self.edge_bases[E.id].derivative(0)[: k + 1, : k + 2]
            rows.append(D @ self.trace_columns(E))
        return np.vstack(rows)

    @cached_property
    def uG(self) -> np.ndarray:
        """Discrete gradient Xgrad(T) -> Xcurl(T)."""
        rows = [self.S_curl.T @ self.full_gradient]
        for i, fs in enumerate(self.faces):
            rows.append(fs.uG[: fs.S.shape[1]] @ self.grad_restriction(i))
        rows.append(self.edge_gradient)
        return np.vstack(rows)

    # --- curl ----------------------------------------------------------------

    @cached_property
    def full_curl(self) -> np.ndarray:
        """C_T^full: Xcurl(T) -> P^k(T)^3."""
        k = self.k
        out = self._tangential_flux(k)
        vol = curl_matrix(self.basis, k, k).T @ self.S_curl
        out[:, self.curl_layout.indices(["T:R", "T:Rperp"])] += vol
        return out

    @cached_property
    def uC(self) -> np.ndarray:
        """Discrete curl Xcurl(T) -> Xdiv(T)."""
        rows = [self.S_div.T @ self.full_curl]
        for i, fs in enumerate(self.faces):
            rows.append(fs.C @ self.curl_restriction(i))
        return np.vstack(rows)

    # --- divergence --------------------------------------------------------------

    @cached_property
    def D(self) -> np.ndarray:
        """Discrete divergence Xdiv(T) -> P^k(T)."""
        k = self.k
        out = np.zeros((self.nP(k), self.n_div))
        out[:, self.div_layout.indices(["T:G", "T:Gperp"])] = -grad_matrix(self.basis, k, k).T @ self.S_div
        for i, (F, w) in enumerate(zip(self.cell.faces, self.cell.omega)):
            out[:, self.div_layout.slice(f"F{F.id}")] += w * self.face_mass(i, k, k)
        return out

    # --- potentials --------------------------------------------------------------

    @cached_property
    def P_grad(self) -> np.ndarray:
        """Scalar potential Xgrad(T) -> P^{k+1}(T)."""
        k = self.k
        Sp = self.sub.Rperp(k + 2).matrix
        A = (div_matrix(self.basis, k + 2, k + 1) @ Sp).T
        E = vector_embedding(self.nP(k), self.nP(k + 2), 3)
        rhs = -Sp.T @ (E @ self.full_gradient) + Sp.T @ self._normal_flux(k + 2)
        P = _solve(A, rhs, "scalar potential")
        if self.alternative:
            n = self.nP(k - 1)
            P[:n] = self.grad_layout.selector(["T"])
        return P

    @cached_property
    def P_curl(self) -> np.ndarray:
        """Vector potential Xcurl(T) -> P^k(T)^3."""
        k = self.k
        Gp = self.sub.Gperp(k + 1).matrix
        rows_a = (curl_matrix(self.basis, k + 1, k) @ Gp).T
        E = vector_embedding(self.nP(k), self.nP(k + 1), 3)
        rhs_a = Gp.T @ (E @ self.full_curl) - Gp.T @ self._tangential_flux(k + 1)
        rows_b = self.RTperp.T
        rhs_b = self.curl_layout.selector(["T:Rperp"])
        P = _solve(np.vstack([rows_a, rows_b]), np.vstack([rhs_a, rhs_b]), "curl potential")
        if self.alternative:
            P = P - self.RT @ (self.RT.T @ P) + self.RT @ self.curl_layout.selector(["T:R"])
        return P

    @cached_property
    def P_div(self) -> np.ndarray:
        """Vector potential Xdiv(T) -> P^k(T)^3."""
        k = self.k
        nk, nk1 = self.nP(k), self.nP(k + 1)
        rows_a = grad_matrix(self.basis, k + 1, k)[:, 1:].T
        rhs_a = np.zeros((nk1, self.n_div))
        rhs_a[:nk] = -self.D
        for i, (F, w) in enumerate(zip(self.cell.faces, self.cell.omega)):
            rhs_a[:, self.div_layout.slice(f"F{F.id}")] += w * self.face_mass(i, k + 1, k)
        rows_b = self.GTperp.T
        rhs_b = self.div_layout.selector(["T:Gperp"])
        P = _solve(np.vstack([rows_a, rows_b]), np.vstack([rhs_a[1:], rhs_b]), "div potential")
        if self.alternative:
            P = P - self.GT @ (self.GT.T @ P) + self.GT @ self.div_layout.selector(["T:G"])
        return P

    # --- interpolators -------------------------------------------------------------

    def interp_grad(self, q, quad_degree: int | None = None) -> np.ndarray:
        k = self.k
        qd = 2 * k + 3 if quad_degree is None else quad_degree
        parts = [l2_project(q, self.basis, k - 1, quad_degree=qd)]
        parts += [l2_project(q, fs.basis, k - 1, quad_degree=qd) for fs in self.faces]
        parts.append(self.trace.interpolate(q, qd))
        return np.concatenate(parts)

    def interp_curl(self, v, quad_degree: int | None = None) -> np.ndarray:
        """v maps points (n, 3) to vectors (n, 3)."""
        k = self.k
        qd = 2 * k + 3 if quad_degree is None else quad_degree
        parts = [self.S_curl.T @ l2_project(v, self.basis, k, components=3, quad_degree=qd)]
        for F, fs in zip(self.cell.faces, self.faces):
            pf = l2_project(lambda p, F=F: F.to_frame(v(p)), fs.basis, k, components=2, quad_degree=qd)
            parts.append(fs.S.T @ pf)
        for E in self.cell.edges:
            parts.append(l2_project(lambda p, E=E: v(p) @ E.t, self.edge_bases[E.id], k, quad_degree=qd))
        return np.concatenate(parts)

    def interp_div(self, v, quad_degree: int | None = None) -> np.ndarray:
        k = self.k
        qd = 2 * k + 3 if quad_degree is None else quad_degree
        parts = [self.S_div.T @ l2_project(v, self.basis, k, components=3, quad_degree=qd)]
        for F, fs in zip(self.cell.faces, self.faces):
            parts.append(l2_project(lambda p, F=F: v(p) @ F.normal, fs.basis, k, quad_degree=qd))
        return np.concatenate(parts)

    def interpolate(self, f, target: str, quad_degree: int | None = None) -> np.ndarray:
        return {"grad": self.interp_grad, "curl": self.interp_curl, "div": self.interp_div}[target](f, quad_degree)

    def interp_grad_matrix(self, m: int) -> np.ndarray:
        """Interpolator on P^m(T) acting on orthonormal coordinates."""
        k = self.k
        n = self.nP(m)
        lay = self.grad_layout
        out = np.zeros((self.n_grad, n))
        nkm1 = self.nP(k - 1)
        out[:nkm1, :min(n, nkm1)] = np.eye(nkm1, min(n, nkm1))
        for i, F in enumerate(self.cell.faces):
            out[lay.slice(f"F{F.id}")] = self.face_mass(i, m, k - 1).T
        for E in self.cell.edges:
            if k:
                out[lay.slice(f"E{E.id}")] = self.edge_mass(E, m, k - 1).T
        for v in self.trace.vertex_ids:
            out[lay.slice(f"V{v}")] = self.basis.eval(self.cell.vertex_coords[v][None])[:, :n]
        return out

    def _face_tangential_matrix(self, i: int) -> np.ndarray:
        """P^k(T)^3 -> frame coordinates of the tangential projection in P^k(F)^2."""
        F = self.cell.faces[i]
        M = self.face_mass(i, self.k, self.k).T
        return np.block([[F.tau1[c] * M for c in range(3)], [F.tau2[c] * M for c in range(3)]])

    def interp_curl_matrix(self) -> np.ndarray:
        k = self.k
        rows = [self.S_curl.T]
        for i, fs in enumerate(self.faces):
            rows.append(fs.S.T @ self._face_tangential_matrix(i))
        for E in self.cell.edges:
            M = self.edge_mass(E, k, k).T
            rows.append(np.hstack([E.t[c] * M for c in range(3)]))
        return np.vstack(rows)

    def face_normal_matrix(self, i: int) -> np.ndarray:
        F = self.cell.faces[i]
        M = self.face_mass(i, self.k, self.k).T
        return np.hstack([F.normal[c] * M for c in range(3)])

    def interp_div_matrix(self) -> np.ndarray:
        rows = [self.S_div.T] + [self.face_normal_matrix(i) for i in range(len(self.faces))]
        return np.vstack(rows)

    # --- L2 products ---------------------------------------------------------------

    @cached_property
    def grad_gram(self) -> np.ndarray:
        k, h = self.k, self.cell.diameter
        P = self.P_grad
        delta = self.interp_grad_matrix(k + 1) @ P - np.eye(self.n_grad)
        lay = self.grad_layout
        dT = delta[lay.slice("T")]
        out = P.T @ P + dT.T @ dT
        for F in self.cell.faces:
            dF = delta[lay.slice(f"F{F.id}")]
            out += h * dF.T @ dF
        dtr = delta[self.trace_offset:]
        for E in self.cell.edges:
            e = self.trace.reconstruction[E.id] @ dtr
            out += h**2 * e.T @ e
        return 0.5 * (out + out.T)

    @cached_property
    def curl_gram(self) -> np.ndarray:
        h = self.cell.diameter
        P = self.P_curl
        delta = self.interp_curl_matrix() @ P - np.eye(self.n_curl)
        lay = self.curl_layout
        dR = delta[lay.slice("T:R")]
        out = P.T @ P + dR.T @ dR
        for F in self.cell.faces:
            dF = delta[lay.indices([f"F{F.id}:R", f"F{F.id}:Rperp"])]
            out += h * dF.T @ dF
        for E in self.cell.edges:
            dE = delta[lay.slice(f"E{E.id}")]
            out += h**2 * dE.T @ dE
        return 0.5 * (out + out.T)

    @cached_property
    def div_gram(self) -> np.ndarray:
        h = self.cell.diameter
        P = self.P_div
        out = P.T @ P
        for i, F in enumerate(self.cell.faces):
            dF = self.face_normal_matrix(i) @ P - self.div_layout.selector([f"F{F.id}"])
            out += h * dF.T @ dF
        return 0.5 * (out + out.T)

    # --- trimmed finite element spaces ---------------------------------------------------

    @cached_property
    def trimmed(self) -> TrimmedFE:
        k = self.k
        n1, nk = self.nP(k + 1), self.nP(k)
        rule = self.domain.rule(2 * k + 3)
        phi = self.basis.eval(rule.points)[:, :n1]
        X = rule.points - self.cell.centroid
        Ma = [(phi * (rule.weights * X[:, a])[:, None]).T @ phi[:, :nk] for a in range(3)]
        base = vector_embedding(nk, n1, 3)
        ned = np.zeros((3 * n1, 3 * nk))
        for cp in range(3):
            for c in range(3):
                blk = sum(_EPS[cp, a, c] * Ma[a] for a in range(3))
                ned[cp * n1:(cp + 1) * n1, c * nk:(c + 1) * nk] = blk
        rt = np.vstack(Ma)
        N, _ = orthonormal_image(np.hstack([base, ned]), nedelec_dim(k), self.rank_tol, "Nedelec")
        R, _ = orthonormal_image(np.hstack([base, rt]), raviart_thomas_dim(k), self.rank_tol, "Raviart-Thomas")
        return TrimmedFE(
            SubspaceBasis(self.basis, k + 1, 3, N, "N"),
            SubspaceBasis(self.basis, k + 1, 3, R, "RT"),
        )

    # --- constructive lifting of boundary curls ----------------------------------------

    def lift_boundary_curl(self, v_faces, tol: float = 1e-10):
        """Boundary DOFs z (an Xcurl(T) vector with zero cell blocks) with C_F z_F = v_F on every face.

        Requires sum_F omega_TF int_F v_F = 0; raises IncompatibleDataError otherwise.
        """
        k, cell = self.k, self.cell
        ints = np.array([v @ fs.basis.constant_coords(1.0)[: self.nP2(k)] for v, fs in zip(v_faces, self.faces)])
        scale = sum(np.sqrt(F.area) * np.abs(v).max() for F, v in zip(cell.faces, v_faces)) + 1e-300
        total = float(np.dot(cell.omega, ints))
        if abs(total) > tol * scale:
            raise IncompatibleDataError(
                f"face data violates the compatibility condition: sum omega_TF int_F v_F = {total:.3e}"
            )
        w = [np.linalg.lstsq(fs.C, v, rcond=None)[0] for fs, v in zip(self.faces, v_faces)]

        def edge_part(i, E):
            fs = self.faces[i]
            return w[i][fs.rot_layout.slice(f"E{E.id}")]

        owners = {E.id: [i for i, F in enumerate(cell.faces) if E in F.edges] for E in cell.edges}
        W = {}
        for E in cell.edges:
            a, b = owners[E.id]
            W[(a, E.id)] = 0.5 * (edge_part(b, E) - edge_part(a, E))
            W[(b, E.id)] = 0.5 * (edge_part(a, E) - edge_part(b, E))

        eidx = {E.id: j for j, E in enumerate(cell.edges)}
        A = np.zeros((len(cell.faces), len(cell.edges)))
        rhs = np.zeros(len(cell.faces))
        for i, (F, wt) in enumerate(zip(cell.faces, cell.omega)):
            for E, wf in zip(F.edges, F.omega):
                c1 = self.edge_bases[E.id].constant_coords(1.0)[: k + 1]
                A[i, eidx[E.id]] = wt * wf * E.length
                rhs[i] -= wt * wf * (W[(i, E.id)] @ c1)
        solv = abs(rhs.sum())
        if solv > tol * (np.abs(rhs).sum() + scale):
            raise IncompatibleDataError(f"edge correction system is not solvable (defect {solv:.3e})")
        r = np.linalg.lstsq(A, rhs, rcond=None)[0]

        z = np.zeros(self.n_curl)
        lay = self.curl_layout
        for i, (F, fs) in enumerate(zip(cell.faces, self.faces)):
            y_edges = np.concatenate([
                r[eidx[E.id]] * self.edge_bases[E.id].constant_coords(1.0)[: k + 1] + W[(i, E.id)]
                for E in F.edges
            ])
            q = np.concatenate([np.zeros(fs.nP(k - 1)), fs.lift_boundary_gradient(y_edges, tol)])
            zF = w[i] + fs.uG @ q
            for b in fs.rot_layout.blocks:
                name = f"F{F.id}" + b.name[1:] if b.name.startswith("F:") else b.name
                z[lay.slice(name)] = zF[fs.rot_layout.slice(b.name)]
        return z


@lru_cache(maxsize=64)
def cell_sequence(cell: Cell, k: int) -> CellSequence:
    return CellSequence(cell, k)


def interp_3d(f, cell: Cell, k: int, target: str) -> np.ndarray:
    return cell_sequence(cell, k).interpolate(f, target)


def gradient_3d(cell: Cell, k: int):
    s = cell_sequence(cell, k)
    return s.full_gradient, s.uG


def curl_3d(cell: Cell, k: int):
    s = cell_sequence(cell, k)
    return s.full_curl, s.uC


def divergence_3d(cell: Cell, k: int) -> np.ndarray:
    return cell_sequence(cell, k).D


def potentials_3d(cell: Cell, k: int):
    s = cell_sequence(cell, k)
    return s.P_grad, s.P_curl, s.P_div


def l2_products_3d(cell: Cell, k: int):
    s = cell_sequence(cell, k)
    return s.grad_gram, s.curl_gram, s.div_gram


def trimmed_fe_spaces(cell: Cell, k: int) -> TrimmedFE:
    return cell_sequence(cell, k).trimmed

"""Machine-runnable checks of the structural properties of the discrete sequences.

Every check yields a :class:`CheckResult`.  Identity residuals are relative:
``||lhs - rhs|| / (||A|| ||x||)`` with ``A`` the operator under test and ``x``
its input, so pass criteria do not depend on degree or cell size.
"""

from __future__ import annotations

import json
import time
import zlib
from dataclasses import asdict, dataclass, field
from importlib import resources

import numpy as np

from .ddr2d import FaceSequence, IncompatibleDataError
from .ddr3d import CellSequence
from .geometry import Cell, load_cell
from .polyspaces import (
    RANK_TOL,
    curl_matrix,
    dim_p,
    div_matrix,
    grad_matrix,
    rot_matrix,
    vector_embedding,
)
from .shapes import shape_document

SANE_RANK_TOL = 1e-6


@dataclass
class CheckResult:
    name: str
    cell: str
    k: int
    status: str  # "pass" or "fail"
    residual: float = 0.0
    expected: int | None = None
    actual: int | None = None
    elapsed: float = 0.0
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.status == "pass"


@dataclass
class VerifyConfig:
    tol: float = 1e-10
    gram_tol: float = 1e-11
    rank_tol: float = RANK_TOL
    n_samples: int = 20
    n_surjectivity: int = 10
    seed: int = 0


# --- numerical helpers ----------------------------------------------------------


def rank(A: np.ndarray, tol: float = RANK_TOL) -> int:
    if A.size == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    return int(np.sum(s > tol * s[0])) if s[0] > 0 else 0


def null_space(A: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    if A.shape[0] == 0:
        return np.eye(A.shape[1])
    _, s, Vt = np.linalg.svd(A)
    r = int(np.sum(s > tol * s[0])) if s.size and s[0] > 0 else 0
    return Vt[r:].T


def subspace_residual(A: np.ndarray, basis: np.ndarray) -> float:
    """Relative size of the part of col(A) outside the span of the orthonormal columns of basis."""
    nA = np.linalg.norm(A)
    if nA == 0:
        return 0.0
    return float(np.linalg.norm(A - basis @ (basis.T @ A)) / nA)


def rel_residual(diff: np.ndarray, *scales: float) -> float:
    s = float(np.prod(scales))
    return float(np.linalg.norm(diff) / s) if s > 0 else float(np.linalg.norm(diff))


def op_norm(A: np.ndarray) -> float:
    return float(np.linalg.norm(A, 2)) if A.size else 0.0


def _rng(seed: int, name: str, k: int, salt: str) -> np.random.Generator:
    return np.random.default_rng([seed, k, zlib.crc32(name.encode()), zlib.crc32(salt.encode())])


class _Recorder:
    """Collects timed results for one (cell, k)."""

    def __init__(self, cell: str, k: int):
        self.cell, self.k = cell, k
        self.results: list[CheckResult] = []
        self._t = time.perf_counter()

    def _stamp(self) -> float:
        now = time.perf_counter()
        dt, self._t = now - self._t, now
        return dt

    def residual(self, name: str, value: float, tol: float, detail: str = ""):
        ok = bool(np.isfinite(value) and value <= tol)
        self.results.append(CheckResult(name, self.cell, self.k, "pass" if ok else "fail", float(value),
                                        elapsed=self._stamp(), detail=detail))

    def integer(self, name: str, expected: int, actual: int, detail: str = ""):
        self.results.append(CheckResult(name, self.cell, self.k, "pass" if expected == actual else "fail",
                                        float(abs(expected - actual)), int(expected), int(actual),
                                        self._stamp(), detail))

    def flag(self, name: str, ok: bool, detail: str = ""):
        self.results.append(CheckResult(name, self.cell, self.k, "pass" if ok else "fail", 0.0 if ok else 1.0,
                                        elapsed=self._stamp(), detail=detail))


def _guard(rec: _Recorder, fn, *args):
    """Runs a check body; any exception becomes a failed result instead of aborting the suite."""
    try:
        fn(rec, *args)
    except Exception as exc:  # noqa: BLE001
        rec.flag(f"{fn.__name__}:error", False, f"{type(exc).__name__}: {exc}")


def tolerance_sanity(cfg: VerifyConfig, cell: str = "-", k: int = -1) -> list[CheckResult]:
    """Rejects tolerances too loose to distinguish rank-deficient from full-rank matrices."""
    rec = _Recorder(cell, k)
    rec.flag("tolerance:rank_tol", 0 < cfg.rank_tol <= SANE_RANK_TOL,
             f"rank_tol={cfg.rank_tol:g} (must be in (0, {SANE_RANK_TOL:g}])")
    rec.flag("tolerance:tol", 0 < cfg.tol <= SANE_RANK_TOL, f"tol={cfg.tol:g} (must be in (0, {SANE_RANK_TOL:g}])")
    return rec.results


# --- sequence construction --------------------------------------------------------


def build_sequence(cell: Cell, k: int, cfg: VerifyConfig):
    if cell.dim == 2:
        return FaceSequence(cell.faces[0], k, rank_tol=cfg.rank_tol)
    return CellSequence(cell, k, rank_tol=cfg.rank_tol)


def _pad(basis, coords: np.ndarray, degree: int, comps: int = 1):
    """Poly object for component-major P^degree coordinates."""
    n, N = dim_p(degree, basis.domain.n), basis.scalar_dim
    out = np.zeros(comps * N)
    for c in range(comps):
        out[c * N:c * N + n] = coords[c * n:(c + 1) * n]
    return basis.poly(out)


def _uniform(rng, n):
    return rng.uniform(-1.0, 1.0, n)


def _name(cell: Cell) -> str:
    return cell.label or f"cell{cell.id}"


# --- exactness -------------------------------------------------------------------


def _kernel_is_constant(rec, uG, I1, tol, rank_tol, prefix):
    N = null_space(uG, rank_tol)
    rec.integer(f"{prefix}:nullity(uG)", 1, N.shape[1])
    if N.shape[1] == 1:
        e = I1 / np.linalg.norm(I1)
        v = N[:, 0]
        rec.residual(f"{prefix}:ker(uG)=I(R)", float(np.linalg.norm(v - (v @ e) * e)), tol)


def _exactness_2d(rec, fs: FaceSequence, cfg: VerifyConfig, prefix="2d"):
    k = fs.k
    uG, C = fs.uG, fs.C
    _kernel_is_constant(rec, uG, fs.interp_grad(lambda p: np.ones(len(p))), cfg.tol, cfg.rank_tol, prefix)
    NC = null_space(C, cfg.rank_tol)
    rec.integer(f"{prefix}:rank(uG)=nullity(C)", NC.shape[1], rank(uG, cfg.rank_tol))
    rec.residual(f"{prefix}:Im(uG)=Ker(C)", subspace_residual(uG, NC), cfg.tol)
    rec.integer(f"{prefix}:rank(C)=dimP", dim_p(k, 2), rank(C, cfg.rank_tol))
    rec.integer(f"{prefix}:euler", 0, 1 - fs.n_grad + fs.n_rot - dim_p(k, 2))


def _exactness_3d(rec, s: CellSequence, cfg: VerifyConfig):
    k = s.k
    uG, uC, D = s.uG, s.uC, s.D
    _kernel_is_constant(rec, uG, s.interp_grad(lambda p: np.ones(len(p))), cfg.tol, cfg.rank_tol, "3d")
    NC = null_space(uC, cfg.rank_tol)
    rec.integer("3d:rank(uG)=nullity(uC)", NC.shape[1], rank(uG, cfg.rank_tol))
    rec.residual("3d:Im(uG)=Ker(uC)", subspace_residual(uG, NC), cfg.tol)
    ND = null_space(D, cfg.rank_tol)
    rec.integer("3d:rank(uC)=nullity(D)", ND.shape[1], rank(uC, cfg.rank_tol))
    rec.residual("3d:Im(uC)=Ker(D)", subspace_residual(uC, ND), cfg.tol)
    rec.integer("3d:rank(D)=dimP", dim_p(k, 3), rank(D, cfg.rank_tol))
    rec.integer("3d:euler", 0, 1 - s.n_grad + s.n_curl - s.n_div + dim_p(k, 3))
    for F, fs in zip(s.cell.faces, s.faces):
        _exactness_2d(rec, fs, cfg, prefix=f"face{F.id}")


def run_exactness(cell: Cell, k: int, cfg: VerifyConfig | None = None) -> list[CheckResult]:
    cfg = cfg or VerifyConfig()
    rec = _Recorder(_name(cell), k)
    try:
        s = build_sequence(cell, k, cfg)
    except Exception as exc:  # noqa: BLE001
        rec.flag("build", False, f"{type(exc).__name__}: {exc}")
        return rec.results
    _guard(rec, _exactness_2d if cell.dim == 2 else _exactness_3d, s, cfg)
    return rec.results


# --- commutation -------------------------------------------------------------------


def _blockwise(layout, lhs, rhs, scale) -> float:
    diff = lhs - rhs
    return max((rel_residual(diff[layout.slice(b.name)], scale) for b in layout.blocks if b.size), default=0.0)


def _commutation_2d(rec, fs: FaceSequence, cfg: VerifyConfig, rng):
    k, B = fs.k, fs.basis
    nG, nCl = op_norm(fs.uG), op_norm(fs.C)
    r1 = r2 = 0.0
    for _ in range(cfg.n_samples):
        q = _uniform(rng, dim_p(k + 1, 2))
        Iq = fs.interp_grad(_pad(B, q, k + 1))
        g = _pad(B, grad_matrix(B, k + 1, k) @ q, k, 2)
        rhs = fs.interp_rot(g.ambient)
        r1 = max(r1, _blockwise(fs.rot_layout, fs.uG @ Iq, rhs, nG * np.linalg.norm(Iq)))
        v = _pad(B, _uniform(rng, 2 * dim_p(k + 1, 2)), k + 1, 2)
        Iv = fs.interp_rot(v.ambient)
        rot = rot_matrix(B, k + 1, k) @ v.coords.reshape(2, -1)[:, :dim_p(k + 1, 2)].ravel()
        r2 = max(r2, rel_residual(fs.C @ Iv - rot, nCl * np.linalg.norm(Iv)))
    rec.residual("2d:uG(Iq)=Irot(grad q)", r1, cfg.tol)
    rec.residual("2d:C(Irot v)=pi(rot v)", r2, cfg.tol)


def _commutation_3d(rec, s: CellSequence, cfg: VerifyConfig, rng):
    k, B = s.k, s.basis
    n1 = dim_p(k + 1, 3)
    tr = s.trimmed
    nG, nC, nD = op_norm(s.uG), op_norm(s.uC), op_norm(s.D)
    r1 = r2 = r3 = 0.0
    for _ in range(cfg.n_samples):
        q = _uniform(rng, n1)
        Iq = s.interp_grad(_pad(B, q, k + 1))
        rhs = s.interp_curl(_pad(B, grad_matrix(B, k + 1, k) @ q, k, 3))
        r1 = max(r1, _blockwise(s.curl_layout, s.uG @ Iq, rhs, nG * np.linalg.norm(Iq)))

        v = tr.nedelec.matrix @ _uniform(rng, tr.nedelec.dim)
        Iv = s.interp_curl(_pad(B, v, k + 1, 3))
        rhs = s.interp_div(_pad(B, curl_matrix(B, k + 1, k) @ v, k, 3))
        r2 = max(r2, _blockwise(s.div_layout, s.uC @ Iv, rhs, nC * np.linalg.norm(Iv)))

        w = tr.raviart_thomas.matrix @ _uniform(rng, tr.raviart_thomas.dim)
        Iw = s.interp_div(_pad(B, w, k + 1, 3))
        r3 = max(r3, rel_residual(s.D @ Iw - div_matrix(B, k + 1, k) @ w, nD * np.linalg.norm(Iw)))
    rec.residual("3d:uG(Iq)=Icurl(grad q)", r1, cfg.tol)
    rec.residual("3d:uC(Icurl v)=Idiv(curl v) on N_k", r2, cfg.tol)
    rec.residual("3d:D(Idiv v)=pi(div v) on RT_k", r3, cfg.tol)


def run_commutation(cell: Cell, k: int, seed: int = 0, cfg: VerifyConfig | None = None) -> list[CheckResult]:
    cfg = cfg or VerifyConfig(seed=seed)
    rec = _Recorder(_name(cell), k)
    rng = _rng(seed, rec.cell, k, "commutation")
    try:
        s = build_sequence(cell, k, cfg)
    except Exception as exc:  # noqa: BLE001
        rec.flag("build", False, f"{type(exc).__name__}: {exc}")
        return rec.results
    _guard(rec, _commutation_2d if cell.dim == 2 else _commutation_3d, s, cfg, rng)
    return rec.results


# --- consistency -------------------------------------------------------------------


def _gram_checks(rec, G, label, tol):
    sym = rel_residual(G - G.T, np.linalg.norm(G))
    rec.residual(f"{label}:symmetric", sym, tol)
    lam = np.linalg.eigvalsh(G)
    rec.flag(f"{label}:positive-definite", bool(lam[0] > 1e-12 * lam[-1]), f"lambda_min/lambda_max={lam[0] / lam[-1]:.3e}")


def _product_consistency(rec, name, G, pairs, tol):
    res = 0.0
    for (Ix, x), (Iy, y) in pairs:
        res = max(res, abs(Ix @ G @ Iy - x @ y) / (np.linalg.norm(x) * np.linalg.norm(y)))
    rec.residual(name, res, tol)


def _zero_sum_edge_data(fs: FaceSequence, rng) -> np.ndarray:
    k = fs.k
    r = _uniform(rng, fs.n_edges * (k + 1))
    mismatch = float(np.dot(fs.face.omega, fs.edge_integrals(r)))
    E0 = fs.face.edges[0]
    c = fs.edge_bases[E0.id].constant_coords(1.0)[: k + 1]
    r[: k + 1] -= fs.face.omega[0] * mismatch * c / (c @ c)
    return r


def _consistency_2d(rec, fs: FaceSequence, cfg: VerifyConfig, rng, prefix="2d"):
    k, B = fs.k, fs.basis
    n1, nk, nkm1 = dim_p(k + 1, 2), dim_p(k, 2), dim_p(k - 1, 2)
    tol = cfg.tol
    res = {n: 0.0 for n in ("trace", "trace_proj", "fullgrad", "ttrace")}
    n_st, n_fg, n_tt = op_norm(fs.scalar_trace), op_norm(fs.full_gradient), op_norm(fs.tangential_trace)
    grad_pairs, rot_pairs = [], []
    for _ in range(cfg.n_samples):
        q = _uniform(rng, n1)
        Iq = fs.interp_grad(_pad(B, q, k + 1))
        res["trace"] = max(res["trace"], rel_residual(fs.scalar_trace @ Iq - q, n_st * np.linalg.norm(Iq)))
        res["fullgrad"] = max(res["fullgrad"], rel_residual(
            fs.full_gradient @ Iq - grad_matrix(B, k + 1, k) @ q, n_fg * np.linalg.norm(Iq)))
        x = _uniform(rng, fs.n_grad)
        res["trace_proj"] = max(res["trace_proj"], rel_residual((fs.scalar_trace @ x)[:nkm1] - x[:nkm1],
                                                                n_st * np.linalg.norm(x)))
        v = _uniform(rng, 2 * nk)
        Iv = fs.interp_rot(_pad(B, v, k, 2).ambient)
        res["ttrace"] = max(res["ttrace"], rel_residual(fs.tangential_trace @ Iv - v, n_tt * np.linalg.norm(Iv)))
        grad_pairs.append((Iq, q))
        rot_pairs.append((Iv, v))
    rec.residual(f"{prefix}:trace(Iq)=q", res["trace"], tol)
    rec.residual(f"{prefix}:pi(trace x)=x_F", res["trace_proj"], tol)
    rec.residual(f"{prefix}:fullgrad(Iq)=grad q", res["fullgrad"], tol)
    rec.residual(f"{prefix}:ttrace(Irot v)=v", res["ttrace"], tol)
    rec.residual(f"{prefix}:ttrace(uG)=fullgrad",
                 rel_residual(fs.tangential_trace @ fs.uG - fs.full_gradient, n_tt * op_norm(fs.uG)), tol)
    one = fs.interp_grad(lambda p: np.ones(len(p)))
    rec.residual(f"{prefix}:uG(I1)=0", rel_residual(fs.uG @ one, op_norm(fs.uG) * np.linalg.norm(one)), tol)

    _gram_checks(rec, fs.grad_gram, f"{prefix}:grad-product", cfg.gram_tol)
    _gram_checks(rec, fs.rot_gram, f"{prefix}:rot-product", cfg.gram_tol)
    _product_consistency(rec, f"{prefix}:grad-product(Iq,Ir)=(q,r)", fs.grad_gram,
                         zip(grad_pairs, grad_pairs[1:] + grad_pairs[:1]), cfg.gram_tol)
    _product_consistency(rec, f"{prefix}:rot-product(Iv,Iw)=(v,w)", fs.rot_gram,
                         zip(rot_pairs, rot_pairs[1:] + rot_pairs[:1]), cfg.gram_tol)


def _surjectivity_2d(rec, fs: FaceSequence, cfg: VerifyConfig, rng, prefix="2d"):
    k = fs.k
    res = 0.0
    for _ in range(cfg.n_surjectivity):
        r = _zero_sum_edge_data(fs, rng)
        q = np.concatenate([np.zeros(dim_p(k - 1, 2)), fs.lift_boundary_gradient(r)])
        res = max(res, rel_residual(fs.edge_gradient @ q - r, np.linalg.norm(r)))
    rec.residual(f"{prefix}:boundary-gradient lift", res, cfg.tol)
    bad = _zero_sum_edge_data(fs, rng)
    c = fs.edge_bases[fs.face.edges[0].id].constant_coords(1.0)[: k + 1]
    bad[: k + 1] += c / (c @ c)
    try:
        fs.lift_boundary_gradient(bad)
        rec.flag(f"{prefix}:boundary-gradient rejects nonzero sum", False, "incompatible data was accepted")
    except IncompatibleDataError:
        rec.flag(f"{prefix}:boundary-gradient rejects nonzero sum", True)


def _consistency_3d(rec, s: CellSequence, cfg: VerifyConfig, rng):
    k, B, cell = s.k, s.basis, s.cell
    n1, nk = dim_p(k + 1, 3), dim_p(k, 3)
    tol = cfg.tol
    tr = s.trimmed
    E1 = vector_embedding(nk, n1, 3)
    res: dict = {}

    def upd(key, val):
        res[key] = max(res.get(key, 0.0), val)

    nFG, nFC, nD = op_norm(s.full_gradient), op_norm(s.full_curl), op_norm(s.D)
    nPg, nPc, nPd = op_norm(s.P_grad), op_norm(s.P_curl), op_norm(s.P_div)
    grad_pairs, curl_pairs, div_pairs = [], [], []
    for _ in range(cfg.n_samples):
        q = _uniform(rng, n1)
        Iq = s.interp_grad(_pad(B, q, k + 1))
        upd("fullgrad", rel_residual(s.full_gradient @ Iq - grad_matrix(B, k + 1, k) @ q, nFG * np.linalg.norm(Iq)))
        upd("pgrad", rel_residual(s.P_grad @ Iq - q, nPg * np.linalg.norm(Iq)))

        v = tr.nedelec.matrix @ _uniform(rng, tr.nedelec.dim)
        Iv = s.interp_curl(_pad(B, v, k + 1, 3))
        upd("fullcurl", rel_residual(s.full_curl @ Iv - curl_matrix(B, k + 1, k) @ v, nFC * np.linalg.norm(Iv)))

        p = _uniform(rng, 3 * nk)
        Ip = s.interp_curl(_pad(B, p, k, 3))
        upd("pcurl", rel_residual(s.P_curl @ Ip - p, nPc * np.linalg.norm(Ip)))

        w = _uniform(rng, 3 * n1)
        Iw = s.interp_div(_pad(B, w, k + 1, 3))
        upd("div", rel_residual(s.D @ Iw - div_matrix(B, k + 1, k) @ w, nD * np.linalg.norm(Iw)))

        rt = tr.raviart_thomas.matrix @ _uniform(rng, tr.raviart_thomas.dim)
        Irt = s.interp_div(_pad(B, rt, k + 1, 3))
        upd("pdiv", rel_residual(s.P_div @ Irt - E1.T @ rt, nPd * np.linalg.norm(Irt)))

        Jp = s.interp_div(_pad(B, p, k, 3))
        grad_pairs.append((Iq, q))
        curl_pairs.append((Ip, p))
        div_pairs.append((Jp, p))

    rec.residual("3d:fullgrad(Iq)=grad q", res["fullgrad"], tol)
    rec.residual("3d:Pgrad(Iq)=q", res["pgrad"], tol)
    rec.residual("3d:fullcurl(Iv)=curl v on N_k", res["fullcurl"], tol)
    rec.residual("3d:Pcurl(Iv)=v", res["pcurl"], tol)
    rec.residual("3d:D(Iv)=pi(div v)", res["div"], tol)
    rec.residual("3d:Pdiv(Iv)=pi(v) on RT_k", res["pdiv"], tol)

    # volume/face links, as matrix identities against test bases
    K = [s.tangential_pairing(i, k) for i in range(len(cell.faces))]
    curlw = vector_embedding(dim_p(k - 1, 3), nk, 3) @ curl_matrix(B, k, k - 1)
    GR = s.RT @ (s.RT.T @ s.full_gradient)
    rhs = -sum(w * K[i] @ fs.full_gradient @ s.grad_restriction(i)
               for i, (w, fs) in enumerate(zip(cell.omega, s.faces)))
    scale = op_norm(curlw) * max(nFG, 1e-300)
    rec.residual("3d:link grad volume/face (projected)", rel_residual(curlw.T @ GR - rhs, scale), tol)
    rec.residual("3d:link grad volume/face (full)", rel_residual(curlw.T @ s.full_gradient - rhs, scale), tol)

    CG = s.GT.T @ s.full_curl
    rhs = s.GT.T @ sum(w * K[i] @ fs.S @ s.curl_layout.selector([f"F{F.id}:R", f"F{F.id}:Rperp"])
                       for i, (w, F, fs) in enumerate(zip(cell.omega, cell.faces, s.faces)))
    rec.residual("3d:curl characterization on G^{k-1}", rel_residual(CG - rhs, max(nFC, 1e-300)), tol)

    for m, label, lhs_op in ((k + 1, "full", s.full_curl), (k, "projected", s.GT @ CG)):
        gm = grad_matrix(B, m, k)
        rhs = sum(w * s.face_mass(i, m, k) @ fs.C @ s.curl_restriction(i)
                  for i, (w, fs) in enumerate(zip(cell.omega, s.faces)))
        rec.residual(f"3d:link curl volume/face ({label})",
                     rel_residual(gm.T @ lhs_op - rhs, op_norm(gm) * max(op_norm(lhs_op), 1e-300)), tol)

    worst = 0.0
    for i, fs in enumerate(s.faces):
        diff = s.curl_restriction(i) @ s.uG - fs.uG @ s.grad_restriction(i)
        worst = max(worst, rel_residual(diff, op_norm(s.uG)))
    rec.residual("3d:face restriction of uG", worst, tol)
    rec.residual("3d:uC(uG)=0", rel_residual(s.uC @ s.uG, op_norm(s.uC), op_norm(s.uG)), tol)
    rec.residual("3d:D(uC)=0", rel_residual(s.D @ s.uC, op_norm(s.D), op_norm(s.uC)), tol)

    for label, G in (("grad", s.grad_gram), ("curl", s.curl_gram), ("div", s.div_gram)):
        _gram_checks(rec, G, f"3d:{label}-product", cfg.gram_tol)
    for label, G, pairs in (("grad", s.grad_gram, grad_pairs), ("curl", s.curl_gram, curl_pairs),
                            ("div", s.div_gram, div_pairs)):
        _product_consistency(rec, f"3d:{label}-product(Ix,Iy)=(x,y)", G,
                             zip(pairs, pairs[1:] + pairs[:1]), cfg.gram_tol)

    dims = (tr.nedelec.dim, tr.raviart_thomas.dim)
    rec.integer("3d:dim N_k", (k + 1) * (k + 3) * (k + 4) // 2, dims[0])
    rec.integer("3d:dim RT_k", (k + 1) * (k + 2) * (k + 4) // 2, dims[1])


def _compatible_face_data(s: CellSequence, rng) -> list:
    nk2 = dim_p(s.k, 2)
    v = [_uniform(rng, nk2) for _ in s.faces]
    c = [fs.basis.constant_coords(1.0)[:nk2] for fs in s.faces]
    total = sum(w * (vi @ ci) for w, vi, ci in zip(s.cell.omega, v, c))
    v[0] = v[0] - s.cell.omega[0] * total * c[0] / (c[0] @ c[0])
    return v


def _surjectivity_3d(rec, s: CellSequence, cfg: VerifyConfig, rng):
    res = 0.0
    for _ in range(cfg.n_surjectivity):
        v = _compatible_face_data(s, rng)
        z = s.lift_boundary_curl(v)
        vn = max(np.linalg.norm(x) for x in v)
        for i, fs in enumerate(s.faces):
            res = max(res, rel_residual(fs.C @ (s.curl_restriction(i) @ z) - v[i], vn))
        zT = z[s.curl_layout.indices(["T:R", "T:Rperp"])]
        res = max(res, float(np.linalg.norm(zT)))
    rec.residual("3d:boundary-curl lift", res, cfg.tol)
    bad = _compatible_face_data(s, rng)
    c = s.faces[0].basis.constant_coords(1.0)[: dim_p(s.k, 2)]
    bad[0] = bad[0] + c / (c @ c)
    try:
        s.lift_boundary_curl(bad)
        rec.flag("3d:boundary-curl rejects incompatible data", False, "incompatible data was accepted")
    except IncompatibleDataError:
        rec.flag("3d:boundary-curl rejects incompatible data", True)
    for F, fs in zip(s.cell.faces, s.faces):
        _surjectivity_2d(rec, fs, cfg, rng, prefix=f"face{F.id}")


def run_consistency(cell: Cell, k: int, seed: int = 0, cfg: VerifyConfig | None = None) -> list[CheckResult]:
    cfg = cfg or VerifyConfig(seed=seed)
    rec = _Recorder(_name(cell), k)
    rng = _rng(seed, rec.cell, k, "consistency")
    try:
        s = build_sequence(cell, k, cfg)
    except Exception as exc:  # noqa: BLE001
        rec.flag("build", False, f"{type(exc).__name__}: {exc}")
        return rec.results
    if cell.dim == 2:
        _guard(rec, _consistency_2d, s, cfg, rng)
        _guard(rec, _surjectivity_2d, s, cfg, rng)
    else:
        _guard(rec, _consistency_3d, s, cfg, rng)
        _guard(rec, _surjectivity_3d, s, cfg, rng)
    return rec.results


def run_surjectivity(cell: Cell, k: int, seed: int = 0, cfg: VerifyConfig | None = None) -> list[CheckResult]:
    cfg = cfg or VerifyConfig(seed=seed)
    rec = _Recorder(_name(cell), k)
    rng = _rng(seed, rec.cell, k, "surjectivity")
    s = build_sequence(cell, k, cfg)
    _guard(rec, _surjectivity_2d if cell.dim == 2 else _surjectivity_3d, s, cfg, rng)
    return rec.results


# --- almost-exact diagnostics --------------------------------------------------------


def almost_exact_defect(k: int) -> int:
    """dim Ker C_full - dim Im uG_full on a face, from dimension counting."""
    return 2 * dim_p(k, 2) - (dim_p(k, 2) - 1 + dim_p(k - 1, 2))


def _diagnostics(rec, fs: FaceSequence, cfg: VerifyConfig, prefix="2d"):
    k = fs.k
    A, C = fs.full_uG, fs.full_curl
    _kernel_is_constant(rec, A, fs.interp_grad(lambda p: np.ones(len(p))), cfg.tol, cfg.rank_tol, f"{prefix}:full")
    rec.residual(f"{prefix}:full:C(uG)=0", rel_residual(C @ A, op_norm(C), op_norm(A)), cfg.tol)
    rC = rank(C, cfg.rank_tol)
    rec.integer(f"{prefix}:full:rank(C)=dimP", dim_p(k, 2), rC)
    defect = (C.shape[1] - rC) - rank(A, cfg.rank_tol)
    rec.integer(f"{prefix}:full:defect", almost_exact_defect(k), defect,
                "dim Ker C_full - dim Im uG_full")


def run_almost_exact_diagnostics(cell: Cell, k: int, cfg: VerifyConfig | None = None) -> list[CheckResult]:
    cfg = cfg or VerifyConfig()
    rec = _Recorder(_name(cell), k)
    faces = [cell.faces[0]] if cell.dim == 2 else list(cell.faces)
    for F in faces:
        try:
            fs = FaceSequence(F, k, rank_tol=cfg.rank_tol)
        except Exception as exc:  # noqa: BLE001
            rec.flag("build", False, f"{type(exc).__name__}: {exc}")
            continue
        _guard(rec, _diagnostics, fs, cfg, "2d" if cell.dim == 2 else f"face{F.id}")
    return rec.results


# --- DOF tables ------------------------------------------------------------------------

TABLE_SHAPES = {"triangle": 2, "rectangle": 2, "tetra": 3, "hexa": 3}


def load_golden(dim: int) -> dict:
    name = "dof_table_2d.json" if dim == 2 else "dof_table_3d.json"
    return json.loads(resources.files("ddr.data").joinpath(name).read_text())


@dataclass
class DofTable:
    shape: str
    k: int
    counts: dict  # space -> entity class -> DOFs on one entity (and "total")
    entities: dict  # entity class -> number of entities
    reference: dict = field(default_factory=dict)  # space -> entity -> [ddr, fe]

    def total_mismatch(self) -> dict:
        """Total minus the sum over entities, per space (zero when consistent)."""
        out = {}
        for space, row in self.counts.items():
            out[space] = row["total"] - sum(n * self.entities[e] for e, n in row.items() if e != "total")
        return out

    def markdown_rows(self) -> list[str]:
        ents = ["V", "E", "F", "T"]
        rows = []
        for space, row in self.counts.items():
            ref = self.reference.get(space, {})
            cells = []
            for e in ents + ["total"]:
                if e not in row:
                    cells.append("")
                    continue
                fe = ref.get(e, [None, None])[1]
                cells.append(f"{row[e]} ({fe})" if fe is not None and fe != row[e] else str(row[e]))
            rows.append(f"| {self.shape} | {space} | {self.k} | " + " | ".join(cells) + " |")
        return rows


def dof_table_for_cell(cell: Cell, k: int, shape: str | None = None, rank_tol: float = RANK_TOL) -> DofTable:
    if cell.dim == 2:
        fs = FaceSequence(cell.faces[0], k, rank_tol=rank_tol)
        counts = {"Xgrad": fs.grad_layout.entity_counts(), "Xrot": fs.rot_layout.entity_counts(),
                  "Pk": {"F": dim_p(k, 2), "total": dim_p(k, 2)}}
        entities = {"V": len(fs.trace.vertex_ids), "E": fs.n_edges, "F": 1}
    else:
        s = CellSequence(cell, k, rank_tol=rank_tol)
        counts = {"Xgrad": s.grad_layout.entity_counts(), "Xcurl": s.curl_layout.entity_counts(),
                  "Xdiv": s.div_layout.entity_counts(), "Pk": {"T": dim_p(k, 3), "total": dim_p(k, 3)}}
        entities = {"V": len(s.trace.vertex_ids), "E": len(cell.edges), "F": len(cell.faces), "T": 1}
    ref = {}
    if shape in TABLE_SHAPES and str(k) in load_golden(TABLE_SHAPES[shape]).get(shape, {}).get("Xgrad", {}):
        g = load_golden(TABLE_SHAPES[shape])[shape]
        ref = {space: g[space][str(k)] for space in g}
    return DofTable(shape or _name(cell), k, counts, entities, ref)


def dof_table(shape: str, k: int) -> DofTable:
    if shape not in TABLE_SHAPES:
        raise ValueError(f"no reference table for shape {shape!r}; choose from {sorted(TABLE_SHAPES)}")
    return dof_table_for_cell(load_cell(shape_document(shape)), k, shape)


def run_dof_table(cell: Cell, k: int, shape: str | None = None, cfg: VerifyConfig | None = None) -> list[CheckResult]:
    cfg = cfg or VerifyConfig()
    rec = _Recorder(shape or _name(cell), k)
    try:
        table = dof_table_for_cell(cell, k, shape, cfg.rank_tol)
    except Exception as exc:  # noqa: BLE001
        rec.flag("build", False, f"{type(exc).__name__}: {exc}")
        return rec.results
    for space, mism in table.total_mismatch().items():
        rec.integer(f"dofs:{space}:total=sum over entities", 0, mism)
    for space, ref in table.reference.items():
        for ent, (ddr, _fe) in ref.items():
            got = table.counts.get(space, {}).get(ent)
            rec.integer(f"dofs:{space}:{ent}", ddr, -1 if got is None else got)
    return rec.results


# --- drivers and reports ------------------------------------------------------------------

SUITES = ("exactness", "commutation", "consistency", "dof-tables", "diagnostics")


def run_suites(cell: Cell, k: int, suites, cfg: VerifyConfig, shape: str | None = None) -> list[CheckResult]:
    out: list[CheckResult] = []
    if "exactness" in suites:
        out += run_exactness(cell, k, cfg)
    if "commutation" in suites:
        out += run_commutation(cell, k, cfg.seed, cfg)
    if "consistency" in suites:
        out += run_consistency(cell, k, cfg.seed, cfg)
    if "dof-tables" in suites:
        out += run_dof_table(cell, k, shape, cfg)
    if "diagnostics" in suites:
        out += run_almost_exact_diagnostics(cell, k, cfg)
    return out


def sort_results(results) -> list[CheckResult]:
    return sorted(results, key=lambda r: (r.cell, r.k, r.name))


def to_json(results) -> str:
    return json.dumps([asdict(r) for r in sort_results(results)], indent=1)


def to_markdown(results) -> str:
    res = sort_results(results)
    n_pass = sum(r.passed for r in res)
    lines = [f"**{n_pass}/{len(res)} checks passed**", "",
             "| cell | k | check | status | residual | expected | actual |",
             "|---|---|---|---|---|---|---|"]
    for r in res:
        exp = "" if r.expected is None else str(r.expected)
        act = "" if r.actual is None else str(r.actual)
        lines.append(f"| {r.cell} | {r.k} | {r.name} | {r.status} | {r.residual:.2e} | {exp} | {act} |")
    return "\n".join(lines) + "\n"

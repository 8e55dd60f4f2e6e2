import numpy as np
import pytest
from hypothesis import given, strategies as st

from ddr import shapes
from ddr.ddr2d import FaceSequence, IncompatibleDataError, face_sequence, l2_products_2d
from ddr.geometry import load_cell
from ddr.polyspaces import dim_p, grad_matrix, rot_matrix
from ddr.verify import load_golden, null_space, rank

from conftest import TEST_2D, cell
from oracles import X, moments

KS = [0, 1, 2, 3]


def seq(cells, name, k, **kw):
    F = cells[name].faces[0]
    return FaceSequence(F, k, **kw) if kw else face_sequence(F, k)


def random_poly(fs, degree, rng, comps=1):
    c = rng.standard_normal(comps * dim_p(degree, 2))
    return fs.basis.truncate(degree, components=comps).poly(c), c


@pytest.mark.parametrize("k", KS)
def test_dof_counts_match_table(cells, k):
    golden = load_golden(2)
    for shape, name in [("triangle", "triangle"), ("rectangle", "rectangle")]:
        fs = seq(cells, name, k)
        assert fs.n_grad == golden[shape]["Xgrad"][str(k)]["total"][0]
        assert fs.n_rot == golden[shape]["Xrot"][str(k)]["total"][0]
        # Euler identity of the discrete complex
        assert 1 - fs.n_grad + fs.n_rot - dim_p(k, 2) == 0


def test_trace_basis_sizes(cells):
    assert seq(cells, "triangle", 1).trace.n_dofs == 6
    assert seq(cells, "square", 0).trace.n_dofs == 4


def test_interp_constant(cells):
    fs = seq(cells, "pentagon", 2)
    dofs = fs.interp_grad(lambda p: np.ones(len(p)))
    lay = fs.grad_layout
    for v in fs.trace.vertex_ids:
        assert dofs[lay.slice(f"V{v}")][0] == pytest.approx(1.0, abs=1e-14)
    np.testing.assert_allclose(dofs[lay.slice("F")], fs.basis.constant_coords()[:3], atol=1e-14)
    np.testing.assert_allclose(fs.uG @ dofs, 0, atol=1e-13)
    g = fs.scalar_trace @ dofs
    np.testing.assert_allclose(g, fs.basis.constant_coords()[: dim_p(3, 2)], atol=1e-12)


def test_interp_x2y_triangle_against_symbolic_moments(cells):
    fs = seq(cells, "triangle", 1)
    F = fs.face
    expr = X[0] ** 2 * X[1]
    dofs = fs.grad_layout.split(fs.interp_grad(lambda p: p[:, 0] ** 2 * p[:, 1]))
    np.testing.assert_allclose(dofs["F"], moments(expr, fs.basis, [F.points], 1), atol=1e-13)
    for E in F.edges:
        expect = moments(expr, fs.edge_bases[E.id], [[E.x1, E.x2]], 1)
        np.testing.assert_allclose(dofs[f"E{E.id}"], expect, atol=1e-13)
    for v in fs.trace.vertex_ids:
        x = F.vertex_coords[v]
        assert dofs[f"V{v}"][0] == pytest.approx(x[0] ** 2 * x[1], abs=1e-15)


def test_square_k0_gradient_of_x(cells):
    fs = seq(cells, "square", 0)
    G = fs.full_gradient @ fs.interp_grad(lambda p: p[:, 0])
    # constant vector of P^0(F)^2 in frame coordinates
    vec = fs.basis.truncate(0, components=2).poly(G).ambient(fs.face.centroid[None])[0]
    np.testing.assert_allclose(vec, [1.0, 0.0, 0.0], atol=1e-14)
    np.testing.assert_allclose(fs.edge_gradient @ fs.interp_grad(lambda p: np.ones(len(p))), 0, atol=1e-14)


@pytest.mark.parametrize("name", TEST_2D)
@pytest.mark.parametrize("k", KS)
def test_polynomial_consistency(cells, name, k, rng):
    fs = seq(cells, name, k)
    q, c = random_poly(fs, k + 1, rng)
    Iq = fs.interp_grad(q)
    # the boundary part is exact on P^{k+1}
    for E in fs.face.edges:
        B = fs.edge_bases[E.id]
        pts = B.domain.rule(2 * k + 2).points
        np.testing.assert_allclose(B.poly(fs.trace.reconstruction[E.id] @ Iq[dim_p(k - 1, 2):])(pts), q(pts),
                                   atol=1e-11)
    np.testing.assert_allclose(fs.full_gradient @ Iq, grad_matrix(fs.basis, k + 1, k) @ c, atol=1e-11)
    np.testing.assert_allclose(fs.scalar_trace @ Iq, c, atol=1e-11)
    # uG I q = I_rot grad q
    np.testing.assert_allclose(fs.uG @ Iq, fs.interp_rot(q.grad_ambient), atol=1e-11)


@pytest.mark.parametrize("name", TEST_2D)
@pytest.mark.parametrize("k", KS)
def test_curl_and_potential_properties(cells, name, k, rng):
    fs = seq(cells, name, k)
    v, cv = random_poly(fs, k + 1, rng, comps=2)
    # commutation with the rot of a P^{k+1} field
    np.testing.assert_allclose(fs.C @ fs.interp_rot(v.ambient), rot_matrix(fs.basis, k + 1, k) @ cv, atol=1e-10)
    # the R-perp columns of C vanish
    assert np.abs(fs.C[:, fs.rot_layout.slice("F:Rperp")]).max(initial=0.0) < 1e-12
    # projection property of the scalar trace
    x = rng.standard_normal(fs.n_grad)
    n = dim_p(k - 1, 2)
    np.testing.assert_allclose((fs.scalar_trace @ x)[:n], x[:n], atol=1e-12)
    # potentials
    np.testing.assert_allclose(fs.tangential_trace @ fs.uG, fs.full_gradient, atol=1e-10)
    w, cw = random_poly(fs, k, rng, comps=2)
    np.testing.assert_allclose(fs.tangential_trace @ fs.interp_rot(w.ambient), cw, atol=1e-11)


@pytest.mark.parametrize("name", TEST_2D)
@pytest.mark.parametrize("k", KS)
def test_exactness(cells, name, k):
    fs = seq(cells, name, k)
    uG, C = fs.uG, fs.C
    assert rank(uG) == fs.n_grad - 1
    assert rank(C) == dim_p(k, 2)
    N = null_space(uG)
    I1 = fs.interp_grad(lambda p: np.ones(len(p)))
    assert N.shape[1] == 1
    assert abs(abs(N[:, 0] @ I1) - np.linalg.norm(I1)) < 1e-10
    K = null_space(C)
    assert K.shape[1] == rank(uG)
    assert np.linalg.norm(uG - K @ (K.T @ uG)) < 1e-11 * np.linalg.norm(uG, 2)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_unprojected_sequence_has_a_gap(cells, k):
    fs = seq(cells, "square", k)
    full_rot = fs.full_rot_layout.dim
    gap = (full_rot - rank(fs.full_curl)) - rank(fs.full_uG)
    assert gap > 0
    assert rank(fs.full_uG) == fs.n_grad - 1
    assert rank(fs.full_curl) == dim_p(k, 2)


@pytest.mark.parametrize("name", TEST_2D)
@pytest.mark.parametrize("k", KS)
def test_l2_products(cells, name, k, rng):
    fs = seq(cells, name, k)
    Gg, Gr = l2_products_2d(fs.face, k)
    for G in (Gg, Gr):
        np.testing.assert_array_equal(G, G.T)
        ev = np.linalg.eigvalsh(G)
        assert ev[0] > 1e-12 * ev[-1]
    I1 = fs.interp_grad(lambda p: np.ones(len(p)))
    assert I1 @ Gg @ I1 == pytest.approx(fs.face.area, rel=1e-11)
    n = dim_p(k + 1, 2)
    Ig = fs.interp_grad_matrix(k + 1)
    a, b = rng.standard_normal((2, n))
    assert (Ig @ a) @ Gg @ (Ig @ b) == pytest.approx(a @ b, rel=1e-10, abs=1e-11 * np.linalg.norm(a) * np.linalg.norm(b))
    Ir = fs.interp_rot_matrix()
    a, b = rng.standard_normal((2, Ir.shape[1]))
    assert (Ir @ a) @ Gr @ (Ir @ b) == pytest.approx(a @ b, rel=1e-10, abs=1e-11 * np.linalg.norm(a) * np.linalg.norm(b))


@pytest.mark.parametrize("k", KS)
def test_boundary_gradient_lifting(cells, k, rng):
    fs = seq(cells, "l_hexagon", k)
    x = rng.standard_normal(fs.n_grad)
    r = fs.edge_gradient @ x
    q = fs.lift_boundary_gradient(r)
    np.testing.assert_allclose(fs.edge_gradient[:, dim_p(k - 1, 2):] @ q, r, atol=1e-11)
    bad = r.copy()
    bad[0] += 1.0 / fs.edge_bases[fs.face.edges[0].id].coeffs[0, 0]
    with pytest.raises(IncompatibleDataError):
        fs.lift_boundary_gradient(bad)


def test_alternative_tangential_trace(cells, rng):
    fs = seq(cells, "pentagon", 2, alternative=True)
    x = rng.standard_normal(fs.n_rot)
    g = fs.tangential_trace @ x
    np.testing.assert_allclose(fs.R.T @ g, x[fs.rot_layout.slice("F:R")], atol=1e-12)
    np.testing.assert_allclose(fs.tangential_trace @ fs.uG, fs.full_gradient, atol=1e-10)


def test_determinism(cells):
    a = FaceSequence(cells["pentagon"].faces[0], 2)
    b = FaceSequence(cells["pentagon"].faces[0], 2)
    np.testing.assert_array_equal(a.uG, b.uG)
    np.testing.assert_array_equal(a.rot_gram, b.rot_gram)


@given(st.integers(0, 2**31 - 1), st.integers(0, 3))
def test_random_pentagons(seed, k):
    F = load_cell(shapes.random_pentagon(np.random.default_rng(seed))).faces[0]
    fs = FaceSequence(F, k)
    assert rank(fs.uG) == fs.n_grad - 1
    assert rank(fs.C) == dim_p(k, 2)
    assert np.abs(fs.C @ fs.uG).max() < 1e-10 * np.linalg.norm(fs.C, 2) * np.linalg.norm(fs.uG, 2)
    for G in (fs.grad_gram, fs.rot_gram):
        ev = np.linalg.eigvalsh(G)
        assert ev[0] > 1e-12 * ev[-1]

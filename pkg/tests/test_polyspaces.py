import numpy as np
import pytest
from hypothesis import given, strategies as st

from ddr import shapes
from ddr.geometry import load_cell
from ddr.polyspaces import (
    SubspaceDimensionError,
    Subspaces,
    build_basis,
    build_trace_basis,
    cell_domain,
    curl_matrix,
    dim_p,
    div_matrix,
    edge_domain,
    expected_dims,
    exponents,
    face_domain,
    grad_matrix,
    l2_project,
    orthonormal_image,
    rot_matrix,
    vrot_matrix,
)

from conftest import cell
from oracles import basis_expressions, legendre_cubic_error, simplex_integral


def gram(basis, degree=None):
    rule = basis.domain.rule(2 * basis.degree)
    phi = basis.eval(rule.points)
    return (phi * rule.weights[:, None]).T @ phi


def test_dimensions():
    assert [dim_p(k, 2) for k in range(4)] == [1, 3, 6, 10]
    assert [dim_p(k, 3) for k in range(4)] == [1, 4, 10, 20]
    assert dim_p(-1, 3) == 0
    assert [expected_dims("cell", k)["R"] for k in range(3)] == [3, 11, 26]
    assert [expected_dims("cell", k)["G"] for k in range(3)] == [3, 9, 19]
    assert expected_dims("face", 1) == {"G": 5, "Gperp": 1, "R": 5, "Rperp": 1}
    assert exponents(1, 2).tolist() == [[0, 0], [1, 0], [0, 1]]


@pytest.mark.parametrize("name", ["triangle", "pentagon", "l_hexagon", "tetra", "cube", "l_prism"])
@pytest.mark.parametrize("degree", [0, 2, 4])
def test_orthonormal(cells, name, degree):
    B = build_basis(cell_domain(cells[name]), degree)
    G = gram(B)
    assert np.abs(G - np.eye(B.scalar_dim)).max() < 1e-12


def test_orthonormal_against_exact_integration():
    T = cell("triangle")
    B = build_basis(cell_domain(T), 2)
    phis = basis_expressions(B)
    tri = T.faces[0].points
    G = np.array([[float(simplex_integral(p * q, tri)) for q in phis] for p in phis])
    assert np.abs(G - np.eye(len(phis))).max() < 1e-12


def test_prefix_spans_lower_degree(cells):
    B = build_basis(cell_domain(cells["pentagon"]), 3)
    f = lambda p: p[:, 0] ** 5 + p[:, 1] ** 3
    full = l2_project(f, B, quad_degree=8)
    low = build_basis(B.domain, 1)
    np.testing.assert_allclose(full[: B.size(1)], l2_project(f, B, 1, quad_degree=8), atol=1e-14)
    # the low-degree basis spans the same space: equal projections as functions
    pts = B.domain.rule(4).points
    np.testing.assert_allclose(B.truncate(1).poly(full[:3])(pts), low.poly(l2_project(f, low, quad_degree=8))(pts), atol=1e-13)


def test_legendre_cubic_projection_error():
    E = cell("square").edges[0]
    assert np.allclose([E.x1, E.x2], [[0, 0, 0], [1, 0, 0]])
    B = build_basis(edge_domain(E), 2)
    c = l2_project(lambda p: p[:, 0] ** 3, B)
    rule = B.domain.rule(8)
    err = np.sqrt(rule.integrate((rule.points[:, 0] ** 3 - B.poly(c)(rule.points)) ** 2))
    assert err == pytest.approx(legendre_cubic_error(), rel=1e-12)


def test_projection_reproduces_polynomials(cells, rng):
    B = build_basis(cell_domain(cells["prism"]), 3)
    c = rng.standard_normal(B.scalar_dim)
    np.testing.assert_allclose(l2_project(B.poly(c), B), c, atol=1e-12)


@pytest.mark.parametrize("name", ["pentagon", "cube"])
def test_derivative_matrices_match_pointwise_gradients(cells, name, rng):
    B = build_basis(cell_domain(cells[name]), 3)
    c = rng.standard_normal(B.scalar_dim)
    pts = B.domain.rule(3).points
    g = np.einsum("pjd,j->pd", B.grad(pts), c)  # (npts, n) along the domain axes
    for d in range(B.domain.n):
        np.testing.assert_allclose(B.poly(B.derivative(d) @ c)(pts), g[:, d], atol=1e-10)
    # finite differences along the first axis
    h = 1e-6
    fd = (B.poly(c)(pts + h * B.domain.axes[0]) - B.poly(c)(pts - h * B.domain.axes[0])) / (2 * h)
    np.testing.assert_allclose(fd, g[:, 0], rtol=1e-6, atol=1e-6)


def test_antiderivative_inverts_derivative(cells, rng):
    B = build_basis(edge_domain(cells["pentagon"].edges[1]), 3)
    c = rng.standard_normal(3)
    np.testing.assert_allclose((B.derivative(0) @ B.antiderivative())[:3] @ c, c, atol=1e-12)


def test_complex_identities(cells):
    F = build_basis(face_domain(cells["square"].faces[0]), 3)
    np.testing.assert_allclose(rot_matrix(F, 2, 0) @ grad_matrix(F, 3, 2), 0, atol=1e-11)
    np.testing.assert_allclose(div_matrix(F, 2, 0) @ vrot_matrix(F, 3, 2), 0, atol=1e-11)
    T = build_basis(cell_domain(cells["cube"]), 3)
    np.testing.assert_allclose(curl_matrix(T, 2, 1) @ grad_matrix(T, 3, 2), 0, atol=1e-11)
    np.testing.assert_allclose(div_matrix(T, 2, 1) @ curl_matrix(T, 3, 2), 0, atol=1e-11)


@pytest.mark.parametrize("name", ["pentagon", "tetra", "l_prism"])
@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_subspace_decompositions(cells, name, k):
    C = cells[name]
    B = build_basis(cell_domain(C), k + 1)
    S = Subspaces(B)
    n = B.domain.n
    exp = expected_dims("face" if C.dim == 2 else "cell", k)
    total = n * dim_p(k, n)
    for fam in ("G", "R"):
        img, perp = getattr(S, fam)(k), getattr(S, fam + "perp")(k)
        assert (img.dim, perp.dim) == (exp[fam], exp[fam + "perp"])
        Q = np.hstack([img.matrix, perp.matrix])
        assert Q.shape == (total, total)
        assert np.abs(Q.T @ Q - np.eye(total)).max() < 1e-12
    D = div_matrix(B, k + 1, k) if k >= 1 else None
    if D is not None:
        # R is divergence free
        assert np.abs(D @ S.R(k).in_degree(k + 1)).max() < 1e-10
    # G-perp is orthogonal to gradients
    Gimg = grad_matrix(B, k + 1, k)
    assert np.abs(S.Gperp(k).matrix.T @ Gimg).max(initial=0.0) < 1e-10


def test_rank_mismatch_is_reported():
    with pytest.raises(SubspaceDimensionError, match="numerical rank"):
        orthonormal_image(np.diag([1.0, 1e-3, 0.0]), 2, rank_tol=1e-2)


@pytest.mark.parametrize("name", ["triangle", "l_hexagon", "tetra", "l_prism"])
@pytest.mark.parametrize("degree", [1, 2, 4])
def test_trace_basis(cells, name, degree, rng):
    C = cells[name]
    tr = build_trace_basis(C.edges, degree)
    assert tr.n_dofs == len(C.edges) * (degree - 1) + len(tr.vertex_ids)
    assert tr.continuity_defect() < 1e-12
    np.testing.assert_allclose(tr.dof_map_matrix(), np.eye(tr.n_dofs), atol=1e-11)
    # polynomials of degree <= degree are reproduced edge by edge
    a = rng.standard_normal(3)
    q = lambda p: (p @ a) ** degree + p[:, 0]
    dofs = tr.interpolate(q)
    for E in C.edges:
        B = tr.edge_bases[E.id]
        rule = B.domain.rule(2 * degree)
        np.testing.assert_allclose(B.poly(tr.reconstruction[E.id] @ dofs)(rule.points), q(rule.points), atol=1e-11)


@given(st.integers(0, 2**31 - 1), st.integers(0, 3))
def test_random_cells_orthonormal_and_decomposed(seed, k):
    rng = np.random.default_rng(seed)
    for doc in (shapes.random_pentagon(rng), shapes.random_hexahedron(rng)):
        C = load_cell(doc)
        B = build_basis(cell_domain(C), k + 1)
        assert np.abs(gram(B) - np.eye(B.scalar_dim)).max() < 1e-11
        S = Subspaces(B)
        assert S.G(k).dim + S.Gperp(k).dim == B.domain.n * dim_p(k, B.domain.n)


def test_legendre_family_spans_the_same_space(cells):
    dom = cell_domain(cells["l_prism"])
    A = build_basis(dom, 3)
    B = build_basis(dom, 3, family="legendre")
    assert np.abs(gram(B) - np.eye(B.scalar_dim)).max() < 1e-12
    f = lambda p: p[:, 0] ** 2 * p[:, 2] - p[:, 1]
    pts = dom.rule(3).points
    np.testing.assert_allclose(A.poly(l2_project(f, A))(pts), B.poly(l2_project(f, B))(pts), atol=1e-12)

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, strategies as st

from ddr import shapes
from ddr.geometry import load_cell
from ddr.quadrature import cell_rule, face_rule, reference_tetrahedron, reference_triangle, segment_rule, simplex_rule

from conftest import cell
from oracles import X, dirichlet_moment, regular_polygon_area, simplex_integral


def test_segment_rules():
    E = cell("square").edges[0]  # [0,1] along x
    assert segment_rule(E, 0).weights.sum() == pytest.approx(1.0, abs=1e-15)
    r = segment_rule(E, 2)
    assert r.integrate(r.points[:, 0] ** 2) == pytest.approx(1 / 3, abs=1e-15)


def test_segment_cubic_arbitrary_direction(rng):
    d = rng.standard_normal(3)
    d /= np.linalg.norm(d)
    a = rng.uniform(-1, 1, 3)
    doc = {"vertices": [list(a), list(a + 2 * d), list(a + 2 * d + [0.1, 0.5, 0.3])], "faces": [[0, 1, 2]]}
    F = load_cell(doc).faces[0]
    E = next(E for E in F.edges if abs(E.length - 2) < 1e-12)
    r = segment_rule(E, 3)
    s = (r.points - E.x1) @ E.t  # affine coordinate along the edge
    assert r.integrate(s**3) == pytest.approx(2**4 / 4, rel=1e-14)


def test_face_rules():
    F = cell("square").faces[0]
    assert face_rule(F, 0).weights.sum() == pytest.approx(1.0, abs=1e-15)
    r = face_rule(F, 4)
    x, y = r.points[:, 0], r.points[:, 1]
    assert r.integrate(x**2 * y**2) == pytest.approx(1 / 9, abs=1e-14)
    P = cell("pentagon").faces[0]
    assert face_rule(P, 0).weights.sum() == pytest.approx(regular_polygon_area(5), abs=1e-13)


def test_cell_rules():
    assert cell_rule(cell("cube"), 0).weights.sum() == pytest.approx(1.0, abs=1e-15)
    assert cell_rule(cell("tetra"), 0).weights.sum() == pytest.approx(1 / 6, abs=1e-15)
    r = cell_rule(cell("cube"), 4)
    x, y, z = r.points.T
    assert r.integrate(x**2 * y * z) == pytest.approx(1 / 12, abs=1e-14)


@pytest.mark.parametrize("degree", range(0, 9))
def test_reference_rules_against_dirichlet(degree):
    pts, w = reference_triangle(degree)
    for a in range(degree + 1):
        b = degree - a
        assert w @ (pts[:, 0] ** a * pts[:, 1] ** b) == pytest.approx(float(dirichlet_moment((a, b))), rel=1e-13)
    pts, w = reference_tetrahedron(degree)
    for a in range(degree + 1):
        for b in range(degree + 1 - a):
            c = degree - a - b
            val = w @ (pts[:, 0] ** a * pts[:, 1] ** b * pts[:, 2] ** c)
            assert val == pytest.approx(float(dirichlet_moment((a, b, c))), rel=1e-13)


@pytest.mark.parametrize("name", ["tetra", "prism", "l_prism"])
def test_monomials_against_symbolic_oracle(name):
    T = cell(name)
    r = cell_rule(T, 4)
    # split the cell into the same apex fan symbolically, but with exact integration
    simplices = []
    for F, w in zip(T.faces, T.omega):
        for tri in F.triangles:
            simplices.append([T.apex, *tri])
    for exps in [(0, 0, 0), (1, 0, 0), (2, 1, 0), (1, 1, 2), (0, 0, 4)]:
        expr = X[0] ** exps[0] * X[1] ** exps[1] * X[2] ** exps[2]
        exact = sum(float(simplex_integral(expr, s)) for s in simplices)
        val = r.integrate(np.prod(r.points ** np.array(exps), axis=1))
        assert val == pytest.approx(exact, rel=1e-13, abs=1e-15)


def test_l_hexagon_moments_against_oracle():
    F = cell("l_hexagon").faces[0]
    r = face_rule(F, 5)
    # decompose the L into two rectangles, four triangles, exactly
    sq = lambda a, b, c, d: [[a, b, c], [a, c, d]]
    p = lambda x, y: (sp.Rational(x), sp.Rational(y), 0)
    tris = sq(p(0, 0), p(1, 0), p("1", "1/2"), p(0, "1/2")) + sq(p(0, "1/2"), p("1/2", "1/2"), p("1/2", 1), p(0, 1))
    for a, b in [(0, 0), (3, 2), (1, 4), (5, 0)]:
        expr = X[0] ** a * X[1] ** b
        exact = float(sum(simplex_integral(expr, t) for t in tris))
        val = r.integrate(r.points[:, 0] ** a * r.points[:, 1] ** b)
        assert val == pytest.approx(exact, rel=1e-13)


@given(st.integers(0, 2**31 - 1), st.integers(0, 6))
def test_weights_sum_to_measure(seed, degree):
    rng = np.random.default_rng(seed)
    T = load_cell(shapes.random_hexahedron(rng))
    r = cell_rule(T, degree)
    assert r.weights.sum() == pytest.approx(T.measure, rel=1e-13)
    assert np.all(np.isfinite(r.weights)) and r.exact_degree >= degree
    F = load_cell(shapes.random_pentagon(rng)).faces[0]
    assert face_rule(F, degree).weights.sum() == pytest.approx(F.area, rel=1e-13)


@given(st.integers(0, 2**31 - 1))
def test_random_tetra_monomial_exactness(seed):
    rng = np.random.default_rng(seed)
    V = rng.integers(-3, 4, (4, 3)).astype(float)
    if abs(np.linalg.det(V[1:] - V[0])) < 0.5:
        V = np.vstack([np.zeros(3), np.eye(3) * 2]) + V[0]
    e = [int(a) for a in rng.integers(0, 3, 3)]
    pts, w = simplex_rule(V, sum(e))
    exact = float(simplex_integral(X[0] ** e[0] * X[1] ** e[1] * X[2] ** e[2], V.astype(int).tolist()))
    assert w @ np.prod(pts**e, axis=1) == pytest.approx(exact, rel=1e-12, abs=1e-12)

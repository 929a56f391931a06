from fractions import Fraction

import mpmath
import numpy as np
import pytest

from dopkit import equilibrium as eq, nodes_weights as nw
from dopkit.errors import ConfigurationError


def test_log_kernel_matrix_against_quadrature():
    """A[i, j] = -mean of log|s - t| over cell i x cell j."""
    edges = np.array([0.0, 0.1, 0.25, 0.3, 0.7, 1.0])
    h = np.diff(edges)
    A = eq.log_kernel_matrix(edges)
    for i in range(5):
        assert A[i, i] == pytest.approx(-(np.log(h[i]) - 1.5), abs=1e-12)
    for i, j in [(1, 2), (0, 4), (2, 4), (0, 1)]:
        f = lambda s, t: mpmath.log(abs(s - t))
        ref = mpmath.quad(f, [edges[i], edges[i + 1]], [edges[j], edges[j + 1]]) / (h[i] * h[j])
        assert A[i, j] == pytest.approx(-float(ref), abs=1e-10)
        assert A[i, j] == A[j, i]


def test_uniform_field_log_potential_matches_quad():
    d = nw.uniform_density()
    fast = eq.field(lambda x: 0.0 * np.asarray(x), d)
    slow = eq._quad_log_potential(d)
    for x in (0.0, 0.123, 0.5, 0.999):
        assert fast.log_potential(x) == pytest.approx(slow(x), abs=1e-10)


def test_capped_simplex_projection_properties():
    rng = np.random.default_rng(1)
    y = rng.normal(size=50)
    cap = np.full(50, 0.05)
    p = eq.project_capped_simplex(y, cap)
    assert p.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(p >= -1e-15) and np.all(p <= cap + 1e-15)
    # optimality: no feasible direction lowers the distance
    q = eq.project_capped_simplex(p + 1e-3 * rng.normal(size=50), cap)
    assert np.linalg.norm(p - y) <= np.linalg.norm(q - y) + 1e-12


def test_gap_measure_structure(gap_eqm):
    m, cls = gap_eqm
    assert m.converged and m.kkt_residual < 1e-8
    assert m.mass.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(m.psi <= m.cap + 1e-12) and np.all(m.psi >= -1e-12)
    assert cls.kinds == ("void", "band", "saturated")
    assert cls.case == "I"
    assert cls.segments[0].right == pytest.approx(0.2, abs=2e-3)
    assert cls.segments[2].left == pytest.approx(0.8, abs=2e-3)
    slope, _ = eq.edge_exponent(m, cls)
    assert abs(slope - 0.5) < 0.1


def test_variational_derivative_signs(gap_eqm):
    m, cls = gap_eqm
    for s in cls.segments:
        xs = np.linspace(s.left, s.right, 9)[1:-1]
        d = eq.variational_derivative(m, xs) - m.ell
        if s.kind == "void":
            assert np.all(d > 0)
        elif s.kind == "saturated":
            assert np.all(d < 0)
        else:
            assert np.max(np.abs(d)) < 1e-5


def test_symmetric_krawtchouk_is_a_single_band():
    d = nw.uniform_density()
    m = eq.solve(eq.field(nw.WeightSpec.krawtchouk(0.5).potential(), d), "1/2", M=1000)
    cls = eq.classify_intervals(m)
    assert m.kkt_residual < 1e-8
    assert cls.kinds == ("band",)
    assert cls.violations  # no constraint active at either endpoint


def test_symmetric_hahn_pattern_is_symmetric():
    d = nw.uniform_density()
    m = eq.solve(eq.field(nw.WeightSpec.hahn(1, 1).potential(40), d), Fraction(1, 2), M=1000)
    np.testing.assert_allclose(m.psi, m.psi[::-1], atol=1e-8)


def test_rational_c_required():
    phi = eq.field(nw.WeightSpec.krawtchouk(0.5).potential(), nw.uniform_density())
    with pytest.raises(ConfigurationError):
        eq.solve(phi, "abc")
    with pytest.raises(ConfigurationError):
        eq.solve(phi, Fraction(3, 2))


def test_solution_is_grid_stable(gap_spec, uniform):
    phi = eq.field(gap_spec.potential(), uniform)
    coarse = eq.solve(phi, Fraction(1, 2), M=500)
    fine = eq.solve(phi, Fraction(1, 2), M=2000)
    xs = np.linspace(0.05, 0.95, 19)
    assert np.max(np.abs(coarse.cdf(xs) - fine.cdf(xs))) < 1e-3
    assert coarse.ell == pytest.approx(fine.ell, abs=1e-4)


def test_zero_cdf_distance_of_measure_quantiles(gap_eqm):
    m, _ = gap_eqm
    u = (np.arange(100) + 0.5) / 100
    grid = np.linspace(0, 1, 20001)
    quantiles = np.interp(u, m.cdf(grid), grid)
    assert eq.zero_cdf_distance(m, quantiles) < 0.011

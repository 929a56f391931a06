import mpmath
import numpy as np
import pytest

from dopkit import _mp, nodes_weights as nw, orthopoly as op
from dopkit.errors import ConfigurationError, PoleError, PrecisionError

from conftest import logw_for


def _monic_oracle(x, w, k, z):
    """pi_k(z) by Gram-Schmidt on monomials in 80-digit arithmetic."""
    with mpmath.workdps(80):
        x = [mpmath.mpf(v) for v in x]
        w = [mpmath.mpf(v) for v in w]
        ip = lambda f, g: mpmath.fsum(wi * f(xi) * g(xi) for xi, wi in zip(x, w))
        polys = []
        for n in range(k + 1):
            def mono(t, n=n):
                return t ** n
            coeffs = [ip(mono, p) / ip(p, p) for p in polys]

            def pn(t, n=n, prev=tuple(polys), cs=tuple(coeffs)):
                return t ** n - sum(c * p(t) for c, p in zip(cs, prev))
            polys.append(pn)
        return float(polys[k](mpmath.mpf(z)))


def test_monic_polynomials_match_gram_schmidt_oracle():
    lw = logw_for(nw.WeightSpec.krawtchouk(0.3), 8)
    basis = op.build_basis(lw, 7, 256)
    for k in (1, 3, 6):
        for z in (-0.2, 0.31, 0.9):
            ref = _monic_oracle(lw.nodes, lw.weights(), k, z)
            assert float(op.evaluate(basis, k, z)) == pytest.approx(ref, rel=1e-12, abs=1e-300)


def test_symmetric_krawtchouk_recurrence_and_zeros():
    basis = op.build_basis(logw_for(nw.WeightSpec.krawtchouk(0.5), 10), 9, 256)
    np.testing.assert_allclose(basis.alpha, 0.5, atol=1e-15)
    for k in range(1, 10):
        z = op.zeros(basis, k).zeros
        np.testing.assert_allclose(z, 1 - z[::-1], atol=1e-14)


def test_orthonormality_high_precision():
    basis = op.build_basis(logw_for(nw.WeightSpec.hahn(2, 3), 40), 39, 256)
    assert op.orthonormality_residual(basis) < 1e-20


def test_low_precision_is_detected_and_ladder_recovers():
    lw = logw_for(nw.WeightSpec.krawtchouk(0.9), 100)
    with pytest.raises(PrecisionError) as exc:
        op.build_basis(lw, 99, 64)
    assert exc.value.step is not None
    basis = op.build_basis_adaptive(lw, 99, 64)
    assert basis.precision_bits > 64
    assert op.orthonormality_residual(basis) < 10.0 ** (-basis.precision_bits // 8)


def test_evaluate_log_matches_evaluate():
    basis = op.build_basis(logw_for(nw.WeightSpec.krawtchouk(0.7), 30), 15, 128)
    z = np.array([-0.3, 0.05, 0.52, 1.4])
    logs, signs = op.evaluate_log(basis, 15, z)
    direct = np.array([float(op.evaluate(basis, 15, v)) for v in z])
    np.testing.assert_allclose(signs * np.exp(logs), direct, rtol=1e-12)


def test_sturm_count_agrees_with_zeros():
    basis = op.build_basis(logw_for(nw.WeightSpec.hahn(2, 2), 25), 20, 128)
    z = op.zeros(basis, 20).zeros
    pts = np.linspace(-0.1, 1.1, 37)
    counts = op.sturm_count(basis, 20, pts)
    np.testing.assert_array_equal(counts, [np.sum(z < p) for p in pts])


@pytest.mark.parametrize("spec", [nw.WeightSpec.krawtchouk(0.2), nw.WeightSpec.hahn(1.5, 4)])
def test_zero_invariants_small_sweep(spec):
    for N in (5, 12, 21):
        lw = logw_for(spec, N)
        basis = op.build_basis_adaptive(lw, N - 1)
        for k in range(1, N):
            assert op.check_zero_invariants(op.zeros(basis, k))
            assert op.interval_zero_counts(op.zeros(basis, k)).max() <= 1


def test_saturated_zeros_need_adaptive_precision(gap_eqm):
    m, cls = gap_eqm
    zs = op.zeros_adaptive(logw_for(nw.WeightSpec.krawtchouk(0.9), 100), 50)
    rep = op.classify_zeros(zs, m, cls)
    assert rep.ok
    assert len(rep.dislocations) <= 1
    assert rep.void_zero_counts == [0]
    assert len(rep.hurwitz) > 5


def test_rhp_matrix_unimodular_and_pole():
    basis = op.build_basis(logw_for(nw.WeightSpec.krawtchouk(0.4), 12), 11, 256)
    for k in (0, 1, 5, 11):
        for z in (0.3 + 0.2j, -1.0 + 0.0j, 0.51 - 0.01j):
            P = op.rhp_matrix(basis, k, z)
            assert abs(complex(P.det()) - 1) < 1e-30
    with pytest.raises(PoleError):
        op.rhp_matrix(basis, 3, float(basis.nodes[4]))


def test_rhp_residue_condition():
    """Residue of the second column at a node equals w_j times the first column."""
    basis = op.build_basis(logw_for(nw.WeightSpec.krawtchouk(0.4), 10), 9, 256)
    k, j, eps = 4, 3, 1e-20
    x = float(basis.nodes[j])
    P = op.rhp_matrix(basis, k, x + 1j * eps).as_complex()
    w = basis.logw.weights()[j]
    p1 = float(op.evaluate(basis, k, x))
    assert (1j * eps * P[0, 1]) == pytest.approx(w * p1, rel=1e-10)


def test_borodin_identity_and_dual_degree():
    basis = op.build_basis(logw_for(nw.WeightSpec.hahn(3, 3), 10), 9, 256)
    dual = op.build_basis(nw.dual_weights(basis.logw), 9, 256)
    worst = max(op.borodin_identity_check(basis, k, l, dual) for k in range(1, 10) for l in range(10))
    assert worst < 1e-40
    for k in (2, 5, 8):
        assert op.leading_degree(basis, k)[0] == 10 - k


def test_degree_out_of_range():
    basis = op.build_basis(logw_for(nw.WeightSpec.krawtchouk(0.5), 6), 3, 128)
    with pytest.raises(ConfigurationError):
        op.zeros(basis, 5)
    with pytest.raises(ConfigurationError):
        op.build_basis(basis.logw, 6, 128)

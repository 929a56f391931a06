from itertools import combinations

import numpy as np
import pytest

from dopkit import ensembles, kernels as kn, nodes_weights as nw, orthopoly as op
from dopkit.errors import ConfigurationError, PreconditionError

from conftest import logw_for


@pytest.fixture(scope="module")
def small():
    lw = logw_for(nw.WeightSpec.krawtchouk(0.35), 7)
    K = kn.cd_kernel(op.build_basis(lw, 3, 256), 3)
    return K, ensembles.enumerate_ensemble(lw, 3)


def test_projection_properties(small):
    K, _ = small
    assert kn.projection_defect(K) < 1e-14
    assert np.trace(K.K) == pytest.approx(3, abs=1e-13)
    np.testing.assert_allclose(K.K, K.K.T, atol=1e-15)
    np.testing.assert_allclose(K.complement_diag, 1 - np.diag(K.K), atol=1e-15)
    assert K.cd_check < 1e-10


def test_correlations_match_enumeration(small):
    K, probs = small
    for size in (1, 2, 3):
        for pts in combinations(range(7), size):
            assert kn.correlation(K, pts) == pytest.approx(ensembles.brute_correlation(probs, pts), abs=1e-12)
    assert kn.correlation(K, [1, 1]) == 0.0
    assert kn.correlation(K, [0, 1, 2, 3]) == pytest.approx(0.0, abs=1e-14)


def test_occupancy_matches_enumeration(small):
    K, probs = small
    for B in ([0, 3], [1, 2, 5], [0, 1, 2, 3, 4]):
        dist = kn.occupancy_distribution(K, B)
        assert dist.sum() == pytest.approx(1.0, abs=1e-13)
        for m in range(len(B) + 1):
            assert dist[m] == pytest.approx(ensembles.brute_occupancy(probs, B, m), abs=1e-12)


def test_fredholm_polynomial_against_numpy():
    A = np.array([[0.5, 0.1, 0.0], [0.1, 0.3, 0.2], [0.0, 0.2, 0.4]])
    coeffs = [float(c) for c in kn.fredholm_polynomial(A)]
    ref = np.poly(A)  # det(t I - A) coefficients, highest first
    # det(1 - tA) = t^n det(1/t - A) reverses the coefficient list
    np.testing.assert_allclose(coeffs, ref, atol=1e-15)


def test_occupancy_set_size_limit(small):
    K, _ = small
    with pytest.raises(ConfigurationError):
        kn.fredholm_polynomial(np.eye(31))
    assert kn.occupancy(K, [0, 1], 3) == 0.0


def test_sine_kernel_and_gaps(gap_eqm, gap_bases):
    m, cls = gap_eqm
    out = {}
    for N, basis in gap_bases.items():
        K = kn.cd_kernel(basis, N // 2)
        sc = kn.sine_compare(K, m, N // 2, 10, cls)
        gaps = {g.kind: g for g in kn.gap_diagnostics(K, m, cls)}
        out[N] = (sc, gaps)
    assert out[100][0].diag_relative_error < 0.1
    assert out[200][0].max_deviation < out[100][0].max_deviation
    for kind in ("void", "saturated"):
        assert out[200][1][kind].max_diag < 0.5 * out[100][1][kind].max_diag
        assert out[200][1][kind].max_offdiag < out[100][1][kind].max_offdiag


def test_sine_requires_band(gap_eqm, gap_bases):
    m, cls = gap_eqm
    K = kn.cd_kernel(gap_bases[100], 50)
    with pytest.raises(PreconditionError):
        kn.sine_compare(K, m, 5, 3, cls)
    with pytest.raises(PreconditionError):
        kn.occupancy_sine_limit(K, m, 95, [0, 1], 1.0, cls)


def test_occupancy_sine_limit_is_close(gap_eqm, gap_bases):
    m, cls = gap_eqm
    K = kn.cd_kernel(gap_bases[200], 100)
    dK, dS = kn.occupancy_sine_limit(K, m, 100, [0, 1, 2], 1.0, cls)
    assert abs(dK - dS) < 0.005


def test_sine_kernel_diagonal():
    S = kn.sine_kernel(0.4, [0, 1, 2])
    np.testing.assert_allclose(np.diag(S), 0.4)
    assert S[0, 1] == pytest.approx(np.sin(0.4 * np.pi) / np.pi)


def test_kernel_degree_bounds():
    basis = op.build_basis(logw_for(nw.WeightSpec.krawtchouk(0.5), 6), 3, 128)
    with pytest.raises(ConfigurationError):
        kn.cd_kernel(basis, 6)

import math

import gmpy2
import numpy as np
import pytest

from dopkit import _mp, nodes_weights as nw
from dopkit.errors import ConfigurationError

from conftest import logw_for


def test_uniform_nodes_are_cell_midpoints():
    ns = nw.build_nodes(nw.uniform_density(), 4)
    np.testing.assert_allclose(ns.nodes, [0.125, 0.375, 0.625, 0.875], rtol=0, atol=1e-16)


def test_quantization_rule_for_polynomial_density():
    d = nw.polynomial_density([0.0, 2.0])  # rho0 = 2x
    ns = nw.build_nodes(d, 25)
    assert nw.quantization_residual(ns) < 1e-14
    assert np.all(np.diff(ns.nodes) > 0)


def test_unnormalized_density_is_rejected():
    with pytest.raises(ConfigurationError):
        nw.polynomial_density([2.0])


def test_density_must_be_positive_inside():
    with pytest.raises(ConfigurationError):
        nw.polynomial_density([4.0, -18.0, 18.0])  # unit mass, negative at x = 1/2


def test_log_products_match_direct_sum():
    ns = nw.build_nodes(nw.uniform_density(), 9)
    x = ns.nodes
    direct = [sum(math.log(abs(x[j] - x[n])) for n in range(9) if n != j) for j in range(9)]
    np.testing.assert_allclose(ns.log_prod, direct, rtol=1e-14)


def test_krawtchouk_weights_against_binomial_formula():
    N, p = 10, 0.3
    q = 1 - p
    lw = logw_for(nw.WeightSpec.krawtchouk(p), N)
    ref = [N ** (N - 1) * math.sqrt(p * q) / (q ** N * math.gamma(N)) * math.comb(N - 1, j) * p ** j
           * q ** (N - 1 - j) for j in range(N)]
    np.testing.assert_allclose(lw.weights(), ref, rtol=1e-13)


def test_hahn_weights_against_gamma_formula():
    N, al, be = 8, 2.5, 1.5
    lw = logw_for(nw.WeightSpec.hahn(al, be), N)
    g = math.gamma
    raw = [g(j + al) * g(N + be - 1 - j) / (g(j + 1) * g(N - j)) for j in range(N)]
    ratio = np.asarray(lw.weights()) / np.asarray(raw)
    assert np.ptp(ratio) / ratio.mean() < 1e-13


def test_dual_weights_involution_and_product_identity():
    lw = logw_for(nw.WeightSpec.krawtchouk(0.4), 12)
    du = nw.dual_weights(lw)
    with _mp.working_precision(_mp.REF_BITS):
        for j in range(12):
            s = lw.logw_hp[j] + du.logw_hp[j] + 2 * lw.nodeset.log_prod_hp[j]
            assert abs(s) < gmpy2.mpfr(2) ** -400
    back = nw.dual_weights(du)
    assert back.field_hp == lw.field_hp


def test_dual_of_hahn_is_associated_hahn_up_to_constant():
    for N in (6, 15):
        h = logw_for(nw.WeightSpec.hahn(3, 2), N)
        a = logw_for(nw.WeightSpec.associated_hahn(3, 2), N)
        diff = np.asarray(nw.dual_weights(h).logw) - np.asarray(a.logw)
        assert np.ptp(diff) < 1e-12


def test_from_log_values_roundtrip():
    ns = nw.build_nodes(nw.uniform_density(), 7)
    vals = np.linspace(-3, 2, 7)
    lw = nw.from_log_values(ns, vals)
    np.testing.assert_allclose(lw.logw, vals, atol=1e-15)


def test_generic_weight_reduces_to_field():
    ns = nw.build_nodes(nw.uniform_density(), 20)
    spec = nw.WeightSpec.generic(lambda x: 3 * np.asarray(x) ** 2)
    lw = nw.log_weight(spec, ns)
    np.testing.assert_allclose(lw.field, -20 * 3 * ns.nodes ** 2, rtol=1e-13)


def test_invalid_specs():
    with pytest.raises(ConfigurationError):
        nw.WeightSpec.krawtchouk(1.2)
    with pytest.raises(ConfigurationError):
        nw.WeightSpec.hahn(-1, 2)
    with pytest.raises(ConfigurationError):
        nw.WeightSpec("laguerre")

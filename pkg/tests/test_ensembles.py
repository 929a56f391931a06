import numpy as np
import pytest

from dopkit import ensembles, kernels as kn, nodes_weights as nw, orthopoly as op
from dopkit.errors import ConfigurationError

from conftest import logw_for


@pytest.fixture(scope="module")
def kernel():
    lw = logw_for(nw.WeightSpec.krawtchouk(0.6), 9)
    return kn.cd_kernel(op.build_basis(lw, 4, 256), 4)


@pytest.mark.parametrize("order", ["chain", "scan", "scan-reversed"])
def test_samples_are_valid_configurations(kernel, order):
    s = ensembles.sample_many(kernel, 200, seed=3, order=order)
    assert s.shape == (200, 4)
    for row in s:
        assert len(set(row)) == 4 and row.min() >= 0 and row.max() < 9


@pytest.mark.parametrize("order", ["chain", "scan", "scan-reversed"])
def test_one_and_two_point_frequencies(kernel, order):
    n = 20000
    s = ensembles.sample_many(kernel, n, seed=11, order=order)
    freq = ensembles.empirical_frequencies(s, 9)
    p = np.diag(kernel.K)
    z = np.abs(freq - p) / np.sqrt(p * (1 - p) / n)
    assert z.max() < 4.5
    B = [2, 3, 4]
    counts = np.array([len(set(row) & set(B)) for row in s])
    pairs = np.mean(counts * (counts - 1))
    assert pairs == pytest.approx(ensembles.expected_pairs(kernel, B), abs=0.05)
    assert counts.mean() == pytest.approx(ensembles.expected_count(kernel, B), abs=0.03)


def test_full_configuration_law(kernel):
    lw = logw_for(nw.WeightSpec.krawtchouk(0.6), 9)
    probs = ensembles.enumerate_ensemble(lw, 4)
    assert sum(probs.values()) == pytest.approx(1.0, abs=1e-14)
    n = 40000
    s = ensembles.sample_many(kernel, n, seed=5)
    top = max(probs, key=probs.get)
    hits = np.mean([tuple(row) == top for row in np.sort(s, axis=1)])
    assert hits == pytest.approx(probs[top], abs=4.5 * np.sqrt(probs[top] / n))


def test_determinism_and_batches(kernel):
    a = ensembles.sample_many(kernel, 50, seed=42, batches=3)
    b = ensembles.sample_many(kernel, 50, seed=42, batches=3)
    c = ensembles.sample_many(kernel, 50, seed=43, batches=3)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_unknown_order_and_bad_configuration(kernel):
    with pytest.raises(ConfigurationError):
        ensembles.sample(kernel, 0, order="random")
    with pytest.raises(ConfigurationError):
        ensembles.Configuration((1, 1, 2))
    assert ensembles.Configuration((3, 1)).indices == (1, 3)

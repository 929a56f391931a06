import math

import numpy as np
import pytest
from scipy.special import gamma as G

from dopkit import asymptotics_harness as ah, equilibrium as eq, nodes_weights as nw, orthopoly as op
from dopkit.errors import PreconditionError

from conftest import logw_for


def test_gamma_factors_at_the_edge():
    assert ah.gamma_inside(0.0) == pytest.approx(1 / math.sqrt(2), rel=1e-14)
    assert ah.gamma_outside(0.0) == pytest.approx(math.sqrt(2), rel=1e-14)


def test_gamma_factors_agree_via_reflection():
    """2 cos(pi zeta) times the inside factor continues the outside one."""
    z = np.linspace(-0.99, -0.01, 50)
    lhs = 2 * np.cos(np.pi * z) * ah.gamma_inside(z)
    rhs = math.sqrt(2 * math.pi) * np.exp(-z) * np.abs(z) ** z / G(0.5 + z)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-12)


def test_gamma_factor_direct_values():
    z = -0.3
    ref = G(0.5 - z) / (math.sqrt(2 * math.pi) * math.exp(z) * (-z) ** (-z))
    assert ah.gamma_inside(z) == pytest.approx(ref, rel=1e-13)
    z = 0.7
    ref = math.sqrt(2 * math.pi) * math.exp(-z) * z ** z / G(0.5 + z)
    assert ah.gamma_outside(z) == pytest.approx(ref, rel=1e-13)


def test_band_check(gap_eqm, gap_bases):
    m, cls = gap_eqm
    band = cls.segments[1]
    reps = {N: ah.band_check(b, N // 2, m, band) for N, b in gap_bases.items()}
    for N, r in reps.items():
        assert r.ok, r.findings
        assert abs(r.sign_changes - r.expected_changes) <= 2
    assert 0.5 < reps[200].max_abs / reps[100].max_abs < 2


def test_envelope_ratio_is_scale_free(gap_eqm, gap_bases):
    m, _ = gap_eqm
    b = gap_bases[100]
    lw = b.logw
    shifted = nw.from_log_values(lw.nodeset, list(np.asarray(lw.logw) + 100.0))
    b2 = op.build_basis(shifted, 50, b.precision_bits)
    z = np.linspace(0.3, 0.7, 17) + 1e-4
    np.testing.assert_allclose(ah.envelope_ratio(b2, 50, m, z), ah.envelope_ratio(b, 50, m, z), rtol=1e-10)


def test_saturated_check(gap_eqm, gap_bases):
    m, cls = gap_eqm
    sat = cls.segments[2]
    reps = {N: ah.saturated_check(b, N // 2, m, sat, classification=cls) for N, b in gap_bases.items()}
    for r in reps.values():
        assert r.ok, r.findings
        assert r.cosine_at_nodes < 1e-12
        assert len(r.dislocations) <= 1
    assert reps[200].max_zero_distance < 0.5 * reps[100].max_zero_distance


def test_hard_edge_check(gap_eqm, gap_bases):
    m, cls = gap_eqm
    reps = {N: ah.hard_edge_check(b, N // 2, m, "b", classification=cls) for N, b in gap_bases.items()}
    for r in reps.values():
        assert r.ok, r.findings
        assert r.edge_zero_offset > 0
    assert reps[200].edge_mismatch < 0.05
    assert reps[200].max_deviation < reps[100].max_deviation
    # the extreme zero approaches the last node exponentially fast
    assert reps[200].log10_edge_zero_offset < 1.5 * reps[100].log10_edge_zero_offset
    assert ah.fitted_rate([100, 200], [reps[100].max_deviation, reps[200].max_deviation]) < 0


def test_hard_edge_requires_saturated_endpoint(gap_eqm, gap_bases):
    m, cls = gap_eqm
    with pytest.raises(PreconditionError):
        ah.hard_edge_check(gap_bases[100], 50, m, "a", classification=cls)
    with pytest.raises(PreconditionError):
        ah.saturated_check(gap_bases[100], 50, m, cls.segments[1], classification=cls)


def test_mirror_endpoint_by_duality():
    """p = 0.1 mirrors p = 0.9 and puts the saturated region at the left endpoint."""
    d = nw.uniform_density()
    spec = nw.WeightSpec.krawtchouk(0.1)
    m = eq.solve(eq.field(spec.potential(), d), "1/2", M=2000)
    cls = eq.classify_intervals(m)
    assert cls.kinds == ("saturated", "band", "void")
    b = op.build_basis_adaptive(logw_for(spec, 100), 50)
    r = ah.hard_edge_check(b, 50, m, "a", classification=cls)
    assert r.ok and r.edge_mismatch < 0.05

from fractions import Fraction

import pytest

from dopkit import equilibrium as eq, nodes_weights as nw, orthopoly as op


@pytest.fixture(scope="session")
def uniform():
    return nw.uniform_density()


@pytest.fixture(scope="session")
def gap_spec():
    """Krawtchouk p = 0.9 at c = 1/2: void, band and saturated region."""
    return nw.WeightSpec.krawtchouk(0.9)


@pytest.fixture(scope="session")
def gap_eqm(uniform, gap_spec):
    m = eq.solve(eq.field(gap_spec.potential(), uniform), Fraction(1, 2), M=2000)
    return m, eq.classify_intervals(m)


@pytest.fixture(scope="session")
def gap_bases(uniform, gap_spec):
    out = {}
    for N in (100, 200):
        lw = nw.log_weight(gap_spec, nw.build_nodes(uniform, N))
        out[N] = op.build_basis_adaptive(lw, N // 2)
    return out


def logw_for(spec, N, density=None):
    return nw.log_weight(spec, nw.build_nodes(density or nw.uniform_density(), N))

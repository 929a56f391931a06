"""Exact sampling of discrete orthogonal polynomial ensembles.

The k-particle law on node configurations is proportional to
prod_{i<j} (x_i - x_j)^2 prod_j w(x_j); it is the determinantal process
with the projection kernel K_{N,k}.
"""

from dataclasses import dataclass
from itertools import combinations

import gmpy2
import numpy as np

from . import _mp
from .errors import ConfigurationError, NumericError

NEG_TOL = 1e-10


@dataclass(frozen=True)
class Configuration:
    indices: tuple

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if len(set(idx)) != len(idx):
            raise ConfigurationError("configuration has repeated sites")
        object.__setattr__(self, "indices", tuple(sorted(idx)))

    def __len__(self):
        return len(self.indices)


def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _clean(p, what):
    if np.min(p) < -NEG_TOL:
        raise NumericError(f"negative {what} {np.min(p):.3e}: kernel is not a projection")
    return np.clip(p, 0.0, None)


def sample(kernel, seed=None, order="chain"):
    """Draw one configuration.

    ``order="chain"`` picks the points one at a time with probabilities
    proportional to the Schur-complement diagonal; ``order="scan"`` (or
    ``"scan-reversed"``) visits the nodes in index order and decides each
    site by its conditional inclusion probability.
    """
    rng = _rng(seed)
    k = kernel.k
    if order == "chain":
        # K = V^T V with V the first k orthonormal node vectors; the Schur
        # complement after choosing j is the projection orthogonal to V[:, j]
        V = np.array(kernel.features, dtype=float)
        chosen = []
        for _ in range(k):
            p = _clean(np.einsum("ij,ij->j", V, V), "conditional probability")
            p[chosen] = 0.0
            total = p.sum()
            if total <= 0:
                raise NumericError("conditional law vanished before k points were drawn")
            j = int(np.searchsorted(np.cumsum(p), rng.random() * total, side="right"))
            j = min(j, len(p) - 1)
            chosen.append(j)
            u = V[:, j] / np.sqrt(p[j])
            V -= np.outer(u, u @ V)
        return Configuration(chosen)
    C = np.array(kernel.K, dtype=float, copy=True)
    if order not in ("scan", "scan-reversed"):
        raise ConfigurationError(f"unknown extraction order {order!r}")
    sites = range(kernel.N) if order == "scan" else range(kernel.N - 1, -1, -1)
    chosen = []
    for j in sites:
        pj = C[j, j]
        if pj < -NEG_TOL or pj > 1 + NEG_TOL:
            raise NumericError(f"conditional probability {pj:.3e} outside [0, 1]")
        pj = min(max(pj, 0.0), 1.0)
        col = C[:, j].copy()
        if rng.random() < pj:
            chosen.append(j)
            C -= np.outer(col, col) / col[j]
        else:
            C -= np.outer(col, col) / (col[j] - 1.0)
    if len(chosen) != k:
        raise NumericError(f"scan produced {len(chosen)} points instead of {k}")
    return Configuration(chosen)


def sample_many(kernel, n, seed=None, order="chain", batches=1):
    """``n`` configurations as an (n, k) index array.

    The seed is split into ``batches`` independent child streams; the result
    depends only on (seed, batches).
    """
    n = int(n)
    children = np.random.SeedSequence(seed).spawn(max(1, int(batches)))
    sizes = [n // len(children) + (1 if i < n % len(children) else 0) for i in range(len(children))]
    out = []
    for child, size in zip(children, sizes):
        rng = np.random.default_rng(child)
        out.extend(sample(kernel, rng, order).indices for _ in range(size))
    return np.array(out, dtype=int).reshape(n, kernel.k)


def expected_count(kernel, B):
    B = sorted(set(int(b) for b in B))
    return float(sum(kernel.K[i, i] for i in B))


def expected_pairs(kernel, B):
    """sum over ordered distinct pairs in B of R_2."""
    B = sorted(set(int(b) for b in B))
    K = kernel.K
    total = 0.0
    for i in B:
        for j in B:
            if i != j:
                total += K[i, i] * K[j, j] - K[i, j] * K[j, i]
    return float(total)


def empirical_frequencies(samples, N):
    counts = np.zeros(N)
    for row in samples:
        counts[row] += 1
    return counts / len(samples)


# -- brute-force oracle ---------------------------------------------------


def enumerate_ensemble(logw, k):
    """Every k-subset with its probability, computed in extended precision."""
    N = logw.N
    if k < 1 or k > N:
        raise ConfigurationError("k must lie in [1, N]")
    with _mp.working_precision(_mp.REF_BITS):
        x = [gmpy2.mpfr(float(v)) for v in logw.nodes]
        lw = logw.logw_hp
        logs = {}
        for S in combinations(range(N), k):
            val = sum(lw[j] for j in S)
            for a, b in combinations(S, 2):
                val += 2 * gmpy2.log(abs(x[a] - x[b]))
            logs[S] = val
        top = max(logs.values())
        un = {S: gmpy2.exp(v - top) for S, v in logs.items()}
        Z = _mp.mp_fsum(list(un.values()))
        return {S: float(v / Z) for S, v in un.items()}


def brute_correlation(probs, points):
    pts = set(int(p) for p in points)
    if len(pts) < len(points):
        return 0.0
    return float(sum(p for S, p in probs.items() if pts <= set(S)))


def brute_occupancy(probs, B, m):
    B = set(int(b) for b in B)
    return float(sum(p for S, p in probs.items() if len(B & set(S)) == m))


__all__ = [
    "Configuration", "sample", "sample_many", "expected_count", "expected_pairs",
    "empirical_frequencies", "enumerate_ensemble", "brute_correlation", "brute_occupancy",
]

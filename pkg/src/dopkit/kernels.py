"""Christoffel-Darboux kernel on the nodes and determinantal statistics."""

from dataclasses import dataclass, field

import gmpy2
import mpmath
import numpy as np

from . import _mp
from .errors import ConfigurationError, PreconditionError, PrecisionError
from .orthopoly import _recurrence

MAX_OCCUPANCY_SET = 30


@dataclass(frozen=True)
class KernelMatrix:
    """K[i, j] = sqrt(w_i w_j) sum_{n<k} p_n(x_i) p_n(x_j).

    ``features`` is the k x N matrix of orthonormal node vectors, so that
    K = features.T @ features.

    ``complement_diag`` holds 1 - K[i, i] evaluated at basis precision so
    that values exponentially close to one keep their relative accuracy.
    """

    basis: object = field(repr=False)
    k: int
    K: np.ndarray = field(repr=False)
    K_hp: np.ndarray = field(repr=False)
    complement_diag: np.ndarray = field(repr=False)
    features: np.ndarray = field(repr=False)
    cd_check: float = 0.0

    @property
    def N(self):
        return self.basis.N

    @property
    def nodes(self):
        return self.basis.nodes

    @property
    def diag(self):
        return np.diag(self.K).copy()


def cd_kernel(basis, k, validate=True, samples=64, rtol=1e-10):
    """Assemble K_{N,k} by the direct sum, cross-checked with the two-term form."""
    N = basis.N
    if not 1 <= k <= N - 1:
        raise ConfigurationError(f"k must lie in [1, {N - 1}]")
    if k > basis.kmax + 1:
        raise ConfigurationError(f"basis holds degrees up to {basis.kmax}; need {k - 1}")
    with _mp.working_precision(basis.precision_bits):
        phi = basis.phi_hp[:k]
        K_hp = phi.T.dot(phi)
        comp = np.array([float(1 - K_hp[i, i]) for i in range(N)])
        to_float = np.vectorize(float, otypes=[float])
        K = to_float(K_hp)
        features = to_float(phi)
        worst = _validate_cd(basis, k, K_hp, samples) if validate else 0.0
    if worst > rtol:
        raise PrecisionError(f"kernel forms disagree by {worst:.3e}", step=k)
    return KernelMatrix(basis, k, K, K_hp, comp, features, worst)


def _validate_cd(basis, k, K_hp, samples):
    """Relative mismatch between the sum and the Christoffel-Darboux form on
    a deterministic subset of off-diagonal pairs (always including the two
    extreme nodes)."""
    N = basis.N
    rng = np.random.default_rng(0)
    pairs = {(0, N - 1)}
    while len(pairs) < min(samples, N * (N - 1) // 2):
        i, j = sorted(rng.choice(N, size=2, replace=False))
        pairs.add((int(i), int(j)))
    x = _mp.mpf_array(basis.nodes)
    # independent route: monic values by the recurrence, weights from logw
    pk, pkm1 = _recurrence(basis, k, x)[:2]
    sw = basis.sqrt_w_hp
    h = gmpy2.exp(basis.log_h_hp[k - 1])
    floor = gmpy2.mpfr(10) ** (-(basis.precision_bits // 8))
    worst = gmpy2.mpfr(0)
    for i, j in sorted(pairs):
        cd = sw[i] * sw[j] * (pk[i] * pkm1[j] - pkm1[i] * pk[j]) / (h * (x[i] - x[j]))
        scale = max(abs(cd), abs(K_hp[i, j]))
        err = abs(cd - K_hp[i, j])
        if err > floor:
            worst = max(worst, err / scale)
    return float(worst)


def projection_defect(kernel):
    """max |K^2 - K| in double precision."""
    return float(np.max(np.abs(kernel.K @ kernel.K - kernel.K)))


def correlation(kernel, points):
    """R_m = det K restricted to ``points`` (0 for repeated points)."""
    pts = [int(p) for p in points]
    if len(set(pts)) < len(pts):
        return 0.0
    if not pts:
        return 1.0
    if any(p < 0 or p >= kernel.N for p in pts):
        raise ConfigurationError("point index out of range")
    sub = kernel.K[np.ix_(pts, pts)]
    return float(np.linalg.det(sub))


def fredholm_polynomial(matrix):
    """Coefficients a_j of det(1 - t A) = sum_j a_j t^j (mpmath, 40 digits)."""
    A = np.asarray(matrix)
    n = A.shape[0]
    if n > MAX_OCCUPANCY_SET:
        raise ConfigurationError(f"sets larger than {MAX_OCCUPANCY_SET} are not supported")
    with mpmath.workdps(40):
        lam = np.linalg.eigvalsh(0.5 * (A + A.T)) if np.isrealobj(A) else np.linalg.eigvals(A)
        coeffs = [mpmath.mpf(1)]
        for v in lam:
            v = mpmath.mpf(float(v)) if np.isrealobj(lam) else mpmath.mpc(complex(v))
            nxt = coeffs + [mpmath.mpf(0)]
            for j in range(len(coeffs), 0, -1):
                nxt[j] = nxt[j] - v * coeffs[j - 1]
            coeffs = nxt
    return coeffs


def occupancy(kernel, B, m):
    """Probability of exactly ``m`` particles in the node set ``B``.

    det(1 - tK|_B) is expanded as a polynomial in t and
    (-d/dt)^m / m! is applied to its coefficients at t = 1.
    """
    B = sorted(set(int(b) for b in B))
    if m < 0:
        raise ConfigurationError("m must be non-negative")
    if m > len(B):
        return 0.0
    coeffs = fredholm_polynomial(kernel.K[np.ix_(B, B)]) if B else [mpmath.mpf(1)]
    with mpmath.workdps(40):
        total = mpmath.fsum(mpmath.binomial(j, m) * a for j, a in enumerate(coeffs) if j >= m)
        return float((-1) ** m * total)


def occupancy_distribution(kernel, B):
    return np.array([occupancy(kernel, B, m) for m in range(len(set(B)) + 1)])


def _band_density_ratio(eqm, x):
    """c psi(x) / rho0(x) with psi interpolated from the grid."""
    psi = float(np.interp(x, eqm.grid, eqm.psi))
    rho = float(eqm.phi.density.rho0(np.asarray(x)))
    return float(eqm.c) * psi / rho, psi, rho


def _require_band(eqm, x, classification):
    from .equilibrium import classify_intervals

    cls = classify_intervals(eqm) if classification is None else classification
    seg = cls.segment_at(x)
    if seg is None or seg.kind != "band":
        raise PreconditionError(f"node {x:.6g} does not lie in a band")
    return seg


@dataclass(frozen=True)
class SineComparison:
    center: int
    window: int
    max_deviation: float
    diag_relative_error: float
    density_ratio: float


def sine_kernel(density_ratio, indices):
    """S(i, j) = sin(pi d (i-j)) / (pi (i-j)) with S(i, i) = d."""
    idx = np.asarray(indices, dtype=float)
    diff = idx[:, None] - idx[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        S = np.sin(np.pi * density_ratio * diff) / (np.pi * diff)
    S[diff == 0] = density_ratio
    return S


def sine_compare(kernel, eqm, center, window=10, classification=None):
    """Compare the rescaled kernel with sin(pi(xi-eta))/(pi(xi-eta)).

    With x = x_center the node x_i corresponds to
    xi_i = N rho0(x) K(x, x) (x_i - x).  Returns the maximal deviation of
    K(x_i, x_j) / K(x, x) from the sine kernel over |i - center| <= window
    and the relative diagonal error |K(x,x) rho0 / (c psi) - 1|.
    """
    x = kernel.nodes
    c0 = int(center)
    _require_band(eqm, float(x[c0]), classification)
    lo, hi = c0 - window, c0 + window
    if lo < 0 or hi >= kernel.N:
        raise PreconditionError("window leaves the node set")
    ratio, psi, rho = _band_density_ratio(eqm, float(x[c0]))
    Kcc = kernel.K[c0, c0]
    idx = np.arange(lo, hi + 1)
    xi = kernel.N * rho * Kcc * (x[idx] - x[c0])
    diff = xi[:, None] - xi[None, :]
    ref = np.sinc(diff)
    dev = float(np.max(np.abs(kernel.K[np.ix_(idx, idx)] / Kcc - ref)))
    diag = abs(Kcc / ratio - 1.0)
    return SineComparison(c0, window, dev, float(diag), ratio)


def occupancy_sine_limit(kernel, eqm, j, offsets, t=1.0, classification=None):
    """(det(1 - tK|_B), det(1 - tS|_B)) for B = {j + o : o in offsets}."""
    offs = sorted(set(int(o) for o in offsets) | {0})
    B = [int(j) + o for o in offs]
    if B[-1] >= kernel.N:
        raise ConfigurationError("offsets leave the node set")
    x0 = float(kernel.nodes[int(j)])
    _require_band(eqm, x0, classification)
    ratio = _band_density_ratio(eqm, x0)[0]
    S = sine_kernel(ratio, offs)
    KB = kernel.K[np.ix_(B, B)]
    n = len(B)
    return complex(np.linalg.det(np.eye(n) - t * KB)), complex(np.linalg.det(np.eye(n) - t * S))


@dataclass(frozen=True)
class GapSegment:
    kind: str
    left: float
    right: float
    nodes: tuple
    max_diag: float
    max_offdiag: float


def gap_diagnostics(kernel, eqm, classification=None, interior=0.2):
    """Extremes of the one-point function inside voids and saturated regions.

    For voids the diagonal statistic is max K_ii, for saturated regions
    max |1 - K_ii|; both report max |(x - y) K(x, y)| over distinct
    interior nodes.  Interior nodes keep ``interior`` of the segment length
    away from both ends.
    """
    from .equilibrium import classify_intervals

    cls = classify_intervals(eqm) if classification is None else classification
    x = kernel.nodes
    out = []
    with _mp.working_precision(kernel.basis.precision_bits):
        for seg in cls.segments:
            if seg.kind == "band":
                continue
            pad = interior * (seg.right - seg.left)
            idx = np.flatnonzero((x >= seg.left + pad) & (x <= seg.right - pad))
            if len(idx) == 0:
                out.append(GapSegment(seg.kind, seg.left, seg.right, (), float("nan"), float("nan")))
                continue
            if seg.kind == "void":
                dval = max(float(kernel.K_hp[i, i]) for i in idx)
            else:
                dval = max(abs(float(kernel.complement_diag[i])) for i in idx)
            off = 0.0
            for a in idx:
                for b in idx:
                    if a < b:
                        off = max(off, abs(float((x[a] - x[b]) * kernel.K_hp[a, b])))
            out.append(GapSegment(seg.kind, seg.left, seg.right, (int(idx[0]), int(idx[-1])),
                                  dval, off))
    return out


__all__ = [
    "KernelMatrix", "SineComparison", "GapSegment", "cd_kernel", "projection_defect",
    "correlation", "fredholm_polynomial", "occupancy", "occupancy_distribution", "sine_kernel",
    "sine_compare", "occupancy_sine_limit", "gap_diagnostics",
]

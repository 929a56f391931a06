"""Discrete orthogonal polynomials at configurable precision.

The basis is built by the discretized Stieltjes procedure run on the
orthonormal node vectors ``Phi[k, j] = sqrt(w_j) p_k(x_j)``; the monic
recurrence is

    pi_{k+1}(z) = (z - alpha_k) pi_k(z) - beta_k pi_{k-1}(z),

with ``beta_k = h_k / h_{k-1}`` and ``h_k = sum_j w_j pi_k(x_j)**2``.
"""

from dataclasses import dataclass, field

import gmpy2
import numpy as np
from scipy.linalg import eigh_tridiagonal

from . import _mp
from .errors import ConfigurationError, PoleError, PrecisionError
from .nodes_weights import dual_weights


@dataclass(frozen=True)
class OrthoBasis:
    """Recurrence data for ``p_{N,0..kmax}``.

    ``alpha_hp[k]`` and ``beta_hp[k]`` (``beta_hp[0] = h_0``) are mpfr at
    ``precision_bits``; ``log_h_hp[k] = log h_k``, so the leading
    coefficient of ``p_k`` is ``exp(-log_h_hp[k] / 2)`` (always positive).
    """

    logw: object
    kmax: int
    precision_bits: int
    alpha_hp: tuple = field(repr=False)
    beta_hp: tuple = field(repr=False)
    log_h_hp: tuple = field(repr=False)
    phi_hp: np.ndarray = field(repr=False)
    sqrt_w_hp: np.ndarray = field(repr=False)

    @property
    def N(self):
        return self.logw.N

    @property
    def nodes(self):
        return self.logw.nodes

    @property
    def alpha(self):
        return _mp.to_float(self.alpha_hp)

    @property
    def beta(self):
        return _mp.to_float(self.beta_hp)

    @property
    def log_lead(self):
        """log of the leading coefficients c^{(k)}_{N,k}."""
        return -0.5 * _mp.to_float(self.log_h_hp)

    @property
    def phi(self):
        """Orthonormal node vectors rounded to double, shape (kmax+1, N)."""
        return np.vectorize(float, otypes=[float])(self.phi_hp)


def build_basis(logw, kmax, precision_bits=None, verify=True):
    """Stieltjes procedure over the N nodes at ``precision_bits``.

    Raises :class:`PrecisionError` carrying the failing degree when the
    recurrence loses positivity or orthogonality.  ``verify`` adds the full
    Gram-matrix check against the tolerance ``10**(-precision_bits/8)``.
    """
    N = logw.N
    if not 0 <= kmax <= N - 1:
        raise ConfigurationError(f"kmax must lie in [0, {N - 1}]")
    bits = _mp.default_bits() if precision_bits is None else int(precision_bits)
    if bits < 64:
        raise ConfigurationError("precision_bits must be >= 64")
    with _mp.working_precision(bits):
        tol = gmpy2.mpfr(10) ** (-(bits // 8))
        x = _mp.mpf_array(logw.nodes)
        logw_hp = logw.logw_hp
        shift = max(logw_hp)
        sqrt_w_scaled = np.array([gmpy2.exp((lw - shift) / 2) for lw in logw_hp], dtype=object)
        h0_scaled = _mp.mp_fsum(sqrt_w_scaled * sqrt_w_scaled)
        log_h0 = gmpy2.log(h0_scaled) + gmpy2.mpfr(shift)
        sqrt_w = np.array([gmpy2.exp(lw / 2) for lw in logw_hp], dtype=object)
        q = sqrt_w_scaled / gmpy2.sqrt(h0_scaled)
        q_prev = np.array([gmpy2.mpfr(0)] * N, dtype=object)
        b_prev = gmpy2.mpfr(0)
        alphas, betas, log_h = [], [gmpy2.exp(log_h0)], [log_h0]
        rows = [q]
        for k in range(kmax + 1):
            a_k = _mp.mp_fsum(x * q * q)
            alphas.append(a_k)
            if k == kmax:
                break
            r = (x - a_k) * q - b_prev * q_prev
            b2 = _mp.mp_fsum(r * r)
            if not (gmpy2.is_finite(b2) and b2 > 0):
                raise PrecisionError(f"recurrence breakdown at degree {k + 1}", step=k + 1)
            b = gmpy2.sqrt(b2)
            q_next = r / b
            # local orthogonality against the two previous vectors
            drift = max(abs(_mp.mp_fsum(q_next * q)), abs(_mp.mp_fsum(q_next * q_prev)))
            if drift > tol:
                raise PrecisionError(
                    f"loss of orthogonality {float(drift):.3e} at degree {k + 1}", step=k + 1)
            betas.append(b2)
            log_h.append(log_h[-1] + gmpy2.log(b2))
            q_prev, q, b_prev = q, q_next, b
            rows.append(q)
        phi = np.array(rows, dtype=object)
        if verify:
            k_bad = _first_nonorthogonal(phi, tol)
            if k_bad is not None:
                raise PrecisionError(f"orthonormality lost at degree {k_bad}", step=k_bad)
    return OrthoBasis(logw, kmax, bits, tuple(alphas), tuple(betas), tuple(log_h), phi, sqrt_w)


def _first_nonorthogonal(phi, tol):
    gram = phi.dot(phi.T)
    for k in range(len(phi)):
        gram[k, k] -= 1
        if any(abs(g) > tol for g in gram[k, : k + 1]):
            return k
    return None


def build_basis_adaptive(logw, kmax, precision_bits=None, max_bits=_mp.MAX_BITS):
    """Precision ladder: double the bits on failure up to ``max_bits``."""
    bits = _mp.default_bits() if precision_bits is None else int(precision_bits)
    last = None
    while bits <= max_bits:
        try:
            return build_basis(logw, kmax, bits)
        except PrecisionError as exc:
            last = exc
        bits *= 2
    raise PrecisionError(f"precision ladder exhausted at {max_bits} bits: {last}",
                         step=getattr(last, "step", None))


def orthonormality_residual(basis, kmax=None):
    """max_{k,l} |sum_j p_k p_l w_j - delta_kl| evaluated at basis precision."""
    kmax = basis.kmax if kmax is None else kmax
    with _mp.working_precision(basis.precision_bits):
        phi = basis.phi_hp[: kmax + 1]
        gram = phi.dot(phi.T)
        for i in range(kmax + 1):
            gram[i, i] -= 1
        return float(max(abs(g) for g in gram.ravel()))


def _as_mp(z):
    if isinstance(z, (complex, gmpy2.mpc)) and not isinstance(z, float):
        zc = complex(z) if isinstance(z, complex) else z
        return gmpy2.mpc(zc)
    return gmpy2.mpfr(z)


def _recurrence(basis, k, xs, derivative=False, count=False):
    """Forward recurrence on an object array ``xs``.

    Returns pi_k, pi_{k-1} (and pi_k' / the Sturm count of zeros of pi_k
    below each x when requested).
    """
    if not 0 <= k <= basis.kmax + (1 if k == basis.kmax + 1 else 0):
        raise ConfigurationError(f"degree {k} exceeds kmax={basis.kmax}")
    n = len(xs)
    one = np.array([gmpy2.mpfr(1)] * n, dtype=object)
    zero = np.array([gmpy2.mpfr(0)] * n, dtype=object)
    p_prev, p = zero, one
    d_prev, d = zero.copy(), zero.copy()
    changes = np.zeros(n, dtype=int)
    last_sign = np.ones(n, dtype=int)
    for j in range(k):
        a, b = basis.alpha_hp[j], (basis.beta_hp[j] if j > 0 else 0)
        p_next = (xs - a) * p - b * p_prev
        if derivative:
            d_next = p + (xs - a) * d - b * d_prev
            d_prev, d = d, d_next
        p_prev, p = p, p_next
        if count:
            s = np.array([_mp.sign(v) for v in p], dtype=int)
            s = np.where(s == 0, -last_sign, s)
            changes += s != last_sign
            last_sign = s
    out = [p, p_prev]
    if derivative:
        out.append(d)
    if count:
        out.append(k - changes)
    return out


def evaluate(basis, k, z, monic=True):
    """pi_{N,k}(z) (``monic``) or p_{N,k}(z) at basis precision."""
    if not 0 <= k <= basis.kmax:
        raise ConfigurationError(f"degree {k} exceeds kmax={basis.kmax}")
    with _mp.working_precision(basis.precision_bits):
        zz = np.array([_as_mp(z)], dtype=object)
        val = _recurrence(basis, k, zz)[0][0]
        if not monic:
            val = val * gmpy2.exp(-basis.log_h_hp[k] / 2)
    return val


def evaluate_many(basis, k, zs, monic=True):
    with _mp.working_precision(basis.precision_bits):
        arr = np.array([_as_mp(z) for z in zs], dtype=object)
        vals = _recurrence(basis, k, arr)[0]
        if not monic:
            vals = vals * gmpy2.exp(-basis.log_h_hp[k] / 2)
    return vals


def evaluate_log(basis, k, xs, monic=True):
    """(log|pi_k(x)|, sign) for real ``x``; immune to overflow."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    with _mp.working_precision(basis.precision_bits):
        vals = _recurrence(basis, k, _mp.mpf_array(xs))[0]
        logs = np.array([float(_mp.log_abs(v)) for v in vals])
        signs = np.array([_mp.sign(v) for v in vals], dtype=int)
    if not monic:
        logs = logs - 0.5 * float(basis.log_h_hp[k])
    return logs, signs


def sturm_count(basis, k, xs):
    """Number of zeros of pi_k strictly below each x (exact sign counting)."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    with _mp.working_precision(basis.precision_bits):
        return _recurrence(basis, k, _mp.mpf_array(xs), count=True)[-1]


@dataclass(frozen=True)
class ZeroSet:
    basis: OrthoBasis = field(repr=False)
    k: int
    zeros_hp: tuple = field(repr=False)

    @property
    def zeros(self):
        return _mp.to_float(self.zeros_hp)


def _jacobi_eigenvalues(basis, k):
    a = basis.alpha[:k]
    e = np.sqrt(basis.beta[1:k])
    if k == 1:
        return a.copy()
    return np.sort(eigh_tridiagonal(a, e, eigvals_only=True))


def zeros(basis, k, verify=True):
    """All zeros of pi_k: Jacobi eigenvalues polished by safeguarded Newton."""
    if not 1 <= k <= basis.kmax:
        raise ConfigurationError(f"degree must lie in [1, {basis.kmax}]")
    guess = _jacobi_eigenvalues(basis, k)
    bits = basis.precision_bits
    with _mp.working_precision(bits):
        nodes = basis.nodes
        span = nodes[-1] - nodes[0] if len(nodes) > 1 else 1.0
        seps = np.concatenate([[min(guess[0], nodes[0]) - span],
                               0.5 * (guess[1:] + guess[:-1]),
                               [max(guess[-1], nodes[-1]) + span]])
        seps_mp = _mp.mpf_array(seps)
        val_sep = _recurrence(basis, k, seps_mp)[0]
        expected = np.array([(-1) ** (k - i) for i in range(k + 1)])
        signs = np.array([_mp.sign(v) for v in val_sep])
        if not np.array_equal(signs, expected):
            seps_mp = _separate_by_counts(basis, k, seps_mp)
            val_sep = _recurrence(basis, k, seps_mp)[0]
        lo, hi = seps_mp[:-1].copy(), seps_mp[1:].copy()
        f_lo = val_sep[:-1].copy()
        x = np.array([min(max(gmpy2.mpfr(g), l), h) for g, l, h in zip(guess, lo, hi)], dtype=object)
        tol = gmpy2.mpfr(2) ** (-(bits - 6))
        done = np.zeros(k, dtype=bool)
        for _ in range(4 * bits):
            f, _, df = _recurrence(basis, k, x, derivative=True)
            new = x.copy()
            for i in np.flatnonzero(~done):
                fi = f[i]
                if fi == 0:
                    done[i] = True
                    continue
                if _mp.sign(fi) == _mp.sign(f_lo[i]):
                    lo[i], f_lo[i] = x[i], fi
                else:
                    hi[i] = x[i]
                step = fi / df[i] if df[i] != 0 else None
                scale = max(abs(x[i]), 1)
                if step is not None and abs(step) <= tol * scale:
                    # converged to within the working precision
                    done[i] = True
                    new[i] = x[i] - step
                    continue
                cand = x[i] - step if step is not None else None
                if cand is None or not (lo[i] < cand < hi[i]):
                    cand = (lo[i] + hi[i]) / 2
                if hi[i] - lo[i] <= tol * scale:
                    done[i] = True
                new[i] = cand
            x = new
            if done.all():
                break
        else:
            raise PrecisionError(f"zero polishing did not converge for degree {k}", step=k)
    zs = ZeroSet(basis, k, tuple(x))
    if verify:
        check_zero_invariants(zs)
    return zs


def _separate_by_counts(basis, k, seps):
    """Rebuild separators so each bracket holds exactly one zero (Sturm counts)."""
    lo_all, hi_all = seps[0], seps[-1]
    out = [lo_all]
    for i in range(1, k):
        lo, hi = lo_all, hi_all
        for _ in range(4 * basis.precision_bits):
            mid = (lo + hi) / 2
            c = _recurrence(basis, k, np.array([mid], dtype=object), count=True)[-1][0]
            if c < i:
                lo = mid
            elif c > i:
                hi = mid
            else:
                out.append(mid)
                break
        else:
            raise PrecisionError(f"could not isolate zero {i} of degree {k}", step=k)
    out.append(hi_all)
    return np.array(out, dtype=object)


def check_zero_invariants(zs):
    """Confinement, one zero per closed internode interval, interlacing."""
    basis, k = zs.basis, zs.k
    with _mp.working_precision(basis.precision_bits):
        z = list(zs.zeros_hp)
        x = [gmpy2.mpfr(float(v)) for v in basis.nodes]
        if any(z[i] >= z[i + 1] for i in range(k - 1)):
            raise PrecisionError(f"zeros of degree {k} are not simple and sorted", step=k)
        if k and not (x[0] < z[0] and z[-1] < x[-1]):
            raise PrecisionError(f"zeros of degree {k} leave (x_0, x_(N-1))", step=k)
        counts = _closed_interval_counts(z, x)
        if counts.max(initial=0) > 1:
            n = int(np.argmax(counts))
            raise PrecisionError(f"two zeros of degree {k} in [x_{n}, x_{n + 1}]", step=k)
        if k >= 2:
            prev = _recurrence(basis, k, np.array(z, dtype=object))[1]
            signs = [_mp.sign(v) for v in prev]
            if any(signs[i] != (-1) ** (k - 1 - i) for i in range(k)):
                raise PrecisionError(f"zeros of degrees {k - 1} and {k} do not interlace", step=k)
    return True


def _closed_interval_counts(z, x):
    counts = np.zeros(max(len(x) - 1, 0), dtype=int)
    n = 0
    for zi in z:
        while n < len(x) - 1 and x[n + 1] < zi:
            n += 1
        if n >= len(x) - 1:
            break
        counts[n] += 1
        if zi == x[n + 1] and n + 1 < len(x) - 1:
            counts[n + 1] += 1
        if zi == x[n] and n > 0:
            counts[n - 1] += 1
    return counts


def interval_zero_counts(zs):
    """Zeros in each closed internode interval [x_n, x_{n+1}]."""
    with _mp.working_precision(zs.basis.precision_bits):
        return _closed_interval_counts(list(zs.zeros_hp),
                                       [gmpy2.mpfr(float(v)) for v in zs.basis.nodes])


@dataclass
class ZeroReport:
    hurwitz: list
    spurious: list
    dislocations: list
    void_zero_counts: list
    segments: list
    findings: list

    @property
    def ok(self):
        return not self.findings


def classify_zeros(zs, eqm, classification=None, margin=0.2, match_frac=0.25):
    """Match zeros to nodes inside saturated regions.

    Within each saturated segment (shrunk by ``margin`` of its length at
    band-facing ends) every zero is paired with its nearest node; a pairing
    within ``match_frac`` of the local gap is a Hurwitz zero, anything else
    is spurious.  A dislocation is an internode interval of the segment
    holding no Hurwitz zero.  Void segments report their zero count.
    """
    from .equilibrium import classify_intervals

    cls = classify_intervals(eqm) if classification is None else classification
    x = np.asarray(zs.basis.nodes)
    a, b = eqm.a, eqm.b
    with _mp.working_precision(zs.basis.precision_bits):
        z_hp = list(zs.zeros_hp)
        z = np.array([float(v) for v in z_hp])
        report = ZeroReport([], [], [], [], [], [])
        for seg in cls.segments:
            left, right = _shrink(seg, a, b, margin)
            if seg.kind == "void":
                cnt = int(np.sum((z > left) & (z < right)))
                report.void_zero_counts.append(cnt)
                if cnt:
                    report.findings.append(f"{cnt} zeros inside void ({left:.4f}, {right:.4f})")
                continue
            if seg.kind != "saturated":
                continue
            idx = np.flatnonzero((x >= left) & (x <= right))
            if len(idx) < 2:
                continue
            inside = [i for i in range(len(z)) if x[idx[0]] - _gap(x, idx[0]) / 2 < z[i] < x[idx[-1]] + _gap(x, idx[-1]) / 2]
            claimed = {}
            spurious = []
            for i in inside:
                n = int(idx[np.argmin(np.abs(x[idx] - z[i]))])
                off = z_hp[i] - gmpy2.mpfr(float(x[n]))
                if abs(float(off)) > match_frac * _gap(x, n):
                    spurious.append(float(z[i]))
                    continue
                if n in claimed and abs(claimed[n][1]) <= abs(off):
                    spurious.append(float(z[i]))
                    continue
                if n in claimed:
                    spurious.append(float(z_hp[claimed[n][0]]))
                claimed[n] = (i, off)
            hurwitz = sorted((n, float(off)) for n, (i, off) in claimed.items())
            disl = []
            for n in idx[:-1]:
                has = False
                for m, (i, off) in claimed.items():
                    if (m == n and off >= 0) or (m == n + 1 and off <= 0):
                        has = True
                        break
                if not has:
                    disl.append(int(n))
            report.hurwitz.extend(hurwitz)
            report.spurious.extend(spurious)
            report.dislocations.extend(disl)
            report.segments.append({"left": left, "right": right, "nodes": [int(idx[0]), int(idx[-1])],
                                    "hurwitz": len(hurwitz), "spurious": len(spurious),
                                    "dislocations": disl})
            if len(disl) > 1:
                report.findings.append(f"{len(disl)} dislocations in saturated ({left:.4f}, {right:.4f})")
            if len(spurious) > 1:
                report.findings.append(f"{len(spurious)} spurious zeros in saturated ({left:.4f}, {right:.4f})")
    return report


def _gap(x, n):
    if len(x) == 1:
        return 1.0
    if n == 0:
        return x[1] - x[0]
    if n == len(x) - 1:
        return x[-1] - x[-2]
    return min(x[n] - x[n - 1], x[n + 1] - x[n])


def _shrink(seg, a, b, margin):
    """Trim ``margin`` of the length off every end that is not a or b."""
    width = seg.right - seg.left
    left = seg.left if seg.left <= a else seg.left + margin * width
    right = seg.right if seg.right >= b else seg.right - margin * width
    return left, right


@dataclass(frozen=True)
class RhpMatrix:
    z: complex
    entries: tuple

    def as_complex(self):
        return np.array([[complex(v) for v in row] for row in self.entries])

    def det(self):
        (p11, p12), (p21, p22) = self.entries
        return p11 * p22 - p12 * p21


def rhp_matrix(basis, k, z):
    """Explicit solution P(z; N, k) of the discrete Riemann-Hilbert problem."""
    if not 0 <= k <= min(basis.kmax + 1, basis.N - 1):
        raise ConfigurationError(f"k must lie in [0, {min(basis.kmax + 1, basis.N - 1)}]")
    zc = complex(z)
    if zc.imag == 0 and np.any(basis.nodes == zc.real):
        raise PoleError(f"z = {zc.real!r} is a node")
    with _mp.working_precision(basis.precision_bits):
        zz = gmpy2.mpc(zc)
        x = _mp.mpf_array(basis.nodes)
        inv = np.array([1 / (zz - xj) for xj in x], dtype=object)
        sw = basis.sqrt_w_hp
        if k == 0:
            p12 = _mp_sum(sw * sw * inv)
            entries = ((gmpy2.mpc(1), p12), (gmpy2.mpc(0), gmpy2.mpc(1)))
            return RhpMatrix(zc, entries)
        pk, pkm1 = _recurrence(basis, k, np.array([zz], dtype=object))[:2]
        h_km1 = gmpy2.exp(basis.log_h_hp[k - 1])
        # w_j pi_m(x_j) = sqrt(w_j) sqrt(h_m) Phi[m, j]
        if k <= basis.kmax:
            wk = sw * gmpy2.exp(basis.log_h_hp[k] / 2) * basis.phi_hp[k]
        else:
            wk = sw * _recurrence(basis, k, x)[0] * sw
        wkm1 = sw * gmpy2.exp(basis.log_h_hp[k - 1] / 2) * basis.phi_hp[k - 1]
        p12 = _mp_sum(wk * inv)
        p21 = pkm1[0] / h_km1
        p22 = _mp_sum(wkm1 * inv) / h_km1
        return RhpMatrix(zc, ((pk[0], p12), (p21, p22)))


def _mp_sum(arr):
    total = gmpy2.mpc(0)
    for v in arr:
        total += v
    return total


def borodin_identity_check(basis, k, l, dual_basis=None):
    """Relative residual of the dual-polynomial identity at node ``l``.

    Left side: the monic dual polynomial of degree N-k at x_l from a basis
    built on the dual weights.  Right side: ``h_{k-1}^{-1} w_l
    prod_{n != l}(x_l - x_n) pi_{k-1}(x_l)``.
    """
    N = basis.N
    if not 1 <= k <= N - 1:
        raise ConfigurationError("k must lie in [1, N-1]")
    if dual_basis is None:
        dual_basis = build_basis(dual_weights(basis.logw), N - k, basis.precision_bits)
    lhs = evaluate(dual_basis, N - k, float(basis.nodes[l]))
    with _mp.working_precision(basis.precision_bits):
        pkm1 = evaluate(basis, k - 1, float(basis.nodes[l]))
        log_mag = basis.logw.field_hp[l] - basis.log_h_hp[k - 1]
        sgn = -1 if (N - 1 - l) % 2 else 1
        rhs = sgn * gmpy2.exp(log_mag) * pkm1
        scale = max(abs(lhs), abs(rhs))
        if scale == 0:
            return 0.0
        return float(abs(lhs - rhs) / scale)


def leading_degree(basis, k):
    """Degree and leading coefficient of the dual-explicit polynomial.

    Expands ``sum_j w_j h_{k-1}^{-1} pi_{k-1}(x_j) prod_{n != j}(z - x_n)``
    in monomials and returns the highest degree whose coefficient is not
    negligible, together with that coefficient.
    """
    N = basis.N
    with _mp.working_precision(basis.precision_bits):
        x = _mp.mpf_array(basis.nodes)
        sw = basis.sqrt_w_hp
        h = gmpy2.exp(basis.log_h_hp[k - 1])
        wpi = sw * gmpy2.exp(basis.log_h_hp[k - 1] / 2) * basis.phi_hp[k - 1] / h
        coeffs = [gmpy2.mpfr(0)] * N
        for j in range(N):
            poly = [gmpy2.mpfr(1)]
            for n in range(N):
                if n == j:
                    continue
                poly = [gmpy2.mpfr(0)] + poly
                for i in range(len(poly) - 1):
                    poly[i] -= x[n] * poly[i + 1]
            for i, c in enumerate(poly):
                coeffs[i] += wpi[j] * c
        scale = max(abs(c) for c in coeffs)
        eps = gmpy2.mpfr(2) ** (-(basis.precision_bits // 2))
        deg = max(i for i, c in enumerate(coeffs) if abs(c) > eps * scale)
        return deg, float(coeffs[deg]), [float(c) for c in coeffs]


def log_norms(basis):
    return _mp.to_float(basis.log_h_hp)


__all__ = [
    "OrthoBasis", "ZeroSet", "ZeroReport", "RhpMatrix", "build_basis", "build_basis_adaptive",
    "orthonormality_residual", "evaluate", "evaluate_many", "evaluate_log", "sturm_count",
    "zeros", "zeros_adaptive", "check_zero_invariants", "interval_zero_counts", "classify_zeros", "rhp_matrix",
    "borodin_identity_check", "leading_degree", "log_norms",
]


def zeros_adaptive(logw, k, precision_bits=None, max_bits=_mp.MAX_BITS, kmax=None):
    """Build a basis and locate the zeros of degree ``k``, doubling the
    precision whenever an invariant check fails."""
    bits = _mp.default_bits() if precision_bits is None else int(precision_bits)
    kmax = k if kmax is None else kmax
    last = None
    while bits <= max_bits:
        try:
            basis = build_basis(logw, kmax, bits)
            return zeros(basis, k)
        except PrecisionError as exc:
            last = exc
        bits *= 2
    raise PrecisionError(f"precision ladder exhausted at {max_bits} bits: {last}", step=k)

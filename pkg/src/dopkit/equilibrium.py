"""Constrained logarithmic equilibrium measures.

The measure minimizes

    E_c[mu] = c * int int log(1/|x-y|) dmu(x) dmu(y) + int phi dmu

over probability measures with ``0 <= dmu/dx <= rho0/c``.  The density is
discretized as piecewise constant on M cells of equal rho0-mass, so the
upper constraint on the mass of every cell is the same number 1/(cM).
"""

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import numpy as np
from scipy import integrate

from .errors import ConfigurationError, NumericError
from .nodes_weights import NodeDensity, _solve_cdf

_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)
_FAR = 20  # cell distance beyond which the log kernel uses its expansion


@dataclass(frozen=True)
class FieldPhi:
    """External field phi(x) = V(x) + int log|x-y| rho0(y) dy."""

    V: object
    density: NodeDensity
    phi: object = dc_field(repr=False)
    log_potential: object = dc_field(repr=False)

    @property
    def a(self):
        return self.density.a

    @property
    def b(self):
        return self.density.b


def _uniform_log_potential(a, b):
    w = b - a

    def U(x):
        x = np.asarray(x, dtype=float)
        s, t = x - a, b - x
        with np.errstate(divide="ignore", invalid="ignore"):
            out = (np.where(s > 0, s * np.log(np.abs(s)), 0.0)
                   + np.where(t != 0, t * np.log(np.abs(t)), 0.0) - w) / w
        return out

    return U


def _quad_log_potential(density):
    a, b, rho0 = density.a, density.b, density.rho0

    def one(x):
        f = lambda y: float(rho0(y))
        if x <= a or x >= b:
            # outside the interval the integrand is smooth
            return integrate.quad(lambda y: math.log(abs(x - y)) * f(y), a, b,
                                  epsabs=1e-14, epsrel=1e-13, limit=200)[0]
        left = integrate.quad(f, a, x, weight="alg-logb", wvar=(0, 0),
                              epsabs=1e-14, epsrel=1e-13, limit=200)[0]
        right = integrate.quad(f, x, b, weight="alg-loga", wvar=(0, 0),
                               epsabs=1e-14, epsrel=1e-13, limit=200)[0]
        return left + right

    def U(x):
        x = np.asarray(x, dtype=float)
        out = np.array([one(float(v)) for v in x.ravel()]).reshape(x.shape)
        return out if out.ndim else float(out)

    return U


def field(V, density):
    """Build the field phi for potential ``V`` and node density ``rho0``."""
    if density.kind == "uniform":
        U = _uniform_log_potential(density.a, density.b)
    else:
        U = _quad_log_potential(density)

    def phi(x):
        x = np.asarray(x, dtype=float)
        out = np.asarray(V(x), dtype=float) + U(x)
        return out if np.ndim(out) else float(out)

    return FieldPhi(V, density, phi, U)


# -- cell geometry and the log-kernel matrix -------------------------------


def _G(u):
    """Second antiderivative of log|u| with G(0) = 0."""
    u = np.abs(np.asarray(u, dtype=float))
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(u > 0, 0.5 * u * u * np.log(np.where(u > 0, u, 1.0)) - 0.75 * u * u, 0.0)


def _tau(d):
    """Mean of log|s-t| over unit cells a distance d apart."""
    d = np.abs(np.asarray(d, dtype=float))
    out = _G(d + 1) - 2 * _G(d) + _G(d - 1)
    far = d >= _FAR
    if np.any(far):
        df = d[far]
        out[far] = np.log(df) - 1 / (12 * df**2) - 1 / (60 * df**4) - 1 / (168 * df**6)
    return out


def _cell_edges(density, M):
    if density.kind == "uniform":
        return np.linspace(density.a, density.b, M + 1)
    edges = np.empty(M + 1)
    edges[0], edges[-1] = density.a, density.b
    for i in range(1, M):
        edges[i] = _solve_cdf(density, i / M)
    return edges


def log_kernel_matrix(edges):
    """A[i, j] = mean over cell i x cell j of log(1/|x-y|)."""
    M = len(edges) - 1
    h = np.diff(edges)
    if np.allclose(h, h[0], rtol=1e-13, atol=0):
        idx = np.arange(M)
        col = -(np.log(h[0]) + _tau(idx))
        return col[np.abs(idx[:, None] - idx[None, :])]
    lo, hi = edges[:-1], edges[1:]
    mid = 0.5 * (lo + hi)
    i, j = np.meshgrid(np.arange(M), np.arange(M), indexing="ij")
    A = np.empty((M, M))
    near = np.abs(i - j) < _FAR
    ii, jj = i[near], j[near]
    dbl = (_G(hi[ii] - lo[jj]) - _G(hi[ii] - hi[jj]) - _G(lo[ii] - lo[jj]) + _G(lo[ii] - hi[jj]))
    A[near] = -dbl / (h[ii] * h[jj])
    ii, jj = i[~near], j[~near]
    D = np.abs(mid[ii] - mid[jj])
    v2 = (h[ii] ** 2 + h[jj] ** 2) / 12
    v4 = (h[ii] ** 4 + h[jj] ** 4) / 80 + 6 * (h[ii] ** 2 / 12) * (h[jj] ** 2 / 12)
    A[~near] = -(np.log(D) - v2 / (2 * D**2) - v4 / (4 * D**4))
    return 0.5 * (A + A.T)


def _cell_average(f, edges):
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    pts = 0.5 * (hi + lo)[:, None] + half[:, None] * _GL_X[None, :]
    vals = np.asarray(f(pts.ravel()), dtype=float).reshape(pts.shape)
    return 0.5 * vals.dot(_GL_W)


# -- the solver ---------------------------------------------------------------


@dataclass(frozen=True)
class EquilibriumMeasure:
    """Discretized minimizer.  ``psi`` and ``cap`` are densities on cells."""

    phi: FieldPhi = dc_field(repr=False)
    c: Fraction
    edges: np.ndarray = dc_field(repr=False)
    psi: np.ndarray = dc_field(repr=False)
    cap: np.ndarray = dc_field(repr=False)
    ell: float
    kkt_residual: float
    converged: bool
    iterations: int
    gradient: np.ndarray = dc_field(repr=False)
    energy_history: tuple = dc_field(repr=False)

    @property
    def a(self):
        return float(self.edges[0])

    @property
    def b(self):
        return float(self.edges[-1])

    @property
    def M(self):
        return len(self.psi)

    @property
    def grid(self):
        return 0.5 * (self.edges[1:] + self.edges[:-1])

    @property
    def dx(self):
        return np.diff(self.edges)

    @property
    def mass(self):
        return self.psi * self.dx

    def cdf(self, x):
        """mu_min((-inf, x]) from the piecewise-constant density."""
        x = np.asarray(x, dtype=float)
        cum = np.concatenate([[0.0], np.cumsum(self.mass)])
        i = np.clip(np.searchsorted(self.edges, x, side="right") - 1, 0, self.M - 1)
        frac = np.clip((x - self.edges[i]) / self.dx[i], 0.0, 1.0)
        out = cum[i] + frac * self.mass[i]
        out = np.where(x <= self.edges[0], 0.0, np.where(x >= self.edges[-1], 1.0, out))
        return out if out.ndim else float(out)


def _as_fraction(c):
    try:
        c = Fraction(c).limit_denominator(10**12) if isinstance(c, float) else Fraction(c)
    except (TypeError, ValueError):
        raise ConfigurationError(f"c must be rational, got {c!r}") from None
    if not 0 < c < 1:
        raise ConfigurationError("c must lie in (0, 1)")
    return c


def project_capped_simplex(y, cap, total=1.0, tol=1e-14):
    """Euclidean projection onto {0 <= m <= cap, sum m = total} by bisection
    on the shift theta in m = clip(y - theta, 0, cap)."""
    if cap.sum() < total:
        raise ConfigurationError("infeasible: capacities sum below the total mass")
    lo, hi = np.min(y - cap) - 1.0, np.max(y) + 1.0
    for _ in range(200):
        theta = 0.5 * (lo + hi)
        s = np.clip(y - theta, 0.0, cap).sum()
        if s > total:
            lo = theta
        else:
            hi = theta
        if hi - lo <= tol * max(1.0, abs(theta)):
            break
    m = np.clip(y - 0.5 * (lo + hi), 0.0, cap)
    # distribute the last rounding error over the free coordinates
    free = (m > 0) & (m < cap)
    if free.any():
        m[free] += (total - m.sum()) / free.sum()
        m = np.clip(m, 0.0, cap)
    return m


def kkt_residual(m, cap, g, tol_active=1e-12):
    """Worst violation of the optimality conditions and the multiplier."""
    lower = m <= tol_active * cap
    upper = m >= (1 - tol_active) * cap
    free = ~(lower | upper)
    ell = float(np.mean(g[free])) if free.any() else float(np.median(g))
    r = abs(m.sum() - 1.0)
    if free.any():
        r = max(r, float(np.max(np.abs(g[free] - ell))))
    if lower.any():
        r = max(r, float(np.max(np.maximum(0.0, ell - g[lower]))))
    if upper.any():
        r = max(r, float(np.max(np.maximum(0.0, g[upper] - ell))))
    return r, ell


def solve(phi, c, M=2000, tol=1e-8, max_iter=100_000, pg_iter=3000):
    """Minimize the discretized energy on M cells.

    Accelerated projected gradient (with a monotone restart) supplies the
    active sets; a primal-dual active-set iteration then solves the KKT
    system of the quadratic program exactly.  Every accepted iterate lowers
    the energy.  Non-convergence returns the best iterate flagged through
    ``kkt_residual`` and ``converged``.
    """
    c = _as_fraction(c)
    M = int(M)
    if M < 8:
        raise ConfigurationError("M must be at least 8")
    cf = float(c)
    edges = _cell_edges(phi.density, M)
    A = log_kernel_matrix(edges)
    Vbar = _cell_average(phi.V, edges)
    # log potential of rho0 with rho0 piecewise constant on the cells
    Ubar = -A.sum(axis=1) / M
    phibar = Vbar + Ubar
    cap = np.full(M, 1.0 / (cf * M))
    H = 2 * cf * A

    def energy(m):
        return float(cf * m.dot(A.dot(m)) + phibar.dot(m))

    def grad(m):
        return H.dot(m) + phibar

    L = float(np.linalg.eigvalsh(H)[-1]) if M <= 400 else _power_lmax(H)
    step = 1.0 / L
    m = project_capped_simplex(np.full(M, 1.0 / M), cap)
    x_prev, y, t = m.copy(), m.copy(), 1.0
    f_m = energy(m)
    history = [f_m]
    it = 0
    res = np.inf
    for it in range(1, min(pg_iter, max_iter) + 1):
        z = project_capped_simplex(y - step * grad(y), cap)
        f_z = energy(z)
        if f_z > f_m:
            # monotone restart from the last accepted iterate
            z = project_capped_simplex(m - step * grad(m), cap)
            f_z, t = energy(z), 1.0
        t_next = 0.5 * (1 + math.sqrt(1 + 4 * t * t))
        y = z + ((t - 1) / t_next) * (z - m)
        t = t_next
        if f_z <= f_m:
            m, f_m = z, f_z
            history.append(f_m)
        if it % 100 == 0:
            res, _ = kkt_residual(m, cap, grad(m))
            if res < 1e-4:
                break
    m, f_m, pd_iters = _active_set_polish(m, cap, H, phibar, energy, f_m, history)
    it += pd_iters
    g = grad(m)
    res, ell = kkt_residual(m, cap, g)
    while res >= tol and it < max_iter:
        # fall back to plain projected gradient when the polish stalls
        for _ in range(500):
            z = project_capped_simplex(m - step * grad(m), cap)
            f_z = energy(z)
            it += 1
            if f_z <= f_m:
                m, f_m = z, f_z
                history.append(f_m)
        m, f_m, pd_iters = _active_set_polish(m, cap, H, phibar, energy, f_m, history)
        it += pd_iters
        g = grad(m)
        new_res, ell = kkt_residual(m, cap, g)
        if new_res >= res and pd_iters == 0:
            res = new_res
            continue
        res = new_res
    psi = m / np.diff(edges)
    cap_density = cap / np.diff(edges)
    return EquilibriumMeasure(phi, c, edges, psi, cap_density, ell, res, res < tol, it, g, tuple(history))


def _power_lmax(H, iters=200):
    v = np.ones(H.shape[0]) / math.sqrt(H.shape[0])
    lam = 0.0
    for _ in range(iters):
        w = H.dot(v)
        lam_new = float(np.linalg.norm(w))
        v = w / lam_new
        if abs(lam_new - lam) <= 1e-10 * lam_new:
            break
        lam = lam_new
    return 1.01 * lam_new


def _active_set_polish(m, cap, H, phibar, energy, f_m, history, max_iter=100):
    """Primal-dual active-set iterations for the box/simplex QP."""
    lower = m <= 1e-12 * cap
    upper = m >= (1 - 1e-12) * cap
    best, f_best, accepted = m, f_m, 0
    for k in range(max_iter):
        free = ~(lower | upper)
        nf = int(free.sum())
        if nf == 0:
            break
        x = np.where(upper, cap, 0.0)
        rhs = -phibar[free] - H[np.ix_(free, upper)].dot(cap[upper])
        K = np.zeros((nf + 1, nf + 1))
        K[:nf, :nf] = H[np.ix_(free, free)]
        K[:nf, nf] = -1.0
        K[nf, :nf] = 1.0
        try:
            sol = np.linalg.solve(K, np.concatenate([rhs, [1.0 - cap[upper].sum()]]))
        except np.linalg.LinAlgError:
            break
        x[free] = sol[:nf]
        ell = sol[nf]
        lam = H.dot(x) + phibar - ell
        lam[free] = 0.0
        new_lower = (lower & (lam > 0)) | (free & (x < 0))
        new_upper = (upper & (lam < 0)) | (free & (x > cap))
        feasible = np.all(x >= 0) and np.all(x <= cap)
        if feasible:
            f_x = energy(x)
            if f_x <= f_best + 1e-15 * max(1.0, abs(f_best)):
                best, f_best = x, f_x
                history.append(f_x)
                accepted = k + 1
        if np.array_equal(new_lower, lower) and np.array_equal(new_upper, upper):
            break
        lower, upper = new_lower, new_upper
    return best, f_best, accepted


# -- derived quantities -------------------------------------------------------


def _H(u):
    u = np.asarray(u)
    if np.iscomplexobj(u):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(u != 0, u * np.log(np.where(u != 0, u, 1.0)) - u, 0.0)
    au = np.abs(u)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(au > 0, u * np.log(np.where(au > 0, au, 1.0)) - u, 0.0)


def log_potential(eqm, z):
    """int log|z - y| dmu_min(y), exact for the piecewise-constant density."""
    z = np.asarray(z)
    flat = z.ravel()
    lo, hi = eqm.edges[:-1], eqm.edges[1:]
    out = np.empty(flat.shape, dtype=float)
    for n, zz in enumerate(flat):
        if np.iscomplexobj(zz) and zz.imag != 0:
            cell = (_H(zz - lo.astype(complex)) - _H(zz - hi.astype(complex))).real
        else:
            zr = float(np.real(zz))
            cell = _H(zr - lo) - _H(zr - hi)
        out[n] = float(np.dot(eqm.psi, cell))
    out = out.reshape(z.shape)
    return out if out.ndim else float(out)


def variational_derivative(eqm, x):
    """-2c int log|x-y| dmu(y) + phi(x)."""
    return -2 * float(eqm.c) * log_potential(eqm, x) + eqm.phi.phi(x)


def log_transform(eqm, k, z):
    """k int log|z-x| dmu_min(x)."""
    return k * log_potential(eqm, z)


@dataclass(frozen=True)
class Segment:
    kind: str
    left: float
    right: float

    @property
    def length(self):
        return self.right - self.left


@dataclass(frozen=True)
class IntervalClassification:
    segments: tuple
    violations: tuple = ()

    @property
    def kinds(self):
        return tuple(s.kind for s in self.segments)

    @property
    def case(self):
        """"I" when both a void and a saturated region exist, else "II"."""
        k = set(self.kinds)
        return "I" if {"void", "saturated"} <= k else "II"

    def segment_at(self, x):
        for s in self.segments:
            if s.left <= x <= s.right:
                return s
        return None


def _labels(eqm, eps_rel):
    lab = np.full(eqm.M, "band", dtype=object)
    lab[eqm.psi < eps_rel * eqm.cap] = "void"
    lab[eqm.cap - eqm.psi < eps_rel * eqm.cap] = "saturated"
    return lab


def _runs(lab):
    runs = []
    start = 0
    for i in range(1, len(lab) + 1):
        if i == len(lab) or lab[i] != lab[start]:
            runs.append([lab[start], start, i])
            start = i
    return runs


def classify_intervals(eqm, eps_rel=1e-6, min_cells=3):
    """Split [a, b] into void, band and saturated segments."""
    runs = _runs(_labels(eqm, eps_rel))
    # absorb short runs into the longer neighbour, then merge equal kinds
    changed = True
    while changed and len(runs) > 1:
        changed = False
        for n, (kind, s, e) in enumerate(runs):
            if e - s >= min_cells:
                continue
            left = runs[n - 1] if n > 0 else None
            right = runs[n + 1] if n + 1 < len(runs) else None
            target = max((r for r in (left, right) if r is not None), key=lambda r: r[2] - r[1])
            target[1], target[2] = min(target[1], s), max(target[2], e)
            del runs[n]
            merged = [runs[0]]
            for r in runs[1:]:
                if r[0] == merged[-1][0]:
                    merged[-1][2] = r[2]
                else:
                    merged.append(r)
            runs = merged
            changed = True
            break
    cuts = [eqm.a]
    for (k1, s1, e1), (k2, s2, e2) in zip(runs[:-1], runs[1:]):
        cuts.append(_refine_edge(eqm, k1, e1 - 1, k2, s2))
    cuts.append(eqm.b)
    segments = tuple(Segment(r[0], float(l), float(rr)) for r, l, rr in zip(runs, cuts[:-1], cuts[1:]))
    violations = []
    for s1, s2 in zip(segments[:-1], segments[1:]):
        if s1.kind == s2.kind == "band":
            violations.append("adjacent bands")
    if segments[0].kind == "band":
        violations.append("no constraint active at the left endpoint")
    if segments[-1].kind == "band":
        violations.append("no constraint active at the right endpoint")
    return IntervalClassification(segments, tuple(violations))


def _refine_edge(eqm, kind_left, i_left, kind_right, i_right):
    """Locate a band edge by extrapolating psi**2 (or (cap-psi)**2) linearly."""
    x, psi, cap = eqm.grid, eqm.psi, eqm.cap
    lo, hi = eqm.edges[i_left + 1] - eqm.dx[i_left], eqm.edges[i_right] + eqm.dx[i_right]
    default = float(eqm.edges[i_right])
    if kind_left == "band":
        i0, i1, other = i_left - 1, i_left, kind_right
    elif kind_right == "band":
        i0, i1, other = i_right + 1, i_right, kind_left
    else:
        return default
    if not (0 <= i0 < eqm.M):
        return default
    if other == "void":
        y0, y1 = psi[i0] ** 2, psi[i1] ** 2
    else:
        y0, y1 = (cap[i0] - psi[i0]) ** 2, (cap[i1] - psi[i1]) ** 2
    if y0 == y1:
        return default
    edge = x[i1] - y1 * (x[i1] - x[i0]) / (y1 - y0)
    return float(min(max(edge, lo), hi))


def edge_exponent(eqm, classification=None, edge=None, window=(8, 80)):
    """Log-log slope of the density against distance to a band edge.

    ``edge`` selects a band edge by position (default: the first band edge
    adjacent to a void or saturated region).  The fit uses cells whose
    distance from the edge lies between ``window`` cell widths.
    """
    cls = classify_intervals(eqm) if classification is None else classification
    edges = []
    for s1, s2 in zip(cls.segments[:-1], cls.segments[1:]):
        if "band" in (s1.kind, s2.kind) and s1.kind != s2.kind:
            band_on_left = s1.kind == "band"
            other = s2.kind if band_on_left else s1.kind
            edges.append((s1.right, band_on_left, other))
    if not edges:
        raise NumericError("no band edge to fit")
    e, band_on_left, other = edges[0] if edge is None else min(edges, key=lambda t: abs(t[0] - edge))
    x = eqm.grid
    h = float(np.median(eqm.dx))
    dist = (e - x) if band_on_left else (x - e)
    sel = (dist >= window[0] * h) & (dist <= window[1] * h)
    y = eqm.psi[sel] if other == "void" else (eqm.cap - eqm.psi)[sel]
    if sel.sum() < 4 or np.any(y <= 0):
        raise NumericError("not enough band cells near the edge")
    slope = np.polyfit(np.log(dist[sel]), np.log(y), 1)[0]
    return float(slope), float(e)


def zero_cdf_distance(eqm, zeros):
    """sup |F_zeros - F_mu| with F_zeros the normalized zero counting CDF."""
    z = np.sort(np.asarray(zeros, dtype=float))
    k = len(z)
    Fmu = np.asarray(eqm.cdf(z))
    upper = np.arange(1, k + 1) / k
    lower = np.arange(0, k) / k
    return float(max(np.max(np.abs(upper - Fmu)), np.max(np.abs(Fmu - lower))))


__all__ = [
    "FieldPhi", "EquilibriumMeasure", "Segment", "IntervalClassification", "field", "solve",
    "project_capped_simplex", "kkt_residual", "log_kernel_matrix", "log_potential",
    "variational_derivative", "log_transform", "classify_intervals", "edge_exponent",
    "zero_cdf_distance",
]

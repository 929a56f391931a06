"""Node sets generated by a density, and weights evaluated in log-space.

Weights are stored through the decomposition

    log w_j = F_j - S_j,    F_j = -N V_N(x_j),    S_j = sum_{n != j} log|x_j - x_n|

so that the dual family (``w * wbar * prod (x_j - x_n)^2 = 1``) is just
``F -> -F``, which makes the duality an exact involution.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import gmpy2
import numpy as np
from numpy.polynomial import Polynomial
from scipy import integrate

from . import _mp
from .errors import ConfigurationError, NumericError

NORMALIZATION_TOL = 1e-12
_MAX_ROOT_ITER = 200


@dataclass(frozen=True)
class NodeDensity:
    """Density of nodes on ``[a, b]`` together with its cumulative integral.

    ``kind`` is ``"uniform"``, ``"polynomial"`` or ``"callable"``; ``coeffs``
    holds the power-basis coefficients of a polynomial density.
    """

    a: float
    b: float
    rho0: Callable[[float], float]
    cdf: Callable[[float], float]
    kind: str = "callable"
    coeffs: Optional[tuple] = None

    def describe(self):
        out = {"kind": self.kind, "a": self.a, "b": self.b}
        if self.coeffs is not None:
            out["coeffs"] = list(self.coeffs)
        return out


def uniform_density(a=0.0, b=1.0):
    if not b > a:
        raise ConfigurationError("uniform density needs a < b")
    width = b - a

    def rho0(x):
        return np.zeros_like(x, dtype=float) + 1.0 / width

    def cdf(x):
        return (np.asarray(x, dtype=float) - a) / width

    return NodeDensity(float(a), float(b), rho0, cdf, kind="uniform")


def polynomial_density(coeffs, a=0.0, b=1.0):
    """Polynomial density ``sum coeffs[i] x**i`` on ``[a, b]``; must integrate to one."""
    poly = Polynomial(np.asarray(coeffs, dtype=float))
    anti = poly.integ(lbnd=a)
    density = NodeDensity(float(a), float(b), poly, anti, kind="polynomial",
                          coeffs=tuple(float(c) for c in coeffs))
    check_density(density)
    return density


def callable_density(rho0, a, b):
    """Density given only as a callable; the cdf comes from adaptive quadrature."""

    def cdf(x):
        val, _ = integrate.quad(rho0, a, x, epsabs=1e-15, epsrel=1e-15, limit=200)
        return val

    density = NodeDensity(float(a), float(b), rho0, cdf, kind="callable")
    check_density(density)
    return density


def check_density(density, samples=257):
    if not density.b > density.a:
        raise ConfigurationError("density interval must satisfy a < b")
    total = float(density.cdf(density.b))
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise ConfigurationError(
            f"density is not normalized: integral over [a, b] is {total!r}")
    xs = np.linspace(density.a, density.b, samples)[1:-1]
    vals = np.array([float(density.rho0(x)) for x in xs])
    if not np.all(vals > 0):
        raise ConfigurationError("density must be strictly positive on (a, b)")


@dataclass(frozen=True)
class NodeSet:
    density: NodeDensity
    N: int
    nodes: np.ndarray
    log_prod: np.ndarray = field(repr=False)
    log_prod_hp: tuple = field(repr=False)

    def __len__(self):
        return self.N

    def node_hp(self, j):
        return gmpy2.mpfr(float(self.nodes[j]))


def _node_log_products(nodes):
    """S_j = sum_{n != j} log|x_j - x_n| at the reference precision."""
    with _mp.working_precision(_mp.REF_BITS):
        xs = [gmpy2.mpfr(float(x)) for x in nodes]
        out = []
        for j, xj in enumerate(xs):
            prod = gmpy2.mpfr(1)
            for n, xn in enumerate(xs):
                if n != j:
                    prod *= abs(xj - xn)
            out.append(gmpy2.log(prod))
    return tuple(out)


def _solve_cdf(density, target):
    """Monotone bisection, then Newton, for ``cdf(x) = target``."""
    lo, hi = density.a, density.b
    x = 0.5 * (lo + hi)
    for it in range(_MAX_ROOT_ITER):
        fx = float(density.cdf(x)) - target
        if fx == 0.0:
            return x
        if fx < 0:
            lo = x
        else:
            hi = x
        if hi - lo > 1e-3 * (density.b - density.a):
            x = 0.5 * (lo + hi)
            continue
        step = fx / float(density.rho0(x))
        xn = x - step
        if not lo < xn < hi:
            xn = 0.5 * (lo + hi)
        if abs(xn - x) <= 4e-16 * max(abs(x), 1.0):
            return xn
        x = xn
    raise NumericError(f"node root-finder did not converge for target {target!r}")


def build_nodes(density, N):
    """Quantize ``density`` into ``N`` nodes: ``cdf(x_j) = (2j+1)/(2N)``."""
    if int(N) != N or N < 1:
        raise ConfigurationError("N must be a positive integer")
    N = int(N)
    check_density(density)
    targets = (2.0 * np.arange(N) + 1.0) / (2.0 * N)
    if density.kind == "uniform":
        nodes = density.a + (density.b - density.a) * targets
    else:
        nodes = np.empty(N)
        for j, t in enumerate(targets):
            try:
                nodes[j] = _solve_cdf(density, t)
            except NumericError as exc:
                raise NumericError(f"node j={j}: {exc}") from None
    if N > 1 and not np.all(np.diff(nodes) > 0):
        raise NumericError("generated nodes are not strictly increasing")
    log_prod_hp = _node_log_products(nodes)
    return NodeSet(density, N, nodes, _mp.to_float(log_prod_hp), log_prod_hp)


def nodes_from_points(points):
    """Node set on arbitrary strictly increasing points (no density attached)."""
    nodes = np.asarray(points, dtype=float)
    if nodes.ndim != 1 or len(nodes) < 1:
        raise ConfigurationError("points must be a non-empty 1-d sequence")
    if len(nodes) > 1 and not np.all(np.diff(nodes) > 0):
        raise ConfigurationError("points must be strictly increasing")
    log_prod_hp = _node_log_products(nodes)
    return NodeSet(None, len(nodes), nodes, _mp.to_float(log_prod_hp), log_prod_hp)


def quantization_residual(nodeset):
    j = np.arange(nodeset.N)
    cdf = np.array([float(nodeset.density.cdf(x)) for x in nodeset.nodes])
    return float(np.max(np.abs(cdf - (2 * j + 1) / (2.0 * nodeset.N))))


@dataclass(frozen=True)
class WeightSpec:
    """A weight family.

    Classical families are defined by the node index ``j`` through their
    closed forms; ``generic`` uses ``V_N = V + gamma/N + eta(x)/N**2`` in
    the product representation.
    """

    kind: str
    p: Optional[float] = None
    q: Optional[float] = None
    alpha: Optional[float] = None
    beta: Optional[float] = None
    V: Optional[Callable] = None
    gamma: float = 0.0
    eta: Optional[Callable] = None

    KINDS = ("krawtchouk", "hahn", "associated_hahn", "generic")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ConfigurationError(f"unknown weight kind {self.kind!r}")
        if self.kind == "krawtchouk":
            if self.p is None or self.q is None:
                raise ConfigurationError("krawtchouk needs p and q")
            if not (self.p > 0 and self.q > 0 and abs(self.p + self.q - 1.0) < 1e-14):
                raise ConfigurationError("krawtchouk needs p > 0, q > 0, p + q = 1")
        elif self.kind in ("hahn", "associated_hahn"):
            if self.alpha is None or self.beta is None or not (self.alpha > 0 and self.beta > 0):
                raise ConfigurationError(f"{self.kind} needs alpha > 0 and beta > 0")
        elif self.V is None:
            raise ConfigurationError("generic weight needs a potential V")

    @classmethod
    def krawtchouk(cls, p, q=None):
        return cls("krawtchouk", p=float(p), q=float(1.0 - p if q is None else q))

    @classmethod
    def hahn(cls, alpha, beta):
        return cls("hahn", alpha=float(alpha), beta=float(beta))

    @classmethod
    def associated_hahn(cls, alpha, beta):
        return cls("associated_hahn", alpha=float(alpha), beta=float(beta))

    @classmethod
    def generic(cls, V, gamma=0.0, eta=None):
        return cls("generic", V=V, gamma=float(gamma), eta=eta)

    def describe(self):
        if self.kind == "krawtchouk":
            return {"kind": self.kind, "p": self.p, "q": self.q}
        if self.kind in ("hahn", "associated_hahn"):
            return {"kind": self.kind, "alpha": self.alpha, "beta": self.beta}
        return {"kind": self.kind, "gamma": self.gamma}

    def potential(self, N=None):
        """Real-analytic field ``V`` of the product representation.

        For Hahn-type weights whose parameters grow with ``N`` (hexagon
        columns) the offsets ``A = (alpha-1)/N`` and ``B = (beta-1)/N`` are
        kept; with ``N=None`` they are dropped.  Additive constants are
        irrelevant to the equilibrium problem and omitted.
        """
        if self.kind == "krawtchouk":
            slope = np.log(self.q / self.p)
            return lambda x: slope * np.asarray(x, dtype=float)
        if self.kind == "generic":
            return self.V
        A = max(self.alpha - 1.0, 0.0) / N if N else 0.0
        B = max(self.beta - 1.0, 0.0) / N if N else 0.0
        sgn = -1.0 if self.kind == "hahn" else 1.0

        def V(x):
            x = np.asarray(x, dtype=float)
            u = x + A
            v = 1.0 - x + B
            return sgn * (_xlogx(u) + _xlogx(v))

        return V


def _xlogx(u):
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(u > 0, u * np.log(np.where(u > 0, u, 1.0)), 0.0)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class LogWeights:
    """Natural logs of the weights on a node set (see module docstring)."""

    nodeset: NodeSet
    field_hp: tuple = field(repr=False)
    spec: Optional[WeightSpec] = None
    dual: bool = False

    @property
    def N(self):
        return self.nodeset.N

    @property
    def nodes(self):
        return self.nodeset.nodes

    @property
    def logw_hp(self):
        with _mp.working_precision(_mp.REF_BITS):
            return tuple(f - s for f, s in zip(self.field_hp, self.nodeset.log_prod_hp))

    @property
    def logw(self):
        return _mp.to_float(self.logw_hp)

    @property
    def field(self):
        return _mp.to_float(self.field_hp)

    def weights(self):
        return np.exp(self.logw)


def _lbinom(x, y):
    return _mp.lgamma(x + 1) - _mp.lgamma(y + 1) - _mp.lgamma(x - y + 1)


def _closed_form_logw(spec, N):
    """Log of the classical closed-form weights, indexed by j."""
    lg = _mp.lgamma
    M = gmpy2.mpfr(N)
    prefactor = (M - 1) * gmpy2.log(M) - lg(M)
    out = []
    if spec.kind == "krawtchouk":
        p, q = gmpy2.mpfr(spec.p), gmpy2.mpfr(spec.q)
        const = prefactor + gmpy2.log(p * q) / 2 - M * gmpy2.log(q)
        for j in range(N):
            J = gmpy2.mpfr(j)
            out.append(const + _lbinom(M - 1, J) + J * gmpy2.log(p) + (M - 1 - J) * gmpy2.log(q))
    elif spec.kind == "hahn":
        al, be = gmpy2.mpfr(spec.alpha), gmpy2.mpfr(spec.beta)
        const = prefactor - _lbinom(M + be - 2, be - 1)
        for j in range(N):
            J = gmpy2.mpfr(j)
            out.append(const + _lbinom(J + al - 1, J) + _lbinom(M + be - 2 - J, M - 1 - J))
    else:
        al, be = gmpy2.mpfr(spec.alpha), gmpy2.mpfr(spec.beta)
        const = prefactor + lg(M) + lg(M + be - 1) + lg(al)
        for j in range(N):
            J = gmpy2.mpfr(j)
            out.append(const - lg(J + 1) - lg(al + J) - lg(M - J) - lg(M + be - 1 - J))
    return out


def log_weight(spec, nodeset):
    """Evaluate ``spec`` on ``nodeset`` entirely in log-space."""
    N = nodeset.N
    with _mp.working_precision(_mp.REF_BITS):
        if spec.kind == "generic":
            x = nodeset.nodes
            V = np.asarray(spec.V(x), dtype=float) * np.ones(N)
            eta = np.zeros(N) if spec.eta is None else np.asarray(spec.eta(x), dtype=float) * np.ones(N)
            if not (np.all(np.isfinite(V)) and np.all(np.isfinite(eta))):
                raise ConfigurationError("potential is not finite at every node")
            field_hp = tuple(-N * gmpy2.mpfr(float(v)) - gmpy2.mpfr(spec.gamma)
                             - gmpy2.mpfr(float(e)) / N for v, e in zip(V, eta))
        else:
            logw = _closed_form_logw(spec, N)
            field_hp = tuple(lw + s for lw, s in zip(logw, nodeset.log_prod_hp))
    return LogWeights(nodeset, field_hp, spec)


def dual_weights(logw):
    """Dual family: ``log wbar_j = -log w_j - 2 S_j``, i.e. ``F -> -F``."""
    with _mp.working_precision(_mp.REF_BITS):
        field_hp = tuple(-f for f in logw.field_hp)
    return LogWeights(logw.nodeset, field_hp, logw.spec, not logw.dual)


def from_log_values(nodeset, logw_values, spec=None):
    """Wrap arbitrary log-weights (floats or mpfr) on a node set."""
    with _mp.working_precision(_mp.REF_BITS):
        field_hp = tuple(gmpy2.mpfr(v) + s for v, s in zip(logw_values, nodeset.log_prod_hp))
    return LogWeights(nodeset, field_hp, spec)

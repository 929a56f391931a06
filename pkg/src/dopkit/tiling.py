"""Rhombus tilings of the abc-hexagon and their column ensembles.

Lattice model.  A tiling is encoded by c non-intersecting lattice paths:
path i starts at height u = i at x = 0 and ends at u = b + i at x = a + b,
taking a + b unit steps of which exactly b go up.  On the vertical line
x = m the admissible heights form the column

    u_bot(m) = max(0, m - a)  <=  u  <=  c - 1 + min(m, b),

which holds gamma_m + 1 = c + L_m sites with L_m = min(m, b) - max(0, m - a).
The c path heights on that line are the particles, the remaining L_m sites
the holes, and positions are measured upwards from u_bot(m).
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from . import equilibrium, kernels, nodes_weights as nw, orthopoly
from .errors import ConfigurationError

MAX_ENUMERATION = 12  # a*b*c cap for exhaustive enumeration


@dataclass(frozen=True)
class Hexagon:
    a: int
    b: int
    c: int

    def __post_init__(self):
        for name in ("a", "b", "c"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ConfigurationError(f"hexagon side {name} must be a positive integer")
            object.__setattr__(self, name, int(v))

    def u_bottom(self, m):
        return max(0, m - self.a)

    def hole_count(self, m):
        return min(m, self.b) - max(0, m - self.a)

    def column_height(self, m):
        """Number of sites gamma_m + 1 on the line x = m."""
        return self.c + self.hole_count(m)


def macmahon(hexagon):
    """Exact number of rhombus tilings."""
    a, b, c = hexagon.a, hexagon.b, hexagon.c
    num, den = 1, 1
    for i in range(1, a + 1):
        for j in range(1, b + 1):
            for k in range(1, c + 1):
                num *= i + j + k - 1
                den *= i + j + k - 2
    q = Fraction(num, den)
    if q.denominator != 1:
        raise ArithmeticError("MacMahon product is not an integer")
    return int(q)


# -- exhaustive enumeration -------------------------------------------------


@dataclass(frozen=True)
class Tiling:
    """Path heights per column (x = 0..a+b) and the induced hole sets."""

    heights: tuple
    holes: tuple = field(repr=False)


def enumerate_tilings(hexagon):
    """All tilings via non-intersecting paths (refused when a*b*c > 12)."""
    a, b, c = hexagon.a, hexagon.b, hexagon.c
    if a * b * c > MAX_ENUMERATION:
        raise ConfigurationError(f"enumeration is limited to a*b*c <= {MAX_ENUMERATION}")
    width = a + b
    out = []

    def extend(cols):
        x = len(cols) - 1
        if x == width:
            if cols[-1] == tuple(b + i for i in range(c)):
                out.append(cols)
            return
        cur = cols[-1]
        for ups in range(1 << c):
            nxt = tuple(h + ((ups >> i) & 1) for i, h in enumerate(cur))
            if any(nxt[i] >= nxt[i + 1] for i in range(c - 1)):
                continue
            if any(not (i + max(0, x + 1 - a) <= nxt[i] <= i + min(x + 1, b)) for i in range(c)):
                continue
            extend(cols + [nxt])

    extend([tuple(range(c))])
    tilings = []
    for cols in out:
        holes = []
        for m in range(1, width):
            u0 = hexagon.u_bottom(m)
            occupied = {h - u0 for h in cols[m]}
            holes.append(tuple(n for n in range(hexagon.column_height(m)) if n not in occupied))
        tilings.append(Tiling(tuple(cols), tuple(holes)))
    return tilings


def column_marginal(tilings, m):
    """Exact frequency of each hole configuration on column m."""
    counts = {}
    for t in tilings:
        key = t.holes[m - 1]
        counts[key] = counts.get(key, 0) + 1
    total = len(tilings)
    return {k: Fraction(v, total) for k, v in counts.items()}


# -- column ensembles -------------------------------------------------------


@dataclass(frozen=True)
class ColumnEnsemble:
    hexagon: Hexagon
    m: int
    a_m: int
    b_m: int
    gamma_m: int
    L_m: int
    nodeset: object = field(repr=False)
    particle_weights: object = field(repr=False)
    hole_weights: object = field(repr=False)

    @property
    def N(self):
        return self.gamma_m + 1


def _oriented(hexagon):
    """Side lengths with a >= b, as the weight formulas assume."""
    if hexagon.a >= hexagon.b:
        return hexagon.a, hexagon.b, False
    return hexagon.b, hexagon.a, True


def column_ensemble(hexagon, m):
    if not 1 <= m <= hexagon.a + hexagon.b - 1:
        raise ConfigurationError(f"column m must lie in [1, {hexagon.a + hexagon.b - 1}]")
    a, b, _ = _oriented(hexagon)
    a_m, b_m = abs(a - m), abs(b - m)
    L = hexagon.hole_count(m)
    gamma = hexagon.c + L - 1
    nodeset = nw.build_nodes(nw.uniform_density(), gamma + 1)
    holes = nw.log_weight(nw.WeightSpec.hahn(a_m + 1, b_m + 1), nodeset)
    particles = nw.log_weight(nw.WeightSpec.associated_hahn(a_m + 1, b_m + 1), nodeset)
    return ColumnEnsemble(hexagon, m, a_m, b_m, gamma, L, nodeset, particles, holes)


def _exact_weights(col, which):
    g, am, bm = col.gamma_m, col.a_m, col.b_m
    f = math.factorial
    if which == "holes":
        return [Fraction(f(n + am) * f(g - n + bm), f(n) * f(g - n)) for n in range(g + 1)]
    return [Fraction(1, f(n) * f(am + n) * f(g - n) * f(g - n + bm)) for n in range(g + 1)]


def exact_configuration_law(col, which="holes"):
    """Exact rational probabilities of every configuration of the column
    ensemble (squared Vandermonde times weights)."""
    w = _exact_weights(col, which)
    size = col.L_m if which == "holes" else col.hexagon.c
    raw = {}
    for S in combinations(range(col.N), size):
        val = Fraction(1)
        for j in S:
            val *= w[j]
        for i, j in combinations(S, 2):
            val *= (i - j) ** 2
        raw[S] = val
    Z = sum(raw.values())
    return {S: v / Z for S, v in raw.items()}


def _orient_positions(hexagon, col_positions, N):
    # when a < b the weights describe the column read from the top
    _, _, flipped = _oriented(hexagon)
    if not flipped:
        return col_positions
    return tuple(sorted(N - 1 - n for n in col_positions))


def hole_law_in_lattice(col):
    """Exact hole law with positions measured from u_bot(m)."""
    law = exact_configuration_law(col, "holes")
    return {_orient_positions(col.hexagon, S, col.N): p for S, p in law.items()}


def column_kernel(col, which="holes", precision_bits=None):
    lw = col.hole_weights if which == "holes" else col.particle_weights
    k = col.L_m if which == "holes" else col.hexagon.c
    basis = orthopoly.build_basis_adaptive(lw, k, precision_bits)
    return kernels.cd_kernel(basis, k)


def one_point_profile(col, which="holes"):
    """Probability that each position 0..gamma_m holds a hole (or particle)."""
    K = column_kernel(col, which)
    diag = np.clip(np.diag(K.K), 0.0, 1.0)
    _, _, flipped = _oriented(col.hexagon)
    return diag[::-1].copy() if flipped else diag


# -- frozen boundary --------------------------------------------------------


def column_field(col):
    spec = nw.WeightSpec.hahn(col.a_m + 1, col.b_m + 1)
    return equilibrium.field(spec.potential(col.N), nw.uniform_density())


def column_equilibrium(col, M=2000):
    """Equilibrium measure of the hole ensemble at ratio L_m / (gamma_m + 1)."""
    return equilibrium.solve(column_field(col), Fraction(col.L_m, col.N), M)


def hexagon_vertices(alpha, beta, gamma):
    """Vertices of the rescaled hexagon in lattice coordinates (x, u)."""
    return np.array([(0.0, 0.0), (alpha, 0.0), (alpha + beta, beta), (alpha + beta, beta + gamma),
                     (beta, beta + gamma), (0.0, gamma)])


def inscribed_ellipse(alpha, beta, gamma):
    """Center C and shape S of the ellipse tangent to all six sides.

    The hexagon is centrally symmetric, so tangency to the sides u = 0,
    x = 0 and x - u = alpha fixes S through n^T S n = (d - n^T C)^2.
    """
    C = np.array([(alpha + beta) / 2, (beta + gamma) / 2])
    s11 = C[0] ** 2
    s22 = C[1] ** 2
    s12 = 0.5 * (s11 + s22 - (alpha - C[0] + C[1]) ** 2)
    return C, np.array([[s11, s12], [s12, s22]])


def ellipse_at(alpha, beta, gamma, x):
    """The two u-values of the inscribed ellipse on the vertical line x."""
    C, S = inscribed_ellipse(alpha, beta, gamma)
    Q = np.linalg.inv(S)
    dx = x - C[0]
    # Q11 dx^2 + 2 Q12 dx du + Q22 du^2 = 1
    qa, qb, qc = Q[1, 1], 2 * Q[0, 1] * dx, Q[0, 0] * dx * dx - 1
    disc = qb * qb - 4 * qa * qc
    if disc < 0:
        raise ConfigurationError("line does not meet the ellipse")
    r = math.sqrt(disc)
    return C[1] + (-qb - r) / (2 * qa), C[1] + (-qb + r) / (2 * qa)


@dataclass(frozen=True)
class FrozenBoundary:
    tau: float
    n_scale: int
    lower: float
    upper: float
    ellipse: tuple
    diameter: float
    kinds: tuple

    @property
    def max_relative_error(self):
        return max(abs(self.lower - self.ellipse[0]), abs(self.upper - self.ellipse[1])) / self.diameter


def frozen_boundary(alpha, beta, gamma, tau, n_scale, M=2000):
    """Band edges of column m = tau n in rescaled lattice coordinates."""
    n = int(n_scale)
    a, b, c = round(alpha * n), round(beta * n), round(gamma * n)
    m = round(tau * n)
    if not 0 < tau < alpha + beta or not 1 <= m <= a + b - 1:
        raise ConfigurationError("tau must lie strictly inside (0, alpha + beta)")
    hexagon = Hexagon(a, b, c)
    col = column_ensemble(hexagon, m)
    eqm = column_equilibrium(col, M)
    cls = equilibrium.classify_intervals(eqm)
    bands = [s for s in cls.segments if s.kind == "band"]
    if not bands:
        raise ConfigurationError("column has no band")
    left, right = bands[0].left, bands[-1].right
    if hexagon.a < hexagon.b:
        left, right = 1 - right, 1 - left
    u0 = hexagon.u_bottom(m)
    to_u = lambda e: (u0 + e * col.N - 0.5) / n
    verts = hexagon_vertices(alpha, beta, gamma)
    diameter = max(float(np.linalg.norm(p - q)) for p in verts for q in verts)
    ell = ellipse_at(alpha, beta, gamma, m / n)
    return FrozenBoundary(m / n, n, to_u(left), to_u(right), ell, diameter, cls.kinds)


__all__ = [
    "Hexagon", "Tiling", "ColumnEnsemble", "FrozenBoundary", "macmahon", "enumerate_tilings",
    "column_marginal", "column_ensemble", "exact_configuration_law", "hole_law_in_lattice",
    "column_kernel", "one_point_profile", "column_field", "column_equilibrium",
    "hexagon_vertices", "inscribed_ellipse", "ellipse_at", "frozen_boundary",
]

"""Structural checks of the band, saturated-region and hard-edge asymptotics.

Every check normalizes pi_{N,k} by the envelope exp(k int log|z-x| dmu)
and inspects the ratio

    r(z) = pi_{N,k}(z) * exp(-k int log|z - x| dmu_min(x)),

computed as a difference of logarithms so that neither factor overflows.
Theta-function amplitudes are never given numerical values: they enter only
as bounded profiles or single fitted constants.
"""

import math
from dataclasses import dataclass, field

import gmpy2
import numpy as np
from scipy.special import gammaln

from . import _mp, equilibrium, orthopoly
from .errors import PrecisionError, PreconditionError


def envelope_ratio(basis, k, eqm, z):
    """r(z) for real ``z`` (array)."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    logp, sign = orthopoly.evaluate_log(basis, k, z)
    lt = equilibrium.log_transform(eqm, k, z)
    with np.errstate(over="ignore"):
        return sign * np.exp(logp - lt)


def _sign_changes(values):
    s = np.sign(values)
    s = s[s != 0]
    return int(np.sum(s[1:] != s[:-1]))


def _inner(seg, frac):
    pad = frac * (seg.right - seg.left)
    return seg.left + pad, seg.right - pad


def _off_nodes(grid, nodes, min_sep):
    """Nudge grid points that fall within ``min_sep`` of a node."""
    out = grid.copy()
    idx = np.clip(np.searchsorted(nodes, out), 1, len(nodes) - 1)
    near = np.minimum(np.abs(out - nodes[idx - 1]), np.abs(out - nodes[idx]))
    out[near < min_sep] += 2 * min_sep
    return out


@dataclass
class EnvelopeReport:
    region: tuple
    z: np.ndarray = field(repr=False)
    ratio: np.ndarray = field(repr=False)
    max_abs: float
    sign_changes: int
    expected_changes: float
    zero_count: int
    findings: list

    @property
    def ok(self):
        return not self.findings


def band_check(basis, k, eqm, segment, n_samples=None, inner=0.2):
    """Envelope boundedness and oscillation frequency on the middle 60% of a band."""
    left, right = _inner(segment, inner)
    mass = float(eqm.cdf(right) - eqm.cdf(left))
    expected = k * mass
    n = int(n_samples) if n_samples else max(400, int(40 * expected))
    nodes = np.asarray(basis.nodes)
    gap = float(np.min(np.diff(nodes))) if len(nodes) > 1 else 1.0
    z = _off_nodes(np.linspace(left, right, n), nodes, 1e-3 * gap)
    r = envelope_ratio(basis, k, eqm, z)
    counts = orthopoly.sturm_count(basis, k, [left, right])
    zeros_in = int(counts[1] - counts[0])
    changes = _sign_changes(r)
    findings = []
    if not np.all(np.isfinite(r)):
        findings.append("envelope ratio is not finite")
    if abs(changes - expected) > 2:
        findings.append(f"{changes} sign changes against k*mu = {expected:.2f}")
    if abs(changes - zeros_in) > 2:
        findings.append(f"{changes} sign changes against {zeros_in} zeros")
    return EnvelopeReport((left, right), z, r, float(np.max(np.abs(r))), changes, expected,
                          zeros_in, findings)


@dataclass
class SaturatedReport:
    region: tuple
    cosine_at_nodes: float
    max_zero_distance: float
    unmatched_nodes: list
    dislocations: list
    spurious: list
    midpoint_profile: np.ndarray = field(repr=False)
    profile_log_jump: float = 0.0
    findings: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.findings


def cosine_at_nodes(nodeset):
    """max_j |cos(pi N int_{x_j}^b rho0)| (zero by the quantization rule)."""
    N = nodeset.N
    tail = 1.0 - np.array([float(nodeset.density.cdf(x)) for x in nodeset.nodes])
    return float(np.max(np.abs(np.cos(np.pi * N * tail))))


def _zeros_for(basis, k):
    try:
        return orthopoly.zeros(basis, k)
    except PrecisionError:
        return orthopoly.zeros_adaptive(basis.logw, k, 2 * basis.precision_bits)


def saturated_check(basis, k, eqm, segment, zeros=None, inner=0.2, classification=None):
    """Cosine structure and zero confinement inside a saturated region."""
    if segment.kind != "saturated":
        raise PreconditionError("segment is not saturated")
    zs = _zeros_for(basis, k) if zeros is None else zeros
    z = zs.zeros
    nodes = np.asarray(basis.nodes)
    left, right = orthopoly._shrink(segment, eqm.a, eqm.b, inner)
    idx = np.flatnonzero((nodes >= left) & (nodes <= right))
    findings = []
    cos_max = cosine_at_nodes(basis.logw.nodeset)
    if cos_max > 1e-12:
        findings.append(f"cosine at nodes {cos_max:.3e}")
    dist, unmatched = [], []
    for n in idx:
        half = 0.5 * orthopoly._gap(nodes, n)
        d = float(np.min(np.abs(z - nodes[n]))) if len(z) else math.inf
        if d < half:
            dist.append(d)
        else:
            unmatched.append(int(n))
    if len(unmatched) > 1:
        findings.append(f"{len(unmatched)} interior nodes without a nearby zero")
    report = orthopoly.classify_zeros(zs, eqm, classification, margin=inner)
    seg_info = [s for s in report.segments if s["left"] <= left + 1e-12 and s["right"] >= right - 1e-12]
    disl = seg_info[0]["dislocations"] if seg_info else []
    if len(disl) > 1:
        findings.append(f"{len(disl)} dislocations")
    mids = 0.5 * (nodes[idx[:-1]] + nodes[idx[1:]]) if len(idx) > 1 else np.array([])
    if len(mids):
        r = envelope_ratio(basis, k, eqm, mids)
        tail = 1.0 - np.array([float(basis.logw.nodeset.density.cdf(x)) for x in mids])
        prof = r / (2 * np.cos(np.pi * basis.N * tail))
        if not np.all(np.isfinite(prof)):
            findings.append("midpoint profile is not finite")
        with np.errstate(divide="ignore"):
            logs = np.log(np.abs(prof))
        jump = float(np.max(np.abs(np.diff(logs)))) if len(logs) > 1 else 0.0
    else:
        prof, jump = np.array([]), 0.0
    spurious = [s for s in report.spurious if left <= s <= right]
    return SaturatedReport((left, right), cos_max, max(dist) if dist else float("nan"), unmatched,
                           list(disl), spurious, prof, jump, findings)


def gamma_inside(zeta):
    """Gamma(1/2 - zeta) / (sqrt(2 pi) e^zeta (-zeta)^(-zeta)) for zeta <= 0."""
    zeta = np.asarray(zeta, dtype=float)
    mz = -zeta
    with np.errstate(divide="ignore", invalid="ignore"):
        xlogx = np.where(mz > 0, mz * np.log(np.where(mz > 0, mz, 1.0)), 0.0)
    return np.exp(gammaln(0.5 - zeta) - 0.5 * math.log(2 * math.pi) - zeta - xlogx)


def gamma_outside(zeta):
    """sqrt(2 pi) e^(-zeta) zeta^zeta / Gamma(1/2 + zeta) for zeta >= 0."""
    zeta = np.asarray(zeta, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        xlogx = np.where(zeta > 0, zeta * np.log(np.where(zeta > 0, zeta, 1.0)), 0.0)
    return np.exp(0.5 * math.log(2 * math.pi) - zeta + xlogx - gammaln(0.5 + zeta))


@dataclass
class HardEdgeReport:
    endpoint: str
    zeta_inside: np.ndarray = field(repr=False)
    zeta_outside: np.ndarray = field(repr=False)
    scaled_inside: np.ndarray = field(repr=False)
    scaled_outside: np.ndarray = field(repr=False)
    const_inside: float = 0.0
    const_outside: float = 0.0
    deviation_inside: np.ndarray = field(default=None, repr=False)
    deviation_outside: np.ndarray = field(default=None, repr=False)
    edge_zero_offset: float = float("nan")
    log10_edge_zero_offset: float = float("nan")
    findings: list = field(default_factory=list)

    @property
    def max_deviation(self):
        return float(max(np.max(self.deviation_inside), np.max(self.deviation_outside)))

    @property
    def edge_mismatch(self):
        """Relative jump of the fitted curve across zeta = 0."""
        return abs(self.const_inside - self.const_outside) / max(abs(self.const_inside), abs(self.const_outside))

    @property
    def ok(self):
        return not self.findings


def _fit_constant(y, g):
    return float(np.dot(y, g) / np.dot(g, g))


def zeta_grid(n=41, C=1.0, avoid=0.05):
    """Inside/outside zeta samples on [-C, 0) and (0, C], kept away from the
    half-integers where the node cosine vanishes."""
    zin = np.linspace(-C, 0, n)[:-1]
    zin = zin[np.abs(((zin + 0.5) % 1.0) - 0.0) > avoid]
    zin = zin[np.abs(((zin + 0.5) % 1.0) - 1.0) > avoid]
    zout = np.linspace(0, C, n)[1:]
    return zin, zout


def hard_edge_check(basis, k, eqm, endpoint="b", C=1.0, n=41, classification=None, zeros=None):
    """Compare the polynomial near a saturated endpoint with the Gamma factors."""
    cls = equilibrium.classify_intervals(eqm) if classification is None else classification
    seg = cls.segments[-1] if endpoint == "b" else cls.segments[0]
    if seg.kind != "saturated":
        raise PreconditionError(f"endpoint {endpoint} is not adjacent to a saturated region")
    density = basis.logw.nodeset.density
    N = basis.N
    zin, zout = zeta_grid(n, C)
    if endpoint == "b":
        e = density.b
        rho = float(density.rho0(np.asarray(e)))
        z_in, z_out = e + zin / (N * rho), e + zout / (N * rho)
        tail_in = 1.0 - np.array([float(density.cdf(x)) for x in z_in])
    else:
        # mirror the variable so that the same formulas apply at z = a
        e = density.a
        rho = float(density.rho0(np.asarray(e)))
        z_in, z_out = e - zin / (N * rho), e - zout / (N * rho)
        tail_in = np.array([float(density.cdf(x)) for x in z_in])
    r_in = envelope_ratio(basis, k, eqm, z_in) / (2 * np.cos(np.pi * N * tail_in))
    r_out = envelope_ratio(basis, k, eqm, z_out)
    g_in, g_out = gamma_inside(zin), gamma_outside(zout)
    c_in, c_out = _fit_constant(r_in, g_in), _fit_constant(r_out, g_out)
    dev_in = np.abs(r_in / (c_in * g_in) - 1)
    dev_out = np.abs(r_out / (c_out * g_out) - 1)
    rep = HardEdgeReport(endpoint, zin, zout, r_in, r_out, c_in, c_out, dev_in, dev_out)
    zs = _zeros_for(basis, k) if zeros is None else zeros
    # the offset is exponentially small: take the difference at full precision
    with _mp.working_precision(zs.basis.precision_bits):
        if endpoint == "b":
            off = gmpy2.mpfr(float(basis.nodes[-1])) - zs.zeros_hp[-1]
        else:
            off = zs.zeros_hp[0] - gmpy2.mpfr(float(basis.nodes[0]))
        rep.edge_zero_offset = float(off)
        rep.log10_edge_zero_offset = float(gmpy2.log10(off)) if off > 0 else float("nan")
    if not rep.edge_zero_offset > 0:
        rep.findings.append("extreme zero is not strictly inside the extreme node")
    if not (np.all(np.isfinite(r_in)) and np.all(np.isfinite(r_out))):
        rep.findings.append("scaled polynomial is not finite")
    return rep


def fitted_rate(Ns, values):
    """Slope of log(values) against log(N); reported, never asserted."""
    return float(np.polyfit(np.log(np.asarray(Ns, float)), np.log(np.asarray(values, float)), 1)[0])


__all__ = [
    "EnvelopeReport", "SaturatedReport", "HardEdgeReport", "envelope_ratio", "band_check",
    "cosine_at_nodes", "saturated_check", "gamma_inside", "gamma_outside", "zeta_grid",
    "hard_edge_check", "fitted_rate",
]

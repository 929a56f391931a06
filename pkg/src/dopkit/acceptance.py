"""Acceptance suite: fourteen numbered criteria with deterministic reports.

Each criterion returns a :class:`CriterionResult` whose ``details`` hold
only JSON-serializable numbers, so that two runs with the same seed give
byte-identical reports.
"""

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

import numpy as np

from . import asymptotics_harness as ah
from . import ensembles, equilibrium as eq, kernels as kn, nodes_weights as nw, orthopoly as op
from . import tiling
from .errors import DopkitError, PrecisionError

DEFAULT_SEED = 20240601
SIGN_TOL = 1e-5  # band tolerance for the variational derivative (grid discretization)


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    summary: str
    details: dict = field(default_factory=dict)

    def line(self):
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number:2d}. {self.title}: {self.summary}"

    def as_dict(self):
        return {"number": self.number, "title": self.title, "passed": bool(self.passed),
                "summary": self.summary, "details": self.details}


def _f(x):
    return float(f"{float(x):.12g}")


# -- shared fixtures --------------------------------------------------------

UNIFORM = nw.uniform_density()
KRAW_HALF = nw.WeightSpec.krawtchouk(0.5)
KRAW_GAP = nw.WeightSpec.krawtchouk(0.9)  # void, band and saturated region at c = 1/2
HAHN22 = nw.WeightSpec.hahn(2, 2)


@lru_cache(maxsize=None)
def _logw(spec, N):
    return nw.log_weight(spec, nw.build_nodes(UNIFORM, N))


@lru_cache(maxsize=None)
def _gap_eqm():
    m = eq.solve(eq.field(KRAW_GAP.potential(), UNIFORM), Fraction(1, 2), M=2000)
    return m, eq.classify_intervals(m)


@lru_cache(maxsize=None)
def _gap_basis(N):
    return op.build_basis_adaptive(_logw(KRAW_GAP, N), N // 2)


@lru_cache(maxsize=None)
def _gap_kernel(N):
    return kn.cd_kernel(_gap_basis(N), N // 2)


@lru_cache(maxsize=None)
def _gap_zeros(N):
    b = _gap_basis(N)
    try:
        return op.zeros(b, N // 2)
    except PrecisionError:
        return op.zeros_adaptive(b.logw, N // 2, 2 * b.precision_bits)


# -- criteria ---------------------------------------------------------------


def criterion_1(seed=None):
    res = {}
    for spec, name in ((KRAW_HALF, "krawtchouk(1/2)"), (HAHN22, "hahn(2,2)")):
        for N in (30, 100):
            try:
                b = op.build_basis(_logw(spec, N), N - 1, 256)
                res[f"{name} N={N}"] = _f(op.orthonormality_residual(b))
            except PrecisionError:
                res[f"{name} N={N}"] = float("inf")
    worst = max(res.values())
    return CriterionResult(1, "Orthonormality", worst < 1e-20, f"max residual {worst:.3g} (< 1e-20)", res)


def criterion_2(seed=DEFAULT_SEED):
    lw = _logw(KRAW_HALF, 4)
    k = 2
    K = kn.cd_kernel(op.build_basis(lw, k, 256), k)
    probs = ensembles.enumerate_ensemble(lw, k)
    err_r1 = max(abs(kn.correlation(K, [i]) - ensembles.brute_correlation(probs, [i])) for i in range(4))
    err_r2 = max(abs(kn.correlation(K, [i, j]) - ensembles.brute_correlation(probs, [i, j]))
                 for i in range(4) for j in range(4) if i != j)
    err_a = 0.0
    for size in range(1, 4):
        for B in combinations(range(4), size):
            for m in range(size + 1):
                err_a = max(err_a, abs(kn.occupancy(K, B, m) - ensembles.brute_occupancy(probs, B, m)))
    worst = max(err_r1, err_r2, err_a)
    # seeded sampler cross-check, reported only
    samples = ensembles.sample_many(K, 20000, seed=seed)
    freq = ensembles.empirical_frequencies(samples, 4)
    p = np.diag(K.K)
    z = np.max(np.abs(freq - p) / np.sqrt(p * (1 - p) / len(samples)))
    details = {"R1": _f(err_r1), "R2": _f(err_r2), "A_m": _f(err_a), "sampler_max_z": _f(z),
               "sampler_frequencies": [_f(v) for v in freq]}
    return CriterionResult(2, "Brute-force determinantal oracle", worst < 1e-10,
                           f"max error {worst:.3g} (< 1e-10)", details)


def criterion_3(seed=None):
    checked, violations = 0, []
    for spec, name in ((KRAW_HALF, "krawtchouk(1/2)"), (HAHN22, "hahn(2,2)")):
        for N in range(10, 51):
            lw = _logw(spec, N)
            basis = op.build_basis_adaptive(lw, N - 1)
            for k in range(1, N):
                checked += 1
                try:
                    try:
                        zs = op.zeros(basis, k)
                    except PrecisionError:
                        zs = op.zeros_adaptive(lw, k, 2 * basis.precision_bits, kmax=N - 1)
                    op.check_zero_invariants(zs)
                except PrecisionError as exc:
                    violations.append(f"{name} N={N} k={k}: {exc}")
    return CriterionResult(3, "Zero confinement", not violations,
                           f"{len(violations)} violations in {checked} polynomials",
                           {"checked": checked, "violations": violations})


def criterion_4(seed=None):
    N = 12
    basis = op.build_basis(_logw(KRAW_HALF, N), N - 1, 256)
    dual = op.build_basis(nw.dual_weights(basis.logw), N - 1, 256)
    borodin = max(op.borodin_identity_check(basis, k, l, dual) for k in range(1, N) for l in range(N))
    spread = {}
    for al, be in ((2, 2), (3, 5)):
        for n in (12, 30):
            h = _logw(nw.WeightSpec.hahn(al, be), n)
            a = _logw(nw.WeightSpec.associated_hahn(al, be), n)
            ratio = np.exp(np.asarray(nw.dual_weights(h).logw) - np.asarray(a.logw))
            spread[f"hahn({al},{be}) N={n}"] = _f(np.ptp(ratio) / np.mean(ratio))
    worst = max(spread.values())
    ok = borodin < 1e-15 and worst < 1e-10
    return CriterionResult(4, "Duality", ok,
                           f"dual identity residual {borodin:.3g} (< 1e-15), ratio spread {worst:.3g} (< 1e-10)",
                           {"borodin": _f(borodin), "ratio_spread": spread})


def _sign_check(m, cls):
    bad = []
    for s in cls.segments:
        xs = np.linspace(s.left, s.right, 9)[1:-1]
        d = eq.variational_derivative(m, xs) - m.ell
        if s.kind == "band" and np.max(np.abs(d)) > SIGN_TOL:
            bad.append(f"band {np.max(np.abs(d)):.2e}")
        if s.kind == "void" and np.min(d) < -SIGN_TOL:
            bad.append(f"void {np.min(d):.2e}")
        if s.kind == "saturated" and np.max(d) > SIGN_TOL:
            bad.append(f"saturated {np.max(d):.2e}")
    return bad


def criterion_5(seed=None):
    fields = {"krawtchouk(1/2)": eq.field(KRAW_HALF.potential(), UNIFORM),
              "krawtchouk(0.9)": eq.field(KRAW_GAP.potential(), UNIFORM)}
    hexagon = tiling.Hexagon(40, 40, 40)
    columns = {}
    for m in (20, 40, 60):
        col = tiling.column_ensemble(hexagon, m)
        columns[f"hexagon column m={m}"] = (tiling.column_field(col), Fraction(col.L_m, col.N))
    kkt, signs, exps = {}, {}, {}
    runs = [(name, f, Fraction(1, 2)) for name, f in fields.items()]
    runs += [(name, f, c) for name, (f, c) in columns.items()]
    for name, f, c in runs:
        m = eq.solve(f, c, M=2000)
        cls = eq.classify_intervals(m)
        kkt[name] = _f(m.kkt_residual)
        signs[name] = _sign_check(m, cls)
        band_edges = [s1.right for s1, s2 in zip(cls.segments[:-1], cls.segments[1:])
                      if "band" in (s1.kind, s2.kind) and s1.kind != s2.kind]
        if name != "krawtchouk(1/2)":
            for e in band_edges:
                exps[f"{name} edge {e:.4f}"] = _f(eq.edge_exponent(m, cls, e)[0])
    ok = (max(kkt.values()) < 1e-8 and not any(signs.values())
          and bool(exps) and all(abs(v - 0.5) <= 0.1 for v in exps.values()))
    summary = (f"max KKT {max(kkt.values()):.3g} (< 1e-8), sign violations "
               f"{sum(len(v) for v in signs.values())}, edge exponents "
               f"{min(exps.values()):.3f}..{max(exps.values()):.3f} (0.5 +- 0.1)")
    return CriterionResult(5, "Equilibrium KKT", ok, summary,
                           {"kkt": kkt, "sign_violations": signs, "edge_exponents": exps})


def criterion_6(seed=None):
    m, _ = _gap_eqm()
    d = eq.zero_cdf_distance(m, _gap_zeros(200).zeros)
    return CriterionResult(6, "Zero-counting convergence", d < 0.05, f"sup distance {d:.4f} (< 0.05)",
                           {"N": 200, "distance": _f(d)})


def criterion_7(seed=None):
    m, cls = _gap_eqm()
    band = next(s for s in cls.segments if s.kind == "band")
    out = {}
    for N in (100, 200):
        K = _gap_kernel(N)
        center = int(np.argmin(np.abs(K.nodes - 0.5 * (band.left + band.right))))
        sc = kn.sine_compare(K, m, center, window=10, classification=cls)
        out[N] = (sc.diag_relative_error, sc.max_deviation)
    ok = out[100][0] < 0.1 and out[200][0] < out[100][0] and out[200][1] < out[100][1]
    summary = (f"diagonal error {out[100][0]:.4f} -> {out[200][0]:.4f}, "
               f"sine deviation {out[100][1]:.4f} -> {out[200][1]:.4f}")
    return CriterionResult(7, "Sine-kernel universality", ok, summary,
                           {f"N={N}": {"diag_error": _f(a), "sine_deviation": _f(b)} for N, (a, b) in out.items()})


def criterion_8(seed=None):
    m, cls = _gap_eqm()
    Ns = (50, 100, 150, 200)
    stats = {"void": [], "saturated": []}
    for N in Ns:
        for g in kn.gap_diagnostics(_gap_kernel(N), m, cls):
            stats[g.kind].append(g.max_diag)
    details, ok = {}, True
    for kind, vals in stats.items():
        vals = np.asarray(vals)
        slope, icept = np.polyfit(Ns, np.log(vals), 1)
        fit = slope * np.asarray(Ns) + icept
        r2 = 1 - np.sum((np.log(vals) - fit) ** 2) / np.sum((np.log(vals) - np.log(vals).mean()) ** 2)
        drop = vals[1] / vals[3]
        ok = ok and drop >= 2 and slope < 0 and r2 > 0.9
        details[kind] = {"values": [_f(v) for v in vals], "drop_100_200": _f(drop), "slope": _f(slope),
                         "r2": _f(r2)}
    summary = ", ".join(f"{k} drop {v['drop_100_200']:.3g}x slope {v['slope']:.3g} R2 {v['r2']:.4f}"
                        for k, v in details.items())
    return CriterionResult(8, "Gap behavior", ok, summary, details)


def criterion_9(seed=None):
    m, cls = _gap_eqm()
    sat = next(s for s in cls.segments if s.kind == "saturated")
    dist, disl = {}, {}
    for N in (50, 100, 150, 200):
        rep = ah.saturated_check(_gap_basis(N), N // 2, m, sat, zeros=_gap_zeros(N), classification=cls)
        dist[N] = rep.max_zero_distance
        disl[N] = len(rep.dislocations)
    ok = dist[200] < 0.5 * dist[100] and max(disl.values()) <= 1
    summary = f"max zero-node distance {dist[100]:.3g} -> {dist[200]:.3g}, max dislocations {max(disl.values())}"
    return CriterionResult(9, "Saturated-region zeros", ok, summary,
                           {"distance": {str(k): _f(v) for k, v in dist.items()},
                            "dislocations": {str(k): v for k, v in disl.items()}})


def criterion_10(seed=None):
    rows = {}
    for a in range(1, 13):
        for b in range(1, 13):
            for c in range(1, 13):
                if a * b * c <= tiling.MAX_ENUMERATION:
                    h = tiling.Hexagon(a, b, c)
                    rows[f"{a},{b},{c}"] = (tiling.macmahon(h), len(tiling.enumerate_tilings(h)))
    bad = [k for k, (x, y) in rows.items() if x != y]
    ok = not bad and tiling.macmahon(tiling.Hexagon(1, 1, 1)) == 2
    return CriterionResult(10, "MacMahon", ok, f"{len(rows) - len(bad)}/{len(rows)} hexagons match",
                           {"mismatches": bad, "counts": {k: v[0] for k, v in rows.items()}})


def criterion_11(seed=None):
    cases = [((2, 1, 1), 1), ((2, 2, 2), 1), ((2, 2, 2), 2)]
    out = {}
    for sides, m in cases:
        h = tiling.Hexagon(*sides)
        enum = tiling.column_marginal(tiling.enumerate_tilings(h), m)
        law = tiling.hole_law_in_lattice(tiling.column_ensemble(h, m))
        law = {k: v for k, v in law.items() if v != 0}
        out[f"{sides} m={m}"] = enum == law
    ok = all(out.values())
    return CriterionResult(11, "Hexagon column law", ok, f"{sum(out.values())}/{len(out)} exact matches", out)


def criterion_12(seed=None):
    errs = {}
    for tau in (0.5, 1.0, 1.5):
        fb = tiling.frozen_boundary(1, 1, 1, tau, 40)
        errs[str(tau)] = _f(fb.max_relative_error)
    worst = max(errs.values())
    return CriterionResult(12, "Frozen boundary", worst < 0.02, f"max relative error {worst:.4f} (< 0.02)", errs)


def criterion_13(seed=None):
    m, cls = _gap_eqm()
    cos, dev, mismatch = {}, {}, {}
    for N in (100, 200):
        b = _gap_basis(N)
        cos[N] = ah.cosine_at_nodes(b.logw.nodeset)
        rep = ah.hard_edge_check(b, N // 2, m, "b", classification=cls, zeros=_gap_zeros(N))
        dev[N] = rep.max_deviation
        mismatch[N] = rep.edge_mismatch
    ok = max(cos.values()) < 1e-12 and dev[200] < dev[100]
    summary = f"cosine at nodes {max(cos.values()):.3g} (< 1e-12), Gamma-fit deviation {dev[100]:.4g} -> {dev[200]:.4g}"
    return CriterionResult(13, "Hard edge", ok, summary,
                           {"cosine": {str(k): _f(v) for k, v in cos.items()},
                            "deviation": {str(k): _f(v) for k, v in dev.items()},
                            "edge_mismatch": {str(k): _f(v) for k, v in mismatch.items()}})


def criterion_14(seed=DEFAULT_SEED):
    first = report_json(run_suite("small", seed))
    second = report_json(run_suite("small", seed))
    same = first == second
    return CriterionResult(14, "Determinism", same,
                           "identical reports" if same else "reports differ", {"bytes": len(first)})


CRITERIA = {n: globals()[f"criterion_{n}"] for n in range(1, 15)}
TITLES = {1: "Orthonormality", 2: "Brute-force determinantal oracle", 3: "Zero confinement", 4: "Duality",
          5: "Equilibrium KKT", 6: "Zero-counting convergence", 7: "Sine-kernel universality",
          8: "Gap behavior", 9: "Saturated-region zeros", 10: "MacMahon", 11: "Hexagon column law",
          12: "Frozen boundary", 13: "Hard edge", 14: "Determinism"}
SUITES = {"small": (2, 10, 11), "full": tuple(range(1, 15))}


def run_criterion(n, seed=DEFAULT_SEED):
    """Run one criterion; library errors become a failed result."""
    try:
        return CRITERIA[n](seed)
    except DopkitError as exc:
        return CriterionResult(n, TITLES[n], False, f"error: {exc}", {"error": str(exc)})


def run_suite(suite="full", seed=DEFAULT_SEED, only=None, progress=None):
    numbers = SUITES[suite] if only is None else tuple(only)
    results = []
    for n in numbers:
        r = run_criterion(n, seed)
        if progress:
            progress(r)
        results.append(r)
    return {"suite": suite, "seed": int(seed), "passed": all(r.passed for r in results),
            "results": [r.as_dict() for r in results]}


def report_json(report):
    return json.dumps(report, sort_keys=True, indent=2, default=str)


__all__ = ["CriterionResult", "CRITERIA", "SUITES", "DEFAULT_SEED", "run_criterion", "run_suite",
           "report_json"]

"""Command-line front end.

Exit codes: 0 success, 1 configuration error, 2 numeric failure,
3 acceptance failure.
"""

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction

import numpy as np

from . import __version__, _mp
from . import acceptance, asymptotics_harness as ah, ensembles, equilibrium as eq
from . import kernels as kn, nodes_weights as nw, orthopoly as op, tiling
from .errors import ConfigurationError, DopkitError, NumericError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_ACCEPT = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    """argparse with configuration errors mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


# -- configuration ----------------------------------------------------------


def parse_fraction(text):
    """Exact rational from "p/q" or an integer string; floats are refused."""
    s = str(text).strip()
    try:
        if "/" in s:
            p, q = s.split("/")
            value = Fraction(int(p), int(q))
        else:
            value = Fraction(int(s))
    except (ValueError, ZeroDivisionError):
        raise ConfigurationError(f"c must be a rational 'p/q', got {text!r}") from None
    if not 0 < value < 1:
        raise ConfigurationError("c must lie in (0, 1)")
    return value


def parse_int_list(text):
    try:
        return [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise ConfigurationError(f"expected a comma-separated list of integers, got {text!r}") from None


def load_json_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}:{exc.lineno}:{exc.colno}: malformed JSON: {exc.msg}") from None


def density_from_dict(d):
    d = dict(d or {"kind": "uniform"})
    kind = d.get("kind", "uniform")
    a, b = float(d.get("a", 0.0)), float(d.get("b", 1.0))
    if kind == "uniform":
        return nw.uniform_density(a, b)
    if kind == "polynomial":
        return nw.polynomial_density(d["coeffs"], a, b)
    raise ConfigurationError(f"unknown density kind {kind!r}")


def weight_from_dict(d):
    d = dict(d)
    kind = d.get("kind")
    try:
        if kind == "krawtchouk":
            return nw.WeightSpec.krawtchouk(d["p"], d.get("q"))
        if kind in ("hahn", "associated_hahn"):
            return getattr(nw.WeightSpec, kind)(d["alpha"], d["beta"])
        if kind == "generic":
            poly = np.polynomial.Polynomial(np.asarray(d["V_coeffs"], dtype=float))
            return nw.WeightSpec.generic(poly, d.get("gamma", 0.0))
    except KeyError as exc:
        raise ConfigurationError(f"weight of kind {kind!r} needs field {exc.args[0]!r}") from None
    raise ConfigurationError(f"unknown weight kind {kind!r}")


@dataclass
class RunConfig:
    weight: dict
    density: dict = field(default_factory=lambda: {"kind": "uniform", "a": 0.0, "b": 1.0})
    N: list = field(default_factory=list)
    c: Fraction = None
    grid: int = 2000
    precision_bits: int = None
    seed: int = None

    def __post_init__(self):
        self.weight_spec = weight_from_dict(self.weight)
        self.node_density = density_from_dict(self.density)
        self.N = [int(n) for n in self.N]
        if any(n < 2 for n in self.N):
            raise ConfigurationError("N must be at least 2")
        if self.c is not None:
            for n in self.N:
                if (self.c * n).denominator != 1:
                    raise ConfigurationError(f"k = c N is not an integer for c = {self.c}, N = {n}")
        if self.precision_bits is None:
            self.precision_bits = _mp.default_bits()

    def k_for(self, N):
        return int(self.c * N)

    def logw(self, N):
        return nw.log_weight(self.weight_spec, nw.build_nodes(self.node_density, N))

    def resolved(self):
        return {"weight": self.weight_spec.describe(), "density": self.node_density.describe(),
                "N": self.N, "c": None if self.c is None else str(self.c), "grid": self.grid,
                "precision_bits": self.precision_bits, "seed": self.seed}


def build_config(args):
    raw = load_json_config(args.config) if getattr(args, "config", None) else {}
    weight = raw.get("weight", raw if "kind" in raw else None)
    if weight is None:
        raise ConfigurationError("config needs a 'weight' object")
    N = raw.get("N", [])
    if getattr(args, "N", None):
        N = parse_int_list(args.N)
    N = [N] if isinstance(N, int) else list(N)
    c = getattr(args, "c", None) or raw.get("c")
    return RunConfig(weight=weight, density=raw.get("density"), N=N,
                     c=None if c is None else parse_fraction(c),
                     grid=int(getattr(args, "grid", None) or raw.get("grid", 2000)),
                     precision_bits=getattr(args, "precision_bits", None) or raw.get("precision_bits"),
                     seed=getattr(args, "seed", None) if getattr(args, "seed", None) is not None
                     else raw.get("seed"))


def _single_N(cfg):
    if len(cfg.N) != 1:
        raise ConfigurationError("this command needs exactly one N")
    return cfg.N[0]


# -- output -----------------------------------------------------------------


def _timestamp():
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def atomic_write(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".dopkit-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def render_csv(header, rows, config):
    buf = io.StringIO()
    buf.write(f"# generated {_timestamp()}\n")
    buf.write(f"# config {json.dumps(config, sort_keys=True, default=str)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else str(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    return obj


def render_json(payload, config):
    doc = {"generated": _timestamp(), "config": config, "result": payload}
    return json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n"


def emit(args, kind, payload, config, header=None):
    """Write ``payload`` as CSV rows or JSON to --out (a path or a format name)."""
    out = getattr(args, "out", None) or kind
    fmt = out if out in ("csv", "json") else ("csv" if out.endswith(".csv") else "json")
    if fmt == "csv":
        if header is None:
            raise ConfigurationError("this command produces JSON output only")
        text = render_csv(header, payload, config)
    else:
        text = render_json(payload if header is None else [dict(zip(header, r)) for r in payload], config)
    if out in ("csv", "json"):
        sys.stdout.write(text)
    else:
        atomic_write(out, text)


# -- subcommands ------------------------------------------------------------


def cmd_nodes(args):
    density = density_from_dict({"kind": args.density, "a": args.a, "b": args.b,
                                 "coeffs": parse_coeffs(args.coeffs)})
    ns = nw.build_nodes(density, args.N)
    config = {"density": density.describe(), "N": args.N}
    rows = [(j, x) for j, x in enumerate(ns.nodes)]
    emit(args, "csv", rows, config, header=["j", "x"])
    return EXIT_OK


def parse_coeffs(text):
    if text is None:
        return None
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise ConfigurationError(f"bad coefficient list {text!r}") from None


def parse_grid(text, density):
    try:
        a, b, n = text.split(":")
        return np.linspace(float(a) if a else density.a, float(b) if b else density.b, int(n))
    except ValueError:
        raise ConfigurationError(f"--eval-grid must be a:b:n, got {text!r}") from None


def cmd_poly(args):
    cfg = build_config(args)
    N = _single_N(cfg)
    basis = op.build_basis_adaptive(cfg.logw(N), args.k, cfg.precision_bits)
    z = parse_grid(args.eval_grid, cfg.node_density)
    logs, signs = op.evaluate_log(basis, args.k, z)
    logp = logs - 0.5 * float(basis.log_h_hp[args.k])
    with np.errstate(over="ignore"):
        pvals = signs * np.exp(logp)
    rows = list(zip(z, logs, signs, logp, pvals))
    emit(args, "csv", rows, {**cfg.resolved(), "k": args.k, "bits_used": basis.precision_bits},
         header=["z", "log_abs_pi", "sign", "log_abs_p", "p"])
    return EXIT_OK


def cmd_zeros(args):
    cfg = build_config(args)
    N = _single_N(cfg)
    zs = op.zeros_adaptive(cfg.logw(N), args.k, cfg.precision_bits)
    op.check_zero_invariants(zs)
    nodes = zs.basis.nodes
    rows = []
    for i, z in enumerate(zs.zeros):
        j = int(np.argmin(np.abs(nodes - z)))
        rows.append((i, z, j, abs(z - nodes[j])))
    emit(args, "csv", rows, {**cfg.resolved(), "k": args.k, "bits_used": zs.basis.precision_bits},
         header=["i", "zero", "nearest_node", "distance"])
    return EXIT_OK


def _solve_eqm(cfg):
    if cfg.c is None:
        raise ConfigurationError("--c is required")
    N = cfg.N[0] if cfg.N else None
    phi = eq.field(cfg.weight_spec.potential(N if cfg.weight_spec.kind != "krawtchouk" else None),
                   cfg.node_density)
    m = eq.solve(phi, cfg.c, M=cfg.grid)
    if not m.converged:
        raise NumericError(f"equilibrium solver stopped at KKT residual {m.kkt_residual:.3e}")
    return m, eq.classify_intervals(m)


def _segments(cls):
    return [{"kind": s.kind, "left": s.left, "right": s.right} for s in cls.segments]


def cmd_eqm(args):
    cfg = build_config(args)
    m, cls = _solve_eqm(cfg)
    payload = {"grid": m.grid, "psi": m.psi, "ell": m.ell, "kkt_residual": m.kkt_residual,
               "iterations": m.iterations, "segments": _segments(cls), "violations": list(cls.violations)}
    if args.out and (args.out == "csv" or args.out.endswith(".csv")):
        emit(args, "csv", list(zip(m.grid, m.psi)), cfg.resolved(), header=["x", "psi"])
    else:
        emit(args, "json", payload, cfg.resolved())
    return EXIT_OK


def cmd_kernel(args):
    cfg = build_config(args)
    N = _single_N(cfg)
    basis = op.build_basis_adaptive(cfg.logw(N), args.k, cfg.precision_bits)
    K = kn.cd_kernel(basis, args.k)
    stats = [s.strip() for s in args.stats.split(",") if s.strip()]
    payload = {"cd_check": K.cd_check, "projection_defect": kn.projection_defect(K)}
    if any(s in ("sine", "gaps") for s in stats):
        cfg.c = Fraction(args.k, N)
        m, cls = _solve_eqm(cfg)
        payload["segments"] = _segments(cls)
    for s in stats:
        if s == "diag":
            payload["diag"] = K.diag
        elif s == "sine":
            band = [seg for seg in cls.segments if seg.kind == "band"]
            if not band:
                raise ConfigurationError("no band for the sine comparison")
            center = int(np.argmin(np.abs(K.nodes - 0.5 * (band[0].left + band[0].right))))
            window = min(10, center, N - 1 - center)
            sc = kn.sine_compare(K, m, center, window, cls)
            payload["sine"] = {"center": sc.center, "window": sc.window, "max_deviation": sc.max_deviation,
                               "diag_relative_error": sc.diag_relative_error}
        elif s == "gaps":
            payload["gaps"] = [{"kind": g.kind, "left": g.left, "right": g.right, "max_diag": g.max_diag,
                                "max_offdiag": g.max_offdiag} for g in kn.gap_diagnostics(K, m, cls)]
        else:
            raise ConfigurationError(f"unknown statistic {s!r}")
    emit(args, "json", payload, {**cfg.resolved(), "k": args.k, "stats": stats})
    return EXIT_OK


def cmd_sample(args):
    cfg = build_config(args)
    N = _single_N(cfg)
    seed = acceptance.DEFAULT_SEED if cfg.seed is None else int(cfg.seed)
    basis = op.build_basis_adaptive(cfg.logw(N), args.k, cfg.precision_bits)
    K = kn.cd_kernel(basis, args.k)
    samples = ensembles.sample_many(K, args.n_samples, seed=seed, order=args.order, batches=args.batches)
    rows = [(i, " ".join(str(j) for j in row)) for i, row in enumerate(samples)]
    config = {**cfg.resolved(), "seed": seed, "k": args.k, "n_samples": args.n_samples,
              "order": args.order, "batches": args.batches}
    emit(args, "csv", rows, config, header=["sample", "indices"])
    return EXIT_OK


def cmd_hexagon(args):
    if args.boundary:
        if None in (args.alpha, args.beta, args.gamma, args.tau, args.n):
            raise ConfigurationError("--boundary needs --alpha --beta --gamma --tau --n")
        fb = tiling.frozen_boundary(args.alpha, args.beta, args.gamma, args.tau, args.n, M=args.grid)
        payload = {"tau": fb.tau, "lower": fb.lower, "upper": fb.upper, "ellipse": list(fb.ellipse),
                   "max_relative_error": fb.max_relative_error, "segments": list(fb.kinds)}
        config = {k: getattr(args, k) for k in ("alpha", "beta", "gamma", "tau", "n", "grid")}
        emit(args, "json", payload, config)
        return EXIT_OK
    if None in (args.a, args.b, args.c):
        raise ConfigurationError("--a --b --c are required")
    h = tiling.Hexagon(args.a, args.b, args.c)
    config = {"a": h.a, "b": h.b, "c": h.c, "m": args.m}
    if args.profile:
        if args.m is None:
            raise ConfigurationError("--profile needs --m")
        col = tiling.column_ensemble(h, args.m)
        holes = tiling.one_point_profile(col, "holes")
        parts = tiling.one_point_profile(col, "particles")
        rows = [(n, h.u_bottom(args.m) + n, holes[n], parts[n]) for n in range(col.N)]
        emit(args, "csv", rows, config, header=["position", "u", "hole_probability", "particle_probability"])
        return EXIT_OK
    emit(args, "json", {"tilings": tiling.macmahon(h)}, config)
    return EXIT_OK


def _verify_one(payload):
    cfg = RunConfig(**payload["config"])
    N, checks = payload["N"], payload["checks"]
    k = cfg.k_for(N)
    phi = eq.field(cfg.weight_spec.potential(N if cfg.weight_spec.kind != "krawtchouk" else None),
                   cfg.node_density)
    m = eq.solve(phi, cfg.c, M=cfg.grid)
    cls = eq.classify_intervals(m)
    basis = op.build_basis_adaptive(cfg.logw(N), k, cfg.precision_bits)
    out = {"N": N, "k": k, "bits_used": basis.precision_bits, "segments": _segments(cls)}
    for name in checks:
        if name == "band":
            out["band"] = [{"region": r.region, "max_abs_ratio": r.max_abs, "sign_changes": r.sign_changes,
                            "expected": r.expected_changes, "zeros": r.zero_count, "findings": r.findings}
                           for r in (ah.band_check(basis, k, m, s) for s in cls.segments if s.kind == "band")]
        elif name == "saturated":
            out["saturated"] = [
                {"region": r.region, "cosine_at_nodes": r.cosine_at_nodes,
                 "max_zero_distance": r.max_zero_distance, "dislocations": r.dislocations,
                 "spurious": r.spurious, "profile_log_jump": r.profile_log_jump, "findings": r.findings}
                for r in (ah.saturated_check(basis, k, m, s, classification=cls)
                          for s in cls.segments if s.kind == "saturated")]
        elif name == "hardedge":
            out["hardedge"] = []
            for end, seg in (("a", cls.segments[0]), ("b", cls.segments[-1])):
                if seg.kind != "saturated":
                    continue
                r = ah.hard_edge_check(basis, k, m, end, classification=cls)
                out["hardedge"].append({
                    "endpoint": end, "const_inside": r.const_inside, "const_outside": r.const_outside,
                    "max_deviation": r.max_deviation, "edge_mismatch": r.edge_mismatch,
                    "edge_zero_offset": r.edge_zero_offset, "log10_edge_zero_offset": r.log10_edge_zero_offset,
                    "findings": r.findings})
    return out


VERIFY_CHECKS = ("band", "saturated", "hardedge")


def cmd_verify(args):
    cfg = build_config(args)
    if cfg.c is None or not cfg.N:
        raise ConfigurationError("verify needs --c and --N")
    checks = [s.strip() for s in args.checks.split(",") if s.strip()]
    unknown = set(checks) - set(VERIFY_CHECKS)
    if unknown:
        raise ConfigurationError(f"unknown checks {sorted(unknown)}")
    base = {"weight": cfg.weight, "density": cfg.density, "N": cfg.N, "c": cfg.c, "grid": cfg.grid,
            "precision_bits": cfg.precision_bits, "seed": cfg.seed}
    jobs = [{"config": base, "N": N, "checks": checks} for N in cfg.N]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            runs = list(pool.map(_verify_one, jobs))
    else:
        runs = [_verify_one(j) for j in jobs]
    payload = {"runs": runs}
    if "hardedge" in checks and len(runs) > 1:
        devs = [max((h["max_deviation"] for h in r["hardedge"]), default=float("nan")) for r in runs]
        payload["hardedge_deviation_by_N"] = dict(zip(cfg.N, devs))
    emit(args, "json", payload, {**cfg.resolved(), "checks": checks})
    return EXIT_OK


def cmd_accept(args):
    seed = acceptance.DEFAULT_SEED if args.seed is None else int(args.seed)
    only = parse_int_list(args.criteria) if args.criteria else None
    if only and any(n not in acceptance.CRITERIA for n in only):
        raise ConfigurationError("criteria are numbered 1..14")
    report = acceptance.run_suite(args.suite, seed, only=only, progress=lambda r: print(r.line(), flush=True))
    text = acceptance.report_json(report) + "\n"
    if args.out:
        atomic_write(args.out, text)
    print("ALL PASSED" if report["passed"] else "SOME CRITERIA FAILED")
    return EXIT_OK if report["passed"] else EXIT_ACCEPT


# -- parser -----------------------------------------------------------------


def build_parser():
    p = _Parser(prog="dopkit", description="Discrete orthogonal polynomials with varying weights.")
    p.add_argument("--version", action="version", version=f"dopkit {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, needs_config=True):
        if needs_config:
            sp.add_argument("--config", required=True, help="JSON file with weight/density settings")
            sp.add_argument("--N", help="number of nodes (comma-separated list for verify)")
            sp.add_argument("--precision-bits", type=int, dest="precision_bits")
        sp.add_argument("--out", help="output path, or 'csv'/'json' for stdout")

    sp = sub.add_parser("nodes", help="quantized nodes of a density")
    sp.add_argument("--density", default="uniform", choices=("uniform", "polynomial"))
    sp.add_argument("--coeffs", help="polynomial density coefficients c0,c1,...")
    sp.add_argument("--a", type=float, default=0.0)
    sp.add_argument("--b", type=float, default=1.0)
    sp.add_argument("--N", type=int, required=True)
    common(sp, needs_config=False)
    sp.set_defaults(func=cmd_nodes)

    sp = sub.add_parser("poly", help="evaluate pi_k on a grid")
    common(sp)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--eval-grid", default="::201", dest="eval_grid", help="a:b:n (empty a/b = interval ends)")
    sp.set_defaults(func=cmd_poly)

    sp = sub.add_parser("zeros", help="zeros of pi_k")
    common(sp)
    sp.add_argument("--k", type=int, required=True)
    sp.set_defaults(func=cmd_zeros)

    sp = sub.add_parser("eqm", help="constrained equilibrium measure")
    common(sp)
    sp.add_argument("--c", help="rational k/N as 'p/q'")
    sp.add_argument("--grid", type=int)
    sp.set_defaults(func=cmd_eqm)

    sp = sub.add_parser("kernel", help="Christoffel-Darboux kernel statistics")
    common(sp)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--stats", default="diag")
    sp.add_argument("--grid", type=int)
    sp.set_defaults(func=cmd_kernel)

    sp = sub.add_parser("sample", help="exact ensemble samples")
    common(sp)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--n-samples", type=int, default=1000, dest="n_samples")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--order", default="chain", choices=("chain", "scan", "scan-reversed"))
    sp.add_argument("--batches", type=int, default=1)
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser("hexagon", help="tiling counts, column profiles, frozen boundary")
    for name in ("a", "b", "c", "m", "n"):
        sp.add_argument(f"--{name}", type=int)
    for name in ("alpha", "beta", "gamma", "tau"):
        sp.add_argument(f"--{name}", type=float)
    sp.add_argument("--profile", action="store_true")
    sp.add_argument("--boundary", action="store_true")
    sp.add_argument("--grid", type=int, default=2000)
    common(sp, needs_config=False)
    sp.set_defaults(func=cmd_hexagon)

    sp = sub.add_parser("verify", help="asymptotic structure checks")
    common(sp)
    sp.add_argument("--c", required=True)
    sp.add_argument("--checks", default=",".join(VERIFY_CHECKS))
    sp.add_argument("--grid", type=int)
    sp.add_argument("--jobs", type=int, default=1)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("accept", help="run the acceptance suite")
    sp.add_argument("--suite", default="full", choices=tuple(acceptance.SUITES))
    sp.add_argument("--criteria", help="comma-separated criterion numbers")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out", help="JSON report path")
    sp.set_defaults(func=cmd_accept)
    return p


def run(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"dopkit: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"dopkit: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except DopkitError as exc:
        print(f"dopkit: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main(argv=None):
    try:
        code = run(argv)
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else EXIT_CONFIG
    sys.exit(code)


if __name__ == "__main__":
    main()

"""Command line entry point: ``forge <subcommand> [options]``.

Exit status is 0 when every requested check passes, 1 when a check fails
(the failing check is named on stderr) and 2 for usage or input errors.
Options are taken from the command line, then from ``--config FILE`` (flat
``key = value`` lines using the long option names), then from defaults.
"""
from __future__ import annotations

import argparse
import itertools
import os
import sys
import time

import mpmath as mp

from . import __version__
from .algebra import Q, format_rf, parse_scalar
from .connection import build_connection, conic, curvature, curvature_is_zero, verify_split
from .errors import ForgeError, NonGeneric, ParseError
from .report import SCHEMA_VERSION, csv_text, dumps

DEFAULTS = {
    "n": 2,
    "lambda": None,
    "a": "2",
    "b": "3",
    "c": None,
    "d": None,
    "branches": None,
    "ode_tol": 1e-10,
    "residue_tol": 1e-9,
    "garnier_h": 1e-5,
    "garnier_tol": 1e-4,
    "seed": 0,
    "dps": None,
    "out": None,
    "grid": None,
    "normalize": False,
    "timing": False,
    "convention": "corrected",
}
FLOAT_KEYS = {"ode_tol", "residue_tol", "garnier_h", "garnier_tol"}
INT_KEYS = {"n", "seed", "dps"}
BOOL_KEYS = {"normalize", "timing"}
COMMANDS = ("build", "flatness", "split", "restrict", "monodromy", "garnier",
            "garnier-sample", "verify-all")


class UsageError(Exception):
    pass


# ------------------------------------------------------------ configuration

def read_config(path):
    out = {}
    with open(path, encoding="utf-8") as fh:
        for num, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{num}: expected key = value")
            key, val = (s.strip() for s in line.split("=", 1))
            key = key.lstrip("-").replace("-", "_")
            if key not in DEFAULTS:
                raise UsageError(f"{path}:{num}: unknown key {key!r}")
            out[key] = val
    return out


def _coerce(key, val):
    if val is None:
        return None
    try:
        if key in FLOAT_KEYS:
            val = float(val)
            if val <= 0:
                raise UsageError(f"{key} must be positive")
            return val
        if key in INT_KEYS:
            return int(val)
        if key in BOOL_KEYS:
            if isinstance(val, bool):
                return val
            return str(val).lower() in ("1", "true", "yes", "on")
    except ValueError as exc:
        raise UsageError(f"bad value for {key}: {val!r}") from exc
    return val


def resolve(args):
    """Merge command line, config file and defaults into one dict."""
    conf = read_config(args.config) if getattr(args, "config", None) else {}
    cfg = {}
    for key, default in DEFAULTS.items():
        val = getattr(args, key, None)
        if val is None or val is False:
            val = conf.get(key, val if val is not None else default)
            if val is None:
                val = default
        cfg[key] = _coerce(key, val)
    if cfg["n"] < 2:
        raise UsageError("n must be at least 2")
    return cfg


def _rationals(text):
    if text is None or str(text).strip() == "":
        return ()
    try:
        return tuple(parse_scalar(s) for s in str(text).split(","))
    except ParseError as exc:
        raise UsageError(str(exc)) from exc


def lambdas(cfg, allow_symbolic=False):
    from .checks import reference_lambdas
    raw = cfg["lambda"]
    if raw is None:
        return None if allow_symbolic else reference_lambdas(cfg["n"]) if cfg["n"] <= 4 \
            else [Q(1, 2 * k + 3) for k in range(cfg["n"])]
    if str(raw).strip() == "sym":
        if not allow_symbolic:
            raise UsageError("this command needs numeric lambdas")
        return None
    lam = list(_rationals(raw))
    if len(lam) != cfg["n"]:
        raise UsageError(f"--lambda needs {cfg['n']} values, got {len(lam)}")
    return lam


def line_params(cfg):
    from .checks import reference_line
    from .restriction import LineParams
    n = cfg["n"]
    ref = reference_line(n)
    c = _rationals(cfg["c"]) if cfg["c"] is not None else ref.c
    d = _rationals(cfg["d"]) if cfg["d"] is not None else ref.d
    if len(c) != n - 2 or len(d) != n - 2:
        raise UsageError(f"--c and --d need {n - 2} values each")
    a = _rationals(cfg["a"])
    b = _rationals(cfg["b"])
    if len(a) != 1 or len(b) != 1:
        raise UsageError("--a and --b take one value each")
    return LineParams(a[0], b[0], c, d)


def lifted(cfg, dps=None):
    from .restriction import DEFAULT_DPS, etale_lift
    dps = cfg["dps"] or dps or DEFAULT_DPS
    return etale_lift(line_params(cfg), cfg["branches"], dps=dps)


def threads():
    raw = os.environ.get("FORGE_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


# ------------------------------------------------------------ commands

def _header(command, cfg, lam):
    return {"schema_version": SCHEMA_VERSION, "command": command, "n": cfg["n"],
            "lambda": "sym" if lam is None else list(lam)}


def cmd_build(cfg):
    lam = lambdas(cfg, allow_symbolic=True)
    n = cfg["n"]
    A = build_connection(n, lam)
    chart = A.chart
    aliases = {"f": conic(chart).num}
    out = _header("build", cfg, lam)
    out["coordinates"] = list(chart.coords)
    out["parameters"] = list(chart.params)
    out["aliases"] = {"f": "x^2 + y^2 + 1 - 2*(x*y + x + y)"}
    out["entries"] = {}
    for i in range(2):
        for j in range(2):
            out["entries"][f"A{i}{j}"] = {v: format_rf(A[i, j][v], aliases)
                                          for v in chart.coords if v in A[i, j].coeffs}
    return out, True, None


def cmd_flatness(cfg):
    lam = lambdas(cfg, allow_symbolic=True)
    t0 = time.perf_counter()
    zero = curvature_is_zero(curvature(build_connection(cfg["n"], lam)))
    out = _header("flatness", cfg, lam)
    out["curvature_zero"] = zero
    if cfg["timing"]:
        out["ms"] = round(1000 * (time.perf_counter() - t0), 3)
    return out, zero, None if zero else "curvature is not identically zero"


def cmd_split(cfg):
    lam = lambdas(cfg, allow_symbolic=True)
    rep = verify_split(cfg["n"], lam)
    out = _header("split", cfg, lam)
    out.update({"off_diagonal_zero": rep.off_diagonal_zero,
                "diagonal_match": rep.diagonal_match, "ok": rep.ok})
    return out, rep.ok, None if rep.ok else "split recovery failed"


def _residue_block(fs):
    return {lab: fs.residue(lab) for lab in fs.labels + ["inf"]}


def cmd_restrict(cfg):
    from .restriction import (normalize_at_infinity, pole_formula_deviations, residue_report,
                              restrict_line)
    lam = lambdas(cfg)
    tp = lifted(cfg)
    fs = restrict_line(cfg["n"], lam, tp)
    rep = residue_report(fs, lam)
    out = _header("restrict", cfg, lam)
    out["line"] = tp.base.flat()
    out["branches"] = tp.branches
    out["poles"] = dict(zip(fs.labels, fs.poles))
    out["residues"] = _residue_block(fs)
    out["residue_sum_error"] = fs.residue_sum_error()
    out["exponents"] = {r.label: {"eigenvalues": r.eigenvalues, "expected": r.expected,
                                  "deviation": r.exponent_deviation} for r in rep.poles}
    dev = rep.max_exponent_deviation()
    ok = dev < cfg["residue_tol"]
    if cfg["normalize"]:
        nf = normalize_at_infinity(fs)
        out["normalized_residues"] = _residue_block(nf)
        H = nf.residue_at_infinity
        off = max(abs(H[0, 1]), abs(H[1, 0]))
        out["normalized_off_diagonal_inf"] = off
        ok = ok and off < 1e-10
    out["deviation_log"] = (
        [{"kind": "printed_pole_formula", **r} for r in pole_formula_deviations(tp)
         if r["distance"] > 1e-12]
        + [{"kind": "closed_form_residue", "pole": r.label, "deviation": r.matrix_deviation}
           for r in rep.deviations()])
    out["ok"] = ok
    return out, ok, None if ok else f"exponent deviation {mp.nstr(dev, 5)}"


def cmd_monodromy(cfg):
    from .monodromy import (check_relations, dihedral_check, expected_traces, local_trace,
                            monodromy_rep, generator_rep)
    from .restriction import restrict_line
    lam = lambdas(cfg)
    tp = lifted(cfg)
    fs = restrict_line(cfg["n"], lam, tp)
    rep = monodromy_rep(fs, tol=cfg["ode_tol"])
    expected = expected_traces(lam, cfg["n"])
    dih = dihedral_check(rep, tol=1e-6)
    rel_ok, rel = check_relations(generator_rep(lam, cfg["n"]))
    trace_dev = {lab: abs(rep.trace(lab) - expected[lab]) for lab in expected}
    out = _header("monodromy", cfg, lam)
    out["line"] = tp.base.flat()
    out["base_point"] = rep.base
    out["order"] = rep.order
    out["matrices"] = rep.matrices
    out["traces"] = rep.traces()
    out["expected_traces"] = expected
    out["trace_deviation"] = trace_dev
    out["inf_trace_vs_local_exponent"] = abs(rep.trace("inf")
                                             - local_trace((lam[0] + lam[1]) / 2))
    out["det_errors"] = rep.det_errors
    out["product_identity_error"] = rep.product_identity_error
    out["dihedral"] = {"ok": dih.ok, "generator": dih.generator, "classes": dih.classes}
    out["relations"] = {"ok": rel_ok, "errors": rel}
    failed = []
    if max(rep.det_errors.values()) >= 1e-8:
        failed.append("determinant")
    if rep.product_identity_error >= 1e-6:
        failed.append("product relation")
    if not dih.ok:
        failed.append("dihedral")
    bad = [lab for lab, v in trace_dev.items() if v >= 1e-6]
    if bad:
        failed.append("expected traces at " + ", ".join(bad))
    if not rel_ok:
        failed.append("group relations")
    out["failed"] = failed
    return out, not failed, "; ".join(failed) or None


def _garnier_rows(res):
    return {"nu_equation": res.nu_eq, "rho_equation": res.rho_eq, "max": res.max}


def cmd_garnier(cfg):
    from .garnier import GARNIER_DPS, garnier_residual
    lam = lambdas(cfg)
    tp = lifted(cfg, GARNIER_DPS)
    res = garnier_residual(lam, tp, cfg["garnier_h"], cfg["convention"])
    pt = res.point
    out = _header("garnier", cfg, lam)
    out["line"] = tp.base.flat()
    out["h"] = cfg["garnier_h"]
    out["convention"] = cfg["convention"]
    out["t"], out["nu"], out["rho"] = pt.t, pt.nu, pt.rho
    out["theta"] = list(pt.theta.theta)
    out["theta_inf"] = pt.theta.theta_inf
    out["kappa"] = pt.theta.kappa
    out["kappa_printed"] = pt.theta.kappa_printed
    out["residual"] = _garnier_rows(res)
    ok = res.max < cfg["garnier_tol"]
    return out, ok, None if ok else f"Garnier residual {mp.nstr(res.max, 5)}"


def parse_grid(text, n):
    """``a=2:11/5:3,b=3:16/5:2`` -> list of {index: value}; parameters are
    a, b, c1, d1, c2, d2, ... and each range is start:stop:count."""
    names = ["a", "b"]
    for i in range(1, n - 1):
        names += [f"c{i}", f"d{i}"]
    axes = []
    for part in str(text).split(","):
        if "=" not in part:
            raise UsageError(f"grid entry {part!r} is not name=start:stop:count")
        name, rng = (s.strip() for s in part.split("=", 1))
        if name not in names:
            raise UsageError(f"unknown grid parameter {name!r}")
        bits = rng.split(":")
        if len(bits) != 3:
            raise UsageError(f"grid range {rng!r} is not start:stop:count")
        try:
            lo, hi = parse_scalar(bits[0]), parse_scalar(bits[1])
            count = int(bits[2])
        except (ParseError, ValueError) as exc:
            raise UsageError(f"bad grid range {rng!r}") from exc
        if count < 1:
            raise UsageError("grid counts must be positive")
        vals = [lo] if count == 1 else [lo + (hi - lo) * Q(k, count - 1) for k in range(count)]
        axes.append((names.index(name), vals))
    return [dict(zip([ix for ix, _ in axes], combo))
            for combo in itertools.product(*[v for _, v in axes])]


def cmd_garnier_sample(cfg):
    from .garnier import GARNIER_DPS, sample_solution
    from .restriction import LineParams, etale_lift
    lam = lambdas(cfg)
    n = cfg["n"]
    base = line_params(cfg)
    grid_text = cfg["grid"] or "a=2:21/10:2,b=3:31/10:2"
    dps = cfg["dps"] or GARNIER_DPS
    grid, prev = [], None
    for point in parse_grid(grid_text, n):
        vals = base.flat()
        for ix, v in point.items():
            vals[ix] = v
        p = LineParams.from_flat(vals)
        tp = etale_lift(p, cfg["branches"], dps=dps) if prev is None \
            else etale_lift(p, dps=dps, ref=prev)
        grid.append(tp)
        prev = tp
    sample = sample_solution(lam, grid, cfg["garnier_h"], cfg["convention"],
                             workers=threads())
    size = 2 * n - 2
    header = ([f"t_{k}" for k in range(1, size + 1)] + [f"nu_{k}" for k in range(1, size + 1)]
              + [f"rho_{k}" for k in range(1, size + 1)] + ["residual"])
    text = csv_text(header, sample.csv_rows())
    worst = max(r.max for r in sample.residuals)
    ok = worst < cfg["garnier_tol"] and sample.min_rank == size
    msg = None
    if not ok:
        msg = f"max residual {mp.nstr(worst, 5)}, Jacobian rank {sample.min_rank}"
    return text, ok, msg


def cmd_verify_all(cfg, explicit_n):
    from .checks import Verifier
    v = Verifier(seed=cfg["seed"], ns=(cfg["n"],) if explicit_n else None,
                 ode_tol=cfg["ode_tol"], garnier_h=cfg["garnier_h"], timing=cfg["timing"])
    results = v.run()
    for r in results:
        print(r.line(), file=sys.stderr)
    report = v.report()
    failed = [f"criterion {r.criterion} ({r.title})" for r in results if not r.passed]
    return report, not failed, ("failed: " + ", ".join(failed)) if failed else None


HANDLERS = {
    "build": cmd_build,
    "flatness": cmd_flatness,
    "split": cmd_split,
    "restrict": cmd_restrict,
    "monodromy": cmd_monodromy,
    "garnier": cmd_garnier,
    "garnier-sample": cmd_garnier_sample,
}


# ------------------------------------------------------------ parser

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def make_parser():
    parser = _Parser(prog="forge", description="Flat rank-2 connections: exact and numeric checks.")
    parser.add_argument("--version", action="version", version=f"forge {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config")
        p.add_argument("--n", type=int)
        p.add_argument("--lambda", dest="lambda", help="comma-separated rationals or 'sym'")
        p.add_argument("--a")
        p.add_argument("--b")
        p.add_argument("--c", help="comma-separated, n-2 values")
        p.add_argument("--d", help="comma-separated, n-2 values")
        p.add_argument("--branches", help="'+'/'-' per square root, bt first")
        p.add_argument("--ode-tol", dest="ode_tol", type=float)
        p.add_argument("--residue-tol", dest="residue_tol", type=float)
        p.add_argument("--h", "--garnier-h", dest="garnier_h", type=float)
        p.add_argument("--garnier-tol", dest="garnier_tol", type=float)
        p.add_argument("--convention", choices=("corrected", "printed"))
        p.add_argument("--seed", type=int)
        p.add_argument("--dps", type=int)
        p.add_argument("--grid")
        p.add_argument("--normalize", action="store_true", default=None)
        p.add_argument("--timing", action="store_true", default=None)
        p.add_argument("--out")
    return parser


def _emit(payload, path):
    text = payload if isinstance(payload, str) else dumps(payload) + "\n"
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(argv=None):
    try:
        args = make_parser().parse_args(argv)
        if not args.command:
            raise UsageError(f"a subcommand is required: {', '.join(COMMANDS)}")
        cfg = resolve(args)
        explicit_n = args.n is not None
        if args.config and not explicit_n:
            explicit_n = "n" in read_config(args.config)
        if args.command == "verify-all":
            payload, ok, msg = cmd_verify_all(cfg, explicit_n)
        else:
            payload, ok, msg = HANDLERS[args.command](cfg)
    except (UsageError, ParseError, NonGeneric, ValueError, OSError) as exc:
        print(f"forge: error: {exc}", file=sys.stderr)
        return 2
    except ForgeError as exc:
        print(f"forge: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    _emit(payload, cfg["out"])
    if not ok:
        print(f"forge {args.command}: check failed: {msg}", file=sys.stderr)
        return 1
    return 0


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()

"""Command-line front end.  Every subcommand calls one library function and
prints a JSON report (or CSV with ``--format csv``).

Exit status: 0 success, 1 a stage check failed, 2 usage or input errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__, _kernels
from .arith import (
    ArcPoint,
    complete_sum_S,
    dickman_rho,
    exp_sum_f,
    exp_sum_g,
    minor_arc_scan,
    smooth_numbers,
)
from .counting import CountConfig, count_representations, density_scan
from .errors import (
    CoverageError,
    DivergenceError,
    MonotonicityError,
    ScaleLimitError,
    TableFormatError,
)
from .holder import ExponentSet, ford_weights, optimize_weights, phi
from .ledger import STATED_PHIS, MethodParams, Stage, full_ledger
from .partitions import PREDICATES, search_min_s
from .singular import chi_p, singular_integral, singular_series
from .tables import builtin_diagonal, load_lambda_table, load_nu_table

SCHEMA = 1
TABLE_DIR_ENV = "EVENPOWERS_TABLE_DIR"


class UsageError(Exception):
    pass


# ------------------------------------------------------------------ helpers


def parse_exponents(text: str) -> ExponentSet:
    """'2,4,6' or '6-52' (even range) or mixtures such as '4,54-266'."""
    out: list[int] = []
    for part in text.replace(" ", "").split(","):
        if not part:
            continue
        if "-" in part:
            lo, hi = part.split("-", 1)
            lo, hi = int(lo), int(hi)
            out.extend(range(lo, hi + 1, 2))
        else:
            out.append(int(part))
    try:
        return ExponentSet.of(out)
    except ValueError as exc:
        raise UsageError(f"bad exponent set {text!r}: {exc}") from None


def parse_alpha(text: str):
    """A float, or an exact rational 'p/q'."""
    if "/" in text:
        return Fraction(text)
    return float(text)


def _resolve(path: str | None, default_name: str):
    tdir = os.environ.get(TABLE_DIR_ENV)
    if path is None:
        if tdir and (Path(tdir) / default_name).is_file():
            return Path(tdir) / default_name
        return None
    p = Path(path)
    if p.is_file():
        return p
    if tdir and not p.is_absolute() and (Path(tdir) / p).is_file():
        return Path(tdir) / p
    where = f" (also looked in ${TABLE_DIR_ENV}={tdir})" if tdir else ""
    raise UsageError(f"table file not found: {path}{where}")


def load_lambda(path):
    p = _resolve(path, "lambda.csv")
    return builtin_diagonal() if p is None else load_lambda_table(p)


def load_nu(path):
    p = _resolve(path, "nu.csv")
    return None if p is None else load_nu_table(p)


def _clean(obj):
    """Round floats to 15 significant digits; complex as [re, im]."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return str(x)
        return float(f"{x:.15g}")
    if isinstance(obj, (complex, np.complexfloating)):
        return [_clean(obj.real), _clean(obj.imag)]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_clean(v) for v in obj]
    return str(obj)


def _rows_for_csv(results):
    if isinstance(results, dict) and "rows" in results:
        return results["rows"]
    if isinstance(results, list):
        return results
    return [{"key": k, "value": v} for k, v in results.items()]


def emit(report: dict, fmt: str, out=sys.stdout):
    if fmt == "json":
        json.dump(_clean(report), out, indent=2, ensure_ascii=False)
        out.write("\n")
        return
    rows = _clean(_rows_for_csv(report["results"]))
    if not rows:
        return
    keys = list(rows[0].keys())
    w = csv.DictWriter(out, fieldnames=keys, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow({k: json.dumps(v) if isinstance(v, (list, dict)) else v for k, v in r.items()})


# -------------------------------------------------------------- subcommands


def cmd_tables(args):
    lam = load_lambda(args.lam)
    res = {
        "lambda_provenance": lam.provenance,
        "lambda_entries": len(lam),
        "lambda_ks": lam.ks(),
    }
    if args.show:
        res["rows"] = [{"k": k, "s": s, "lambda": v} for (k, s), v in sorted(lam.entries.items())]
    nu = load_nu(args.nu)
    if nu is not None:
        res["nu_provenance"] = nu.provenance
        res["nu_grids"] = [f"{h},{k}" for h, k in sorted(nu.grids)]
    return res, 0, lam.provenance


def cmd_mu(args):
    K = ExponentSet.even(2, 2 * args.s)
    mu = K.reciprocal_sum
    return {"s": args.s, "mu": float(mu), "mu_exact": mu, "annotation": "reference ≈ 2.73"}, 0, None


def _phi_block(args):
    K = parse_exponents(args.K)
    lam = load_lambda(args.lam)
    if args.weights == "ford":
        w = ford_weights(K)
        res = phi(K, w, lam)
    else:
        w, res = optimize_weights(K, lam, args.budget)
    return K, w, res, lam


def cmd_phi(args):
    K, w, res, lam = _phi_block(args)
    return {
        "K": list(K), "weight_mode": args.weights, "phi": res.phi,
        "reciprocal_part": res.reciprocal_part,
        "per_k_terms": {str(k): v for k, v in res.per_k_terms.items()},
    }, 0, lam.provenance


def cmd_weights(args):
    K, w, res, lam = _phi_block(args)
    rows = [{"k": k, "a_k": float(w.weights[k])} for k in K]
    return {"K": list(K), "weight_mode": args.weights, "phi": res.phi,
            "residual": w.constraint_residual, "rows": rows}, 0, lam.provenance


def cmd_search(args):
    lam = load_lambda(args.lam)
    rows = []
    for tau in args.tau:
        pred = PREDICATES[args.predicate](args.delta)
        r = search_min_s(args.family, tau, pred, lam, tuple(args.top), tuple(args.split),
                         args.weights, args.budget, args.threads)
        rows.append({**r.as_row(), "margin": r.margin})
    return {"family": args.family, "predicate": args.predicate, "rows": rows}, 0, lam.provenance


def _parse_deltas(items):
    out = {}
    for it in items or []:
        if "=" not in it:
            raise UsageError(f"--delta expects STAGE=value, got {it!r}")
        k, v = it.split("=", 1)
        try:
            out[Stage(k.upper())] = float(v)
        except ValueError:
            raise UsageError(f"bad --delta entry {it!r}") from None
    return out


def cmd_verify(args):
    params = MethodParams(tau=args.tau, kappa=args.kappa, s=args.s, gamma=args.gamma,
                          delta=_parse_deltas(args.delta), epsilon_slack=args.epsilon_slack,
                          omega_epsilon=args.omega_epsilon)
    if args.lam is None and _resolve(None, "lambda.csv") is None:
        run = full_ledger(params, phis=STATED_PHIS)
        prov = "stated phi values"
    else:
        lam = load_lambda(args.lam)
        run = full_ledger(params, table=lam, nu_table=load_nu(args.nu),
                          weight_mode=args.weights, budget=args.budget)
        prov = lam.provenance
    res = {"params": params.to_dict(), "passed": run.passed,
           "rows": run.to_list(), "errors": dict(run.errors)}
    if run.errors:
        code = 2
    else:
        code = 0 if run.passed else 1
    return res, code, prov


def cmd_expsum(args):
    alpha = parse_alpha(args.alpha)
    if args.q is not None:
        alpha = ArcPoint(args.q, args.a, float(args.alpha))
    if args.kind == "f":
        val = exp_sum_f(args.k, args.n, alpha)
    else:
        val = exp_sum_g(args.k, args.n, args.gamma, alpha)
    return {"k": args.k, "n": args.n, "alpha": str(args.alpha), "kind": args.kind,
            "value": val, "abs": abs(val)}, 0, None


def cmd_gauss(args):
    val = complete_sum_S(args.k, args.q, args.a)
    return {"k": args.k, "q": args.q, "a": args.a, "value": val, "abs": abs(val)}, 0, None


def cmd_smooth(args):
    S = smooth_numbers(args.X, args.Y)
    u = math.log(args.X) / math.log(args.Y)
    res = {"X": args.X, "Y": args.Y, "count": len(S), "density": len(S) / args.X,
           "u": u, "rho_u": dickman_rho(u)}
    if args.list:
        res["members"] = S.members.tolist()
    return res, 0, None


def cmd_rho(args):
    return {"rows": [{"u": u, "rho": dickman_rho(u)} for u in args.u]}, 0, None


def cmd_singular_series(args):
    K = parse_exponents(args.K) if args.K else ExponentSet.even(2, 2 * args.s)
    r = singular_series(args.n, args.Z, K, strict=not args.allow_divergent)
    rows = [{"q": q, "A": v} for q, v in r.terms.items()]
    return {"n": args.n, "Z": r.Z, "partial": r.partial, "tail_bound": r.tail_bound,
            "omega": r.omega, "rows": rows}, 0, None


def cmd_chi_p(args):
    K = parse_exponents(args.K) if args.K else ExponentSet.even(2, 2 * args.s)
    rows = []
    for p in args.p:
        r = chi_p(args.n, p, K, args.h_max)
        rows.append({"p": p, "chi_p": r.value, "truncation_estimate": r.truncation_estimate})
    return {"n": args.n, "h_max": args.h_max, "rows": rows}, 0, None


def cmd_singular_integral(args):
    K = parse_exponents(args.K)
    r = singular_integral(args.n, K, args.gamma, args.mode, args.samples, args.seed)
    return {"n": args.n, "K": list(K), "value": r.value, "mode": r.mode, "feasible": r.feasible,
            "stderr": r.stderr, "ci95": r.ci95}, 0, None


def cmd_count(args):
    cfg = CountConfig(parse_exponents(args.K), args.allow_zero, args.restricted, args.gamma)
    c = count_representations(args.n, cfg, args.method)
    return {"n": args.n, "K": list(cfg.K), "allow_zero": cfg.allow_zero,
            "restricted": cfg.restricted, "count": c}, 0, None


def cmd_density(args):
    cfg = CountConfig(parse_exponents(args.K), args.allow_zero)
    rows = [vars(r) for r in density_scan(args.N, cfg)]
    return {"N": args.N, "K": list(cfg.K), "allow_zero": cfg.allow_zero, "rows": rows}, 0, None


def cmd_scan_minor(args):
    st = minor_arc_scan(args.n, args.tau, args.samples, args.seed)
    res = dict(vars(st))
    res["bound"] = float(args.n) ** (-args.tau / 2 + 0.05)
    return res, 0, None


# ------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="evenpowers", description=__doc__.splitlines()[0])
    ap.add_argument("--format", choices=("json", "csv"), default="json")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, func, help):
        p = sub.add_parser(name, help=help)
        p.set_defaults(func=func)
        p.add_argument("--format", choices=("json", "csv"), default=argparse.SUPPRESS)
        return p

    def tables(p, nu=False):
        p.add_argument("--lambda", dest="lam", metavar="CSV",
                       help=f"k,s,lambda table (default: ${TABLE_DIR_ENV}/lambda.csv or the built-in diagonal)")
        if nu:
            p.add_argument("--nu", metavar="CSV", help="h,k,x,nu table")

    def weights(p):
        p.add_argument("--weights", choices=("ford", "optimized"), default="ford")
        p.add_argument("--budget", type=int, default=20, help="optimizer sweeps")

    p = add("tables", cmd_tables, "load and validate exponent tables")
    tables(p, nu=True)
    p.add_argument("--show", action="store_true")

    p = add("mu", cmd_mu, "sum of 1/(2k) for k = 1..s")
    p.add_argument("--s", type=int, default=133)

    for name, func in (("phi", cmd_phi), ("weights", cmd_weights)):
        p = add(name, func, f"{name} for a block of exponents")
        p.add_argument("--K", required=True, help="exponents, e.g. 6-52 or 4,54-266")
        tables(p)
        weights(p)

    p = add("search", cmd_search, "smallest 2s for which a split point works")
    p.add_argument("--family", choices=("A", "B"), default="A")
    p.add_argument("--tau", type=float, nargs="+", required=True)
    p.add_argument("--predicate", choices=sorted(PREDICATES), default="minor")
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--top", type=int, nargs=2, default=(60, 300), metavar=("LO", "HI"))
    p.add_argument("--split", type=int, nargs=2, default=(6, 300), metavar=("LO", "HI"))
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    tables(p)
    weights(p)

    p = add("verify", cmd_verify, "evaluate every stage inequality")
    p.add_argument("--tau", type=float, default=0.3935)
    p.add_argument("--kappa", type=float, default=0.25)
    p.add_argument("--gamma", type=float, default=0.05)
    p.add_argument("--s", type=int, default=133)
    p.add_argument("--delta", nargs="*", metavar="STAGE=VALUE")
    p.add_argument("--epsilon-slack", type=float, default=0.0)
    p.add_argument("--omega-epsilon", type=float, default=0.0)
    tables(p, nu=True)
    weights(p)

    p = add("expsum", cmd_expsum, "f_k or g_k at one frequency")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", required=True, help="float, or p/q for an exact rational; beta when --q is given")
    p.add_argument("--q", type=int, help="evaluate at a/q + alpha")
    p.add_argument("--a", type=int, default=1)
    p.add_argument("--kind", choices=("f", "g"), default="f")
    p.add_argument("--gamma", type=float, default=0.05)

    p = add("gauss", cmd_gauss, "complete sum S_k(q, a)")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--a", type=int, default=1)

    p = add("smooth", cmd_smooth, "Y-smooth integers up to X")
    p.add_argument("--X", type=int, required=True)
    p.add_argument("--Y", type=int, required=True)
    p.add_argument("--list", action="store_true")

    p = add("rho", cmd_rho, "Dickman's function")
    p.add_argument("--u", type=float, nargs="+", required=True)

    p = add("singular-series", cmd_singular_series, "truncated singular series")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--Z", type=int, default=20)
    p.add_argument("--K")
    p.add_argument("--s", type=int, default=133, help="K = {2, ..., 2s} when --K is absent")
    p.add_argument("--allow-divergent", action="store_true")

    p = add("chi-p", cmd_chi_p, "truncated local factors")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=int, nargs="+", required=True)
    p.add_argument("--h-max", type=int, default=2)
    p.add_argument("--K")
    p.add_argument("--s", type=int, default=133)

    p = add("singular-integral", cmd_singular_integral, "weighted composition count I(n)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--K", required=True)
    p.add_argument("--gamma", type=float, default=0.05)
    p.add_argument("--mode", choices=("auto", "exact", "mc"), default="auto")
    p.add_argument("--samples", type=int, default=200_000)
    p.add_argument("--seed", type=int, default=0)

    p = add("count", cmd_count, "number of representations of n")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--K", required=True)
    p.add_argument("--allow-zero", action="store_true")
    p.add_argument("--restricted", action="store_true")
    p.add_argument("--gamma", type=float)
    p.add_argument("--method", choices=("nested", "mitm", "both"))

    p = add("density", cmd_density, "fraction of representable integers per decade")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--K", required=True)
    p.add_argument("--allow-zero", action="store_true")

    p = add("scan-minor", cmd_scan_minor, "sample |f_2|/f_2(0) on the minor arcs")
    p.add_argument("--n", type=int, default=10 ** 6)
    p.add_argument("--tau", type=float, default=0.3935)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    return ap


INPUT_ERRORS = (UsageError, CoverageError, TableFormatError, MonotonicityError,
                ScaleLimitError, DivergenceError, ValueError, FileNotFoundError)


def run(argv=None, out=sys.stdout, err=sys.stderr) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    argv = list(sys.argv[1:] if argv is None else argv)
    t0 = time.perf_counter()
    try:
        results, code, provenance = args.func(args)
    except INPUT_ERRORS as exc:
        err.write(f"evenpowers {args.command}: error: {exc}\n")
        return 2
    params = {k: v for k, v in vars(args).items() if k not in ("func", "format", "command")}
    report = {
        "schema": SCHEMA,
        "command": ["evenpowers", *argv],
        "subcommand": args.command,
        "params": params,
        "results": results,
        "version": __version__,
        "backend": _kernels.BACKEND,
        "table_provenance": provenance,
        "timing_s": time.perf_counter() - t0,
    }
    emit(report, args.format, out)
    return code


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()

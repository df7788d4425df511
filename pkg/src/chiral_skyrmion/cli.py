"""Command-line front end.

Exit codes: 0 success, 1 a verification check failed, 2 usage or
configuration error, 3 the solver did not converge.  Errors are printed to
stderr as one JSON object per line.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    band_ratio,
    energy_deficit_ratio,
    invert_relation,
    no_growth,
    perturbation_record,
    trend_slope,
)
from .checks import SUITES, run_suite
from .errors import ConvergenceError, ParameterError, RootBracketError, SkyrmionError
from .model import ModelParams, evaluate_profile
from .numerics import differentiate
from .operators import bubble
from .solver import SolveOptions, SolveReport, solve_newton

__all__ = [
    "main",
    "run",
    "parse_config",
    "format_config",
    "write_profile_csv",
    "write_report_json",
    "dumps",
    "solve_point",
]

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_NOCONV = 0, 1, 2, 3

CONFIG_KEYS = {
    "k": float,
    "alpha": float,
    "beta": str,
    "grid_n": int,
    "rmax": str,
    "r_min": float,
    "tol": float,
    "max_iters": int,
    "out": str,
    "report": str,
}


class UsageError(SkyrmionError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------- config


def parse_config(text: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    cfg = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in CONFIG_KEYS:
            raise UsageError(f"config line {lineno}: unknown key {key!r}")
        try:
            cfg[key] = CONFIG_KEYS[key](value)
        except ValueError:
            raise UsageError(f"config line {lineno}: bad value for {key}: {value!r}") from None
    return cfg


def format_config(cfg: dict) -> str:
    return "".join(f"{key} = {_fmt_scalar(cfg[key])}\n" for key in sorted(cfg))


def _fmt_scalar(v) -> str:
    if isinstance(v, float):
        return "%.17g" % v
    return str(v)


# ---------------------------------------------------------------- output


def _num(x) -> str:
    x = float(x)
    if not math.isfinite(x):
        return "null"
    return "%.17g" % x


def dumps(obj, indent: int = 0) -> str:
    """JSON text with every float written to 17 significant digits."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        return "[\n" + ",\n".join(pad + dumps(v, indent + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    return json.dumps(str(obj))


def _xi_columns(report: SolveReport, mu: float):
    r = report.profile.grid.nodes
    xi = evaluate_profile(report.profile, mu * r) - bubble(r).Q
    return xi, differentiate(xi, report.profile.grid)


def profile_csv_text(report: SolveReport, mu: float = 1.0) -> str:
    g = report.profile.grid
    u = report.profile.values
    du = report.profile.derivative()
    xi, dxi = _xi_columns(report, mu)
    lines = ["r,u,du_dr,xi,dxi_dr"]
    for row in zip(g.nodes, u, du, xi, dxi):
        lines.append(",".join("%.17g" % float(v) for v in row))
    return "\n".join(lines) + "\n"


def write_profile_csv(report: SolveReport, path, mu: float = 1.0) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(profile_csv_text(report, mu))


def report_dict(report: SolveReport, config: dict | None = None, perturbation: dict | None = None,
                beta_mode: str = "explicit") -> dict:
    p = report.params
    g = report.profile.grid
    pert = {key: None for key in
            ("mu", "beta", "norm_X", "norm_Xinf", "relation_gap", "energy_deficit_ratio")}
    if perturbation:
        pert.update({key: perturbation.get(key) for key in pert})
    return {
        "params": {
            "k": p.k,
            "alpha": p.alpha,
            "beta": p.beta,
            "beta_mode": beta_mode,
            "config": dict(config or {}),
        },
        "grid": {
            "kind": g.mapping,
            "n": g.n,
            "r_min": g.r_min,
            "r_max": g.r_max,
            "inner_bc": report.profile.meta.get("inner_bc", ""),
        },
        "energies": report.energies.as_dict(),
        "convergence": {
            "iterations": report.iterations,
            "residual_sup": report.residual_sup,
            "converged": report.converged,
            "condition_estimate": report.condition_estimate,
            "message": report.message,
        },
        "perturbation": pert,
    }


def write_report_json(data: dict, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(data) + "\n")


# ---------------------------------------------------------------- solving


def _perturbation(report: SolveReport) -> tuple[dict | None, float]:
    p = report.params
    if not (report.converged and p.beta > 0):
        return None, 1.0
    try:
        rec = perturbation_record(report.profile, p, report.energies.total)
    except RootBracketError:
        return None, 1.0
    d = rec.as_dict()
    return d, rec.mu


def _resolve_beta(k: float, beta: str) -> tuple[float, str]:
    if beta == "auto":
        return invert_relation(k), "auto"
    try:
        value = float(beta)
    except ValueError:
        raise UsageError(f"--beta must be 'auto' or a number, got {beta!r}") from None
    return value, "explicit"


def solve_point(cfg: dict) -> dict:
    """Solve one configuration; returns CSV text and the report dictionary."""
    k = float(cfg["k"])
    if not 0 < k < 1:
        raise ParameterError("k must lie in (0, 1)")
    beta, mode = _resolve_beta(k, str(cfg.get("beta", "auto")))
    params = ModelParams(k, float(cfg.get("alpha", 0.0)), beta)
    rmax = str(cfg.get("rmax", "auto"))
    opts = SolveOptions(
        newton_tol=float(cfg.get("tol", 1e-9)),
        max_iters=int(cfg.get("max_iters", 60)),
        n=int(cfg.get("grid_n", 2000)),
        r_min=float(cfg.get("r_min", 1e-6)),
        r_max=None if rmax == "auto" else float(rmax),
    )
    report = solve_newton(params, None, opts)
    pert, mu = _perturbation(report)
    return {
        "converged": report.converged,
        "csv": profile_csv_text(report, mu),
        "report": report_dict(report, cfg, pert, mode),
    }


# ---------------------------------------------------------------- commands


def _emit_error(kind: str, message: str, code: int) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message, "exit_code": code}) + "\n")
    return code


def _effective_config(args, keys) -> dict:
    cfg = {}
    if getattr(args, "config", None):
        try:
            cfg.update(parse_config(Path(args.config).read_text(encoding="utf-8")))
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from None
    for key in keys:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


def cmd_solve(args) -> int:
    cfg = _effective_config(args, ("k", "alpha", "beta", "grid_n", "rmax", "r_min", "tol",
                                   "max_iters", "out", "report"))
    for key in ("k", "out", "report"):
        if key not in cfg:
            raise UsageError(f"missing required setting {key!r}")
    result = solve_point(cfg)
    _write(cfg["out"], result["csv"])
    write_report_json(result["report"], cfg["report"])
    if not result["converged"]:
        return _emit_error("convergence", result["report"]["convergence"]["message"], EXIT_NOCONV)
    return EXIT_OK


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _parse_k_list(text: str) -> list[float]:
    try:
        ks = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"bad --k-list {text!r}") from None
    if not ks:
        raise UsageError("--k-list is empty")
    return ks


def cmd_sweep(args) -> int:
    ks = _parse_k_list(args.k_list)
    for k in ks:
        if not 0 < k < 1:
            raise ParameterError(f"k = {k} outside (0, 1)")
    base = {"alpha": args.alpha, "beta": "auto", "grid_n": args.grid_n, "r_min": args.r_min,
            "rmax": "auto", "tol": args.tol, "max_iters": args.max_iters}
    cfgs = [dict(base, k=k) for k in ks]
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    workers = args.workers or os.cpu_count() or 1
    if workers == 1 or len(cfgs) == 1:
        results = [solve_point(c) for c in cfgs]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(cfgs))) as pool:
            results = list(pool.map(solve_point, cfgs))
    index = []
    failed = []
    for cfg, res in zip(cfgs, results):
        stem = f"k_{cfg['k']:.6g}"
        _write(out / f"{stem}.csv", res["csv"])
        write_report_json(res["report"], out / f"{stem}.json")
        index.append({"k": cfg["k"], "csv": f"{stem}.csv", "report": f"{stem}.json",
                      "converged": res["converged"]})
        if not res["converged"]:
            failed.append(cfg["k"])
    write_report_json({"points": index}, out / "sweep.json")
    if failed:
        return _emit_error("convergence", f"sweep points did not converge: {failed}", EXIT_NOCONV)
    return EXIT_OK


def cmd_verify(args) -> int:
    names = list(SUITES) if args.suite == "all" else [args.suite]
    ok = True
    for name in names:
        rows = run_suite(name, args.tol)
        print(f"# {name}")
        print(f"{'check':<48} {'value':>22} {'reference':>22} {'error':>10} {'tol':>9}  status")
        for row in rows:
            print(f"{row.name:<48} {row.value:>22.15g} {row.reference:>22.15g} "
                  f"{row.error:>10.3g} {row.tol:>9.3g}  {'PASS' if row.passed else 'FAIL'}")
            ok &= row.passed
    return EXIT_OK if ok else EXIT_CHECK


def _load_reports(in_dir: Path) -> list[dict]:
    files = sorted(p for p in in_dir.glob("*.json") if p.name not in ("sweep.json",))
    reports = []
    for f in files:
        data = json.loads(f.read_text(encoding="utf-8"))
        if {"params", "energies", "perturbation"} <= set(data):
            reports.append(data)
    if not reports:
        raise UsageError(f"no solve reports found in {in_dir}")
    return sorted(reports, key=lambda d: -d["params"]["k"])


def analyze_reports(reports: list[dict]) -> dict:
    rows = []
    for d in reports:
        p, e, q = d["params"], d["energies"], d["perturbation"]
        beta = q.get("beta")
        row = {
            "k": p["k"],
            "alpha": p["alpha"],
            "beta_hat": p["beta"],
            "mu": q.get("mu"),
            "beta": beta,
            "total": e["total"],
            "relation_gap": q.get("relation_gap"),
            "norm_X_over_beta": None,
            "norm_Xinf_scaled": None,
            "energy_deficit_ratio": energy_deficit_ratio(2.0 - e["total"], p["k"]),
        }
        if beta:
            L = math.log(1.0 / beta)
            row["norm_X_over_beta"] = q["norm_X"] / beta
            row["norm_Xinf_scaled"] = q["norm_Xinf"] / (beta * beta * L * L)
        rows.append(row)
    complete = [r for r in rows if r["beta"]]
    summary = {}
    if complete:
        gaps = [r["relation_gap"] for r in complete]
        xb = [r["norm_X_over_beta"] for r in complete]
        xi = [r["norm_Xinf_scaled"] for r in complete]
        ratios = [r["energy_deficit_ratio"] for r in complete]
        summary = {
            "max_abs_relation_gap": max(abs(g) for g in gaps),
            "relation_gap_slope": trend_slope(gaps, [math.log(1 / r["beta"]) for r in complete])
            if len(complete) >= 2 else 0.0,
            "norm_X_band": band_ratio(xb),
            "norm_X_no_growth": no_growth(xb),
            "norm_Xinf_no_growth": no_growth(xi),
            "energy_ratio_in_band": all(0.5 <= q <= 1.5 for q in ratios),
        }
    return {"records": rows, "summary": summary}


def cmd_analyze(args) -> int:
    result = analyze_reports(_load_reports(Path(args.in_dir)))
    write_report_json(result, args.out)
    return EXIT_OK


def _dat(rows, cols) -> str:
    lines = ["# " + " ".join(cols)]
    for r in rows:
        lines.append(" ".join(_num(r[c]) if r[c] is not None else "nan" for c in cols))
    return "\n".join(lines) + "\n"


def cmd_report(args) -> int:
    data = json.loads(Path(args.input).read_text(encoding="utf-8"))
    plots = Path(args.plots)
    plots.mkdir(parents=True, exist_ok=True)
    if "records" in data:
        rows = [r for r in data["records"] if r.get("beta")]
        for r in rows:
            r["log_inv_beta"] = math.log(1.0 / r["beta"])
        specs = [
            ("relation_gap", ("log_inv_beta", "relation_gap"), "log(1/beta)", "k/beta - 2 log(1/beta)"),
            ("norms", ("log_inv_beta", "norm_X_over_beta"), "log(1/beta)", "||xi||_X / beta"),
            ("energy_ratio", ("k", "energy_deficit_ratio"), "k", "(2-E) 2 log(1/k) / k^2"),
        ]
        for name, cols, xl, yl in specs:
            _write(plots / f"{name}.dat", _dat(rows, cols))
            _write(plots / f"{name}.gp",
                   f"set terminal pngcairo size 800,600\nset output '{name}.png'\n"
                   f"set xlabel '{xl}'\nset ylabel '{yl}'\nset grid\n"
                   f"plot '{name}.dat' using 1:2 with linespoints title '{yl}'\n")
    elif "energies" in data:
        e = data["energies"]
        _write(plots / "energies.dat",
               "".join(f"{i} {key} {_num(e[key])}\n" for i, key in enumerate(sorted(e))))
        _write(plots / "energies.gp",
               "set terminal pngcairo size 800,600\nset output 'energies.png'\n"
               "set style fill solid\nset boxwidth 0.6\n"
               "plot 'energies.dat' using 1:3:xtic(2) with boxes notitle\n")
        csv = data["params"].get("config", {}).get("out")
        if csv:
            src = Path(csv)
            if not src.is_absolute():
                src = Path(args.input).parent / src.name
            if src.exists():
                _write(plots / "profile.gp",
                       "set terminal pngcairo size 800,600\nset output 'profile.png'\n"
                       "set datafile separator ','\nset logscale x\nset xlabel 'r'\n"
                       f"plot '{src.resolve()}' using 1:2 every ::1 with lines title 'u', "
                       f"'' using 1:4 every ::1 with lines title 'xi'\n")
    else:
        raise UsageError("input JSON is neither a solve report nor an analysis")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="chiral-skyrmion", description="Chiral skyrmion profiles and diagnostics.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("solve", help="solve one parameter point")
    s.add_argument("--config")
    s.add_argument("--k", type=float)
    s.add_argument("--alpha", type=float)
    s.add_argument("--beta")
    s.add_argument("--grid-n", dest="grid_n", type=int)
    s.add_argument("--rmax")
    s.add_argument("--r-min", dest="r_min", type=float)
    s.add_argument("--tol", type=float)
    s.add_argument("--max-iters", dest="max_iters", type=int)
    s.add_argument("--out")
    s.add_argument("--report")
    s.set_defaults(func=cmd_solve)

    w = sub.add_parser("sweep", help="solve a list of couplings in parallel")
    w.add_argument("--k-list", dest="k_list", required=True)
    w.add_argument("--alpha", type=float, default=0.0)
    w.add_argument("--out-dir", dest="out_dir", required=True)
    w.add_argument("--workers", type=int, default=None)
    w.add_argument("--grid-n", dest="grid_n", type=int, default=2000)
    w.add_argument("--r-min", dest="r_min", type=float, default=1e-6)
    w.add_argument("--tol", type=float, default=1e-9)
    w.add_argument("--max-iters", dest="max_iters", type=int, default=60)
    w.set_defaults(func=cmd_sweep)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("suite", choices=[*SUITES, "all"])
    v.add_argument("--tol", type=float, default=None)
    v.set_defaults(func=cmd_verify)

    a = sub.add_parser("analyze", help="aggregate sweep reports")
    a.add_argument("--in-dir", dest="in_dir", required=True)
    a.add_argument("--out", required=True)
    a.set_defaults(func=cmd_analyze)

    r = sub.add_parser("report", help="emit gnuplot scripts and data")
    r.add_argument("--in", dest="input", required=True)
    r.add_argument("--plots", required=True)
    r.set_defaults(func=cmd_report)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "command", None):
            raise UsageError("a subcommand is required")
        return args.func(args)
    except (UsageError, ParameterError) as exc:
        return _emit_error("usage", str(exc), EXIT_USAGE)
    except ConvergenceError as exc:
        return _emit_error("convergence", str(exc), EXIT_NOCONV)
    except SkyrmionError as exc:
        return _emit_error(type(exc).__name__, str(exc), EXIT_CHECK)
    except OSError as exc:
        return _emit_error("filesystem", str(exc), EXIT_USAGE)


def main(argv=None) -> None:
    sys.exit(run(argv))

"""Command-line interface: ``latcorr analyze | thresholds | simulate``.

Exit codes: 0 success, 2 input could not be parsed, 3 input failed
validation, 4 bad experiment configuration.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

from . import __version__
from .baselines import (
    cox_snell_r2,
    cramers_v2,
    fit_polychoric_two_step,
    nagelkerke_r2,
    pearson_c,
    u_total,
)
from .exceptions import ConfigError, LatcorrError
from .inference import ConfidenceInterval, detectable_threshold, infer
from .simulation import EXPERIMENTS, default_config, load_config, parse_number, run_experiment
from .tables import check_table, from_counts

EXIT_PARSE = 2
EXIT_INVALID = 3
EXIT_CONFIG = 4

DEFAULT_LAMBDAS = "0,2/3,1"
THRESHOLD_LAMBDAS = "-1/2,0,2/3,1"
THRESHOLD_DF = "1,2,3,4,5,6,7,8,9,10,15,20,25"
THRESHOLD_N = "1000,3000,5000"
THRESHOLD_ALPHA = "0.05,0.01"


class InputParseError(Exception):
    pass


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def read_counts_csv(text: str) -> tuple[list[list[int]], list[str] | None, list[str] | None]:
    """Parse a counts CSV with an optional header row and label column.

    The first line is a header when any field after its first is non-numeric;
    a label column is present when the first field of the first data line is
    non-numeric.
    """
    lines = [(i, row) for i, row in enumerate(csv.reader(io.StringIO(text)), 1)
             if any(f.strip() for f in row)]
    if not lines:
        raise InputParseError("input is empty")
    header = None
    first = [f.strip() for f in lines[0][1]]
    if not all(_is_number(f) for f in first[1:]) or (len(first) == 1 and not _is_number(first[0])):
        header = first
        lines = lines[1:]
    if not lines:
        raise InputParseError("no data rows")
    labelled = not _is_number(lines[0][1][0].strip())
    labels = [] if labelled else None
    rows = []
    width = None
    for lineno, row in lines:
        fields = [f.strip() for f in row]
        if labelled:
            labels.append(fields[0])
            fields = fields[1:]
        if width is None:
            width = len(fields)
        elif len(fields) != width:
            raise InputParseError(f"line {lineno}: expected {width} values, got {len(fields)}")
        vals = []
        for f in fields:
            try:
                x = float(f)
            except ValueError:
                raise InputParseError(f"line {lineno}: {f!r} is not a number") from None
            if not math.isfinite(x) or x != int(x):
                raise InputParseError(f"line {lineno}: {f!r} is not an integer count")
            vals.append(int(x))
        rows.append(vals)
    if header is not None and labelled:
        header = header[1:]
    return rows, header, labels


def parse_list(text: str, kind=float) -> list:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if kind is int and "-" in tok[1:]:
            lo, hi = tok.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
            continue
        x = parse_number(tok)
        if kind is int:
            if x != int(x):
                raise ValueError(f"{tok!r} is not an integer")
            x = int(x)
        out.append(x)
    if not out:
        raise ValueError("empty list")
    return out


def _ci_dict(ci: ConfidenceInterval | None):
    if ci is None:
        return None
    return {"lo": ci.lower, "hi": ci.upper, "degenerate": ci.degenerate, "method": ci.method,
            "level": ci.level}


def analyze_table(counts, lambdas, alpha=0.05, ci_method="both", polychoric=False) -> dict:
    """Full analysis of a counts grid as a JSON-ready dictionary."""
    ct = from_counts(counts)
    pt, n = check_table(ct)
    warnings = []
    if pt.collapsed:
        warnings.append(f"collapsed: dropped empty rows {list(pt.dropped_rows)} "
                        f"and columns {list(pt.dropped_cols)}")
    results = []
    for lam in lambdas:
        rep = infer(pt, lam, alpha, n)
        v = rep.variances
        results.append({
            "lambda": lam,
            "rho": rep.estimate.rho,
            "t": rep.estimate.t,
            "divergence": rep.estimate.divergence,
            "converged": rep.estimate.converged,
            "iterations": rep.estimate.iterations,
            "sigma2": {"D": v.sigma2_d, "t": v.sigma2_t, "rho": v.sigma2_rho, "z": v.sigma2_z},
            "ci_simple": _ci_dict(rep.ci_simple) if ci_method in ("both", "simple") else None,
            "ci_fisher": _ci_dict(rep.ci_fisher) if ci_method in ("both", "fisher") else None,
            "threshold": rep.threshold,
            "df": rep.df,
        })
        for w in rep.warnings:
            if w not in warnings:
                warnings.append(w)
    baselines = {
        "cramers_v2": cramers_v2(pt),
        "u_total": u_total(pt),
        "pearson_c": pearson_c(pt),
        "cox_snell": cox_snell_r2(pt),
        "nagelkerke": nagelkerke_r2(pt),
    }
    if polychoric:
        fit = fit_polychoric_two_step(pt)
        baselines["polychoric_two_step"] = fit.rho
        if fit.at_bound or not fit.converged:
            warnings.append("polychoric: estimate at bracket bound or not converged")
    return {
        "table": {"r": ct.r, "c": ct.c, "n": ct.n, "counts": ct.counts.tolist()},
        "alpha": alpha,
        "results": results,
        "baselines": baselines,
        "warnings": warnings,
    }


def _f4(x) -> str:
    return "    NA" if x is None else f"{x:.4f}"


def format_report(report: dict, labels: list[str] | None = None) -> str:
    t = report["table"]
    out = [f"table {t['r']}x{t['c']}, n = {t['n']}, alpha = {report['alpha']:g}", ""]
    out.append(f"{'lambda':>8} {'rho':>7} {'t':>7} {'simple':>17} {'fisher':>17} {'thresh':>7}")
    for lam, res in zip(labels or [None] * len(report["results"]), report["results"]):
        name = lam if lam is not None else f"{res['lambda']:g}"
        cells = []
        for key in ("ci_simple", "ci_fisher"):
            ci = res[key]
            if ci is None:
                cells.append(f"{'-':>17}")
            else:
                mark = "*" if ci["degenerate"] else " "
                cells.append(f"({_f4(ci['lo'])}, {_f4(ci['hi'])}){mark}")
        out.append(f"{name:>8} {_f4(res['rho']):>7} {_f4(res['t']):>7} {cells[0]} {cells[1]} "
                   f"{_f4(res['threshold']):>7}")
    out.append("")
    for key, val in report["baselines"].items():
        out.append(f"{key:>20} {_f4(val)}")
    if any(r[k] and r[k]["degenerate"] for r in report["results"] for k in ("ci_simple", "ci_fisher")):
        out.append("")
        out.append("* degenerate: estimate at the boundary, interval given on the t = rho^2 scale")
    return "\n".join(out) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_analyze(args) -> int:
    try:
        text = Path(args.input).read_text() if args.input != "-" else sys.stdin.read()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        counts, _, _ = read_counts_csv(text)
    except InputParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        tokens = [t.strip() for t in args.lambdas.split(",") if t.strip()]
        lambdas = [parse_number(t) for t in tokens]
    except ValueError as exc:
        print(f"error: --lambda: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        report = analyze_table(counts, lambdas, args.alpha, args.ci_method, args.polychoric)
    except LatcorrError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    for w in report["warnings"]:
        print(f"warning: {w}", file=sys.stderr)
    if args.json:
        _emit(json.dumps(report, indent=2) + "\n", args.out)
    else:
        _emit(format_report(report, tokens), args.out)
    return 0


def threshold_rows(lambdas, alphas, ns, dfs) -> list[dict]:
    rows = []
    for lam in lambdas:
        for alpha in alphas:
            for n in ns:
                for df in dfs:
                    rows.append({"lambda": lam, "alpha": alpha, "n": n, "df": df,
                                 "threshold": detectable_threshold(alpha, n, df, lam)})
    return rows


def cmd_thresholds(args) -> int:
    try:
        lambdas = parse_list(args.lambdas)
        alphas = parse_list(args.alpha)
        ns = parse_list(args.n, int)
        dfs = parse_list(args.df, int)
        rows = threshold_rows(lambdas, alphas, ns, dfs)
    except (ValueError, LatcorrError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=("lambda", "alpha", "n", "df", "threshold"), lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    _emit(buf.getvalue(), args.out)
    return 0


def cmd_simulate(args) -> int:
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.reps is not None:
        overrides["reps"] = args.reps
    if args.exact:
        overrides["exact"] = True
    if args.target is not None:
        overrides["target"] = args.target
    try:
        if args.config:
            cfg = load_config(args.config, args.experiment, **overrides)
        else:
            cfg = default_config(args.experiment, **overrides)
    except (ConfigError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    res = run_experiment(args.experiment, cfg, args.threads)
    _emit(res.to_csv(), args.out)
    fails = sum(int(r.get("failures") or 0) for r in res.rows)
    stream = sys.stdout if args.out else sys.stderr
    print(f"{args.experiment}: {len(res.rows)} rows, seed {cfg.seed}, reps {cfg.reps}", file=stream)
    if fails:
        print(f"warning: {fails} non-converged estimate(s)", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="latcorr", description=(
        "Latent correlation of contingency tables from power divergences."))
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="estimate correlations and intervals for a counts CSV")
    a.add_argument("input", help="CSV of counts ('-' for stdin)")
    a.add_argument("--lambda", dest="lambdas", default=DEFAULT_LAMBDAS,
                   help="comma-separated lambdas; fractions such as 2/3 are exact")
    a.add_argument("--alpha", type=float, default=0.05)
    a.add_argument("--ci-method", choices=("both", "simple", "fisher"), default="both")
    a.add_argument("--json", action="store_true", help="emit JSON instead of a text table")
    a.add_argument("--polychoric", action="store_true", help="add the two-step polychoric baseline")
    a.add_argument("--out", help="write to this file instead of stdout")
    a.set_defaults(func=cmd_analyze)

    t = sub.add_parser("thresholds", help="detectable-correlation threshold grid as CSV")
    t.add_argument("--lambda", dest="lambdas", default=THRESHOLD_LAMBDAS)
    t.add_argument("--alpha", default=THRESHOLD_ALPHA)
    t.add_argument("--n", default=THRESHOLD_N)
    t.add_argument("--df", default=THRESHOLD_DF, help="list; ranges like 1-10 allowed")
    t.add_argument("--out")
    t.set_defaults(func=cmd_thresholds)

    s = sub.add_parser("simulate", help="run a seeded experiment and write CSV")
    s.add_argument("experiment", choices=EXPERIMENTS)
    s.add_argument("--config", help="JSON or key = value file")
    s.add_argument("--seed", type=int)
    s.add_argument("--reps", type=int)
    s.add_argument("--threads", type=int, help="worker processes (default: $LATCORR_THREADS or 1)")
    s.add_argument("--exact", action="store_true", help="exact probability tables only")
    s.add_argument("--target", choices=("measure", "latent"))
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

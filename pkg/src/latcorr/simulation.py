"""Latent bivariate-normal tables and seeded Monte-Carlo experiment drivers.

Every replication draws from its own Philox stream keyed by
``(seed, cell index, replication)``, so results do not depend on execution
order or on the number of worker processes.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from fractions import Fraction
from itertools import product
from pathlib import Path

import numpy as np

from .baselines import cramers_v2, fit_polychoric_two_step, u_total
from .divergence import check_lambda, power_divergence_array
from .exceptions import ConfigError, LatcorrError
from .inference import ci_fisher_z, ci_simple
from .numerics import bvn_rect_prob, check_rho, std_normal_quantile
from .solver import rho_lambda, solve_divergence
from .tables import ContingencyTable, ProbabilityTable, to_probabilities

EXPERIMENTS = ("perf", "coverage", "boundary", "runtime")


def parse_number(token) -> float:
    """Parse ``"0.5"``, ``"-1/2"`` or ``"2/3"`` exactly, then round once to float."""
    if isinstance(token, (int, float)):
        return float(token)
    text = str(token).strip()
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a number: {token!r}") from exc


def latent_thresholds(r: int) -> np.ndarray:
    """``(-inf, z_{1/r}, ..., z_{(r-1)/r}, inf)``."""
    if int(r) != r or r < 2:
        raise ValueError(f"r must be an integer >= 2, got {r!r}")
    inner = std_normal_quantile(np.arange(1, r) / r)
    return np.concatenate(([-np.inf], np.atleast_1d(inner), [np.inf]))


def latent_probability_table(r: int, rho: float, c: int | None = None) -> ProbabilityTable:
    """Discretize a standard bivariate normal at equiprobable thresholds.

    Cell ``(i, j)`` is the mass of ``(z_{(i-1)/r}, z_{i/r}] x (z_{(j-1)/c}, z_{j/c}]``.
    """
    rho = check_rho(rho)
    c = r if c is None else c
    a = latent_thresholds(r)
    b = latent_thresholds(c)
    p = bvn_rect_prob(a[:-1, None], a[1:, None], b[None, :-1], b[None, 1:], rho)
    return ProbabilityTable(p)


def stream(seed: int, cell: int, rep: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, cell, rep])))


def sample_table(pt: ProbabilityTable, n: int, rng: np.random.Generator) -> ContingencyTable:
    """Multinomial draw of ``n`` observations over the cells of ``pt``.

    numpy's multinomial sampler draws each cell as a binomial conditioned on
    the counts already placed, in row-major order.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    p = np.asarray(pt.p).ravel()
    counts = rng.multinomial(int(n), p / p.sum())
    return ContingencyTable(counts.reshape(pt.shape))


@dataclass(frozen=True)
class ExperimentConfig:
    rho_list: tuple[float, ...]
    r_list: tuple[int, ...]
    n_list: tuple[int, ...]
    lambda_list: tuple[float, ...]
    reps: int
    seed: int = 20240101
    alpha: float = 0.05
    target: str = "measure"
    exact: bool = False
    threads: int = 1
    timing_repeats: int = 21
    warmups: int = 3

    def __post_init__(self):
        for name in ("rho_list", "r_list", "n_list", "lambda_list"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        try:
            for lam in self.lambda_list:
                check_lambda(lam)
            for rho in self.rho_list:
                check_rho(rho)
        except LatcorrError as exc:
            raise ConfigError(str(exc)) from exc
        if any(int(r) != r or r < 2 for r in self.r_list):
            raise ConfigError(f"every r must be an integer >= 2, got {self.r_list!r}")
        if any(int(n) != n or n < 1 for n in self.n_list):
            raise ConfigError(f"every n must be a positive integer, got {self.n_list!r}")
        if int(self.reps) != self.reps or self.reps < 1:
            raise ConfigError(f"reps must be a positive integer, got {self.reps!r}")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if self.target not in ("measure", "latent"):
            raise ConfigError(f"target must be 'measure' or 'latent', got {self.target!r}")
        if self.threads < 1 or self.timing_repeats < 1 or self.warmups < 0:
            raise ConfigError("threads and timing_repeats must be >= 1, warmups >= 0")


DEFAULTS = {
    "perf": dict(rho_list=(0.2, 0.5, 0.8), r_list=(10, 15, 25, 50), n_list=(3000, 5000, 10000),
                 lambda_list=(-0.5, 0.0, 2 / 3, 1.0), reps=200),
    "coverage": dict(rho_list=(0.2, 0.5, 0.8), r_list=(4, 6, 8), n_list=(3000, 5000, 10000),
                     lambda_list=(-0.5, 0.0, 2 / 3, 1.0), reps=2000),
    "boundary": dict(rho_list=(0.9, 0.95, 0.99), r_list=(5, 10, 25, 50, 100), n_list=(1,),
                     lambda_list=(0.0, 2 / 3, 1.0), reps=1, exact=True),
    "runtime": dict(rho_list=(0.5,), r_list=(10, 15, 25, 50), n_list=(1,),
                    lambda_list=(0.0, 2 / 3, 1.0), reps=1, exact=True),
}

_LIST_KEYS = {"rho_list": float, "r_list": int, "n_list": int, "lambda_list": float}
_ALIASES = {"rho": "rho_list", "r": "r_list", "n": "n_list", "lambda": "lambda_list", "lam": "lambda_list"}


def default_config(experiment: str, **overrides) -> ExperimentConfig:
    if experiment not in DEFAULTS:
        raise ConfigError(f"unknown experiment {experiment!r}")
    return ExperimentConfig(**{**DEFAULTS[experiment], **overrides})


def _coerce(key: str, value):
    key = _ALIASES.get(key, key)
    known = {f.name: f for f in fields(ExperimentConfig)}
    if key not in known:
        raise ConfigError(f"unknown config key {key!r}")
    if key in _LIST_KEYS:
        items = value.split(",") if isinstance(value, str) else value
        if not isinstance(items, (list, tuple)):
            items = [items]
        kind = _LIST_KEYS[key]
        out = []
        for item in items:
            x = parse_number(item)
            if kind is int:
                if x != int(x):
                    raise ConfigError(f"{key} entries must be integers, got {item!r}")
                x = int(x)
            out.append(x)
        return key, tuple(out)
    if key in ("exact",):
        if isinstance(value, str):
            return key, value.strip().lower() in ("1", "true", "yes", "on")
        return key, bool(value)
    if key == "target":
        return key, str(value).strip()
    if key in ("alpha",):
        return key, parse_number(value)
    x = parse_number(value)
    if x != int(x):
        raise ConfigError(f"{key} must be an integer, got {value!r}")
    return key, int(x)


def parse_config(text: str) -> dict:
    """Read a JSON object or ``key = value`` lines (``#`` starts a comment)."""
    stripped = text.strip()
    try:
        if stripped.startswith("{"):
            raw = json.loads(stripped)
        else:
            raw = {}
            for lineno, line in enumerate(text.splitlines(), 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"line {lineno}: expected key = value")
                k, v = line.split("=", 1)
                raw[k.strip()] = v.strip()
        return dict(_coerce(k, v) for k, v in raw.items())
    except (ValueError, TypeError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def load_config(path, experiment: str, **overrides) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    values = parse_config(text)
    values.update({k: v for k, v in overrides.items() if v is not None})
    return default_config(experiment, **values)


def _threads(requested: int | None) -> int:
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get("LATCORR_THREADS")
    return max(1, int(env)) if env else 1


@dataclass
class ExperimentResult:
    experiment: str
    columns: tuple[str, ...]
    rows: list[dict] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=self.columns, lineterminator="\n")
        w.writeheader()
        for row in self.rows:
            w.writerow({k: _fmt(row.get(k)) for k in self.columns})
        return buf.getvalue()

    def write_csv(self, path) -> None:
        Path(path).write_text(self.to_csv())

    def select(self, **criteria) -> list[dict]:
        out = []
        for row in self.rows:
            if all(_match(row.get(k), v) for k, v in criteria.items()):
                out.append(row)
        return out


def _match(a, b) -> bool:
    if isinstance(a, float) and isinstance(b, (int, float)):
        return abs(a - b) < 1e-12
    return a == b


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _map(fn, tasks, threads: int) -> list:
    if threads <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(threads, len(tasks))) as pool:
        return list(pool.map(fn, tasks))


def _mean(xs) -> float | None:
    return math.fsum(xs) / len(xs) if xs else None


# -- measure performance -------------------------------------------------------

PERF_COLUMNS = ("experiment", "mode", "r", "rho", "n", "lambda", "measure", "mean",
                "mean_converged", "reps", "used", "skipped", "failures")


def _estimates(pt: ProbabilityTable, lambdas) -> dict:
    p = np.asarray(pt.p)
    zero = bool((p == 0).any())
    out = {}
    for lam in lambdas:
        if lam < 0 and zero:
            out[lam] = None
            continue
        out[lam] = solve_divergence(power_divergence_array(p, lam), lam)
    return out


def _perf_cell(task):
    cfg, cell, r, rho, n = task
    pt = latent_probability_table(r, rho)
    vals = {lam: [] for lam in cfg.lambda_list}
    conv = {lam: [] for lam in cfg.lambda_list}
    skipped = dict.fromkeys(cfg.lambda_list, 0)
    failures = dict.fromkeys(cfg.lambda_list, 0)
    v2, ut = [], []
    for rep in range(cfg.reps):
        sp = to_probabilities(sample_table(pt, n, stream(cfg.seed, cell, rep)))
        for lam, est in _estimates(sp, cfg.lambda_list).items():
            if est is None:
                skipped[lam] += 1
                continue
            vals[lam].append(est.rho)
            if est.converged:
                conv[lam].append(est.rho)
            else:
                failures[lam] += 1
        v2.append(cramers_v2(sp))
        ut.append(u_total(sp))
    rows = []
    base = dict(experiment="perf", mode="sampled", r=r, rho=rho, n=n, reps=cfg.reps)
    for lam in cfg.lambda_list:
        rows.append(dict(base, measure="rho_lambda", **{"lambda": lam}, mean=_mean(vals[lam]),
                         mean_converged=_mean(conv[lam]), used=len(vals[lam]),
                         skipped=skipped[lam], failures=failures[lam]))
    for name, xs in (("cramers_v2", v2), ("u_total", ut)):
        rows.append(dict(base, measure=name, mean=_mean(xs), mean_converged=_mean(xs),
                         used=len(xs), skipped=0, failures=0))
    return rows


def _exact_rows(r: int, rho: float, lambdas) -> list[dict]:
    pt = latent_probability_table(r, rho)
    rows = []
    base = dict(experiment="perf", mode="exact", r=r, rho=rho, n=None, reps=1, used=1, skipped=0)
    for lam, est in _estimates(pt, lambdas).items():
        rows.append(dict(base, measure="rho_lambda", **{"lambda": lam}, mean=est.rho,
                         mean_converged=est.rho if est.converged else None,
                         failures=int(not est.converged)))
    for name, fn in (("cramers_v2", cramers_v2), ("u_total", u_total)):
        v = fn(pt)
        rows.append(dict(base, measure=name, mean=v, mean_converged=v, failures=0))
    return rows


def run_performance(cfg: ExperimentConfig, threads: int | None = None) -> ExperimentResult:
    """Mean of each measure over sampled tables, plus its value on the exact table."""
    res = ExperimentResult("perf", PERF_COLUMNS)
    for rho, r in product(cfg.rho_list, cfg.r_list):
        res.rows.extend(_exact_rows(r, rho, cfg.lambda_list))
    if cfg.exact:
        return res
    tasks = [(cfg, i, r, rho, n) for i, (rho, r, n) in
             enumerate(product(cfg.rho_list, cfg.r_list, cfg.n_list))]
    for rows in _map(_perf_cell, tasks, _threads(threads if threads is not None else cfg.threads)):
        res.rows.extend(rows)
    return res


# -- interval coverage ---------------------------------------------------------

COVERAGE_COLUMNS = ("experiment", "r", "rho", "n", "lambda", "method", "target", "coverage",
                    "covered", "reps", "used", "skipped", "boundary", "failures", "mean_width")


def _coverage_cell(task):
    cfg, cell, r, rho, n = task
    pt = latent_probability_table(r, rho)
    targets = {}
    for lam, est in _estimates(pt, cfg.lambda_list).items():
        targets[lam] = rho if cfg.target == "latent" else est.rho
    methods = ("simple", "fisher")
    covered = {(lam, m): 0 for lam in cfg.lambda_list for m in methods}
    boundary = dict.fromkeys(covered, 0)
    widths = {k: [] for k in covered}
    used = dict.fromkeys(cfg.lambda_list, 0)
    failures = dict.fromkeys(cfg.lambda_list, 0)
    for rep in range(cfg.reps):
        ct = sample_table(pt, n, stream(cfg.seed, cell, rep))
        sp = to_probabilities(ct)
        for lam, est in _estimates(sp, cfg.lambda_list).items():
            if est is None:
                continue
            used[lam] += 1
            failures[lam] += int(not est.converged)
            for m, fn in (("simple", ci_simple), ("fisher", ci_fisher_z)):
                ci = fn(sp, lam, cfg.alpha, n=n, estimate=est)
                if ci.degenerate:
                    boundary[(lam, m)] += 1
                    continue
                widths[(lam, m)].append(ci.width)
                covered[(lam, m)] += int(ci.covers(targets[lam]))
    rows = []
    for lam, m in product(cfg.lambda_list, methods):
        u = used[lam]
        rows.append({"experiment": "coverage", "r": r, "rho": rho, "n": n, "lambda": lam,
                     "method": m, "target": targets[lam],
                     "coverage": covered[(lam, m)] / u if u else None,
                     "covered": covered[(lam, m)], "reps": cfg.reps, "used": u,
                     "skipped": cfg.reps - u, "boundary": boundary[(lam, m)],
                     "failures": failures[lam], "mean_width": _mean(widths[(lam, m)])})
    return rows


def run_coverage(cfg: ExperimentConfig, threads: int | None = None) -> ExperimentResult:
    """Fraction of Simple and Fisher intervals that contain the target.

    The target is ``rho_(lam)`` of the exact probability table, or the latent
    ``rho`` with ``target="latent"``.  Boundary estimates count as misses and
    are tallied in ``boundary``; tables skipped for zero cells at ``lam < 0``
    are excluded from the denominator and tallied in ``skipped``.
    """
    res = ExperimentResult("coverage", COVERAGE_COLUMNS)
    tasks = [(cfg, i, r, rho, n) for i, (r, rho, n) in
             enumerate(product(cfg.r_list, cfg.rho_list, cfg.n_list))]
    for rows in _map(_coverage_cell, tasks, _threads(threads if threads is not None else cfg.threads)):
        res.rows.extend(rows)
    return res


# -- near-boundary stability ---------------------------------------------------

BOUNDARY_COLUMNS = ("experiment", "r", "rho", "lambda", "measure", "value", "deviation",
                    "converged", "iterations", "at_bound")


def _boundary_cell(task):
    cfg, r, rho = task
    pt = latent_probability_table(r, rho)
    rows = []
    base = {"experiment": "boundary", "r": r, "rho": rho}
    for lam in cfg.lambda_list:
        est = rho_lambda(pt, lam)
        rows.append(dict(base, **{"lambda": lam}, measure="rho_lambda", value=est.rho,
                         deviation=est.rho - rho, converged=est.converged,
                         iterations=est.iterations, at_bound=False))
    try:
        fit = fit_polychoric_two_step(pt)
        rows.append(dict(base, measure="polychoric", value=fit.rho, deviation=fit.rho - rho,
                         converged=fit.converged, iterations=fit.iterations, at_bound=fit.at_bound))
    except LatcorrError:
        rows.append(dict(base, measure="polychoric", converged=False))
    for name, fn in (("cramers_v2", cramers_v2), ("u_total", u_total)):
        rows.append(dict(base, measure=name, value=fn(pt)))
    return rows


def run_boundary(cfg: ExperimentConfig, threads: int | None = None) -> ExperimentResult:
    """Every measure on exact tables for ``rho`` close to one."""
    res = ExperimentResult("boundary", BOUNDARY_COLUMNS)
    tasks = [(cfg, r, rho) for rho, r in product(cfg.rho_list, cfg.r_list)]
    for rows in _map(_boundary_cell, tasks, _threads(threads if threads is not None else cfg.threads)):
        res.rows.extend(rows)
    return res


# -- runtime -------------------------------------------------------------------

RUNTIME_COLUMNS = ("experiment", "r", "rho", "lambda", "measure", "median_seconds",
                   "repeats", "ratio_to_rho0")


def median_time(fn, repeats: int = 21, warmups: int = 3) -> float:
    for _ in range(warmups):
        fn()
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return statistics.median(times)


def run_runtime(cfg: ExperimentConfig) -> ExperimentResult:
    """Median wall-clock time of each measure on exact tables.

    ``ratio_to_rho0`` divides by the time of ``rho_(0)``; always serial.
    """
    res = ExperimentResult("runtime", RUNTIME_COLUMNS)
    k, w = cfg.timing_repeats, cfg.warmups
    for rho, r in product(cfg.rho_list, cfg.r_list):
        pt = latent_probability_table(r, rho)
        base = {"experiment": "runtime", "r": r, "rho": rho, "repeats": k}
        ref = median_time(lambda: rho_lambda(pt, 0.0), k, w)
        cell = []
        for lam in cfg.lambda_list:
            sec = ref if lam == 0.0 else median_time(lambda lam=lam: rho_lambda(pt, lam), k, w)
            cell.append(dict(base, **{"lambda": lam}, measure="rho_lambda", median_seconds=sec))
        sec = median_time(lambda: fit_polychoric_two_step(pt), k, w)
        cell.append(dict(base, measure="polychoric", median_seconds=sec))
        for row in cell:
            row["ratio_to_rho0"] = row["median_seconds"] / ref
        res.rows.extend(cell)
    return res


RUNNERS = {"perf": run_performance, "coverage": run_coverage, "boundary": run_boundary}


def run_experiment(name: str, cfg: ExperimentConfig, threads: int | None = None) -> ExperimentResult:
    if name == "runtime":
        return run_runtime(cfg)
    if name not in RUNNERS:
        raise ConfigError(f"unknown experiment {name!r}")
    return RUNNERS[name](cfg, threads)


__all__ = [
    "DEFAULTS", "EXPERIMENTS", "ExperimentConfig", "ExperimentResult", "default_config",
    "latent_probability_table", "latent_thresholds", "load_config", "median_time", "parse_config",
    "parse_number", "run_boundary", "run_coverage", "run_experiment",
    "run_performance", "run_runtime", "sample_table", "stream",
]

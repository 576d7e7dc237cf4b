"""Command-line front end: config-driven runs emitting TSV tables.

Usage: fogloss <config-path> [--wide] [--out PATH], or fogloss --preset
fig2|fig3|fig4 for the built-in figure grids.  Exit codes: 0 on success,
2 on a usage/config problem, 3 when an engine refuses or fails.

Tables are tab-separated with header param/regime/beta1/beta2/pi00/method,
numbers at 10 significant digits, and `NA` wherever a value is refused or
not produced by an engine; parameter points on a regime boundary get
regime tag `critical` and NA probabilities.  Output is byte-deterministic
given the config (seeds included).
"""

from __future__ import annotations

import os

# honor the thread cap before any numerics library spins up its pools
_threads = os.environ.get("FOGLOSS_THREADS", "")
if _threads.isdigit() and int(_threads) >= 1:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                 "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS", "NUMBA_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)

import argparse
import dataclasses
import sys
from pathlib import Path

import numpy as np

from . import analytic
from .config import RunConfig, parse_config
from .errors import (
    CriticalRegime,
    FoglossError,
    ParseError,
    UnsupportedTopology,
    ValidationError,
    WrongRegime,
)
from .params import SystemParams
from .ring import ring_blocking
from .rwsolver import WalkParams, oracle_solution
from .simulator import FiniteSystem, exact_finite, simulate_two

HEADER = ("param", "regime", "beta1", "beta2", "pi00", "method")
CHECK_EXTRA = ("dbeta1", "dbeta2", "dpi00")


def _fmt(v) -> str:
    if v is None:
        return "NA"
    if isinstance(v, str):
        return v
    return "%.10g" % v


def format_table(header, rows) -> str:
    lines = ["\t".join(header)]
    for row in rows:
        lines.append("\t".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _safe_tag(params: SystemParams):
    """Regime tag, or None when the point sits on a boundary."""
    tag = analytic.regime(params).tag
    return None if tag == "Critical" else tag


def _engine_rows(cfg: RunConfig, engine: str, pv, params: SystemParams, tag):
    """Rows for one engine at one parameter point (tag=None means critical)."""
    if engine == "analytic":
        methods = ["analytic"]
    elif engine == "oracle":
        methods = [f"oracle:M={cfg.oracle_M}"]
    elif engine == "exact":
        methods = [f"exact:N={n}" for n in (cfg.n_values or (50,))]
    else:
        methods = [f"simulate:N={n}" for n in (cfg.n_values or (100,))]

    if tag is None:
        return [(pv, "critical", None, None, None, m) for m in methods]

    if engine == "analytic":
        sol = analytic.blocking(params, tol_quad=cfg.tol_quad)
        return [(pv, tag, sol.beta1, sol.beta2, sol.pi00, methods[0])]
    if engine == "oracle":
        try:
            o = oracle_solution(WalkParams.from_system(params), cfg.oracle_M)
        except WrongRegime:
            # no stationary walk to truncate (both centers underloaded)
            return [(pv, tag, None, None, None, methods[0])]
        return [(pv, tag, o["beta1"], o["beta2"], o["pi00"], methods[0])]
    rows = []
    if engine == "exact":
        for n, m in zip(cfg.n_values or (50,), methods):
            b1, b2 = exact_finite(FiniteSystem(params, n))
            rows.append((pv, tag, b1, b2, None, m))
    else:
        for n, m in zip(cfg.n_values or (100,), methods):
            est = simulate_two(FiniteSystem(params, n), cfg.horizon,
                               cfg.warmup, cfg.seed)
            rows.append((pv, tag, est.beta1_hat, est.beta2_hat, None, m))
    return rows


def _max_spread(values) -> float | None:
    nums = [v for v in values if v is not None]
    if len(nums) < 2:
        return None
    return max(nums) - min(nums)


def _point_rows(cfg: RunConfig, pv, params: SystemParams):
    engines = {"sweep": ("analytic",), "check": ("analytic", "oracle", "exact")}.get(
        cfg.mode, (cfg.mode,))
    tag = _safe_tag(params)
    rows = []
    for engine in engines:
        rows.extend(_engine_rows(cfg, engine, pv, params, tag))
    if cfg.mode == "check":
        extra = (_max_spread([r[2] for r in rows]),
                 _max_spread([r[3] for r in rows]),
                 _max_spread([r[4] for r in rows]))
        rows = [r + extra for r in rows]
    return rows


def _ring_rows(cfg: RunConfig):
    ring = cfg.ring
    try:
        sol = ring_blocking(ring, tol_quad=cfg.tol_quad)
    except CriticalRegime:
        return [(j + 1, "critical", None, None, None, "ring") for j in range(ring.J)]
    except UnsupportedTopology:
        return [(j + 1, "unsupported", None, None, None, "ring") for j in range(ring.J)]
    return [(j + 1, sol.case, sol.beta[j], None, None, "ring")
            for j in range(ring.J)]


def run(cfg: RunConfig):
    """Evaluate the configured run; returns (header, rows)."""
    if cfg.mode == "ring":
        return HEADER, _ring_rows(cfg)
    header = HEADER + CHECK_EXTRA if cfg.mode == "check" else HEADER
    if cfg.sweep is None:
        points = [(None, cfg.params)]
    else:
        grid = np.linspace(cfg.sweep.start, cfg.sweep.stop, cfg.sweep.steps)
        points = [(float(v), dataclasses.replace(cfg.params, **{cfg.sweep.param: float(v)}))
                  for v in grid]
    rows = []
    for pv, params in points:
        try:
            rows.extend(_point_rows(cfg, pv, params))
        except FoglossError as e:
            if pv is not None:
                e.args = (f"at sweep point {cfg.sweep.param} = {pv:.10g}: {e}",)
            raise
    return header, rows


_FIG_BASE = dict(mu1=1.0, mu2=1.0, c1=1.0, c2=10.0, p2=0.0)


def emit_figure_presets(name: str, tol_quad: float = 1e-10):
    """Analytic tables for the built-in figure grids.

    fig2/fig3: beta vs lambda1 in [1, 5] (41 points) at lambda2 = 8 / 12,
    one series per p1 in {0, 0.35, 0.7, 1}.  fig4: beta vs p1 in [0, 1]
    (21 points) at lambda1 = 1.2, one series per lambda2 in {9.9, 11}.
    The series tag rides on the method column ("analytic,p1=0.35"), which
    --wide pivots into beta1_p1_0.35-style columns.
    """
    cfg = RunConfig(mode="sweep", tol_quad=tol_quad)
    rows = []
    if name in ("fig2", "fig3"):
        lam2 = 8.0 if name == "fig2" else 12.0
        for p1 in (0.0, 0.35, 0.7, 1.0):
            base = SystemParams(lambda1=1.0, lambda2=lam2, p1=p1, **_FIG_BASE)
            for v in np.linspace(1.0, 5.0, 41):
                params = dataclasses.replace(base, lambda1=float(v))
                row = _engine_rows(cfg, "analytic", float(v), params, _safe_tag(params))[0]
                rows.append(row[:5] + (f"analytic,p1={p1:g}",))
    elif name == "fig4":
        for lam2 in (9.9, 11.0):
            base = SystemParams(lambda1=1.2, lambda2=lam2, p1=0.0, **_FIG_BASE)
            for v in np.linspace(0.0, 1.0, 21):
                params = dataclasses.replace(base, p1=float(v))
                row = _engine_rows(cfg, "analytic", float(v), params, _safe_tag(params))[0]
                rows.append(row[:5] + (f"analytic,lambda2={lam2:g}",))
    else:
        raise ValidationError("preset", f"unknown preset {name!r}")
    return HEADER, rows


def pivot_wide(header, rows):
    """Pivot a long table into one row per param value, one beta column per series.

    The series is the method-column suffix after the first comma
    ("p1=0.35"); tables without a series suffix pivot on the method name
    itself.  Non-beta columns are dropped, matching the plain data-file
    layout the long format replaces.
    """
    params_order, series_order = [], []
    cells = {}
    for row in rows:
        pv, b1, b2, method = row[0], row[2], row[3], row[5]
        series = method.split(",", 1)[1] if "," in method else method
        if pv not in params_order:
            params_order.append(pv)
        if series not in series_order:
            series_order.append(series)
        cells[(pv, series)] = (b1, b2)

    def col(prefix, series):
        return prefix + "_" + series.replace("=", "_").replace(":", "_").replace(",", "_")

    out_header = ["param"]
    out_header += [col("beta1", s) for s in series_order]
    out_header += [col("beta2", s) for s in series_order]
    out_rows = []
    for pv in params_order:
        got = [cells.get((pv, s), (None, None)) for s in series_order]
        out_rows.append(tuple([pv] + [g[0] for g in got] + [g[1] for g in got]))
    return tuple(out_header), out_rows


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="fogloss",
        description="Asymptotic and finite-scale blocking probabilities of "
                    "cooperating loss centers with overflow rerouting.")
    ap.add_argument("config", nargs="?", help="path to a key = value config file")
    ap.add_argument("--wide", action="store_true",
                    help="pivot the table to one row per param, one column per series")
    ap.add_argument("--out", help="write the table here instead of the config's "
                                  "`out` path / stdout")
    ap.add_argument("--preset", choices=("fig2", "fig3", "fig4"),
                    help="run a built-in figure grid instead of a config file")
    args = ap.parse_args(argv)

    raw_threads = os.environ.get("FOGLOSS_THREADS")
    if raw_threads is not None and (not raw_threads.isdigit() or int(raw_threads) < 1):
        print(f"fogloss: FOGLOSS_THREADS must be a positive integer, got {raw_threads!r}",
              file=sys.stderr)
        return 2

    if args.preset and args.config:
        print("fogloss: --preset and a config path are mutually exclusive", file=sys.stderr)
        return 2
    if not args.preset and not args.config:
        ap.print_usage(sys.stderr)
        print("fogloss: a config path (or --preset) is required", file=sys.stderr)
        return 2

    out_path = args.out
    try:
        if args.preset:
            header, rows = emit_figure_presets(args.preset)
        else:
            try:
                text = Path(args.config).read_text()
            except OSError as e:
                print(f"fogloss: cannot read config: {e}", file=sys.stderr)
                return 2
            try:
                cfg = parse_config(text)
            except (ParseError, ValidationError) as e:
                print(f"fogloss: config error: {e}", file=sys.stderr)
                return 2
            out_path = args.out or cfg.out
            header, rows = run(cfg)
    except FoglossError as e:
        print(f"fogloss: {type(e).__name__}: {e}", file=sys.stderr)
        return 3

    if args.wide:
        header, rows = pivot_wide(header, rows)
    table = format_table(header, rows)
    if out_path:
        try:
            Path(out_path).write_text(table)
        except OSError as e:
            print(f"fogloss: cannot write output: {e}", file=sys.stderr)
            return 2
    else:
        sys.stdout.write(table)
    return 0

"""Command-line front end.

Usage::

    python -m nonlocal_eigs SUBCOMMAND [--config FILE] [--out PREFIX]
                            [--seed N] [--workers N] [--KEY VALUE ...]

Configuration is flat ``key=value`` text (``#`` starts a comment); flags
override the file.  Every run writes CSV tables and a JSON summary next to
``PREFIX``, plus ``PREFIX_manifest.json`` listing the configuration,
library versions, seed, wall time and a SHA-256 checksum of every file.

Exit codes: 0 success, 1 invalid configuration or input, 2 non-convergence,
3 oracle mismatch, 4 input/output failure.
"""

import argparse
import csv
import hashlib
import io
import json
import platform
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .beta_constants import profile
from .dirichlet_solver import (
    SolveConfig,
    abp_ratio,
    barrier_sign_check,
    max_principle_threshold,
    random_smooth_source,
    solve,
)
from .eigensolver import EigenConfig, inverse_power
from .errors import ConfigurationError, ConvergenceError, NonlocalError
from .grid import Domain, build_grid
from .nonlocal_op import Control, ControlFamily, KernelClass, build_quadrature
from .oracle import run_gates
from .parabolic import decay_ratio_series, decay_rate_fit

__all__ = ["RunConfig", "parse_config", "parse_family", "main"]

SUBCOMMANDS = ("beta", "solve", "eigen", "parabolic", "abp", "barrier", "threshold", "check")


def _optional(conv):
    def parse(text):
        return None if text.strip().lower() in ("", "none") else conv(text)

    return parse


def _float_list(text):
    return tuple(float(v) for v in text.split(",") if v.strip())


def _bounds(text):
    vals = _float_list(text)
    if len(vals) not in (2, 4):
        raise ValueError("expected 'a,b' or 'a,b,c,d'")
    return vals


# key -> (parser, default, help)
KEYS = {
    "s": (float, 0.5, "kernel order s in (0, 1)"),
    "lambda": (float, 1.0, "lower ellipticity bound"),
    "Lambda": (float, 1.0, "upper ellipticity bound"),
    "cplus": (float, 0.0, "drift bound (needs s > 1/2 when positive)"),
    "domain": (_bounds, (-1.0, 1.0), "domain bounds a,b"),
    "h": (float, 2.0 / 256, "grid spacing"),
    "family": (str, "linear", "plus | minus | linear[:kappa[:c]] | sup:... | inf:... | infsup:..."),
    "method": (str, "auto", "auto | policy_iteration | pseudo_time"),
    "residual_tol": (float, 1e-10, "solver residual tolerance"),
    "max_iters": (_optional(int), None, "solver iteration budget"),
    "rho": (float, 0.0, "shift rho in -I u - rho u = f"),
    "f": (str, "const1", "right-hand side: const1 | bump | path to CSV (node_index,value)"),
    "seed": (int, 0, "seed for every random choice"),
    "workers": (int, 1, "worker threads (results do not depend on it)"),
    "sign": (str, "plus", "eigenfunction sign: plus | minus"),
    "cw_gap_tol": (float, 1e-6, "Collatz-Wielandt gap tolerance"),
    "max_outer_iters": (int, 500, "inverse power iteration budget"),
    "h0": (str, "bump", "parabolic initial data: bump | phi | path to CSV"),
    "horizon": (_optional(float), None, "parabolic final time (default 8 / lambda1)"),
    "burn_in": (float, 0.3, "burn-in as a fraction of the horizon"),
    "n_samples": (int, 20, "number of samples (beta profile, ABP sources)"),
    "quad_tol": (float, 1e-10, "quadrature tolerance for c+-(beta)"),
    "root_tol": (float, 1e-6, "bracket width for beta roots"),
    "betas": (_optional(_float_list), None, "barrier exponents (default: each root +- 0.1)"),
    "collar": (float, 0.02, "barrier evaluation collar"),
    "barrier_cells": (int, 16384, "cells of the barrier grid on (-1, 1)"),
    "barrier_delta": (float, 0.9, "collar of the barrier xi itself"),
    "rho_min": (float, 0.0, "threshold scan start"),
    "rho_max": (float, 20.0, "threshold scan end"),
    "rho_step": (float, 0.01, "threshold scan step"),
}


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    values: dict
    out: str

    def __getitem__(self, key):
        return self.values[key]

    def kernel(self):
        return KernelClass(self["lambda"], self["Lambda"], self["s"], self["cplus"])

    def grid(self):
        b = self["domain"]
        return build_grid(Domain(tuple(zip(b[0::2], b[1::2]))), self["h"])

    def family(self):
        return parse_family(self["family"], self.kernel())

    def solve_config(self):
        return SolveConfig(self["method"], self["residual_tol"], self["max_iters"], self["rho"])

    def echo(self):
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.values.items()}


def _controls(text):
    out = []
    for item in text.split(";"):
        parts = [float(p) for p in item.split(":")]
        if len(parts) not in (1, 2):
            raise ValueError(f"control {item!r} must be 'kappa' or 'kappa:drift'")
        out.append(Control(*parts))
    return out


def parse_family(text, k):
    """Family from its text form.

    ``plus`` and ``minus`` are the extremal operators; ``linear:kappa:drift``
    a single control (``kappa`` defaults to ``lambda``); ``sup:k:c;k:c`` and
    ``inf:k:c;k:c`` one-sided families; ``infsup:k:c;k:c|k:c;k:c`` an
    inf over groups of a sup within each group.
    """
    text = text.strip()
    head, _, rest = text.partition(":")
    try:
        if head in ("plus", "minus") and not rest:
            fam = ControlFamily.extremal(head)
        elif head == "linear":
            parts = [float(p) for p in rest.split(":")] if rest else []
            fam = ControlFamily.linear(*(parts or [k.lambda_lo]))
        elif head == "sup":
            fam = ControlFamily.sup_of(_controls(rest))
        elif head == "inf":
            fam = ControlFamily.inf_of(_controls(rest))
        elif head == "infsup":
            fam = ControlFamily(tuple(tuple(_controls(g)) for g in rest.split("|")))
        else:
            raise ValueError("unknown family form")
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"family: cannot parse {text!r} ({exc})") from None
    if not fam.is_extremal:
        try:
            fam.check(k)
        except ConfigurationError as exc:
            raise ConfigurationError(f"family: {exc}") from None
    return fam


def _read_config_text(text):
    pairs = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        for token in line.split():
            if "=" not in token:
                raise ConfigurationError(f"line {n}: expected key=value, got {token!r}")
            key, value = token.split("=", 1)
            pairs[key.strip()] = value.strip()
    return pairs


def parse_config(subcommand, text="", flags=None, out="run"):
    """Validated :class:`RunConfig` from config text and flag overrides.

    ``flags`` maps keys to strings (or already-typed values).  Unknown keys
    and values outside a module's preconditions raise
    :class:`ConfigurationError` naming the key.
    """
    if subcommand not in SUBCOMMANDS:
        raise ConfigurationError(f"unknown subcommand {subcommand!r}")
    raw = _read_config_text(text)
    raw.update({k: v for k, v in (flags or {}).items() if v is not None})
    values = {k: default for k, (_, default, _) in KEYS.items()}
    problems = []
    for key, value in raw.items():
        if key not in KEYS:
            problems.append(f"unknown key {key!r}")
            continue
        conv = KEYS[key][0]
        try:
            values[key] = conv(value) if isinstance(value, str) else value
        except ValueError as exc:
            problems.append(f"{key}: invalid value {value!r} ({exc})")
    if problems:
        raise ConfigurationError("; ".join(problems))
    cfg = RunConfig(subcommand, values, out)
    try:
        k = cfg.kernel()
    except ConfigurationError as exc:
        key = "cplus" if "drift" in str(exc) else ("s" if "order" in str(exc) else "lambda")
        raise ConfigurationError(f"{key}: {exc}") from None
    checks = [
        ("sign", values["sign"] in ("plus", "minus"), "must be plus or minus"),
        ("cw_gap_tol", values["cw_gap_tol"] > 0, "must be positive"),
        ("residual_tol", values["residual_tol"] > 0, "must be positive"),
        ("workers", values["workers"] >= 1, "must be at least 1"),
        ("n_samples", values["n_samples"] >= 2, "must be at least 2"),
        ("burn_in", 0 <= values["burn_in"] < 1, "must lie in [0, 1)"),
        ("rho_step", values["rho_step"] > 0, "must be positive"),
        ("rho_max", values["rho_max"] > values["rho_min"], "must exceed rho_min"),
        ("collar", values["collar"] > 0, "must be positive"),
    ]
    for key, ok, msg in checks:
        if not ok:
            raise ConfigurationError(f"{key}: {msg}")
    for key, build in (("domain", cfg.grid), ("family", lambda: parse_family(values["family"], k)),
                       ("method", cfg.solve_config)):
        try:
            build()
        except ConfigurationError as exc:
            raise ConfigurationError(f"{key}: {exc}") from None
    return cfg


# ---------------------------------------------------------------------------
# output helpers


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return str(v)


class _Writer:
    def __init__(self, prefix):
        self.prefix = Path(prefix)
        self.files = []

    def path(self, name):
        return self.prefix.parent / f"{self.prefix.name}_{name}"

    def _write(self, name, data):
        p = self.path(name)
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_bytes(data)
        self.files.append({
            "path": str(p),
            "bytes": len(data),
            "sha256": hashlib.sha256(data).hexdigest(),
        })

    def csv(self, name, header, rows):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
        self._write(name, buf.getvalue().encode("utf-8"))

    def json(self, name, obj):
        data = json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"
        self._write(name, data.encode("utf-8"))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if np.isfinite(v) else str(v)
    return obj


def _node_rows(grid, values):
    coords = grid.nodes
    return [tuple(coords[i]) + (values[i],) for i in range(grid.size)]


def _coord_header(grid):
    return ["x"] if grid.dim == 1 else [f"x{d}" for d in range(grid.dim)]


def _grid_function(source, grid, what):
    if source == "const1":
        return grid.function(np.ones(grid.size))
    if source == "bump":
        x = grid.nodes
        center = np.array([0.5 * (a + b) for a, b in grid.domain.bounds])
        half = grid.domain.widths / 2
        r2 = np.minimum(np.sum(((x - center) / half) ** 2, axis=1), 0.25 - 1e-3)
        vals = np.where(r2 < 0.25 - 1e-3, np.exp(1.0 - 1.0 / (1.0 - 4.0 * r2)), 0.0)
        return grid.function(vals)
    path = Path(source)
    if not path.exists():
        raise ConfigurationError(f"{what}: {source!r} is neither a preset nor an existing file")
    vals = np.zeros(grid.size)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"node_index", "value"} <= set(reader.fieldnames):
            raise ConfigurationError(f"{what}: CSV needs columns node_index,value")
        for row in reader:
            i = int(row["node_index"])
            if not 0 <= i < grid.size:
                raise ConfigurationError(f"{what}: node_index {i} outside 0..{grid.size - 1}")
            vals[i] = float(row["value"])
    return grid.function(vals)


# ---------------------------------------------------------------------------
# subcommands; each returns (summary dict, exit status)


def _cmd_beta(cfg, out):
    prof = profile(cfg.kernel(), cfg["n_samples"], cfg["quad_tol"], cfg["root_tol"])
    out.csv("beta.csv", ["beta", "c_plus", "c_minus"], prof.samples.tolist())
    summary = {"beta1": prof.beta1, "beta2": prof.beta2, "s": prof.s}
    out.json("beta.json", summary)
    return summary, 0


def _cmd_solve(cfg, out):
    grid, k = cfg.grid(), cfg.kernel()
    f = _grid_function(cfg["f"], grid, "f")
    rep = solve(f, cfg.family(), k, cfg.solve_config())
    out.csv("u.csv", _coord_header(grid) + ["value"], _node_rows(grid, rep.u.values))
    summary = {
        "iterations": rep.iterations,
        "converged": rep.converged,
        "diverged": rep.diverged,
        "residual": rep.residual,
        "method_used": rep.method_used,
        "residual_history": list(rep.residual_history),
    }
    out.json("solve.json", summary)
    return summary, 0 if rep.converged else ConvergenceError.exit_code


def _eigen(cfg, sign):
    ecfg = EigenConfig(sign, cfg["cw_gap_tol"], cfg["max_outer_iters"], cfg.solve_config(),
                       cfg["seed"])
    return inverse_power(cfg.family(), cfg.kernel(), ecfg, cfg.grid())


def _cmd_eigen(cfg, out):
    res = _eigen(cfg, cfg["sign"])
    grid = res.phi.grid
    out.csv("phi.csv", _coord_header(grid) + ["phi"], _node_rows(grid, res.phi.values))
    out.csv("trace.csv", ["iter", "cw_lo", "cw_hi"],
            [(i + 1, lo, hi) for i, (lo, hi) in enumerate(res.trace)])
    summary = {"lambda": res.lambda_, "cw_lo": res.cw_lo, "cw_hi": res.cw_hi,
               "iters": res.outer_iters, "converged": res.converged, "sign": cfg["sign"]}
    out.json("eigen.json", summary)
    return summary, 0 if res.converged else ConvergenceError.exit_code


def _cmd_parabolic(cfg, out):
    res = _eigen(cfg, "plus")
    if not res.converged:
        raise ConvergenceError("reference eigenpair did not converge")
    grid, fam, k = res.phi.grid, cfg.family(), cfg.kernel()
    h0 = res.phi if cfg["h0"] == "phi" else _grid_function(cfg["h0"], grid, "h0")
    run = decay_ratio_series(h0, (res.cw_lo, res.phi.values), fam, k, horizon=cfg["horizon"])
    slope = decay_rate_fit(run.times, run.sup_h, cfg["burn_in"] * run.horizon, run.tau)
    out.csv("series.csv", ["t", "sup_h", "ratio"], zip(run.times, run.sup_h, run.ratio))
    summary = {"slope": slope, "ratio_max": run.ratio_max, "r0": run.r0,
               "lambda1": res.lambda_, "tau": run.tau, "horizon": run.horizon,
               "ratio_bound_holds": run.ratio_bound_holds()}
    out.json("parabolic.json", summary)
    return summary, 0


def _cmd_abp(cfg, out):
    grid, k = cfg.grid(), cfg.kernel()
    rng = np.random.default_rng(cfg["seed"])
    sources = [random_smooth_source(rng) for _ in range(cfg["n_samples"])]
    scfg = SolveConfig(cfg["method"], cfg["residual_tol"], cfg["max_iters"])
    q = build_quadrature(grid, k)

    def ratio(src):
        return abp_ratio(grid.sample(src), k, scfg, q)

    if cfg["workers"] > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=cfg["workers"]) as pool:
            ratios = list(pool.map(ratio, sources))
    else:
        ratios = [ratio(src) for src in sources]
    out.csv("abp.csv", ["sample", "ratio"], enumerate(ratios))
    summary = {"max_ratio": max(ratios), "mean_ratio": float(np.mean(ratios)),
               "n_samples": len(ratios)}
    out.json("abp.json", summary)
    return summary, 0


def _cmd_barrier(cfg, out):
    rows = barrier_sign_check(cfg.kernel(), cfg["betas"], cfg["collar"],
                              n_cells=cfg["barrier_cells"], barrier_delta=cfg["barrier_delta"])
    header = ["sign", "beta", "root", "predicted", "n_nodes", "sign_fraction", "slope",
              "expected_slope", "status"]
    out.csv("barrier.csv", header, [[getattr(r, h) for h in header] for r in rows])
    summary = {"all_signs_ok": all(r.sign_ok for r in rows if r.status == "ok"),
               "max_slope_error": max((r.slope_error for r in rows if r.status == "ok"),
                                      default=None)}
    out.json("barrier.json", summary)
    return summary, 0


def _cmd_threshold(cfg, out):
    grid = cfg.grid()
    f = _grid_function(cfg["f"], grid, "f")
    rhos = np.arange(cfg["rho_min"], cfg["rho_max"] + 0.5 * cfg["rho_step"], cfg["rho_step"])
    scfg = SolveConfig(cfg["method"], cfg["residual_tol"], cfg["max_iters"])
    rep = max_principle_threshold(cfg.family(), cfg.kernel(), rhos, f, scfg)
    out.csv("threshold.csv", ["rho", "min_over_sup", "converged"], rep.rows)
    summary = {"breakdown_rho": rep.breakdown_rho, "last_good_rho": rep.last_good_rho,
               "reason": rep.reason}
    out.json("threshold.json", summary)
    return summary, 0


def _cmd_check(cfg, out):
    gates = run_gates()
    out.csv("check.csv", ["gate", "value", "tol", "passed"],
            [(g.name, g.value, g.tol, g.passed) for g in gates])
    summary = {"passed": all(g.passed for g in gates),
               "gates": [{"name": g.name, "value": g.value, "tol": g.tol} for g in gates]}
    out.json("check.json", summary)
    return summary, 0 if summary["passed"] else 3


COMMANDS = {
    "beta": _cmd_beta,
    "solve": _cmd_solve,
    "eigen": _cmd_eigen,
    "parabolic": _cmd_parabolic,
    "abp": _cmd_abp,
    "barrier": _cmd_barrier,
    "threshold": _cmd_threshold,
    "check": _cmd_check,
}


def _versions():
    import mpmath
    import scipy

    return {"nonlocal_eigs": __version__, "python": platform.python_version(),
            "numpy": np.__version__, "scipy": scipy.__version__, "mpmath": mpmath.__version__}


class _Parser(argparse.ArgumentParser):
    """Reports usage errors as configuration errors (exit code 1, not 2)."""

    def error(self, message):
        raise ConfigurationError(f"{self.prog}: {message}")


def build_parser():
    parser = _Parser(prog="nonlocal-eigs", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="flat key=value configuration file")
        p.add_argument("--out", default="run", help="output path prefix")
        for key, (_, default, text) in KEYS.items():
            p.add_argument(f"--{key}", dest=f"key_{key}", default=None, metavar="VALUE",
                           help=f"{text} (default {default})")
    return parser


def run(argv=None):
    """Parse ``argv``, execute the subcommand and return the exit status."""
    try:
        args = build_parser().parse_args(argv)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    started = time.perf_counter()
    try:
        text = Path(args.config).read_text() if args.config else ""
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 4
    flags = {k[4:]: v for k, v in vars(args).items() if k.startswith("key_")}
    try:
        cfg = parse_config(args.subcommand, text, flags, args.out)
        out = _Writer(cfg.out)
        summary, status = COMMANDS[cfg.subcommand](cfg, out)
        manifest = {
            "subcommand": cfg.subcommand,
            "config": cfg.echo(),
            "seed": cfg["seed"],
            "versions": _versions(),
            "wall_time_s": time.perf_counter() - started,
            "files": list(out.files),
            "summary": summary,
            "exit_status": status,
        }
        out.json("manifest.json", manifest)
    except NonlocalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    print(json.dumps(_jsonable({k: v for k, v in summary.items() if k != "residual_history"}),
                     sort_keys=True))
    return status


def main(argv=None):
    sys.exit(run(argv))

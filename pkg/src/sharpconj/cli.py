"""Command-line front end.

Exit codes: 0 success, 1 invalid input, 2 a requested constant diverges.

JSON output is one object::

    {"inputs": {...},
     "results": {name: {"value": float | "divergent", "abs_error": float | null}, ...}
                or {"table": {"columns": [...], "rows": [[...], ...]}},
     "meta": {"version": str, "seed": int, "rel_tol": float}}

Floats are written in shortest round-trip form, so identical invocations
produce identical bytes.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__, constants, oracle
from .conjugate import conjugate_pv, conjugate_spectral, read_grid_function
from .modulus import InvalidModulusError, parse, require_valid
from .quadrature import DEFAULT_REL_TOL

EXIT_OK, EXIT_INVALID, EXIT_DIVERGENT = 0, 1, 2

RESULT_SCHEMA = {
    "type": "object",
    "required": ["inputs", "results", "meta"],
    "additionalProperties": False,
    "properties": {
        "inputs": {"type": "object"},
        "results": {
            "type": "object",
            "oneOf": [
                {
                    "required": ["table"],
                    "properties": {
                        "table": {
                            "type": "object",
                            "required": ["columns", "rows"],
                            "properties": {
                                "columns": {"type": "array", "items": {"type": "string"}},
                                "rows": {"type": "array", "items": {"type": "array"}},
                            },
                        }
                    },
                },
                {
                    "not": {"required": ["table"]},
                    "additionalProperties": {
                        "type": "object",
                        "required": ["value", "abs_error"],
                        "properties": {
                            "value": {"anyOf": [{"type": "number"}, {"const": "divergent"}]},
                            "abs_error": {"type": ["number", "null"]},
                        },
                    },
                },
            ],
        },
        "meta": {
            "type": "object",
            "required": ["version", "seed", "rel_tol"],
            "properties": {
                "version": {"type": "string"},
                "seed": {"type": "integer"},
                "rel_tol": {"type": "number"},
            },
        },
    },
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    modulus_dsl: str = ""
    r: int = 1
    t: float = math.pi
    n: int = 256
    restarts: int = 16
    rel_tol: float = DEFAULT_REL_TOL
    output_format: str = "plain"
    seed: int = 42

    def __post_init__(self):
        if self.n < 8 or self.n & (self.n - 1):
            raise UsageError(f"--n must be a power of two >= 8, got {self.n}")
        if self.restarts < 0:
            raise UsageError("--restarts must be nonnegative")
        if not (0 < self.rel_tol < 1):
            raise UsageError("--rel-tol must lie in (0, 1)")
        if self.r < 0:
            raise UsageError("--r must be nonnegative")
        if not math.isfinite(self.t):
            raise UsageError("--t must be finite")


def _clean(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def _entry(res: constants.ConstantResult) -> dict:
    if res.divergent:
        return {"value": "divergent", "abs_error": None}
    return {"value": float(res.value), "abs_error": _clean(float(res.abs_error))}


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


class Output:
    """Collects named results or a table and renders them."""

    def __init__(self, cfg: RunConfig, inputs: dict):
        self.cfg = cfg
        self.inputs = inputs
        self.results: dict = {}
        self.columns: list = []
        self.rows: list = []

    def add(self, res: constants.ConstantResult, name=None):
        self.results[name or res.name] = _entry(res)

    def render(self) -> str:
        fmt = self.cfg.output_format
        if fmt == "json":
            if self.columns:
                results = {"table": {"columns": self.columns,
                                     "rows": [[_clean(v) for v in row] for row in self.rows]}}
            else:
                results = self.results
            doc = {
                "inputs": self.inputs,
                "results": results,
                "meta": {"version": __version__, "seed": self.cfg.seed, "rel_tol": self.cfg.rel_tol},
            }
            return json.dumps(doc, indent=2, allow_nan=False) + "\n"
        if fmt == "csv":
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            if self.columns:
                w.writerow(self.columns)
                w.writerows([[_fmt(v) for v in row] for row in self.rows])
            else:
                w.writerow(["name", "value", "abs_error"])
                for k, v in self.results.items():
                    w.writerow([k, _fmt(v["value"]), _fmt(v["abs_error"])])
            return buf.getvalue()
        lines = []
        if self.columns:
            lines.append("  ".join(self.columns))
            lines += ["  ".join(_fmt(v) for v in row) for row in self.rows]
        else:
            for k, v in self.results.items():
                err = v["abs_error"]
                lines.append(f"{k} = {_fmt(v['value'])}" + ("" if err is None else f"  (+- {_fmt(err)})"))
        return "\n".join(lines) + "\n"


def _load_modulus(dsl: str):
    m = parse(dsl)
    require_valid(m)
    return m


def _cmd_constants(cfg, args):
    m = _load_modulus(cfg.modulus_dsl)
    inputs = {"modulus": cfg.modulus_dsl, "r": cfg.r, "t": cfg.t}
    out = Output(cfg, inputs)
    results = [
        constants.m0_c(m, cfg.rel_tol),
        constants.omega0_diff(m, cfg.t, cfg.rel_tol),
        constants.e0_sup(m, cfg.rel_tol),
    ]
    if cfg.r >= 1:
        results.append(constants.m_r_l(m, cfg.r, cfg.rel_tol))
    else:
        print("note: the L-norm series is defined for r >= 1; m_r_l skipped", file=sys.stderr)
    if cfg.r >= 2:
        results.append(constants.variation_sup(m, cfg.r, cfg.rel_tol))
        if m.kind == "lipschitz":
            results.append(constants.wrk_l(m.K * m.factor, cfg.r))
    for res in results:
        out.add(res)
    return out, any(res.divergent for res in results)


def _cmd_rho(cfg, args):
    if not (0 < cfg.t < 2 * math.pi):
        raise UsageError("--t must lie in (0, 2*pi)")
    if args.samples < 1:
        raise UsageError("--samples must be positive")
    table = constants.rho_table(cfg.t, args.samples)
    out = Output(cfg, {"t": cfg.t, "samples": args.samples})
    out.columns = ["x", "rho", "residual"]
    out.rows = [[x, r, res] for (x, r), res in zip(table.nodes, table.residuals)]
    return out, False


def _cmd_series(cfg, args):
    m = _load_modulus(cfg.modulus_dsl)
    if cfg.r < 1:
        raise UsageError("the L-norm series is defined for r >= 1")
    if args.terms < 1:
        raise UsageError("--terms must be positive")
    terms, _ = constants.series_terms(m, cfg.r, args.terms)
    b, _ = constants.b_coefficients(m, args.terms)
    out = Output(cfg, {"modulus": cfg.modulus_dsl, "r": cfg.r, "terms": args.terms})
    out.columns = ["i", "k", "b_k", "term", "partial_sum"]
    partial = np.cumsum(terms)
    out.rows = [
        [i, 2 * i + 1, float(b[i]), float(terms[i]), float(partial[i])] for i in range(args.terms)
    ]
    return out, False


def _cmd_conjugate(cfg, args):
    try:
        f = read_grid_function(args.infile)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read grid function {args.infile}: {exc}") from exc
    out = Output(cfg, {"in": args.infile, "n": f.n})
    if args.x is not None:
        out.results["conjugate_pv"] = {"value": conjugate_pv(f, args.x, cfg.rel_tol), "abs_error": None}
        return out, False
    g = conjugate_spectral(f)
    if cfg.output_format == "plain":
        out.render = lambda: "".join(f"{v!r}\n" for v in g.values.tolist())
    else:
        out.columns = ["x", "value"]
        out.rows = [[float(x), float(v)] for x, v in zip(g.x, g.values)]
    return out, False


def _cmd_verify(cfg, args):
    m = _load_modulus(cfg.modulus_dsl)
    try:
        rep = oracle.verify_constant(m, args.which, cfg.n, cfg.restarts, cfg.seed, cfg.t, max(cfg.r, 1))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    inputs = {"modulus": cfg.modulus_dsl, "which": args.which, "n": cfg.n,
              "restarts": cfg.restarts, "t": cfg.t, "r": cfg.r}
    out = Output(cfg, inputs)
    divergent = not math.isfinite(rep.target_constant)
    out.results["target_constant"] = (
        {"value": "divergent", "abs_error": None} if divergent
        else {"value": rep.target_constant, "abs_error": None}
    )
    out.results["empirical_best"] = {"value": rep.empirical_best, "abs_error": None}
    if not divergent:
        out.results["gap_relative"] = {"value": rep.gap_relative, "abs_error": None}
    for n, v in rep.growth:
        out.results[f"growth_n{n}"] = {"value": v, "abs_error": None}
    out.results["max_violation"] = {"value": rep.max_violation, "abs_error": None}
    if cfg.output_format == "plain":
        out.results[f"method: {rep.method}"] = {"value": rep.n_grid, "abs_error": None}
    return out, divergent


def _parse_grid(grid: str):
    try:
        if ":" in grid:
            a, b, count = grid.split(":")
            return np.linspace(float(a), float(b), int(count)).tolist()
        return [float(s) for s in grid.split(",") if s.strip()]
    except ValueError as exc:
        raise UsageError(f"bad --t-grid {grid!r}; use START:STOP:COUNT or a comma list") from exc


def _cmd_sweep(cfg, args):
    m = _load_modulus(cfg.modulus_dsl)
    ts = _parse_grid(args.t_grid)
    if not ts or any(not (0 <= t <= math.pi) for t in ts):
        raise UsageError("sweep values of t must lie in [0, pi]")
    out = Output(cfg, {"modulus": cfg.modulus_dsl, "t_grid": args.t_grid})
    out.columns = ["t", "omega0_diff", "abs_error"]
    divergent = False
    for t in ts:
        res = constants.omega0_diff(m, t, cfg.rel_tol)
        divergent |= res.divergent
        out.rows.append([t, "divergent" if res.divergent else res.value,
                         None if res.divergent else res.abs_error])
    return out, divergent


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sharpconj", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    common = _Parser(add_help=False)
    common.add_argument("--format", dest="output_format", choices=("json", "csv", "plain"), default="plain")
    common.add_argument("--rel-tol", type=float, default=DEFAULT_REL_TOL)
    common.add_argument("--seed", type=int, default=42)
    sub = p.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    s = sub.add_parser("constants", parents=[common], help="all applicable constants for a modulus")
    s.add_argument("--modulus", required=True)
    s.add_argument("--r", type=int, default=1)
    s.add_argument("--t", type=float, default=math.pi)

    s = sub.add_parser("rho", parents=[common], help="tabulate rho(x) for a shift t")
    s.add_argument("--t", type=float, required=True)
    s.add_argument("--samples", type=int, default=25)

    s = sub.add_parser("series", parents=[common], help="partial sums of the L-norm series")
    s.add_argument("--modulus", required=True)
    s.add_argument("--r", type=int, required=True)
    s.add_argument("--terms", type=int, default=32)

    s = sub.add_parser("conjugate", parents=[common], help="conjugate a sampled function")
    s.add_argument("--in", dest="infile", required=True)
    s.add_argument("--x", type=float, default=None)

    s = sub.add_parser("verify", parents=[common], help="discretized brute-force check")
    s.add_argument("--modulus", required=True)
    s.add_argument("--which", choices=oracle.WHICH, required=True)
    s.add_argument("--n", type=int, default=256)
    s.add_argument("--restarts", type=int, default=16)
    s.add_argument("--t", type=float, default=math.pi)
    s.add_argument("--r", type=int, default=1)

    s = sub.add_parser("sweep", parents=[common], help="shift-difference constant over a grid of t")
    s.add_argument("--modulus", required=True)
    s.add_argument("--t-grid", required=True)
    return p


_COMMANDS = {
    "constants": _cmd_constants,
    "rho": _cmd_rho,
    "series": _cmd_series,
    "conjugate": _cmd_conjugate,
    "verify": _cmd_verify,
    "sweep": _cmd_sweep,
}


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        cfg = RunConfig(
            subcommand=args.subcommand,
            modulus_dsl=getattr(args, "modulus", ""),
            r=getattr(args, "r", 1),
            t=getattr(args, "t", math.pi),
            n=getattr(args, "n", 256),
            restarts=getattr(args, "restarts", 16),
            rel_tol=args.rel_tol,
            output_format=args.output_format,
            seed=args.seed,
        )
        out, divergent = _COMMANDS[cfg.subcommand](cfg, args)
    except (UsageError, InvalidModulusError, constants.UnsupportedCaseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    stdout.write(out.render())
    if divergent:
        print("divergent: the Dini integral of the modulus is infinite", file=sys.stderr)
        return EXIT_DIVERGENT
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()

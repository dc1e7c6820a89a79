"""Command-line interface: config parsing, orchestration, bit-stable export.

Subcommands: solve | bracket | second | verify | export.  Configuration is a
single TOML file with fail-loud parsing (unknown keys are errors), outputs are
CSV summaries and line-delimited JSON snapshots with 17-significant-digit
floats, so identical config + seed reproduces byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field as dc_field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from .errors import ConfigError, FracmixedError
from .geometry import DomainSpec, build_discretization
from .operator import ProblemParams, assemble_form
from .nonlinear import (
    Diverged,
    estimate_Lambda,
    find_minimal,
    lambda_star,
    mountain_pass_second,
    solve_concave,
)
from .verify import run_suite

__all__ = ["RunConfig", "load_config", "default_config", "main"]

THREAD_ENV = "FRACMIXED_THREADS"

CSV_HEADER = "lambda,energy,sup_norm,mu1,residual,iterations,kind"

_SCHEMA = {
    "seed": int,
    "domain": {
        "dimension": int,
        "omega": list,
        "sigma": list,
        "radius": (int, float),
        "resolution": int,
        "exterior_resolution": (int, float),
    },
    "params": {"s": (int, float), "q": (int, float), "p": (int, float)},
    "solver": {
        "tol": (int, float),
        "tol_second": (int, float),
        "max_iter": int,
        "bracket_tol": (int, float),
        "path_states": int,
    },
    "lambda": {
        "mode": str,
        "values": list,
        "fractions": list,
        "count": int,
    },
    "output": {"directory": str, "formats": list},
}


def default_config() -> dict:
    """The desk-scale default: 1D mixed problem, q=1/2, p=3."""
    return {
        "seed": 0,
        "domain": {
            "dimension": 1,
            "omega": [0.0, 1.0],
            "sigma": ["dirichlet", "neumann"],
            "radius": 20.0,
            "resolution": 200,
            "exterior_resolution": 1.0,
        },
        "params": {"s": 0.5, "q": 0.5, "p": 3.0},
        "solver": {
            "tol": 1.0e-10,
            "tol_second": 1.0e-8,
            "max_iter": 1000,
            "bracket_tol": 1.0e-2,
            "path_states": 21,
        },
        "lambda": {"mode": "branch", "fractions": [], "values": [], "count": 8},
        "output": {"directory": "out", "formats": ["csv", "jsonl"]},
    }


@dataclass
class RunConfig:
    """Validated run configuration; see default_config for the shape."""

    seed: int
    domain: dict
    params: dict
    solver: dict
    lam: dict
    output: dict
    raw: dict = dc_field(repr=False, default_factory=dict)

    def domain_spec(self) -> DomainSpec:
        d = self.domain
        return DomainSpec(
            dimension=d["dimension"],
            omega=tuple(tuple(map(float, pair)) for pair in [d["omega"]])
            if d["dimension"] == 1
            else tuple(tuple(map(float, pair)) for pair in d["omega"]),
            sigma_partition=tuple(d["sigma"]) if d["dimension"] == 1 else d["sigma"],
            truncation_radius=float(d["radius"]),
            resolution=int(d["resolution"]),
            exterior_resolution=float(d["exterior_resolution"]),
        )

    def problem_params(self, lam: float = 0.0) -> ProblemParams:
        p = self.params
        return ProblemParams(s=float(p["s"]), q=float(p["q"]), p=float(p["p"]), lam=lam)


def _check_keys(data: dict, schema: dict, path: str = ""):
    for key, val in data.items():
        where = f"{path}.{key}" if path else key
        if key not in schema:
            raise ConfigError(f"unknown configuration key: {where}")
        expected = schema[key]
        if isinstance(expected, dict):
            if not isinstance(val, dict):
                raise ConfigError(f"{where} must be a table")
            _check_keys(val, expected, where)
        elif not isinstance(val, expected):
            raise ConfigError(f"{where} has invalid type {type(val).__name__}")


def _merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def load_config(path: str | None) -> RunConfig:
    """Parse and validate a TOML config, overlaying the defaults."""
    data = {}
    if path is not None:
        try:
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}")
        except tomllib.TOMLDecodeError as ex:
            raise ConfigError(f"config parse error: {ex}")
    _check_keys(data, _SCHEMA)
    cfg = _merge(default_config(), data)
    for section in ("solver",):
        for key, val in cfg[section].items():
            if isinstance(val, (int, float)) and key.startswith(("tol", "bracket")) and val <= 0:
                raise ConfigError(f"{section}.{key} must be positive")
    lam = cfg["lambda"]
    if lam["mode"] not in ("single", "branch", "bracket"):
        raise ConfigError(f"lambda.mode must be single|branch|bracket, got {lam['mode']!r}")
    for seq_name in ("values", "fractions"):
        seq = lam.get(seq_name, [])
        if any(b <= a for a, b in zip(seq, seq[1:])):
            raise ConfigError(f"lambda.{seq_name} must be strictly increasing")
    return RunConfig(
        seed=int(cfg["seed"]),
        domain=cfg["domain"],
        params=cfg["params"],
        solver=cfg["solver"],
        lam=cfg["lambda"],
        output=cfg["output"],
        raw=cfg,
    )


def _fmt(x) -> str:
    if x is None:
        return "nan"
    return format(float(x), ".17g")


def _write_summary(path: Path, records):
    lines = [CSV_HEADER]
    for r in records:
        lines.append(
            ",".join(
                [
                    _fmt(r.lam),
                    _fmt(r.energy),
                    _fmt(r.sup_norm),
                    _fmt(r.mu1),
                    _fmt(r.residual),
                    str(r.iterations),
                    r.kind,
                ]
            )
        )
    path.write_text("\n".join(lines) + "\n")


def _write_snapshots(path: Path, records):
    with open(path, "w") as fh:
        for r in records:
            obj = {
                "lambda": float(r.lam),
                "kind": r.kind,
                "sup_norm": float(r.sup_norm),
                "interior": [float(v) for v in r.field.interior],
                "neumann": [float(v) for v in r.field.neumann],
            }
            fh.write(json.dumps(obj) + "\n")


def _resolve_lambdas(cfg: RunConfig, form, params):
    """Absolute lambda grid from the config, bracketing first if needed."""
    lam_cfg = cfg.lam
    if lam_cfg.get("values"):
        return [float(v) for v in lam_cfg["values"]], None
    if lam_cfg["mode"] == "single":
        raise ConfigError("lambda.mode = 'single' requires explicit lambda.values")
    if not lam_cfg.get("fractions") and int(lam_cfg.get("count", 0)) <= 0:
        raise ConfigError("empty lambda grid: set lambda.values, .fractions, or .count")
    bracket = estimate_Lambda(form, params, bracket_tol=cfg.solver["bracket_tol"])
    fracs = lam_cfg.get("fractions") or list(
        np.geomspace(1.0e-3, 0.9, int(lam_cfg.get("count", 8)))
    )
    return [f * bracket.lo for f in fracs], bracket


def _prepare(cfg: RunConfig):
    disc = build_discretization(cfg.domain_spec(), s=float(cfg.params["s"]))
    form = assemble_form(disc)
    return disc, form, cfg.problem_params()


def cmd_solve(cfg: RunConfig, outdir: Path, quiet: bool) -> int:
    disc, form, params = _prepare(cfg)
    lams, _ = _resolve_lambdas(cfg, form, params)
    if not lams:
        raise ConfigError("empty lambda grid")
    records = []
    for lam in lams:
        rec = find_minimal(form, params.with_lam(lam), tol=cfg.solver["tol"])
        if isinstance(rec, Diverged):
            print(f"lambda={lam}: diverged ({rec.reason})", file=sys.stderr)
            return 1
        records.append(rec)
        if not quiet:
            print(
                f"lambda={lam:.6g} J={rec.energy:.6g} sup={rec.sup_norm:.6g} "
                f"mu1={rec.mu1:.6g} residual={rec.residual:.2e}"
            )
    records.sort(key=lambda r: r.lam)
    if "csv" in cfg.output["formats"]:
        _write_summary(outdir / "branch.csv", records)
    if "jsonl" in cfg.output["formats"]:
        _write_snapshots(outdir / "solutions.jsonl", records)
    return 0


def cmd_bracket(cfg: RunConfig, outdir: Path, quiet: bool) -> int:
    disc, form, params = _prepare(cfg)
    bracket = estimate_Lambda(form, params, bracket_tol=cfg.solver["bracket_tol"])
    z1 = solve_concave(form, params.with_lam(1.0)).field.interior
    lam_star = lambda_star(form, z1, float(cfg.params["p"]))
    payload = {
        "lambda_lo": _fmt(bracket.lo),
        "lambda_hi": _fmt(bracket.hi),
        "rayleigh_lambda_star": _fmt(lam_star),
        "upper_bound": _fmt(bracket.bound),
        "seed": cfg.seed,
        "probes": [{"lambda": _fmt(l), "success": ok} for l, ok in bracket.probes],
    }
    (outdir / "bracket.json").write_text(json.dumps(payload, indent=2) + "\n")
    if not quiet:
        print(
            f"Lambda in [{bracket.lo:.6g}, {bracket.hi:.6g}] "
            f"(bound {bracket.bound:.6g}, {len(bracket.probes)} probes)"
        )
    return 0


def cmd_second(cfg: RunConfig, outdir: Path, quiet: bool) -> int:
    disc, form, params = _prepare(cfg)
    lams, bracket = _resolve_lambdas(cfg, form, params)
    if not lams:
        raise ConfigError("empty lambda grid")
    if bracket is None:
        bracket = estimate_Lambda(form, params, bracket_tol=cfg.solver["bracket_tol"])
    records = []
    for lam in lams:
        if lam >= bracket.lo:
            print(f"lambda={lam} is not below the bracket; skipping", file=sys.stderr)
            return 1
        u_min = find_minimal(form, params.with_lam(lam), tol=cfg.solver["tol"])
        if isinstance(u_min, Diverged):
            print(f"lambda={lam}: minimal diverged", file=sys.stderr)
            return 1
        lam_bar = 0.98 * bracket.lo if lam < 0.9 * bracket.lo else 0.5 * (lam + bracket.lo)
        u_bar = find_minimal(form, params.with_lam(lam_bar), tol=cfg.solver["tol"])
        if isinstance(u_bar, Diverged):
            print(f"lambda_bar={lam_bar}: supersolution diverged", file=sys.stderr)
            return 1
        second = mountain_pass_second(
            form,
            params.with_lam(lam),
            u_min,
            u_bar.field.interior,
            tol=cfg.solver["tol_second"],
            path_states=cfg.solver["path_states"],
            seed=cfg.seed,
        )
        sep = float(np.abs(second.field.interior - u_min.field.interior).max())
        records.extend([u_min, second])
        if not quiet:
            print(
                f"lambda={lam:.6g}: separation={sep:.4g} "
                f"J_min={u_min.energy:.6g} J_second={second.energy:.6g}"
            )
    if "csv" in cfg.output["formats"]:
        _write_summary(outdir / "second.csv", records)
    if "jsonl" in cfg.output["formats"]:
        _write_snapshots(outdir / "second_solutions.jsonl", records)
    return 0


def cmd_verify(cfg: RunConfig, outdir: Path, quiet: bool) -> int:
    disc, form, params = _prepare(cfg)
    results, summary = run_suite(form, params, seed=cfg.seed)
    payload = {
        "summary": summary,
        "checks": [
            {"name": r.name, "status": r.status, "slack": _fmt(r.slack), "reason": r.reason}
            for r in results
        ],
    }
    (outdir / "verify.json").write_text(json.dumps(payload, indent=2) + "\n")
    if not quiet:
        print(
            f"{summary['passed']} passed, {summary['failed']} failed, "
            f"{summary['skipped']} skipped (seed {summary['seed']})"
        )
    return 0 if summary["failed"] == 0 else 1


def cmd_export(cfg: RunConfig, outdir: Path, quiet: bool) -> int:
    """Dump the discretization (nodes, weights, exterior masses) for plotting."""
    disc, form, params = _prepare(cfg)
    lines = ["node,weight,kappa1,tail_sigma2"]
    for i in range(disc.n_interior):
        coords = ";".join(_fmt(c) for c in disc.interior_nodes[i])
        lines.append(
            f"{coords},{_fmt(disc.interior_weights[i])},"
            f"{_fmt(disc.kappa1[i])},{_fmt(disc.tail_sigma2[i])}"
        )
    (outdir / "mesh.csv").write_text("\n".join(lines) + "\n")
    nlines = ["node,weight"]
    for i in range(disc.n_neumann):
        coords = ";".join(_fmt(c) for c in disc.neumann_nodes[i])
        nlines.append(f"{coords},{_fmt(disc.neumann_weights[i])}")
    (outdir / "neumann_mesh.csv").write_text("\n".join(nlines) + "\n")
    if not quiet:
        print(f"wrote mesh.csv ({disc.n_interior} cells) and neumann_mesh.csv "
              f"({disc.n_neumann} cells)")
    return 0


_COMMANDS = {
    "solve": cmd_solve,
    "bracket": cmd_bracket,
    "second": cmd_second,
    "verify": cmd_verify,
    "export": cmd_export,
}


def _apply_thread_cap():
    cap = os.environ.get(THREAD_ENV)
    if not cap:
        return
    try:
        n = max(1, int(cap))
    except ValueError:
        raise ConfigError(f"{THREAD_ENV} must be an integer, got {cap!r}")
    try:
        from threadpoolctl import threadpool_limits

        threadpool_limits(limits=n)
    except ImportError:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(n)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fracmixed",
        description="Nonlocal concave-convex solver: minimal branches, "
        "extremal threshold bracketing, mountain-pass second solutions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", default=None, help="TOML configuration file")
        sp.add_argument("--out", default=None, help="output directory")
        sp.add_argument("--seed", type=int, default=None, help="override config seed")
        sp.add_argument("--quiet", action="store_true")
    args = parser.parse_args(argv)

    try:
        _apply_thread_cap()
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        outdir = Path(args.out) if args.out else Path(cfg.output["directory"])
        outdir.mkdir(parents=True, exist_ok=True)
        return _COMMANDS[args.command](cfg, outdir, args.quiet)
    except ConfigError as ex:
        print(f"configuration error: {ex}", file=sys.stderr)
        return 2
    except FracmixedError as ex:
        print(f"numerical failure: {ex}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

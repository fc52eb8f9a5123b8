"""Command line driver.

    bidflow validate --config run.json
    bidflow solve    --config run.json --out out/
    bidflow dynamics --config run.json --out out/
    bidflow check    --config run.json
    bidflow sweep    --config run.json

Exit codes: 0 success, 1 configuration error, 2 validity flags or checks
failed, 3 solver could not decide.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema

from .diagnostics import (DEFAULT_SEED, SOLVER_FLAGS, feasibility_search, run_checks)
from .equilibrium import (SolverConfig, best_reply_iteration, extremal_equilibria,
                          flow_dynamics)
from .model import MarketParams, StrategyProfile, validate_params

log = logging.getLogger(__name__)

EXIT_OK, EXIT_CONFIG, EXIT_FLAGS, EXIT_UNDETERMINED = 0, 1, 2, 3

FLOW_HEADER = ("t", "player", "cost_node", "bid")
BRITER_HEADER = ("iter", "player", "cost_node", "bid")


class ConfigError(Exception):
    pass


def load_schema(name: str) -> dict:
    return json.loads(resources.files("bidflow.schemas").joinpath(name).read_text())


@dataclass
class RunConfig:
    instance: dict | None
    solver: SolverConfig
    samples: int = 1000
    seed: int = DEFAULT_SEED
    max_iter: int = 200
    br_tol: float = 1e-8
    sweep: dict = field(default_factory=dict)
    out: Path = Path("out")

    def params(self) -> MarketParams:
        if self.instance is None:
            raise ConfigError("config has no 'instance' block")
        try:
            return MarketParams.from_dict(self.instance)
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError(f"instance: {exc}") from exc


def read_config(path: str | Path, overrides: argparse.Namespace | None = None) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    try:
        jsonschema.validate(doc, load_schema("config.schema.json"))
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{path}: at {where}: {exc.message}") from exc

    inst = doc.get("instance")
    solver = dict(doc.get("solver", {}))
    diag = doc.get("diagnostics", {})
    dyn = doc.get("dynamics", {})
    out = doc.get("out", "out")
    seed = diag.get("seed", DEFAULT_SEED)
    if overrides is not None:
        if overrides.grid is not None:
            inst = {**(inst or {}), "grid": overrides.grid}
        if overrides.tol is not None:
            solver["tol"] = overrides.tol
        if overrides.step is not None:
            solver["step"] = overrides.step
        if overrides.seed is not None:
            seed = overrides.seed
        if overrides.out is not None:
            out = overrides.out
    try:
        cfg = SolverConfig(**solver)
    except ValueError as exc:
        raise ConfigError(f"solver: {exc}") from exc
    return RunConfig(inst, cfg, diag.get("samples", 1000), seed, dyn.get("max_iter", 200),
                     dyn.get("br_tol", 1e-8), doc.get("sweep", {}), Path(out))


# --------------------------------------------------------------------------
# output helpers


def _clean(obj):
    """Replace non-finite floats by None so the JSON stays standard."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _dump(obj, path: Path | None = None) -> str:
    text = json.dumps(_clean(obj), indent=2, sort_keys=False) + "\n"
    if path is not None:
        path.write_text(text)
    return text


def _flag_entries(report) -> list[dict]:
    return [{"name": f"flag:{k}", "pass": v, "margin": report.margins[k], "witness": None,
             "tolerance": 0.0, "samples": 1, "note": "instance validity flag"}
            for k, v in report.flags.items()]


def write_profiles_csv(path: Path, header, rows_by_step):
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for step, profile in rows_by_step:
            for i, (g, b) in enumerate(zip(profile.grids, profile.bids)):
                for c, bid in zip(g.nodes, b):
                    w.writerow((repr(float(step)) if isinstance(step, float) else step,
                                i, repr(float(c)), repr(float(bid))))


PLOT_TEMPLATE = """\
# Best-reply iteration versus gradient flow.
# Usage: gnuplot plot.gp   (reads the CSV files next to this script)
set datafile separator ","
set key outside right
set xlabel "cost"
set ylabel "bid"

set terminal pngcairo size 900,600
set output "briter.png"
set title "Best-reply iteration from sigma(c) = c, player 0"
plot for [k=0:{last_iter}] "briter.csv" using ($1 == k && $2 == 0 ? $3 : 1/0):4 \\
    every ::1 with lines title sprintf("iter %d", k)

set output "flow.png"
set title "Gradient flow from below and from above, player 0"
plot "flow.csv" using ($2 == 0 ? $3 : 1/0):4 every ::1 with dots lc rgb "blue" title "from below", \\
     "flow_upper.csv" using ($2 == 0 ? $3 : 1/0):4 every ::1 with dots lc rgb "red" title "from above"

unset output
"""


# --------------------------------------------------------------------------
# subcommands


def cmd_validate(cfg: RunConfig) -> int:
    params = cfg.params()
    report = validate_params(params)
    sys.stdout.write(_dump({"instance": params.to_dict(), **report.to_dict()}))
    return EXIT_OK if report.ok else EXIT_FLAGS


def cmd_solve(cfg: RunConfig) -> int:
    params = cfg.params()
    cfg.out.mkdir(parents=True, exist_ok=True)
    validity = validate_params(params)
    result = extremal_equilibria(params, cfg.solver)
    checks = run_checks(params, result, cfg.samples, cfg.seed, cfg.solver)
    unique_conditions = ("scaling_invariance", "type_monotonicity",
                         "best_reply_continuity", "alpha_bound")
    eq = {
        "instance": params.to_dict(),
        "verdict": result.verdict,
        "sup_distance": result.sup_distance,
        "uniqueness_conditions": {n: checks[n].passed for n in unique_conditions},
        "lower_strictly_interior": result.lower_interior,
        "upper_init": result.upper_init,
        "failed_flags": result.failed_flags,
        "players": [
            {"player": i,
             "lower": result.lower.to_pairs()[i],
             "upper": result.upper.to_pairs()[i],
             "residual_lower": result.residual_lower[i],
             "residual_upper": result.residual_upper[i]}
            for i in range(params.n_players)
        ],
        "lower_status": result.lower_status,
        "upper_status": result.upper_status,
    }
    _dump(eq, cfg.out / "equilibrium.json")
    _dump(_flag_entries(validity) + checks.to_list(), cfg.out / "report.json")
    log.info("verdict %s (sup distance %.3e)", result.verdict, result.sup_distance)
    return EXIT_UNDETERMINED if result.verdict == "undetermined" else EXIT_OK


def cmd_dynamics(cfg: RunConfig) -> int:
    params = cfg.params()
    cfg.out.mkdir(parents=True, exist_ok=True)
    low = flow_dynamics(StrategyProfile.truthful(params), params, cfg=cfg.solver)
    high = flow_dynamics(StrategyProfile.top(params), params, cfg=cfg.solver)
    it = best_reply_iteration(StrategyProfile.truthful(params), params, cfg.max_iter,
                              cfg.br_tol, cfg.solver)
    write_profiles_csv(cfg.out / "flow.csv", FLOW_HEADER, zip(low.times, low.profiles))
    write_profiles_csv(cfg.out / "flow_upper.csv", FLOW_HEADER, zip(high.times, high.profiles))
    write_profiles_csv(cfg.out / "briter.csv", BRITER_HEADER, enumerate(it.profiles))
    (cfg.out / "plot.gp").write_text(PLOT_TEMPLATE.format(last_iter=it.n_iter))
    _dump({"flow_lower": low.status, "flow_upper": high.status,
           "best_reply_iteration": it.status, "period": it.period,
           "iterations": it.n_iter}, cfg.out / "dynamics.json")
    ok = low.converged and high.converged
    return EXIT_OK if ok else EXIT_UNDETERMINED


def cmd_check(cfg: RunConfig) -> int:
    params = cfg.params()
    cfg.out.mkdir(parents=True, exist_ok=True)
    checks = run_checks(params, None, cfg.samples, cfg.seed, cfg.solver)
    entries = checks.to_list()
    _dump(entries, cfg.out / "report.json")
    sys.stdout.write(_dump(entries))
    return EXIT_OK if checks.passed else EXIT_FLAGS


def cmd_sweep(cfg: RunConfig) -> int:
    opts = cfg.sweep
    cands = feasibility_search(opts.get("ranges"), opts.get("budget", 4096),
                               opts.get("require", SOLVER_FLAGS), cfg.seed,
                               opts.get("max_type_spread"))
    keep = cands[: opts.get("keep", 20)]
    cfg.out.mkdir(parents=True, exist_ok=True)
    _dump({"found": len(cands),
           "candidates": [{"values": c.values, "flags": c.flags, "margin": c.margin}
                          for c in keep]}, cfg.out / "sweep.json")
    sys.stdout.write(f"{len(cands)} instances satisfy the requested flags\n")
    return EXIT_OK if cands else EXIT_FLAGS


COMMANDS = {"validate": cmd_validate, "solve": cmd_solve, "dynamics": cmd_dynamics,
            "check": cmd_check, "sweep": cmd_sweep}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bidflow", description=__doc__.split("\n\n")[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--out", default=None, help="output directory (default ./out)")
    p.add_argument("--grid", type=int, default=None, help="type grid nodes per player")
    p.add_argument("--tol", type=float, default=None, help="flow drift tolerance")
    p.add_argument("--step", type=float, default=None, help="Euler step")
    p.add_argument("--seed", type=int, default=None, help="diagnostics sampling seed")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = read_config(args.config, args)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

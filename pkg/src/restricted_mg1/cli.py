"""Command-line entry point.

Usage: ``restricted-mg1 <subcommand> [--config FILE] [flags]``. Flags override
config-file values. Every run writes its files under the ``output`` prefix
only after all results are computed, so a failing run leaves nothing behind.

Exit codes: 0 success, 2 usage or configuration error, 3 numerical failure.
Errors are reported as one JSON line on standard error.

Config file schema (all keys optional, unknown keys rejected)::

    {
      "model": 1,                       # 1 truncated service, 2 bounded waiting
      "lambda": 1.0,                    # arrival rate
      "distribution": {"kind": "exponential", "rate": 2.0},
      "seed": 0,                        # 64-bit master seed
      "replicas": 100000,
      "grid": {"h": 0.001953125, "tol": 1e-10, "i_max": 200, "bins": 64, "x_max": null},
      "output": "out"                   # file prefix
    }

Distribution kinds: point_mass {value}, exponential {rate}, uniform {low, high},
mixture {weights, atoms}, empirical {samples} or {path}.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import bounds, coupling, dist, experiments, invariant, sim
from .errors import NumericalError

GRID_KEYS = {"h", "tol", "i_max", "bins", "x_max"}
CONFIG_KEYS = {"model", "lambda", "distribution", "seed", "replicas", "grid", "output"}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    model: int = 1
    lam: float = 1.0
    distribution: dict | None = None
    seed: int = 0
    replicas: int = 100_000
    grid: dict = field(default_factory=lambda: {"h": 1.0 / 512, "tol": 1e-10, "i_max": 200, "bins": 64,
                                                "x_max": None})
    output: str = "out"

    def to_json(self) -> dict:
        out = asdict(self)
        out["lambda"] = out.pop("lam")
        return out

    def validate(self):
        if self.model not in (1, 2):
            raise UsageError("model must be 1 or 2")
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise UsageError("lambda must be positive")
        if not 0 <= self.seed < 2 ** 64:
            raise UsageError("seed must be a 64-bit unsigned integer")
        if self.replicas < 1:
            raise UsageError("replicas must be positive")
        g = self.grid
        for key in ("h", "tol"):
            if not g[key] > 0:
                raise UsageError(f"grid.{key} must be positive")
        if int(g["i_max"]) < 1 or int(g["bins"]) < 1:
            raise UsageError("grid.i_max and grid.bins must be positive")
        if g["x_max"] is not None and not g["x_max"] > 0:
            raise UsageError("grid.x_max must be positive")

    def series(self) -> invariant.SeriesConfig:
        return invariant.SeriesConfig(self.grid["h"], self.grid["tol"], int(self.grid["i_max"]))


def load_config(path) -> tuple[RunConfig, Path | None]:
    cfg = RunConfig()
    if path is None:
        return cfg, None
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed config JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise UsageError("config must be a JSON object")
    unknown = set(raw) - CONFIG_KEYS
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    if "grid" in raw:
        if not isinstance(raw["grid"], dict) or set(raw["grid"]) - GRID_KEYS:
            raise UsageError(f"grid must be an object with keys among {sorted(GRID_KEYS)}")
        cfg.grid.update(raw["grid"])
    for key, attr in (("model", "model"), ("lambda", "lam"), ("distribution", "distribution"),
                      ("seed", "seed"), ("replicas", "replicas"), ("output", "output")):
        if key in raw:
            setattr(cfg, attr, raw[key])
    return cfg, Path(path).resolve().parent


def _floats(text):
    try:
        return [float(v) for v in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a list of numbers, got {text!r}") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--model", type=int)
    common.add_argument("--lambda", dest="lam", type=float)
    common.add_argument("--dist", help="distribution as JSON")
    common.add_argument("--seed", type=int)
    common.add_argument("--n", dest="replicas", type=int, help="replicas")
    common.add_argument("--output", help="output path prefix")
    common.add_argument("--h", type=float)
    common.add_argument("--tol", type=float)
    common.add_argument("--i-max", dest="i_max", type=int)
    common.add_argument("--bins", type=int)
    common.add_argument("--x-max", dest="x_max", type=float)

    p = _Parser(prog="restricted-mg1", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("invariant", parents=[common], help="invariant law by quadrature")

    s = sub.add_parser("simulate", parents=[common], help="trajectory and regenerative estimate")
    s.add_argument("--x", type=float, help="initial workload")
    s.add_argument("--t", type=_floats, help="horizon")
    s.add_argument("--replica", type=int, default=0)
    s.add_argument("--cycles", type=int, help="regeneration cycles for the invariant estimate")

    c = sub.add_parser("coupling", parents=[common], help="coupling-time tail estimates")
    c.add_argument("--x", type=float)
    c.add_argument("--y", type=float)
    c.add_argument("--t", type=_floats)

    t = sub.add_parser("tv", parents=[common], help="TV to the invariant law, or between two starts")
    t.add_argument("--x", type=float)
    t.add_argument("--y", type=float)
    t.add_argument("--t", type=_floats)
    t.add_argument("--window", type=_floats, help="rate-fit window 'lo,hi'")

    b = sub.add_parser("bounds", parents=[common], help="closed-form bounds")
    b.add_argument("--t", type=_floats)
    b.add_argument("--p", type=float)
    b.add_argument("--beta", type=float)
    b.add_argument("--b", type=float)
    b.add_argument("--eps", type=_floats)

    for name in ("demo-thm3", "demo-collapse"):
        dmo = sub.add_parser(name, parents=[common], help="mixing collapse under small point-mass service")
        dmo.add_argument("--eps", type=_floats)
        dmo.add_argument("--t", type=_floats)
        dmo.add_argument("--x", type=float, default=0.85)
        dmo.add_argument("--y", type=float, default=0.15)
    return p


def resolve(args) -> tuple[RunConfig, Path | None]:
    cfg, base = load_config(args.config)
    for attr in ("model", "lam", "seed", "replicas", "output"):
        v = getattr(args, attr)
        if v is not None:
            setattr(cfg, attr, v)
    if args.dist is not None:
        try:
            cfg.distribution = json.loads(args.dist)
        except json.JSONDecodeError as exc:
            raise UsageError(f"malformed --dist JSON: {exc}") from None
    for key in GRID_KEYS:
        v = getattr(args, key)
        if v is not None:
            cfg.grid[key] = v
    cfg.validate()
    return cfg, base


def _distribution(cfg, base):
    if cfg.distribution is None:
        raise UsageError("a distribution is required (config 'distribution' or --dist)")
    try:
        return dist.from_json(cfg.distribution, base)
    except (ValueError, OSError) as exc:
        raise UsageError(str(exc)) from None


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=True) + "\n"


def _config_line(cfg) -> str:
    return "# config=" + json.dumps(cfg.to_json(), sort_keys=True, separators=(",", ":")) + "\n"


def _require(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise UsageError(f"{args.command} needs " + ", ".join("--" + m for m in missing))


def _invariant_for(cfg, d):
    if cfg.model == 1:
        return invariant.model1_invariant(d, cfg.lam, cfg.series())
    return invariant.model2_invariant(d, cfg.lam, cfg.series(), cfg.grid["x_max"])


def cmd_invariant(args, cfg, base):
    d = _distribution(cfg, base)
    inv = _invariant_for(cfg, d)
    side = {"atom0": inv.atom0, "total_mass": inv.total_mass(), "order": inv.order,
            "remainder_bound": inv.remainder, "x_max": inv.x_max, "config": cfg.to_json()}
    return {f"{cfg.output}_invariant.csv": _config_line(cfg) + inv.to_csv(),
            f"{cfg.output}_invariant.json": _dumps(side)}


def cmd_simulate(args, cfg, base):
    _require(args, "x", "t")
    d = _distribution(cfg, base)
    if len(args.t) != 1:
        raise UsageError("simulate takes a single horizon --t")
    traj = sim.simulate_trajectory(cfg.model, args.x, args.t[0], cfg.lam, d, sim.EventStream(cfg.seed, args.replica))
    files = {f"{cfg.output}_trajectory.csv": _config_line(cfg) + traj.to_csv()}
    side = {"x": args.x, "horizon": args.t[0], "replica": args.replica, "epochs": len(traj.epochs),
            "final_post": traj.epochs[-1].post if traj.epochs else None, "config": cfg.to_json()}
    if args.cycles is not None:
        est = sim.regenerative_invariant_estimate(cfg.model, cfg.lam, d, args.cycles, seed=cfg.seed,
                                                  n_bins=int(cfg.grid["bins"]), x_max=cfg.grid["x_max"])
        files[f"{cfg.output}_regenerative.csv"] = _config_line(cfg) + est.to_csv()
        side["regenerative"] = {"cycles": args.cycles, "atom0": est.atom0, "tail": est.tail,
                                "total_mass": est.total_mass()}
    files[f"{cfg.output}_simulate.json"] = _dumps(side)
    return files


def cmd_coupling(args, cfg, base):
    _require(args, "x", "y", "t")
    d = _distribution(cfg, base)
    est = coupling.coupling_tail(cfg.model, args.x, args.y, cfg.lam, d, args.t, cfg.replicas, cfg.seed)
    side = {"x": args.x, "y": args.y,
            "estimates": [{"t": e.t, "p_hat": e.p_hat, "ci": e.ci_halfwidth, "n": e.n} for e in est],
            "config": cfg.to_json()}
    return {f"{cfg.output}_coupling.csv": _config_line(cfg) + coupling.tails_to_csv(est),
            f"{cfg.output}_coupling.json": _dumps(side)}


def cmd_tv(args, cfg, base):
    _require(args, "x", "t")
    d = _distribution(cfg, base)
    bins = int(cfg.grid["bins"])
    if args.y is not None:
        window = tuple(args.window) if args.window else None
        if window is not None and len(window) != 2:
            raise UsageError("--window takes two numbers")
        curve = experiments.dbar_curve(cfg.model, args.x, args.y, cfg.lam, d, args.t, cfg.replicas, cfg.seed,
                                       bins, window, cfg.grid["x_max"])
        flags = {"degenerate": curve.degenerate}
        if cfg.model == 1:
            flags["arrival_coupling_envelope"] = all(
                p.d_hat <= (-math.expm1(-cfg.lam)) ** math.floor(p.t) + p.ci for p in curve.points)
        side = {"mode": "two-start", "x": args.x, "y": args.y, "rate": curve.rate,
                "window": list(window) if window else None, "flags": flags, "config": cfg.to_json()}
    else:
        inv = _invariant_for(cfg, d)
        pts = experiments.tv_to_invariant(cfg.model, args.x, args.t, cfg.lam, d, inv, cfg.replicas, cfg.seed,
                                          bins, cfg.grid["x_max"])
        curve = experiments.DecayCurve(tuple(pts), cfg.replicas)
        side = {"mode": "invariant", "x": args.x, "atom0": inv.atom0, "config": cfg.to_json()}
    side["points"] = [{"t": p.t, "d_hat": p.d_hat, "ci": p.ci} for p in curve.points]
    return {f"{cfg.output}_tv.csv": _config_line(cfg) + curve.to_csv(),
            f"{cfg.output}_tv.json": _dumps(side)}


def cmd_bounds(args, cfg, base):
    reports = []
    lam = cfg.lam
    for t in args.t or []:
        if t >= 1:
            reports.append(bounds.arrival_coupling_bound(lam, t))
    if args.p is not None and args.beta is not None:
        reports.append(bounds.critical_rate(args.p, args.beta))
        reports.append(bounds.rho_bound(lam, args.p, args.beta))
    if args.p is not None and 0 < args.p < 1:
        for t in args.t or [1.0]:
            reports.extend(bounds.large_jump_bounds(lam, args.p, t))
    if args.b is not None:
        reports.append(bounds.compact_support_rate(lam, args.b))
    for eps in args.eps or []:
        reports.append(bounds.BoundReport("zero_drift_rate", {"eps": eps}, bounds.zero_drift_rate(eps), bounds.ROOT))
    if cfg.distribution is not None:
        reports.append(bounds.mgf_condition(_distribution(cfg, base)))
    if not reports:
        raise UsageError("bounds needs at least one of --t, --p/--beta, --b, --eps or a distribution")
    flat = [r.to_json() for rep in reports for r in rep.flatten()]
    text = _dumps({"reports": flat, "config": cfg.to_json()})
    return {f"{cfg.output}_bounds.json": text}, text


def cmd_demo(args, cfg, base):
    _require(args, "eps", "t")
    if len(args.t) != 1:
        raise UsageError("demo takes a single time --t")
    rows = experiments.collapse_demo(args.eps, args.t[0], args.x, args.y, cfg.replicas, cfg.seed,
                                     int(cfg.grid["bins"]))
    csv = _config_line(cfg) + "eps,lambda,d_hat,ci\n" + "".join(
        f"{e:.17g},{bounds.zero_drift_rate(e):.17g},{v:.17g},{3 * s:.17g}\n" for e, v, s in rows)
    side = {"t": args.t[0], "x": args.x, "y": args.y,
            "rows": [{"eps": e, "lambda": bounds.zero_drift_rate(e), "d_hat": v, "ci": 3 * s} for e, v, s in rows],
            "config": cfg.to_json()}
    return {f"{cfg.output}_demo_collapse.csv": csv, f"{cfg.output}_demo_collapse.json": _dumps(side)}


COMMANDS = {"invariant": cmd_invariant, "simulate": cmd_simulate, "coupling": cmd_coupling, "tv": cmd_tv,
            "bounds": cmd_bounds, "demo-thm3": cmd_demo, "demo-collapse": cmd_demo}


def _write(files):
    for name, text in files.items():
        path = Path(name)
        if path.parent != Path(""):
            path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_name(path.name + ".tmp")
        with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)


def _fail(kind, message, code):
    sys.stderr.write(json.dumps({"error": kind, "message": message, "exit_code": code}) + "\n")
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg, base = resolve(args)
        result = COMMANDS[args.command](args, cfg, base)
        stdout = None
        if isinstance(result, tuple):
            result, stdout = result
        _write(result)
        if stdout:
            sys.stdout.write(stdout)
        return 0
    except UsageError as exc:
        return _fail("usage", str(exc), 2)
    except NumericalError as exc:
        return _fail(type(exc).__name__, str(exc), 3)
    except (ValueError, TypeError) as exc:
        return _fail(type(exc).__name__, str(exc), 2)


if __name__ == "__main__":
    sys.exit(main())

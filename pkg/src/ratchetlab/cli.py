"""Command-line interface: ``ratchetlab {speed,table,simulate,verify,couple}``.

Exit codes: 0 success (or all verdicts pass), 1 runtime or verification
failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import io
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import closedform as cf
from .closedform import Model, RatchetParams
from .jumpchain import chain_csv, run_chain
from .pathsim import SimConfig, jumps_csv, path_csv, simulate_ratchet, validate_path
from .seeding import DEFAULT_SEED, SEED_ENV, default_seed
from .verify import DEFAULT_N, MIN_N, SUITES, coupling_times, run_suite

log = logging.getLogger("ratchetlab")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    """Invalid flag values or combinations (exit code 2)."""


def _seed(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from exc
    if v < 0 or v >= 1 << 64:
        raise argparse.ArgumentTypeError("seed must be in [0, 2^64)")
    return v


def _nonneg(text: str) -> float:
    v = float(text)
    if not (math.isfinite(v) and v >= 0):
        raise argparse.ArgumentTypeError(f"expected a finite value >= 0, got {text!r}")
    return v


def _pos(text: str) -> float:
    v = float(text)
    if not (math.isfinite(v) and v > 0):
        raise argparse.ArgumentTypeError(f"expected a finite value > 0, got {text!r}")
    return v


def _count(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


def _add_model(p: argparse.ArgumentParser, mu_default: float | None = None):
    p.add_argument("--model", choices=[m.value for m in Model], default="bm")
    p.add_argument("--gamma", type=_nonneg, default=0.5, help="jump-rate coefficient (default 0.5)")
    p.add_argument("--mu", type=_nonneg, default=mu_default, required=mu_default is None,
                   help="drift coefficient")


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=_seed, default=None,
                   help=f"root seed (default ${SEED_ENV}, else {DEFAULT_SEED:#x})")
    p.add_argument("--config", type=Path, default=None, help="JSON file of flag defaults")
    p.add_argument("--workers", type=_count, default=1, help="worker processes for replicas")


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    parser = argparse.ArgumentParser(prog="ratchetlab", description="Speeds and simulations of diffusion ratchets.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}

    p = sub.add_parser("speed", help="closed-form speed")
    _add_model(p)
    p.add_argument("--format", choices=["text", "json"], default="text")
    _add_common(p)
    subs["speed"] = p

    p = sub.add_parser("table", help="speed table of both models over a mu grid")
    p.add_argument("--gamma", type=_nonneg, default=0.5)
    p.add_argument("--mu-min", type=_nonneg, default=0.0)
    p.add_argument("--mu-max", type=_nonneg, default=8.0)
    p.add_argument("--steps", type=int, default=81)
    p.add_argument("--out", type=Path, default=None, help="CSV path (default stdout)")
    _add_common(p)
    subs["table"] = p

    p = sub.add_parser("simulate", help="simulate one ratchet path or a jump chain")
    _add_model(p)
    p.add_argument("--kind", choices=["path", "chain"], default="path")
    p.add_argument("--T", "--horizon", dest="horizon", type=_pos, default=500.0)
    p.add_argument("--dt", type=_pos, default=1e-3)
    p.add_argument("--x0", type=_nonneg, default=0.0)
    p.add_argument("--n", type=_count, default=100_000, help="chain length (kind=chain)")
    p.add_argument("--burn-in", type=int, default=1000)
    p.add_argument("--out", type=Path, default=None, help="CSV path (default stdout)")
    p.add_argument("--jumps-out", type=Path, default=None, help="jump-event CSV path")
    p.add_argument("--validate", action="store_true", help="check the path invariants")
    _add_common(p)
    subs["simulate"] = p

    p = sub.add_parser("verify", help="run a verification suite and print JSON verdicts")
    p.add_argument("--suite", choices=SUITES, required=True)
    _add_model(p, mu_default=1.0)
    p.add_argument("--n", type=_count, default=None, help="suite size (chain steps or replicas)")
    p.add_argument("--paths", type=int, default=0, help="speed suite: also run this many path replicas")
    p.add_argument("--T", "--horizon", dest="horizon", type=_pos, default=500.0)
    p.add_argument("--dt", type=_pos, default=1e-3)
    p.add_argument("--out", type=Path, default=None, help="JSON path (default stdout)")
    _add_common(p)
    subs["verify"] = p

    p = sub.add_parser("couple", help="coupling times of two ratchets on shared noise")
    _add_model(p, mu_default=1.0)
    p.add_argument("--x-hi", type=_nonneg, default=1.0)
    p.add_argument("--x-lo", type=_nonneg, default=0.0)
    p.add_argument("--n", type=_count, default=200)
    p.add_argument("--T", "--horizon", dest="horizon", type=_pos, default=50.0)
    p.add_argument("--dt", type=_pos, default=1e-3)
    p.add_argument("--out", type=Path, default=None, help="CSV path (default stdout)")
    _add_common(p)
    subs["couple"] = p
    return parser, subs


def _params(args) -> RatchetParams:
    try:
        params = RatchetParams(Model(args.model), args.gamma, args.mu)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if params.model is Model.OU and params.mu <= 0:
        raise UsageError("the OU ratchet needs mu > 0 (for the driftless limit use --model bm)")
    return params


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    try:
        return default_seed()
    except ValueError as exc:
        raise UsageError(f"invalid ${SEED_ENV}: {exc}") from exc


def _write(text: str, path: Path | None, stdout) -> None:
    if path is None:
        stdout.write(text)
        return
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(text)


def _sim_config(args, seed: int) -> SimConfig:
    try:
        return SimConfig(args.dt, args.horizon, args.x0 if hasattr(args, "x0") else 0.0, seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_speed(args, stdout) -> int:
    params = _params(args)
    try:
        v = cf.speed(params)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if args.format == "json":
        rec = {"model": params.model.value, "gamma": params.gamma, "mu": params.mu, "speed": float(f"{v:.12g}")}
        stdout.write(json.dumps(rec) + "\n")
    else:
        stdout.write(f"{v:.12g}\n")
    return EXIT_OK


def speed_table(gamma: float, mu_min: float, mu_max: float, steps: int) -> list[tuple[float, float, float | None]]:
    """Rows (mu, v_bm, v_ou) with v_ou None at mu = 0."""
    rows = []
    for mu in np.linspace(mu_min, mu_max, steps):
        mu = float(mu)
        vb = cf.bm_speed(RatchetParams.bm(mu, gamma))
        vo = cf.ou_speed(RatchetParams.ou(mu, gamma)) if mu > 0 else None
        rows.append((mu, vb, vo))
    return rows


def cmd_table(args, stdout) -> int:
    if args.steps < 2:
        raise UsageError("--steps must be >= 2")
    if args.mu_max <= args.mu_min:
        raise UsageError("--mu-max must exceed --mu-min")
    buf = io.StringIO()
    buf.write("mu,v_bm,v_ou\n")
    for mu, vb, vo in speed_table(args.gamma, args.mu_min, args.mu_max, args.steps):
        buf.write(f"{mu!r},{vb!r},{'' if vo is None else repr(vo)}\n")
    _write(buf.getvalue(), args.out, stdout)
    return EXIT_OK


def cmd_simulate(args, stdout) -> int:
    params = _params(args)
    seed = _resolve_seed(args)
    if args.kind == "chain":
        if args.jumps_out is not None or args.validate:
            raise UsageError("--jumps-out and --validate apply to --kind path only")
        if params.gamma <= 0:
            raise UsageError("the jump chain needs gamma > 0")
        if args.burn_in < 0:
            raise UsageError("--burn-in must be >= 0")
        run = run_chain(params, args.n, args.burn_in, seed, args.x0)
        _write(chain_csv(run), args.out, stdout)
        return EXIT_OK
    cfg = _sim_config(args, seed)
    path = simulate_ratchet(params, cfg, record=True)
    if args.validate:
        validate_path(path)
        log.info("path invariants hold (%d jumps)", path.n_jumps)
    _write(path_csv(path), args.out, stdout)
    if args.jumps_out is not None:
        _write(jumps_csv(path), args.jumps_out, stdout)
    return EXIT_OK


def cmd_verify(args, stdout) -> int:
    seed = _resolve_seed(args)
    n = args.n if args.n is not None else DEFAULT_N[args.suite]
    if n < MIN_N[args.suite]:
        raise UsageError(f"suite {args.suite} needs --n >= {MIN_N[args.suite]}")
    params = None if args.suite == "specfun" else _params(args)
    if params is not None and params.gamma <= 0 and args.suite != "couple":
        raise UsageError(f"suite {args.suite} needs gamma > 0")
    if args.suite == "couple" and params.model is Model.BM and not 0.3 <= 0.5 * params.mu ** 2:
        raise UsageError("the BM coupling bound with alpha = 0.3 needs mu >= sqrt(0.6)")
    if args.dt > args.horizon:
        raise UsageError("--dt must not exceed --T")
    verdicts = run_suite(args.suite, params, n, seed, args.workers, paths=args.paths, horizon=args.horizon,
                         dt=args.dt)
    ok = all(v.passed for v in verdicts)
    report = {"suite": args.suite, "pass": ok, "verdicts": [v.as_dict() for v in verdicts]}
    _write(json.dumps(report, sort_keys=True, indent=1) + "\n", args.out, stdout)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_couple(args, stdout) -> int:
    params = _params(args)
    seed = _resolve_seed(args)
    if args.x_hi < args.x_lo:
        raise UsageError("need --x-hi >= --x-lo")
    if args.dt > args.horizon:
        raise UsageError("--dt must not exceed --T")
    times, coupled = coupling_times(params, args.x_hi, args.x_lo, args.n, seed, args.horizon, args.dt, args.workers)
    buf = io.StringIO()
    buf.write("replica,time,coupled\n")
    for i, (t, c) in enumerate(zip(times, coupled)):
        buf.write(f"{i},{float(t)!r},{int(c)}\n")
    _write(buf.getvalue(), args.out, stdout)
    return EXIT_OK


COMMANDS = {"speed": cmd_speed, "table": cmd_table, "simulate": cmd_simulate, "verify": cmd_verify,
            "couple": cmd_couple}


def _apply_config(parser, subs, argv):
    """Parse ``argv`` with the entries of ``--config`` (a JSON object) as
    defaults of the chosen subcommand; explicit flags still win."""
    argv = list(sys.argv[1:] if argv is None else argv)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", type=Path, default=None)
    known, _ = pre.parse_known_args(argv)
    command = next((a for a in argv if a in subs), None)
    if known.config is not None and command is not None:
        try:
            cfg = json.loads(known.config.read_text())
        except (OSError, ValueError) as exc:
            parser.error(f"cannot read config {known.config}: {exc}")
        if not isinstance(cfg, dict):
            parser.error("config file must hold a JSON object")
        sp = subs[command]
        actions = {a.dest: a for a in sp._actions}
        defaults = {}
        for key, val in cfg.items():
            dest = key.replace("-", "_")
            action = actions.get(dest)
            if action is None or dest in ("config", "help"):
                parser.error(f"unknown config key {key!r} for {command}")
            if action.type is not None and val is not None and not isinstance(val, bool):
                try:
                    val = action.type(str(val))
                except (argparse.ArgumentTypeError, ValueError) as exc:
                    parser.error(f"config key {key!r}: {exc}")
            if action.choices is not None and val not in action.choices:
                parser.error(f"config key {key!r}: invalid choice {val!r}")
            defaults[dest] = val
            action.required = False
        sp.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv=None, stdout=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    parser, subs = build_parser()
    try:
        args = _apply_config(parser, subs, argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args, stdout)
    except UsageError as exc:
        subs[args.command].print_usage(sys.stderr)
        print(f"ratchetlab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # runtime failure
        log.debug("failure", exc_info=True)
        print(f"ratchetlab {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

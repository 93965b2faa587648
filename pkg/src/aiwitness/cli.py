"""Command-line front end.

    aiwitness witness CONFIG [--sweep t|nbar|lambda|q_over_nbar] [--out PATH]
    aiwitness coupling CONFIG [--mode quad|linear] [--scaling [FACTOR ...]]
    aiwitness verify [--suite NAME] [--seed N] [--n-real N]
    aiwitness phase CONFIG [--out PATH]

Exit codes: 0 ok, 2 usage or config, 3 validity, 4 numerical, 5 verification.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import magnetics, verify, witness
from .core import PerturbativityViolated, ScenarioConfig, WitnessError, validate

EXIT_OK, EXIT_USAGE, EXIT_VALIDITY, EXIT_NUMERIC, EXIT_VERIFY = 0, 2, 3, 4, 5

WITNESS_COLUMNS = ("sweep_var", "w_bound", "w_en", "w_diff", "w_ratio", "violated", "scenario",
                   "coefficient_provenance")


class ConfigError(Exception):
    pass


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def write_csv(rows, header, out) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    text = buf.getvalue()
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def write_json(obj, out) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True, default=float) + "\n"
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as err:
        raise ConfigError(f"{path}: {err.strerror}") from err
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"{path}:{err.lineno}:{err.colno}: {err.msg}") from err
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return data


def load_scenario(path: str) -> tuple[ScenarioConfig, dict]:
    data = load_json(path)
    try:
        return ScenarioConfig.from_dict(data), data
    except (KeyError, TypeError, ValueError) as err:
        raise ConfigError(f"{path}: field error: {err}") from err


def load_geometry(data: dict, path: str) -> magnetics.CouplingGeometry:
    opts = dict(data.get("geometry", {}))
    preset = opts.pop("preset", "table1")
    builders = {"table1": magnetics.CouplingGeometry.table1,
                "simplified": magnetics.CouplingGeometry.simplified}
    if preset not in builders:
        raise ConfigError(f"{path}: geometry.preset must be one of {sorted(builders)}")
    if "theta0_deg" in opts:
        opts["theta0"] = math.radians(opts.pop("theta0_deg"))
    if "atom_positions" in opts and opts["atom_positions"] is not None:
        opts["atom_positions"] = tuple(tuple(map(float, p)) for p in opts["atom_positions"])
    try:
        return builders[preset](**opts)
    except (TypeError, ValueError) as err:
        raise ConfigError(f"{path}: geometry field error: {err}") from err


def _sweep_points(args, data):
    sweep = dict(data.get("sweep", {}))
    var = args.sweep or sweep.get("var", "t")
    start = args.start if args.start is not None else sweep.get("start")
    stop = args.stop if args.stop is not None else sweep.get("stop")
    num = args.num if args.num is not None else sweep.get("num", 101)
    log = args.log or bool(sweep.get("log", False))
    return var, start, stop, int(num), log


def cmd_witness(args) -> int:
    cfg, data = load_scenario(args.config)
    var, start, stop, num, log = _sweep_points(args, data)
    if var not in ("t", "nbar", "lambda", "q_over_nbar"):
        raise ConfigError(f"unknown sweep variable {var!r}")
    defaults = {"t": (0.0, 2 * math.pi / cfg.omega), "nbar": (0.0, 10.0),
                "lambda": (cfg.lam / 10, cfg.lam), "q_over_nbar": (1.0, 100.0)}
    start = defaults[var][0] if start is None else float(start)
    stop = defaults[var][1] if stop is None else float(stop)
    if num <= 0:
        values = np.array([])
    elif log:
        if start <= 0 or stop <= 0:
            raise ConfigError("log sweep needs positive start and stop")
        values = np.geomspace(start, stop, num)
    else:
        values = np.linspace(start, stop, num)
    rows = []
    for v in values:
        noise_ratio = None
        if var == "t":
            point = cfg.replace(time=float(v))
        elif var == "nbar":
            point = cfg.replace(nbar=float(v))
        elif var == "lambda":
            point = cfg.replace(lam=float(v))
        else:
            point = cfg
            noise_ratio = 1.0 / float(v)
        if noise_ratio is None and point.scenario.has_bath:
            noise_ratio = point.noise_ratio
        point = validate(point.replace(q_factor=point.q_factor or (1.0 if noise_ratio else None)),
                         strict=args.strict)
        rep = witness.witness_value(point, args.coefficients, noise_ratio)
        rows.append((float(v), rep.w_bound, rep.w_en, rep.w_diff, rep.w_ratio, rep.violated,
                     rep.scenario.value, rep.coefficients.provenance.value))
    write_csv(rows, WITNESS_COLUMNS, args.out)
    return EXIT_OK


def cmd_coupling(args) -> int:
    data = load_json(args.config)
    geom = load_geometry(data, args.config)
    if args.mode:
        mode = {"quad": magnetics.ZeemanMode.QUADRATIC_CLOCK,
                "linear": magnetics.ZeemanMode.LINEAR_MF}[args.mode]
        geom = geom.replace(zeeman_mode=mode)
    res = magnetics.coupling_g(geom)
    report = res.as_dict()
    report["zeeman_mode"] = geom.zeeman_mode.value
    if args.scaling is not None:
        factors = args.scaling or list(magnetics.SCALING_FACTORS)
        report["scaling_exponents"] = {f: magnetics.scaling_check(geom, f) for f in factors}
    write_json(report, args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    checks = verify.run(args.suite, args.seed, args.n_real)
    summ = verify.summary(checks)
    write_json(summ, args.out)
    return EXIT_OK if summ["ok"] else EXIT_VERIFY


def cmd_phase(args) -> int:
    data = load_json(args.config)
    geom = load_geometry(data, args.config)
    opts = data.get("phase", {})
    theta_max = args.theta_max if args.theta_max is not None else opts.get(
        "theta_max", math.radians(2.0))
    periods = args.periods if args.periods is not None else opts.get("periods", 1.0)
    n_points = args.n_points if args.n_points is not None else opts.get("n_points", 401)
    t = np.linspace(0, periods * 2 * math.pi / geom.omega, int(n_points))
    trace = magnetics.phase_trace(geom, float(theta_max), t)
    write_csv(trace.tolist(), ("t_s", "theta_rad", "phi_rad"), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="aiwitness", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    w = sub.add_parser("witness", help="witness sweep as CSV")
    w.add_argument("config")
    w.add_argument("--sweep", choices=("t", "nbar", "lambda", "q_over_nbar"))
    w.add_argument("--start", type=float)
    w.add_argument("--stop", type=float)
    w.add_argument("--num", type=int)
    w.add_argument("--log", action="store_true", help="geometric spacing")
    w.add_argument("--coefficients", choices=witness.COEFFICIENT_FORMS, default="full")
    w.add_argument("--strict", action="store_true", help="outside-window points are errors")
    w.add_argument("--out")
    w.set_defaults(func=cmd_witness)

    c = sub.add_parser("coupling", help="coupling g, lambda and lambda_N as JSON")
    c.add_argument("config")
    c.add_argument("--mode", choices=("quad", "linear"))
    c.add_argument("--scaling", nargs="*", choices=tuple(magnetics.SCALING_FACTORS))
    c.add_argument("--out")
    c.set_defaults(func=cmd_coupling)

    v = sub.add_parser("verify", help="run consistency suites")
    v.add_argument("--suite", choices=verify.SUITES + ("all",), default="all")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--n-real", type=int, default=10_000)
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)

    ph = sub.add_parser("phase", help="interferometer phase trace as CSV")
    ph.add_argument("config")
    ph.add_argument("--theta-max", type=float)
    ph.add_argument("--periods", type=float)
    ph.add_argument("--n-points", type=int)
    ph.add_argument("--out")
    ph.set_defaults(func=cmd_phase)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except PerturbativityViolated as err:
        print(f"validity error: {err}", file=sys.stderr)
        return EXIT_VALIDITY
    except magnetics.DerivativeNonConvergent as err:
        print(f"numerical error: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    except (WitnessError, ValueError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, np.linalg.LinAlgError) as err:
        print(f"numerical error: {err}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""W_ratio over one oscillator period for the noiseless and bath scenarios.

Writes one CSV with a column per curve; non-violated points are left blank so
plots truncate where W_b - W_en < 0.
"""
from __future__ import annotations

import argparse
import csv
import math

import numpy as np

from aiwitness import witness
from aiwitness.core import Scenario, ScenarioConfig


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--lam", type=float, default=10**-4.5)
    p.add_argument("--n-atoms", type=int, default=10**6)
    p.add_argument("--omega", type=float, default=2 * math.pi / 20)
    p.add_argument("--nbar", type=float, default=325.0, help="thermal-start occupancy")
    p.add_argument("--ratios", type=float, nargs="+", default=[0.1, 0.25], help="nbar/Q values")
    p.add_argument("--points", type=int, default=401)
    p.add_argument("--out", default="period_sweep.csv")
    args = p.parse_args()

    base = ScenarioConfig(lam=args.lam, n_atoms=args.n_atoms, omega=args.omega, q_factor=1.0)
    t = np.linspace(0, 2 * math.pi / args.omega, args.points)
    curves = {"noiseless": (base, None)}
    for r in args.ratios:
        curves[f"ground_bath_{r:g}"] = (base.replace(scenario=Scenario.GROUND_PLUS_BATH), r)
        curves[f"thermal_bath_{r:g}"] = (
            base.replace(nbar=args.nbar, scenario=Scenario.THERMAL_INITIAL_PLUS_BATH), r)

    cols = {}
    for name, (cfg, r) in curves.items():
        ratio = np.array([witness.witness_value(cfg.replace(time=float(x)), noise_ratio=r).w_ratio
                          for x in t])
        cols[name] = ratio
        peak = int(np.argmax(ratio))
        print(f"{name:>20s}: max w_ratio {ratio[peak]:.4e} at t = {t[peak]:.3f} s")

    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t_s", *cols])
        for i, x in enumerate(t):
            w.writerow([format(x, ".17g")]
                       + [format(c[i], ".17g") if c[i] > 0 else "" for c in cols.values()])
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()

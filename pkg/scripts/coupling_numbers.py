#!/usr/bin/env python3
"""Coupling strengths and scaling exponents for the two reference geometries."""
from __future__ import annotations

import argparse
import json

from aiwitness import magnetics as mg


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out", help="optional JSON output")
    args = p.parse_args()

    table1 = mg.CouplingGeometry.table1()
    linear = table1.replace(zeeman_mode=mg.ZeemanMode.LINEAR_MF)
    report = {}
    for name, geom in (("table1_quadratic", table1), ("table1_linear", linear),
                       ("table1_quadratic_chi-1", table1.replace(chi_m=-1.0)),
                       ("simplified_linear", mg.CouplingGeometry.simplified())):
        res = mg.coupling_g(geom)
        report[name] = res.as_dict()
        print(f"{name:>24s}: g = {res.g:+.4e} rad/s  lambda = {res.lam:+.4e}  "
              f"lambda_N = {res.lam_N:+.4e}  |B_cyl|^2/cross = {res.dominance:.2e}")

    for geom, label in ((table1, "quadratic"), (linear, "linear")):
        exps = {f: mg.scaling_check(geom, f) for f in mg.SCALING_FACTORS}
        report[f"exponents_{label}"] = exps
        print(f"{label:>10s} exponents: " + "  ".join(f"{k} {v:+.4f}" for k, v in exps.items()))

    if args.out:
        with open(args.out, "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)


if __name__ == "__main__":
    main()

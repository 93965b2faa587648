#!/usr/bin/env python3
"""Shot budgets: W_ratio^-2 at full scale, simulated experiments at desk scale."""
from __future__ import annotations

import argparse
import math

from aiwitness import harness, witness
from aiwitness.core import ScenarioConfig


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--sigmas", type=float, default=5.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-atoms", type=int, default=6)
    p.add_argument("--lams", type=float, nargs="+", default=[0.005, 0.01, 0.02, 0.04])
    args = p.parse_args()

    full = ScenarioConfig(lam=10**-4.5, n_atoms=10**6, time=math.pi)
    rep = witness.witness_value(full, "linear")
    print(f"full scale: w_ratio = {rep.w_ratio:.4e}, W_ratio^-2 = {harness.n_meas_scaling(rep):.4g}")

    print(f"\nN = {args.n_atoms}, wt = pi, {args.sigmas:g} sigma")
    print(f"{'lambda':>8s} {'n_required':>12s} {'n_optimal':>12s} {'rescaled':>12s} "
          f"{'margin':>7s} {'success':>8s}")
    for lam in args.lams:
        cfg = ScenarioConfig(lam=lam, n_atoms=args.n_atoms, time=math.pi)
        res = harness.n_meas_simulated(cfg, witness.coefficients_noiseless(cfg), args.sigmas,
                                       seed=args.seed)
        print(f"{lam:8.3g} {res.n_required:12d} {res.n_optimal:12d} "
              f"{res.n_scaling_rescaled:12.4g} {res.achieved_margin:7.2f} {res.success_rate:8.3f}")


if __name__ == "__main__":
    main()

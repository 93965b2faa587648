#!/usr/bin/env python3
"""Phase-rate maps over (y, z) and (theta, z) plus the phase trace for one period."""
from __future__ import annotations

import argparse
import math

import numpy as np

from aiwitness import magnetics as mg


def save(path, header, rows):
    np.savetxt(path, rows, delimiter=",", header=",".join(header), comments="", fmt="%.17g")
    print(f"wrote {path} ({len(rows)} rows)")


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--preset", choices=("table1", "simplified"), default="table1")
    p.add_argument("--n", type=int, default=41, help="grid points per axis")
    p.add_argument("--theta-max-deg", type=float, default=2.0)
    p.add_argument("--prefix", default="phase")
    args = p.parse_args()

    geom = getattr(mg.CouplingGeometry, args.preset)()
    half = geom.length / 2
    z = np.linspace(-half, half, args.n)
    y = np.linspace(-geom.radius, geom.radius, args.n)
    theta = np.linspace(-math.radians(args.theta_max_deg), math.radians(args.theta_max_deg), args.n)
    save(f"{args.prefix}_yz.csv", ("y_m", "z_m", "rate_rad_s"), mg.phase_rate_map(geom, z, y_values=y))
    save(f"{args.prefix}_thetaz.csv", ("theta_rad", "z_m", "rate_rad_s"),
         mg.phase_rate_map(geom, z, theta_values=theta))
    t = np.linspace(0, 2 * math.pi / geom.omega, 401)
    save(f"{args.prefix}_trace.csv", ("t_s", "theta_rad", "phi_rad"),
         mg.phase_trace(geom, math.radians(args.theta_max_deg), t))


if __name__ == "__main__":
    main()

"""Constant densities f = c on the circle: where the large-volume solution stops existing.

A circle of radius r has density r exp(-r^2/2) / (2 pi), so f = c is solvable
only for c up to the peak at r = 1, and the l1 mass 2 pi c crosses
1/sqrt(2 pi) well before that.

    python3 scripts/mass_obstruction.py --N 64 --out runs/mass
"""

import argparse
import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from gmink import ball_roots
from gmink.gauss_core import INV_SQRT2PI
from gmink.errors import GminkError
from gmink.gauss_core import NoSolution
from gmink.smooth import DensityProfile, SmoothOptions, solve_smooth


@dataclass
class MassConfig:
    N: int = 64
    points: int = 24
    c_max_factor: float = 1.1   # sweep c up to this multiple of the peak density
    out: str = "runs/mass"


def run(cfg: MassConfig) -> list:
    peak = math.exp(-0.5) / (2 * math.pi)
    rows = []
    for c in np.linspace(0.05, cfg.c_max_factor, cfg.points) * peak:
        f = DensityProfile(np.full(cfg.N, c))
        roots = ball_roots(float(c), 2)
        row = {"c": float(c), "l1_mass": f.l1_mass, "mass_ok": f.l1_mass < INV_SQRT2PI,
               "r_large": math.nan if isinstance(roots, NoSolution) else roots.r_large,
               "status": "", "h_mean": math.nan, "gamma2": math.nan}
        try:
            h, rep = solve_smooth(f, SmoothOptions(force=True))
            row.update(status="ok", h_mean=float(np.mean(h.values)), gamma2=rep.gamma2)
        except GminkError as exc:
            row["status"] = type(exc).__name__
        rows.append(row)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "constant_density.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
    return rows


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--N", type=int, default=MassConfig.N)
    p.add_argument("--points", type=int, default=MassConfig.points)
    p.add_argument("--out", default=MassConfig.out)
    for r in run(MassConfig(**vars(p.parse_args()))):
        print(f"c={r['c']:.5f} mass={r['l1_mass']:.4f} ok={r['mass_ok']!s:5} r_large={r['r_large']:.5f} "
              f"{r['status']:>14} h={r['h_mean']:.5f} gamma2={r['gamma2']:.4f}")


if __name__ == "__main__":
    main()

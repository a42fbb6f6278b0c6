"""Normalized problem on a fixed hexagon measure as alpha runs over (0, 1/2).

Records the maximizer, Gamma, the stationarity residual and the multistart spread.

    python3 scripts/normalized_alpha_sweep.py --points 9 --out runs/alpha
"""

import argparse
import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from gmink.discrete import DiscreteProblem, SolveOptions, solve_normalized
from gmink.errors import GminkError
from gmink.geometry import half_circle_directions
from gmink.measure import MeasureVector


@dataclass
class AlphaConfig:
    points: int = 9
    weight: float = 0.05
    out: str = "runs/alpha"


def run(cfg: AlphaConfig) -> list:
    problem = DiscreteProblem(MeasureVector(half_circle_directions(3), np.full(3, cfg.weight)))
    rows = []
    for alpha in np.linspace(0.5, 0.5 * cfg.points, cfg.points) / (cfg.points + 1):
        row = {"alpha": float(alpha), "status": "ok"}
        try:
            rep = solve_normalized(problem, SolveOptions(alpha=float(alpha)))
        except GminkError as exc:
            row["status"] = type(exc).__name__
            rows.append(row)
            continue
        spread = max((s["hausdorff"] for s in rep.multistart), default=0.0)
        row.update(h=float(np.mean(rep.support)), gamma=rep.gaussian_volume, Gamma=rep.gamma_value,
                   residual=rep.measure_residual, spread=spread)
        rows.append(row)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    fields = ["alpha", "status", "h", "gamma", "Gamma", "residual", "spread"]
    with open(out / "alpha_sweep.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields)
        w.writeheader()
        w.writerows(rows)
    return rows


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--points", type=int, default=AlphaConfig.points)
    p.add_argument("--weight", type=float, default=AlphaConfig.weight)
    p.add_argument("--out", default=AlphaConfig.out)
    for r in run(AlphaConfig(**vars(p.parse_args()))):
        if r["status"] != "ok":
            print(f"alpha={r['alpha']:.4f} {r['status']}")
            continue
        print(f"alpha={r['alpha']:.4f} h={r['h']:.6f} gamma={r['gamma']:.4f} Gamma={r['Gamma']:.4f} "
              f"res={r['residual']:.1e} spread={r['spread']:.1e}")


if __name__ == "__main__":
    main()

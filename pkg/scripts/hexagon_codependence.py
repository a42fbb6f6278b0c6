"""Hexagons with one atom held fixed: how the other two atoms move.

Normals at 0, 60 and 120 degrees. For each h2 on a grid, h1 is solved so the
first atom equals its value at the regular hexagon; h3 stays fixed. Nothing is
asserted, the curve is written for inspection.

    python3 scripts/hexagon_codependence.py --points 25 --out runs/hexagon
"""

import argparse
import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from gmink.geometry import HBody, half_circle_directions, wulff_shape
from gmink.measure import TIGHT_QUAD, facet_measures, gaussian_volume


@dataclass
class HexagonConfig:
    h: float = 1.5          # support of the reference regular hexagon
    points: int = 25
    h2_min: float = 1.1
    h2_max: float = 2.4
    out: str = "runs/hexagon"


def atoms(dirs, h):
    P = wulff_shape(HBody.from_normals(dirs, h))
    if P.vanished:
        return None, P
    return facet_measures(P, TIGHT_QUAD).weights, P


def run(cfg: HexagonConfig) -> list:
    dirs = half_circle_directions(3)
    target = atoms(dirs, [cfg.h] * 3)[0][0]
    rows = []
    for h2 in np.linspace(cfg.h2_min, cfg.h2_max, cfg.points):
        def g(h1):
            w, _ = atoms(dirs, [h1, h2, cfg.h])
            return np.nan if w is None else w[0] - target

        row = {"h2": float(h2), "h1": np.nan, "mu1": np.nan, "mu2": np.nan, "mu3": np.nan, "gamma": np.nan}
        # scan for sign changes away from vanished facets, keep the outermost root
        xs = np.linspace(0.5, 4.0, 141)
        ys = np.array([g(x) for x in xs])
        ok = np.isfinite(ys[:-1]) & np.isfinite(ys[1:]) & (np.sign(ys[:-1]) != np.sign(ys[1:]))
        if not ok.any():
            rows.append(row)
            continue
        k = np.flatnonzero(ok)[-1]
        h1 = brentq(g, xs[k], xs[k + 1], xtol=1e-14)
        w, P = atoms(dirs, [h1, h2, cfg.h])
        row.update(h1=h1, mu1=w[0], mu2=w[1], mu3=w[2], gamma=gaussian_volume(P, TIGHT_QUAD))
        rows.append(row)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "hexagon.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
    return rows


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--points", type=int, default=HexagonConfig.points)
    p.add_argument("--out", default=HexagonConfig.out)
    for r in run(HexagonConfig(**vars(p.parse_args()))):
        print(f"h2={r['h2']:.4f} h1={r['h1']:.6f} mu=({r['mu1']:.6f}, {r['mu2']:.6f}, {r['mu3']:.6f}) "
              f"gamma={r['gamma']:.4f}")


if __name__ == "__main__":
    main()

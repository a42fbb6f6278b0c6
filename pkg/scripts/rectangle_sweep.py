"""Rectangles sharing a first atom: the curve a1 -> (a2, mu2) and its double preimages.

    python3 scripts/rectangle_sweep.py --eps 0.01 --grid 200 --out runs/rectangles
"""

import argparse
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from gmink.gauss_core import INV_SQRT2PI
from gmink.inequalities import delta0, rectangle_forward, rectangle_sweep


@dataclass
class SweepConfig:
    eps: float = 0.01           # mu1 = 1/sqrt(2 pi) - eps
    grid: int = 200
    mu2_fraction: float = 0.5   # mu2 target as a fraction of the curve maximum
    out: str = "runs/rectangles"


def run(cfg: SweepConfig) -> dict:
    mu1 = INV_SQRT2PI - cfg.eps
    curve = rectangle_sweep(mu1, cfg.grid)
    mu2_target = cfg.mu2_fraction * curve.mu2_max
    res = rectangle_sweep(mu1, cfg.grid, mu2_target)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "curve.csv").write_text(res.to_csv())
    pre = []
    for a1, a2 in res.preimages:
        st = rectangle_forward(a1, a2)
        pre.append({"a1": a1, "a2": a2, "mu1": st.mu1, "mu2": st.mu2,
                    "gamma": math.erf(a1 / math.sqrt(2)) * math.erf(a2 / math.sqrt(2))})
    summary = {"config": asdict(cfg), "mu1": mu1, "a1_max": res.a1_max,
               "delta0": delta0(cfg.eps), "mu2_max": res.mu2_max, "mu2_target": mu2_target,
               "a1_at_mu2_max": res.a1[int(np.argmax(res.mu2))], "preimages": pre}
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    return summary


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for k, v in asdict(SweepConfig()).items():
        p.add_argument(f"--{k.replace('_', '-')}", type=type(v), default=v)
    summary = run(SweepConfig(**vars(p.parse_args())))
    print(f"a1_max = {summary['a1_max']:.10f}  delta0 = {summary['delta0']:.10f}")
    for q in summary["preimages"]:
        print(f"  a1 = {q['a1']:.6f}  a2 = {q['a2']:.6f}  mu2 = {q['mu2']:.3e}  gamma = {q['gamma']:.4f}")


if __name__ == "__main__":
    main()

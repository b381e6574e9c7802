"""Ratio ||f||_BV / ||f||_Sp on random spoke sets, grouped by the number of rays.

Prints per-N CSV summary rows (count, min, max) next to the admissible
interval [1/(2N+1), 3].
"""

from __future__ import annotations

import argparse
import csv
import random
import sys
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction

from acsigma.bvnorm import FiniteFunction
from acsigma.exact import ZERO, ExactComplex
from acsigma.geometry import SigmaSet, primitive
from acsigma.spoke import check_equivalence


@dataclass
class EquivConfig:
    trials: int = 200
    max_rays: int = 3
    max_points: int = 6
    seed: int = 0


def random_spoke_function(rng: random.Random, cfg: EquivConfig) -> FiniteFunction:
    dirs = set()
    N = rng.randint(1, cfg.max_rays)
    while len(dirs) < N:
        d = (rng.randint(-3, 3), rng.randint(-3, 3))
        if d != (0, 0):
            dirs.add(primitive(d))
    dirs = sorted(dirs)
    pts = {ZERO}
    size = rng.randint(2, cfg.max_points)
    while len(pts) < size:
        d = rng.choice(dirs)
        s = Fraction(rng.randint(1, 6), rng.choice([1, 2]))
        pts.add(ExactComplex(s * d[0], s * d[1]))
    sigma = SigmaSet(sorted(pts))
    return FiniteFunction.from_callable(sigma, lambda p: ExactComplex(rng.randint(-3, 3), rng.randint(-3, 3)))


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for name, default in vars(EquivConfig()).items():
        ap.add_argument(f"--{name.replace('_', '-')}", type=int, default=default)
    cfg = EquivConfig(**vars(ap.parse_args(argv)))
    rng = random.Random(cfg.seed)
    ratios = defaultdict(list)
    violations = 0
    for _ in range(cfg.trials):
        f = random_spoke_function(rng, cfg)
        chk = check_equivalence(f, "branch-bound", 2 * len(f.domain))
        violations += not (chk.lower_ok and chk.upper_ok)
        if chk.spoke:
            ratios[chk.N].append(chk.bv.lower / chk.spoke)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["N", "count", "ratio_min", "ratio_max", "lower_limit", "upper_limit"])
    for N in sorted(ratios):
        r = ratios[N]
        w.writerow([N, len(r), min(r), max(r), 1 / (2 * N + 1), 3])
    print(f"{violations} violations in {cfg.trials} trials", file=sys.stderr)


if __name__ == "__main__":
    main()

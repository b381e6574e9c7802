"""Budgeted BV norm as a function of the list budget L.

For random functions on small sets, prints the exhaustive value for every
L up to ``max_factor * |sigma|`` and whether it is flat from L = |sigma|.
CSV on stdout.
"""

from __future__ import annotations

import argparse
import csv
import random
import sys
from dataclasses import dataclass
from fractions import Fraction

from acsigma.bvnorm import FiniteFunction, bv_norm
from acsigma.exact import ExactComplex
from acsigma.geometry import SigmaSet


@dataclass
class ScanConfig:
    trials: int = 20
    min_points: int = 3
    max_points: int = 5
    max_factor: int = 2
    seed: int = 0
    span: int = 4


def random_function(rng: random.Random, cfg: ScanConfig) -> FiniteFunction:
    pts = set()
    size = rng.randint(cfg.min_points, cfg.max_points)
    while len(pts) < size:
        pts.add(ExactComplex(Fraction(rng.randint(-2 * cfg.span, 2 * cfg.span), 2),
                             Fraction(rng.randint(-2 * cfg.span, 2 * cfg.span), 2)))
    sigma = SigmaSet(sorted(pts))
    return FiniteFunction.from_callable(sigma, lambda p: ExactComplex(rng.randint(-3, 3), rng.randint(-3, 3)))


def scan(cfg: ScanConfig, out=sys.stdout) -> int:
    rng = random.Random(cfg.seed)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["trial", "size", "L", "value", "flat_from_size"])
    growing = 0
    for t in range(cfg.trials):
        f = random_function(rng, cfg)
        n = len(f.domain)
        res = bv_norm(f, "exhaustive", cfg.max_factor * n)
        vals = res.value_by_length
        flat = max(vals[n - 1:]) - vals[n - 1] <= 1e-9 * (1 + vals[-1])
        growing += not flat
        for L in range(2, len(vals) + 1):
            w.writerow([t, n, L, repr(vals[L - 1]), flat])
    return growing


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for name, default in vars(ScanConfig()).items():
        ap.add_argument(f"--{name.replace('_', '-')}", type=int, default=default)
    cfg = ScanConfig(**vars(ap.parse_args(argv)))
    growing = scan(cfg)
    print(f"{growing}/{cfg.trials} functions still growing after L = |sigma|", file=sys.stderr)


if __name__ == "__main__":
    main()

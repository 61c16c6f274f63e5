"""Measure the coassociativity defect of the deformed momentum addition.

For s = 0 the defect should sit at rounding level; for s != 0 it is
reported, not asserted.  Usage: python scripts/coassociativity_sweep.py [samples] [seed]
"""

import sys

import numpy as np

from ncdeform.acceptance import DIMENSIONS, float_params
from ncdeform.coalgebra_star import associativity_defect
from ncdeform.params import DeformationParams


def sweep(samples: int, seed: int):
    rng = np.random.default_rng(seed)
    worst = {"s = 0": 0.0, "a = 0": 0.0, "general": 0.0}
    for _ in range(samples):
        n = int(rng.choice(DIMENSIONS))
        p = float_params(rng, n)
        k, q, r = (rng.uniform(-0.3, 0.3, n) for _ in range(3))
        cases = {
            "s = 0": DeformationParams(n, p.a, 0),
            "a = 0": DeformationParams(n, (0,) * n, p.s),
            "general": p,
        }
        for name, params in cases.items():
            worst[name] = max(worst[name], associativity_defect(k, q, r, params))
    return worst


if __name__ == "__main__":
    samples = int(sys.argv[1]) if len(sys.argv) > 1 else 200
    seed = int(sys.argv[2]) if len(sys.argv) > 2 else 0
    for name, value in sweep(samples, seed).items():
        print(f"{name:8s} max defect {value:.3e} over {samples} samples")

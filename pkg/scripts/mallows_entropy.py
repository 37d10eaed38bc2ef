"""Mallows entropy per element against its linear coefficient, and the
concentration of Kendall distance around the reference."""
from dataclasses import dataclass

import numpy as np

from permrd.mallows import MallowsModel, entropy, sample_rim, typical_radius_constant
from permrd.metrics import kendall_tau_batch
from permrd.perm_core import task_rng


@dataclass
class Config:
    qs: tuple = (0.1, 0.3, 0.5, 0.7, 0.9)
    ns: tuple = (10, 100, 1000, 10_000)
    concentration_n: int = 200
    samples: int = 10_000
    seed: int = 0


def main(cfg=Config()):
    print("q      n      H/n       coeff     remainder")
    for q in cfg.qs:
        for n in cfg.ns:
            res = entropy(n, q)
            print(f"{q:<5}  {n:<6} {res.total / n:.6f}  {res.linear_coefficient:.6f}  "
                  f"{res.remainder:.6f}")
    n = cfg.concentration_n
    ident = np.arange(1, n + 1)[None, :]
    for q in cfg.qs:
        c0 = typical_radius_constant(q)
        draws = sample_rim(MallowsModel.centered(n, q), task_rng(cfg.seed, int(q * 100)),
                           cfg.samples)
        d = kendall_tau_batch(draws, ident)
        print(f"q={q}: c0={c0:.4f}  mean d/n={d.mean() / n:.4f}  "
              f"fraction within c0*n={(d <= c0 * n).mean():.4f}")


if __name__ == "__main__":
    main()

"""Wall-clock timings for single fits and full cross-validation.

    python scripts/timing.py --components 20 215 --threads 1 8
"""

from __future__ import annotations

import argparse
import logging
import os
import time
from dataclasses import dataclass, field

import numpy as np

from assemblage.estimators import EstimatorSpec, fit_design


@dataclass
class TimingConfig:
    n_obs: int = 240
    components: list = field(default_factory=lambda: [20, 215])
    threads: list = field(default_factory=lambda: [1, 8])
    variants: list = field(default_factory=lambda: ["albacore_comps", "albacore_ranks",
                                                    "qualbacore_ranks"])
    repeats: int = 3


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--components", type=int, nargs="+", default=[20, 215])
    p.add_argument("--threads", type=int, nargs="+", default=[1, 8])
    p.add_argument("--repeats", type=int, default=3)
    a = p.parse_args()
    logging.basicConfig(level=logging.ERROR)
    cfg = TimingConfig(components=a.components, threads=a.threads, repeats=a.repeats)
    print(f"cpu cores visible: {os.cpu_count()}")
    for K in cfg.components:
        rng = np.random.default_rng(K)
        X = rng.normal(2, 1, (cfg.n_obs, K))
        y = X @ rng.dirichlet(np.ones(K)) + rng.normal(0, 0.5, cfg.n_obs)
        c = np.full(K, 1.0 / K)
        for v in cfg.variants:
            Xv = np.sort(X, axis=1) if "ranks" in v else X
            tau = 0.5 if v.startswith("qual") else None
            one = best_of(lambda: fit_design(EstimatorSpec(v, lam=1.0, tau=tau), Xv, y, center=c),
                          cfg.repeats)
            line = f"K={K:<4} {v:<17} one lambda {one:8.4f}s"
            for n in cfg.threads:
                cv = best_of(lambda: fit_design(EstimatorSpec(v, tau=tau), Xv, y, center=c,
                                                threads=n), 1)
                line += f"  CV {n}t {cv:7.2f}s"
            print(line)


if __name__ == "__main__":
    main()

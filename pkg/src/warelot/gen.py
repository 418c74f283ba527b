"""Seeded instance generators for the test profiles.

``uniform`` draws independent cost parameters with mild capacity pressure;
``two-scale`` mixes short- and long-interval commodities; ``dense-heavy``
produces thousands of near-identical commodities whose benchmark space
lands in one dense volume class with a heavy majority, which is the regime
that exercises the randomized synchronization path end to end.
"""

from __future__ import annotations

import math

import numpy as np

from .model import Commodity, Instance

PROFILES = ("uniform", "dense-heavy", "two-scale")


def generate_instance(n: int, seed: int, profile: str = "uniform") -> Instance:
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    if profile == "uniform":
        K = rng.uniform(0.5, 4.0, n)
        H = rng.uniform(0.5, 4.0, n)
        gamma = rng.uniform(0.5, 2.0, n)
        cap = 0.6 * float(np.sum(gamma * np.sqrt(K / H)))
    elif profile == "two-scale":
        t_star = np.where(rng.random(n) < 0.5, 0.1, 10.0) * rng.uniform(0.8, 1.25, n)
        H = rng.uniform(0.5, 2.0, n)
        K = H * t_star**2
        gamma = rng.uniform(0.5, 2.0, n)
        cap = 0.5 * float(np.sum(gamma * t_star))
    elif profile == "dense-heavy":
        H = rng.uniform(0.98, 1.02, n)
        K = H.copy()  # unconstrained optimum 1 for everyone
        gamma = np.ones(n)
        cap = 0.35 * n
    else:
        raise ValueError(f"unknown profile {profile!r}; choose from {PROFILES}")
    comms = tuple(
        Commodity(id=i, K=float(K[i]), H=float(H[i]), gamma=float(gamma[i]))
        for i in range(n)
    )
    return Instance(commodities=comms, capacity=float(cap))

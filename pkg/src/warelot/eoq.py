"""Single-commodity order-interval cost: C(T) = K/T + H*T.

The function is strictly convex with unique minimizer sqrt(K/H), and the
capped variant (minimize subject to T <= cap) therefore has the closed form
min(sqrt(K/H), cap). These closed forms are the edge weights of the
class-assignment matching and the building block of every relaxation solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple


@dataclass(frozen=True)
class EoqParams:
    K: float
    H: float

    def __post_init__(self):
        if not (self.K > 0 and self.H > 0):
            raise ValueError("K and H must be positive")


class CappedEoq(NamedTuple):
    T: float
    cost: float


def eoq_cost(p: EoqParams, T: float) -> float:
    if not T > 0:
        raise ValueError("order interval must be positive")
    return p.K / T + p.H * T


def eoq_opt(p: EoqParams) -> float:
    """Unique minimizer of the interval cost."""
    return math.sqrt(p.K / p.H)


def capped_eoq(p: EoqParams, cap: float) -> CappedEoq:
    """Minimize K/T + H*T subject to T <= cap (convexity makes the
    projection of the unconstrained minimizer optimal)."""
    if not cap > 0:
        raise ValueError("cap must be positive")
    t = min(eoq_opt(p), cap)
    return CappedEoq(T=t, cost=eoq_cost(p, t))

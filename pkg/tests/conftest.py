"""Shared helpers: independent float-grid space oracle and random schedules."""

from __future__ import annotations

import random
from fractions import Fraction

import numpy as np
import pytest

from warelot.model import Commodity, CyclicPolicy, CyclicSchedule, Instance


def grid_space_oracle(instance: Instance, policy: CyclicPolicy, horizon: float, n_points: int) -> float:
    """Max total occupied space over a uniform float grid, computed from the
    raw schedule data (independent of the library's evaluator)."""
    comms = instance.by_id()
    ts = np.linspace(0.0, horizon, n_points, endpoint=False)
    total = np.zeros(n_points)
    for cid, s in policy.schedules.items():
        cyc = float(s.cycle)
        times = np.array([float(t) for t, _ in s.orders])
        cum = np.cumsum([float(q) for _, q in s.orders]) + float(s.i0)
        tm = np.mod(ts, cyc)
        idx = np.searchsorted(times, tm, side="right")
        level = np.where(idx == 0, float(s.i0), cum[np.maximum(idx, 1) - 1]) - tm
        total += comms[cid].gamma * level
    return float(total.max())


def random_zio_schedule(rng: random.Random, max_orders: int = 20, denom: int = 64) -> CyclicSchedule:
    """Random feasible zero-inventory-ordering cyclic schedule with rational
    times: gaps drawn on a 1/denom grid, first order at a random offset."""
    m = rng.randint(1, max_orders)
    gaps = [Fraction(rng.randint(1, denom), denom) for _ in range(m)]
    cycle = sum(gaps)
    offset = Fraction(rng.randint(0, denom - 1), denom)
    if offset >= cycle:
        offset = Fraction(0)
    times = []
    acc = offset
    for g in gaps:
        times.append(acc % cycle)
        acc += g
    orders = sorted(zip(times, gaps))
    # re-pair quantities so each order covers the gap to the next one
    pts = [t for t, _ in orders]
    qtys = []
    for k, t in enumerate(pts):
        nxt = pts[k + 1] if k + 1 < len(pts) else pts[0] + cycle
        qtys.append(nxt - t)
    return CyclicSchedule(cycle=cycle, orders=tuple(zip(pts, qtys)), i0=pts[0])


def random_instance(rng: random.Random, n: int, cap_scale: float = 0.6) -> Instance:
    comms = tuple(
        Commodity(
            id=i,
            K=rng.uniform(0.5, 4.0),
            H=rng.uniform(0.5, 4.0),
            gamma=rng.uniform(0.5, 2.0),
        )
        for i in range(n)
    )
    cap = cap_scale * sum(c.gamma * (c.K / c.H) ** 0.5 for c in comms)
    return Instance(commodities=comms, capacity=cap)

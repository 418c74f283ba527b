"""Budgeted interval relaxation and the classical 2-approximate policy.

The relaxation minimizes sum_i (K_i/T_i + H_i T_i) subject to
sum_i gamma_i T_i <= budget. It is solved exactly by water-filling on the
dual multiplier (T_i(lam) = sqrt(K_i / (H_i + lam*gamma_i))) and
approximately by a knapsack-style dynamic program over discretized budget
units. Halving the optimal intervals of the budget-2V relaxation yields the
classical capacity-feasible policy whose cost is at most twice the
relaxation optimum.

``sosify`` is the averaging step used to argue the relaxation may restrict
to stationary policies: any zero-inventory-ordering cyclic schedule with m
orders is replaced by m equally spaced orders of equal size, which preserves
the order count and never increases the average inventory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .eoq import EoqParams, capped_eoq, eoq_cost, eoq_opt
from .model import (
    CyclicSchedule,
    Instance,
    PolicyCertificate,
    ScheduleInfeasibleError,
    SosiVector,
    evaluate_policy,
    sosi_to_cyclic,
)

BISECT_MAX_ITER = 200
BUDGET_REL_TOL = 1e-12


@dataclass(frozen=True)
class RelaxSolution:
    intervals: dict[int, float]
    objective: float
    budget_used: float
    lam: float = 0.0

    def interval_vector(self, phases: float = 0) -> SosiVector:
        return SosiVector({cid: (Fraction(t), Fraction(phases)) for cid, t in self.intervals.items()})


def _unconstrained_use(instance: Instance) -> float:
    return sum(c.gamma * eoq_opt(EoqParams(c.K, c.H)) for c in instance.commodities)


def solve_relax_exact(instance: Instance, budget: float) -> RelaxSolution:
    """Water-filling solution of the budgeted interval relaxation.

    If the unconstrained optima fit the budget the multiplier is zero;
    otherwise lam > 0 is found by bisection so the budget binds to within
    1e-12 relative (the used budget is strictly decreasing in lam).
    """
    if not budget > 0:
        raise ValueError("budget must be positive")
    if _unconstrained_use(instance) <= budget:
        intervals = {c.id: eoq_opt(EoqParams(c.K, c.H)) for c in instance.commodities}
        obj = sum(eoq_cost(EoqParams(c.K, c.H), intervals[c.id]) for c in instance.commodities)
        return RelaxSolution(intervals, obj, sum(c.gamma * intervals[c.id] for c in instance.commodities), 0.0)

    def used(lam: float) -> float:
        return sum(
            c.gamma * math.sqrt(c.K / (c.H + lam * c.gamma)) for c in instance.commodities
        )

    lo, hi = 0.0, 1.0
    while used(hi) > budget:
        hi *= 2.0
    for _ in range(BISECT_MAX_ITER):
        mid = 0.5 * (lo + hi)
        u = used(mid)
        if abs(u - budget) <= BUDGET_REL_TOL * budget:
            lo = hi = mid
            break
        if u > budget:
            lo = mid
        else:
            hi = mid
    lam = 0.5 * (lo + hi)
    if used(lam) > budget * (1 + BUDGET_REL_TOL):
        lam = hi
    intervals = {
        c.id: math.sqrt(c.K / (c.H + lam * c.gamma)) for c in instance.commodities
    }
    obj = sum(eoq_cost(EoqParams(c.K, c.H), intervals[c.id]) for c in instance.commodities)
    return RelaxSolution(intervals, obj, used(lam), lam)


def kkt_residual(instance: Instance, sol: RelaxSolution) -> float:
    """Max relative stationarity residual |-K/T^2 + H + lam*gamma| / (H + lam*gamma)."""
    worst = 0.0
    for c in instance.commodities:
        t = sol.intervals[c.id]
        denom = c.H + sol.lam * c.gamma
        worst = max(worst, abs(-c.K / (t * t) + denom) / denom)
    return worst


def solve_relax_dp(instance: Instance, budget: float, eps: float) -> RelaxSolution:
    """(1+eps)-approximate relaxation via a knapsack-style dynamic program.

    The budget is split into U = ceil(2n/eps) units (unit size <= the
    (eps/n)*(budget/2) discretization), each commodity's consumption is
    rounded up to whole units, and a table over (commodity, units) is filled
    with the capped closed form per cell. Rounding up keeps the returned
    intervals feasible; the eps slack is one-sided.
    """
    if not budget > 0:
        raise ValueError("budget must be positive")
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    comms = instance.commodities
    n = len(comms)
    U = math.ceil(2 * n / eps)
    unit = budget / U

    INF = float("inf")
    f = np.full(U + 1, INF)
    f[0] = 0.0
    choices = []
    for c in comms:
        p = EoqParams(c.K, c.H)
        t_opt = eoq_opt(p)
        # beyond saturation the cap is inactive, so more units never help
        j_sat = min(U, max(1, math.ceil(c.gamma * t_opt / unit)))
        js = np.arange(1, j_sat + 1)
        ts = np.minimum(t_opt, js * unit / c.gamma)
        w = c.K / ts + c.H * ts
        g = np.full(U + 1, INF)
        choice = np.zeros(U + 1, dtype=np.int32)
        for j in range(1, j_sat + 1):
            cand = f[: U + 1 - j] + w[j - 1]
            seg = g[j:]
            better = cand < seg
            seg[better] = cand[better]
            choice[j:][better] = j
        f = g
        choices.append((choice, float(t_opt)))

    b = int(np.argmin(f))
    if not np.isfinite(f[b]):
        raise ValueError("dynamic program infeasible (budget too small)")
    intervals = {}
    for c, (choice, t_opt) in zip(reversed(comms), reversed(choices)):
        j = int(choice[b])
        assert j >= 1
        intervals[c.id] = min(t_opt, j * unit / c.gamma)
        b -= j
    assert b == 0
    obj = sum(eoq_cost(EoqParams(c.K, c.H), intervals[c.id]) for c in comms)
    used = sum(c.gamma * intervals[c.id] for c in comms)
    return RelaxSolution(intervals, obj, used, 0.0)


def classical_two_approx(
    instance: Instance, *, sample_grid: int = 256
) -> tuple[SosiVector, PolicyCertificate]:
    """Solve the relaxation with budget 2*capacity, halve every interval.

    The halved intervals with zero phases spike jointly at t=0 with total
    space sum(gamma*T/2) <= capacity, so the policy is capacity-feasible,
    and halving at most doubles each closed-form cost.
    """
    sol = solve_relax_exact(instance, 2.0 * instance.capacity)
    halved = SosiVector(
        {cid: (Fraction(t) / 2, Fraction(0)) for cid, t in sol.intervals.items()}
    )
    policy = sosi_to_cyclic(halved)
    cert = evaluate_policy(instance, policy, sample_grid)
    return halved, cert


def sosify(schedule: CyclicSchedule, p: EoqParams) -> CyclicSchedule:
    """Replace a zero-inventory-ordering cyclic schedule having m orders with
    m equally spaced orders of quantity cycle/m starting at time 0.

    The equal-split minimizes sum of squared order sizes at fixed count, so
    average inventory and holding cost cannot increase; the order count (and
    hence ordering cost) is unchanged. Non-ZIO inputs are rejected.
    """
    schedule.validate()
    # ZIO: stock hits zero just before every order, i.e. i0 equals the first
    # order time and every quantity equals the gap to the next order.
    times = [t for t, _ in schedule.orders]
    qtys = [q for _, q in schedule.orders]
    m = len(times)
    gaps = [times[k + 1] - times[k] for k in range(m - 1)]
    gaps.append(schedule.cycle - times[-1] + times[0])
    if schedule.i0 != times[0] or any(q != g for q, g in zip(qtys, gaps)):
        raise ValueError("sosify requires a zero-inventory-ordering schedule")

    step = schedule.cycle / m
    uniform = CyclicSchedule(
        cycle=schedule.cycle,
        orders=tuple((k * step, step) for k in range(m)),
        i0=Fraction(0),
    )
    old_cost = (p.K * m + 2 * p.H * float(schedule.integral())) / float(schedule.cycle)
    new_cost = (p.K * m + 2 * p.H * float(uniform.integral())) / float(uniform.cycle)
    assert new_cost <= old_cost * (1 + 1e-12)
    assert uniform.average_inventory() <= schedule.average_inventory()
    return uniform

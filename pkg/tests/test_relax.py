import math
import random
from fractions import Fraction

import numpy as np
import pytest

from conftest import random_instance, random_zio_schedule
from warelot.eoq import EoqParams, eoq_cost
from warelot.model import (
    Commodity,
    CyclicSchedule,
    Instance,
    SosiVector,
    check_capacity_feasible,
    evaluate_policy,
    sosi_to_cyclic,
)
from warelot.relax import (
    classical_two_approx,
    kkt_residual,
    solve_relax_dp,
    solve_relax_exact,
    sosify,
)


def one_commodity(k=1.0, h=1.0, g=1.0, cap=1.0):
    return Instance((Commodity(0, k, h, g),), cap)


def test_exact_single_uncapped():
    sol = solve_relax_exact(one_commodity(), 2.0)
    assert sol.intervals[0] == pytest.approx(1.0, rel=1e-12)
    assert sol.objective == pytest.approx(2.0, rel=1e-12)
    assert sol.lam == 0.0


def test_exact_single_capped():
    sol = solve_relax_exact(one_commodity(), 0.5)
    assert sol.intervals[0] == pytest.approx(0.5, rel=1e-9)
    assert sol.objective == pytest.approx(2.5, rel=1e-9)
    assert sol.lam > 0


def test_exact_two_identical():
    inst = Instance((Commodity(0, 1, 1, 1), Commodity(1, 1, 1, 1)), 1.0)
    sol = solve_relax_exact(inst, 1.0)
    assert sol.intervals[0] == pytest.approx(0.5, rel=1e-9)
    assert sol.intervals[1] == pytest.approx(0.5, rel=1e-9)
    assert sol.objective == pytest.approx(5.0, rel=1e-9)


def test_exact_matches_2d_grid():
    rng = random.Random(4)
    for _ in range(5):
        inst = Instance(
            (
                Commodity(0, rng.uniform(0.5, 3), rng.uniform(0.5, 3), rng.uniform(0.5, 2)),
                Commodity(1, rng.uniform(0.5, 3), rng.uniform(0.5, 3), rng.uniform(0.5, 2)),
            ),
            1.0,
        )
        budget = rng.uniform(0.5, 3)
        sol = solve_relax_exact(inst, budget)
        c0, c1 = inst.commodities
        t_hi0 = min(math.sqrt(c0.K / c0.H), budget / c0.gamma)
        t_hi1 = min(math.sqrt(c1.K / c1.H), budget / c1.gamma)
        t0 = np.linspace(t_hi0 / 2000, t_hi0, 2000)
        t1 = np.linspace(t_hi1 / 2000, t_hi1, 2000)
        g0, g1 = np.meshgrid(t0, t1, indexing="ij")
        obj = c0.K / g0 + c0.H * g0 + c1.K / g1 + c1.H * g1
        obj[c0.gamma * g0 + c1.gamma * g1 > budget] = np.inf
        grid_min = float(obj.min())
        assert abs(sol.objective - grid_min) <= 1e-4 * grid_min
        assert kkt_residual(inst, sol) <= 1e-9
        assert sol.budget_used <= budget * (1 + 1e-9)


def test_bisection_budget_binding():
    rng = random.Random(9)
    for _ in range(20):
        inst = random_instance(rng, rng.randint(1, 12))
        budget = 0.3 * sum(
            c.gamma * math.sqrt(c.K / c.H) for c in inst.commodities
        )
        sol = solve_relax_exact(inst, budget)
        assert abs(sol.budget_used - budget) <= 1e-9 * budget
        assert kkt_residual(inst, sol) <= 1e-9


def test_dp_single_matches_exact():
    rng = random.Random(5)
    for eps in (0.3, 0.1, 0.03):
        for _ in range(10):
            inst = one_commodity(rng.uniform(0.3, 4), rng.uniform(0.3, 4), rng.uniform(0.5, 2))
            budget = rng.uniform(0.2, 4)
            exact = solve_relax_exact(inst, budget)
            dp = solve_relax_dp(inst, budget, eps)
            assert dp.objective == pytest.approx(exact.objective, rel=1e-12)


def test_dp_dominance():
    rng = random.Random(6)
    for eps in (0.3, 0.1, 0.03):
        for _ in range(10):
            inst = random_instance(rng, rng.randint(2, 8))
            budget = rng.uniform(0.3, 1.2) * sum(
                c.gamma * math.sqrt(c.K / c.H) for c in inst.commodities
            )
            exact = solve_relax_exact(inst, budget)
            dp = solve_relax_dp(inst, budget, eps)
            assert dp.objective <= (1 + eps) * exact.objective * (1 + 1e-12)
            assert dp.objective >= exact.objective * (1 - 1e-12)
            assert dp.budget_used <= budget * (1 + 1e-12)


def test_dp_domain_error():
    with pytest.raises(ValueError):
        solve_relax_dp(one_commodity(), 1.0, 1.5)


def test_classical_single_examples():
    inst = one_commodity()
    sosi, cert = classical_two_approx(inst)
    t, phase = sosi.intervals[0]
    assert t == Fraction(1, 2) and phase == 0
    assert cert.total_cost == pytest.approx(2.5, rel=1e-9)
    assert float(cert.peak_space_exact) == pytest.approx(0.5, rel=1e-9)

    inst2 = one_commodity(k=4.0, h=1.0, g=1.0, cap=0.5)
    sosi2, cert2 = classical_two_approx(inst2)
    # budget 2V = 1 forces T* = 1 (below the unconstrained optimum 2)
    assert float(sosi2.intervals[0][0]) == pytest.approx(0.5, rel=1e-9)
    assert cert2.total_cost == pytest.approx(8.5, rel=1e-9)
    assert float(cert2.peak_space_exact) == pytest.approx(0.5, rel=1e-9)


def test_classical_chain_random():
    rng = random.Random(8)
    for _ in range(10):
        inst = random_instance(rng, 10)
        sosi, cert = classical_two_approx(inst)
        relax = solve_relax_exact(inst, 2.0 * inst.capacity)
        assert float(cert.peak_space_exact) <= inst.capacity * (1 + 1e-9)
        assert cert.total_cost <= 2.0 * relax.objective * (1 + 1e-9)
        assert cert.total_cost >= relax.objective * (1 - 1e-9)


def _ibar(sched):
    return sched.average_inventory()


def test_sosify_fixed_point():
    s = CyclicSchedule(Fraction(1), ((Fraction(0), Fraction(1, 2)), (Fraction(1, 2), Fraction(1, 2))), i0=0)
    out = sosify(s, EoqParams(1, 1))
    assert out.orders == s.orders and out.cycle == s.cycle


def test_sosify_example_two_orders():
    s = CyclicSchedule(
        Fraction(1), ((Fraction(0), Fraction(1, 5)), (Fraction(1, 5), Fraction(4, 5))), i0=0
    )
    assert _ibar(s) == Fraction(17, 50)  # 0.34
    out = sosify(s, EoqParams(1, 1))
    assert out.orders == ((Fraction(0), Fraction(1, 2)), (Fraction(1, 2), Fraction(1, 2)))
    assert _ibar(out) == Fraction(1, 4)


def test_sosify_example_three_orders():
    s = CyclicSchedule(
        Fraction(2),
        ((Fraction(0), Fraction(1)), (Fraction(1), Fraction(1, 2)), (Fraction(3, 2), Fraction(1, 2))),
        i0=0,
    )
    assert _ibar(s) == Fraction(3, 8)  # squared-duration oracle: (1 + 1/4 + 1/4) / (2*2)
    out = sosify(s, EoqParams(1, 1))
    assert [q for _, q in out.orders] == [Fraction(2, 3)] * 3
    assert _ibar(out) == Fraction(1, 3)


def test_sosify_never_increases_cost_or_ibar():
    rng = random.Random(10)
    for _ in range(200):
        s = random_zio_schedule(rng, max_orders=20)
        p = EoqParams(rng.uniform(0.2, 5), rng.uniform(0.2, 5))
        out = sosify(s, p)
        assert out.order_count == s.order_count
        assert _ibar(out) <= _ibar(s)
        # squared-duration oracle for the average inventory of a ZIO cycle
        oracle = sum(q * q for _, q in s.orders) / (2 * s.cycle)
        assert _ibar(s) == oracle


def test_sosify_rejects_non_zio():
    s = CyclicSchedule(Fraction(1), ((Fraction(0), Fraction(1)),), i0=Fraction(1, 4))
    with pytest.raises(ValueError):
        sosify(s, EoqParams(1, 1))

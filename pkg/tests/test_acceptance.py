"""Acceptance gate: one test per criterion, each printing a PASS line with
its runtime and asserting the stated tolerance and time budget."""

import math
import random
import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import random_instance, random_zio_schedule
from warelot.eoq import EoqParams, eoq_cost
from warelot.gadget import Sub1Couple, build_pair, verify_gadget
from warelot.gen import generate_instance
from warelot.model import (
    Commodity,
    Instance,
    SosiVector,
    check_capacity_feasible,
    evaluate_policy,
    sosi_to_cyclic,
)
from warelot.pipeline import (
    MatchingProblem,
    bmatching_bruteforce,
    bmatching_min_cost,
    desk_config,
    run_sub2,
)
from warelot.po2sync import (
    EXPECTATION_FACTOR,
    check_claim3,
    check_claim4,
    check_lemma10,
    check_lemma12,
    pair_near_far,
    po2_round_group,
)
from warelot.relax import classical_two_approx, solve_relax_dp, solve_relax_exact, sosify


class Gate:
    def __init__(self, number, description, budget_s):
        self.number = number
        self.description = description
        self.budget_s = budget_s

    def __enter__(self):
        self.t0 = time.time()
        return self

    def __exit__(self, exc_type, exc, tb):
        dt = time.time() - self.t0
        status = "PASS" if exc_type is None else "FAIL"
        print(f"\nACCEPTANCE {self.number}: {status} ({dt:.2f}s / budget {self.budget_s}s) - {self.description}")
        if exc_type is None:
            assert dt <= self.budget_s, f"criterion {self.number} exceeded its time budget: {dt:.2f}s"
        return False


def test_criterion_1_gadget_constants():
    peaks = {1: Fraction(3, 2), 2: Fraction(5, 3), 3: Fraction(27, 16),
             4: Fraction(2201, 1280), 5: Fraction(7, 4), 6: Fraction(7, 4)}
    blowups = {1: 1.0, 2: 1.0, 3: 32 / 31, 4: 32 / 31, 5: 32 / 31, 6: 33 / 32}
    with Gate(1, "pairwise schedule constants, six cases", 1.0):
        for case in range(1, 7):
            t_b = Fraction(1, 2 ** (case - 1)) if case <= 5 else Fraction(1, 32)
            a = Commodity(0, 1.0, 1.0, 1.0)
            b = Commodity(1, float(t_b) ** 2, 1.0, float(1 / t_b))
            couple = Sub1Couple(a, b, Fraction(1), t_b, eps=0.05)
            rep = verify_gadget(couple, build_pair(couple))
            assert rep.ok, rep.messages
            assert rep.measured_peak_ratio == peaks[case]
            blow = max(rep.measured_blowup_a, rep.measured_blowup_b)
            if case in (1, 2):
                assert abs(blow - 1.0) <= 1e-9
            elif case == 6:
                assert abs(blow - blowups[6]) <= 1e-9 * blowups[6]
            else:
                assert blow <= blowups[case] * (1 + 1e-9)


def test_criterion_2_rounding_identities():
    with Gate(2, "rounding expectation identities, envelope, exact ratios", 5.0):
        rep = check_claim3(trials_mean=100_000, trials_env=1_000_000, seed=20)
        assert rep["mean_ratio"]["pass"], rep["mean_ratio"]
        assert rep["mean_inverse"]["pass"], rep["mean_inverse"]
        assert rep["envelope"]["pass"], rep["envelope"]
        assert rep["power_of_two_exact"]["pass"]


def test_criterion_3_far_pair_cap():
    with Gate(3, "far-pair count cap over random heavy-band groups", 5.0):
        rep = check_claim4(eps_values=(0.1, 0.3), n_groups=1000, seed=21)
        for eps in ("0.1", "0.3"):
            assert rep[eps]["pass"], rep[eps]


def test_criterion_4_concentration():
    with Gate(4, "concentration of rounded totals at compliant group sizes", 60.0):
        rep = check_lemma10(eps=0.3, q=268, group_size=23, trials=10_000, seed=22)
        assert rep["n_heavy"] == 6164
        assert rep["failure_rate"]["pass"], rep["failure_rate"]


def test_criterion_5_classical_two_approx():
    with Gate(5, "classical halved-relaxation policy on 100 random instances", 10.0):
        rng = random.Random(23)
        for _ in range(100):
            n = rng.randint(1, 50)
            inst = random_instance(rng, n, cap_scale=rng.uniform(0.3, 1.5))
            sosi, cert = classical_two_approx(inst)
            relax = solve_relax_exact(inst, 2.0 * inst.capacity)
            assert cert.peak_space_exact is not None, "exact peak must be available"
            assert float(cert.peak_space_exact) <= inst.capacity * (1 + 1e-9)
            assert cert.total_cost <= 2.0 * relax.objective * (1 + 1e-9)
            assert cert.total_cost >= relax.objective * (1 - 1e-9)


def test_criterion_6_relaxation_solvers():
    with Gate(6, "dynamic program dominance and exact-solver grid agreement", 30.0):
        rng = random.Random(24)
        for eps in (0.3, 0.1, 0.03):
            for _ in range(100):
                inst = random_instance(rng, rng.randint(1, 10))
                budget = rng.uniform(0.3, 1.2) * sum(
                    c.gamma * math.sqrt(c.K / c.H) for c in inst.commodities
                )
                exact = solve_relax_exact(inst, budget)
                dp = solve_relax_dp(inst, budget, eps)
                assert dp.objective <= (1 + eps) * exact.objective * (1 + 1e-12)
                assert dp.budget_used <= budget * (1 + 1e-12)
        # 2-commodity grid oracle at resolution fine enough for 1e-4 agreement
        for _ in range(5):
            inst = random_instance(rng, 2)
            budget = rng.uniform(0.5, 1.5) * sum(
                c.gamma * math.sqrt(c.K / c.H) for c in inst.commodities
            )
            sol = solve_relax_exact(inst, budget)
            c0, c1 = inst.commodities
            t0 = np.linspace(1e-9, min(math.sqrt(c0.K / c0.H), budget / c0.gamma), 2000)[1:]
            t1 = np.linspace(1e-9, min(math.sqrt(c1.K / c1.H), budget / c1.gamma), 2000)[1:]
            g0, g1 = np.meshgrid(t0, t1, indexing="ij")
            obj = c0.K / g0 + c0.H * g0 + c1.K / g1 + c1.H * g1
            obj[c0.gamma * g0 + c1.gamma * g1 > budget] = np.inf
            assert abs(sol.objective - float(obj.min())) <= 1e-4 * float(obj.min())


def test_criterion_7_bmatching():
    with Gate(7, "b-matching equals brute force, 200 random draws", 10.0):
        rng = np.random.default_rng(25)
        for _ in range(200):
            n = int(rng.integers(1, 9))
            k = int(rng.integers(1, 4))
            right = tuple(float(j + 1) for j in range(k))
            weights = {(i, c): float(rng.uniform(0.1, 10)) for i in range(n) for c in right}
            while True:
                lo = [int(rng.integers(0, n + 1)) for _ in range(k)]
                hi = [int(rng.integers(lo[j], n + 1)) for j in range(k)]
                if sum(lo) <= n <= sum(hi):
                    break
            prob = MatchingProblem(
                tuple(range(n)), right, weights,
                {c: (lo[j], hi[j]) for j, c in enumerate(right)},
            )
            got = bmatching_min_cost(prob)
            want_cost, _ = bmatching_bruteforce(prob)
            got_cost = sum(weights[(i, got[i])] for i in range(n))
            assert abs(got_cost - want_cost) <= 1e-9 * max(1.0, want_cost)


def test_criterion_8_per_class_ratios():
    eps = 0.3
    with Gate(8, "per-class space bound on every draw, 500-draw mean cost ratio", 300.0):
        rep = check_lemma12(eps=eps, draws=500, class_size=6164, seed=26, evaluate_draws=2)
        assert rep["space"]["pass"], rep["space"]
        assert rep["mean_cost_ratio"]["pass"], rep["mean_cost_ratio"]
        assert rep["evaluator_cross_check"]["pass"]
        assert rep["heavy_branch_rate"] == 1.0


def test_criterion_9_end_to_end():
    with Gate(9, "end-to-end pipeline on the three generator profiles", 600.0):
        delta = 17.0 / 10000.0
        runs = [
            ("uniform", 60, 0.05, None),
            ("two-scale", 60, 0.05, None),
            ("dense-heavy", 6500, 0.3, desk_config(0.3)),
        ]
        for profile, n, eps, cfg in runs:
            inst = generate_instance(n, seed=27, profile=profile)
            rep = run_sub2(inst, eps, seed=28, config=cfg)
            # hard invariant: capacity feasibility
            feas = check_capacity_feasible(inst, rep.final_policy, certificate=rep.final_certificate)
            assert feas.feasible, profile
            # scenario consistent with the computed volume aggregates
            if rep.vbar_sparse >= (0.5 + delta) * inst.capacity:
                want = "easy_sparse"
            elif rep.vbar_dense < (0.5 - 2 * delta) * inst.capacity:
                want = "difficult_lowD"
            else:
                want = "difficult_dense"
            assert rep.scenario == want, profile
            assert rep.ratio_vs_lower_bound <= 2.05, (profile, rep.ratio_vs_lower_bound)
            assert "benchmark_classical2_standin" in rep.guarantee_flags
        assert rep.scenario == "difficult_dense"  # the dense profile exercised it
        # the oracle-benchmark path covers the easy scenario
        comms = tuple(Commodity(i, 1.0, 1.0, 1.0) for i in range(4))
        inst = Instance(comms, capacity=3.0)
        bench = sosi_to_cyclic(SosiVector(
            {0: (1, 0), 1: (1, Fraction(1, 2)), 2: (1, 0), 3: (1, Fraction(1, 2))}
        ))
        rep = run_sub2(inst, 0.05, benchmark=bench, seed=29)
        assert rep.scenario == "easy_sparse"
        assert rep.ratio_vs_lower_bound <= 2.05


def test_criterion_10_sosify():
    with Gate(10, "equal-spacing step never increases cost or average stock", 2.0):
        rng = random.Random(30)
        for _ in range(1000):
            s = random_zio_schedule(rng, max_orders=20)
            p = EoqParams(rng.uniform(0.2, 5), rng.uniform(0.2, 5))
            out = sosify(s, p)
            assert out.order_count == s.order_count
            assert out.average_inventory() <= s.average_inventory()
            cost_in = (p.K * s.order_count + 2 * p.H * float(s.integral())) / float(s.cycle)
            cost_out = (p.K * out.order_count + 2 * p.H * float(out.integral())) / float(out.cycle)
            assert cost_out <= cost_in * (1 + 1e-12)

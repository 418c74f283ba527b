"""Command-line surface: generation, solving, evaluation, and referee checks.

Exit codes: 0 on success, 1 on input errors, 2 when a claimed-constant or
Monte Carlo verification check fails. All randomness is derived from the
--seed argument (or WARELOT_SEED), and report JSON is byte-stable for a
fixed configuration.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from fractions import Fraction

from . import io as wio
from .eoq import EoqParams, eoq_cost
from .gadget import GADGET_CASES, Sub1Couple, build_pair, verify_gadget
from .gen import PROFILES, generate_instance
from .model import (
    Commodity,
    Instance,
    ScheduleInfeasibleError,
    SosiVector,
    check_capacity_feasible,
    evaluate_policy,
    sosi_to_cyclic,
)
from .pipeline import (
    PipelineConfig,
    desk_config,
    run_sub2,
)
from .po2sync import check_claim3, check_claim4, check_lemma10, check_lemma12
from .relax import classical_two_approx, solve_relax_dp, solve_relax_exact


def _default_seed() -> int:
    return int(os.environ.get("WARELOT_SEED", "0"))


def _write_json(path: str, payload) -> None:
    with open(path, "w") as fh:
        fh.write(wio.dumps_deterministic(payload))


def _cmd_gen(args) -> int:
    inst = generate_instance(args.n, args.seed, args.profile)
    wio.save_instance(args.out, inst)
    print(f"wrote {args.profile} instance with n={args.n} to {args.out}")
    return 0


def _cmd_solve(args) -> int:
    inst = wio.load_instance(args.instance)
    report: dict = {"algorithm": args.algorithm, "seed": args.seed}
    if args.algorithm == "classical2":
        sosi, cert = classical_two_approx(inst)
        policy = sosi_to_cyclic(sosi)
        relax = solve_relax_exact(inst, 2.0 * inst.capacity)
        peak = float(
            cert.peak_space_exact if cert.peak_space_exact is not None else cert.peak_space_upper
        )
        report.update(
            {
                "total_cost": cert.total_cost,
                "relaxation_objective": relax.objective,
                "cost_vs_relaxation": {
                    "measured": cert.total_cost,
                    "bound": 2.0 * relax.objective,
                    "pass": cert.total_cost <= 2.0 * relax.objective * (1 + 1e-9),
                },
                "peak_space": {
                    "measured": peak,
                    "bound": inst.capacity,
                    "pass": peak <= inst.capacity * (1 + 1e-9),
                },
            }
        )
    elif args.algorithm == "sub2":
        cfg = (
            desk_config(args.epsilon, delta=args.delta)
            if args.desk_preset
            else PipelineConfig(epsilon=args.epsilon, delta=args.delta)
        )
        if args.enumerate:
            cfg = replace(cfg, enumerate_guesses=True)
        benchmark = wio.load_policy(args.benchmark) if args.benchmark else None
        rep = run_sub2(inst, args.epsilon, benchmark=benchmark, seed=args.seed, config=cfg)
        policy = rep.final_policy
        cert = rep.final_certificate
        report.update(
            {
                "scenario": rep.scenario,
                "benchmark_source": rep.benchmark_source,
                "total_cost": cert.total_cost,
                "lower_bound": rep.lower_bound,
                "ratio_vs_lower_bound": rep.ratio_vs_lower_bound,
                "scale_factor": {
                    "applied": rep.scale_factor_applied,
                    "analytic": rep.scale_factor_analytic,
                },
                "vbar_sparse": rep.vbar_sparse,
                "vbar_dense": rep.vbar_dense,
                "guarantee_flags": list(rep.guarantee_flags),
                "class_branches": {str(k): v for k, v in rep.class_branches.items()},
                "classes": {
                    str(k): {
                        "size": len(ids),
                        "sparse": k in rep.classification.sparse,
                        "vbar": float(rep.classification.vbar[k]),
                    }
                    for k, ids in rep.classification.class_members.items()
                },
                "peak_space": {
                    "measured": float(
                        cert.peak_space_exact
                        if cert.peak_space_exact is not None
                        else cert.peak_space_upper
                    ),
                    "bound": inst.capacity,
                    "pass": True,
                },
            }
        )
        if rep.enumerate_report is not None:
            report["enumeration"] = rep.enumerate_report
    elif args.algorithm in ("relax-exact", "relax-dp"):
        budget = 2.0 * inst.capacity
        sol = (
            solve_relax_exact(inst, budget)
            if args.algorithm == "relax-exact"
            else solve_relax_dp(inst, budget, args.epsilon)
        )
        policy = sosi_to_cyclic(sol.interval_vector())
        report.update(
            {
                "objective": sol.objective,
                "budget_used": sol.budget_used,
                "budget": budget,
                "note": "relaxation solution; not necessarily capacity-feasible",
            }
        )
        cert = None
    else:
        print(f"unknown algorithm {args.algorithm}", file=sys.stderr)
        return 1

    if args.out:
        wio.save_policy(args.out, policy)
    if args.report:
        _write_json(args.report, report)
    print(json.dumps({k: v for k, v in report.items() if not isinstance(v, dict)}, default=str))
    return 0


def _cmd_eval(args) -> int:
    inst = wio.load_instance(args.instance)
    policy = wio.load_policy(args.policy)
    try:
        cert = evaluate_policy(inst, policy, args.grid)
    except ScheduleInfeasibleError as exc:
        print(f"infeasible policy: {exc}", file=sys.stderr)
        return 1
    feas = check_capacity_feasible(inst, policy, certificate=cert)
    payload = wio.certificate_to_dict(cert)
    payload["capacity_feasible"] = feas.feasible
    payload["capacity"] = inst.capacity
    if args.out:
        _write_json(args.out, payload)
    if args.trace:
        wio.write_trace_csv(args.trace, inst, policy, grid=args.grid)
    print(
        f"cost={cert.total_cost:.6g} avg_space={float(cert.avg_space):.6g} "
        f"peak={payload['peak_space_exact'] or payload['peak_space_upper']:.6g} "
        f"feasible={feas.feasible}"
    )
    return 0


def _cmd_gadget(args) -> int:
    case = args.case
    if case not in GADGET_CASES:
        print(f"case must be 1..6, got {case}", file=sys.stderr)
        return 1
    t_a = Fraction(args.t_a)
    k = case - 1 if case <= 5 else args.k
    if case == 6 and k < 5:
        print("case 6 requires k >= 5", file=sys.stderr)
        return 1
    t_b = t_a / 2**k
    a = Commodity(0, args.K_a, args.H_a, args.gamma_a)
    gamma_b = args.gamma_b if args.gamma_b is not None else args.gamma_a * float(t_a / t_b)
    b = Commodity(1, args.K_b, args.H_b, gamma_b)
    couple = Sub1Couple(a, b, t_a, t_b, eps=args.eps)
    sched = build_pair(couple)
    rep = verify_gadget(couple, sched)
    print(f"case {rep.case_id}: claimed peak ratio {rep.claimed_peak_ratio} "
          f"measured {rep.measured_peak_ratio} ({float(rep.measured_peak_ratio):.9f})")
    print(f"claimed cost blow-up {rep.claimed_cost_blowup} "
          f"measured A {rep.measured_blowup_a:.9f} B {rep.measured_blowup_b:.9f}")
    if args.emit_trace:
        inst = Instance((a, b), capacity=1.0)
        wio.write_trace_csv(args.emit_trace, inst, sched.policies, grid=args.grid)
    if not rep.ok:
        for m in rep.messages:
            print(f"FAIL: {m}", file=sys.stderr)
        return 2
    print("ok")
    return 0


def _cmd_po2(args) -> int:
    if args.check == "claim3":
        rep = check_claim3(trials_mean=args.trials, trials_env=10 * args.trials, seed=args.seed)
    elif args.check == "claim4":
        rep = check_claim4(eps_values=(0.1, args.epsilon), n_groups=args.trials, seed=args.seed)
    elif args.check == "lemma10":
        rep = check_lemma10(eps=args.epsilon, trials=args.trials, seed=args.seed)
    elif args.check == "lemma12":
        rep = check_lemma12(eps=args.epsilon, draws=args.trials, seed=args.seed,
                            class_size=args.class_size)
    else:
        print(f"unknown check {args.check}", file=sys.stderr)
        return 1
    text = wio.dumps_deterministic(rep)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    print(text, end="")
    return 0 if rep["pass"] else 2


def _cmd_verify_all(args) -> int:
    """Full referee suite: gadget constants, rounding identities, far-pair
    cap, concentration, per-class ratios, and the classical chain."""
    import numpy as np

    failures = []

    def gadget_check():
        msgs = []
        for case in range(1, 7):
            t_b = Fraction(1, 2 ** (case - 1)) if case <= 5 else Fraction(1, 32)
            a = Commodity(0, 1.0, 1.0, 1.0)
            b = Commodity(1, float(t_b) ** 2, 1.0, float(1 / t_b))
            couple = Sub1Couple(a, b, Fraction(1), t_b, eps=0.05)
            rep = verify_gadget(couple, build_pair(couple))
            status = "ok" if rep.ok else "FAIL"
            msgs.append(
                f"gadget case {case}: {status} peak {rep.measured_peak_ratio} "
                f"blowup {max(rep.measured_blowup_a, rep.measured_blowup_b):.6f}"
            )
            if not rep.ok:
                failures.append(f"gadget case {case}")
        return msgs

    scale = 1 if not args.fast else 10

    def claim3_check():
        rep = check_claim3(trials_mean=100_000 // scale, trials_env=1_000_000 // scale, seed=args.seed)
        if not rep["pass"]:
            failures.append("claim3")
        return [f"claim3: {'ok' if rep['pass'] else 'FAIL'} mean {rep['mean_ratio']['measured']:.6f}"]

    def claim4_check():
        rep = check_claim4(n_groups=1000 // scale, seed=args.seed)
        if not rep["pass"]:
            failures.append("claim4")
        return [f"claim4: {'ok' if rep['pass'] else 'FAIL'}"]

    def lemma10_check():
        rep = check_lemma10(trials=10_000 // scale, seed=args.seed)
        if not rep["pass"]:
            failures.append("lemma10")
        return [f"lemma10: {'ok' if rep['pass'] else 'FAIL'} failure rate {rep['failure_rate']['measured']:.5f}"]

    def lemma12_check():
        rep = check_lemma12(draws=100 // scale, class_size=6164, seed=args.seed, evaluate_draws=1)
        if not rep["pass"]:
            failures.append("lemma12")
        return [
            f"lemma12: {'ok' if rep['pass'] else 'FAIL'} mean cost ratio "
            f"{rep['mean_cost_ratio']['measured']:.5f} <= {rep['mean_cost_ratio']['bound']:.5f}"
        ]

    def classical_check():
        rng = np.random.default_rng(args.seed)
        ok = True
        for _ in range(20 // (2 if args.fast else 1)):
            n = int(rng.integers(1, 30))
            inst = generate_instance(n, int(rng.integers(0, 2**31)), "uniform")
            sosi, cert = classical_two_approx(inst)
            relax = solve_relax_exact(inst, 2.0 * inst.capacity)
            if float(cert.peak_space_exact) > inst.capacity * (1 + 1e-9):
                ok = False
            if not relax.objective * (1 - 1e-9) <= cert.total_cost <= 2 * relax.objective * (1 + 1e-9):
                ok = False
        if not ok:
            failures.append("classical chain")
        return [f"classical 2-approx chain: {'ok' if ok else 'FAIL'}"]

    checks = [gadget_check, claim3_check, claim4_check, lemma10_check, lemma12_check, classical_check]
    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            results = list(pool.map(lambda f: f(), checks))
    else:
        results = [f() for f in checks]
    for msgs in results:
        for m in msgs:
            print(m)
    if failures:
        print(f"verification FAILED: {', '.join(failures)}", file=sys.stderr)
        return 2
    print("all paper-claim checks passed")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="warelot", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate an instance JSON")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=_default_seed())
    g.add_argument("--profile", choices=PROFILES, default="uniform")
    g.add_argument("--out", required=True)
    g.set_defaults(func=_cmd_gen)

    s = sub.add_parser("solve", help="run a solver on an instance")
    s.add_argument("--instance", required=True)
    s.add_argument("--algorithm", choices=("classical2", "sub2", "relax-exact", "relax-dp"),
                   default="classical2")
    s.add_argument("--epsilon", type=float, default=0.05)
    s.add_argument("--delta", type=float, default=17.0 / 10000.0)
    s.add_argument("--seed", type=int, default=_default_seed())
    s.add_argument("--benchmark", help="oracle benchmark policy JSON for sub2")
    s.add_argument("--desk-preset", action="store_true",
                   help="desk-scale preset (relaxed epsilon, lower dense threshold)")
    s.add_argument("--enumerate", action="store_true",
                   help="report literal guess grids (toy instances only)")
    s.add_argument("--out", help="write the policy JSON here")
    s.add_argument("--report", help="write the report JSON here")
    s.set_defaults(func=_cmd_solve)

    e = sub.add_parser("eval", help="evaluate a policy against an instance")
    e.add_argument("--instance", required=True)
    e.add_argument("--policy", required=True)
    e.add_argument("--grid", type=int, default=512)
    e.add_argument("--out", help="write the certificate JSON here")
    e.add_argument("--trace", help="write a sampled trace CSV here")
    e.set_defaults(func=_cmd_eval)

    ga = sub.add_parser("gadget", help="build and referee a pairwise schedule")
    ga.add_argument("--case", type=int, required=True)
    ga.add_argument("--K-a", dest="K_a", type=float, default=1.0)
    ga.add_argument("--H-a", dest="H_a", type=float, default=1.0)
    ga.add_argument("--gamma-a", dest="gamma_a", type=float, default=1.0)
    ga.add_argument("--K-b", dest="K_b", type=float, default=1.0)
    ga.add_argument("--H-b", dest="H_b", type=float, default=1.0)
    ga.add_argument("--gamma-b", dest="gamma_b", type=float, default=None,
                    help="default: normalized so gamma_B * T_B = gamma_A * T_A")
    ga.add_argument("--t-a", dest="t_a", type=str, default="1")
    ga.add_argument("--k", type=int, default=5, help="exponent for case 6 (T_B = T_A / 2^k)")
    ga.add_argument("--eps", type=float, default=0.05)
    ga.add_argument("--grid", type=int, default=256)
    ga.add_argument("--emit-trace")
    ga.set_defaults(func=_cmd_gadget)

    po = sub.add_parser("po2", help="Monte Carlo referee checks for the rounding machinery")
    po.add_argument("--check", choices=("claim3", "claim4", "lemma10", "lemma12"), required=True)
    po.add_argument("--epsilon", type=float, default=0.3)
    po.add_argument("--trials", type=int, default=1000)
    po.add_argument("--seed", type=int, default=_default_seed())
    po.add_argument("--class-size", type=int, default=6164)
    po.add_argument("--out")
    po.set_defaults(func=_cmd_po2)

    v = sub.add_parser("verify-all", help="run the full paper-claims suite")
    v.add_argument("--seed", type=int, default=_default_seed())
    v.add_argument("--fast", action="store_true", help="scaled-down trial counts")
    v.add_argument("--threads", type=int, default=1)
    v.set_defaults(func=_cmd_verify_all)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (FileNotFoundError, json.JSONDecodeError, KeyError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, ScheduleInfeasibleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

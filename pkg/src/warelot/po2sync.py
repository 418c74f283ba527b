"""Randomized power-of-2 rounding and per-class policy construction.

Heavy commodities of a dense class are split into Q groups; within a group
every interval is written as T = 2^(alpha+beta) * T_min and snapped to an
exponent grid shifted by one uniform draw Theta ~ U[-1/2, 1/2]:

    T_Theta = 2^(alpha + Theta) * T_min        if Theta >= beta - 1/2
    T_Theta = 2^(alpha + Theta + 1) * T_min    otherwise

This keeps every T_Theta within [T/sqrt(2), sqrt(2)*T], makes all ratios
inside a group exact powers of 2, and inflates both E[T_Theta] and
E[1/T_Theta] by exactly 1/(sqrt(2) ln 2). Sorting each group by gamma*T and
pairing neighbours then yields mostly "near" pairs (gap below 1+eps) that
qualify as sub-1 couples for the pairwise gadget; a concentration event on
the rounded totals decides between the gadget-based policy and a uniformly
scaled fallback.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .eoq import EoqParams, eoq_cost
from .gadget import Sub1Couple, build_pair, pair_cost_values, pair_peak_value
from .model import (
    Commodity,
    CyclicPolicy,
    CyclicSchedule,
    Instance,
    PolicyCertificate,
    SosiVector,
    evaluate_policy,
    merge_policies,
    sosi_to_cyclic,
)

# expected inflation of both T and 1/T under the rounding
EXPECTATION_FACTOR = 1.0 / (math.sqrt(2.0) * math.log(2.0))
# uniform shrink applied when the concentration event fails
FALLBACK_ALPHA = 0.875 * EXPECTATION_FACTOR

_BETA_SNAP = 1e-12


def philox_rng(seed: int) -> np.random.Generator:
    """Counter-based seeded generator; spawned children give structurally
    independent per-group streams."""
    return np.random.Generator(np.random.Philox(seed))


def default_q_groups(eps: float) -> int:
    return math.ceil(20.0 * math.log(1.0 / eps) / (eps * eps))


def default_sparse_threshold(eps: float) -> float:
    return 100.0 * math.log(1.0 / eps) / eps**4


def _decompose(t_hat: float, t_min: float) -> tuple[int, float]:
    """Write t_hat = 2^(alpha+beta) * t_min with integer alpha >= 0 and
    beta in [0, 1), snapping beta to 0 near the grid to keep exact powers
    of 2 classified exactly."""
    x = math.log2(t_hat) - math.log2(t_min)
    alpha = math.floor(x)
    beta = x - alpha
    if beta > 1.0 - _BETA_SNAP:
        alpha += 1
        beta = 0.0
    elif beta < _BETA_SNAP:
        beta = 0.0
    return alpha, beta


def _round_up(beta: float, theta: float) -> int:
    return 0 if theta >= beta - 0.5 else 1


@dataclass(frozen=True)
class RoundedGroup:
    group_index: int
    members: tuple[int, ...]
    t_hat: dict[int, float]
    t_min: float
    exponents: dict[int, tuple[int, float]]
    theta: float
    base: Fraction                      # exact value of 2^theta * t_min
    rel_exponent: dict[int, int]        # T_rounded = base * 2^rel_exponent
    t_rounded: dict[int, float]

    def t_rounded_fraction(self, cid: int) -> Fraction:
        return self.base * (1 << self.rel_exponent[cid])


def po2_round_group(t_hat: dict[int, float], theta: float, group_index: int = 0) -> RoundedGroup:
    """Apply the rounding rule to one group for a fixed draw theta."""
    if not t_hat:
        raise ValueError("empty group")
    t_min = min(t_hat.values())
    base_float = 2.0**theta * t_min
    base = Fraction(base_float)
    exponents = {}
    rel = {}
    rounded = {}
    for cid, t in t_hat.items():
        alpha, beta = _decompose(t, t_min)
        e = alpha + _round_up(beta, theta)
        exponents[cid] = (alpha, beta)
        rel[cid] = e
        rounded[cid] = base_float * (2.0**e)  # exact binary scaling
    return RoundedGroup(
        group_index=group_index,
        members=tuple(t_hat.keys()),
        t_hat=dict(t_hat),
        t_min=t_min,
        exponents=exponents,
        theta=theta,
        base=base,
        rel_exponent=rel,
        t_rounded=rounded,
    )


def sample_rounded(t_hat: np.ndarray, theta: np.ndarray, t_min: Optional[np.ndarray] = None) -> np.ndarray:
    """Vectorized rounding for Monte Carlo: broadcasts t_hat against theta.
    t_min defaults to t_hat itself (beta = 0 per entry)."""
    t_hat = np.asarray(t_hat, dtype=float)
    if t_min is None:
        t_min = t_hat
    x = np.log2(t_hat) - np.log2(t_min)
    alpha = np.floor(x)
    beta = x - alpha
    snap_hi = beta > 1.0 - _BETA_SNAP
    alpha = np.where(snap_hi, alpha + 1, alpha)
    beta = np.where(snap_hi | (beta < _BETA_SNAP), 0.0, beta)
    up = (np.asarray(theta) < beta - 0.5).astype(float)
    return np.asarray(t_min) * np.exp2(alpha + np.asarray(theta) + up)


def partition_heavy(heavy_ids: Sequence[int], q: int, rng: np.random.Generator) -> list[list[int]]:
    """Seeded shuffle split into q groups of near-equal size."""
    ids = list(heavy_ids)
    if len(ids) < q:
        raise ValueError(
            f"{len(ids)} heavy commodities cannot fill q={q} groups; use a surrogate q"
        )
    order = rng.permutation(len(ids))
    shuffled = [ids[k] for k in order]
    base, extra = divmod(len(ids), q)
    groups = []
    pos = 0
    for g in range(q):
        size = base + (1 if g < extra else 0)
        groups.append(shuffled[pos : pos + size])
        pos += size
    return groups


@dataclass(frozen=True)
class PairingResult:
    near_pairs: tuple[tuple[int, int], ...]
    far_pairs: tuple[tuple[int, int], ...]
    leftover: Optional[int]


def pair_near_far(group: RoundedGroup, gamma: dict[int, float], eps: float) -> PairingResult:
    """Sort members descending by gamma * T_rounded (ties by minimum id),
    pair neighbours, and call a pair far when the left element exceeds the
    right by a factor of at least 1+eps."""
    order = sorted(group.members, key=lambda cid: (-gamma[cid] * group.t_rounded[cid], cid))
    near, far = [], []
    m = len(order)
    for k in range(0, m - 1, 2):
        i, j = order[k], order[k + 1]
        vi = gamma[i] * group.t_rounded[i]
        vj = gamma[j] * group.t_rounded[j]
        (far if vi >= (1.0 + eps) * vj else near).append((i, j))
    leftover = order[-1] if m % 2 else None
    return PairingResult(tuple(near), tuple(far), leftover)


def check_event_a(groups: Sequence[RoundedGroup], gamma: dict[int, float], eps: float) -> bool:
    """Concentration event on the rounded totals: sum(gamma*T_Theta) must not
    exceed (1+eps)/(sqrt(2) ln 2) times sum(gamma*T_hat)."""
    lhs = 0.0
    rhs = 0.0
    for g in groups:
        for cid in g.members:
            lhs += gamma[cid] * g.t_rounded[cid]
            rhs += gamma[cid] * g.t_hat[cid]
    return lhs <= (1.0 + eps) * EXPECTATION_FACTOR * rhs


# ---------------------------------------------------------------------------
# per-class policy


@dataclass(frozen=True)
class ClassPolicyResult:
    branch: str  # light_majority | heavy_event_A | heavy_fallback | ell_infinity
    members: tuple[int, ...]
    cap: float
    policy: Optional[CyclicPolicy]
    analytic_peak_upper: float
    analytic_cost: float
    space_ratio: float
    cost_ratio: float
    event_a: Optional[bool]
    q_used: Optional[int]
    flags: tuple[str, ...]
    n_near_pairs: int = 0
    n_far_pairs: int = 0
    n_leftover: int = 0
    groups: Optional[tuple[RoundedGroup, ...]] = None
    certificate: Optional[PolicyCertificate] = None


def _sosi_policy(ids, t_values) -> CyclicPolicy:
    return sosi_to_cyclic(SosiVector({cid: (Fraction(t_values[cid]), Fraction(0)) for cid in ids}))


def build_class_policy(
    commodities: dict[int, Commodity],
    members: Sequence[int],
    t_hat: dict[int, float],
    cap: float,
    eps: float,
    rng: np.random.Generator,
    *,
    is_infinite: bool = False,
    q_groups: Optional[int] = None,
    build_schedules: bool = True,
    evaluate: bool = False,
    event_budget: int = 20_000,
    theta_values: Optional[Sequence[float]] = None,
) -> ClassPolicyResult:
    """Construct the class policy and its analytic space/cost accounting.

    Branches: the infinite class and light-majority classes keep their
    stationary intervals unchanged; heavy-majority classes draw one Theta
    per group, and either synchronize near pairs through the pairwise gadget
    (when the concentration event holds) or shrink every interval by
    7/8 / (sqrt(2) ln 2). The analytic peak upper bound adds exact pair
    peaks to the stationary peaks of everything unpaired, mirroring how the
    certificate evaluator sums per-component peaks.

    ``theta_values`` overrides the random draws (diagnostics only).
    """
    members = list(members)
    if not members:
        raise ValueError("empty class")
    gamma = {cid: commodities[cid].gamma for cid in members}
    flags: list[str] = []
    base_cost = sum(
        eoq_cost(EoqParams(commodities[i].K, commodities[i].H), t_hat[i]) for i in members
    )
    for i in members:
        if gamma[i] * t_hat[i] / 2.0 > cap * (1 + 1e-9):
            raise ValueError(f"commodity {i} violates the class space cap")

    def passthrough(branch: str) -> ClassPolicyResult:
        peak = sum(gamma[i] * t_hat[i] for i in members)
        policy = _sosi_policy(members, t_hat) if build_schedules else None
        cert = None
        if policy is not None and evaluate:
            inst = Instance(tuple(commodities[i] for i in members), capacity=max(peak, 1e-300))
            cert = evaluate_policy(inst, policy, event_budget=event_budget)
        return ClassPolicyResult(
            branch=branch,
            members=tuple(members),
            cap=cap,
            policy=policy,
            analytic_peak_upper=peak,
            analytic_cost=base_cost,
            space_ratio=peak / (len(members) * cap),
            cost_ratio=1.0,
            event_a=None,
            q_used=None,
            flags=tuple(flags),
            certificate=cert,
        )

    if is_infinite:
        return passthrough("ell_infinity")

    light = [i for i in members if gamma[i] * t_hat[i] / 2.0 <= 0.75 * cap]
    heavy = [i for i in members if i not in set(light)]
    if len(light) >= len(members) / 2.0:
        return passthrough("light_majority")

    # heavy-majority: check that the grouping premise floor(|H|/Q) >= 2/eps^2
    # is satisfiable, shrinking Q if needed
    q = q_groups if q_groups is not None else default_q_groups(eps)
    need = 2.0 / (eps * eps)
    if len(heavy) < q or len(heavy) // q < need:
        q_s = int(len(heavy) * eps * eps / 2.0)
        if q_s >= 1 and len(heavy) // q_s >= need:
            if q_groups is None or q_s < q:
                flags.append("surrogate_q")
            q = q_s
        else:
            flags.append("heavy_premise_unmet")
            return passthrough("light_majority")

    groups_ids = partition_heavy(heavy, q, rng)
    if theta_values is not None:
        thetas = list(theta_values)
        if len(thetas) != q:
            raise ValueError(f"need {q} theta values, got {len(thetas)}")
    else:
        try:
            streams = rng.spawn(q)
            thetas = [float(s.uniform(-0.5, 0.5)) for s in streams]
        except AttributeError:  # older numpy: one stream, still independent draws
            thetas = [float(x) for x in rng.uniform(-0.5, 0.5, size=q)]

    rounded = [
        po2_round_group({i: t_hat[i] for i in ids}, thetas[gidx], gidx)
        for gidx, ids in enumerate(groups_ids)
    ]
    event_a = check_event_a(rounded, gamma, eps)

    if not event_a:
        scaled = {i: FALLBACK_ALPHA * t_hat[i] for i in members}
        peak = sum(gamma[i] * scaled[i] for i in members)
        cost = sum(
            eoq_cost(EoqParams(commodities[i].K, commodities[i].H), scaled[i]) for i in members
        )
        policy = _sosi_policy(members, scaled) if build_schedules else None
        cert = None
        if policy is not None and evaluate:
            inst = Instance(tuple(commodities[i] for i in members), capacity=max(peak, 1e-300))
            cert = evaluate_policy(inst, policy, event_budget=event_budget)
        return ClassPolicyResult(
            branch="heavy_fallback",
            members=tuple(members),
            cap=cap,
            policy=policy,
            analytic_peak_upper=peak,
            analytic_cost=cost,
            space_ratio=peak / (len(members) * cap),
            cost_ratio=cost / base_cost,
            event_a=False,
            q_used=q,
            flags=tuple(flags),
            groups=tuple(rounded),
            certificate=cert,
        )

    peak = 0.0
    cost = 0.0
    n_near = n_far = n_left = 0
    sub_policies: list[CyclicPolicy] = []
    singles: dict[int, float] = {}
    for grp in rounded:
        pairing = pair_near_far(grp, gamma, eps)
        n_near += len(pairing.near_pairs)
        n_far += len(pairing.far_pairs)
        group_singles = []
        for i, j in pairing.near_pairs:
            # orientation: A carries the larger rounded interval; the case
            # index is the exponent gap (structurally a power of 2)
            a_id, b_id = (i, j) if grp.rel_exponent[i] >= grp.rel_exponent[j] else (j, i)
            k = grp.rel_exponent[a_id] - grp.rel_exponent[b_id]
            case_id = k + 1 if k <= 4 else 6
            ta, tb = grp.t_rounded[a_id], grp.t_rounded[b_id]
            pk, _ = pair_peak_value(case_id, gamma[a_id] * ta, gamma[b_id] * tb)
            peak += pk
            ca, cb = pair_cost_values(
                case_id,
                EoqParams(commodities[a_id].K, commodities[a_id].H), ta,
                EoqParams(commodities[b_id].K, commodities[b_id].H), tb,
            )
            cost += ca + cb
            if build_schedules:
                couple = Sub1Couple(
                    commodities[a_id], commodities[b_id],
                    grp.t_rounded_fraction(a_id), grp.t_rounded_fraction(b_id), eps,
                )
                sched = build_pair(couple)
                assert sched.case_id == case_id
                sub_policies.append(sched.policies)
        for i, j in pairing.far_pairs:
            group_singles.extend((i, j))
        if pairing.leftover is not None:
            group_singles.append(pairing.leftover)
            n_left += 1
        for i in group_singles:
            t = grp.t_rounded[i]
            peak += gamma[i] * t
            cost += eoq_cost(EoqParams(commodities[i].K, commodities[i].H), t)
            singles[i] = t
        if build_schedules and group_singles:
            sub_policies.append(_sosi_policy(group_singles, {i: grp.t_rounded[i] for i in group_singles}))
    for i in light:
        peak += gamma[i] * t_hat[i]
        cost += eoq_cost(EoqParams(commodities[i].K, commodities[i].H), t_hat[i])
    if build_schedules and light:
        sub_policies.append(_sosi_policy(light, t_hat))

    policy = merge_policies(*sub_policies) if build_schedules else None
    cert = None
    if policy is not None and evaluate:
        inst = Instance(tuple(commodities[i] for i in members), capacity=max(peak, 1e-300))
        cert = evaluate_policy(inst, policy, event_budget=event_budget)
    return ClassPolicyResult(
        branch="heavy_event_A",
        members=tuple(members),
        cap=cap,
        policy=policy,
        analytic_peak_upper=peak,
        analytic_cost=cost,
        space_ratio=peak / (len(members) * cap),
        cost_ratio=cost / base_cost,
        event_a=True,
        q_used=q,
        flags=tuple(flags),
        n_near_pairs=n_near,
        n_far_pairs=n_far,
        n_leftover=n_left,
        groups=tuple(rounded),
        certificate=cert,
    )


# ---------------------------------------------------------------------------
# Monte Carlo referee checks (CLI `po2 --check ...` and the acceptance gate)


def make_heavy_band(n: int, rng: np.random.Generator, cap: float = 1.0):
    """Intervals whose stationary space gamma*T/2 sits in the heavy band
    (3/4, 1] of the cap; gamma fixed to 1."""
    v = rng.uniform(0.75, 1.0, size=n) * cap
    v = np.nextafter(v, np.inf)  # open lower endpoint
    return 2.0 * v  # gamma = 1 so t_hat = 2v


def check_claim3(trials_mean: int = 100_000, trials_env: int = 1_000_000, seed: int = 0) -> dict:
    """Expectation identities (3-sigma), the [T/sqrt2, sqrt2 T] envelope on
    every sample, and exactness of power-of-2 ratios within a group."""
    rng = philox_rng(seed)
    t_hat = 1.0
    theta = rng.uniform(-0.5, 0.5, size=trials_mean)
    t_round = sample_rounded(np.full(trials_mean, t_hat), theta)
    c = EXPECTATION_FACTOR
    mean_t = float(t_round.mean())
    se_t = float(t_round.std(ddof=1) / math.sqrt(trials_mean))
    inv = 1.0 / t_round
    mean_inv = float(inv.mean())
    se_inv = float(inv.std(ddof=1) / math.sqrt(trials_mean))

    # envelope over random t_hat groups with nontrivial beta
    theta_e = rng.uniform(-0.5, 0.5, size=trials_env)
    th = rng.uniform(0.5, 8.0, size=trials_env)
    tmin = th * rng.uniform(0.25, 1.0, size=trials_env)
    rounded = sample_rounded(th, theta_e, t_min=tmin)
    ratio = rounded / th
    env_ok = bool(
        np.all(ratio >= 2 ** -0.5 * (1 - 1e-9)) and np.all(ratio <= 2 ** 0.5 * (1 + 1e-9))
    )

    # exact ratios: fractions within a rounded group differ by powers of 2
    grp = po2_round_group({i: float(x) for i, x in enumerate(rng.uniform(0.5, 8.0, size=16))}, 0.31337)
    exact_ok = True
    f0 = grp.t_rounded_fraction(0)
    for cid in grp.members:
        r = grp.t_rounded_fraction(cid) / f0
        n_, d_ = r.numerator, r.denominator
        if (n_ & (n_ - 1)) or (d_ & (d_ - 1)):
            exact_ok = False

    return {
        "mean_ratio": {"measured": mean_t / t_hat, "bound": c, "tol": 3 * se_t, "pass": abs(mean_t / t_hat - c) <= 3 * se_t},
        "mean_inverse": {"measured": mean_inv * t_hat, "bound": c, "tol": 3 * se_inv, "pass": abs(mean_inv * t_hat - c) <= 3 * se_inv},
        "envelope": {"measured": float(ratio.min()), "bound": 2 ** -0.5, "upper": float(ratio.max()), "pass": env_ok},
        "power_of_two_exact": {"pass": exact_ok},
        "pass": bool(
            abs(mean_t / t_hat - c) <= 3 * se_t
            and abs(mean_inv * t_hat - c) <= 3 * se_inv
            and env_ok
            and exact_ok
        ),
    }


def check_claim4(eps_values=(0.1, 0.3), n_groups: int = 1000, seed: int = 0) -> dict:
    """Far-pair count over random heavy-band groups never exceeds 11/(10 eps)."""
    rng = philox_rng(seed)
    out = {}
    ok_all = True
    for eps in eps_values:
        worst = 0
        bound = 11.0 / (10.0 * eps)
        for _ in range(n_groups):
            size = int(rng.integers(20, 120))
            t_hat = {i: float(t) for i, t in enumerate(make_heavy_band(size, rng))}
            grp = po2_round_group(t_hat, float(rng.uniform(-0.5, 0.5)))
            pairing = pair_near_far(grp, {i: 1.0 for i in t_hat}, eps)
            worst = max(worst, len(pairing.far_pairs))
        ok = worst <= bound
        ok_all = ok_all and ok
        out[str(eps)] = {"measured": worst, "bound": bound, "pass": ok}
    out["pass"] = bool(ok_all)
    return out


def check_lemma10(
    eps: float = 0.3,
    q: Optional[int] = None,
    group_size: Optional[int] = None,
    trials: int = 10_000,
    seed: int = 0,
    chunk: int = 256,
) -> dict:
    """Empirical failure probability of the concentration event at compliant
    group sizes stays within eps/10 plus Monte Carlo error."""
    rng = philox_rng(seed)
    q = q if q is not None else default_q_groups(eps)
    group_size = group_size if group_size is not None else math.ceil(2.0 / eps**2)
    n = q * group_size
    t_hat = make_heavy_band(n, rng)
    group_idx = np.repeat(np.arange(q), group_size)
    # per-group beta decomposition
    beta = np.empty(n)
    for g in range(q):
        sel = group_idx == g
        tg = t_hat[sel]
        x = np.log2(tg) - np.log2(tg.min())
        b = x - np.floor(x)
        b[b > 1.0 - _BETA_SNAP] = 0.0
        b[b < _BETA_SNAP] = 0.0
        beta[sel] = b
    v = t_hat  # gamma = 1
    rhs = (1.0 + eps) * EXPECTATION_FACTOR * v.sum()

    fails = 0
    done = 0
    while done < trials:
        m = min(chunk, trials - done)
        theta = rng.uniform(-0.5, 0.5, size=(m, q))
        th = theta[:, group_idx]
        up = (th < beta - 0.5).astype(float)
        lhs = (v * np.exp2(th - beta + up)).sum(axis=1)
        fails += int((lhs > rhs).sum())
        done += m
    p_hat = fails / trials
    se = math.sqrt(max(p_hat * (1 - p_hat), 1e-12) / trials)
    bound = eps / 10.0 + 3.0 * se
    return {
        "failure_rate": {"measured": p_hat, "bound": bound, "pass": p_hat <= bound},
        "q": q,
        "group_size": group_size,
        "n_heavy": n,
        "trials": trials,
        "pass": bool(p_hat <= bound),
    }


def check_lemma12(
    eps: float = 0.3,
    draws: int = 500,
    class_size: int = 6164,
    seed: int = 0,
    evaluate_draws: int = 2,
    q: Optional[int] = None,
) -> dict:
    """Per-draw space bound and mean cost ratio of the heavy-class policy.

    Every draw must satisfy the almost-sure space bound
    (1+6 eps) * (7/4)/(sqrt 2 ln 2) * |class| * cap; the mean measured cost
    ratio must stay within the expectation bound plus 3 standard errors.
    A few draws additionally construct the exact schedules and cross-check
    the analytic accounting against the evaluator.
    """
    rng = philox_rng(seed)
    cap = 1.0
    t_hat_arr = make_heavy_band(class_size, rng)
    commodities = {}
    t_hat = {}
    for i, t in enumerate(t_hat_arr):
        h = float(rng.uniform(0.5, 2.0))
        r = float(rng.uniform(0.25, 1.0))
        commodities[i] = Commodity(id=i, K=h * t * t * r, H=h, gamma=1.0)
        t_hat[i] = float(t)
    members = list(range(class_size))

    space_bound = (1 + 6 * eps) * (7.0 / 4.0) * EXPECTATION_FACTOR * class_size * cap
    cost_bound = (1 + 2 * eps / 5) * (32.0 / 31.0) * EXPECTATION_FACTOR

    ratios = []
    space_ok = True
    worst_space = 0.0
    n_event_a = 0
    n_heavy_branch = 0
    cross_ok = True
    for d in range(draws):
        res = build_class_policy(
            commodities, members, t_hat, cap, eps, rng, q_groups=q,
            build_schedules=(d < evaluate_draws), evaluate=(d < evaluate_draws),
        )
        if res.branch in ("heavy_event_A", "heavy_fallback"):
            n_heavy_branch += 1
        ratios.append(res.cost_ratio)
        worst_space = max(worst_space, res.analytic_peak_upper)
        if res.analytic_peak_upper > space_bound * (1 + 1e-9):
            space_ok = False
        if res.event_a:
            n_event_a += 1
        if res.certificate is not None:
            measured = float(res.certificate.peak_space_upper)
            if measured > res.analytic_peak_upper * (1 + 1e-9):
                cross_ok = False
            if abs(res.certificate.total_cost - res.analytic_cost) > 1e-6 * res.analytic_cost:
                cross_ok = False
    mean_ratio = float(np.mean(ratios))
    se = float(np.std(ratios, ddof=1) / math.sqrt(draws))
    ok_cost = mean_ratio <= cost_bound + 3 * se
    heavy_ok = n_heavy_branch == draws
    return {
        "space": {"measured": worst_space, "bound": space_bound, "pass": space_ok},
        "mean_cost_ratio": {"measured": mean_ratio, "bound": cost_bound, "tol": 3 * se, "pass": ok_cost},
        "event_a_rate": n_event_a / draws,
        "heavy_branch_rate": n_heavy_branch / draws,
        "evaluator_cross_check": {"pass": cross_ok},
        "draws": draws,
        "class_size": class_size,
        "pass": bool(space_ok and ok_cost and cross_ok and heavy_ok),
    }

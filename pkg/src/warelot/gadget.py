"""Pairwise synchronization schedules for sub-1 couples.

A sub-1 couple is two commodities whose stationary intervals have a ratio
that is an exact power of 2 and whose peak space usages gamma*T are within a
(1 +/- eps) factor. Interleaving their cycles (six explicit constructions,
indexed by the interval ratio) caps the joint space peak at 7/8 of the sum
of the individual peaks while inflating either cost by at most 32/31 — a
strictly better space-cost tradeoff than any per-commodity rescaling can
give.

The constructions are loaded from a rational-constant table and
cross-checked at import: B-order lengths must tile the joint cycle, cost
weights must sum to one, and the tabulated peak candidates are the order
epochs at which the analytic peak formula is evaluated. ``verify_gadget``
re-derives every constant with the exact evaluator.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from typing import Optional, Union

from .eoq import EoqParams, eoq_cost
from .model import (
    Commodity,
    CyclicPolicy,
    CyclicSchedule,
    Instance,
    evaluate_policy,
)

Rational = Union[int, float, Fraction]

CASE_IDS = (1, 2, 3, 4, 5, 6)


class NotPowerOfTwoError(ValueError):
    pass


@dataclass(frozen=True)
class CaseSpec:
    case_id: int
    peak_ratio: Fraction
    cost_blowup: Fraction
    cycle_scale: Fraction          # joint cycle, units of T_A
    a_scale: Fraction              # A cycle and order size, units of T_A
    a_order_up_to: bool            # True: A's seam order restores full T_A
    b_offset: Fraction             # start of the B chain, units of T_A
    b_lengths: Optional[tuple[Fraction, ...]]   # units of T_B (cases 1-5)
    b_segments: Optional[tuple[tuple[Fraction, Fraction], ...]]  # (cycle frac, scale)
    peak_epochs: tuple[tuple[Fraction, Fraction, Fraction], ...]  # (t, cA, cB)
    b_cost_weights: tuple[tuple[Fraction, Fraction], ...]         # (frac, scale)


def _load_cases() -> dict[int, CaseSpec]:
    raw = json.loads(resources.files("warelot.data").joinpath("gadget_cases.json").read_text())
    out = {}
    for cid_s, d in raw.items():
        cid = int(cid_s)
        fr = lambda p: Fraction(p[0], p[1])
        spec = CaseSpec(
            case_id=cid,
            peak_ratio=fr(d["peak_ratio"]),
            cost_blowup=fr(d["cost_blowup"]),
            cycle_scale=fr(d["cycle_scale"]),
            a_scale=fr(d["a_scale"]),
            a_order_up_to=bool(d["a_order_up_to"]),
            b_offset=fr(d["b_offset"]),
            b_lengths=None if d["b_lengths"] is None else tuple(fr(p) for p in d["b_lengths"]),
            b_segments=None if d["b_segments"] is None else tuple((fr(p[0]), fr(p[1])) for p in d["b_segments"]),
            peak_epochs=tuple((fr(e[0]), fr(e[1]), fr(e[2])) for e in d["peak_epochs"]),
            b_cost_weights=tuple((fr(p[0]), fr(p[1])) for p in d["b_cost_weights"]),
        )
        # cross-checks: lengths tile the cycle, weights sum to one
        if spec.b_lengths is not None:
            t_b = Fraction(1, 2 ** (cid - 1))
            assert sum(spec.b_lengths) * t_b == spec.cycle_scale, f"case {cid}: lengths do not tile"
        if spec.b_segments is not None:
            assert sum(f for f, _ in spec.b_segments) == 1, f"case {cid}: segments do not tile"
        assert sum(f for f, _ in spec.b_cost_weights) == 1, f"case {cid}: cost weights"
        out[cid] = spec
    return out


GADGET_CASES: dict[int, CaseSpec] = _load_cases()


def _power_of_two_exponent(ratio: Fraction) -> int:
    n, d = ratio.numerator, ratio.denominator
    if n & (n - 1) or d & (d - 1):
        raise NotPowerOfTwoError(f"interval ratio {ratio} is not an integer power of 2")
    return n.bit_length() - d.bit_length()


def classify_case(t_a: Rational, t_b: Rational) -> int:
    """Case index for a couple with T_B <= T_A: ratios 1, 2, 4, 8, 16 map to
    cases 1-5; any larger power of 2 is case 6."""
    ta, tb = Fraction(t_a), Fraction(t_b)
    if tb > ta:
        raise ValueError("classify_case expects T_B <= T_A")
    k = _power_of_two_exponent(ta / tb)
    return k + 1 if k <= 4 else 6


@dataclass(frozen=True)
class Sub1Couple:
    commodity_a: Commodity
    commodity_b: Commodity
    t_a: Fraction
    t_b: Fraction
    eps: float

    def __post_init__(self):
        object.__setattr__(self, "t_a", Fraction(self.t_a))
        object.__setattr__(self, "t_b", Fraction(self.t_b))
        if not 0 < self.eps < 1:
            raise ValueError("eps must lie in (0, 1)")
        _power_of_two_exponent(self.t_a / self.t_b)
        va = Fraction(self.commodity_a.gamma) * self.t_a
        vb = Fraction(self.commodity_b.gamma) * self.t_b
        lo, hi = min(va, vb), max(va, vb)
        if float(hi) > float(lo) * (1 + self.eps) * (1 + 1e-12):
            raise ValueError(
                f"gamma*T mismatch {float(hi / lo):.6f} exceeds 1+eps={1 + self.eps}"
            )

    def oriented(self) -> "Sub1Couple":
        """Swap roles so that T_B <= T_A."""
        if self.t_b <= self.t_a:
            return self
        return Sub1Couple(self.commodity_b, self.commodity_a, self.t_b, self.t_a, self.eps)


@dataclass(frozen=True)
class GadgetSchedule:
    case_id: int
    policies: CyclicPolicy
    claimed_peak_ratio: Fraction
    claimed_cost_blowup: Fraction
    a_id: int
    b_id: int
    t_a: Fraction
    t_b: Fraction


def _build_a_schedule(spec: CaseSpec, t_a: Fraction) -> CyclicSchedule:
    cycle = spec.a_scale * t_a
    i0 = (1 - spec.a_scale) * t_a if spec.a_order_up_to else Fraction(0)
    return CyclicSchedule(cycle=cycle, orders=((Fraction(0), cycle),), i0=i0)


def _b_order_lengths(spec: CaseSpec, t_a: Fraction, t_b: Fraction) -> list[Fraction]:
    if spec.b_lengths is not None:
        return [l * t_b for l in spec.b_lengths]
    lengths = []
    cycle = spec.cycle_scale * t_a
    for frac, scale in spec.b_segments:
        seg = frac * cycle
        qty = scale * t_b
        count = seg / qty
        if count.denominator != 1:
            raise ValueError(
                f"case {spec.case_id}: segment does not tile with T_B={t_b} (count {count})"
            )
        lengths.extend([qty] * count.numerator)
    return lengths


def _build_b_schedule(spec: CaseSpec, t_a: Fraction, t_b: Fraction) -> CyclicSchedule:
    cycle = spec.cycle_scale * t_a
    lengths = _b_order_lengths(spec, t_a, t_b)
    t = spec.b_offset * t_a
    orders = []
    for q in lengths:
        orders.append((t % cycle, q))
        t += q
    orders.sort()
    # ZIO chain on the circle: the stock before time 0 covers until the first order
    return CyclicSchedule(cycle=cycle, orders=tuple(orders), i0=orders[0][0])


def build_pair(couple: Sub1Couple) -> GadgetSchedule:
    """Emit the exact joint schedule of the classified case, scaled to the
    couple's actual T_A."""
    c = couple.oriented()
    case_id = classify_case(c.t_a, c.t_b)
    spec = GADGET_CASES[case_id]
    sched_a = _build_a_schedule(spec, c.t_a)
    sched_b = _build_b_schedule(spec, c.t_a, c.t_b)
    policy = CyclicPolicy({c.commodity_a.id: sched_a, c.commodity_b.id: sched_b})
    return GadgetSchedule(
        case_id=case_id,
        policies=policy,
        claimed_peak_ratio=spec.peak_ratio,
        claimed_cost_blowup=spec.cost_blowup,
        a_id=c.commodity_a.id,
        b_id=c.commodity_b.id,
        t_a=c.t_a,
        t_b=c.t_b,
    )


def pair_peak_value(case_id: int, a: Fraction, b: Fraction):
    """Exact joint peak of the case-`case_id` schedule when A and B carry
    peak space a = gamma_A*T_A and b = gamma_B*T_B. Returns (value, epoch)."""
    spec = GADGET_CASES[case_id]
    best, best_t = None, None
    for t, ca, cb in spec.peak_epochs:
        v = ca * a + cb * b
        if best is None or v > best:
            best, best_t = v, t
    return best, best_t


def pair_cost_values(case_id: int, pa: EoqParams, t_a: float, pb: EoqParams, t_b: float):
    """Analytic long-run costs (C_A, C_B) of the case schedule, via the
    per-segment scaling identity C = sum(frac * C_EOQ(scale*T))."""
    spec = GADGET_CASES[case_id]
    if spec.a_order_up_to:
        s = float(spec.a_scale)
        cost_a = pa.K / (s * t_a) + (2 - s) * pa.H * t_a
    else:
        cost_a = eoq_cost(pa, float(spec.a_scale) * t_a)
    cost_b = sum(float(f) * eoq_cost(pb, float(s) * t_b) for f, s in spec.b_cost_weights)
    return cost_a, cost_b


@dataclass(frozen=True)
class GadgetReport:
    ok: bool
    case_id: int
    measured_peak_ratio: Fraction
    claimed_peak_ratio: Fraction
    measured_blowup_a: float
    measured_blowup_b: float
    claimed_cost_blowup: Fraction
    normalized: bool
    peak_epoch: Optional[Fraction]
    messages: tuple[str, ...]


def verify_gadget(couple: Sub1Couple, schedule: GadgetSchedule, tol: float = 1e-9) -> GadgetReport:
    """Referee the claimed constants with the exact evaluator.

    Under the exact normalization gamma_A*T_A == gamma_B*T_B the measured
    peak ratio must equal the case constant as a rational number; otherwise
    it must stay within (1+eps) of it. Cost blow-ups must stay within the
    claimed bound either way.
    """
    c = couple.oriented()
    inst = Instance((c.commodity_a, c.commodity_b), capacity=1.0)
    n_orders = sum(s.order_count for s in schedule.policies.schedules.values())
    cert = evaluate_policy(
        inst, schedule.policies, sample_grid=64, event_budget=max(4 * n_orders + 16, 1024)
    )
    assert cert.peak_space_exact is not None

    va = Fraction(c.commodity_a.gamma) * c.t_a
    vb = Fraction(c.commodity_b.gamma) * c.t_b
    denom = (va + vb) / 2  # = gamma_A*Ibar(T_A) + gamma_B*Ibar(T_B)
    ratio = cert.peak_space_exact / denom
    normalized = va == vb

    blow_a = cert.per_commodity[c.commodity_a.id].long_run_cost / eoq_cost(
        EoqParams(c.commodity_a.K, c.commodity_a.H), float(c.t_a)
    )
    blow_b = cert.per_commodity[c.commodity_b.id].long_run_cost / eoq_cost(
        EoqParams(c.commodity_b.K, c.commodity_b.H), float(c.t_b)
    )

    msgs = []
    if normalized:
        if ratio != schedule.claimed_peak_ratio:
            msgs.append(
                f"peak ratio {ratio} != claimed {schedule.claimed_peak_ratio}"
            )
    else:
        bound = float(schedule.claimed_peak_ratio) * (1 + c.eps) * (1 + tol)
        if float(ratio) > bound:
            msgs.append(f"peak ratio {float(ratio)} exceeds (1+eps) slack bound {bound}")
    bound = float(schedule.claimed_cost_blowup) * (1 + tol)
    if blow_a > bound:
        msgs.append(f"A cost blow-up {blow_a} exceeds {bound}")
    if blow_b > bound:
        msgs.append(f"B cost blow-up {blow_b} exceeds {bound}")

    # analytic formulas must agree with the evaluator
    apeak, _ = pair_peak_value(schedule.case_id, va, vb)
    if apeak != cert.peak_space_exact:
        msgs.append(f"analytic peak {apeak} != measured {cert.peak_space_exact}")
    ca, cb = pair_cost_values(
        schedule.case_id,
        EoqParams(c.commodity_a.K, c.commodity_a.H), float(c.t_a),
        EoqParams(c.commodity_b.K, c.commodity_b.H), float(c.t_b),
    )
    if abs(ca - cert.per_commodity[c.commodity_a.id].long_run_cost) > tol * max(1.0, ca):
        msgs.append(f"analytic A cost {ca} != measured")
    if abs(cb - cert.per_commodity[c.commodity_b.id].long_run_cost) > tol * max(1.0, cb):
        msgs.append(f"analytic B cost {cb} != measured")

    return GadgetReport(
        ok=not msgs,
        case_id=schedule.case_id,
        measured_peak_ratio=ratio,
        claimed_peak_ratio=schedule.claimed_peak_ratio,
        measured_blowup_a=blow_a,
        measured_blowup_b=blow_b,
        claimed_cost_blowup=schedule.claimed_cost_blowup,
        normalized=normalized,
        peak_epoch=cert.peak_epoch,
        messages=tuple(msgs),
    )

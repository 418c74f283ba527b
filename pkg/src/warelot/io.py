"""Serialization: instance/policy JSON, certificates, and trace CSV.

Rationals are encoded as [numerator, denominator] pairs so policies round
trip exactly; floats are written with 17 significant digits.
"""

from __future__ import annotations

import csv
import json
from fractions import Fraction
from typing import Any

from .model import (
    Commodity,
    CyclicPolicy,
    CyclicSchedule,
    Instance,
    PolicyCertificate,
)


def _enc_float(x: float):
    return float(f"{x:.17g}")


def _enc(obj: Any) -> Any:
    if isinstance(obj, Fraction):
        return [obj.numerator, obj.denominator]
    if isinstance(obj, float):
        return _enc_float(obj)
    if isinstance(obj, dict):
        return {str(k): _enc(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_enc(v) for v in obj]
    return obj


def dumps_deterministic(payload: Any) -> str:
    """Stable JSON text: sorted keys, 17-significant-digit floats."""
    return json.dumps(_enc(payload), sort_keys=True, indent=2) + "\n"


def instance_to_dict(instance: Instance) -> dict:
    return {
        "capacity": instance.capacity,
        "commodities": [
            {"id": c.id, "K": c.K, "H": c.H, "gamma": c.gamma}
            for c in instance.commodities
        ],
    }


def instance_from_dict(d: dict) -> Instance:
    comms = tuple(
        Commodity(id=int(c["id"]), K=float(c["K"]), H=float(c["H"]), gamma=float(c["gamma"]))
        for c in d["commodities"]
    )
    return Instance(commodities=comms, capacity=float(d["capacity"]))


def policy_to_dict(policy: CyclicPolicy) -> dict:
    schedules = {}
    for cid, s in policy.schedules.items():
        schedules[str(cid)] = {
            "cycle": [s.cycle.numerator, s.cycle.denominator],
            "orders": [
                [t.numerator, t.denominator, q.numerator, q.denominator]
                for t, q in s.orders
            ],
            "i0": [s.i0.numerator, s.i0.denominator],
        }
    return {"schedules": schedules}


def policy_from_dict(d: dict) -> CyclicPolicy:
    schedules = {}
    for cid, sd in d["schedules"].items():
        cycle = Fraction(int(sd["cycle"][0]), int(sd["cycle"][1]))
        orders = tuple(
            (Fraction(int(a), int(b)), Fraction(int(c), int(e)))
            for a, b, c, e in sd["orders"]
        )
        i0 = Fraction(int(sd["i0"][0]), int(sd["i0"][1]))
        schedules[int(cid)] = CyclicSchedule(cycle=cycle, orders=orders, i0=i0)
    return CyclicPolicy(schedules)


def certificate_to_dict(cert: PolicyCertificate) -> dict:
    return {
        "total_cost": cert.total_cost,
        "avg_space": float(cert.avg_space),
        "peak_space_exact": None if cert.peak_space_exact is None else float(cert.peak_space_exact),
        "peak_space_upper": float(cert.peak_space_upper),
        "peak_space_sampled_lower": cert.peak_space_sampled_lower,
        "peak_epoch": None if cert.peak_epoch is None else [cert.peak_epoch.numerator, cert.peak_epoch.denominator],
        "components": cert.components,
        "per_commodity": {
            str(cid): {
                "avg_inventory": float(st.avg_inventory),
                "order_rate": float(st.order_rate),
                "long_run_cost": st.long_run_cost,
            }
            for cid, st in cert.per_commodity.items()
        },
    }


def load_instance(path: str) -> Instance:
    with open(path) as fh:
        return instance_from_dict(json.load(fh))


def save_instance(path: str, instance: Instance) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_deterministic(instance_to_dict(instance)))


def load_policy(path: str) -> CyclicPolicy:
    with open(path) as fh:
        return policy_from_dict(json.load(fh))


def save_policy(path: str, policy: CyclicPolicy) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_deterministic(policy_to_dict(policy)))


def write_trace_csv(path: str, instance: Instance, policy: CyclicPolicy, grid: int = 256) -> None:
    """Sample inventory levels at grid points over one reference horizon."""
    from .model import hyperperiod

    comms = instance.by_id()
    h = hyperperiod(policy, 10_000)
    horizon = h if h is not None else max(s.cycle for s in policy.schedules.values())
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "commodity_id", "inventory", "total_space"])
        for k in range(grid):
            t = horizon * k / grid
            total = sum(
                comms[cid].gamma * float(s.inventory_at(t))
                for cid, s in policy.schedules.items()
            )
            for cid, s in policy.schedules.items():
                writer.writerow(
                    [f"{float(t):.17g}", cid, f"{float(s.inventory_at(t)):.17g}", f"{total:.17g}"]
                )

"""Naive reference implementation for cross-checking the engine on tiny inputs.

Everything here works on plain lists, walks the year hour by hour and finds the
peak rate by solving the revenue equation numerically (secant steps on the
income function), sharing no code with the vectorised engine.
"""

from __future__ import annotations

import datetime as dt
import math
import random
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Sequence

from .classification import DesignKind, DesignSpec
from .dataset import CategoryKey, CategoryRecord, Dataset, SystemLoad
from .errors import GridTariffError
from .scenarios import ScenarioSpec, run_scenario
from .solver import SolverConfig

MAX_ORACLE_HOURS = 744
MAX_ORACLE_CELLS = 50_000


class OracleInfeasible(Exception):
    pass


@dataclass
class OracleOutcome:
    base_rate: float
    peak_rate: float
    bills: dict[str, tuple[float, float, float]]  # label -> (flat, design, delta)


def _top_hours(load: Sequence[float], fraction: float) -> set[int]:
    T = len(load)
    n = int((Decimal(fraction) * T).quantize(Decimal(1), rounding=ROUND_HALF_UP))
    ranked = sorted(range(T), key=lambda t: (-load[t], t))
    return set(ranked[:n])


def _tou_hours(year: int, T: int, start: int, end: int, months: Sequence[int]) -> set[int]:
    origin = dt.datetime(year, 1, 1)
    year_hours = ((dt.datetime(year + 1, 1, 1) - origin).days) * 24
    if T != year_hours:
        raise OracleInfeasible("TOU requires a full calendar year")
    out = set()
    for t in range(T):
        stamp = origin + dt.timedelta(hours=t)
        if stamp.month in months and start <= stamp.hour < end:
            out.add(t)
    return out


def brute_force(
    profiles: dict[str, list[float]],
    counts: dict[str, int],
    system_load: list[float],
    kind: str,
    *,
    threshold: float | None = None,
    trigger: float | None = None,
    gt_base: float = 18.25,
    f_recov: float = 0.95,
    gt_flat: float | None = None,
    year: int = 2017,
) -> OracleOutcome:
    gt_flat = gt_base if gt_flat is None else gt_flat
    if kind == "Flat":
        f_recov = 1.0
    T = len(system_load)
    if kind in ("DCPP", "DCIPP"):
        if max(system_load) == min(system_load):
            raise OracleInfeasible("constant load")
        trigger_hours = _top_hours(system_load, trigger)
    elif kind == "TOU":
        trigger_hours = _tou_hours(year, T, 17, 20, (10, 11, 12, 1, 2, 3))
    else:
        trigger_hours = set()

    peak_kwh: dict[str, float] = {}
    base_kwh: dict[str, float] = {}
    for label, q in profiles.items():
        p = b = 0.0
        for t in range(T):
            if kind == "Flat":
                hot = False
            elif kind == "IPP":
                hot = q[t] >= threshold
            elif kind in ("DCPP", "TOU"):
                hot = t in trigger_hours
            elif kind == "DCIPP":
                hot = t in trigger_hours and q[t] >= threshold
            else:
                raise ValueError(kind)
            if hot:
                p += q[t]
            else:
                b += q[t]
        peak_kwh[label] = p
        base_kwh[label] = b

    target = 0.0
    for label, q in profiles.items():
        target += counts[label] * sum(q) * gt_flat
    if target <= 0:
        raise OracleInfeasible("no consumption")
    base_rate = gt_base * f_recov

    def income(x: float) -> float:
        return sum(counts[g] * (peak_kwh[g] * x + base_kwh[g] * base_rate) for g in profiles)

    x0, x1 = 0.0, gt_base
    y0, y1 = income(x0) - target, income(x1) - target
    if y1 == y0:
        if abs(y0) <= 1e-9 * target:
            peak_rate = gt_flat
        else:
            raise OracleInfeasible("no peak consumption to recover income")
    else:
        for _ in range(3):
            if y1 == y0:
                break
            x0, x1 = x1, x1 - y1 * (x1 - x0) / (y1 - y0)
            y0, y1 = y1, income(x1) - target
        peak_rate = x1
    # the numeric root can land a few ulps under base_rate when f_recov == 1
    if not math.isfinite(peak_rate) or peak_rate <= 0 or peak_rate < base_rate * (1 - 1e-9):
        raise OracleInfeasible("no valid peak rate")

    bills = {}
    for g in profiles:
        flat = (peak_kwh[g] + base_kwh[g]) * gt_flat
        design = peak_kwh[g] * peak_rate + base_kwh[g] * base_rate
        bills[g] = (flat, design, design - flat)
    return OracleOutcome(base_rate, peak_rate, bills)


def _close(a: float, b: float, rel: float, scale: float) -> bool:
    return abs(a - b) <= rel * max(abs(a), abs(b), scale)


def compare(d: Dataset, s: ScenarioSpec, rel: float = 1e-9) -> list[str]:
    """Differences between engine and oracle for one scenario (empty list = match)."""
    profiles = {k.label: rec.hourly_kwh.tolist() for k, rec in d.categories.items()}
    counts = {k.label: rec.n_households for k, rec in d.categories.items()}
    design = s.design
    try:
        expected = brute_force(
            profiles,
            counts,
            d.system_load.hourly_load.tolist(),
            design.kind.value,
            threshold=design.threshold_kwh,
            trigger=design.trigger_fraction,
            gt_base=s.solver.gt_base,
            f_recov=s.solver.f_recov,
            gt_flat=s.flat_rate,
            year=d.year,
        )
    except OracleInfeasible:
        expected = None
    try:
        got = run_scenario(d, s)
    except GridTariffError:
        got = None
    if expected is None or got is None:
        if (expected is None) != (got is None):
            return [f"{s.name}: feasibility differs (oracle {'fail' if expected is None else 'ok'}, "
                    f"engine {'fail' if got is None else 'ok'})"]
        return []

    problems = []
    if not _close(got.rates.base_rate, expected.base_rate, rel, 0.0):
        problems.append(f"{s.name}: base rate {got.rates.base_rate} != {expected.base_rate}")
    if not _close(got.rates.peak_rate, expected.peak_rate, rel, 0.0):
        problems.append(f"{s.name}: peak rate {got.rates.peak_rate} != {expected.peak_rate}")
    bill_scale = max(abs(b[0]) for b in expected.bills.values())
    for row in got.rows:
        flat, design_bill, delta = expected.bills[row.key.label]
        for name, a, b in (("bill_flat", row.bill_flat, flat), ("bill_design", row.bill_design, design_bill),
                           ("delta", row.delta, delta)):
            # deltas are differences of bills, so compare them on the bill scale
            if not _close(a, b, rel, bill_scale):
                problems.append(f"{s.name}/{row.key.label}: {name} {a} != {b}")
    return problems


def default_checks(d: Dataset) -> list[ScenarioSpec]:
    """A design grid derived from the data itself, for ``oracle-check``."""
    values = sorted({v for rec in d.categories.values() for v in rec.hourly_kwh.tolist() if v > 0})
    thresholds = sorted({values[0], values[len(values) // 2], values[-1]}) if values else [1.0]
    T = d.hours
    triggers = sorted({1.0 / T, 0.25, 0.5, 1.0})
    designs = [DesignSpec(DesignKind.FLAT)]
    designs += [DesignSpec(DesignKind.IPP, threshold_kwh=t) for t in thresholds]
    designs += [DesignSpec(DesignKind.DCPP, trigger_fraction=p) for p in triggers]
    designs += [DesignSpec(DesignKind.DCIPP, threshold_kwh=t, trigger_fraction=p) for t in thresholds for p in triggers]
    specs = []
    for design in designs:
        for f in (1.0, 0.95, 0.5):
            specs.append(ScenarioSpec(f"{design.name}|f={f:g}", design, SolverConfig(10.0, f)))
    return specs


def check_dataset(d: Dataset, specs: Sequence[ScenarioSpec] | None = None) -> list[str]:
    if d.hours > MAX_ORACLE_HOURS or d.hours * len(d.categories) > MAX_ORACLE_CELLS:
        raise ValueError(
            f"oracle check is for small instances (<= {MAX_ORACLE_HOURS} hours, "
            f"<= {MAX_ORACLE_CELLS} category-hours)"
        )
    problems: list[str] = []
    for s in specs if specs is not None else default_checks(d):
        problems.extend(compare(d, s))
    return problems


def random_instance(rng: random.Random, max_hours: int = 24, max_categories: int = 4) -> Dataset:
    """Small random dataset; profiles use a coarse value grid so thresholds hit ties."""
    T = rng.randint(2, max_hours)
    n_cat = rng.randint(1, max_categories)
    keys = rng.sample(_SMALL_KEYS, n_cat)
    records = []
    for key in keys:
        profile = [rng.choice([0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0, rng.uniform(0, 4)]) for _ in range(T)]
        if not any(profile):
            profile[rng.randrange(T)] = 1.0
        records.append(CategoryRecord(key, rng.randint(1, 50), profile))
    load = [float(rng.randint(1, 6) * 10) for _ in range(T)]
    if len(set(load)) == 1:
        load[0] += 5.0
    return Dataset.from_records(2017, records, SystemLoad(load))


def random_design(rng: random.Random) -> DesignSpec:
    kind = rng.choice([DesignKind.FLAT, DesignKind.IPP, DesignKind.DCPP, DesignKind.DCIPP])
    threshold = rng.choice([0.25, 0.5, 1.0, 1.5, 2.0, rng.uniform(0.1, 3.5)])
    trigger = rng.choice([0.1, 0.25, 0.5, 1.0, rng.uniform(0.01, 1.0)])
    if kind is DesignKind.IPP:
        return DesignSpec(kind, threshold_kwh=threshold)
    if kind is DesignKind.DCPP:
        return DesignSpec(kind, trigger_fraction=trigger)
    if kind is DesignKind.DCIPP:
        return DesignSpec(kind, threshold_kwh=threshold, trigger_fraction=trigger)
    return DesignSpec(kind)


_SMALL_KEYS = [CategoryKey.parse(label) for label in (
    "Ap_P1_A1_€1_EV0_HP0",
    "Ap_P2_A2_€2_EV0_HP1",
    "H_P3_A2_€3_EV1_HP0",
    "H_P5+_A3_€3_EV0_HP1",
    "H_P1_A1_€2_EV0_HP0",
    "Ap_P3_A3_€3_EV0_HP0",
)]

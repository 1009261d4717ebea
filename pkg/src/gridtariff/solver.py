"""Revenue-neutral peak rate and per-category bill redistribution.

The operator income is fixed at what a flat volumetric tariff earns::

    r_so = gt_flat * sum_g N_g * q_g

A two-level design charges base consumption ``gt_base * f_recov`` and peak
consumption an unknown ``peak_rate``. Keeping income unchanged is one linear
equation in that unknown, so the rate is solved in closed form::

    peak_rate = (r_so - f_recov * gt_base * Q_base) / Q_peak

with ``Q_peak`` and ``Q_base`` the household-weighted peak and base totals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

from .classification import Classification
from .dataset import CategoryKey, Dataset, total_consumption
from .errors import InfeasiblePeakRecovery, InvalidConfig, ZeroConsumption


@dataclass(frozen=True)
class RevenueTarget:
    """Annual operator income in Øre.

    ``gt_flat`` and ``q_total`` record the flat-tariff basis the income was
    computed from; the solver uses them to avoid cancellation error.
    """

    r_so: float
    gt_flat: float | None = None
    q_total: float | None = None

    def __post_init__(self) -> None:
        if not (math.isfinite(self.r_so) and self.r_so > 0):
            raise ZeroConsumption("revenue target must be positive")


@dataclass(frozen=True)
class SolverConfig:
    gt_base: float = 18.25
    f_recov: float = 0.95

    def __post_init__(self) -> None:
        if not (math.isfinite(self.gt_base) and self.gt_base > 0):
            raise InvalidConfig("gt_base must be > 0")
        if not 0 < self.f_recov <= 1:
            raise InvalidConfig("f_recov must lie in (0, 1]")


@dataclass(frozen=True)
class TariffRates:
    base_rate: float
    peak_rate: float

    def __post_init__(self) -> None:
        for name in ("base_rate", "peak_rate"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InfeasiblePeakRecovery(f"{name} must be positive and finite, got {value}")
        if self.peak_rate < self.base_rate:
            raise InfeasiblePeakRecovery(
                f"solved peak rate {self.peak_rate} is below the base rate {self.base_rate}"
            )


@dataclass(frozen=True)
class RedistributionRow:
    key: CategoryKey
    bill_flat: float
    bill_design: float
    delta: float
    relative_change: float
    zero_flat_bill: bool = False

    @property
    def cost_ratio(self) -> float:
        """bill_design / bill_flat, the form sensitivity tables are usually quoted in."""
        return 1.0 + self.relative_change


@dataclass(frozen=True)
class PeakBaseTotals:
    q_peak: float
    q_base: float


def revenue_target(d: Dataset, gt_flat: float) -> RevenueTarget:
    if not (math.isfinite(gt_flat) and gt_flat > 0):
        raise InvalidConfig("gt_flat must be > 0")
    grand = total_consumption(d).grand_total
    if grand <= 0:
        raise ZeroConsumption("dataset has zero total consumption")
    return RevenueTarget(gt_flat * grand, gt_flat=gt_flat, q_total=grand)


def weighted_totals(
    classes: Mapping[CategoryKey, Classification], counts: Mapping[CategoryKey, int]
) -> PeakBaseTotals:
    if set(classes) != set(counts):
        raise InvalidConfig("classifications and household counts cover different categories")
    q_peak = 0.0
    q_base = 0.0
    for key in sorted(classes, key=lambda k: k.label):
        c = classes[key]
        q_peak += counts[key] * c.q_peak_year
        q_base += counts[key] * c.q_base_year
    return PeakBaseTotals(q_peak, q_base)


def solve_peak_tariff(
    classes: Mapping[CategoryKey, Classification],
    counts: Mapping[CategoryKey, int],
    cfg: SolverConfig,
    target: RevenueTarget,
) -> TariffRates:
    """Closed-form revenue-neutral peak rate.

    Raises:
        ZeroConsumption: no consumption at all.
        InfeasiblePeakRecovery: the peak bucket is empty but ``f_recov < 1``
            leaves income to recover, or the solution is not a valid rate.
    """
    totals = weighted_totals(classes, counts)
    if totals.q_peak + totals.q_base <= 0:
        raise ZeroConsumption("no consumption to bill")
    base_rate = cfg.gt_base * cfg.f_recov

    same_basis = (
        target.gt_flat is not None
        and target.q_total is not None
        and math.isclose(target.q_total, totals.q_peak + totals.q_base, rel_tol=1e-12)
    )
    if same_basis:
        # r_so = gt_flat * (Q_base + Q_peak) exactly by the partition, so the
        # closed form reduces to gt_flat + (gt_flat - base_rate) * Q_base / Q_peak.
        # With gt_flat == gt_base and f_recov == 1 this yields gt_base exactly.
        surplus_per_base_kwh = target.gt_flat - base_rate
        if totals.q_peak == 0:
            if surplus_per_base_kwh == 0:
                return TariffRates(base_rate, target.gt_flat)
            raise InfeasiblePeakRecovery("peak bucket is empty; the withheld base income cannot be recovered")
        peak_rate = target.gt_flat + surplus_per_base_kwh * (totals.q_base / totals.q_peak)
    else:
        residual = target.r_so - base_rate * totals.q_base
        if totals.q_peak == 0:
            if residual == 0:
                return TariffRates(base_rate, base_rate)
            raise InfeasiblePeakRecovery("peak bucket is empty; the withheld base income cannot be recovered")
        peak_rate = residual / totals.q_peak
    return TariffRates(base_rate, peak_rate)


def implied_base_to_peak_ratio(peak_rate: float, gt_base: float, f_recov: float) -> float:
    """Q_base / Q_peak implied by a solved peak rate (inverse of the closed form).

    Only valid when the revenue target was computed at ``gt_base``.
    """
    if not 0 < f_recov < 1:
        raise InvalidConfig("f_recov must lie in (0, 1) to invert the peak rate")
    return (peak_rate / gt_base - 1.0) / (1.0 - f_recov)


def annual_bill(c: Classification, rates: TariffRates) -> float:
    """Annual volumetric bill of one household, in Øre."""
    return c.q_peak_year * rates.peak_rate + c.q_base_year * rates.base_rate


def redistribution(
    classes: Mapping[CategoryKey, Classification],
    counts: Mapping[CategoryKey, int],
    rates: TariffRates,
    gt_flat: float,
) -> list[RedistributionRow]:
    rows = []
    for key in sorted(classes, key=lambda k: k.label):
        c = classes[key]
        bill_flat = c.q_year * gt_flat
        bill_design = annual_bill(c, rates)
        # rate differences avoid cancelling two large bills
        delta = c.q_peak_year * (rates.peak_rate - gt_flat) + c.q_base_year * (rates.base_rate - gt_flat)
        if bill_flat == 0:
            rows.append(RedistributionRow(key, bill_flat, bill_design, delta, 0.0, zero_flat_bill=True))
        else:
            rows.append(RedistributionRow(key, bill_flat, bill_design, delta, delta / bill_flat))
    return rows


def total_income(rows: list[RedistributionRow], counts: Mapping[CategoryKey, int]) -> float:
    return math.fsum(counts[r.key] * r.bill_design for r in rows)


def net_redistribution(rows: list[RedistributionRow], counts: Mapping[CategoryKey, int]) -> float:
    return math.fsum(counts[r.key] * r.delta for r in rows)

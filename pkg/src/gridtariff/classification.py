"""Peak/base splitting of category consumption under each tariff design."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .dataset import CategoryKey, CategoryRecord, Dataset, SystemLoad, calendar_hours
from .errors import (
    CalendarMismatch,
    DegenerateLoad,
    InvalidConfig,
    MissingPeakHours,
    MissingThreshold,
)


class DesignKind(str, Enum):
    FLAT = "Flat"
    TOU = "TOU"
    IPP = "IPP"
    DCPP = "DCPP"
    DCIPP = "DCIPP"

    @classmethod
    def parse(cls, text: str) -> "DesignKind":
        for kind in cls:
            if kind.value.lower() == text.lower():
                return kind
        # the same design is also written DCPD / DCP in the literature
        if text.lower() in ("dcpd", "dcp"):
            return cls.DCPP
        raise ValueError(f"unknown design kind {text!r}")


@dataclass(frozen=True)
class TouWindow:
    start_hour: int = 17
    end_hour_exclusive: int = 20
    months: tuple[int, ...] = (10, 11, 12, 1, 2, 3)

    def __post_init__(self) -> None:
        if not 0 <= self.start_hour < self.end_hour_exclusive <= 24:
            raise InvalidConfig("TOU window hours must satisfy 0 <= start < end <= 24")
        if not self.months or any(m not in range(1, 13) for m in self.months):
            raise InvalidConfig("TOU months must be within 1..12")


def _fmt_number(x: float) -> str:
    return f"{x:g}"


@dataclass(frozen=True)
class DesignSpec:
    kind: DesignKind
    threshold_kwh: float | None = None
    trigger_fraction: float | None = None
    tou_window: TouWindow | None = None

    def __post_init__(self) -> None:
        kind = DesignKind(self.kind)
        object.__setattr__(self, "kind", kind)
        needs_threshold = kind in (DesignKind.IPP, DesignKind.DCIPP)
        needs_trigger = kind in (DesignKind.DCPP, DesignKind.DCIPP)
        needs_window = kind is DesignKind.TOU
        if needs_threshold and self.threshold_kwh is None:
            raise MissingThreshold(f"{kind.value} requires a threshold")
        if not needs_threshold and self.threshold_kwh is not None:
            raise InvalidConfig(f"{kind.value} takes no threshold")
        if needs_trigger and self.trigger_fraction is None:
            raise InvalidConfig(f"{kind.value} requires a trigger fraction")
        if not needs_trigger and self.trigger_fraction is not None:
            raise InvalidConfig(f"{kind.value} takes no trigger fraction")
        if needs_window and self.tou_window is None:
            object.__setattr__(self, "tou_window", TouWindow())
        if not needs_window and self.tou_window is not None:
            raise InvalidConfig(f"{kind.value} takes no TOU window")
        if self.threshold_kwh is not None:
            if not (math.isfinite(self.threshold_kwh) and self.threshold_kwh > 0):
                raise InvalidConfig("threshold_kwh must be > 0")
            object.__setattr__(self, "threshold_kwh", float(self.threshold_kwh))
        if self.trigger_fraction is not None:
            if not 0 < self.trigger_fraction <= 1:
                raise InvalidConfig("trigger_fraction must lie in (0, 1]")
            object.__setattr__(self, "trigger_fraction", float(self.trigger_fraction))

    @property
    def name(self) -> str:
        """Scenario label such as ``IPP;2kWh``, ``DCPP;5%`` or ``DCIPP;(2kWh,20%)``."""
        if self.kind is DesignKind.IPP:
            return f"IPP;{_fmt_number(self.threshold_kwh)}kWh"
        if self.kind is DesignKind.DCPP:
            return f"DCPP;{_fmt_number(self.trigger_fraction * 100)}%"
        if self.kind is DesignKind.DCIPP:
            return f"DCIPP;({_fmt_number(self.threshold_kwh)}kWh,{_fmt_number(self.trigger_fraction * 100)}%)"
        return self.kind.value

    @property
    def uses_peak_hours(self) -> bool:
        return self.kind in (DesignKind.TOU, DesignKind.DCPP, DesignKind.DCIPP)


class PeakSource(str, Enum):
    TRIGGER = "trigger"
    TOU_SCHEDULE = "tou_schedule"
    EMPTY = "empty"


@dataclass(frozen=True, eq=False)
class PeakHourSet:
    hours: np.ndarray  # sorted hour indices
    n_hours: int  # length of the year the set lives in
    source: PeakSource
    fraction: float | None = None
    mask: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        hours = np.unique(np.asarray(self.hours, dtype=np.int64))
        if len(hours) and (hours[0] < 0 or hours[-1] >= self.n_hours):
            raise ValueError("peak hour outside the year")
        mask = np.zeros(self.n_hours, dtype=bool)
        mask[hours] = True
        hours.setflags(write=False)
        mask.setflags(write=False)
        object.__setattr__(self, "hours", hours)
        object.__setattr__(self, "mask", mask)

    def __len__(self) -> int:
        return len(self.hours)

    def __contains__(self, hour: int) -> bool:
        return 0 <= hour < self.n_hours and bool(self.mask[hour])

    def as_set(self) -> set[int]:
        return set(self.hours.tolist())


@dataclass(frozen=True)
class Classification:
    key: CategoryKey
    q_peak_year: float
    q_base_year: float

    @property
    def q_year(self) -> float:
        return self.q_peak_year + self.q_base_year


def load_duration_curve(sl: SystemLoad) -> np.ndarray:
    """System load sorted in descending order."""
    return np.sort(sl.hourly_load, kind="stable")[::-1].copy()


def trigger_hour_count(fraction: float, n_hours: int) -> int:
    """round(fraction * n_hours), halves rounded up (1% of 8760 -> 88)."""
    return int(math.floor(fraction * n_hours + 0.5))


def peak_hour_set(sl: SystemLoad, trigger_fraction: float) -> PeakHourSet:
    """The top ``round(p*T)`` load hours; among equal loads the earlier hour wins."""
    if not 0 < trigger_fraction <= 1:
        raise InvalidConfig("trigger_fraction must lie in (0, 1]")
    load = sl.hourly_load
    if np.all(load == load[0]):
        raise DegenerateLoad("cannot rank hours of a constant load")
    n = trigger_hour_count(trigger_fraction, len(load))
    order = np.lexsort((np.arange(len(load)), -load))
    return PeakHourSet(order[:n], len(load), PeakSource.TRIGGER, trigger_fraction)


def tou_hour_set(year: int, window: TouWindow, n_hours: int | None = None) -> PeakHourSet:
    """Hours of ``year`` inside the TOU window (fixed offset, no DST)."""
    _, hod, month = calendar_hours(year)
    if n_hours is not None and n_hours != len(hod):
        raise CalendarMismatch(f"TOU needs a full calendar year ({len(hod)} hours for {year}), got {n_hours}")
    in_window = (hod >= window.start_hour) & (hod < window.end_hour_exclusive) & np.isin(month, window.months)
    return PeakHourSet(np.flatnonzero(in_window), len(hod), PeakSource.TOU_SCHEDULE)


def design_peak_hours(d: Dataset, spec: DesignSpec) -> PeakHourSet | None:
    if spec.kind is DesignKind.TOU:
        return tou_hour_set(d.year, spec.tou_window, d.hours)
    if spec.kind in (DesignKind.DCPP, DesignKind.DCIPP):
        return peak_hour_set(d.system_load, spec.trigger_fraction)
    return None


def classify_category(rec: CategoryRecord, spec: DesignSpec, peak_hours: PeakHourSet | None) -> Classification:
    """Split one category's annual consumption into peak and base buckets.

    A peak hour puts the household's entire consumption of that hour in the
    peak bucket. Threshold tests are inclusive (``q >= threshold``).
    """
    q = rec.hourly_kwh
    kind = spec.kind
    if spec.uses_peak_hours and peak_hours is None:
        raise MissingPeakHours(f"{kind.value} needs a peak hour set")
    if not spec.uses_peak_hours and peak_hours is not None:
        raise InvalidConfig(f"{kind.value} takes no peak hour set")
    if peak_hours is not None and peak_hours.n_hours != len(q):
        raise CalendarMismatch("peak hour set and profile cover different years")

    if kind is DesignKind.FLAT:
        return Classification(rec.key, 0.0, float(q.sum()))
    if kind is DesignKind.IPP:
        is_peak = q >= spec.threshold_kwh
    elif kind is DesignKind.DCIPP:
        is_peak = peak_hours.mask & (q >= spec.threshold_kwh)
    else:
        is_peak = peak_hours.mask
    return Classification(rec.key, float(q[is_peak].sum()), float(q[~is_peak].sum()))


def classify_all(d: Dataset, spec: DesignSpec) -> dict[CategoryKey, Classification]:
    peak_hours = design_peak_hours(d, spec)
    return {key: classify_category(rec, spec, peak_hours) for key, rec in d.categories.items()}

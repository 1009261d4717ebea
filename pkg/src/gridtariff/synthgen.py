"""Deterministic synthetic category profiles.

Each category profile is the sum of up to three components:

* a base component shared in shape by every category (morning and larger
  evening peak, winter-high seasonal swing), scaled by the category's band
  multipliers;
* a heat-pump component following a heating-degree proxy (zero in mid-summer);
* an electric-vehicle component made of discrete daily charging sessions,
  a configurable share of which fall in the 22:00-06:00 night window.

Random streams are keyed by ``(seed, category, component)`` only. The base
component is keyed by the category with its technology flags stripped, so the
EV1 and EV0 variants of a household type differ by exactly the EV component
(and likewise for HP). That makes technology-attributable load recoverable by
differencing profiles.
"""

from __future__ import annotations

import dataclasses
import hashlib
import math
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from .dataset import (
    AreaBand,
    CategoryKey,
    CategoryRecord,
    Dataset,
    DwellingType,
    IncomeBand,
    Occupancy,
    SystemLoad,
    calendar_hours,
    days_in_year,
)
from .errors import InvalidConfig

NIGHT_START_HOUR = 22
NIGHT_HOURS = 8  # 22:00 .. 05:59
DAY_WINDOW = (6, 22)

# Category labels observed in the Danish 2017 household data (90 categories).
OBSERVED_CATEGORY_LABELS: tuple[str, ...] = (
    "Ap_P1_A1_€1_EV0_HP0",
    "Ap_P1_A1_€1_EV0_HP1",
    "Ap_P1_A1_€2_EV0_HP0",
    "Ap_P1_A1_€2_EV0_HP1",
    "Ap_P1_A1_€3_EV0_HP0",
    "Ap_P1_A2_€1_EV0_HP0",
    "Ap_P1_A2_€1_EV0_HP1",
    "Ap_P1_A2_€2_EV0_HP0",
    "Ap_P1_A2_€2_EV0_HP1",
    "Ap_P1_A2_€3_EV0_HP0",
    "Ap_P1_A3_€1_EV0_HP0",
    "Ap_P1_A3_€1_EV0_HP1",
    "Ap_P1_A3_€2_EV0_HP0",
    "Ap_P1_A3_€2_EV0_HP1",
    "Ap_P1_A3_€3_EV0_HP0",
    "Ap_P2_A1_€1_EV0_HP0",
    "Ap_P2_A1_€1_EV0_HP1",
    "Ap_P2_A1_€2_EV0_HP0",
    "Ap_P2_A1_€2_EV0_HP1",
    "Ap_P2_A1_€3_EV0_HP0",
    "Ap_P2_A2_€1_EV0_HP0",
    "Ap_P2_A2_€1_EV0_HP1",
    "Ap_P2_A2_€2_EV0_HP0",
    "Ap_P2_A2_€2_EV0_HP1",
    "Ap_P2_A2_€3_EV0_HP0",
    "Ap_P2_A3_€1_EV0_HP0",
    "Ap_P2_A3_€1_EV0_HP1",
    "Ap_P2_A3_€2_EV0_HP0",
    "Ap_P2_A3_€2_EV0_HP1",
    "Ap_P2_A3_€3_EV0_HP0",
    "Ap_P2_A3_€3_EV0_HP1",
    "Ap_P3_A3_€3_EV0_HP0",
    "H_P1_A1_€1_EV0_HP0",
    "H_P1_A1_€1_EV0_HP1",
    "H_P1_A1_€2_EV0_HP0",
    "H_P1_A1_€2_EV0_HP1",
    "H_P1_A1_€3_EV0_HP0",
    "H_P1_A2_€1_EV0_HP0",
    "H_P1_A2_€1_EV0_HP1",
    "H_P1_A2_€2_EV0_HP0",
    "H_P1_A2_€2_EV0_HP1",
    "H_P1_A2_€3_EV0_HP0",
    "H_P1_A3_€1_EV0_HP0",
    "H_P1_A3_€1_EV0_HP1",
    "H_P1_A3_€2_EV0_HP0",
    "H_P1_A3_€2_EV0_HP1",
    "H_P1_A3_€3_EV0_HP0",
    "H_P2_A1_€1_EV0_HP0",
    "H_P2_A1_€2_EV0_HP0",
    "H_P2_A1_€2_EV0_HP1",
    "H_P2_A1_€3_EV0_HP0",
    "H_P2_A1_€3_EV0_HP1",
    "H_P2_A2_€1_EV0_HP0",
    "H_P2_A2_€1_EV0_HP1",
    "H_P2_A2_€2_EV0_HP0",
    "H_P2_A2_€2_EV0_HP1",
    "H_P2_A2_€3_EV0_HP0",
    "H_P2_A2_€3_EV0_HP1",
    "H_P2_A3_€2_EV0_HP0",
    "H_P2_A3_€2_EV0_HP1",
    "H_P2_A3_€3_EV0_HP0",
    "H_P2_A3_€3_EV0_HP1",
    "H_P3_A1_€1_EV0_HP0",
    "H_P3_A1_€2_EV0_HP0",
    "H_P3_A1_€3_EV0_HP0",
    "H_P3_A1_€3_EV0_HP1",
    "H_P3_A2_€1_EV0_HP0",
    "H_P3_A2_€2_EV0_HP0",
    "H_P3_A2_€2_EV0_HP1",
    "H_P3_A2_€3_EV0_HP0",
    "H_P3_A2_€3_EV0_HP1",
    "H_P3_A2_€3_EV1_HP0",
    "H_P3_A3_€1_EV0_HP0",
    "H_P3_A3_€2_EV0_HP0",
    "H_P3_A3_€2_EV0_HP1",
    "H_P3_A3_€3_EV0_HP0",
    "H_P3_A3_€3_EV0_HP1",
    "H_P3_A3_€3_EV1_HP0",
    "H_P5+_A1_€1_EV0_HP0",
    "H_P5+_A1_€2_EV0_HP0",
    "H_P5+_A1_€3_EV0_HP0",
    "H_P5+_A2_€1_EV0_HP0",
    "H_P5+_A2_€2_EV0_HP0",
    "H_P5+_A2_€3_EV0_HP0",
    "H_P5+_A2_€3_EV0_HP1",
    "H_P5+_A3_€1_EV0_HP0",
    "H_P5+_A3_€2_EV0_HP0",
    "H_P5+_A3_€3_EV0_HP0",
    "H_P5+_A3_€3_EV0_HP1",
    "H_P5+_A3_€3_EV1_HP0",
)

DEFAULT_OCCUPANCY_FACTORS = {"P1": 1.0, "P2": 1.45, "P3": 1.85, "P5+": 2.3}
# Area bands are defined separately for apartments and houses, so the area
# multiplier is keyed by "<dwelling>:<band>".
DEFAULT_AREA_FACTORS = {
    "AP:A1": 1.0,
    "AP:A2": 1.12,
    "AP:A3": 1.25,
    "H:A1": 1.55,
    "H:A2": 1.8,
    "H:A3": 2.1,
}
DEFAULT_INCOME_FACTORS = {"E1": 0.95, "E2": 1.0, "E3": 1.1}

_COUNT_BASE = 16000
_COUNT_WEIGHTS: dict[str, dict[Any, float]] = {
    "dwelling": {DwellingType.AP: 1.2, DwellingType.H: 1.0},
    "occupancy": {Occupancy.P1: 1.5, Occupancy.P2: 1.2, Occupancy.P3: 0.7, Occupancy.P5PLUS: 0.3},
    "area": {AreaBand.A1: 1.25, AreaBand.A2: 1.0, AreaBand.A3: 0.8},
    "income": {IncomeBand.E1: 1.0, IncomeBand.E2: 1.1, IncomeBand.E3: 0.9},
}


def default_household_count(key: CategoryKey) -> int:
    """Fixed household-count table, skewed toward small apartments."""
    w = (
        _COUNT_WEIGHTS["dwelling"][key.dwelling_type]
        * _COUNT_WEIGHTS["occupancy"][key.occupancy]
        * _COUNT_WEIGHTS["area"][key.area_band]
        * _COUNT_WEIGHTS["income"][key.income_band]
        * (0.25 if key.hp else 1.0)
        * (0.06 if key.ev else 1.0)
    )
    return max(1, int(math.floor(_COUNT_BASE * w + 0.5)))


@dataclass(frozen=True)
class GeneratorConfig:
    year: int = 2017
    seed: int = 0
    # None -> default table; int -> same count everywhere; mapping -> per label
    # (labels absent from the mapping fall back to the default table).
    n_households_per_category: int | Mapping[str, int] | None = None
    base_annual_kwh: float = 1300.0
    occupancy_factors: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_OCCUPANCY_FACTORS))
    area_factors: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_AREA_FACTORS))
    income_factors: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_INCOME_FACTORS))
    hp_annual_kwh: float = 4000.0
    ev_annual_kwh: float = 2500.0
    ev_charger_kw: float = 3.7
    night_charging_share: float = 0.8
    noise_amplitude: float = 0.15
    industrial_baseline_mw: float = 2000.0
    categories: tuple[str, ...] = OBSERVED_CATEGORY_LABELS

    def validate(self) -> None:
        def bad(msg: str) -> InvalidConfig:
            return InvalidConfig(msg)

        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise bad("seed must be an unsigned 64-bit integer")
        if not 1 <= self.year <= 9999:
            raise bad("year out of range")
        if not self.base_annual_kwh > 0:
            raise bad("base_annual_kwh must be > 0")
        for name, table, keys in (
            ("occupancy_factors", self.occupancy_factors, [o.value for o in Occupancy]),
            ("area_factors", self.area_factors, [f"{d.value}:{a.value}" for d in DwellingType for a in AreaBand]),
            ("income_factors", self.income_factors, [i.value for i in IncomeBand]),
        ):
            missing = [k for k in keys if k not in table]
            if missing:
                raise bad(f"{name} missing entries {missing}")
            if any(not (float(v) > 0 and math.isfinite(float(v))) for v in table.values()):
                raise bad(f"{name} must be positive")
        if self.hp_annual_kwh < 0 or self.ev_annual_kwh < 0:
            raise bad("technology energies must be >= 0")
        if not self.ev_charger_kw > 0:
            raise bad("ev_charger_kw must be > 0")
        if not 0 <= self.night_charging_share <= 1:
            raise bad("night_charging_share must lie in [0, 1]")
        if not 0 <= self.noise_amplitude <= 0.5:
            raise bad("noise_amplitude must lie in [0, 0.5]")
        if self.industrial_baseline_mw < 0:
            raise bad("industrial_baseline_mw must be >= 0")
        if not self.categories:
            raise bad("no categories requested")
        labels = set()
        for label in self.categories:
            try:
                CategoryKey.parse(label)
            except ValueError as exc:
                raise bad(str(exc)) from exc
            if label in labels:
                raise bad(f"duplicate category {label}")
            labels.add(label)
        counts = self.n_households_per_category
        if isinstance(counts, Mapping):
            if any(int(v) != v or v < 1 for v in counts.values()):
                raise bad("household counts must be positive integers")
        elif counts is not None and (int(counts) != counts or counts < 1):
            raise bad("household count must be a positive integer")
        if self.ev_annual_kwh > 0:
            n = _session_hours(self.ev_annual_kwh / days_in_year(self.year), self.ev_charger_kw)
            if n > NIGHT_HOURS:
                raise bad("daily EV energy does not fit the night window at the given charger power")

    def household_count(self, key: CategoryKey) -> int:
        counts = self.n_households_per_category
        if counts is None:
            return default_household_count(key)
        if isinstance(counts, Mapping):
            return int(counts.get(key.label, default_household_count(key)))
        return int(counts)

    def annual_energy(self, key: CategoryKey) -> float:
        """Configured annual kWh per household for ``key``."""
        return (
            self.base_annual_kwh * self.band_multiplier(key)
            + (self.hp_annual_kwh if key.hp else 0.0)
            + (self.ev_annual_kwh if key.ev else 0.0)
        )

    def band_multiplier(self, key: CategoryKey) -> float:
        return (
            float(self.occupancy_factors[key.occupancy.value])
            * float(self.area_factors[f"{key.dwelling_type.value}:{key.area_band.value}"])
            * float(self.income_factors[key.income_band.value])
        )

    def to_dict(self) -> dict[str, Any]:
        out = dataclasses.asdict(self)
        out["categories"] = list(self.categories)
        for name in ("occupancy_factors", "area_factors", "income_factors"):
            out[name] = dict(out[name])
        if isinstance(self.n_households_per_category, Mapping):
            out["n_households_per_category"] = dict(self.n_households_per_category)
        return out

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "GeneratorConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise InvalidConfig(f"unknown generator options: {sorted(unknown)}")
        kwargs = dict(raw)
        if "categories" in kwargs:
            kwargs["categories"] = tuple(kwargs["categories"])
        return cls(**kwargs)


def _session_hours(energy: float, power: float) -> int:
    return max(1, math.ceil(energy / power - 1e-9))


def _circular_bump(hod: np.ndarray, centre: float, width: float) -> np.ndarray:
    d = np.abs(hod - centre)
    d = np.minimum(d, 24 - d)
    return np.exp(-0.5 * (d / width) ** 2)


def _winter_wave(doy: np.ndarray, n_days: int) -> np.ndarray:
    # +1 in mid-January, -1 in mid-July
    return np.cos(2 * np.pi * (doy - 15) / n_days)


def base_shape(year: int) -> np.ndarray:
    """Common base load shape, normalised to unit annual energy."""
    doy, hod, _ = calendar_hours(year)
    diurnal = 0.45 + 0.35 * _circular_bump(hod, 7.5, 1.3) + 1.0 * _circular_bump(hod, 18.5, 1.8)
    seasonal = 1.0 + 0.25 * _winter_wave(doy, days_in_year(year))
    shape = diurnal * seasonal
    return shape / shape.sum()


def heat_pump_shape(year: int) -> np.ndarray:
    """Heating-degree proxy times a mild diurnal profile, unit annual energy."""
    doy, hod, _ = calendar_hours(year)
    heating = np.clip(_winter_wave(doy, days_in_year(year)) + 0.35, 0.0, None)
    diurnal = 0.6 + 0.25 * _circular_bump(hod, 7.0, 1.5) + 0.6 * _circular_bump(hod, 18.0, 2.0)
    shape = heating * diurnal
    return shape / shape.sum()


def _stream(seed: int, *parts: str) -> np.random.Generator:
    digest = hashlib.sha256("|".join(parts).encode("utf-8")).digest()
    spawn_key = tuple(int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4))
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=spawn_key))


def _apply_noise(component: np.ndarray, amplitude: float, rng: np.random.Generator) -> np.ndarray:
    total = component.sum()
    if amplitude == 0 or total == 0:
        return component
    sigma = math.sqrt(math.log1p(amplitude**2))
    noisy = component * rng.lognormal(mean=-0.5 * sigma**2, sigma=sigma, size=component.shape)
    return noisy * (total / noisy.sum())


def ev_sessions(cfg: GeneratorConfig, rng: np.random.Generator) -> np.ndarray:
    """One charging session per day; ``round(share * days)`` of them at night."""
    n_days = days_in_year(cfg.year)
    T = n_days * 24
    out = np.zeros(T)
    if cfg.ev_annual_kwh == 0:
        return out
    daily = cfg.ev_annual_kwh / n_days
    n = _session_hours(daily, cfg.ev_charger_kw)
    n_night = int(math.floor(cfg.night_charging_share * n_days + 0.5))
    night_days = np.zeros(n_days, dtype=bool)
    night_days[rng.permutation(n_days)[:n_night]] = True
    night_offsets = rng.integers(0, NIGHT_HOURS - n + 1, size=n_days)
    lo_day, hi_day = DAY_WINDOW
    latest = hi_day - n
    earliest = max(lo_day, min(16, latest))
    day_starts = rng.integers(earliest, latest + 1, size=n_days)
    fill = np.full(n, cfg.ev_charger_kw)
    fill[-1] = daily - cfg.ev_charger_kw * (n - 1)
    for d in range(n_days):
        if night_days[d]:
            start = d * 24 + NIGHT_START_HOUR + int(night_offsets[d])
        else:
            start = d * 24 + int(day_starts[d])
        idx = (start + np.arange(n)) % T  # last night of the year wraps to Jan 1
        out[idx] += fill
    return out


def _base_label(key: CategoryKey) -> str:
    return key.with_technology(ev=False, hp=False).label.rsplit("_", 2)[0]


def category_profile(cfg: GeneratorConfig, key: CategoryKey) -> np.ndarray:
    household = _base_label(key)
    base = base_shape(cfg.year) * (cfg.base_annual_kwh * cfg.band_multiplier(key))
    profile = _apply_noise(base, cfg.noise_amplitude, _stream(cfg.seed, household, "base"))
    if key.hp and cfg.hp_annual_kwh > 0:
        hp = heat_pump_shape(cfg.year) * cfg.hp_annual_kwh
        profile = profile + _apply_noise(hp, cfg.noise_amplitude, _stream(cfg.seed, household, "hp"))
    if key.ev and cfg.ev_annual_kwh > 0:
        profile = profile + ev_sessions(cfg, _stream(cfg.seed, household, "ev"))
    return profile


def _aggregate_mw(records: list[CategoryRecord], baseline_mw: float) -> np.ndarray:
    total = np.zeros(records[0].hours)
    for rec in sorted(records, key=lambda r: r.key.label):
        total += rec.n_households * rec.hourly_kwh
    return baseline_mw + total / 1000.0


def generate_dataset(cfg: GeneratorConfig) -> Dataset:
    """Build the synthetic dataset, with system load derived from the categories."""
    cfg.validate()
    records = []
    for label in sorted(cfg.categories):
        key = CategoryKey.parse(label)
        records.append(CategoryRecord(key, cfg.household_count(key), category_profile(cfg, key)))
    load = SystemLoad(_aggregate_mw(records, cfg.industrial_baseline_mw))
    return Dataset.from_records(cfg.year, records, load)


def derive_system_load(d: Dataset, industrial_baseline_mw: float) -> Dataset:
    """Copy of ``d`` whose system load is baseline + household demand (kWh/h -> MW)."""
    if industrial_baseline_mw < 0:
        raise InvalidConfig("industrial_baseline_mw must be >= 0")
    load = _aggregate_mw(list(d.categories.values()), industrial_baseline_mw)
    return d.with_system_load(SystemLoad(load))

"""Category taxonomy, load profiles and the on-disk CSV dataset format.

A dataset is three CSV files:

* ``categories.csv``  -- ``category_id,dwelling_type,occupancy,area_band,income_band,ev,hp,n_households``
* ``profiles.csv``    -- long format ``category_id,hour,kwh_per_household``
* ``system_load.csv`` -- ``hour,load_mw``

``category_id`` is the canonical label of the category, e.g. ``Ap_P1_A1_€1_EV0_HP0``.
"""

from __future__ import annotations

import hashlib
import io
import itertools
import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np
import pandas as pd

from .errors import (
    DegenerateLoad,
    LengthMismatch,
    MissingFile,
    NegativeValue,
    SchemaViolation,
)

CATEGORIES_FILE = "categories.csv"
PROFILES_FILE = "profiles.csv"
SYSTEM_LOAD_FILE = "system_load.csv"
PROVENANCE_FILE = "provenance.json"

CATEGORY_COLUMNS = [
    "category_id",
    "dwelling_type",
    "occupancy",
    "area_band",
    "income_band",
    "ev",
    "hp",
    "n_households",
]
PROFILE_COLUMNS = ["category_id", "hour", "kwh_per_household"]
SYSTEM_LOAD_COLUMNS = ["hour", "load_mw"]

DEFAULT_YEAR = 2017


class DwellingType(str, Enum):
    AP = "AP"
    H = "H"

    @property
    def label(self) -> str:
        return "Ap" if self is DwellingType.AP else "H"


class Occupancy(str, Enum):
    """P3 covers 3-4 occupants, P5PLUS five or more."""

    P1 = "P1"
    P2 = "P2"
    P3 = "P3"
    P5PLUS = "P5+"

    @property
    def label(self) -> str:
        return self.value


class AreaBand(str, Enum):
    A1 = "A1"
    A2 = "A2"
    A3 = "A3"

    @property
    def label(self) -> str:
        return self.value


class IncomeBand(str, Enum):
    E1 = "E1"
    E2 = "E2"
    E3 = "E3"

    @property
    def label(self) -> str:
        return "€" + self.value[1]


_DWELLING_BY_LABEL = {d.label: d for d in DwellingType}
_INCOME_BY_LABEL = {i.label: i for i in IncomeBand}


@dataclass(frozen=True, order=True)
class CategoryKey:
    """Identity of one socio-techno-economic consumer category."""

    dwelling_type: DwellingType
    occupancy: Occupancy
    area_band: AreaBand
    income_band: IncomeBand
    ev: bool
    hp: bool

    def __post_init__(self) -> None:
        # accept raw strings for convenience, store enums
        object.__setattr__(self, "dwelling_type", DwellingType(self.dwelling_type))
        object.__setattr__(self, "occupancy", Occupancy(self.occupancy))
        object.__setattr__(self, "area_band", AreaBand(self.area_band))
        object.__setattr__(self, "income_band", IncomeBand(self.income_band))
        if not isinstance(self.ev, (bool, np.bool_)) or not isinstance(self.hp, (bool, np.bool_)):
            raise TypeError("ev and hp must be booleans")
        object.__setattr__(self, "ev", bool(self.ev))
        object.__setattr__(self, "hp", bool(self.hp))

    @property
    def label(self) -> str:
        return "_".join(
            [
                self.dwelling_type.label,
                self.occupancy.label,
                self.area_band.label,
                self.income_band.label,
                f"EV{int(self.ev)}",
                f"HP{int(self.hp)}",
            ]
        )

    def __str__(self) -> str:
        return self.label

    @classmethod
    def parse(cls, label: str) -> "CategoryKey":
        parts = label.split("_")
        if len(parts) != 6:
            raise ValueError(f"not a category label: {label!r}")
        dwelling, occ, area, income, ev, hp = parts
        if dwelling not in _DWELLING_BY_LABEL or income not in _INCOME_BY_LABEL:
            raise ValueError(f"not a category label: {label!r}")
        if ev not in ("EV0", "EV1") or hp not in ("HP0", "HP1"):
            raise ValueError(f"not a category label: {label!r}")
        return cls(
            _DWELLING_BY_LABEL[dwelling],
            Occupancy(occ),
            AreaBand(area),
            _INCOME_BY_LABEL[income],
            ev == "EV1",
            hp == "HP1",
        )

    def with_technology(self, *, ev: bool | None = None, hp: bool | None = None) -> "CategoryKey":
        return CategoryKey(
            self.dwelling_type,
            self.occupancy,
            self.area_band,
            self.income_band,
            self.ev if ev is None else ev,
            self.hp if hp is None else hp,
        )


def all_category_keys() -> list[CategoryKey]:
    """The full 2x4x3x3x2x2 taxonomy, in canonical label order."""
    keys = [
        CategoryKey(*combo)
        for combo in itertools.product(
            DwellingType, Occupancy, AreaBand, IncomeBand, (False, True), (False, True)
        )
    ]
    return sorted(keys, key=lambda k: k.label)


def _frozen_array(values: Iterable[float], name: str) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != 1:
        raise SchemaViolation(f"{name} must be one-dimensional")
    if not np.all(np.isfinite(arr)):
        raise SchemaViolation(f"{name} contains non-finite values")
    if np.any(arr < 0):
        raise NegativeValue(f"{name} contains negative values")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class CategoryRecord:
    key: CategoryKey
    n_households: int
    hourly_kwh: np.ndarray

    def __post_init__(self) -> None:
        n = self.n_households
        if isinstance(n, bool) or int(n) != n or n < 1:
            raise SchemaViolation(f"{self.key}: n_households must be a positive integer, got {n!r}")
        object.__setattr__(self, "n_households", int(n))
        object.__setattr__(self, "hourly_kwh", _frozen_array(self.hourly_kwh, f"{self.key} profile"))

    @property
    def hours(self) -> int:
        return len(self.hourly_kwh)

    @property
    def annual_kwh(self) -> float:
        return float(np.sum(self.hourly_kwh))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CategoryRecord):
            return NotImplemented
        return (
            self.key == other.key
            and self.n_households == other.n_households
            and np.array_equal(self.hourly_kwh, other.hourly_kwh)
        )


@dataclass(frozen=True, eq=False)
class SystemLoad:
    """National hourly load in MW, hour 0 = Jan 1 00:00 of the dataset year."""

    hourly_load: np.ndarray

    def __post_init__(self) -> None:
        arr = _frozen_array(self.hourly_load, "system load")
        if len(arr) == 0:
            raise SchemaViolation("system load is empty")
        if np.all(arr == arr[0]):
            raise DegenerateLoad("system load is constant over all hours")
        object.__setattr__(self, "hourly_load", arr)

    def __len__(self) -> int:
        return len(self.hourly_load)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SystemLoad):
            return NotImplemented
        return np.array_equal(self.hourly_load, other.hourly_load)


@dataclass(frozen=True, eq=False)
class Dataset:
    year: int
    categories: Mapping[CategoryKey, CategoryRecord]
    system_load: SystemLoad
    hours: int = field(init=False)

    def __post_init__(self) -> None:
        cats = dict(self.categories)
        if not cats:
            raise SchemaViolation("dataset has no categories")
        for key, rec in cats.items():
            if rec.key != key:
                raise SchemaViolation(f"record {rec.key} filed under {key}")
        T = len(self.system_load)
        for rec in cats.values():
            if rec.hours != T:
                raise LengthMismatch(f"{rec.key}: profile has {rec.hours} hours, system load has {T}")
        ordered = {k: cats[k] for k in sorted(cats, key=lambda k: k.label)}
        object.__setattr__(self, "categories", MappingProxyType(ordered))
        object.__setattr__(self, "hours", T)

    @classmethod
    def from_records(cls, year: int, records: Iterable[CategoryRecord], system_load: SystemLoad) -> "Dataset":
        cats: dict[CategoryKey, CategoryRecord] = {}
        for rec in records:
            if rec.key in cats:
                raise SchemaViolation(f"duplicate category {rec.key}")
            cats[rec.key] = rec
        return cls(year, cats, system_load)

    @property
    def keys(self) -> list[CategoryKey]:
        return list(self.categories)

    @property
    def counts(self) -> dict[CategoryKey, int]:
        return {k: r.n_households for k, r in self.categories.items()}

    def profile_matrix(self) -> np.ndarray:
        """Profiles stacked as (categories x hours) in canonical order."""
        return np.vstack([r.hourly_kwh for r in self.categories.values()])

    def with_system_load(self, system_load: SystemLoad) -> "Dataset":
        return Dataset(self.year, self.categories, system_load)

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(str(self.year).encode())
        for key, rec in self.categories.items():
            h.update(key.label.encode("utf-8"))
            h.update(str(rec.n_households).encode())
            h.update(rec.hourly_kwh.astype("<f8").tobytes())
        h.update(self.system_load.hourly_load.astype("<f8").tobytes())
        return h.hexdigest()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.year == other.year
            and list(self.categories) == list(other.categories)
            and all(self.categories[k] == other.categories[k] for k in self.categories)
            and self.system_load == other.system_load
        )


@dataclass(frozen=True)
class ConsumptionTotals:
    per_household: dict[CategoryKey, float]
    grand_total: float


def total_consumption(d: Dataset) -> ConsumptionTotals:
    """Annual kWh per household for each category, plus the population total."""
    per_household = {k: r.annual_kwh for k, r in d.categories.items()}
    grand = 0.0
    for k in sorted(per_household, key=lambda k: k.label):
        grand += d.categories[k].n_households * per_household[k]
    return ConsumptionTotals(per_household, grand)


def days_in_year(year: int) -> int:
    return 366 if (year % 4 == 0 and year % 100 != 0) or year % 400 == 0 else 365


def calendar_hours(year: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(day_of_year 0-based, hour_of_day, month 1-12) for every hour of ``year``."""
    T = days_in_year(year) * 24
    stamps = np.datetime64(f"{year:04d}-01-01T00", "h") + np.arange(T)
    days = stamps.astype("datetime64[D]")
    doy = (days - days[0]).astype(np.int64)
    hod = np.arange(T) % 24
    month = days.astype("datetime64[M]").astype(np.int64) % 12 + 1
    return doy, hod, month


# --------------------------------------------------------------------------
# CSV I/O
# --------------------------------------------------------------------------


def _read_csv(path: Path, columns: list[str], dtype: Mapping[str, object]) -> pd.DataFrame:
    if not path.is_file():
        raise MissingFile(f"missing file: {path}")
    try:
        df = pd.read_csv(
            path,
            dtype=str,
            keep_default_na=False,
            encoding="utf-8",
        )
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise SchemaViolation(f"{path.name}: unreadable CSV ({exc})") from exc
    if list(df.columns) != columns:
        raise SchemaViolation(f"{path.name}: expected columns {columns}, got {list(df.columns)}")
    for col, kind in dtype.items():
        try:
            if kind is int:
                converted = pd.to_numeric(df[col], errors="raise")
                if not np.all(np.mod(converted, 1) == 0):
                    raise ValueError("non-integer")
                df[col] = converted.astype(np.int64)
            elif kind is float:
                # python float() parses with exact round-trip semantics
                df[col] = np.array([float(v) for v in df[col]], dtype=np.float64)
        except (ValueError, TypeError) as exc:
            raise SchemaViolation(f"{path.name}: non-numeric value in column {col!r}") from exc
        if kind is float and not np.all(np.isfinite(df[col].to_numpy())):
            raise SchemaViolation(f"{path.name}: non-finite value in column {col!r}")
    return df


def _parse_flag(value: str, name: str, path: Path) -> bool:
    if value not in ("0", "1"):
        raise SchemaViolation(f"{path.name}: {name} must be 0 or 1, got {value!r}")
    return value == "1"


def _read_categories(path: Path) -> dict[str, tuple[CategoryKey, int]]:
    df = _read_csv(path, CATEGORY_COLUMNS, {"n_households": int})
    out: dict[str, tuple[CategoryKey, int]] = {}
    for row in df.itertuples(index=False):
        try:
            key = CategoryKey(
                DwellingType(row.dwelling_type),
                Occupancy(row.occupancy),
                AreaBand(row.area_band),
                IncomeBand(row.income_band),
                _parse_flag(row.ev, "ev", path),
                _parse_flag(row.hp, "hp", path),
            )
        except ValueError as exc:
            raise SchemaViolation(f"{path.name}: bad category row {row.category_id!r}: {exc}") from exc
        if row.category_id != key.label:
            raise SchemaViolation(
                f"{path.name}: category_id {row.category_id!r} does not match its columns ({key.label})"
            )
        if row.category_id in out:
            raise SchemaViolation(f"{path.name}: duplicate category id {row.category_id!r}")
        if row.n_households < 1:
            raise SchemaViolation(f"{path.name}: n_households must be >= 1 for {row.category_id}")
        out[row.category_id] = (key, int(row.n_households))
    return out


def _read_system_load(path: Path) -> np.ndarray:
    df = _read_csv(path, SYSTEM_LOAD_COLUMNS, {"hour": int, "load_mw": float})
    T = len(df)
    if T == 0:
        raise SchemaViolation(f"{path.name}: no rows")
    hours = df["hour"].to_numpy()
    if not np.array_equal(np.sort(hours), np.arange(T)):
        raise SchemaViolation(f"{path.name}: hours must be exactly 0..{T - 1}, each once")
    load = np.empty(T)
    load[hours] = df["load_mw"].to_numpy()
    if np.any(load < 0):
        raise NegativeValue(f"{path.name}: negative load")
    return load


def _read_profiles(path: Path, T: int) -> dict[str, np.ndarray]:
    df = _read_csv(path, PROFILE_COLUMNS, {"hour": int, "kwh_per_household": float})
    hours = df["hour"].to_numpy()
    if len(hours) and (hours.min() < 0 or hours.max() >= T):
        raise SchemaViolation(f"{path.name}: hour outside [0, {T})")
    if df.duplicated(["category_id", "hour"]).any():
        raise SchemaViolation(f"{path.name}: duplicate (category_id, hour) rows")
    values = df["kwh_per_household"].to_numpy()
    if np.any(values < 0):
        raise NegativeValue(f"{path.name}: negative consumption")
    out: dict[str, np.ndarray] = {}
    for cid, idx in df.groupby("category_id", sort=False).indices.items():
        if len(idx) != T:
            raise LengthMismatch(f"{path.name}: {cid} has {len(idx)} hours, expected {T}")
        profile = np.empty(T)
        profile[hours[idx]] = values[idx]
        out[cid] = profile
    return out


def load_dataset(
    profiles_path: str | Path,
    categories_path: str | Path,
    system_load_path: str | Path,
    *,
    year: int = DEFAULT_YEAR,
) -> Dataset:
    """Read and validate the three dataset files.

    Raises:
        MissingFile: a path does not exist.
        SchemaViolation: wrong header, non-numeric cell, duplicate id, or a
            category present in only one of the two category-bearing files.
        LengthMismatch: a profile does not cover every hour of the system load.
        NegativeValue: negative consumption or load.
    """
    profiles_path, categories_path, system_load_path = map(
        Path, (profiles_path, categories_path, system_load_path)
    )
    for p in (profiles_path, categories_path, system_load_path):
        if not p.is_file():
            raise MissingFile(f"missing file: {p}")
    meta = _read_categories(categories_path)
    load = _read_system_load(system_load_path)
    profiles = _read_profiles(profiles_path, len(load))

    missing_meta = sorted(set(profiles) - set(meta))
    if missing_meta:
        raise SchemaViolation(f"profiles reference categories without metadata: {missing_meta[:5]}")
    missing_profiles = sorted(set(meta) - set(profiles))
    if missing_profiles:
        raise SchemaViolation(f"categories without profiles: {missing_profiles[:5]}")

    records = [CategoryRecord(key, n, profiles[cid]) for cid, (key, n) in meta.items()]
    return Dataset.from_records(year, records, SystemLoad(load))


def load_dataset_dir(directory: str | Path, *, year: int | None = None) -> Dataset:
    """Load a dataset directory; the year comes from ``provenance.json`` when present."""
    directory = Path(directory)
    if year is None:
        year = DEFAULT_YEAR
        prov = directory / PROVENANCE_FILE
        if prov.is_file():
            try:
                year = int(json.loads(prov.read_text(encoding="utf-8"))["config"]["year"])
            except (KeyError, ValueError, TypeError, json.JSONDecodeError):
                pass
    return load_dataset(
        directory / PROFILES_FILE,
        directory / CATEGORIES_FILE,
        directory / SYSTEM_LOAD_FILE,
        year=year,
    )


def categories_csv(d: Dataset) -> str:
    buf = io.StringIO()
    buf.write(",".join(CATEGORY_COLUMNS) + "\n")
    for key, rec in d.categories.items():
        buf.write(
            ",".join(
                [
                    key.label,
                    key.dwelling_type.value,
                    key.occupancy.value,
                    key.area_band.value,
                    key.income_band.value,
                    str(int(key.ev)),
                    str(int(key.hp)),
                    str(rec.n_households),
                ]
            )
            + "\n"
        )
    return buf.getvalue()


def profiles_csv(d: Dataset) -> str:
    hours = [str(t) for t in range(d.hours)]
    lines = [",".join(PROFILE_COLUMNS)]
    for key, rec in d.categories.items():
        label = key.label
        lines.extend(f"{label},{h},{v!r}" for h, v in zip(hours, rec.hourly_kwh.tolist()))
    return "\n".join(lines) + "\n"


def system_load_csv(d: Dataset) -> str:
    lines = [",".join(SYSTEM_LOAD_COLUMNS)]
    lines.extend(f"{t},{v!r}" for t, v in enumerate(d.system_load.hourly_load.tolist()))
    return "\n".join(lines) + "\n"


def write_dataset(d: Dataset, directory: str | Path) -> list[Path]:
    """Emit the dataset trio (UTF-8, LF, full float precision)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name, text in (
        (CATEGORIES_FILE, categories_csv(d)),
        (PROFILES_FILE, profiles_csv(d)),
        (SYSTEM_LOAD_FILE, system_load_csv(d)),
    ):
        path = directory / name
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        written.append(path)
    return written

"""Group averages and on-disk report files.

Files written by :func:`emit_reports`:

=============================  ==============================================
``rates.csv``                  ``scenario,base_ore_per_kwh,peak_ore_per_kwh``
``redistribution_delta.csv``   ``category_id,<scenario>...`` (Øre/year per household)
``redistribution_relative.csv`` same layout, ``bill_design / bill_flat - 1``
``redistribution_rows.csv``    long format with both bills, for re-aggregation
``group_averages.csv``         one row per (grouping, scenario, group)
``diagnostics.csv``            peak/base totals and solver inputs per scenario
``ldc.csv``                    ``rank,load_mw`` descending
``categories.csv``             category metadata incl. household counts
``failures.json``              scenarios that could not be solved
``manifest.json``              dataset fingerprint, engine version, config echo
=============================  ==============================================
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from . import __version__
from .classification import load_duration_curve
from .dataset import CATEGORIES_FILE, CategoryKey, Dataset, categories_csv
from .errors import InvalidConfig, IoFailure, SchemaViolation
from .scenarios import ScenarioFailure, ScenarioResult, SensitivityRow
from .solver import RedistributionRow

DIMENSIONS = ("dwelling_type", "area_band", "income_band", "occupancy", "ev", "hp")
FIGURE_GROUPINGS = (
    ("dwelling_type", "area_band"),
    ("ev", "hp"),
    ("income_band", "occupancy"),
)


class Weighting(str, Enum):
    HOUSEHOLD_COUNT = "household_count"
    UNWEIGHTED = "unweighted"


@dataclass(frozen=True)
class GroupingSpec:
    dims: tuple[str, ...]
    weighting: Weighting = Weighting.HOUSEHOLD_COUNT

    def __post_init__(self) -> None:
        dims = tuple(self.dims)
        if not dims:
            raise InvalidConfig("grouping needs at least one dimension")
        if len(set(dims)) != len(dims):
            raise InvalidConfig(f"duplicate grouping dimensions: {dims}")
        unknown = [x for x in dims if x not in DIMENSIONS]
        if unknown:
            raise InvalidConfig(f"unknown grouping dimensions {unknown}; choose from {DIMENSIONS}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "weighting", Weighting(self.weighting))

    @property
    def name(self) -> str:
        return "+".join(self.dims)


@dataclass(frozen=True)
class GroupAverageRow:
    group_label: str
    mean_relative_change: float
    mean_delta_ore_year: float
    n_households_total: int


def _token(key: CategoryKey, dim: str) -> str:
    if dim == "dwelling_type":
        return key.dwelling_type.label
    if dim == "area_band":
        return key.area_band.label
    if dim == "income_band":
        return key.income_band.label
    if dim == "occupancy":
        return key.occupancy.label
    if dim == "ev":
        return f"EV{int(key.ev)}"
    return f"HP{int(key.hp)}"


def group_label(key: CategoryKey, dims: Sequence[str]) -> str:
    return "_".join(_token(key, d) for d in dims)


def group_average(
    rows: Iterable[RedistributionRow], counts: Mapping[CategoryKey, int], g: GroupingSpec
) -> list[GroupAverageRow]:
    """Mean relative change and mean delta per group, sorted by group label."""
    members: dict[str, list[RedistributionRow]] = defaultdict(list)
    for row in rows:
        members[group_label(row.key, g.dims)].append(row)
    out = []
    for label in sorted(members):
        group = members[label]
        n_total = sum(counts[r.key] for r in group)
        if g.weighting is Weighting.HOUSEHOLD_COUNT:
            weights = [counts[r.key] / n_total for r in group]
        else:
            weights = [1.0 / len(group)] * len(group)
        out.append(
            GroupAverageRow(
                label,
                math.fsum(w * r.relative_change for w, r in zip(weights, group)),
                math.fsum(w * r.delta for w, r in zip(weights, group)),
                n_total,
            )
        )
    return out


# --------------------------------------------------------------------------
# writing
# --------------------------------------------------------------------------


def _num(x: float | int | None) -> str:
    if x is None:
        return ""
    if isinstance(x, int):
        return str(x)
    return repr(float(x))


def _csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_num(v) if isinstance(v, (int, float)) and not isinstance(v, bool) else v for v in row])
    return buf.getvalue()


def _write(path: Path, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def _json_text(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def scenario_echo(spec) -> dict[str, Any]:
    design = spec.design
    echo: dict[str, Any] = {
        "name": spec.name,
        "kind": design.kind.value,
        "gt_base": spec.solver.gt_base,
        "f_recov": spec.effective_solver.f_recov,
        "gt_flat": spec.flat_rate,
    }
    if design.threshold_kwh is not None:
        echo["threshold_kwh"] = design.threshold_kwh
    if design.trigger_fraction is not None:
        echo["trigger_fraction"] = design.trigger_fraction
    if design.tou_window is not None:
        w = design.tou_window
        echo["tou_window"] = {"start_hour": w.start_hour, "end_hour_exclusive": w.end_hour_exclusive, "months": list(w.months)}
    return echo


GROUP_HEADER = ["grouping", "weighting", "scenario", "group", "mean_relative_change",
                "mean_delta_ore_year", "n_households_total"]


def _group_lines(
    named_rows: Iterable[tuple[str, Sequence[RedistributionRow]]],
    counts: Mapping[CategoryKey, int],
    g: GroupingSpec,
) -> list[list[Any]]:
    return [
        [g.name, g.weighting.value, name, row.group_label,
         row.mean_relative_change, row.mean_delta_ore_year, row.n_households_total]
        for name, rows in named_rows
        for row in group_average(rows, counts, g)
    ]


def emit_reports(
    results: Sequence[ScenarioResult | ScenarioFailure],
    groupings: Sequence[GroupingSpec],
    out_dir: str | Path,
    dataset: Dataset,
    *,
    config: Mapping[str, Any] | None = None,
) -> list[Path]:
    """Write every report file for one run; identical inputs give identical bytes."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoFailure(f"cannot create {out}: {exc}") from exc

    ok = [r for r in results if isinstance(r, ScenarioResult)]
    failed = [r for r in results if isinstance(r, ScenarioFailure)]
    counts = dataset.counts
    keys = list(dataset.categories)
    names = [r.spec.name for r in ok]

    files: dict[str, str] = {}
    files["rates.csv"] = _csv_text(
        ["scenario", "base_ore_per_kwh", "peak_ore_per_kwh"],
        [[r.spec.name, r.rates.base_rate, r.rates.peak_rate] for r in ok],
    )
    by_key = [{row.key: row for row in r.rows} for r in ok]
    files["redistribution_delta.csv"] = _csv_text(
        ["category_id", *names], [[k.label, *[rows[k].delta for rows in by_key]] for k in keys]
    )
    files["redistribution_relative.csv"] = _csv_text(
        ["category_id", *names], [[k.label, *[rows[k].relative_change for rows in by_key]] for k in keys]
    )
    files["redistribution_rows.csv"] = _csv_text(
        ["scenario", "category_id", "bill_flat", "bill_design", "delta", "relative_change", "zero_flat_bill"],
        [
            [r.spec.name, row.key.label, row.bill_flat, row.bill_design, row.delta, row.relative_change,
             str(int(row.zero_flat_bill))]
            for r in ok
            for row in r.rows
        ],
    )
    named = [(r.spec.name, r.rows) for r in ok]
    files["group_averages.csv"] = _csv_text(
        GROUP_HEADER, [line for g in groupings for line in _group_lines(named, counts, g)]
    )
    files["diagnostics.csv"] = _csv_text(
        ["scenario", "q_peak_kwh", "q_base_kwh", "peak_hour_count", "r_so_ore"],
        [[r.spec.name, r.diagnostics.q_peak, r.diagnostics.q_base, r.diagnostics.peak_hour_count, r.r_so] for r in ok],
    )
    ldc = load_duration_curve(dataset.system_load)
    files["ldc.csv"] = _csv_text(["rank", "load_mw"], [[i + 1, float(v)] for i, v in enumerate(ldc.tolist())])
    files[CATEGORIES_FILE] = categories_csv(dataset)
    files["failures.json"] = _json_text([f.as_record() for f in failed])
    files["manifest.json"] = _json_text(
        {
            "engine_version": __version__,
            "dataset": {
                "fingerprint": dataset.fingerprint(),
                "year": dataset.year,
                "hours": dataset.hours,
                "n_categories": len(keys),
            },
            "groupings": [{"dims": list(g.dims), "weighting": g.weighting.value} for g in groupings],
            "scenarios": [scenario_echo(r.spec) for r in results],
            "n_failed": len(failed),
            "config": dict(config or {}),
        }
    )

    written = []
    for name in sorted(files):
        path = out / name
        _write(path, files[name])
        written.append(path)
    return written


def sensitivity_csv(rows: Sequence[SensitivityRow]) -> str:
    """One line per recovery factor: rates plus the dwelling/area cost ratios."""
    groups = sorted({g for r in rows for g in r.group_relative_change})
    header = ["f_recov", "base_ore_per_kwh", "peak_ore_per_kwh", *[f"ratio_{g}" for g in groups]]
    lines = [
        [r.f_recov, r.result.rates.base_rate, r.result.rates.peak_rate,
         *[1.0 + r.group_relative_change[g] for g in groups]]
        for r in rows
    ]
    return _csv_text(header, lines)


# --------------------------------------------------------------------------
# reading back
# --------------------------------------------------------------------------


def read_results(results_dir: str | Path) -> tuple[dict[str, list[RedistributionRow]], dict[CategoryKey, int]]:
    """Rows per scenario (in file order) and household counts from an emitted run."""
    results_dir = Path(results_dir)
    rows_path = results_dir / "redistribution_rows.csv"
    cats_path = results_dir / CATEGORIES_FILE
    for p in (rows_path, cats_path):
        if not p.is_file():
            raise IoFailure(f"missing results file: {p}")
    counts: dict[CategoryKey, int] = {}
    with open(cats_path, encoding="utf-8", newline="") as fh:
        for rec in csv.DictReader(fh):
            counts[CategoryKey.parse(rec["category_id"])] = int(rec["n_households"])
    per_scenario: dict[str, list[RedistributionRow]] = {}
    with open(rows_path, encoding="utf-8", newline="") as fh:
        for rec in csv.DictReader(fh):
            try:
                row = RedistributionRow(
                    CategoryKey.parse(rec["category_id"]),
                    float(rec["bill_flat"]),
                    float(rec["bill_design"]),
                    float(rec["delta"]),
                    float(rec["relative_change"]),
                    rec["zero_flat_bill"] == "1",
                )
            except (KeyError, ValueError) as exc:
                raise SchemaViolation(f"{rows_path.name}: malformed row {rec}") from exc
            per_scenario.setdefault(rec["scenario"], []).append(row)
    return per_scenario, counts


def write_group_report(results_dir: str | Path, g: GroupingSpec, out_path: str | Path | None = None) -> Path:
    per_scenario, counts = read_results(results_dir)
    lines = _group_lines(per_scenario.items(), counts, g)
    path = Path(out_path) if out_path else Path(results_dir) / "group_averages.csv"
    _write(path, _csv_text(GROUP_HEADER, lines))
    return path

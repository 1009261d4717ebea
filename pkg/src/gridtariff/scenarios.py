"""Scenario definitions, parallel sweeps and recovery-factor sensitivity."""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .classification import (
    Classification,
    DesignKind,
    DesignSpec,
    design_peak_hours,
    classify_category,
)
from .dataset import CategoryKey, Dataset
from .errors import GridTariffError, InvalidConfig
from .solver import (
    RedistributionRow,
    SolverConfig,
    TariffRates,
    redistribution,
    revenue_target,
    solve_peak_tariff,
    weighted_totals,
)

STANDARD_THRESHOLDS_KWH = (1.0, 1.5, 2.0, 3.0)
STANDARD_TRIGGERS = (0.01, 0.05, 0.20, 0.40)


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    design: DesignSpec
    solver: SolverConfig = SolverConfig()
    gt_flat: float | None = None  # defaults to solver.gt_base

    @property
    def flat_rate(self) -> float:
        return self.solver.gt_base if self.gt_flat is None else self.gt_flat

    @property
    def effective_solver(self) -> SolverConfig:
        # a flat design has no peak bucket, so it is solved with full base recovery
        if self.design.kind is DesignKind.FLAT:
            return replace(self.solver, f_recov=1.0)
        return self.solver


@dataclass(frozen=True)
class Diagnostics:
    q_peak: float
    q_base: float
    peak_hour_count: int | None


@dataclass(frozen=True)
class ScenarioResult:
    spec: ScenarioSpec
    rates: TariffRates
    rows: list[RedistributionRow]
    diagnostics: Diagnostics
    r_so: float
    classifications: dict[CategoryKey, Classification]

    ok = True


@dataclass(frozen=True)
class ScenarioFailure:
    spec: ScenarioSpec
    error_type: str
    message: str

    ok = False

    def as_record(self) -> dict[str, str]:
        return {"scenario": self.spec.name, "error": self.error_type, "message": self.message}


def scenario(design: DesignSpec, *, gt_base: float = 18.25, f_recov: float = 0.95, name: str | None = None) -> ScenarioSpec:
    return ScenarioSpec(name or design.name, design, SolverConfig(gt_base, f_recov))


def _solve(
    d: Dataset, s: ScenarioSpec, classes: Mapping[CategoryKey, Classification], peak_hour_count: int | None
) -> ScenarioResult:
    counts = d.counts
    target = revenue_target(d, s.flat_rate)
    rates = solve_peak_tariff(classes, counts, s.effective_solver, target)
    rows = redistribution(classes, counts, rates, s.flat_rate)
    totals = weighted_totals(classes, counts)
    return ScenarioResult(
        s, rates, rows, Diagnostics(totals.q_peak, totals.q_base, peak_hour_count), target.r_so, dict(classes)
    )


def _classify(d: Dataset, design: DesignSpec) -> tuple[dict[CategoryKey, Classification], int | None]:
    peak_hours = design_peak_hours(d, design)
    classes = {k: classify_category(rec, design, peak_hours) for k, rec in d.categories.items()}
    return classes, (len(peak_hours) if peak_hours is not None else None)


def run_scenario(d: Dataset, s: ScenarioSpec) -> ScenarioResult:
    """classify -> revenue target -> peak rate -> redistribution."""
    classes, n_peak = _classify(d, s.design)
    return _solve(d, s, classes, n_peak)


def _run_captured(d: Dataset, s: ScenarioSpec) -> ScenarioResult | ScenarioFailure:
    try:
        return run_scenario(d, s)
    except GridTariffError as exc:
        return ScenarioFailure(s, type(exc).__name__, str(exc))


_WORKER_DATASET: Dataset | None = None


def _init_worker(d: Dataset) -> None:
    global _WORKER_DATASET
    _WORKER_DATASET = d


def _worker(s: ScenarioSpec) -> ScenarioResult | ScenarioFailure:
    assert _WORKER_DATASET is not None
    return _run_captured(_WORKER_DATASET, s)


def default_jobs() -> int:
    return os.cpu_count() or 1


def sweep(
    d: Dataset, specs: Sequence[ScenarioSpec], parallelism: int | None = None
) -> list[ScenarioResult | ScenarioFailure]:
    """Run every scenario; failures are returned inline, results keep input order."""
    names = [s.name for s in specs]
    dupes = sorted({n for n in names if names.count(n) > 1})
    if dupes:
        raise InvalidConfig(f"duplicate scenario names: {dupes}")
    jobs = default_jobs() if parallelism is None else parallelism
    if jobs < 1:
        raise InvalidConfig("parallelism must be >= 1")
    jobs = min(jobs, len(specs))
    if jobs <= 1:
        return [_run_captured(d, s) for s in specs]
    with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker, initargs=(d,)) as pool:
        return list(pool.map(_worker, specs))


# --------------------------------------------------------------------------
# recovery-factor sensitivity
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SensitivityRow:
    f_recov: float
    result: ScenarioResult
    group_relative_change: dict[str, float]  # dwelling/area group -> weighted mean relative change


def f_sensitivity(
    d: Dataset, s: ScenarioSpec, f_values: Iterable[float], *, weighted: bool = True
) -> list[SensitivityRow]:
    """Solve ``s`` for several recovery factors over one shared classification.

    Group columns average over occupancy, income and technology within each
    dwelling type x area band, as in the usual sensitivity tables.
    """
    from .reporting import GroupingSpec, Weighting, group_average

    f_values = list(f_values)
    if len(set(f_values)) != len(f_values):
        raise InvalidConfig("f values must be distinct")
    classes, n_peak = _classify(d, s.design)
    grouping = GroupingSpec(
        ("dwelling_type", "area_band"), Weighting.HOUSEHOLD_COUNT if weighted else Weighting.UNWEIGHTED
    )
    out = []
    for f in f_values:
        spec_f = replace(s, name=f"{s.name}|f={f:g}", solver=replace(s.solver, f_recov=f))
        result = _solve(d, spec_f, classes, n_peak)
        groups = group_average(result.rows, d.counts, grouping)
        out.append(SensitivityRow(f, result, {g.group_label: g.mean_relative_change for g in groups}))
    return out


# --------------------------------------------------------------------------
# sweep specification files
# --------------------------------------------------------------------------


def design_from_dict(raw: Mapping[str, Any]) -> DesignSpec:
    try:
        kind = DesignKind.parse(str(raw["kind"]))
    except (KeyError, ValueError) as exc:
        raise InvalidConfig(f"bad scenario kind in {dict(raw)}") from exc
    return DesignSpec(kind, raw.get("threshold_kwh"), raw.get("trigger_fraction"))


def specs_from_config(raw: Mapping[str, Any]) -> list[ScenarioSpec]:
    """Expand a sweep specification mapping into scenario specs.

    Keys: ``gt_flat`` (Øre/kWh), optional ``gt_base`` (defaults to ``gt_flat``),
    ``f_recov`` (scalar or list) and ``scenarios``, a list of
    ``{name?, kind, threshold_kwh?, trigger_fraction?}``. A list of recovery
    factors runs every scenario once per factor, names suffixed ``|f=<f>``.
    """
    unknown = set(raw) - {"gt_flat", "gt_base", "f_recov", "scenarios"}
    if unknown:
        raise InvalidConfig(f"unknown sweep keys: {sorted(unknown)}")
    try:
        gt_flat = float(raw.get("gt_flat", 18.25))
        gt_base = float(raw.get("gt_base", gt_flat))
        f_raw = raw.get("f_recov", 0.95)
        f_list = [float(f) for f in f_raw] if isinstance(f_raw, list) else [float(f_raw)]
        entries = list(raw["scenarios"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidConfig(f"malformed sweep specification: {exc}") from exc
    if not f_list:
        raise InvalidConfig("f_recov list is empty")
    specs = []
    for entry in entries:
        if not isinstance(entry, Mapping):
            raise InvalidConfig(f"scenario entry must be an object: {entry!r}")
        extra = set(entry) - {"name", "kind", "threshold_kwh", "trigger_fraction"}
        if extra:
            raise InvalidConfig(f"unknown scenario keys {sorted(extra)}")
        design = design_from_dict(entry)
        base_name = entry.get("name") or design.name
        for f in f_list:
            name = base_name if len(f_list) == 1 else f"{base_name}|f={f:g}"
            specs.append(ScenarioSpec(name, design, SolverConfig(gt_base, f), gt_flat))
    return specs


def load_sweep_file(path: str | Path) -> list[ScenarioSpec]:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InvalidConfig(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(raw, Mapping):
        raise InvalidConfig(f"{path}: top level must be an object")
    return specs_from_config(raw)


def presented_designs() -> list[DesignSpec]:
    """The twelve headline scenarios: IPP x4 thresholds, DCPP x4 triggers, DCIPP 2 kWh x4 triggers."""
    return (
        [DesignSpec(DesignKind.IPP, threshold_kwh=t) for t in STANDARD_THRESHOLDS_KWH]
        + [DesignSpec(DesignKind.DCPP, trigger_fraction=p) for p in STANDARD_TRIGGERS]
        + [DesignSpec(DesignKind.DCIPP, threshold_kwh=2.0, trigger_fraction=p) for p in STANDARD_TRIGGERS]
    )


def full_grid_designs() -> list[DesignSpec]:
    """Flat, TOU, IPP x4, DCPP x4 and every DCIPP (threshold, trigger) pair: 26 designs."""
    return (
        [DesignSpec(DesignKind.FLAT), DesignSpec(DesignKind.TOU)]
        + [DesignSpec(DesignKind.IPP, threshold_kwh=t) for t in STANDARD_THRESHOLDS_KWH]
        + [DesignSpec(DesignKind.DCPP, trigger_fraction=p) for p in STANDARD_TRIGGERS]
        + [
            DesignSpec(DesignKind.DCIPP, threshold_kwh=t, trigger_fraction=p)
            for t in STANDARD_THRESHOLDS_KWH
            for p in STANDARD_TRIGGERS
        ]
    )

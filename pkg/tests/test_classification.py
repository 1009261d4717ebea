from __future__ import annotations

import datetime as dt

import numpy as np
import pytest

from gridtariff.classification import (
    DesignKind,
    DesignSpec,
    PeakHourSet,
    PeakSource,
    TouWindow,
    classify_all,
    classify_category,
    design_peak_hours,
    load_duration_curve,
    peak_hour_set,
    tou_hour_set,
    trigger_hour_count,
)
from gridtariff.dataset import CategoryRecord, SystemLoad
from gridtariff.errors import (
    CalendarMismatch,
    DegenerateLoad,
    InvalidConfig,
    MissingPeakHours,
    MissingThreshold,
)

from conftest import TOY_KEY, TOY_LOADS, TOY_SYSTEM

IPP1 = DesignSpec(DesignKind.IPP, threshold_kwh=1.0)


def test_load_duration_curve_examples():
    assert load_duration_curve(SystemLoad(TOY_SYSTEM)).tolist() == [40, 30, 20, 10]
    assert load_duration_curve(SystemLoad([40, 30, 20, 10])).tolist() == [40, 30, 20, 10]


def test_load_duration_curve_matches_naive_sort(synthetic):
    ldc = load_duration_curve(synthetic.system_load)
    assert ldc.tolist() == sorted(synthetic.system_load.hourly_load.tolist(), reverse=True)


def test_peak_hour_set_examples():
    assert peak_hour_set(SystemLoad(TOY_SYSTEM), 0.25).as_set() == {1}
    assert peak_hour_set(SystemLoad(TOY_SYSTEM), 1.0).as_set() == {0, 1, 2, 3}
    assert peak_hour_set(SystemLoad([30, 40, 30, 30]), 0.5).as_set() == {1, 0}


@pytest.mark.parametrize("fraction,T,expected", [(0.01, 8760, 88), (0.05, 8760, 438), (0.2, 8760, 1752),
                                                 (0.4, 8760, 3504), (0.125, 4, 1), (0.375, 4, 2), (0.1, 4, 0)])
def test_trigger_hour_count_rounds_half_up(fraction, T, expected):
    assert trigger_hour_count(fraction, T) == expected


def test_peak_hour_set_rejects_constant_load():
    # SystemLoad itself refuses constant series, so build one around the check
    sl = object.__new__(SystemLoad)
    object.__setattr__(sl, "hourly_load", np.full(4, 7.0))
    with pytest.raises(DegenerateLoad):
        peak_hour_set(sl, 0.5)


def test_peak_hour_set_rejects_bad_fraction():
    for p in (0.0, -0.1, 1.5):
        with pytest.raises(InvalidConfig):
            peak_hour_set(SystemLoad(TOY_SYSTEM), p)


def _tou_oracle(year: int) -> set[int]:
    origin = dt.datetime(year, 1, 1)
    hours = (dt.datetime(year + 1, 1, 1) - origin).days * 24
    return {
        t for t in range(hours)
        if (origin + dt.timedelta(hours=t)).month in (10, 11, 12, 1, 2, 3)
        and 17 <= (origin + dt.timedelta(hours=t)).hour < 20
    }


@pytest.mark.parametrize("year", [2017, 2020])
def test_tou_hour_set_matches_datetime_walk(year):
    got = tou_hour_set(year, TouWindow())
    assert got.as_set() == _tou_oracle(year)
    assert got.source is PeakSource.TOU_SCHEDULE


def test_tou_membership_examples():
    s = tou_hour_set(2017, TouWindow())
    assert len(s) == 546
    assert 18 in s
    jul1 = (dt.datetime(2017, 7, 1, 18) - dt.datetime(2017, 1, 1)).days * 24 + 18
    assert jul1 not in s
    assert 17 in s and 20 not in s and 16 not in s


def test_tou_needs_full_year():
    with pytest.raises(CalendarMismatch):
        tou_hour_set(2017, TouWindow(), n_hours=4)


def _toy_rec() -> CategoryRecord:
    return CategoryRecord(TOY_KEY, 1, TOY_LOADS)


def test_classify_examples():
    c = classify_category(_toy_rec(), IPP1, None)
    assert (c.q_peak_year, c.q_base_year) == (5.0, 1.0)

    flat_half = CategoryRecord(TOY_KEY, 1, [0.5] * 24)
    c = classify_category(flat_half, IPP1, None)
    assert (c.q_peak_year, c.q_base_year) == (0.0, 12.0)

    hours = peak_hour_set(SystemLoad(TOY_SYSTEM), 0.25)
    c = classify_category(_toy_rec(), DesignSpec(DesignKind.DCIPP, 1.0, 0.25), hours)
    assert (c.q_peak_year, c.q_base_year) == (2.0, 4.0)
    c = classify_category(_toy_rec(), DesignSpec(DesignKind.DCIPP, 2.5, 0.25), hours)
    assert (c.q_peak_year, c.q_base_year) == (0.0, 6.0)


def test_threshold_is_inclusive():
    c = classify_category(_toy_rec(), DesignSpec(DesignKind.IPP, threshold_kwh=2.0), None)
    assert c.q_peak_year == 5.0


def test_dcpp_takes_whole_hour():
    hours = peak_hour_set(SystemLoad(TOY_SYSTEM), 0.5)
    c = classify_category(_toy_rec(), DesignSpec(DesignKind.DCPP, trigger_fraction=0.5), hours)
    assert (c.q_peak_year, c.q_base_year) == (5.0, 1.0)


def test_classify_argument_errors():
    hours = peak_hour_set(SystemLoad(TOY_SYSTEM), 0.25)
    with pytest.raises(MissingPeakHours):
        classify_category(_toy_rec(), DesignSpec(DesignKind.DCPP, trigger_fraction=0.25), None)
    with pytest.raises(InvalidConfig):
        classify_category(_toy_rec(), IPP1, hours)
    wrong_len = PeakHourSet(np.array([0]), 8, PeakSource.TRIGGER)
    with pytest.raises(CalendarMismatch):
        classify_category(_toy_rec(), DesignSpec(DesignKind.DCPP, trigger_fraction=0.25), wrong_len)


def test_design_spec_validation():
    with pytest.raises(MissingThreshold):
        DesignSpec(DesignKind.IPP)
    with pytest.raises(MissingThreshold):
        DesignSpec(DesignKind.DCIPP, trigger_fraction=0.05)
    with pytest.raises(InvalidConfig):
        DesignSpec(DesignKind.DCPP)
    with pytest.raises(InvalidConfig):
        DesignSpec(DesignKind.FLAT, threshold_kwh=1.0)
    with pytest.raises(InvalidConfig):
        DesignSpec(DesignKind.IPP, threshold_kwh=0.0)
    with pytest.raises(InvalidConfig):
        DesignSpec(DesignKind.DCPP, trigger_fraction=1.2)


@pytest.mark.parametrize(
    "spec,name",
    [
        (DesignSpec(DesignKind.FLAT), "Flat"),
        (DesignSpec(DesignKind.TOU), "TOU"),
        (DesignSpec(DesignKind.IPP, threshold_kwh=1.5), "IPP;1.5kWh"),
        (DesignSpec(DesignKind.DCPP, trigger_fraction=0.01), "DCPP;1%"),
        (DesignSpec(DesignKind.DCIPP, 2.0, 0.2), "DCIPP;(2kWh,20%)"),
    ],
)
def test_design_names(spec, name):
    assert spec.name == name


def test_kind_aliases():
    assert DesignKind.parse("dcpd") is DesignKind.DCPP
    assert DesignKind.parse("ipp") is DesignKind.IPP
    with pytest.raises(ValueError):
        DesignKind.parse("cpp")


def test_classify_all_flat(two_cat):
    classes = classify_all(two_cat, DesignSpec(DesignKind.FLAT))
    assert all(c.q_peak_year == 0 for c in classes.values())


def test_classify_all_is_composition(toy):
    spec = DesignSpec(DesignKind.DCPP, trigger_fraction=0.25)
    hours = design_peak_hours(toy, spec)
    expected = {k: classify_category(r, spec, hours) for k, r in toy.categories.items()}
    assert classify_all(toy, spec) == expected


def test_nesting_on_fixture(synthetic):
    for t in (1.0, 2.0):
        for p in (0.01, 0.2):
            ipp = classify_all(synthetic, DesignSpec(DesignKind.IPP, threshold_kwh=t))
            dcpp = classify_all(synthetic, DesignSpec(DesignKind.DCPP, trigger_fraction=p))
            both = classify_all(synthetic, DesignSpec(DesignKind.DCIPP, t, p))
            for k, c in both.items():
                assert c.q_peak_year <= min(ipp[k].q_peak_year, dcpp[k].q_peak_year)
                assert c.q_year == pytest.approx(synthetic.categories[k].annual_kwh, rel=1e-12)

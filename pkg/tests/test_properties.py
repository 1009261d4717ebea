"""Randomised invariants over small generated datasets."""

from __future__ import annotations

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from gridtariff.classification import (
    DesignKind,
    DesignSpec,
    classify_all,
    load_duration_curve,
    peak_hour_set,
    trigger_hour_count,
)
from gridtariff.dataset import (
    CategoryKey,
    CategoryRecord,
    Dataset,
    SystemLoad,
    categories_csv,
    profiles_csv,
    system_load_csv,
)
from gridtariff.errors import GridTariffError
from gridtariff.scenarios import ScenarioSpec, run_scenario
from gridtariff.solver import SolverConfig, net_redistribution, total_income

KEYS = [CategoryKey.parse(x) for x in
        ("Ap_P1_A1_€1_EV0_HP0", "Ap_P2_A2_€2_EV0_HP1", "H_P3_A2_€3_EV1_HP0", "H_P5+_A3_€3_EV0_HP1")]

kwh = st.floats(min_value=0.0, max_value=5.0, allow_nan=False).map(lambda x: round(x, 3))
load_value = st.integers(min_value=1, max_value=8).map(float)


@st.composite
def datasets(draw, max_hours: int = 24):
    T = draw(st.integers(min_value=2, max_value=max_hours))
    n = draw(st.integers(min_value=1, max_value=4))
    records = []
    for key in KEYS[:n]:
        profile = draw(st.lists(kwh, min_size=T, max_size=T))
        if not any(profile):
            profile[0] = 1.0
        records.append(CategoryRecord(key, draw(st.integers(min_value=1, max_value=100)), profile))
    load = draw(st.lists(load_value, min_size=T, max_size=T).filter(lambda xs: len(set(xs)) > 1))
    return Dataset.from_records(2017, records, SystemLoad(load))


thresholds = st.sampled_from([0.5, 1.0, 1.5, 2.0, 3.0])
triggers = st.sampled_from([0.01, 0.05, 0.2, 0.4, 0.5, 1.0])


@settings(max_examples=60, deadline=None)
@given(datasets(), thresholds, triggers)
def test_partition_and_nesting(d, t, p):
    ipp = classify_all(d, DesignSpec(DesignKind.IPP, threshold_kwh=t))
    dcpp = classify_all(d, DesignSpec(DesignKind.DCPP, trigger_fraction=p))
    both = classify_all(d, DesignSpec(DesignKind.DCIPP, t, p))
    for key, rec in d.categories.items():
        for c in (ipp[key], dcpp[key], both[key]):
            assert abs(c.q_year - rec.annual_kwh) <= 1e-9 * max(rec.annual_kwh, 1.0)
            assert c.q_peak_year >= 0 and c.q_base_year >= 0
        assert both[key].q_peak_year <= min(ipp[key].q_peak_year, dcpp[key].q_peak_year) + 1e-12


@settings(max_examples=60, deadline=None)
@given(datasets(), st.lists(thresholds, min_size=2, max_size=2, unique=True))
def test_ipp_peak_non_increasing_in_threshold(d, pair):
    lo, hi = sorted(pair)
    a = classify_all(d, DesignSpec(DesignKind.IPP, threshold_kwh=lo))
    b = classify_all(d, DesignSpec(DesignKind.IPP, threshold_kwh=hi))
    for key in d.categories:
        assert b[key].q_peak_year <= a[key].q_peak_year


@settings(max_examples=60, deadline=None)
@given(datasets(), st.lists(triggers, min_size=2, max_size=2, unique=True))
def test_trigger_sets_nest(d, pair):
    lo, hi = sorted(pair)
    assert peak_hour_set(d.system_load, lo).as_set() <= peak_hour_set(d.system_load, hi).as_set()


@settings(max_examples=60, deadline=None)
@given(st.lists(load_value, min_size=2, max_size=30).filter(lambda xs: len(set(xs)) > 1), triggers,
       st.floats(min_value=0.1, max_value=100.0))
def test_trigger_set_invariant_to_positive_scaling(load, p, scale):
    a = peak_hour_set(SystemLoad(load), p)
    b = peak_hour_set(SystemLoad([x * scale for x in load]), p)
    assert a.as_set() == b.as_set()
    assert len(a) == trigger_hour_count(p, len(load))


@settings(max_examples=60, deadline=None)
@given(st.lists(load_value, min_size=2, max_size=30).filter(lambda xs: len(set(xs)) > 1), st.randoms())
def test_ldc_permutation_invariant(load, rnd):
    shuffled = list(load)
    rnd.shuffle(shuffled)
    assert np.array_equal(load_duration_curve(SystemLoad(load)), load_duration_curve(SystemLoad(shuffled)))


@settings(max_examples=40, deadline=None)
@given(datasets())
def test_csv_round_trip(tmp_path_factory, d):
    from gridtariff.dataset import load_dataset

    root = tmp_path_factory.mktemp("rt")
    for name, text in (("c.csv", categories_csv(d)), ("p.csv", profiles_csv(d)), ("s.csv", system_load_csv(d))):
        (root / name).write_text(text, encoding="utf-8")
    assert load_dataset(root / "p.csv", root / "c.csv", root / "s.csv", year=d.year) == d


@settings(max_examples=60, deadline=None)
@given(datasets(), thresholds, triggers, st.sampled_from([0.5, 0.8, 0.95, 1.0]))
def test_revenue_neutral_and_order_free(d, t, p, f):
    spec = ScenarioSpec("s", DesignSpec(DesignKind.DCIPP, t, p), SolverConfig(18.25, f))
    reversed_d = Dataset.from_records(d.year, list(d.categories.values())[::-1], d.system_load)
    try:
        r = run_scenario(d, spec)
    except GridTariffError:
        return
    r2 = run_scenario(reversed_d, spec)
    assert r2.rates == r.rates and r2.rows == r.rows
    counts = d.counts
    assert abs(total_income(r.rows, counts) - r.r_so) <= 1e-9 * r.r_so
    assert abs(net_redistribution(r.rows, counts)) <= 1e-9 * r.r_so
    if f == 1.0:
        assert r.rates.peak_rate == 18.25

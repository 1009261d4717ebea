from __future__ import annotations

import numpy as np
import pytest

from gridtariff.classification import peak_hour_set
from gridtariff.dataset import CategoryKey, CategoryRecord, Dataset, SystemLoad, calendar_hours, write_dataset
from gridtariff.errors import InvalidConfig
from gridtariff.synthgen import (
    OBSERVED_CATEGORY_LABELS,
    GeneratorConfig,
    base_shape,
    derive_system_load,
    generate_dataset,
)


def test_category_set_is_the_observed_labels(synthetic):
    assert sorted(k.label for k in synthetic.categories) == sorted(OBSERVED_CATEGORY_LABELS)
    assert synthetic.hours == 8760


def test_profiles_non_negative(synthetic):
    assert np.all(synthetic.profile_matrix() >= 0)


def test_annual_energy_matches_multiplicative_model(synthetic):
    cfg = GeneratorConfig(seed=2017)
    for key, rec in synthetic.categories.items():
        assert rec.annual_kwh == pytest.approx(cfg.annual_energy(key), rel=0.01)


def test_noise_free_profiles_are_scaled_base_shape():
    cfg = GeneratorConfig(seed=3, noise_amplitude=0.0, hp_annual_kwh=0.0, ev_annual_kwh=0.0)
    d = generate_dataset(cfg)
    shape = base_shape(cfg.year)
    for key, rec in d.categories.items():
        expected = shape * cfg.base_annual_kwh * cfg.band_multiplier(key)
        np.testing.assert_allclose(rec.hourly_kwh, expected, rtol=1e-12)


def test_same_seed_gives_identical_files(tmp_path):
    cfg = GeneratorConfig(seed=11)
    write_dataset(generate_dataset(cfg), tmp_path / "a")
    write_dataset(generate_dataset(cfg), tmp_path / "b")
    for name in ("categories.csv", "profiles.csv", "system_load.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_different_seed_differs():
    a = generate_dataset(GeneratorConfig(seed=1))
    b = generate_dataset(GeneratorConfig(seed=2))
    assert a != b


def test_category_stream_independent_of_category_set():
    # a category's profile depends only on (seed, key), not on which others are generated
    full = generate_dataset(GeneratorConfig(seed=5))
    label = "H_P3_A2_€3_EV1_HP0"
    sub = generate_dataset(GeneratorConfig(seed=5, categories=(label, "Ap_P1_A1_€1_EV0_HP0")))
    key = CategoryKey.parse(label)
    assert np.array_equal(full.categories[key].hourly_kwh, sub.categories[key].hourly_kwh)


def _night_mask(year: int) -> np.ndarray:
    _, hod, _ = calendar_hours(year)
    return (hod >= 22) | (hod < 6)


def test_night_charging_share_by_profile_differencing():
    cfg = GeneratorConfig(seed=9, night_charging_share=0.9)
    d = generate_dataset(cfg)
    night = _night_mask(cfg.year)
    ev_keys = [k for k in d.categories if k.ev]
    assert ev_keys
    for key in ev_keys:
        ev_load = d.categories[key].hourly_kwh - d.categories[key.with_technology(ev=False)].hourly_kwh
        assert ev_load.sum() == pytest.approx(cfg.ev_annual_kwh, rel=1e-9)
        assert ev_load[night].sum() / ev_load.sum() >= 0.85


def test_zero_night_share_puts_ev_energy_in_daytime():
    cfg = GeneratorConfig(seed=9, night_charging_share=0.0)
    d = generate_dataset(cfg)
    night = _night_mask(cfg.year)
    key = CategoryKey.parse("H_P3_A2_€3_EV1_HP0")
    ev_load = d.categories[key].hourly_kwh - d.categories[key.with_technology(ev=False)].hourly_kwh
    assert ev_load[night].sum() == pytest.approx(0.0, abs=1e-9)


def test_derive_system_load_unit_conversion():
    rec = CategoryRecord(CategoryKey.parse("Ap_P1_A1_€1_EV0_HP0"), 1000, [1.0, 2.0, 3.0, 4.0])
    d = Dataset.from_records(2017, [rec], SystemLoad([0.0, 1.0, 0.0, 1.0]))
    assert derive_system_load(d, 0.0).system_load.hourly_load.tolist() == [1.0, 2.0, 3.0, 4.0]
    assert derive_system_load(d, 5.0).system_load.hourly_load.tolist() == [6.0, 7.0, 8.0, 9.0]


def test_generated_system_load_is_derived(synthetic):
    cfg = GeneratorConfig(seed=2017)
    again = derive_system_load(synthetic, cfg.industrial_baseline_mw)
    assert again.system_load == synthetic.system_load


def test_system_peak_in_winter_evening(synthetic):
    _, hod, month = calendar_hours(synthetic.year)
    t = int(np.argmax(synthetic.system_load.hourly_load))
    assert 17 <= hod[t] <= 20
    assert month[t] in (11, 12, 1, 2)


def test_heat_pump_load_concentrates_in_system_peak_hours(synthetic):
    top = peak_hour_set(synthetic.system_load, 0.05).mask
    hp_keys = [k for k in synthetic.categories if k.hp and k.with_technology(hp=False) in synthetic.categories]
    assert hp_keys
    for key in hp_keys:
        hp_load = synthetic.categories[key].hourly_kwh - synthetic.categories[key.with_technology(hp=False)].hourly_kwh
        assert hp_load[top].mean() > hp_load.mean()


@pytest.mark.parametrize(
    "overrides",
    [
        {"night_charging_share": 1.5},
        {"noise_amplitude": 0.6},
        {"base_annual_kwh": 0.0},
        {"occupancy_factors": {"P1": 1.0, "P2": 1.0, "P3": 1.0, "P5+": -1.0}},
        {"area_factors": {"AP:A1": 1.0}},
        {"seed": -1},
        {"categories": ("not_a_label",)},
        {"ev_annual_kwh": 40000.0},
        {"n_households_per_category": 0},
    ],
)
def test_invalid_config(overrides):
    with pytest.raises(InvalidConfig):
        generate_dataset(GeneratorConfig(**overrides))


def test_household_counts_configurable():
    d = generate_dataset(GeneratorConfig(seed=1, n_households_per_category=7, categories=OBSERVED_CATEGORY_LABELS[:3]))
    assert set(d.counts.values()) == {7}
    label = OBSERVED_CATEGORY_LABELS[0]
    d = generate_dataset(GeneratorConfig(seed=1, n_households_per_category={label: 3}, categories=OBSERVED_CATEGORY_LABELS[:3]))
    assert d.counts[CategoryKey.parse(label)] == 3


def test_default_counts_make_technology_rarer(synthetic):
    counts = synthetic.counts
    for key, n in counts.items():
        if key.ev or key.hp:
            plain = key.with_technology(ev=False, hp=False)
            if plain in counts:
                assert n < counts[plain]


def test_config_dict_round_trip():
    cfg = GeneratorConfig(seed=4, n_households_per_category={"Ap_P1_A1_€1_EV0_HP0": 2})
    assert GeneratorConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(InvalidConfig):
        GeneratorConfig.from_dict({"bogus": 1})

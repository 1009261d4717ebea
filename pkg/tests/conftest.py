from __future__ import annotations

import pytest

from gridtariff.dataset import CategoryKey, CategoryRecord, Dataset, SystemLoad
from gridtariff.synthgen import GeneratorConfig, generate_dataset

TOY_KEY = CategoryKey.parse("Ap_P1_A1_€1_EV0_HP0")
TOY_LOADS = [0.5, 2.0, 0.5, 3.0]
TOY_SYSTEM = [10.0, 40.0, 20.0, 30.0]
FIXTURE_SEED = 2017


def make_toy(n_households: int = 1) -> Dataset:
    rec = CategoryRecord(TOY_KEY, n_households, TOY_LOADS)
    return Dataset.from_records(2017, [rec], SystemLoad(TOY_SYSTEM))


def make_two_category() -> Dataset:
    """A is always above 1 kWh, B always below."""
    a = CategoryRecord(CategoryKey.parse("H_P5+_A3_€3_EV0_HP1"), 3, [2.0, 1.5, 3.0, 1.0])
    b = CategoryRecord(CategoryKey.parse("Ap_P1_A1_€1_EV0_HP0"), 7, [0.25, 0.5, 0.75, 0.5])
    return Dataset.from_records(2017, [a, b], SystemLoad(TOY_SYSTEM))


@pytest.fixture
def toy() -> Dataset:
    return make_toy()


@pytest.fixture
def two_cat() -> Dataset:
    return make_two_category()


@pytest.fixture(scope="session")
def synthetic() -> Dataset:
    """The 90-category, 8760-hour synthetic fixture."""
    return generate_dataset(GeneratorConfig(seed=FIXTURE_SEED))


@pytest.fixture(scope="session")
def synthetic_dir(tmp_path_factory):
    """The synthetic fixture written to disk through the CLI."""
    from gridtariff.cli import main

    out = tmp_path_factory.mktemp("synthetic") / "data"
    assert main(["generate", "--seed", str(FIXTURE_SEED), "--out", str(out)]) == 0
    return out

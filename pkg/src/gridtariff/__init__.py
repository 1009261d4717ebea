"""Revenue-neutral evaluation of dynamic distribution-grid tariff designs."""

__version__ = "0.1.0"
MODEL_REVISION = "1"

from .classification import (  # noqa: E402
    Classification,
    DesignKind,
    DesignSpec,
    PeakHourSet,
    TouWindow,
    classify_all,
    classify_category,
    load_duration_curve,
    peak_hour_set,
    tou_hour_set,
)
from .dataset import (  # noqa: E402
    CategoryKey,
    CategoryRecord,
    Dataset,
    SystemLoad,
    load_dataset,
    load_dataset_dir,
    total_consumption,
    write_dataset,
)
from .scenarios import ScenarioSpec, f_sensitivity, run_scenario, sweep  # noqa: E402
from .solver import (  # noqa: E402
    RedistributionRow,
    RevenueTarget,
    SolverConfig,
    TariffRates,
    annual_bill,
    redistribution,
    revenue_target,
    solve_peak_tariff,
)
from .synthgen import GeneratorConfig, derive_system_load, generate_dataset  # noqa: E402

"""Exception hierarchy shared by every stage of the pipeline."""

from __future__ import annotations


class GridTariffError(Exception):
    """Base class for all engine errors."""


class DataError(GridTariffError):
    """Input data is missing, malformed or violates a domain invariant."""


class MissingFile(DataError):
    pass


class SchemaViolation(DataError):
    pass


class LengthMismatch(DataError):
    pass


class NegativeValue(DataError):
    pass


class DegenerateLoad(DataError):
    """System load is constant, so a top-hours selection would be arbitrary."""


class CalendarMismatch(DataError):
    """Hour count does not match the calendar year required by a schedule."""


class InvalidConfig(GridTariffError):
    pass


class MissingPeakHours(GridTariffError):
    pass


class MissingThreshold(GridTariffError):
    pass


class InfeasiblePeakRecovery(GridTariffError):
    """No peak consumption exists to recover the share withheld from base."""


class ZeroConsumption(GridTariffError):
    pass


class IoFailure(GridTariffError):
    pass

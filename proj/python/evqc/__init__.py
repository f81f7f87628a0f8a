"""Python access to the evqc core: density fits, fleet forecast, storage LP."""

from ._core import (
    ConfigError,
    DataError,
    EssParams,
    KdeModel,
    SolverError,
    baseline_cost,
    brute_force_schedule,
    charge_duration_hours,
    forecast,
    ingest,
    needs_charge,
    run_pipeline,
    silverman_bandwidth,
    soc_after_trip,
    solve_schedule,
    tariff_prices,
)

__all__ = [
    "ConfigError",
    "DataError",
    "EssParams",
    "KdeModel",
    "SolverError",
    "baseline_cost",
    "brute_force_schedule",
    "charge_duration_hours",
    "forecast",
    "ingest",
    "needs_charge",
    "run_pipeline",
    "silverman_bandwidth",
    "soc_after_trip",
    "solve_schedule",
    "tariff_prices",
]

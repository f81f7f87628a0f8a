#pragma once

// Pipeline stages behind the CLI subcommands. Each stage reads only the
// artifacts of the previous one plus the config.

#include <filesystem>
#include <optional>

#include "evqc/config.hpp"
#include "evqc/forecast.hpp"
#include "evqc/schedule.hpp"
#include "evqc/survey.hpp"

namespace evqc {

struct IngestOutcome {
  ChainFeatureDataset dataset;
  IngestDiagnostics diagnostics;
};

/// parse -> chains -> features; writes <dataset_dir>/ and diagnostics.json.
IngestOutcome run_ingest(const PipelineConfig& cfg);

/// Loads models.json when configured, else fits the feature dataset; writes
/// models.json, load_curve.csv and forecast_summary.json.
ForecastResult run_forecast_stage(const PipelineConfig& cfg);

/// Tiles the station column over horizon_days; writes schedule.csv and
/// schedule_summary.json.
SchedulePlan run_schedule_stage(const PipelineConfig& cfg,
                                const std::optional<std::filesystem::path>& load_csv = std::nullopt);

void run_pipeline(const PipelineConfig& cfg);

void write_load_csv(const SiteLoadBundle& loads, const std::filesystem::path& path);
void write_schedule_csv(const SchedulePlan& plan, const std::filesystem::path& path);

/// Reads the station column of a load-curve CSV as a one-day profile.
LoadProfile read_station_load(const std::filesystem::path& path);

nlohmann::json provenance(const PipelineConfig& cfg);

}  // namespace evqc

#pragma once

#include <filesystem>
#include <string>

#include "evqc/forecast.hpp"
#include "evqc/schedule.hpp"
#include "evqc/survey.hpp"
#include "json.hpp"

namespace evqc {

/// Everything a pipeline run needs. Defaults reproduce the reference case
/// study (10 000 EVs, 60 kW chargers, 5445 kWh / 545 kW storage, peak-valley
/// tariff, 3-day horizon).
struct PipelineConfig {
  struct Paths {
    std::filesystem::path input_csv;
    std::filesystem::path output_dir = "out";
    std::filesystem::path dataset_dir;  // default: <output_dir>/dataset
    std::filesystem::path models;       // optional pre-fitted model file
    std::filesystem::path load_csv;     // default: <output_dir>/load_curve.csv
  } paths;
  ColumnMap columns;
  DestinationMapping destinations = DestinationMapping::nhts2017();
  FleetConfig fleet;
  EssParams ess;
  TariffSchedule tariff = TariffSchedule::guangzhou();
  int horizon_days = 3;
  unsigned threads = 1;
  std::string currency = "\xC2\xA5";  // yen sign

  std::filesystem::path dataset_dir() const;
  std::filesystem::path load_csv() const;

  /// Checks every numeric field; throws ConfigError.
  void validate() const;

  /// Echo of the effective configuration for provenance records.
  nlohmann::json to_json() const;

  /// Unknown keys are rejected. Relative paths resolve against `base_dir`.
  static PipelineConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
  static PipelineConfig load(const std::filesystem::path& file);
};

/// "HH:MM" -> minutes; "24:00" is accepted as 1440.
int parse_clock(const std::string& text);

}  // namespace evqc

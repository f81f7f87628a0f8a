#pragma once

#include <filesystem>
#include <fstream>

#include "evqc/forecast.hpp"
#include "evqc/survey.hpp"

namespace evqc::testing {

inline ChainFeatureDataset fixture_dataset() {
  std::ifstream in(std::filesystem::path(EVQC_DATA_DIR) / "trips_fixture.csv");
  IngestDiagnostics diag;
  const auto recs = parse_records(in, ColumnMap{}, DestinationMapping::nhts2017(), diag);
  return extract_features(build_chains(recs, &diag));
}

inline const ForecastModels& fixture_models() {
  static const ForecastModels models = ForecastModels::fit(fixture_dataset());
  return models;
}

/// Every distribution a single point (bandwidth 1e-9), all mass on `type`.
inline ForecastModels point_models(ChainType type, double first_end_min, double length_km,
                                   double velocity_kmh, double dwell_min) {
  const double h = 1e-9;
  const auto pos = Support::at_least(0.0);
  ForecastModels::ChainModels m;
  m.first_end_time = KdeModel({first_end_min}, h, Support{0.0, 1440.0});
  for (std::size_t k = 0; k < type.trip_count(); ++k) {
    m.length_km.emplace_back(std::vector<double>{length_km}, h, pos);
    m.velocity_kmh.emplace_back(std::vector<double>{velocity_kmh}, h, pos);
  }
  for (std::size_t k = 0; k < type.midway_count(); ++k) {
    m.dwell_min.emplace_back(std::vector<double>{dwell_min}, h, pos);
  }
  ChainProportions p{};
  p[type.index()] = 1.0;
  std::array<std::optional<ForecastModels::ChainModels>, ChainType::kCount> all;
  all[type.index()] = std::move(m);
  return ForecastModels(p, std::move(all));
}

}  // namespace evqc::testing

#pragma once

// Household travel-survey ingestion: CSV rows -> trip records -> home-based
// trip chains -> per-chain-type feature samples.

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "evqc/site.hpp"
#include "json.hpp"

namespace evqc {

constexpr double kKmPerMile = 1.609344;
constexpr int kMinutesPerDay = 1440;

/// Source column names for each TripRecord field. `origin` is optional:
/// when the named column is absent from the header, the first trip of a
/// travel day is taken to depart from home.
struct ColumnMap {
  std::string household = "HOUSEID";
  std::string vehicle = "VEHID";
  std::string travel_day = "TRAVDAY";
  std::string start_time = "STRTTIME";
  std::string end_time = "ENDTIME";
  std::string duration = "TRVLCMIN";
  std::string length = "TRPMILES";
  std::string destination = "WHYTO";
  std::string origin = "WHYFROM";
};

/// Survey purpose code -> site class. Codes without an entry map to O.
class DestinationMapping {
 public:
  DestinationMapping() = default;
  explicit DestinationMapping(std::map<int, SiteClass> table) : table_(std::move(table)) {}

  /// Purpose codes of the 2017 trip file (WHYTO / WHYFROM).
  static DestinationMapping nhts2017();

  SiteClass map(int code) const;
  const std::map<int, SiteClass>& table() const { return table_; }

 private:
  std::map<int, SiteClass> table_;
};

struct TripRecord {
  std::string household_id;
  std::string vehicle_id;
  int travel_day = 0;
  int start_time = 0;  // minutes since midnight, [0, 1440)
  int end_time = 0;    // minutes since midnight, [0, 1440); may be < start_time on a midnight wrap
  double duration = 0.0;   // minutes, > 0
  double length_km = 0.0;  // >= 0
  SiteClass destination = SiteClass::O;
  std::optional<SiteClass> origin;
  std::size_t source_line = 0;
};

struct RejectedRow {
  std::size_t line = 0;
  std::string reason;
};

/// Machine-readable audit of everything ingestion dropped.
struct IngestDiagnostics {
  std::size_t rows_read = 0;
  std::vector<RejectedRow> rejected_rows;
  std::size_t chains_emitted = 0;
  std::map<std::string, std::size_t> discarded_segments;  // reason -> count

  std::size_t rows_rejected() const { return rejected_rows.size(); }
  nlohmann::json to_json() const;
};

/// Parse HHMM (e.g. 830 or "0830") into minutes since midnight.
std::optional<int> parse_hhmm(std::string_view text);

/// Throws ConfigError when a mapped column is missing from the header;
/// invalid rows are skipped and recorded in `diag`.
std::vector<TripRecord> parse_records(std::istream& csv, const ColumnMap& columns,
                                      const DestinationMapping& destinations,
                                      IngestDiagnostics& diag);

struct TripChain {
  std::string household_id;
  std::string vehicle_id;
  int travel_day = 0;
  std::vector<TripRecord> trips;
  ChainType chain_type;
  // Unwrapped times: monotone within the chain, may exceed 1440 after midnight.
  std::vector<int> start_minutes;
  std::vector<int> end_minutes;
  std::vector<double> dwell_minutes;  // size trips - 1
};

/// Re-validates home closure, trip count, time order and dwell consistency.
bool is_valid_chain(const TripChain& chain);

/// Segments each (household, vehicle, day) trip sequence at home arrivals
/// and keeps the 2- and 3-trip home-closed segments. Output is sorted by
/// (household, vehicle, day, start time).
std::vector<TripChain> build_chains(const std::vector<TripRecord>& records,
                                    IngestDiagnostics* diag = nullptr);

enum class Feature { EndTime, Length, Velocity, Dwell };
inline constexpr std::array<Feature, 4> kAllFeatures = {Feature::EndTime, Feature::Length,
                                                        Feature::Velocity, Feature::Dwell};
std::string_view to_string(Feature f);

struct ChainTypeFeatures {
  std::size_t count = 0;
  std::vector<std::vector<double>> end_time;      // per trip, minutes
  std::vector<std::vector<double>> length_km;     // per trip
  std::vector<std::vector<double>> velocity_kmh;  // per trip; zero-length trips excluded
  std::vector<std::vector<double>> dwell_min;     // per midway site

  const std::vector<std::vector<double>>& series(Feature f) const;
  std::vector<std::vector<double>>& series(Feature f);
};

struct ChainFeatureDataset {
  std::array<ChainTypeFeatures, ChainType::kCount> types;

  ChainFeatureDataset();
  const ChainTypeFeatures& operator[](ChainType ct) const { return types[ct.index()]; }
  ChainTypeFeatures& operator[](ChainType ct) { return types[ct.index()]; }
  std::size_t total_chains() const;
};

ChainFeatureDataset extract_features(const std::vector<TripChain>& chains);

using ChainProportions = std::array<double, ChainType::kCount>;

/// Throws DataError when the dataset holds no chains.
ChainProportions chain_type_proportions(const ChainFeatureDataset& ds);

/// Writes one CSV per (chain type, feature, trip index) plus manifest.json.
/// `extra` is merged into the manifest (diagnostics, provenance).
void write_dataset(const ChainFeatureDataset& ds, const std::filesystem::path& dir,
                   const nlohmann::json& extra = nlohmann::json::object());
ChainFeatureDataset read_dataset(const std::filesystem::path& dir);

}  // namespace evqc

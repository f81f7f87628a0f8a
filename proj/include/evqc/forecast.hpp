#pragma once

// Monte-Carlo charging-load forecast for a quick-charge station. Each
// vehicle runs one sampled home-based chain per day over a 48 h window;
// only the final 24 h is reported.

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "evqc/kde.hpp"
#include "evqc/random.hpp"
#include "evqc/site.hpp"
#include "evqc/survey.hpp"
#include "json.hpp"

namespace evqc {

using SiteWeights = std::array<double, kSiteCount>;

struct FleetConfig {
  double p_own = 0.5;        // share of users with a private charging post
  std::size_t n_ev = 10000;
  double p_charging = 60.0;  // kW
  double c_ev = 40.0;        // kWh
  double u = 0.2;            // kWh/km
  SiteWeights q_pro = {0.04, 0.1, 0.2, 0.1, 0.1};
  double soc_reserve = 0.3;
  int slot_minutes = 15;
  std::uint64_t seed = 20190525;

  /// Throws ConfigError on any out-of-range field.
  void validate() const;
  nlohmann::json to_json() const;
};

struct SocUpdate {
  double soc = 0.0;
  bool infeasible = false;  // the unclamped value went below zero
};

/// SOC after driving `length_km`: soc - u * length / c_ev, clamped at 0.
SocUpdate soc_after_trip(double soc, double length_km, double u, double c_ev);

/// True iff the SOC left after the next trip would be at or below `reserve`.
bool needs_charge(double soc, double next_length_km, double u, double c_ev, double reserve);

/// Charging time bounded by the stay and by the time to reach full charge.
double charge_duration_hours(double soc, double stay_hours, double c_ev, double p_charging);

/// Fitted distributions for every (chain type, feature, trip index) the
/// simulator draws from, plus the chain-type mix.
class ForecastModels {
 public:
  struct ChainModels {
    std::optional<KdeModel> first_end_time;  // minutes, support [0, 1440]
    std::vector<KdeModel> length_km;         // per trip
    std::vector<KdeModel> velocity_kmh;      // per trip
    std::vector<KdeModel> dwell_min;         // per midway site
  };

  ForecastModels() = default;
  ForecastModels(ChainProportions proportions, std::array<std::optional<ChainModels>, ChainType::kCount> models);

  /// Fits a model set for every chain type with a nonzero count.
  static ForecastModels fit(const ChainFeatureDataset& ds);

  const ChainProportions& proportions() const { return proportions_; }
  const ChainModels& chain(ChainType ct) const;
  bool has_chain(ChainType ct) const { return models_[ct.index()].has_value(); }

  /// Throws ConfigError when a chain type with positive probability lacks
  /// any of its required distributions.
  void validate() const;

  nlohmann::json to_json() const;
  static ForecastModels from_json(const nlohmann::json& j);

 private:
  ChainProportions proportions_{};
  std::array<std::optional<ChainModels>, ChainType::kCount> models_;
};

struct ChargeEvent {
  SiteClass site = SiteClass::H;
  double start_min = 0.0;  // on the simulation axis, 0 = midnight of day 1
  double duration_min = 0.0;
  std::uint64_t vehicle = 0;

  double energy_kwh(double p_charging) const { return p_charging * duration_min / 60.0; }
};

/// One sampled day: absolute trip times on the simulation axis.
struct SampledChain {
  ChainType type;
  std::vector<double> start_min;
  std::vector<double> end_min;
  std::vector<double> length_km;
  std::vector<double> dwell_min;
};

struct VehicleSetup {
  bool has_private_post = false;
  double initial_soc = 1.0;
};

struct VehicleTrace {
  VehicleSetup setup;
  std::vector<ChargeEvent> events;
  std::vector<double> soc_observations;
  std::size_t infeasible_trips = 0;
};

inline constexpr int kSimulatedDays = 2;
inline constexpr double kSimulationMinutes = kSimulatedDays * 1440.0;

/// Draws one day's chain starting on day `day` (0-based).
SampledChain sample_chain(const ForecastModels& models, int day, RandomStream& rng);

/// Runs the two-day trip/charge flow of one vehicle with explicit setup.
VehicleTrace simulate_vehicle(const FleetConfig& cfg, const ForecastModels& models,
                              const VehicleSetup& setup, RandomStream& chain_rng,
                              std::uint64_t vehicle = 0);

/// Derives setup and chain draws from independent substreams of
/// (cfg.seed, vehicle), so changing p_own leaves sampled chains unchanged.
VehicleTrace simulate_vehicle(const FleetConfig& cfg, const ForecastModels& models,
                              std::uint64_t vehicle);

struct LoadProfile {
  double origin_min = 0.0;  // axis time of slot 0
  int slot_minutes = 15;
  std::vector<double> power_kw;

  std::size_t slots() const { return power_kw.size(); }
  double slot_start(std::size_t i) const { return origin_min + static_cast<double>(i) * slot_minutes; }
  double horizon_min() const { return static_cast<double>(slots()) * slot_minutes; }
  double energy_kwh() const;
};

struct SiteLoadBundle {
  std::array<LoadProfile, kSiteCount> sites;
  LoadProfile station;

  const LoadProfile& site(SiteClass s) const { return sites[index_of(s)]; }
};

/// Adds each event's power over its duration to its site curve within
/// [window_start, window_start + window_minutes), prorating partially
/// covered slots; station = sum_i q_pro[i] * site_i.
SiteLoadBundle accumulate_loads(const std::vector<ChargeEvent>& events, const FleetConfig& cfg,
                                double window_start_min, double window_minutes);

/// The reported window: the last 24 h of the 48 h simulation.
SiteLoadBundle accumulate_loads(const std::vector<ChargeEvent>& events, const FleetConfig& cfg);

struct ForecastSummary {
  double total_site_energy_kwh = 0.0;  // report window, all sites
  SiteWeights site_energy_kwh{};
  double station_energy_kwh = 0.0;
  double event_energy_kwh = 0.0;  // events clipped to the report window
  std::size_t events = 0;
  std::size_t infeasible_trips = 0;
  std::size_t soc_observations = 0;
  double soc_min = 1.0;
  double soc_max = 0.0;

  nlohmann::json to_json() const;
};

struct ForecastResult {
  SiteLoadBundle loads;
  ForecastSummary summary;
  std::vector<ChargeEvent> events;  // vehicle order, full 48 h axis
};

/// Simulates cfg.n_ev vehicles. Output is identical for any thread count.
ForecastResult run_forecast(const FleetConfig& cfg, const ForecastModels& models,
                            unsigned threads = 1);

}  // namespace evqc

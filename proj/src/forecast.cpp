#include "evqc/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include "evqc/errors.hpp"

namespace evqc {

using nlohmann::json;

namespace {

constexpr double kMinVelocityKmh = 1.0;
constexpr int kVelocityRedraws = 100;

// Substream purposes; a vehicle owns streams [4v, 4v + 3].
constexpr std::uint64_t kStreamOwnership = 0;
constexpr std::uint64_t kStreamInitialSoc = 1;
constexpr std::uint64_t kStreamChains = 2;

std::uint64_t substream(std::uint64_t vehicle, std::uint64_t purpose) { return vehicle * 4 + purpose; }

// Neumaier compensated accumulator.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      carry += (sum - t) + v;
    } else {
      carry += (v - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + carry; }
};

ChainType draw_chain_type(const ChainProportions& p, RandomStream& rng) {
  const double u = rng.uniform();
  double cum = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    last_positive = i;
    cum += p[i];
    if (u < cum) return ChainType::from_index(i);
  }
  return ChainType::from_index(last_positive);
}

double draw_velocity(const KdeModel& model, RandomStream& rng) {
  for (int i = 0; i < kVelocityRedraws; ++i) {
    const double v = model.sample(rng);
    if (v > kMinVelocityKmh) return v;
  }
  return kMinVelocityKmh;
}

}  // namespace

void FleetConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("fleet: " + what); };
  if (!(p_own >= 0.0 && p_own <= 1.0)) fail("p_own must lie in [0, 1]");
  if (!(p_charging > 0.0)) fail("p_charging must be positive");
  if (!(c_ev > 0.0)) fail("c_ev must be positive");
  if (!(u > 0.0)) fail("u must be positive");
  if (!(soc_reserve >= 0.0 && soc_reserve < 1.0)) fail("soc_reserve must lie in [0, 1)");
  for (double q : q_pro) {
    if (!(q >= 0.0 && q <= 1.0)) fail("q_pro entries must lie in [0, 1]");
  }
  if (slot_minutes <= 0 || 1440 % slot_minutes != 0) fail("slot_minutes must divide 1440");
}

json FleetConfig::to_json() const {
  return {{"p_own", p_own},       {"n_ev", n_ev}, {"p_charging", p_charging},
          {"c_ev", c_ev},         {"u", u},       {"q_pro", q_pro},
          {"soc_reserve", soc_reserve}, {"slot_minutes", slot_minutes}, {"seed", seed}};
}

SocUpdate soc_after_trip(double soc, double length_km, double u, double c_ev) {
  const double next = soc - u * length_km / c_ev;
  if (next < 0.0) return {0.0, true};
  return {next, false};
}

bool needs_charge(double soc, double next_length_km, double u, double c_ev, double reserve) {
  return soc - u * next_length_km / c_ev <= reserve;
}

double charge_duration_hours(double soc, double stay_hours, double c_ev, double p_charging) {
  return std::max(0.0, std::min(stay_hours, (1.0 - soc) * c_ev / p_charging));
}

// ---------------------------------------------------------------------------

ForecastModels::ForecastModels(ChainProportions proportions,
                               std::array<std::optional<ChainModels>, ChainType::kCount> models)
    : proportions_(proportions), models_(std::move(models)) {}

ForecastModels ForecastModels::fit(const ChainFeatureDataset& ds) {
  const auto proportions = chain_type_proportions(ds);
  std::array<std::optional<ChainModels>, ChainType::kCount> models;
  const auto positive = Support::at_least(0.0);
  for (std::size_t i = 0; i < ChainType::kCount; ++i) {
    const auto& f = ds.types[i];
    if (f.count == 0) continue;
    const auto ct = ChainType::from_index(i);
    auto fit_series = [&](const std::vector<double>& samples, Support support, const char* what,
                          std::size_t k) {
      if (samples.empty()) {
        throw DataError("no " + std::string(what) + " samples for " + ct.name() + " trip " +
                        std::to_string(k + 1));
      }
      return KdeModel::fit(samples, support);
    };
    ChainModels m;
    m.first_end_time = fit_series(f.end_time.at(0), Support{0.0, 1440.0}, "end_time", 0);
    for (std::size_t k = 0; k < ct.trip_count(); ++k) {
      m.length_km.push_back(fit_series(f.length_km[k], positive, "length", k));
      m.velocity_kmh.push_back(fit_series(f.velocity_kmh[k], positive, "velocity", k));
    }
    for (std::size_t k = 0; k < ct.midway_count(); ++k) {
      m.dwell_min.push_back(fit_series(f.dwell_min[k], positive, "dwell", k));
    }
    models[i] = std::move(m);
  }
  ForecastModels out(proportions, std::move(models));
  out.validate();
  return out;
}

const ForecastModels::ChainModels& ForecastModels::chain(ChainType ct) const {
  const auto& m = models_[ct.index()];
  if (!m) throw ConfigError("no fitted distributions for chain type " + ct.name());
  return *m;
}

void ForecastModels::validate() const {
  double total = 0.0;
  for (std::size_t i = 0; i < ChainType::kCount; ++i) {
    const double p = proportions_[i];
    if (!(p >= 0.0)) throw ConfigError("chain proportions must be nonnegative");
    total += p;
    if (p == 0.0) continue;
    const auto ct = ChainType::from_index(i);
    const auto& m = models_[i];
    if (!m || !m->first_end_time || m->length_km.size() != ct.trip_count() ||
        m->velocity_kmh.size() != ct.trip_count() || m->dwell_min.size() != ct.midway_count()) {
      throw ConfigError("incomplete model set for chain type " + ct.name());
    }
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("chain proportions must sum to 1");
}

json ForecastModels::to_json() const {
  json chains = json::object();
  for (std::size_t i = 0; i < ChainType::kCount; ++i) {
    const auto& m = models_[i];
    if (!m) continue;
    auto list = [](const std::vector<KdeModel>& v) {
      json a = json::array();
      for (const auto& k : v) a.push_back(k.to_json());
      return a;
    };
    chains[ChainType::from_index(i).name()] = {
        {"end_time", json::array({m->first_end_time->to_json()})},
        {"length_km", list(m->length_km)},
        {"velocity_kmh", list(m->velocity_kmh)},
        {"dwell_min", list(m->dwell_min)}};
  }
  return {{"format", "evqc-forecast-models/1"}, {"proportions", proportions_}, {"chains", chains}};
}

ForecastModels ForecastModels::from_json(const json& j) {
  ChainProportions proportions{};
  std::array<std::optional<ChainModels>, ChainType::kCount> models;
  try {
    const auto p = j.at("proportions").get<std::vector<double>>();
    if (p.size() != ChainType::kCount) throw ConfigError("proportion vector must have 20 entries");
    std::copy(p.begin(), p.end(), proportions.begin());
    for (const auto& [name, entry] : j.at("chains").items()) {
      const auto ct = ChainType::parse(name);
      if (!ct) throw ConfigError("unknown chain type in model file: " + name);
      auto list = [](const json& a) {
        std::vector<KdeModel> v;
        for (const auto& k : a) v.push_back(KdeModel::from_json(k));
        return v;
      };
      ChainModels m;
      const auto ends = list(entry.at("end_time"));
      if (!ends.empty()) m.first_end_time = ends.front();
      m.length_km = list(entry.at("length_km"));
      m.velocity_kmh = list(entry.at("velocity_kmh"));
      m.dwell_min = list(entry.at("dwell_min"));
      models[ct->index()] = std::move(m);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed model file: ") + e.what());
  }
  ForecastModels out(proportions, std::move(models));
  out.validate();
  return out;
}

// ---------------------------------------------------------------------------

SampledChain sample_chain(const ForecastModels& models, int day, RandomStream& rng) {
  SampledChain c;
  c.type = draw_chain_type(models.proportions(), rng);
  const auto& m = models.chain(c.type);
  const std::size_t trips = c.type.trip_count();
  const double day_origin = 1440.0 * day;

  const double first_end = day_origin + m.first_end_time->sample(rng);
  std::vector<double> duration(trips);
  for (std::size_t k = 0; k < trips; ++k) {
    c.length_km.push_back(m.length_km[k].sample(rng));
    duration[k] = c.length_km[k] / draw_velocity(m.velocity_kmh[k], rng) * 60.0;
  }
  for (std::size_t k = 0; k + 1 < trips; ++k) c.dwell_min.push_back(m.dwell_min[k].sample(rng));

  c.end_min.push_back(first_end);
  c.start_min.push_back(first_end - duration[0]);
  for (std::size_t k = 1; k < trips; ++k) {
    c.start_min.push_back(c.end_min[k - 1] + c.dwell_min[k - 1]);
    c.end_min.push_back(c.start_min[k] + duration[k]);
  }
  return c;
}

namespace {

void shift_chain(SampledChain& c, double minutes) {
  for (auto& t : c.start_min) t += minutes;
  for (auto& t : c.end_min) t += minutes;
}

}  // namespace

VehicleTrace simulate_vehicle(const FleetConfig& cfg, const ForecastModels& models,
                              const VehicleSetup& setup, RandomStream& chain_rng,
                              std::uint64_t vehicle) {
  // Day kSimulatedDays is drawn only to know the next morning's first leg.
  std::array<SampledChain, kSimulatedDays + 1> days;
  for (int d = 0; d <= kSimulatedDays; ++d) {
    days[d] = sample_chain(models, d, chain_rng);
    // A vehicle cannot leave before it is home from the previous chain.
    if (d > 0 && days[d].start_min.front() < days[d - 1].end_min.back()) {
      shift_chain(days[d], days[d - 1].end_min.back() - days[d].start_min.front());
    }
  }

  VehicleTrace trace;
  trace.setup = setup;
  double soc = setup.initial_soc;
  trace.soc_observations.push_back(soc);

  auto charge_at = [&](SiteClass site, double arrival, double stay_min, double next_length) {
    if (!needs_charge(soc, next_length, cfg.u, cfg.c_ev, cfg.soc_reserve)) return;
    const double hours = charge_duration_hours(soc, stay_min / 60.0, cfg.c_ev, cfg.p_charging);
    if (hours <= 0.0) return;
    trace.events.push_back({site, arrival, hours * 60.0, vehicle});
    soc = std::min(1.0, soc + hours * cfg.p_charging / cfg.c_ev);
    trace.soc_observations.push_back(soc);
  };

  for (int d = 0; d < kSimulatedDays; ++d) {
    const auto& chain = days[d];
    const std::size_t trips = chain.type.trip_count();
    for (std::size_t k = 0; k < trips; ++k) {
      const auto step = soc_after_trip(soc, chain.length_km[k], cfg.u, cfg.c_ev);
      soc = step.soc;
      if (step.infeasible) ++trace.infeasible_trips;
      trace.soc_observations.push_back(soc);

      const SiteClass site = chain.type.destination(k);
      const double arrival = chain.end_min[k];
      if (site != SiteClass::H) {
        charge_at(site, arrival, chain.dwell_min[k], chain.length_km[k + 1]);
      } else if (setup.has_private_post) {
        soc = 1.0;
        trace.soc_observations.push_back(soc);
      } else {
        const auto& next = days[d + 1];
        charge_at(SiteClass::H, arrival, std::max(0.0, next.start_min.front() - arrival),
                  next.length_km.front());
      }
    }
  }
  return trace;
}

VehicleTrace simulate_vehicle(const FleetConfig& cfg, const ForecastModels& models,
                              std::uint64_t vehicle) {
  RandomStream own_rng(cfg.seed, substream(vehicle, kStreamOwnership));
  RandomStream soc_rng(cfg.seed, substream(vehicle, kStreamInitialSoc));
  RandomStream chain_rng(cfg.seed, substream(vehicle, kStreamChains));
  VehicleSetup setup;
  setup.has_private_post = own_rng.uniform() < cfg.p_own;
  const double drawn_soc = soc_rng.uniform(0.5, 1.0);
  setup.initial_soc = setup.has_private_post ? 1.0 : drawn_soc;
  return simulate_vehicle(cfg, models, setup, chain_rng, vehicle);
}

// ---------------------------------------------------------------------------

double LoadProfile::energy_kwh() const {
  CompensatedSum acc;
  for (double p : power_kw) acc.add(p * slot_minutes / 60.0);
  return acc.value();
}

SiteLoadBundle accumulate_loads(const std::vector<ChargeEvent>& events, const FleetConfig& cfg,
                                double window_start_min, double window_minutes) {
  const int slot = cfg.slot_minutes;
  const auto slots = static_cast<std::size_t>(std::llround(window_minutes / slot));
  const double window_end = window_start_min + window_minutes;

  std::array<std::vector<CompensatedSum>, kSiteCount> acc;
  for (auto& a : acc) a.assign(slots, {});
  for (const auto& ev : events) {
    const double s = std::max(ev.start_min, window_start_min);
    const double e = std::min(ev.start_min + ev.duration_min, window_end);
    if (!(e > s)) continue;
    auto& curve = acc[index_of(ev.site)];
    auto first = static_cast<std::size_t>(std::floor((s - window_start_min) / slot));
    for (std::size_t i = first; i < slots; ++i) {
      const double lo = window_start_min + static_cast<double>(i) * slot;
      const double hi = lo + slot;
      if (lo >= e) break;
      const double overlap = std::min(hi, e) - std::max(lo, s);
      if (overlap > 0.0) curve[i].add(cfg.p_charging * overlap / slot);
    }
  }

  SiteLoadBundle bundle;
  for (std::size_t site = 0; site < kSiteCount; ++site) {
    auto& prof = bundle.sites[site];
    prof.origin_min = window_start_min;
    prof.slot_minutes = slot;
    prof.power_kw.resize(slots);
    for (std::size_t i = 0; i < slots; ++i) prof.power_kw[i] = std::max(0.0, acc[site][i].value());
  }
  bundle.station.origin_min = window_start_min;
  bundle.station.slot_minutes = slot;
  bundle.station.power_kw.assign(slots, 0.0);
  for (std::size_t i = 0; i < slots; ++i) {
    double v = 0.0;
    for (std::size_t site = 0; site < kSiteCount; ++site) v += cfg.q_pro[site] * bundle.sites[site].power_kw[i];
    bundle.station.power_kw[i] = v;
  }
  return bundle;
}

SiteLoadBundle accumulate_loads(const std::vector<ChargeEvent>& events, const FleetConfig& cfg) {
  return accumulate_loads(events, cfg, kSimulationMinutes - 1440.0, 1440.0);
}

json ForecastSummary::to_json() const {
  json per_site = json::object();
  for (const auto s : kAllSites) per_site[std::string(to_string(s))] = site_energy_kwh[index_of(s)];
  return {{"total_site_energy_kwh", total_site_energy_kwh},
          {"site_energy_kwh", per_site},
          {"station_energy_kwh", station_energy_kwh},
          {"event_energy_kwh", event_energy_kwh},
          {"charge_events", events},
          {"infeasible_trips", infeasible_trips},
          {"soc_observations", soc_observations},
          {"soc_min", soc_min},
          {"soc_max", soc_max}};
}

ForecastResult run_forecast(const FleetConfig& cfg, const ForecastModels& models, unsigned threads) {
  cfg.validate();
  models.validate();
  const std::size_t n = cfg.n_ev;
  std::vector<VehicleTrace> traces(n);

  threads = std::max(1u, threads);
  const std::size_t workers = std::min<std::size_t>(threads, std::max<std::size_t>(n, 1));
  auto run_block = [&](std::size_t begin, std::size_t end) {
    for (std::size_t v = begin; v < end; ++v) traces[v] = simulate_vehicle(cfg, models, v);
  };
  if (workers <= 1) {
    run_block(0, n);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = std::min(n, w * chunk);
      const std::size_t end = std::min(n, begin + chunk);
      pool.emplace_back(run_block, begin, end);
    }
  }

  // Reduction in vehicle order keeps the result independent of the split.
  ForecastResult result;
  ForecastSummary& sum = result.summary;
  for (auto& t : traces) {
    sum.infeasible_trips += t.infeasible_trips;
    for (double s : t.soc_observations) {
      sum.soc_min = std::min(sum.soc_min, s);
      sum.soc_max = std::max(sum.soc_max, s);
    }
    sum.soc_observations += t.soc_observations.size();
    result.events.insert(result.events.end(), t.events.begin(), t.events.end());
  }
  result.loads = accumulate_loads(result.events, cfg);

  const double w0 = kSimulationMinutes - 1440.0;
  CompensatedSum event_energy;
  for (const auto& ev : result.events) {
    const double s = std::max(ev.start_min, w0);
    const double e = std::min(ev.start_min + ev.duration_min, kSimulationMinutes);
    if (e > s) {
      event_energy.add(cfg.p_charging * (e - s) / 60.0);
      ++sum.events;
    }
  }
  sum.event_energy_kwh = event_energy.value();
  CompensatedSum total;
  for (const auto s : kAllSites) {
    const double e = result.loads.site(s).energy_kwh();
    sum.site_energy_kwh[index_of(s)] = e;
    total.add(e);
  }
  sum.total_site_energy_kwh = total.value();
  sum.station_energy_kwh = result.loads.station.energy_kwh();
  return result;
}

}  // namespace evqc

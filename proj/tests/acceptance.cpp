// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "evqc/forecast.hpp"
#include "evqc/pipeline.hpp"
#include "evqc/schedule.hpp"
#include "fixture_models.hpp"
#include "oracles.hpp"

using namespace evqc;

namespace {

int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
  std::printf("[%s] %d %s: %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

std::size_t argmax(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

void case_study_saving(const ForecastModels& models) {
  const auto t0 = std::chrono::steady_clock::now();
  const FleetConfig cfg;
  const auto day = run_forecast(cfg, models).loads.station;
  const auto plan = multi_day_schedule({day, day, day}, TariffSchedule::guangzhou(), EssParams{});
  const double secs = seconds_since(t0);
  const double s = plan.saving_fraction;
  report(1, "case-study saving", s >= 0.15 && s <= 0.35 && secs < 120.0,
         fmt("saving %.4f (band 0.15-0.35), cost %.1f vs baseline %.1f", s, plan.cost_with_ess,
             plan.cost_baseline) +
             fmt(", %.2f s", secs));
}

void peak_shape(const ForecastModels& models) {
  int hits = 0;
  std::string misses;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    FleetConfig cfg;
    cfg.seed = seed;
    const auto loads = run_forecast(cfg, models).loads;
    const double h = argmax(loads.site(SiteClass::H).power_kw) * cfg.slot_minutes / 60.0;
    const double w = argmax(loads.site(SiteClass::W).power_kw) * cfg.slot_minutes / 60.0;
    if (h >= 17.0 && h <= 20.0 && w >= 7.0 && w <= 10.0) {
      ++hits;
    } else {
      misses += fmt(" seed %.0f (H %.2f h, W %.2f h)", static_cast<double>(seed), h, w);
    }
  }
  report(2, "peak shape", hits >= 19, fmt("%.0f/20 seeds with H peak in 17-20 h and W peak in 7-10 h", hits) + misses);
}

void lp_vs_oracle() {
  RandomStream rng(7, 0);
  const std::vector<double> levels = {-100, -50, 0, 50, 100};
  int worse = 0, infeasible = 0;
  double max_gap = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    ScheduleInput in;
    const std::size_t n = 1 + rng.below(6);
    for (std::size_t t = 0; t < n; ++t) {
      in.p_ev_kw.push_back(rng.uniform(0, 200));
      in.price.push_back(rng.uniform(0.1, 1.5));
    }
    in.slot_hours = 1.0;
    EssParams ess;
    ess.c_ess = rng.uniform(20, 300);
    ess.p_charge_max = 100;
    ess.p_discharge_max = 100;
    ess.soc_init = rng.uniform(0, 1);
    ess.require_terminal_soc = rng.uniform() < 0.5;
    const auto lp = solve_schedule(in, ess);
    const auto bf = brute_force_schedule(in, ess, levels);
    max_gap = std::max(max_gap, lp.cost_with_ess - bf.cost_with_ess);
    if (lp.cost_with_ess > bf.cost_with_ess + 1e-6) ++worse;
    if (check_feasibility(lp, ess, 1e-9)) ++infeasible;
  }
  report(3, "LP vs exhaustive search", worse == 0 && infeasible == 0,
         fmt("200 instances, %.0f above the oracle, %.0f failed verification, max(lp - oracle) %.3g", worse,
             infeasible, max_gap));
}

void micro_cases() {
  int bad = 0;
  std::string which;
  auto check = [&](const char* name, double got, double want) {
    if (!(std::abs(got - want) <= 1e-9)) {
      ++bad;
      which += std::string(" ") + name;
    }
  };
  // 0.4 - 0.2 * 30 / 40 = 0.25 must trigger.
  if (!needs_charge(0.4, 30.0, 0.2, 40.0, 0.3)) {
    ++bad;
    which += " trigger";
  }
  check("soc-after-trip", soc_after_trip(1.0, 40.0, 0.2, 40.0).soc, 1.0 - 0.2 * 40.0 / 40.0);
  check("charge-duration", charge_duration_hours(0.25, 2.0, 40.0, 60.0), (1.0 - 0.25) * 40.0 / 60.0);
  LoadProfile flat;
  flat.power_kw.assign(96, 60.0);
  check("baseline", baseline_cost(flat, TariffSchedule::guangzhou()), 60.0 * (8 * 0.3338 + 10 * 0.6380 + 6 * 1.0282));
  ScheduleInput in;
  in.p_ev_kw = {0.0, 100.0, 0.0};
  in.price = {0.3338, 1.0282, 0.3338};
  in.slot_hours = 1.0;
  EssParams ess;
  ess.c_ess = 100;
  ess.p_charge_max = 100;
  ess.p_discharge_max = 100;
  ess.soc_init = 0;
  check("three-slot", solve_schedule(in, ess).cost_with_ess, 100 * 0.3338);
  FleetConfig cfg;
  cfg.p_charging = 1.0;
  std::vector<ChargeEvent> events;
  for (const auto s : kAllSites) events.push_back({s, 1440.0, 1440.0, 0});
  const auto b = accumulate_loads(events, cfg);
  double worst = 0.0;
  for (double p : b.station.power_kw) worst = std::max(worst, std::abs(p - 0.54));
  check("weighted-sum", 0.54 + worst, 0.54);
  report(4, "hand-derivable cases", bad == 0, bad == 0 ? "all six match to 1e-9" : "mismatch:" + which);
}

void kde_properties() {
  RandomStream rng(31, 0);
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> s(1 + rng.below(80));
    const double scale = rng.uniform(1, 500);
    for (auto& v : s) v = scale * rng.uniform() * rng.uniform();
    Support sup = Support::unbounded();
    if (rep % 3 == 1) sup = Support::at_least(0.0);
    if (rep % 3 == 2) sup = Support{0.0, scale};
    const double h = rep % 2 ? silverman_bandwidth(s) : scale * rng.uniform(0.01, 0.3);
    worst = std::max(worst, std::abs(oracle::pdf_integral(KdeModel(s, h, sup)) - 1.0));
  }
  const auto ref = KdeModel::fit({420, 455, 470, 480, 495, 510, 530, 600, 1020, 1100}, Support{0.0, 1440.0});
  RandomStream draws(5, 5);
  std::vector<double> d(100000);
  for (auto& x : d) x = ref.sample(draws);
  const double ks = oracle::ks_statistic(d, [&](double x) { return ref.cdf(x); });
  report(5, "density properties", worst <= 1e-6 && ks < 0.01,
         fmt("max |integral - 1| %.3g over 50 models, KS %.5f on 1e5 draws", worst, ks));
}

void conservation(const ForecastModels& models) {
  const FleetConfig cfg;
  const auto r = run_forecast(cfg, models);
  const auto& s = r.summary;
  const double rel = std::abs(s.total_site_energy_kwh - s.event_energy_kwh) / s.event_energy_kwh;
  bool exact = true;
  for (std::size_t i = 0; i < r.loads.station.slots(); ++i) {
    double v = 0.0;
    for (std::size_t k = 0; k < kSiteCount; ++k) v += cfg.q_pro[k] * r.loads.sites[k].power_kw[i];
    exact &= r.loads.station.power_kw[i] == v;
  }
  const bool soc_ok = s.soc_min >= 0.0 && s.soc_max <= 1.0;
  report(6, "conservation and bounds", soc_ok && rel <= 1e-9 && exact,
         fmt("SOC in [%.4f, %.4f], energy relative gap %.3g", s.soc_min, s.soc_max, rel) +
             (exact ? ", station equals weighted sum exactly" : ", station differs from weighted sum"));
}

void determinism(const ForecastModels& models) {
  const auto dir = std::filesystem::temp_directory_path() / "evqc_acceptance";
  std::filesystem::create_directories(dir);
  auto csv_for = [&](unsigned threads) {
    const auto path = dir / ("load_" + std::to_string(threads) + ".csv");
    write_load_csv(run_forecast(FleetConfig{}, models, threads).loads, path);
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  };
  const auto one = csv_for(1);
  const bool same = csv_for(2) == one && csv_for(8) == one;
  std::filesystem::remove_all(dir);
  report(7, "determinism", same, same ? "forecast CSV identical for 1, 2 and 8 threads" : "CSV differs between thread counts");
}

void performance(const ForecastModels& models) {
  auto t0 = std::chrono::steady_clock::now();
  const auto day = run_forecast(FleetConfig{}, models).loads.station;
  const double sim = seconds_since(t0);
  LoadProfile horizon = day;
  for (int d = 1; d < 3; ++d) horizon.power_kw.insert(horizon.power_kw.end(), day.power_kw.begin(), day.power_kw.end());
  t0 = std::chrono::steady_clock::now();
  const auto plan = solve_schedule(horizon, TariffSchedule::guangzhou(), EssParams{});
  const double lp = seconds_since(t0);
  report(8, "performance", sim <= 30.0 && lp <= 1.0 && plan.slots() == 288,
         fmt("10000-vehicle simulation %.3f s (limit 30), 288-slot LP %.3f s (limit 1)", sim, lp));
}

}  // namespace

int main() {
  const auto& models = evqc::testing::fixture_models();
  case_study_saving(models);
  peak_shape(models);
  lp_vs_oracle();
  micro_cases();
  kde_properties();
  conservation(models);
  determinism(models);
  performance(models);
  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}

#include <cmath>

#include "doctest.h"
#include "evqc/errors.hpp"
#include "evqc/forecast.hpp"
#include "fixture_models.hpp"

using namespace evqc;
using evqc::testing::fixture_models;
using evqc::testing::point_models;

TEST_CASE("trip consumption is normalized by capacity") {
  auto r = soc_after_trip(1.0, 40.0, 0.2, 40.0);
  CHECK(std::abs(r.soc - 0.8) <= 1e-12);
  CHECK_FALSE(r.infeasible);
  r = soc_after_trip(0.63, 0.0, 0.2, 40.0);
  CHECK(r.soc == 0.63);
  r = soc_after_trip(0.1, 40.0, 0.2, 40.0);
  CHECK(r.soc == 0.0);
  CHECK(r.infeasible);
}

TEST_CASE("charge trigger leaves the reserve after the next trip") {
  CHECK(needs_charge(0.4, 30.0, 0.2, 40.0, 0.3));   // 0.25 left
  CHECK_FALSE(needs_charge(1.0, 0.0, 0.2, 40.0, 0.3));
  CHECK_FALSE(needs_charge(0.5, 20.0, 0.2, 40.0, 0.3));  // 0.4 left
  CHECK(needs_charge(0.3, 0.0, 0.2, 40.0, 0.3));    // boundary counts
}

TEST_CASE("charge duration is bounded by stay and by a full battery") {
  CHECK(charge_duration_hours(0.25, 2.0, 40.0, 60.0) == doctest::Approx(0.5).epsilon(1e-14));
  const double h = charge_duration_hours(0.25, 0.2, 40.0, 60.0);
  CHECK(h == 0.2);
  CHECK(0.25 + h * 60.0 / 40.0 == doctest::Approx(0.55).epsilon(1e-14));
  CHECK(charge_duration_hours(1.0, 5.0, 40.0, 60.0) == 0.0);
}

TEST_CASE("hand-simulated commute with point distributions") {
  // 08:00 arrival at work, 60 km legs at 60 km/h, 9 h dwell.
  const auto models = point_models(ChainType::simple(SiteClass::W), 480.0, 60.0, 60.0, 540.0);
  FleetConfig cfg;
  RandomStream rng(1, 2);
  const auto trace = simulate_vehicle(cfg, models, VehicleSetup{false, 0.5}, rng);
  // Day 1: 0.5 - 0.3 = 0.2 at W; 0.2 - 0.3 <= 0.3 so charge (1 - 0.2) * 40 / 60 h.
  // Back home at 0.7; 0.7 - 0.3 > 0.3, no home charge. Day 2: 0.4 at W, charge 0.4 h.
  REQUIRE(trace.events.size() == 2);
  CHECK(trace.events[0].site == SiteClass::W);
  CHECK(trace.events[0].start_min == doctest::Approx(480.0).epsilon(1e-9));
  CHECK(trace.events[0].duration_min / 60.0 == doctest::Approx(0.8 * 40.0 / 60.0).epsilon(1e-7));
  CHECK(trace.events[1].start_min == doctest::Approx(1440.0 + 480.0).epsilon(1e-9));
  CHECK(trace.events[1].duration_min / 60.0 == doctest::Approx(0.4).epsilon(1e-7));
  CHECK(trace.infeasible_trips == 0);
}

TEST_CASE("short dwell caps the charge") {
  const auto models = point_models(ChainType::simple(SiteClass::SE), 600.0, 60.0, 60.0, 12.0);
  RandomStream rng(1, 2);
  const auto trace = simulate_vehicle(FleetConfig{}, models, VehicleSetup{true, 0.5}, rng);
  REQUIRE_FALSE(trace.events.empty());
  CHECK(trace.events[0].duration_min == doctest::Approx(12.0).epsilon(1e-7));
}

TEST_CASE("non-owners charge at home before a long first leg") {
  // 60 km legs: 1.0 -> 0.7 at SR (0.4 left after the way home: no charge),
  // 0.4 at home and next morning 0.4 - 0.3 <= 0.3 -> home charge until full.
  const auto models = point_models(ChainType::simple(SiteClass::SR), 1080.0, 60.0, 60.0, 60.0);
  RandomStream rng(4, 2);
  const auto trace = simulate_vehicle(FleetConfig{}, models, VehicleSetup{false, 1.0}, rng);
  REQUIRE_FALSE(trace.events.empty());
  CHECK(trace.events[0].site == SiteClass::H);
  CHECK(trace.events[0].duration_min == doctest::Approx(0.6 * 40.0 / 60.0 * 60.0).epsilon(1e-7));

  RandomStream rng2(4, 2);
  const auto owner = simulate_vehicle(FleetConfig{}, models, VehicleSetup{true, 1.0}, rng2);
  for (const auto& e : owner.events) CHECK(e.site != SiteClass::H);
}

TEST_CASE("private post and zero-length legs draw nothing") {
  const auto models = point_models(ChainType::complex(SiteClass::W, SiteClass::SE), 480.0, 0.0, 30.0, 60.0);
  RandomStream rng(9, 2);
  const auto trace = simulate_vehicle(FleetConfig{}, models, VehicleSetup{true, 1.0}, rng);
  CHECK(trace.events.empty());
}

TEST_CASE("SOC observations stay in [0, 1] and clamps are counted") {
  const auto models = point_models(ChainType::simple(SiteClass::W), 480.0, 500.0, 60.0, 1.0);
  RandomStream rng(2, 2);
  const auto trace = simulate_vehicle(FleetConfig{}, models, VehicleSetup{false, 0.6}, rng);
  CHECK(trace.infeasible_trips > 0);
  for (double s : trace.soc_observations) {
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
  }
}

TEST_CASE("one event on the grid") {
  FleetConfig cfg;
  const std::vector<ChargeEvent> ev = {{SiteClass::W, 480.0, 30.0, 0}};
  const auto b = accumulate_loads(ev, cfg, 0.0, 1440.0);
  REQUIRE(b.station.slots() == 96);
  for (std::size_t i = 0; i < 96; ++i) {
    const double w = (i == 32 || i == 33) ? 60.0 : 0.0;
    CHECK(b.site(SiteClass::W).power_kw[i] == w);
    CHECK(b.site(SiteClass::H).power_kw[i] == 0.0);
    CHECK(b.station.power_kw[i] == 0.1 * w);
  }
}

TEST_CASE("partial slots are prorated and the default window is the second day") {
  FleetConfig cfg;
  const std::vector<ChargeEvent> ev = {{SiteClass::SE, 1440.0 + 5.0, 20.0, 0}, {SiteClass::SE, 100.0, 20.0, 1}};
  const auto b = accumulate_loads(ev, cfg);
  CHECK(b.station.origin_min == 1440.0);
  CHECK(b.site(SiteClass::SE).power_kw[0] == doctest::Approx(40.0).epsilon(1e-14));
  CHECK(b.site(SiteClass::SE).power_kw[1] == doctest::Approx(40.0).epsilon(1e-14));
  CHECK(b.site(SiteClass::SE).power_kw[2] == 0.0);
  CHECK(b.site(SiteClass::SE).energy_kwh() == doctest::Approx(20.0).epsilon(1e-14));
  // An event crossing the end of the axis is truncated there.
  const auto t = accumulate_loads({{SiteClass::O, 2870.0, 30.0, 0}}, cfg);
  CHECK(t.site(SiteClass::O).energy_kwh() == doctest::Approx(10.0).epsilon(1e-14));
}

TEST_CASE("zero weights give a zero station") {
  FleetConfig cfg;
  cfg.q_pro = {0, 0, 0, 0, 0};
  const std::vector<ChargeEvent> ev = {{SiteClass::H, 1500.0, 300.0, 0}, {SiteClass::W, 2000.0, 30.0, 1}};
  for (double p : accumulate_loads(ev, cfg).station.power_kw) CHECK(p == 0.0);
}

TEST_CASE("unit site loads weight to 0.54") {
  FleetConfig cfg;
  cfg.p_charging = 1.0;
  std::vector<ChargeEvent> ev;
  for (const auto s : kAllSites) ev.push_back({s, 1440.0, 1440.0, 0});
  const auto b = accumulate_loads(ev, cfg);
  for (double p : b.station.power_kw) CHECK(std::abs(p - 0.54) <= 1e-9);
}

TEST_CASE("empty fleet") {
  FleetConfig cfg;
  cfg.n_ev = 0;
  const auto r = run_forecast(cfg, fixture_models(), 4);
  CHECK(r.events.empty());
  CHECK(r.summary.total_site_energy_kwh == 0.0);
  for (double p : r.loads.station.power_kw) CHECK(p == 0.0);
}

TEST_CASE("fixture fleet: conservation, weighting and bounds") {
  FleetConfig cfg;
  cfg.n_ev = 2000;
  const auto r = run_forecast(cfg, fixture_models(), 2);
  const auto& s = r.summary;
  CHECK(s.events > 0);
  CHECK(std::abs(s.total_site_energy_kwh - s.event_energy_kwh) <= 1e-9 * s.event_energy_kwh);
  CHECK(s.soc_min >= 0.0);
  CHECK(s.soc_max <= 1.0);
  for (std::size_t i = 0; i < r.loads.station.slots(); ++i) {
    double v = 0.0;
    for (std::size_t k = 0; k < kSiteCount; ++k) v += cfg.q_pro[k] * r.loads.sites[k].power_kw[i];
    CHECK(r.loads.station.power_kw[i] == v);
  }
}

TEST_CASE("thread count does not change the result") {
  FleetConfig cfg;
  cfg.n_ev = 1500;
  const auto one = run_forecast(cfg, fixture_models(), 1);
  for (unsigned t : {2u, 3u, 8u}) {
    const auto many = run_forecast(cfg, fixture_models(), t);
    for (std::size_t k = 0; k < kSiteCount; ++k) CHECK(many.loads.sites[k].power_kw == one.loads.sites[k].power_kw);
    CHECK(many.loads.station.power_kw == one.loads.station.power_kw);
  }
}

TEST_CASE("private posts never add station energy") {
  FleetConfig cfg;
  cfg.n_ev = 2000;
  cfg.p_own = 0.0;
  const double none = run_forecast(cfg, fixture_models()).summary.station_energy_kwh;
  cfg.p_own = 0.5;
  const double half = run_forecast(cfg, fixture_models()).summary.station_energy_kwh;
  cfg.p_own = 1.0;
  const double all = run_forecast(cfg, fixture_models()).summary.station_energy_kwh;
  CHECK(half <= none);
  CHECK(all <= half);
  CHECK(all < none);
}

TEST_CASE("model validation and serialization") {
  const auto& m = fixture_models();
  const auto back = ForecastModels::from_json(nlohmann::json::parse(m.to_json().dump()));
  CHECK(back.proportions() == m.proportions());
  FleetConfig cfg;
  cfg.n_ev = 300;
  CHECK(run_forecast(cfg, back).loads.station.power_kw == run_forecast(cfg, m).loads.station.power_kw);

  auto j = m.to_json();
  j["chains"].erase("H-W-H");
  CHECK_THROWS_AS(ForecastModels::from_json(j), ConfigError);

  FleetConfig bad;
  bad.c_ev = 0.0;
  CHECK_THROWS_AS(run_forecast(bad, m), ConfigError);
  bad = FleetConfig{};
  bad.q_pro[2] = 1.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

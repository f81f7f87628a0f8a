#include "evqc/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "evqc/errors.hpp"
#include "evqc/lp.hpp"

namespace evqc {

using nlohmann::json;

namespace {

constexpr double kBoundSlack = 1e-12;

bool whole_days(double minutes) {
  const double days = minutes / 1440.0;
  return minutes > 0.0 && std::abs(days - std::round(days)) < 1e-9;
}

void fill_per_day(SchedulePlan& plan) {
  plan.per_day.clear();
  const double total_min = static_cast<double>(plan.slots()) * plan.slot_hours * 60.0;
  if (!whole_days(total_min)) return;
  const auto days = static_cast<std::size_t>(std::llround(total_min / 1440.0));
  const std::size_t per = plan.slots() / days;
  for (std::size_t d = 0; d < days; ++d) {
    DayCost dc;
    for (std::size_t i = d * per; i < (d + 1) * per; ++i) {
      dc.cost_with_ess += plan.p_ch_kw[i] * plan.price[i] * plan.slot_hours;
      dc.cost_baseline += plan.p_ev_kw[i] * plan.price[i] * plan.slot_hours;
    }
    plan.per_day.push_back(dc);
  }
}

}  // namespace

TariffSchedule::TariffSchedule(std::vector<TariffWindow> windows) : windows_(std::move(windows)) {
  std::sort(windows_.begin(), windows_.end(),
            [](const TariffWindow& a, const TariffWindow& b) { return a.start_min < b.start_min; });
  if (windows_.empty()) throw ConfigError("tariff: at least one price window is required");
  int cursor = 0;
  for (const auto& w : windows_) {
    if (w.start_min != cursor) throw ConfigError("tariff: windows must tile [00:00, 24:00) without gaps or overlap");
    if (w.end_min <= w.start_min) throw ConfigError("tariff: window end must follow its start");
    if (!(w.price > 0.0)) throw ConfigError("tariff: prices must be positive");
    cursor = w.end_min;
  }
  if (cursor != 1440) throw ConfigError("tariff: windows must end at 24:00");
}

TariffSchedule TariffSchedule::guangzhou() {
  return TariffSchedule({{0, 480, 0.3338},
                         {480, 840, 0.6380},
                         {840, 1020, 1.0282},
                         {1020, 1140, 0.6380},
                         {1140, 1320, 1.0282},
                         {1320, 1440, 0.6380}});
}

TariffSchedule TariffSchedule::flat(double price) { return TariffSchedule({{0, 1440, price}}); }

double TariffSchedule::price_at(double minute) const {
  double m = std::fmod(minute, 1440.0);
  if (m < 0.0) m += 1440.0;
  for (const auto& w : windows_) {
    if (m < w.end_min) return w.price;
  }
  return windows_.back().price;
}

double TariffSchedule::mean_price(double start_min, double length_min) const {
  if (!(length_min > 0.0)) return price_at(start_min);
  double acc = 0.0;
  double t = start_min;
  const double end = start_min + length_min;
  while (t < end) {
    const double day0 = std::floor(t / 1440.0) * 1440.0;
    double m = t - day0;
    double next = day0 + 1440.0;
    for (const auto& w : windows_) {
      if (m < w.end_min) {
        next = day0 + w.end_min;
        break;
      }
    }
    const double seg_end = std::min(next, end);
    acc += price_at(t) * (seg_end - t);
    t = seg_end;
  }
  return acc / length_min;
}

std::vector<double> TariffSchedule::slot_prices(const LoadProfile& profile) const {
  std::vector<double> out(profile.slots());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = mean_price(profile.slot_start(i), profile.slot_minutes);
  return out;
}

json TariffSchedule::to_json() const {
  json a = json::array();
  for (const auto& w : windows_) a.push_back({{"start_min", w.start_min}, {"end_min", w.end_min}, {"price", w.price}});
  return a;
}

void EssParams::validate() const {
  if (!(c_ess >= 0.0)) throw ConfigError("ess: c_ess must be nonnegative");
  if (!(p_charge_max >= 0.0) || !(p_discharge_max >= 0.0)) throw ConfigError("ess: power limits must be nonnegative");
  if (!(soc_init >= 0.0 && soc_init <= 1.0)) throw ConfigError("ess: soc_init must lie in [0, 1]");
}

json EssParams::to_json() const {
  return {{"c_ess", c_ess},
          {"p_charge_max", p_charge_max},
          {"p_discharge_max", p_discharge_max},
          {"soc_init", soc_init},
          {"require_terminal_soc", require_terminal_soc},
          {"allow_export", allow_export}};
}

ScheduleInput ScheduleInput::from_profile(const LoadProfile& p_ev, const TariffSchedule& tariff) {
  ScheduleInput in;
  in.p_ev_kw = p_ev.power_kw;
  in.price = tariff.slot_prices(p_ev);
  in.slot_hours = p_ev.slot_minutes / 60.0;
  for (std::size_t i = 0; i < p_ev.slots(); ++i) in.slot_start_min.push_back(static_cast<double>(i) * p_ev.slot_minutes);
  return in;
}

json SchedulePlan::summary_json() const {
  json days = json::array();
  for (std::size_t d = 0; d < per_day.size(); ++d) {
    const auto& dc = per_day[d];
    days.push_back({{"day", d + 1},
                    {"cost_with_ess", dc.cost_with_ess},
                    {"cost_baseline", dc.cost_baseline}});
  }
  return {{"cost_with_ess", cost_with_ess},
          {"cost_baseline", cost_baseline},
          {"saving_fraction", saving_fraction},
          {"per_day", days}};
}

double baseline_cost(const std::vector<double>& p_ev_kw, const std::vector<double>& price, double slot_hours) {
  if (p_ev_kw.size() != price.size()) throw DataError("load and price horizons differ");
  double cost = 0.0;
  for (std::size_t i = 0; i < p_ev_kw.size(); ++i) cost += p_ev_kw[i] * price[i] * slot_hours;
  return cost;
}

double baseline_cost(const LoadProfile& p_ev, const TariffSchedule& tariff) {
  if (!whole_days(p_ev.horizon_min())) throw DataError("load horizon must cover whole tariff days");
  return baseline_cost(p_ev.power_kw, tariff.slot_prices(p_ev), p_ev.slot_minutes / 60.0);
}

SchedulePlan make_plan(const ScheduleInput& in, const EssParams& ess, std::vector<double> p_ess_kw) {
  const std::size_t n = in.p_ev_kw.size();
  if (in.price.size() != n || p_ess_kw.size() != n) throw DataError("schedule vectors differ in length");
  SchedulePlan plan;
  plan.slot_hours = in.slot_hours;
  plan.price = in.price;
  plan.p_ev_kw = in.p_ev_kw;
  plan.p_ess_kw = std::move(p_ess_kw);
  plan.slot_start_min = in.slot_start_min;
  if (plan.slot_start_min.size() != n) {
    plan.slot_start_min.resize(n);
    for (std::size_t i = 0; i < n; ++i) plan.slot_start_min[i] = static_cast<double>(i) * in.slot_hours * 60.0;
  }
  plan.p_ch_kw.resize(n);
  plan.soc_ess.resize(n);
  double stored = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    plan.p_ch_kw[i] = plan.p_ev_kw[i] + plan.p_ess_kw[i];
    stored += plan.p_ess_kw[i] * in.slot_hours;
    plan.soc_ess[i] = ess.c_ess > 0.0 ? ess.soc_init + stored / ess.c_ess : ess.soc_init;
  }
  plan.cost_baseline = baseline_cost(plan.p_ev_kw, plan.price, in.slot_hours);
  plan.cost_with_ess = baseline_cost(plan.p_ch_kw, plan.price, in.slot_hours);
  plan.saving_fraction =
      plan.cost_baseline > 0.0 ? (plan.cost_baseline - plan.cost_with_ess) / plan.cost_baseline : 0.0;
  fill_per_day(plan);
  return plan;
}

std::optional<std::string> check_feasibility(const SchedulePlan& plan, const EssParams& ess, double tol) {
  const std::size_t n = plan.slots();
  // Independent re-derivation of the SOC trajectory with compensated sums.
  double sum = 0.0, carry = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = plan.p_ess_kw[i];
    const std::string at = " at slot " + std::to_string(i);
    if (p < -ess.p_discharge_max - tol || p > ess.p_charge_max + tol) return "power limit violated" + at;
    if (std::abs(plan.p_ch_kw[i] - (plan.p_ev_kw[i] + p)) > tol) return "station draw mismatch" + at;
    if (!ess.allow_export && plan.p_ch_kw[i] < -tol) return "export while non-export is enforced" + at;
    const double v = p * plan.slot_hours;
    const double t = sum + v;
    carry += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
    if (ess.c_ess > 0.0) {
      const double expected = ess.soc_init + (sum + carry) / ess.c_ess;
      if (std::abs(plan.soc_ess[i] - expected) > tol) return "SOC recursion mismatch" + at;
    } else if (std::abs(p) > tol) {
      return "power flow without storage" + at;
    }
    if (plan.soc_ess[i] < -tol || plan.soc_ess[i] > 1.0 + tol) return "SOC out of [0, 1]" + at;
  }
  if (ess.require_terminal_soc && n > 0 && plan.soc_ess.back() < ess.soc_init - tol) {
    return "terminal SOC below initial SOC";
  }
  return std::nullopt;
}

SchedulePlan solve_schedule(const ScheduleInput& in, const EssParams& ess) {
  ess.validate();
  const std::size_t n = in.p_ev_kw.size();
  if (in.price.size() != n) throw DataError("load and price horizons differ");
  if (!(in.slot_hours > 0.0)) throw DataError("slot length must be positive");
  std::vector<double> p_ess(n, 0.0);
  if (n == 0 || ess.c_ess == 0.0 || (ess.p_charge_max == 0.0 && ess.p_discharge_max == 0.0)) {
    return make_plan(in, ess, std::move(p_ess));
  }

  // Decision variable x_t = y_t - lo_t >= 0 where y_t is the SOC change in
  // slot t; constraints are written on prefix sums of x.
  const double to_soc = in.slot_hours / ess.c_ess;
  std::vector<double> lo(n), hi(n), prefix_lo(n);
  double lsum = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    double lower = -ess.p_discharge_max;
    if (!ess.allow_export) lower = std::max(lower, -std::max(0.0, in.p_ev_kw[t]));
    lo[t] = lower * to_soc;
    hi[t] = ess.p_charge_max * to_soc;
    lsum += lo[t];
    prefix_lo[t] = lsum;
  }
  const double s0 = ess.soc_init;

  lp::DenseSimplex::Matrix a;
  std::vector<double> b;
  a.reserve(3 * n + 1);
  for (std::size_t t = 0; t < n; ++t) {
    std::vector<double> row(n, 0.0);
    row[t] = 1.0;
    a.push_back(std::move(row));
    b.push_back(hi[t] - lo[t]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(n, 0.0);
    std::fill(row.begin(), row.begin() + static_cast<long>(i) + 1, 1.0);
    a.push_back(row);
    b.push_back(1.0 - s0 - prefix_lo[i]);
    for (auto& v : row) v = -v;
    a.push_back(std::move(row));
    b.push_back(s0 + prefix_lo[i]);
  }
  if (ess.require_terminal_soc) {
    a.emplace_back(n, -1.0);
    b.push_back(prefix_lo[n - 1]);
  }
  std::vector<double> c(n);
  for (std::size_t t = 0; t < n; ++t) c[t] = -in.price[t];

  lp::DenseSimplex simplex(a, b, c);
  const auto res = simplex.solve();
  switch (res.status) {
    case lp::Status::Optimal: break;
    case lp::Status::Infeasible: throw SolverError("storage schedule LP reported infeasible");
    case lp::Status::Unbounded: throw SolverError("storage schedule LP reported unbounded");
    case lp::Status::IterationLimit: throw SolverError("storage schedule LP hit its iteration limit");
  }
  for (std::size_t t = 0; t < n; ++t) {
    const double y = std::clamp(res.x[t] + lo[t], lo[t], hi[t]);
    p_ess[t] = y / to_soc;
  }
  auto plan = make_plan(in, ess, std::move(p_ess));
  if (const auto bad = check_feasibility(plan, ess)) throw SolverError("LP solution failed verification: " + *bad);
  return plan;
}

SchedulePlan solve_schedule(const LoadProfile& p_ev, const TariffSchedule& tariff, const EssParams& ess) {
  if (!whole_days(p_ev.horizon_min())) throw DataError("load horizon must cover whole tariff days");
  return solve_schedule(ScheduleInput::from_profile(p_ev, tariff), ess);
}

SchedulePlan brute_force_schedule(const ScheduleInput& in, const EssParams& ess,
                                  const std::vector<double>& power_levels, std::size_t max_slots) {
  ess.validate();
  const std::size_t n = in.p_ev_kw.size();
  if (in.price.size() != n) throw DataError("load and price horizons differ");
  if (n > max_slots) throw ConfigError("brute-force oracle limited to " + std::to_string(max_slots) + " slots");
  if (std::find(power_levels.begin(), power_levels.end(), 0.0) == power_levels.end()) {
    throw ConfigError("brute-force power levels must include 0");
  }

  std::vector<double> current(n, 0.0), best;
  double best_cost = std::numeric_limits<double>::infinity();

  auto feasible_level = [&](std::size_t t, double level, double soc, double& next_soc) {
    if (level < -ess.p_discharge_max - kBoundSlack || level > ess.p_charge_max + kBoundSlack) return false;
    if (!ess.allow_export && in.p_ev_kw[t] + level < -kBoundSlack) return false;
    if (ess.c_ess == 0.0) {
      next_soc = soc;
      return level == 0.0;
    }
    next_soc = soc + level * in.slot_hours / ess.c_ess;
    return next_soc >= -kBoundSlack && next_soc <= 1.0 + kBoundSlack;
  };

  auto search = [&](auto&& self, std::size_t t, double soc, double cost) -> void {
    if (t == n) {
      if (ess.require_terminal_soc && soc < ess.soc_init - kBoundSlack) return;
      if (cost < best_cost) {
        best_cost = cost;
        best = current;
      }
      return;
    }
    for (double level : power_levels) {
      double next_soc = 0.0;
      if (!feasible_level(t, level, soc, next_soc)) continue;
      current[t] = level;
      self(self, t + 1, next_soc, cost + (in.p_ev_kw[t] + level) * in.price[t] * in.slot_hours);
    }
  };
  search(search, 0, ess.soc_init, 0.0);
  if (best.size() != n) throw SolverError("brute-force oracle found no feasible assignment");
  return make_plan(in, ess, std::move(best));
}

SchedulePlan multi_day_schedule(const std::vector<LoadProfile>& days, const TariffSchedule& tariff,
                                const EssParams& ess) {
  if (days.empty()) throw DataError("multi-day schedule needs at least one day of load");
  LoadProfile joined;
  joined.origin_min = days.front().origin_min;
  joined.slot_minutes = days.front().slot_minutes;
  for (const auto& d : days) {
    if (d.slot_minutes != joined.slot_minutes) throw DataError("day profiles use different slot grids");
    if (!whole_days(d.horizon_min()) || std::llround(d.horizon_min()) != 1440) {
      throw DataError("each day profile must cover exactly 24 h");
    }
    joined.power_kw.insert(joined.power_kw.end(), d.power_kw.begin(), d.power_kw.end());
  }
  return solve_schedule(joined, tariff, ess);
}

}  // namespace evqc

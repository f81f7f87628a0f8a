#pragma once

// Day-ahead energy-storage scheduling against a time-of-use tariff.
//
// Per slot t with step dt hours:
//   p_ch(t)  = p_ev(t) + p_ess(t)
//   minimize sum_t p_ch(t) * price(t) * dt
//   -p_discharge_max <= p_ess(t) <= p_charge_max
//   soc(t_i) = soc_init + dt / c_ess * sum_{k<=i} p_ess(t_k),  0 <= soc <= 1
// optionally soc(end) >= soc_init and p_ch(t) >= 0 (no export).

#include <optional>
#include <string>
#include <vector>

#include "evqc/forecast.hpp"
#include "json.hpp"

namespace evqc {

struct TariffWindow {
  int start_min = 0;
  int end_min = 0;
  double price = 0.0;
};

/// Daily price schedule; windows tile [0, 1440) and repeat every day.
class TariffSchedule {
 public:
  explicit TariffSchedule(std::vector<TariffWindow> windows);

  /// Peak-valley tariff: 0.3338 valley (00-08), 0.6380 flat (08-14,
  /// 17-19, 22-24), 1.0282 peak (14-17, 19-22).
  static TariffSchedule guangzhou();
  static TariffSchedule flat(double price);

  double price_at(double minute) const;
  /// Time-weighted mean price over [start, start + length).
  double mean_price(double start_min, double length_min) const;
  std::vector<double> slot_prices(const LoadProfile& profile) const;

  const std::vector<TariffWindow>& windows() const { return windows_; }
  nlohmann::json to_json() const;

 private:
  std::vector<TariffWindow> windows_;
};

struct EssParams {
  double c_ess = 5445.0;           // kWh
  double p_charge_max = 545.0;     // kW
  double p_discharge_max = 545.0;  // kW
  double soc_init = 0.5;
  bool require_terminal_soc = true;
  bool allow_export = false;

  void validate() const;
  nlohmann::json to_json() const;
};

/// Slot-level problem data independent of any calendar.
struct ScheduleInput {
  std::vector<double> p_ev_kw;
  std::vector<double> price;
  double slot_hours = 0.25;
  std::vector<double> slot_start_min;  // optional labels; filled 0, dt, ... when empty

  static ScheduleInput from_profile(const LoadProfile& p_ev, const TariffSchedule& tariff);
};

struct DayCost {
  double cost_with_ess = 0.0;
  double cost_baseline = 0.0;
};

struct SchedulePlan {
  std::vector<double> slot_start_min;
  std::vector<double> price;
  std::vector<double> p_ev_kw;
  std::vector<double> p_ess_kw;
  std::vector<double> p_ch_kw;
  std::vector<double> soc_ess;
  double slot_hours = 0.25;
  double cost_with_ess = 0.0;
  double cost_baseline = 0.0;
  double saving_fraction = 0.0;
  std::vector<DayCost> per_day;

  std::size_t slots() const { return p_ess_kw.size(); }
  nlohmann::json summary_json() const;
};

double baseline_cost(const std::vector<double>& p_ev_kw, const std::vector<double>& price,
                     double slot_hours);
/// Profile horizon must be a whole number of days (the tariff is daily).
double baseline_cost(const LoadProfile& p_ev, const TariffSchedule& tariff);

/// Builds a plan (soc trajectory, totals) from a chosen p_ess vector.
SchedulePlan make_plan(const ScheduleInput& in, const EssParams& ess, std::vector<double> p_ess_kw);

/// Returns a description of the first violated constraint, if any.
std::optional<std::string> check_feasibility(const SchedulePlan& plan, const EssParams& ess,
                                             double tol = 1e-9);

/// Exact LP solve. Throws ConfigError for invalid ESS parameters and
/// SolverError if the solver fails or its answer does not verify.
SchedulePlan solve_schedule(const ScheduleInput& in, const EssParams& ess);
SchedulePlan solve_schedule(const LoadProfile& p_ev, const TariffSchedule& tariff,
                            const EssParams& ess);

/// Exhaustive search over `power_levels` (kW, must contain 0) per slot.
SchedulePlan brute_force_schedule(const ScheduleInput& in, const EssParams& ess,
                                  const std::vector<double>& power_levels,
                                  std::size_t max_slots = 8);

/// One LP over the concatenated days with SOC carried across midnight;
/// fills the per-day cost breakdown.
SchedulePlan multi_day_schedule(const std::vector<LoadProfile>& days, const TariffSchedule& tariff,
                                const EssParams& ess);

}  // namespace evqc

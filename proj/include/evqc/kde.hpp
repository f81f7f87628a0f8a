#pragma once

#include <limits>
#include <span>
#include <vector>

#include "evqc/random.hpp"
#include "json.hpp"

namespace evqc {

/// Closed interval; either end may be infinite.
struct Support {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  static Support unbounded() { return {}; }
  static Support at_least(double lo) { return {lo, std::numeric_limits<double>::infinity()}; }

  bool contains(double x) const { return x >= lo && x <= hi; }
  friend bool operator==(const Support&, const Support&) = default;
};

/// Silverman's rule of thumb, 0.9 * min(sd, IQR/1.34) * n^(-1/5), with
/// type-7 (linear interpolation) quantiles. Degenerate samples fall back to
/// max(1e-6, 0.01 * max(1, |value|)).
double silverman_bandwidth(std::span<const double> samples);

/// Gaussian kernel density truncated to a support interval and
/// renormalized by the kernel mass that falls inside it. Immutable.
class KdeModel {
 public:
  KdeModel(std::vector<double> samples, double bandwidth, Support support);

  static KdeModel fit(std::vector<double> samples, Support support = Support::unbounded());

  double pdf(double x) const;
  double cdf(double x) const;

  /// Picks a sample uniformly and perturbs it by bandwidth * N(0, 1);
  /// out-of-support draws are redrawn up to 1000 times, then clamped.
  double sample(RandomStream& rng) const;

  const std::vector<double>& samples() const { return samples_; }
  double bandwidth() const { return bandwidth_; }
  const Support& support() const { return support_; }
  double support_mass() const { return mass_; }

  nlohmann::json to_json() const;
  static KdeModel from_json(const nlohmann::json& j);

 private:
  std::vector<double> samples_;
  double bandwidth_;
  Support support_;
  double mass_ = 1.0;
};

}  // namespace evqc

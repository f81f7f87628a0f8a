#include "evqc/kde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "evqc/errors.hpp"

namespace evqc {

namespace {

constexpr int kMaxRejections = 1000;

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double quantile_linear(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

nlohmann::json bound_to_json(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

double bound_from_json(const nlohmann::json& j, double if_null) {
  return j.is_null() ? if_null : j.get<double>();
}

}  // namespace

double silverman_bandwidth(std::span<const double> samples) {
  if (samples.empty()) throw DataError("cannot fit a density to an empty sample");
  const auto n = static_cast<double>(samples.size());
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  const double sd = samples.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;

  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr = quantile_linear(sorted, 0.75) - quantile_linear(sorted, 0.25);

  double spread = std::min(sd, iqr / 1.34);
  // Heavily tied data can have zero IQR with positive spread; use sd then.
  if (!(spread > 0.0)) spread = sd;
  const double h = 0.9 * spread * std::pow(n, -0.2);
  if (h > 0.0) return h;
  return std::max(1e-6, 0.01 * std::max(1.0, std::abs(mean)));
}

KdeModel::KdeModel(std::vector<double> samples, double bandwidth, Support support)
    : samples_(std::move(samples)), bandwidth_(bandwidth), support_(support) {
  if (samples_.empty()) throw DataError("density model needs at least one sample");
  if (!(bandwidth_ > 0.0) || !std::isfinite(bandwidth_)) throw DataError("bandwidth must be positive");
  if (!(support_.lo <= support_.hi)) throw DataError("empty support interval");
  double mass = 0.0;
  for (double s : samples_) {
    if (!std::isfinite(s) || !support_.contains(s)) throw DataError("sample outside density support");
    mass += std_normal_cdf((support_.hi - s) / bandwidth_) - std_normal_cdf((support_.lo - s) / bandwidth_);
  }
  mass_ = mass / static_cast<double>(samples_.size());
  if (!(mass_ > 0.0)) throw DataError("density support carries no kernel mass");
}

KdeModel KdeModel::fit(std::vector<double> samples, Support support) {
  const double h = silverman_bandwidth(samples);
  return KdeModel(std::move(samples), h, support);
}

double KdeModel::pdf(double x) const {
  if (!support_.contains(x)) return 0.0;
  double acc = 0.0;
  for (double s : samples_) {
    const double z = (x - s) / bandwidth_;
    acc += std::exp(-0.5 * z * z);
  }
  const double norm = static_cast<double>(samples_.size()) * bandwidth_ * std::sqrt(2.0 * std::numbers::pi);
  return acc / norm / mass_;
}

double KdeModel::cdf(double x) const {
  if (x < support_.lo) return 0.0;
  if (x >= support_.hi) return 1.0;
  double acc = 0.0;
  for (double s : samples_) {
    acc += std_normal_cdf((x - s) / bandwidth_) - std_normal_cdf((support_.lo - s) / bandwidth_);
  }
  return std::clamp(acc / static_cast<double>(samples_.size()) / mass_, 0.0, 1.0);
}

double KdeModel::sample(RandomStream& rng) const {
  double v = 0.0;
  for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
    const double center = samples_[rng.below(samples_.size())];
    v = center + bandwidth_ * rng.normal();
    if (support_.contains(v)) return v;
  }
  return std::clamp(v, support_.lo, support_.hi);
}

nlohmann::json KdeModel::to_json() const {
  return {{"samples", samples_},
          {"bandwidth", bandwidth_},
          {"support", {bound_to_json(support_.lo), bound_to_json(support_.hi)}}};
}

KdeModel KdeModel::from_json(const nlohmann::json& j) {
  try {
    const auto& sup = j.at("support");
    Support support{bound_from_json(sup.at(0), -std::numeric_limits<double>::infinity()),
                    bound_from_json(sup.at(1), std::numeric_limits<double>::infinity())};
    return KdeModel(j.at("samples").get<std::vector<double>>(), j.at("bandwidth").get<double>(),
                    support);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed density model: ") + e.what());
  }
}

}  // namespace evqc

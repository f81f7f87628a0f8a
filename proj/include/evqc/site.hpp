#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace evqc {

/// Destination class of a trip. The enumerator order is the vector index
/// order used everywhere (load columns, q_pro weights).
enum class SiteClass : std::uint8_t { H = 0, W = 1, SE = 2, SR = 3, O = 4 };

inline constexpr std::size_t kSiteCount = 5;
inline constexpr std::array<SiteClass, kSiteCount> kAllSites = {
    SiteClass::H, SiteClass::W, SiteClass::SE, SiteClass::SR, SiteClass::O};

std::string_view to_string(SiteClass s);
std::optional<SiteClass> parse_site(std::string_view name);

constexpr std::size_t index_of(SiteClass s) { return static_cast<std::size_t>(s); }

/// Home-based chain type. Indices 0..3 are the simple chains H-X-H
/// (X in W, SE, SR, O); indices 4..19 are the complex chains H-X-Y-H in
/// row-major (X, Y) order.
class ChainType {
 public:
  static constexpr std::size_t kCount = 20;
  static constexpr std::size_t kSimpleCount = 4;

  constexpr ChainType() = default;

  static ChainType from_index(std::size_t index);
  static ChainType simple(SiteClass midway);
  static ChainType complex(SiteClass first, SiteClass second);
  static std::optional<ChainType> parse(std::string_view name);

  constexpr std::size_t index() const { return index_; }
  bool is_simple() const { return index_ < kSimpleCount; }
  std::size_t trip_count() const { return is_simple() ? 2 : 3; }
  std::size_t midway_count() const { return trip_count() - 1; }

  /// Destination of trip k (0-based). The last trip always ends at H.
  SiteClass destination(std::size_t trip) const;
  std::string name() const;

  friend constexpr bool operator==(ChainType, ChainType) = default;
  friend constexpr auto operator<=>(ChainType, ChainType) = default;

 private:
  constexpr explicit ChainType(std::size_t index) : index_(index) {}
  std::size_t index_ = 0;
};

}  // namespace evqc

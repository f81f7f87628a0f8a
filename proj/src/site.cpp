#include "evqc/site.hpp"

#include <stdexcept>

namespace evqc {

namespace {

constexpr std::array<std::string_view, kSiteCount> kSiteNames = {"H", "W", "SE", "SR", "O"};

// Non-home sites in ChainType order.
constexpr std::array<SiteClass, 4> kMidwaySites = {SiteClass::W, SiteClass::SE, SiteClass::SR,
                                                   SiteClass::O};

std::size_t midway_slot(SiteClass s) {
  if (s == SiteClass::H) throw std::invalid_argument("home cannot be a midway site");
  return index_of(s) - 1;
}

}  // namespace

std::string_view to_string(SiteClass s) { return kSiteNames[index_of(s)]; }

std::optional<SiteClass> parse_site(std::string_view name) {
  for (std::size_t i = 0; i < kSiteCount; ++i) {
    if (kSiteNames[i] == name) return kAllSites[i];
  }
  return std::nullopt;
}

ChainType ChainType::from_index(std::size_t index) {
  if (index >= kCount) throw std::out_of_range("chain type index out of range");
  return ChainType(index);
}

ChainType ChainType::simple(SiteClass midway) { return ChainType(midway_slot(midway)); }

ChainType ChainType::complex(SiteClass first, SiteClass second) {
  return ChainType(kSimpleCount + 4 * midway_slot(first) + midway_slot(second));
}

SiteClass ChainType::destination(std::size_t trip) const {
  if (trip >= trip_count()) throw std::out_of_range("trip index out of range for chain type");
  if (trip + 1 == trip_count()) return SiteClass::H;
  if (is_simple()) return kMidwaySites[index_];
  const std::size_t k = index_ - kSimpleCount;
  return kMidwaySites[trip == 0 ? k / 4 : k % 4];
}

std::string ChainType::name() const {
  std::string out = "H";
  for (std::size_t t = 0; t < trip_count(); ++t) {
    out += '-';
    out += to_string(destination(t));
  }
  return out;
}

std::optional<ChainType> ChainType::parse(std::string_view name) {
  for (std::size_t i = 0; i < kCount; ++i) {
    const auto ct = ChainType(i);
    if (ct.name() == name) return ct;
  }
  return std::nullopt;
}

}  // namespace evqc

#include "evqc/survey.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <tuple>
#include <utility>

#include "evqc/csv.hpp"
#include "evqc/errors.hpp"

namespace evqc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

template <typename T>
std::optional<T> parse_number(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return std::nullopt;
  T value{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) return std::nullopt;
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value)) return std::nullopt;
  }
  return value;
}

constexpr int kWrapToleranceMinutes = 1;

}  // namespace

DestinationMapping DestinationMapping::nhts2017() {
  using S = SiteClass;
  return DestinationMapping({
      {1, S::H},   // regular home activities
      {2, S::H},   // work from home
      {3, S::W},   // work at a non-home location
      {4, S::W},   // work activity to drop off / pick up
      {5, S::W},   // other work-related
      {6, S::O},   // school
      {7, S::O},   // child care
      {8, S::O},   // adult care
      {9, S::SE},  // buy goods
      {10, S::SE}, // buy services
      {11, S::SR}, // buy meals
      {12, S::SE}, // general errands
      {13, S::SR}, // recreational
      {14, S::SR}, // exercise
      {15, S::SR}, // visit friends or relatives
      {16, S::SE}, // health care visit
      {17, S::O},  // religious / community
      {18, S::O},  // something else
      {19, S::O},  // drop off / pick up someone
      {97, S::O},
  });
}

SiteClass DestinationMapping::map(int code) const {
  const auto it = table_.find(code);
  return it == table_.end() ? SiteClass::O : it->second;
}

json IngestDiagnostics::to_json() const {
  json rejected = json::array();
  for (const auto& r : rejected_rows) rejected.push_back({{"line", r.line}, {"reason", r.reason}});
  json by_reason = json::object();
  for (const auto& r : rejected_rows) {
    by_reason[r.reason] = by_reason.value(r.reason, std::size_t{0}) + 1;
  }
  return {{"rows_read", rows_read},
          {"rows_rejected", rows_rejected()},
          {"rejected_by_reason", by_reason},
          {"rejected_rows", rejected},
          {"chains_emitted", chains_emitted},
          {"discarded_segments", discarded_segments}};
}

std::optional<int> parse_hhmm(std::string_view text) {
  const auto v = parse_number<int>(text);
  if (!v || *v < 0) return std::nullopt;
  const int hours = *v / 100;
  const int minutes = *v % 100;
  if (hours > 23 || minutes > 59) return std::nullopt;
  return hours * 60 + minutes;
}

std::vector<TripRecord> parse_records(std::istream& in, const ColumnMap& columns,
                                      const DestinationMapping& destinations,
                                      IngestDiagnostics& diag) {
  csv::Reader reader(in);
  std::vector<std::string> header;
  if (!reader.next(header)) throw DataError("input CSV has no header row");
  for (auto& h : header) h = std::string(trim(h));

  auto find_column = [&](const std::string& name) -> std::optional<std::size_t> {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  auto require_column = [&](const std::string& field, const std::string& name) {
    const auto idx = find_column(name);
    if (!idx) throw ConfigError("missing mapped column '" + name + "' (field " + field + ")");
    return *idx;
  };

  const std::size_t c_house = require_column("household", columns.household);
  const std::size_t c_veh = require_column("vehicle", columns.vehicle);
  const std::size_t c_day = require_column("travel_day", columns.travel_day);
  const std::size_t c_start = require_column("start_time", columns.start_time);
  const std::size_t c_end = require_column("end_time", columns.end_time);
  const std::size_t c_dur = require_column("duration", columns.duration);
  const std::size_t c_len = require_column("length", columns.length);
  const std::size_t c_dest = require_column("destination", columns.destination);
  const auto c_origin = columns.origin.empty() ? std::nullopt : find_column(columns.origin);

  std::vector<TripRecord> out;
  std::vector<std::string> row;
  while (reader.next(row)) {
    ++diag.rows_read;
    const std::size_t line = reader.line_number();
    auto reject = [&](std::string reason) { diag.rejected_rows.push_back({line, std::move(reason)}); };

    if (row.size() < header.size()) {
      reject("short row");
      continue;
    }
    TripRecord rec;
    rec.source_line = line;
    rec.household_id = std::string(trim(row[c_house]));
    rec.vehicle_id = std::string(trim(row[c_veh]));
    if (rec.household_id.empty() || rec.vehicle_id.empty()) {
      reject("missing identifier");
      continue;
    }
    // Negative vehicle codes mark trips not made in a household vehicle.
    if (rec.vehicle_id.front() == '-') {
      reject("non-household vehicle");
      continue;
    }
    const auto day = parse_number<int>(row[c_day]);
    const auto start = parse_hhmm(row[c_start]);
    const auto end = parse_hhmm(row[c_end]);
    const auto duration = parse_number<double>(row[c_dur]);
    const auto miles = parse_number<double>(row[c_len]);
    const auto dest = parse_number<int>(row[c_dest]);
    if (!day) { reject("unparseable travel day"); continue; }
    if (!start || !end) { reject("invalid HHMM time"); continue; }
    if (!duration) { reject("unparseable duration"); continue; }
    if (!miles) { reject("unparseable length"); continue; }
    if (!dest) { reject("unparseable destination"); continue; }
    if (*duration <= 0.0) { reject("non-positive duration"); continue; }
    if (*miles < 0.0) { reject("negative length"); continue; }
    if (*end < *start) {
      const int wrapped = *end + kMinutesPerDay - *start;
      if (std::abs(wrapped - *duration) > kWrapToleranceMinutes) {
        reject("end before start without midnight wrap");
        continue;
      }
    }
    rec.travel_day = *day;
    rec.start_time = *start;
    rec.end_time = *end;
    rec.duration = *duration;
    rec.length_km = *miles * kKmPerMile;
    rec.destination = destinations.map(*dest);
    if (c_origin) {
      const auto orig = parse_number<int>(row[*c_origin]);
      if (!orig) { reject("unparseable origin"); continue; }
      rec.origin = destinations.map(*orig);
    }
    out.push_back(std::move(rec));
  }
  return out;
}

bool is_valid_chain(const TripChain& c) {
  const std::size_t n = c.trips.size();
  if (n < 2 || n > 3) return false;
  if (c.chain_type.trip_count() != n) return false;
  if (c.start_minutes.size() != n || c.end_minutes.size() != n) return false;
  if (c.dwell_minutes.size() != n - 1) return false;
  if (c.trips.back().destination != SiteClass::H) return false;
  if (c.trips.front().origin && *c.trips.front().origin != SiteClass::H) return false;
  for (std::size_t k = 0; k < n; ++k) {
    if (c.trips[k].destination != c.chain_type.destination(k)) return false;
    if (c.end_minutes[k] < c.start_minutes[k]) return false;
    if (k + 1 < n) {
      const double gap = c.start_minutes[k + 1] - c.end_minutes[k];
      if (gap < 0 || c.dwell_minutes[k] != gap) return false;
    }
  }
  return true;
}

namespace {

void discard(IngestDiagnostics* diag, const std::string& reason) {
  if (diag) ++diag->discarded_segments[reason];
}

std::optional<TripChain> close_segment(const std::vector<const TripRecord*>& seg,
                                       bool starts_home, IngestDiagnostics* diag) {
  if (!starts_home) { discard(diag, "not_from_home"); return std::nullopt; }
  if (seg.size() < 2) { discard(diag, "single_trip"); return std::nullopt; }
  if (seg.size() > 3) { discard(diag, "too_many_trips"); return std::nullopt; }

  TripChain chain;
  chain.household_id = seg.front()->household_id;
  chain.vehicle_id = seg.front()->vehicle_id;
  chain.travel_day = seg.front()->travel_day;
  for (const auto* t : seg) {
    chain.trips.push_back(*t);
    chain.start_minutes.push_back(t->start_time);
    chain.end_minutes.push_back(t->end_time >= t->start_time ? t->end_time
                                                              : t->end_time + kMinutesPerDay);
  }
  for (std::size_t k = 0; k + 1 < seg.size(); ++k) {
    const int gap = chain.start_minutes[k + 1] - chain.end_minutes[k];
    if (gap < 0) { discard(diag, "overlapping_trips"); return std::nullopt; }
    chain.dwell_minutes.push_back(gap);
  }
  const auto& d = chain.trips;
  chain.chain_type = d.size() == 2 ? ChainType::simple(d[0].destination)
                                   : ChainType::complex(d[0].destination, d[1].destination);
  return chain;
}

}  // namespace

std::vector<TripChain> build_chains(const std::vector<TripRecord>& records,
                                    IngestDiagnostics* diag) {
  using Key = std::tuple<std::string, std::string, int>;
  std::map<Key, std::vector<const TripRecord*>> groups;
  for (const auto& r : records) groups[{r.household_id, r.vehicle_id, r.travel_day}].push_back(&r);

  std::vector<TripChain> chains;
  for (auto& [key, trips] : groups) {
    std::sort(trips.begin(), trips.end(), [](const TripRecord* a, const TripRecord* b) {
      return std::tie(a->start_time, a->source_line) < std::tie(b->start_time, b->source_line);
    });
    std::vector<const TripRecord*> segment;
    bool starts_home = !trips.front()->origin || *trips.front()->origin == SiteClass::H;
    for (const auto* t : trips) {
      segment.push_back(t);
      if (t->destination != SiteClass::H) continue;
      if (auto chain = close_segment(segment, starts_home, diag)) {
        chains.push_back(std::move(*chain));
      }
      segment.clear();
      starts_home = true;
    }
    if (!segment.empty()) discard(diag, "never_returns_home");
  }
  if (diag) diag->chains_emitted += chains.size();
  return chains;
}

std::string_view to_string(Feature f) {
  switch (f) {
    case Feature::EndTime: return "end_time";
    case Feature::Length: return "length_km";
    case Feature::Velocity: return "velocity_kmh";
    case Feature::Dwell: return "dwell_min";
  }
  return "unknown";
}

const std::vector<std::vector<double>>& ChainTypeFeatures::series(Feature f) const {
  switch (f) {
    case Feature::EndTime: return end_time;
    case Feature::Length: return length_km;
    case Feature::Velocity: return velocity_kmh;
    case Feature::Dwell: return dwell_min;
  }
  return end_time;
}

std::vector<std::vector<double>>& ChainTypeFeatures::series(Feature f) {
  return const_cast<std::vector<std::vector<double>>&>(std::as_const(*this).series(f));
}

ChainFeatureDataset::ChainFeatureDataset() {
  for (std::size_t i = 0; i < ChainType::kCount; ++i) {
    const auto ct = ChainType::from_index(i);
    auto& f = types[i];
    f.end_time.resize(ct.trip_count());
    f.length_km.resize(ct.trip_count());
    f.velocity_kmh.resize(ct.trip_count());
    f.dwell_min.resize(ct.midway_count());
  }
}

std::size_t ChainFeatureDataset::total_chains() const {
  std::size_t n = 0;
  for (const auto& t : types) n += t.count;
  return n;
}

ChainFeatureDataset extract_features(const std::vector<TripChain>& chains) {
  ChainFeatureDataset ds;
  for (const auto& c : chains) {
    auto& f = ds[c.chain_type];
    ++f.count;
    for (std::size_t k = 0; k < c.trips.size(); ++k) {
      const auto& t = c.trips[k];
      f.end_time[k].push_back(c.end_minutes[k]);
      f.length_km[k].push_back(t.length_km);
      if (t.duration > 0.0 && t.length_km > 0.0) {
        f.velocity_kmh[k].push_back(t.length_km / (t.duration / 60.0));
      }
    }
    for (std::size_t k = 0; k < c.dwell_minutes.size(); ++k) {
      f.dwell_min[k].push_back(c.dwell_minutes[k]);
    }
  }
  return ds;
}

ChainProportions chain_type_proportions(const ChainFeatureDataset& ds) {
  const std::size_t total = ds.total_chains();
  if (total == 0) throw DataError("zero usable chains: cannot build a chain-type distribution");
  ChainProportions p{};
  for (std::size_t i = 0; i < ChainType::kCount; ++i) {
    p[i] = static_cast<double>(ds.types[i].count) / static_cast<double>(total);
  }
  return p;
}

namespace {

std::string series_filename(ChainType ct, Feature f, std::size_t k) {
  return ct.name() + "__" + std::string(to_string(f)) + "__" + std::to_string(k + 1) + ".csv";
}

}  // namespace

void write_dataset(const ChainFeatureDataset& ds, const fs::path& dir, const json& extra) {
  fs::create_directories(dir);
  const std::size_t total = ds.total_chains();
  json types = json::array();
  for (std::size_t i = 0; i < ChainType::kCount; ++i) {
    const auto ct = ChainType::from_index(i);
    const auto& f = ds.types[i];
    json entry = {{"name", ct.name()},
                  {"count", f.count},
                  {"proportion", total ? static_cast<double>(f.count) / total : 0.0}};
    if (f.count > 0) {
      json files = json::object();
      for (const auto feat : kAllFeatures) {
        json names = json::array();
        const auto& series = f.series(feat);
        for (std::size_t k = 0; k < series.size(); ++k) {
          const auto name = series_filename(ct, feat, k);
          std::ofstream out(dir / name, std::ios::binary);
          if (!out) throw DataError("cannot write " + (dir / name).string());
          out << "value\n";
          for (double v : series[k]) out << csv::format_double(v) << '\n';
          names.push_back(name);
        }
        files[std::string(to_string(feat))] = names;
      }
      entry["files"] = files;
    }
    types.push_back(entry);
  }
  json manifest = {{"format", "evqc-feature-dataset/1"},
                   {"total_chains", total},
                   {"chain_types", types}};
  json proportions = json::array();
  for (const auto& t : types) proportions.push_back(t["proportion"]);
  manifest["proportions"] = proportions;
  for (const auto& [k, v] : extra.items()) manifest[k] = v;

  std::ofstream out(dir / "manifest.json", std::ios::binary);
  if (!out) throw DataError("cannot write " + (dir / "manifest.json").string());
  out << manifest.dump(2) << '\n';
}

ChainFeatureDataset read_dataset(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw DataError("feature dataset manifest not found in " + dir.string());
  json manifest;
  try {
    manifest = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("malformed dataset manifest: " + std::string(e.what()));
  }
  ChainFeatureDataset ds;
  for (const auto& entry : manifest.at("chain_types")) {
    const auto ct = ChainType::parse(entry.at("name").get<std::string>());
    if (!ct) throw DataError("unknown chain type in manifest: " + entry.at("name").dump());
    auto& f = ds[*ct];
    f.count = entry.at("count").get<std::size_t>();
    if (f.count == 0) continue;
    const auto& files = entry.at("files");
    for (const auto feat : kAllFeatures) {
      auto& series = f.series(feat);
      const auto& names = files.at(std::string(to_string(feat)));
      if (names.size() != series.size()) throw DataError("feature file count mismatch for " + ct->name());
      for (std::size_t k = 0; k < series.size(); ++k) {
        const auto path = dir / names[k].get<std::string>();
        std::ifstream sin(path);
        if (!sin) throw DataError("missing feature file " + path.string());
        csv::Reader reader(sin);
        std::vector<std::string> row;
        reader.next(row);  // header
        while (reader.next(row)) {
          const auto v = parse_number<double>(row.at(0));
          if (!v) throw DataError("bad value in " + path.string());
          series[k].push_back(*v);
        }
      }
    }
  }
  return ds;
}

}  // namespace evqc

#include "evqc/config.hpp"

#include <fstream>
#include <set>

#include "evqc/errors.hpp"

namespace evqc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("invalid value for " + where + "." + key);
  }
}

fs::path resolve(const fs::path& p, const fs::path& base) {
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

std::string clock_string(int minutes) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%02d:%02d", minutes / 60, minutes % 60);
  return buf;
}

}  // namespace

int parse_clock(const std::string& text) {
  int h = 0, m = 0;
  char colon = 0;
  if (std::sscanf(text.c_str(), "%d%c%d", &h, &colon, &m) != 3 || colon != ':' || m < 0 || m > 59 ||
      h < 0 || h > 24 || (h == 24 && m != 0)) {
    throw ConfigError("invalid clock time '" + text + "' (expected HH:MM)");
  }
  return h * 60 + m;
}

fs::path PipelineConfig::dataset_dir() const {
  return paths.dataset_dir.empty() ? paths.output_dir / "dataset" : paths.dataset_dir;
}

fs::path PipelineConfig::load_csv() const {
  return paths.load_csv.empty() ? paths.output_dir / "load_curve.csv" : paths.load_csv;
}

void PipelineConfig::validate() const {
  fleet.validate();
  ess.validate();
  if (horizon_days < 1) throw ConfigError("horizon_days must be at least 1");
  if (threads < 1) throw ConfigError("threads must be at least 1");
  if (paths.output_dir.empty()) throw ConfigError("paths.output_dir must be set");
  for (const auto* name : {&columns.household, &columns.vehicle, &columns.travel_day, &columns.start_time,
                           &columns.end_time, &columns.duration, &columns.length, &columns.destination}) {
    if (name->empty()) throw ConfigError("column names must be non-empty");
  }
}

json PipelineConfig::to_json() const {
  json dest = json::object();
  for (const auto& [code, site] : destinations.table()) dest[std::to_string(code)] = std::string(to_string(site));
  json tariff_json = json::array();
  for (const auto& w : tariff.windows()) {
    tariff_json.push_back({{"start", clock_string(w.start_min)}, {"end", clock_string(w.end_min)}, {"price", w.price}});
  }
  json fleet_json = fleet.to_json();
  fleet_json.erase("seed");
  return {{"paths",
           {{"input_csv", paths.input_csv.generic_string()},
            {"output_dir", paths.output_dir.generic_string()},
            {"dataset_dir", paths.dataset_dir.generic_string()},
            {"models", paths.models.generic_string()},
            {"load_csv", paths.load_csv.generic_string()}}},
          {"columns",
           {{"household", columns.household},
            {"vehicle", columns.vehicle},
            {"travel_day", columns.travel_day},
            {"start_time", columns.start_time},
            {"end_time", columns.end_time},
            {"duration", columns.duration},
            {"length", columns.length},
            {"destination", columns.destination},
            {"origin", columns.origin}}},
          {"destination_map", dest},
          {"fleet", fleet_json},
          {"ess", ess.to_json()},
          {"tariff", tariff_json},
          {"horizon_days", horizon_days},
          {"seed", fleet.seed},
          {"currency", currency}};
}

PipelineConfig PipelineConfig::from_json(const json& j, const fs::path& base) {
  PipelineConfig cfg;
  reject_unknown(j, {"$schema", "paths", "columns", "destination_map", "fleet", "ess", "tariff", "horizon_days",
                     "seed", "threads", "currency"},
                 "config");
  if (j.contains("paths")) {
    const auto& p = j["paths"];
    reject_unknown(p, {"input_csv", "output_dir", "dataset_dir", "models", "load_csv"}, "paths");
    std::string s;
    auto path_field = [&](const char* key, fs::path& out) {
      if (!p.contains(key)) return;
      s.clear();
      read(p, key, s, "paths");
      out = resolve(s, base);
    };
    path_field("input_csv", cfg.paths.input_csv);
    path_field("output_dir", cfg.paths.output_dir);
    path_field("dataset_dir", cfg.paths.dataset_dir);
    path_field("models", cfg.paths.models);
    path_field("load_csv", cfg.paths.load_csv);
  }
  if (j.contains("columns")) {
    const auto& c = j["columns"];
    reject_unknown(c, {"household", "vehicle", "travel_day", "start_time", "end_time", "duration", "length",
                       "destination", "origin"},
                   "columns");
    read(c, "household", cfg.columns.household, "columns");
    read(c, "vehicle", cfg.columns.vehicle, "columns");
    read(c, "travel_day", cfg.columns.travel_day, "columns");
    read(c, "start_time", cfg.columns.start_time, "columns");
    read(c, "end_time", cfg.columns.end_time, "columns");
    read(c, "duration", cfg.columns.duration, "columns");
    read(c, "length", cfg.columns.length, "columns");
    read(c, "destination", cfg.columns.destination, "columns");
    read(c, "origin", cfg.columns.origin, "columns");
  }
  if (j.contains("destination_map")) {
    const auto& d = j["destination_map"];
    if (!d.is_object()) throw ConfigError("destination_map must be an object of code -> site class");
    std::map<int, SiteClass> table;
    for (const auto& [code, site] : d.items()) {
      int c = 0;
      try {
        std::size_t used = 0;
        c = std::stoi(code, &used);
        if (used != code.size()) throw std::invalid_argument(code);
      } catch (const std::exception&) {
        throw ConfigError("destination_map key '" + code + "' is not an integer code");
      }
      const auto s = site.is_string() ? parse_site(site.get<std::string>()) : std::nullopt;
      if (!s) throw ConfigError("destination_map value for code " + code + " must be one of H, W, SE, SR, O");
      table[c] = *s;
    }
    cfg.destinations = DestinationMapping(std::move(table));
  }
  if (j.contains("fleet")) {
    const auto& f = j["fleet"];
    reject_unknown(f, {"p_own", "n_ev", "p_charging", "c_ev", "u", "q_pro", "soc_reserve", "slot_minutes"}, "fleet");
    read(f, "p_own", cfg.fleet.p_own, "fleet");
    if (f.contains("n_ev")) {
      const auto& v = f["n_ev"];
      if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError("fleet.n_ev must be a nonnegative integer");
      cfg.fleet.n_ev = v.get<std::size_t>();
    }
    read(f, "p_charging", cfg.fleet.p_charging, "fleet");
    read(f, "c_ev", cfg.fleet.c_ev, "fleet");
    read(f, "u", cfg.fleet.u, "fleet");
    if (f.contains("q_pro")) {
      std::vector<double> q;
      read(f, "q_pro", q, "fleet");
      if (q.size() != kSiteCount) throw ConfigError("fleet.q_pro must have 5 entries (H, W, SE, SR, O)");
      std::copy(q.begin(), q.end(), cfg.fleet.q_pro.begin());
    }
    read(f, "soc_reserve", cfg.fleet.soc_reserve, "fleet");
    read(f, "slot_minutes", cfg.fleet.slot_minutes, "fleet");
  }
  if (j.contains("ess")) {
    const auto& e = j["ess"];
    reject_unknown(e, {"c_ess", "p_charge_max", "p_discharge_max", "soc_init", "require_terminal_soc", "allow_export"},
                   "ess");
    read(e, "c_ess", cfg.ess.c_ess, "ess");
    read(e, "p_charge_max", cfg.ess.p_charge_max, "ess");
    read(e, "p_discharge_max", cfg.ess.p_discharge_max, "ess");
    read(e, "soc_init", cfg.ess.soc_init, "ess");
    read(e, "require_terminal_soc", cfg.ess.require_terminal_soc, "ess");
    read(e, "allow_export", cfg.ess.allow_export, "ess");
  }
  if (j.contains("tariff")) {
    const auto& t = j["tariff"];
    if (!t.is_array()) throw ConfigError("tariff must be an array of {start, end, price}");
    std::vector<TariffWindow> windows;
    for (const auto& w : t) {
      reject_unknown(w, {"start", "end", "price"}, "tariff window");
      std::string start, end;
      double price = 0.0;
      read(w, "start", start, "tariff");
      read(w, "end", end, "tariff");
      read(w, "price", price, "tariff");
      windows.push_back({parse_clock(start), parse_clock(end), price});
    }
    cfg.tariff = TariffSchedule(std::move(windows));
  }
  read(j, "horizon_days", cfg.horizon_days, "config");
  if (j.contains("seed")) {
    const auto& s = j["seed"];
    if (!s.is_number_unsigned()) throw ConfigError("seed must be a nonnegative integer");
    cfg.fleet.seed = s.get<std::uint64_t>();
  }
  read(j, "threads", cfg.threads, "config");
  read(j, "currency", cfg.currency, "config");
  cfg.validate();
  return cfg;
}

PipelineConfig PipelineConfig::load(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file " + file.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config file is not valid JSON: " + std::string(e.what()));
  }
  return from_json(j, file.parent_path());
}

}  // namespace evqc

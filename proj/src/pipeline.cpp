#include "evqc/pipeline.hpp"

#include <cmath>
#include <fstream>

#include "evqc/csv.hpp"
#include "evqc/errors.hpp"

namespace evqc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "evqc 0.1.0";

void write_json(const json& j, const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

}  // namespace

json provenance(const PipelineConfig& cfg) {
  return {{"tool", kToolVersion}, {"seed", cfg.fleet.seed}, {"config", cfg.to_json()}};
}

IngestOutcome run_ingest(const PipelineConfig& cfg) {
  if (cfg.paths.input_csv.empty()) throw ConfigError("paths.input_csv is not set");
  std::ifstream in(cfg.paths.input_csv, std::ios::binary);
  if (!in) throw DataError("cannot read input CSV " + cfg.paths.input_csv.string());

  IngestOutcome out;
  const auto records = parse_records(in, cfg.columns, cfg.destinations, out.diagnostics);
  const auto chains = build_chains(records, &out.diagnostics);
  out.dataset = extract_features(chains);
  if (out.dataset.total_chains() == 0) throw DataError("zero usable chains in " + cfg.paths.input_csv.string());

  const json diag = out.diagnostics.to_json();
  write_dataset(out.dataset, cfg.dataset_dir(), {{"diagnostics", diag}, {"provenance", provenance(cfg)}});
  write_json({{"diagnostics", diag}, {"provenance", provenance(cfg)}}, cfg.paths.output_dir / "diagnostics.json");
  return out;
}

void write_load_csv(const SiteLoadBundle& loads, const fs::path& path) {
  auto out = open_output(path);
  out << "slot_start_min,load_H_kW,load_W_kW,load_SE_kW,load_SR_kW,load_O_kW,load_station_kW\n";
  const auto& st = loads.station;
  for (std::size_t i = 0; i < st.slots(); ++i) {
    out << csv::format_double(static_cast<double>(i) * st.slot_minutes);
    for (const auto& site : loads.sites) out << ',' << csv::format_double(site.power_kw[i]);
    out << ',' << csv::format_double(st.power_kw[i]) << '\n';
  }
}

void write_schedule_csv(const SchedulePlan& plan, const fs::path& path) {
  auto out = open_output(path);
  out << "slot_start_min,price,p_ev_kw,p_ess_kw,p_ch_kw,soc_ess\n";
  for (std::size_t i = 0; i < plan.slots(); ++i) {
    out << csv::format_double(plan.slot_start_min[i]) << ',' << csv::format_double(plan.price[i]) << ','
        << csv::format_double(plan.p_ev_kw[i]) << ',' << csv::format_double(plan.p_ess_kw[i]) << ','
        << csv::format_double(plan.p_ch_kw[i]) << ',' << csv::format_double(plan.soc_ess[i]) << '\n';
  }
}

LoadProfile read_station_load(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read load CSV " + path.string());
  csv::Reader reader(in);
  std::vector<std::string> row;
  if (!reader.next(row)) throw DataError("load CSV is empty: " + path.string());
  std::size_t c_slot = row.size(), c_station = row.size();
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (row[i] == "slot_start_min") c_slot = i;
    if (row[i] == "load_station_kW") c_station = i;
  }
  if (c_slot == row.size() || c_station == row.size()) {
    throw DataError("load CSV needs slot_start_min and load_station_kW columns");
  }
  std::vector<double> starts, power;
  while (reader.next(row)) {
    try {
      starts.push_back(std::stod(row.at(c_slot)));
      power.push_back(std::stod(row.at(c_station)));
    } catch (const std::exception&) {
      throw DataError("malformed row " + std::to_string(reader.line_number()) + " in " + path.string());
    }
    if (power.back() < 0.0) throw DataError("negative load in " + path.string());
  }
  if (starts.size() < 2) throw DataError("load CSV must hold a full day of slots");
  const double step = starts[1] - starts[0];
  for (std::size_t i = 0; i < starts.size(); ++i) {
    if (std::abs(starts[i] - (starts[0] + step * static_cast<double>(i))) > 1e-9) {
      throw DataError("load CSV slots are not on a uniform grid");
    }
  }
  if (starts[0] != 0.0 || step <= 0.0 || std::abs(step - std::round(step)) > 1e-9 ||
      std::abs(step * static_cast<double>(starts.size()) - 1440.0) > 1e-9) {
    throw DataError("load CSV grid does not cover one day from 00:00 on whole-minute slots");
  }
  LoadProfile p;
  p.origin_min = 0.0;
  p.slot_minutes = static_cast<int>(std::lround(step));
  p.power_kw = std::move(power);
  return p;
}

ForecastResult run_forecast_stage(const PipelineConfig& cfg) {
  ForecastModels models;
  if (!cfg.paths.models.empty()) {
    std::ifstream in(cfg.paths.models);
    if (!in) throw DataError("cannot read model file " + cfg.paths.models.string());
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw DataError("model file is not valid JSON: " + std::string(e.what()));
    }
    models = ForecastModels::from_json(j);
  } else {
    models = ForecastModels::fit(read_dataset(cfg.dataset_dir()));
  }

  json models_json = models.to_json();
  models_json["provenance"] = provenance(cfg);
  write_json(models_json, cfg.paths.output_dir / "models.json");

  auto result = run_forecast(cfg.fleet, models, cfg.threads);
  write_load_csv(result.loads, cfg.paths.output_dir / "load_curve.csv");
  json summary = result.summary.to_json();
  summary["provenance"] = provenance(cfg);
  write_json(summary, cfg.paths.output_dir / "forecast_summary.json");
  return result;
}

SchedulePlan run_schedule_stage(const PipelineConfig& cfg, const std::optional<fs::path>& load_csv) {
  const fs::path source = load_csv.value_or(cfg.load_csv());
  const LoadProfile day = read_station_load(source);
  const std::vector<LoadProfile> days(static_cast<std::size_t>(cfg.horizon_days), day);
  const auto plan = multi_day_schedule(days, cfg.tariff, cfg.ess);

  write_schedule_csv(plan, cfg.paths.output_dir / "schedule.csv");
  json summary = plan.summary_json();
  summary["currency"] = cfg.currency;
  summary["horizon_days"] = cfg.horizon_days;
  summary["load_source"] = source.generic_string();
  summary["provenance"] = provenance(cfg);
  write_json(summary, cfg.paths.output_dir / "schedule_summary.json");
  return plan;
}

void run_pipeline(const PipelineConfig& cfg) {
  run_ingest(cfg);
  run_forecast_stage(cfg);
  run_schedule_stage(cfg, cfg.paths.output_dir / "load_curve.csv");
}

}  // namespace evqc

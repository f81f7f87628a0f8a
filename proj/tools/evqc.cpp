// evqc: station load forecast and storage schedule pipeline.
//
//   evqc ingest   --config cfg.json
//   evqc forecast --config cfg.json [--seed N] [--threads N]
//   evqc schedule --config cfg.json [--load load_curve.csv]
//   evqc pipeline --config cfg.json [--out DIR]

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "evqc/errors.hpp"
#include "evqc/pipeline.hpp"
#include "json.hpp"

namespace {

enum ExitCode { kOk = 0, kConfigError = 2, kDataError = 3, kInternalError = 4 };

int report(const char* kind, const std::string& message, int code) {
  std::cerr << nlohmann::json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EV quick-charge station load forecast and storage scheduling"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<unsigned> threads;
  std::optional<std::string> load_csv;

  app.add_option("--config", config_path, "pipeline config file (JSON)")->required();
  app.add_option("--seed", seed, "override the config seed");
  app.add_option("--out", out_dir, "override paths.output_dir");
  app.add_option("--threads", threads, "worker threads for the forecast")->check(CLI::PositiveNumber);

  auto* ingest = app.add_subcommand("ingest", "survey CSV -> trip-chain feature dataset");
  auto* forecast = app.add_subcommand("forecast", "feature dataset -> 24 h station load curve");
  auto* schedule = app.add_subcommand("schedule", "load curve -> storage charge/discharge plan");
  schedule->add_option("--load", load_csv, "load-curve CSV (default: <out>/load_curve.csv)");
  auto* pipeline = app.add_subcommand("pipeline", "ingest, forecast and schedule end to end");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    auto cfg = evqc::PipelineConfig::load(config_path);
    if (seed) cfg.fleet.seed = *seed;
    if (out_dir) cfg.paths.output_dir = *out_dir;
    if (threads) cfg.threads = *threads;
    cfg.validate();

    if (ingest->parsed()) {
      const auto outcome = evqc::run_ingest(cfg);
      std::cout << "ingest: " << outcome.dataset.total_chains() << " chains from "
                << outcome.diagnostics.rows_read << " rows (" << outcome.diagnostics.rows_rejected()
                << " rejected) -> " << cfg.dataset_dir().string() << '\n';
    } else if (forecast->parsed()) {
      const auto result = evqc::run_forecast_stage(cfg);
      std::cout << "forecast: station energy " << result.summary.station_energy_kwh << " kWh over 24 h -> "
                << (cfg.paths.output_dir / "load_curve.csv").string() << '\n';
    } else if (schedule->parsed()) {
      std::optional<std::filesystem::path> load;
      if (load_csv) load = *load_csv;
      const auto plan = evqc::run_schedule_stage(cfg, load);
      std::cout << "schedule: cost " << plan.cost_with_ess << ' ' << cfg.currency << " vs baseline "
                << plan.cost_baseline << " (saving " << plan.saving_fraction * 100.0 << "%)\n";
    } else if (pipeline->parsed()) {
      evqc::run_pipeline(cfg);
      std::cout << "pipeline: artifacts written to " << cfg.paths.output_dir.string() << '\n';
    }
  } catch (const evqc::ConfigError& e) {
    return report("config", e.what(), kConfigError);
  } catch (const evqc::DataError& e) {
    return report("data", e.what(), kDataError);
  } catch (const evqc::SolverError& e) {
    return report("solver", e.what(), kInternalError);
  } catch (const std::exception& e) {
    return report("internal", e.what(), kInternalError);
  }
  return kOk;
}

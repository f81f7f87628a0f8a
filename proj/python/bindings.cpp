#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <fstream>

#include "evqc/errors.hpp"
#include "evqc/forecast.hpp"
#include "evqc/kde.hpp"
#include "evqc/pipeline.hpp"
#include "evqc/schedule.hpp"
#include "evqc/survey.hpp"

namespace py = pybind11;
using namespace evqc;

namespace {

py::object to_python(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

Support make_support(std::optional<double> lo, std::optional<double> hi) {
  Support s;
  if (lo) s.lo = *lo;
  if (hi) s.hi = *hi;
  return s;
}

ChainFeatureDataset load_dataset(const std::filesystem::path& csv_path, IngestDiagnostics& diag) {
  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw DataError("cannot read input CSV " + csv_path.string());
  const auto records = parse_records(in, ColumnMap{}, DestinationMapping::nhts2017(), diag);
  return extract_features(build_chains(records, &diag));
}

py::dict plan_to_dict(const SchedulePlan& plan) {
  py::dict d;
  d["p_ev_kw"] = plan.p_ev_kw;
  d["price"] = plan.price;
  d["p_ess_kw"] = plan.p_ess_kw;
  d["p_ch_kw"] = plan.p_ch_kw;
  d["soc_ess"] = plan.soc_ess;
  d["cost_with_ess"] = plan.cost_with_ess;
  d["cost_baseline"] = plan.cost_baseline;
  d["saving_fraction"] = plan.saving_fraction;
  return d;
}

ScheduleInput make_input(std::vector<double> p_ev, std::vector<double> price, double slot_hours) {
  ScheduleInput in;
  in.p_ev_kw = std::move(p_ev);
  in.price = std::move(price);
  in.slot_hours = slot_hours;
  return in;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "EV quick-charge station load forecast and storage scheduling";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

  m.def("silverman_bandwidth", [](const std::vector<double>& s) { return silverman_bandwidth(s); });

  py::class_<KdeModel>(m, "KdeModel")
      .def(py::init([](std::vector<double> samples, double bandwidth, std::optional<double> lo,
                       std::optional<double> hi) { return KdeModel(std::move(samples), bandwidth, make_support(lo, hi)); }),
           py::arg("samples"), py::arg("bandwidth"), py::arg("lo") = py::none(), py::arg("hi") = py::none())
      .def_static(
          "fit",
          [](std::vector<double> samples, std::optional<double> lo, std::optional<double> hi) {
            return KdeModel::fit(std::move(samples), make_support(lo, hi));
          },
          py::arg("samples"), py::arg("lo") = py::none(), py::arg("hi") = py::none())
      .def("pdf", &KdeModel::pdf)
      .def("cdf", &KdeModel::cdf)
      .def(
          "sample",
          [](const KdeModel& k, std::size_t n, std::uint64_t seed, std::uint64_t stream) {
            RandomStream rng(seed, stream);
            std::vector<double> out(n);
            for (auto& v : out) v = k.sample(rng);
            return out;
          },
          py::arg("n"), py::arg("seed") = 0, py::arg("stream") = 0)
      .def_property_readonly("bandwidth", &KdeModel::bandwidth)
      .def_property_readonly("samples", &KdeModel::samples)
      .def_property_readonly("support", [](const KdeModel& k) { return py::make_tuple(k.support().lo, k.support().hi); })
      .def("to_json", [](const KdeModel& k) { return to_python(k.to_json()); });

  m.def(
      "soc_after_trip",
      [](double soc, double length_km, double u, double c_ev) {
        const auto r = soc_after_trip(soc, length_km, u, c_ev);
        return py::make_tuple(r.soc, r.infeasible);
      },
      py::arg("soc"), py::arg("length_km"), py::arg("u") = 0.2, py::arg("c_ev") = 40.0);
  m.def("needs_charge", &needs_charge, py::arg("soc"), py::arg("next_length_km"), py::arg("u") = 0.2,
        py::arg("c_ev") = 40.0, py::arg("reserve") = 0.3);
  m.def("charge_duration_hours", &charge_duration_hours, py::arg("soc"), py::arg("stay_hours"),
        py::arg("c_ev") = 40.0, py::arg("p_charging") = 60.0);

  m.def(
      "ingest",
      [](const std::filesystem::path& csv_path) {
        IngestDiagnostics diag;
        const auto ds = load_dataset(csv_path, diag);
        py::dict counts;
        for (std::size_t i = 0; i < ChainType::kCount; ++i) {
          if (ds.types[i].count > 0) counts[py::str(ChainType::from_index(i).name())] = ds.types[i].count;
        }
        py::dict out;
        out["chains"] = counts;
        out["diagnostics"] = to_python(diag.to_json());
        return out;
      },
      py::arg("csv_path"));

  m.def(
      "forecast",
      [](const std::filesystem::path& csv_path, std::size_t n_ev, std::uint64_t seed, double p_own,
         unsigned threads) {
        IngestDiagnostics diag;
        const auto models = ForecastModels::fit(load_dataset(csv_path, diag));
        FleetConfig cfg;
        cfg.n_ev = n_ev;
        cfg.seed = seed;
        cfg.p_own = p_own;
        ForecastResult r;
        {
          py::gil_scoped_release release;
          r = run_forecast(cfg, models, threads);
        }
        py::dict loads;
        for (const auto s : kAllSites) loads[py::str(std::string(to_string(s)))] = r.loads.site(s).power_kw;
        loads["station"] = r.loads.station.power_kw;
        py::dict out;
        out["slot_minutes"] = cfg.slot_minutes;
        out["loads"] = loads;
        out["summary"] = to_python(r.summary.to_json());
        return out;
      },
      py::arg("csv_path"), py::arg("n_ev") = 10000, py::arg("seed") = FleetConfig{}.seed,
      py::arg("p_own") = 0.5, py::arg("threads") = 1);

  py::class_<EssParams>(m, "EssParams")
      .def(py::init([](double c_ess, double p_charge_max, double p_discharge_max, double soc_init,
                       bool require_terminal_soc, bool allow_export) {
             return EssParams{c_ess, p_charge_max, p_discharge_max, soc_init, require_terminal_soc, allow_export};
           }),
           py::arg("c_ess") = 5445.0, py::arg("p_charge_max") = 545.0, py::arg("p_discharge_max") = 545.0,
           py::arg("soc_init") = 0.5, py::arg("require_terminal_soc") = true, py::arg("allow_export") = false)
      .def_readwrite("c_ess", &EssParams::c_ess)
      .def_readwrite("p_charge_max", &EssParams::p_charge_max)
      .def_readwrite("p_discharge_max", &EssParams::p_discharge_max)
      .def_readwrite("soc_init", &EssParams::soc_init)
      .def_readwrite("require_terminal_soc", &EssParams::require_terminal_soc)
      .def_readwrite("allow_export", &EssParams::allow_export);

  m.def("tariff_prices", [](int slot_minutes, int days) {
    LoadProfile p;
    p.slot_minutes = slot_minutes;
    p.power_kw.assign(static_cast<std::size_t>(days * 1440 / slot_minutes), 0.0);
    return TariffSchedule::guangzhou().slot_prices(p);
  }, py::arg("slot_minutes") = 15, py::arg("days") = 1);

  m.def("baseline_cost", [](const std::vector<double>& p_ev, const std::vector<double>& price,
                            double slot_hours) { return baseline_cost(p_ev, price, slot_hours); },
        py::arg("p_ev_kw"), py::arg("price"), py::arg("slot_hours"));

  m.def(
      "solve_schedule",
      [](std::vector<double> p_ev, std::vector<double> price, double slot_hours, const EssParams& ess) {
        return plan_to_dict(solve_schedule(make_input(std::move(p_ev), std::move(price), slot_hours), ess));
      },
      py::arg("p_ev_kw"), py::arg("price"), py::arg("slot_hours"), py::arg("ess") = EssParams{});

  m.def(
      "brute_force_schedule",
      [](std::vector<double> p_ev, std::vector<double> price, double slot_hours, const EssParams& ess,
         const std::vector<double>& levels) {
        return plan_to_dict(
            brute_force_schedule(make_input(std::move(p_ev), std::move(price), slot_hours), ess, levels));
      },
      py::arg("p_ev_kw"), py::arg("price"), py::arg("slot_hours"), py::arg("ess"), py::arg("levels"));

  m.def(
      "run_pipeline",
      [](const std::filesystem::path& config, std::optional<std::filesystem::path> out,
         std::optional<std::uint64_t> seed) {
        auto cfg = PipelineConfig::load(config);
        if (out) cfg.paths.output_dir = *out;
        if (seed) cfg.fleet.seed = *seed;
        cfg.validate();
        run_pipeline(cfg);
        std::ifstream in(cfg.paths.output_dir / "schedule_summary.json");
        return to_python(nlohmann::json::parse(in));
      },
      py::arg("config"), py::arg("out") = py::none(), py::arg("seed") = py::none());
}

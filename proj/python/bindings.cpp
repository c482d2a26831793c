#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gwrdp/app.hpp"
#include "gwrdp/error.hpp"

namespace py = pybind11;

namespace {

using Command = gwrdp::CommandOutput (*)(const gwrdp::Json&, const gwrdp::RunOptions&);

// JSON text in, JSON text out: {"document", "csv", "summary", "exit_code"}.
std::string run_command(Command cmd, const std::string& config, std::optional<std::uint64_t> seed,
                        std::size_t threads, std::optional<std::uint64_t> memory_cap) {
  gwrdp::RunOptions opt;
  opt.seed = seed;
  opt.threads = threads;
  opt.memory_cap = memory_cap;
  gwrdp::Json parsed;
  try {
    parsed = gwrdp::Json::parse(config);
  } catch (const gwrdp::Json::exception& e) {
    throw gwrdp::ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  gwrdp::CommandOutput out;
  {
    py::gil_scoped_release release;
    out = cmd(parsed, opt);
  }
  gwrdp::Json csv = gwrdp::Json::object();
  for (const auto& [name, body] : out.csv_files) csv[name] = body;
  return gwrdp::Json{{"document", out.document},
                     {"csv", csv},
                     {"summary", out.summary},
                     {"exit_code", out.exit_code}}
      .dump();
}

void bind_command(py::module_& m, const char* name, Command cmd) {
  m.def(
      name,
      [cmd](const std::string& config, std::optional<std::uint64_t> seed, std::size_t threads,
            std::optional<std::uint64_t> memory_cap) {
        return run_command(cmd, config, seed, threads, memory_cap);
      },
      py::arg("config"), py::arg("seed") = py::none(), py::arg("threads") = 1,
      py::arg("memory_cap") = py::none());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Gray-Wyner rate-distortion-perception core";
  m.attr("__version__") = gwrdp::kVersion;

  static py::exception<gwrdp::Error> error(m, "Error", PyExc_RuntimeError);
  static py::exception<gwrdp::ConfigError> config_error(m, "ConfigError", error.ptr());
  static py::exception<gwrdp::ResourceLimit> resource_error(m, "ResourceLimit", error.ptr());
  static py::exception<gwrdp::Infeasible> infeasible(m, "Infeasible", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const gwrdp::ConfigError& e) {
      config_error(e.what());
    } catch (const gwrdp::ResourceLimit& e) {
      resource_error(e.what());
    } catch (const gwrdp::Infeasible& e) {
      infeasible(e.what());
    } catch (const gwrdp::InvalidArgument& e) {
      config_error(e.what());
    } catch (const gwrdp::Error& e) {
      error(e.what());
    }
  });

  bind_command(m, "rdp", gwrdp::cmd_rdp);
  bind_command(m, "region", gwrdp::cmd_region);
  bind_command(m, "simulate", gwrdp::cmd_simulate);
  bind_command(m, "derand_audit", gwrdp::cmd_derand_audit);

  m.def("selftest", [] {
    std::vector<std::tuple<std::string, bool, std::string>> out;
    for (const auto& c : gwrdp::run_selftest()) out.emplace_back(c.name, c.pass, c.detail);
    return out;
  });

  m.def("entropy", [](const std::vector<double>& p) { return gwrdp::entropy(gwrdp::Pmf(p)); });
  m.def("tv_distance", [](const std::vector<double>& p, const std::vector<double>& q) {
    return gwrdp::tv_distance(gwrdp::Pmf(p), gwrdp::Pmf(q));
  });
  m.def("mutual_information", [](const std::vector<std::vector<double>>& rows) {
    std::vector<double> flat;
    for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
    const std::size_t cols = rows.empty() ? 0 : rows[0].size();
    return gwrdp::mutual_information(gwrdp::JointPmf({rows.size(), cols}, flat));
  });
  m.def("seed_rate_overhead", &gwrdp::seed_rate_overhead, py::arg("n"), py::arg("n0"));
  m.def("default_n0", &gwrdp::default_n0, py::arg("pair_alphabet"), py::arg("n"));
}

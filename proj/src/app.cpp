#include "gwrdp/app.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

namespace gwrdp {
namespace {

std::uint64_t resolve_seed(const Json& cfg, const RunOptions& opt) {
  if (opt.seed) return *opt.seed;
  return get_uint(cfg, "seed", "", 0);
}

PerceptionMeasure perception_field(const Json& cfg, const std::string& field) {
  if (cfg.contains(field)) return parse_perception(cfg.at(field), field);
  if (cfg.contains("perception")) return parse_perception(cfg.at("perception"), "perception");
  return PerceptionMeasure::total_variation();
}

DistortionMatrix distortion_field(const Json& cfg, const std::string& field, std::size_t alphabet) {
  if (cfg.contains(field)) return parse_distortion(cfg.at(field), alphabet, field);
  if (cfg.contains("distortion")) return parse_distortion(cfg.at("distortion"), alphabet, "distortion");
  return DistortionMatrix::hamming(alphabet);
}

Budgets parse_budgets(const Json& cfg) {
  const Json& b = require(cfg, "budgets", "");
  Budgets out;
  out.d1 = get_double(b, "d1", "budgets");
  out.d2 = get_double(b, "d2", "budgets");
  out.p1 = get_double(b, "p1", "budgets", kUnbounded);
  out.p2 = get_double(b, "p2", "budgets", kUnbounded);
  return out;
}

GrayWynerProblem parse_problem(const Json& cfg) {
  GrayWynerProblem pr;
  pr.p_xy = parse_joint(require(cfg, "p_xy", ""), "p_xy").with_roles({Role::X, Role::Y});
  if (pr.p_xy.rank() != 2) throw ConfigError("p_xy: expected a joint over (X, Y)");
  pr.delta1 = distortion_field(cfg, "distortion1", pr.x_size());
  pr.delta2 = distortion_field(cfg, "distortion2", pr.y_size());
  pr.perception1 = perception_field(cfg, "perception1");
  pr.perception2 = perception_field(cfg, "perception2");
  pr.budgets = parse_budgets(cfg);
  try {
    pr.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("problem: ") + e.what());
  }
  return pr;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ResourceLimit*>(&e) != nullptr) return kExitResource;
  if (dynamic_cast<const ConfigError*>(&e) != nullptr) return kExitConfig;
  if (dynamic_cast<const InvalidArgument*>(&e) != nullptr) return kExitConfig;
  if (dynamic_cast<const Infeasible*>(&e) != nullptr) return kExitConfig;
  if (dynamic_cast<const nlohmann::json::exception*>(&e) != nullptr) return kExitConfig;
  return kExitFailure;
}

CommandOutput cmd_rdp(const Json& cfg, const RunOptions&) {
  RdpQuery q;
  if (cfg.contains("q_xw")) {
    q.q_xw = parse_joint(cfg.at("q_xw"), "q_xw").with_roles({Role::X, Role::W});
  } else if (cfg.contains("source")) {
    const Pmf p = parse_pmf(cfg.at("source"), "source");
    q.q_xw = JointPmf({p.size(), 1}, std::vector<double>(p.probs().begin(), p.probs().end()),
                      {Role::X, Role::W});
  } else {
    throw ConfigError("missing required field 'source' (or 'q_xw')");
  }
  if (q.q_xw.rank() != 2) throw ConfigError("q_xw: expected a joint over (X, W)");
  q.delta = distortion_field(cfg, "distortion", q.source_size());
  q.perception = perception_field(cfg, "perception");
  q.d_budget = get_double(cfg, "d_budget", "");
  q.p_budget = get_double(cfg, "p_budget", "", kUnbounded);
  if (cfg.contains("reconstruction")) {
    for (const auto& e : cfg.at("reconstruction")) q.reconstruction.push_back(e.get<std::size_t>());
  }
  try {
    q.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("query: ") + e.what());
  }
  SolverOptions so;
  if (cfg.contains("solver")) {
    const Json& sj = cfg.at("solver");
    so.gap_tolerance = get_double(sj, "gap_tolerance", "solver", so.gap_tolerance);
    so.max_iterations = get_uint(sj, "max_iterations", "solver", so.max_iterations);
  }
  const RdpResult r = conditional_rdp(q, so);

  CommandOutput out;
  out.json_name = "rdp_result.json";
  out.document["query"] = Json{{"q_xw", to_json(q.q_xw)},
                               {"distortion", to_json(q.delta)},
                               {"perception", q.perception.name()},
                               {"d_budget", q.d_budget},
                               {"p_budget", number_or_inf(q.p_budget)},
                               {"reconstruction", q.reconstruction}};
  out.document["result"] = to_json(r);
  if (std::isinf(q.p_budget)) {
    const RdpResult rd = conditional_rate_distortion(q.q_xw, q.delta, q.d_budget, q.reconstruction);
    out.document["rate_distortion_only"] =
        Json{{"rate_bits", rd.rate}, {"difference_bits", r.rate - rd.rate}};
  }
  out.summary = "rate = " + fmt(r.rate) + " bits (D = " + fmt(q.d_budget) +
                ", P = " + fmt(q.p_budget) + ", " + q.perception.name() +
                (r.converged ? ", converged)" : ", NOT converged)");
  if (!r.converged) out.exit_code = kExitNonConvergence;
  return out;
}

CommandOutput cmd_region(const Json& cfg, const RunOptions& opt) {
  const GrayWynerProblem pr = parse_problem(cfg);
  const std::string strategy = get_string(cfg, "strategy", "", "grid");
  FrontierOptions fo;
  fo.seed = resolve_seed(cfg, opt);
  fo.threads = opt.threads;
  fo.w_size = get_uint(cfg, "w_size", "", 0);
  fo.samples = get_uint(cfg, "samples", "", 20);
  fo.grid_levels = get_uint(cfg, "grid_levels", "", fo.grid_levels);
  fo.local_sweeps = get_uint(cfg, "local_sweeps", "", fo.local_sweeps);
  if (fo.w_size > pr.max_w_size())
    throw ConfigError("w_size: exceeds the cardinality bound |X||Y| + 2 = " +
                      std::to_string(pr.max_w_size()));

  RegionFrontier f;
  if (strategy == "independent") {
    const std::size_t w = fo.w_size == 0 ? 1 : fo.w_size;
    RegionPoint p = rate_triple_for_aux(pr, AuxChannel::independent(pr.x_size() * pr.y_size(), w));
    p.seed = fo.seed;
    f.points.push_back(p);
    f.candidates = 1;
    f.seed = fo.seed;
  } else if (strategy == "grid" || strategy == "random") {
    fo.strategy = strategy == "grid" ? SearchStrategy::Grid : SearchStrategy::RandomRestart;
    f = compute_frontier(pr, fo);
  } else {
    throw ConfigError("strategy: expected grid, random or independent, got '" + strategy + "'");
  }

  CommandOutput out;
  out.json_name = "frontier.json";
  out.document["problem"] = Json{{"p_xy", to_json(pr.p_xy)},
                                 {"distortion1", to_json(pr.delta1)},
                                 {"distortion2", to_json(pr.delta2)},
                                 {"perception1", pr.perception1.name()},
                                 {"perception2", pr.perception2.name()},
                                 {"budgets", to_json(pr.budgets)},
                                 {"strategy", strategy},
                                 {"w_size", fo.w_size == 0 ? default_w_size(pr) : fo.w_size},
                                 {"samples", fo.samples}};
  out.document["frontier"] = to_json(f);
  std::optional<CutSetAudit> audit;
  if (get_bool(cfg, "cut_set_audit", "", true)) {
    audit = cut_set_audit(pr, f);
    out.document["cut_set_audit"] = to_json(*audit);
  }
  out.csv_files.emplace_back("frontier.csv", frontier_csv(f, audit ? &*audit : nullptr));

  bool converged = true;
  for (const auto& p : f.points) converged = converged && p.converged;
  std::size_t passes = 0;
  if (audit)
    for (bool b : audit->pass) passes += b;
  out.summary = std::to_string(f.points.size()) + " frontier points from " +
                std::to_string(f.candidates) + " candidates" +
                (audit ? ", cut-set audit " + std::to_string(passes) + "/" +
                             std::to_string(audit->pass.size()) + " pass"
                       : std::string()) +
                (converged ? "" : ", some points NOT converged");
  if (!converged) out.exit_code = kExitNonConvergence;
  return out;
}

CommandOutput cmd_simulate(const Json& cfg, const RunOptions& opt) {
  const GrayWynerProblem pr = parse_problem(cfg);
  const std::size_t xy = pr.x_size() * pr.y_size();
  SimConfig sc;
  sc.p_xy = pr.p_xy;
  sc.aux = cfg.contains("aux") ? parse_kernel(cfg.at("aux"), "aux")
                               : Kernel::constant(xy, Pmf({1.0}));
  if (sc.aux.inputs() != xy) throw ConfigError("aux: kernel must have |X||Y| inputs");
  const bool have_x = cfg.contains("test_x"), have_y = cfg.contains("test_y");
  if (have_x != have_y) throw ConfigError("test_x and test_y must be given together");
  if (have_x) {
    sc.test_x = parse_kernel(cfg.at("test_x"), "test_x");
    sc.test_y = parse_kernel(cfg.at("test_y"), "test_y");
  } else {
    const RegionPoint wp = rate_triple_for_aux(pr, AuxChannel{sc.aux});
    sc.test_x = wp.test_channel_x;
    sc.test_y = wp.test_channel_y;
  }
  sc.delta1 = pr.delta1;
  sc.delta2 = pr.delta2;
  sc.perception1 = pr.perception1;
  sc.perception2 = pr.perception2;
  sc.budgets = pr.budgets;
  sc.delta = get_double(cfg, "delta", "");
  sc.trials = get_uint(cfg, "trials", "");
  sc.seed = resolve_seed(cfg, opt);
  sc.mode = mode_from_name(get_string(cfg, "mode", "", "common-randomness"));
  if (cfg.contains("n0")) sc.n0 = get_uint(cfg, "n0", "");
  if (cfg.contains("alpha")) sc.alpha = get_double(cfg, "alpha", "");
  sc.memory_cap = opt.memory_cap ? *opt.memory_cap : get_uint(cfg, "memory_cap", "", kDefaultMemoryCap);
  sc.threads = opt.threads;

  std::vector<std::size_t> n_list;
  if (cfg.contains("n_list")) {
    for (const auto& e : cfg.at("n_list")) {
      if (!e.is_number_integer() || e.get<std::int64_t>() <= 0)
        throw ConfigError("n_list: expected positive integers");
      n_list.push_back(e.get<std::size_t>());
    }
    if (n_list.empty()) throw ConfigError("n_list: must not be empty");
  } else {
    n_list.push_back(get_uint(cfg, "n", ""));
  }
  sc.n = n_list.front();
  try {
    sc.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("simulation: ") + e.what());
  }

  CommandOutput out;
  out.json_name = "simulation.json";
  out.document["witness"] = Json{{"aux", to_json(sc.aux)},
                                 {"test_x", to_json(sc.test_x)},
                                 {"test_y", to_json(sc.test_y)}};
  out.document["settings"] = Json{{"delta", sc.delta},
                                  {"trials", sc.trials},
                                  {"mode", mode_name(sc.mode)},
                                  {"memory_cap", sc.memory_cap},
                                  {"budgets", to_json(sc.budgets)},
                                  {"n_list", n_list}};
  std::vector<SimReport> reports;
  if (cfg.contains("n_list")) {
    const ConvergenceStudy study = convergence_study(sc, n_list, sc.trials);
    out.document["study"] = to_json(study);
    reports = study.rows;
  } else {
    reports.push_back(run_simulation(sc));
    out.document["report"] = to_json(reports.front());
  }
  out.csv_files.emplace_back("simulation.csv", simulation_csv(reports));
  std::ostringstream s;
  for (const auto& r : reports) {
    s << "n=" << r.n << " D1=" << fmt(r.x.distortion.mean) << "+-" << fmt(r.x.distortion.half_width)
      << " D2=" << fmt(r.y.distortion.mean) << "+-" << fmt(r.y.distortion.half_width)
      << " maxTV1=" << fmt(r.x.max_perception) << " maxTV2=" << fmt(r.y.max_perception)
      << " E0=" << fmt(r.e0.rate) << "; ";
  }
  out.summary = s.str();
  return out;
}

CommandOutput cmd_derand_audit(const Json& cfg, const RunOptions&) {
  const JointPmf p_xy = parse_joint(require(cfg, "p_xy", ""), "p_xy").with_roles({Role::X, Role::Y});
  const std::size_t n = get_uint(cfg, "n", "");
  if (n == 0) throw ConfigError("n: must be positive");
  std::size_t n0 = 0;
  if (cfg.contains("n0")) n0 = get_uint(cfg, "n0", "");
  else if (cfg.contains("alpha")) n0 = n0_from_alpha(n, get_double(cfg, "alpha", ""));
  else n0 = default_n0(p_xy.size(), n);
  const std::size_t cap = get_uint(cfg, "atom_cap", "", kDefaultAtomCap);
  const OmegaMap omega = build_omega(p_xy, n0, n, cap);
  const OmegaAudit audit = audit_omega(omega, p_xy);

  CommandOutput out;
  out.json_name = "omega_audit.json";
  out.document["p_xy"] = to_json(p_xy);
  out.document["omega"] = to_json(omega);
  out.document["audit"] = to_json(audit);
  out.document["rate_overhead_bits"] = seed_rate_overhead(n, n0);
  out.summary = "n=" + std::to_string(n) + " n0=" + std::to_string(n0) +
                " max deviation " + fmt(audit.max_deviation) + " <= bound " + fmt(audit.bound) +
                (audit.pass ? ": pass" : ": FAIL");
  if (!audit.pass) out.exit_code = kExitFailure;
  return out;
}

CommandOutput cmd_selftest(const RunOptions&) {
  CommandOutput out;
  out.json_name = "selftest.json";
  const auto cases = run_selftest();
  Json arr = Json::array();
  std::size_t passed = 0;
  std::ostringstream s;
  for (const auto& c : cases) {
    arr.push_back(Json{{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    passed += c.pass;
    s << (c.pass ? "PASS " : "FAIL ") << c.name << (c.detail.empty() ? "" : " (" + c.detail + ")")
      << "\n";
  }
  out.document["cases"] = arr;
  out.document["passed"] = passed;
  out.document["total"] = cases.size();
  s << passed << "/" << cases.size() << " selftest cases pass";
  out.summary = s.str();
  if (passed != cases.size()) out.exit_code = kExitFailure;
  return out;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gray-Wyner rate-distortion-perception toolkit", "gwrdp"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", kVersion);
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::size_t threads = 0;
  std::optional<std::uint64_t> memory_cap;
  app.fallthrough();
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--seed", seed, "master seed (overrides the config)");
  app.add_option("--out-dir", out_dir, "directory for output files")->capture_default_str();
  app.add_option("--parallel", threads, "worker threads, 0 = all cores")->capture_default_str();
  app.add_option("--memory-cap", memory_cap, "codebook cap in codeword symbols");
  app.add_subcommand("rdp", "solve a conditional RDP query");
  app.add_subcommand("region", "trace the Gray-Wyner RDP frontier");
  app.add_subcommand("simulate", "simulate the typical-set coding scheme");
  app.add_subcommand("derand-audit", "build and audit the seed-simulation map");
  app.add_subcommand("selftest", "run the built-in example suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }
  const std::string sub = app.get_subcommands().front()->get_name();
  RunOptions opt;
  opt.seed = seed;
  opt.threads = threads;
  opt.memory_cap = memory_cap;

  Json cfg = Json::object();
  std::string config_hash;
  try {
    if (sub != "selftest") {
      if (config_path.empty()) throw ConfigError("missing required flag --config");
      std::ifstream in(config_path, std::ios::binary);
      if (!in) throw ConfigError("cannot read config file '" + config_path + "'");
      std::stringstream buf;
      buf << in.rdbuf();
      const std::string bytes = buf.str();
      config_hash = fnv1a_hex(bytes);
      try {
        cfg = Json::parse(bytes);
      } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
      }
      if (!cfg.is_object()) throw ConfigError("config must be a JSON object");
    }
    CommandOutput result;
    if (sub == "rdp") result = cmd_rdp(cfg, opt);
    else if (sub == "region") result = cmd_region(cfg, opt);
    else if (sub == "simulate") result = cmd_simulate(cfg, opt);
    else if (sub == "derand-audit") result = cmd_derand_audit(cfg, opt);
    else result = cmd_selftest(opt);

    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    auto path_of = [&](const std::string& name) { return (fs::path(out_dir) / name).generic_string(); };
    Json outputs = Json::array();
    outputs.push_back(path_of(result.json_name));
    for (const auto& [name, body] : result.csv_files) outputs.push_back(path_of(name));
    Json hashes = Json::object();
    if (!config_hash.empty()) hashes["config"] = config_hash;
    const Json manifest{{"subcommand", sub},
                        {"config_path", config_path},
                        {"seed", opt.seed ? *opt.seed : get_uint(cfg, "seed", "", 0)},
                        {"version", kVersion},
                        {"input_hashes", hashes},
                        {"outputs", outputs}};
    Json doc{{"manifest", manifest}};
    for (const auto& [k, v] : result.document.items()) doc[k] = v;
    {
      std::ofstream f(path_of(result.json_name), std::ios::binary);
      f << doc.dump(2) << "\n";
    }
    for (const auto& [name, body] : result.csv_files) {
      std::ofstream f(path_of(name), std::ios::binary);
      f << "# manifest: " << manifest.dump() << "\n" << body;
    }
    out << result.summary << "\n";
    return result.exit_code;
  } catch (const std::exception& e) {
    const int code = exit_code_for(e);
    err << "gwrdp " << sub << ": "
        << (code == kExitResource ? "resource limit: " : code == kExitConfig ? "config error: " : "error: ")
        << e.what() << "\n";
    return code;
  }
}

}  // namespace gwrdp

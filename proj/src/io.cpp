#include "gwrdp/io.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace gwrdp {
namespace {

std::string at(const std::string& where, const std::string& field) {
  return where.empty() ? field : where + "." + field;
}

std::vector<double> double_array(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array of numbers");
  std::vector<double> v;
  for (const auto& e : j) {
    if (!e.is_number()) throw ConfigError(where + ": expected an array of numbers");
    v.push_back(e.get<double>());
  }
  return v;
}

std::vector<std::size_t> size_array(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array of integers");
  std::vector<std::size_t> v;
  for (const auto& e : j) {
    if (!e.is_number_unsigned()) throw ConfigError(where + ": expected an array of integers");
    v.push_back(e.get<std::size_t>());
  }
  return v;
}

// Nested rows -> (rows, cols, flat values).
void flatten_rows(const Json& j, const std::string& where, std::size_t& rows, std::size_t& cols,
                  std::vector<double>& flat) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw ConfigError(where + ": expected a non-empty array of rows");
  rows = j.size();
  cols = j[0].size();
  flat.clear();
  for (std::size_t r = 0; r < rows; ++r) {
    const auto row = double_array(j[r], where + "[" + std::to_string(r) + "]");
    if (row.size() != cols) throw ConfigError(where + ": rows must have equal length");
    flat.insert(flat.end(), row.begin(), row.end());
  }
}

template <class F>
auto wrap(const std::string& where, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

Json doubles(std::span<const double> v) {
  Json a = Json::array();
  for (double x : v) a.push_back(x);
  return a;
}

Json mean_json(const MeanStat& m) {
  return Json{{"mean", m.mean}, {"sd", m.sd}, {"half_width", m.half_width}};
}

Json freq_json(const Frequency& f) {
  return Json{{"count", f.count}, {"rate", f.rate}, {"wilson_half_width", f.half_width}};
}

Json branch_json(const BranchReport& b) {
  Json positions = Json::array();
  for (const auto& p : b.positions) {
    positions.push_back(Json{{"counts", p.counts},
                             {"marginal", doubles(p.marginal)},
                             {"wilson_half_widths", doubles(p.half_widths)},
                             {"perception", p.perception},
                             {"interval", p.interval},
                             {"excess", number_or_inf(p.excess)}});
  }
  return Json{{"distortion", mean_json(b.distortion)},
              {"head_distortion", mean_json(b.head_distortion)},
              {"expected_distortion", b.expected_distortion},
              {"threshold", b.threshold},
              {"threshold_excess", b.threshold_excess},
              {"budget_excess", b.budget_excess},
              {"threshold_failures", freq_json(b.threshold_failures)},
              {"realized_rate_bits", b.realized_rate},
              {"max_perception", b.max_perception},
              {"max_perception_excess", number_or_inf(b.max_perception_excess)},
              {"perception_interval", b.perception_interval},
              {"perception_pass", b.perception_pass},
              {"positions", positions}};
}

std::vector<Symbol> symbol_array(const Json& j, const std::string& where) {
  std::vector<Symbol> v;
  for (const auto& e : require(j, where, "codebook")) v.push_back(e.get<Symbol>());
  return v;
}

}  // namespace

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string csv_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

Json number_or_inf(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double parse_number_or_inf(const Json& j, const std::string& field) {
  if (j.is_number()) return j.get<double>();
  if (j.is_null() || (j.is_string() && (j == "inf" || j == "Infinity")))
    return std::numeric_limits<double>::infinity();
  throw ConfigError(field + ": expected a number or \"inf\"");
}

const Json& require(const Json& j, const std::string& field, const std::string& where) {
  if (!j.is_object()) throw ConfigError(at(where, field) + ": parent is not an object");
  auto it = j.find(field);
  if (it == j.end()) throw ConfigError("missing required field '" + at(where, field) + "'");
  return *it;
}

double get_double(const Json& j, const std::string& field, const std::string& where) {
  return parse_number_or_inf(require(j, field, where), at(where, field));
}

double get_double(const Json& j, const std::string& field, const std::string& where,
                  double fallback) {
  return j.contains(field) ? get_double(j, field, where) : fallback;
}

std::uint64_t get_uint(const Json& j, const std::string& field, const std::string& where) {
  const Json& v = require(j, field, where);
  if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0))
    throw ConfigError(at(where, field) + ": expected a non-negative integer");
  return v.get<std::uint64_t>();
}

std::uint64_t get_uint(const Json& j, const std::string& field, const std::string& where,
                       std::uint64_t fallback) {
  return j.contains(field) ? get_uint(j, field, where) : fallback;
}

std::string get_string(const Json& j, const std::string& field, const std::string& where,
                       const std::string& fallback) {
  if (!j.contains(field)) return fallback;
  const Json& v = j.at(field);
  if (!v.is_string()) throw ConfigError(at(where, field) + ": expected a string");
  return v.get<std::string>();
}

bool get_bool(const Json& j, const std::string& field, const std::string& where, bool fallback) {
  if (!j.contains(field)) return fallback;
  const Json& v = j.at(field);
  if (!v.is_boolean()) throw ConfigError(at(where, field) + ": expected true or false");
  return v.get<bool>();
}

Pmf parse_pmf(const Json& j, const std::string& where) {
  return wrap(where, [&] {
    if (j.is_object()) return Pmf(double_array(require(j, "probs", where), at(where, "probs")));
    return Pmf(double_array(j, where));
  });
}

JointPmf parse_joint(const Json& j, const std::string& where) {
  return wrap(where, [&] {
    if (j.is_object()) {
      return JointPmf(size_array(require(j, "alphabets", where), at(where, "alphabets")),
                      double_array(require(j, "probs", where), at(where, "probs")));
    }
    std::size_t rows = 0, cols = 0;
    std::vector<double> flat;
    flatten_rows(j, where, rows, cols, flat);
    return JointPmf({rows, cols}, flat);
  });
}

Kernel parse_kernel(const Json& j, const std::string& where) {
  return wrap(where, [&] {
    if (j.is_object()) {
      return Kernel(get_uint(j, "inputs", where), get_uint(j, "outputs", where),
                    double_array(require(j, "probs", where), at(where, "probs")));
    }
    std::size_t rows = 0, cols = 0;
    std::vector<double> flat;
    flatten_rows(j, where, rows, cols, flat);
    return Kernel(rows, cols, flat);
  });
}

DistortionMatrix parse_distortion(const Json& j, std::size_t alphabet, const std::string& where) {
  return wrap(where, [&] {
    if (j.is_string()) {
      if (j == "hamming") return DistortionMatrix::hamming(alphabet);
      throw ConfigError(where + ": unknown distortion '" + j.get<std::string>() + "'");
    }
    if (j.is_object()) {
      return DistortionMatrix(get_uint(j, "rows", where), get_uint(j, "cols", where),
                              double_array(require(j, "values", where), at(where, "values")));
    }
    std::size_t rows = 0, cols = 0;
    std::vector<double> flat;
    flatten_rows(j, where, rows, cols, flat);
    return DistortionMatrix(rows, cols, flat);
  });
}

PerceptionMeasure parse_perception(const Json& j, const std::string& where) {
  if (!j.is_string()) throw ConfigError(where + ": expected tv, kl, chi2 or hellinger");
  return wrap(where, [&] { return PerceptionMeasure::from_name(j.get<std::string>()); });
}

Json to_json(const Pmf& p) { return Json{{"probs", doubles(p.probs())}}; }

Json to_json(const JointPmf& j) {
  Json roles = Json::array();
  for (Role r : j.roles()) roles.push_back(role_name(r));
  return Json{{"alphabets", j.shape()}, {"roles", roles}, {"probs", doubles(j.probs())}};
}

Json to_json(const Kernel& k) {
  return Json{{"inputs", k.inputs()}, {"outputs", k.outputs()}, {"probs", doubles(k.probs())}};
}

Json to_json(const DistortionMatrix& d) {
  return Json{{"rows", d.rows()}, {"cols", d.cols()}, {"values", doubles(d.values())}};
}

Json to_json(const RdpResult& r) {
  return Json{{"rate_bits", r.rate},
              {"achieved_distortion", r.achieved_distortion},
              {"achieved_perception", r.achieved_perception},
              {"converged", r.converged},
              {"iterations", r.iterations},
              {"distortion_multiplier", r.distortion_multiplier},
              {"perception_multiplier", r.perception_multiplier},
              {"test_channel", to_json(r.test_channel)}};
}

Json to_json(const Budgets& b) {
  return Json{{"d1", b.d1}, {"d2", b.d2}, {"p1", number_or_inf(b.p1)}, {"p2", number_or_inf(b.p2)}};
}

Json to_json(const RegionPoint& p) {
  return Json{{"r0_bits", p.r0},
              {"r1_bits", p.r1},
              {"r2_bits", p.r2},
              {"budgets", to_json(p.budgets)},
              {"converged", p.converged},
              {"seed", p.seed},
              {"candidate", p.candidate},
              {"witness", to_json(p.witness.kernel)},
              {"test_channel_x", to_json(p.test_channel_x)},
              {"test_channel_y", to_json(p.test_channel_y)}};
}

Json to_json(const RegionFrontier& f) {
  Json pts = Json::array();
  for (const auto& p : f.points) pts.push_back(to_json(p));
  return Json{{"seed", f.seed},
              {"candidates", f.candidates},
              {"infeasible", f.infeasible},
              {"points", pts}};
}

Json to_json(const CutSetAudit& a) {
  Json pass = Json::array();
  for (bool b : a.pass) pass.push_back(b);
  return Json{{"rdp_x_bits", a.rdp_x},
              {"rdp_y_bits", a.rdp_y},
              {"worst_slack_bits", a.worst_slack},
              {"pass", pass}};
}

Json to_json(const CodeSizes& s) {
  return Json{{"m0", s.m0},         {"m1", s.m1},           {"m2", s.m2},
              {"n", s.n},           {"delta", s.delta},     {"delta1", s.delta1},
              {"delta_x", s.delta_x}, {"delta_y", s.delta_y}, {"i_xy_w_bits", s.i_xy_w},
              {"i_x_bits", s.i_x},  {"i_y_bits", s.i_y}};
}

Json to_json(const CodebookAudit& a) {
  return Json{{"w_atypical", a.w_atypical}, {"x_atypical", a.x_atypical},
              {"y_atypical", a.y_atypical}, {"max_tv_x", a.max_tv_x},
              {"max_tv_y", a.max_tv_y},     {"avg_tv_x", a.avg_tv_x},
              {"avg_tv_y", a.avg_tv_y}};
}

Json to_json(const Codebook& c) {
  auto syms = [](std::span<const Symbol> s) {
    Json a = Json::array();
    for (Symbol v : s) a.push_back(static_cast<unsigned>(v));
    return a;
  };
  return Json{{"n", c.n()},
              {"delta", c.delta()},
              {"seed", c.seed()},
              {"sizes", to_json(c.sizes())},
              {"w", syms(c.w_symbols())},
              {"x", syms(c.x_symbols())},
              {"y", syms(c.y_symbols())}};
}

Codebook codebook_from_json(const Json& j) {
  const Json& s = require(j, "sizes", "codebook");
  CodeSizes sizes;
  sizes.m0 = get_uint(s, "m0", "codebook.sizes");
  sizes.m1 = get_uint(s, "m1", "codebook.sizes");
  sizes.m2 = get_uint(s, "m2", "codebook.sizes");
  sizes.n = get_uint(s, "n", "codebook.sizes");
  sizes.delta = get_double(s, "delta", "codebook.sizes");
  sizes.delta1 = get_double(s, "delta1", "codebook.sizes", 0.0);
  sizes.delta_x = get_double(s, "delta_x", "codebook.sizes", 0.0);
  sizes.delta_y = get_double(s, "delta_y", "codebook.sizes", 0.0);
  sizes.i_xy_w = get_double(s, "i_xy_w_bits", "codebook.sizes", 0.0);
  sizes.i_x = get_double(s, "i_x_bits", "codebook.sizes", 0.0);
  sizes.i_y = get_double(s, "i_y_bits", "codebook.sizes", 0.0);
  return wrap("codebook", [&] {
    return Codebook(get_uint(j, "n", "codebook"), get_double(j, "delta", "codebook"),
                    get_uint(j, "seed", "codebook"), sizes, symbol_array(j, "w"),
                    symbol_array(j, "x"), symbol_array(j, "y"));
  });
}

Json to_json(const OmegaMap& m) {
  return Json{{"n0", m.n0},
              {"n", m.n},
              {"x_size", m.x_size},
              {"y_size", m.y_size},
              {"p_max", m.p_max},
              {"max_deviation", m.max_deviation},
              {"bin_mass", doubles(m.bin_mass)},
              {"assignment", m.assignment}};
}

OmegaMap omega_from_json(const Json& j) {
  OmegaMap m;
  m.n0 = get_uint(j, "n0", "omega");
  m.n = get_uint(j, "n", "omega");
  m.x_size = get_uint(j, "x_size", "omega");
  m.y_size = get_uint(j, "y_size", "omega");
  m.p_max = get_double(j, "p_max", "omega");
  m.max_deviation = get_double(j, "max_deviation", "omega");
  m.bin_mass = double_array(require(j, "bin_mass", "omega"), "omega.bin_mass");
  for (const auto& e : require(j, "assignment", "omega")) m.assignment.push_back(e.get<std::uint32_t>());
  return m;
}

Json to_json(const OmegaAudit& a) {
  return Json{{"bin_mass", doubles(a.bin_mass)},
              {"max_deviation", a.max_deviation},
              {"bound", a.bound},
              {"spread", a.spread},
              {"every_atom_assigned", a.every_atom_assigned},
              {"pass", a.pass}};
}

Json to_json(const SimReport& r) {
  return Json{{"n", r.n},
              {"n0", r.n0},
              {"delta", r.delta},
              {"trials", r.trials},
              {"seed", r.seed},
              {"mode", mode_name(r.mode)},
              {"code_sizes", to_json(r.sizes)},
              {"codebook_audit", to_json(r.codebook_audit)},
              {"e0", freq_json(r.e0)},
              {"r0_bits", r.r0},
              {"rate_overhead_bits", r.rate_overhead},
              {"omega_max_deviation", r.omega_max_deviation},
              {"omega_bound", r.omega_bound},
              {"x", branch_json(r.x)},
              {"y", branch_json(r.y)}};
}

Json to_json(const ConvergenceStudy& s) {
  Json rows = Json::array();
  for (const auto& r : s.rows) rows.push_back(to_json(r));
  return Json{{"distortion_excess_trend_x", s.distortion_excess_trend_x},
              {"distortion_excess_trend_y", s.distortion_excess_trend_y},
              {"perception_excess_trend_x", number_or_inf(s.perception_excess_trend_x)},
              {"perception_excess_trend_y", number_or_inf(s.perception_excess_trend_y)},
              {"e0_non_increasing", s.e0_non_increasing},
              {"rows", rows}};
}

std::string frontier_csv(const RegionFrontier& f, const CutSetAudit* audit) {
  std::ostringstream os;
  os << "R0,R1,R2,D1,D2,P1,P2,seed";
  if (audit != nullptr) os << ",cut_set_pass";
  os << "\n";
  for (std::size_t i = 0; i < f.points.size(); ++i) {
    const auto& p = f.points[i];
    os << csv_number(p.r0) << ',' << csv_number(p.r1) << ',' << csv_number(p.r2) << ','
       << csv_number(p.budgets.d1) << ',' << csv_number(p.budgets.d2) << ','
       << csv_number(p.budgets.p1) << ',' << csv_number(p.budgets.p2) << ',' << p.seed;
    if (audit != nullptr) os << ',' << (audit->pass[i] ? "pass" : "fail");
    os << "\n";
  }
  return os.str();
}

std::string simulation_csv(const std::vector<SimReport>& reports) {
  std::ostringstream os;
  os << "kind,n,n0,mode,branch,position,marginal,perception,interval,excess,distortion,"
        "distortion_half_width,head_distortion,threshold,threshold_excess,failure_rate,e0_rate,"
        "realized_rate,rate_overhead\n";
  for (const auto& r : reports) {
    const std::string prefix =
        std::to_string(r.n) + ',' + std::to_string(r.n0) + ',' + mode_name(r.mode) + ',';
    for (const auto* b : {&r.x, &r.y}) {
      const char* name = b == &r.x ? "x" : "y";
      for (std::size_t t = 0; t < b->positions.size(); ++t) {
        const auto& p = b->positions[t];
        std::string marg;
        for (std::size_t a = 0; a < p.marginal.size(); ++a)
          marg += (a ? ";" : "") + csv_number(p.marginal[a]);
        os << "position," << prefix << name << ',' << t << ',' << marg << ','
           << csv_number(p.perception) << ',' << csv_number(p.interval) << ','
           << csv_number(p.excess) << ",,,,,,,,,\n";
      }
    }
    for (const auto* b : {&r.x, &r.y}) {
      const char* name = b == &r.x ? "x" : "y";
      os << "summary," << prefix << name << ",,," << csv_number(b->max_perception) << ','
         << csv_number(b->perception_interval) << ',' << csv_number(b->max_perception_excess)
         << ',' << csv_number(b->distortion.mean) << ',' << csv_number(b->distortion.half_width)
         << ',' << csv_number(b->head_distortion.mean) << ',' << csv_number(b->threshold) << ','
         << csv_number(b->threshold_excess) << ',' << csv_number(b->threshold_failures.rate)
         << ',' << csv_number(r.e0.rate) << ',' << csv_number(b->realized_rate) << ','
         << csv_number(r.rate_overhead) << "\n";
    }
  }
  return os.str();
}

}  // namespace gwrdp

#pragma once

// JSON and CSV encodings of the library types, plus config parsing helpers.
// Unbounded budgets are written as the string "inf".

#include <cstdint>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "gwrdp/derandomizer.hpp"
#include "gwrdp/error.hpp"
#include "gwrdp/prob.hpp"
#include "gwrdp/rdp_solver.hpp"
#include "gwrdp/region.hpp"
#include "gwrdp/simulation.hpp"
#include "gwrdp/typicality.hpp"

namespace gwrdp {

using Json = nlohmann::ordered_json;

// Malformed or incomplete configuration; the message names the field.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(std::string_view bytes);

// "%.6g" for CSV cells; "inf" for infinities.
std::string csv_number(double v);

Json number_or_inf(double v);
double parse_number_or_inf(const Json& j, const std::string& field);

// Field access with ConfigError diagnostics naming `where.field`.
const Json& require(const Json& j, const std::string& field, const std::string& where);
double get_double(const Json& j, const std::string& field, const std::string& where);
double get_double(const Json& j, const std::string& field, const std::string& where,
                  double fallback);
std::uint64_t get_uint(const Json& j, const std::string& field, const std::string& where);
std::uint64_t get_uint(const Json& j, const std::string& field, const std::string& where,
                       std::uint64_t fallback);
std::string get_string(const Json& j, const std::string& field, const std::string& where,
                       const std::string& fallback);
bool get_bool(const Json& j, const std::string& field, const std::string& where, bool fallback);

// Accepted forms: [p...] or {"probs": [...]}.
Pmf parse_pmf(const Json& j, const std::string& where);
// Accepted forms: nested 2-D array, or {"alphabets": [...], "probs": [...]}.
JointPmf parse_joint(const Json& j, const std::string& where);
// Accepted forms: array of rows, or {"inputs", "outputs", "probs"}.
Kernel parse_kernel(const Json& j, const std::string& where);
// "hamming" (size taken from `alphabet`), nested rows, or {"rows","cols","values"}.
DistortionMatrix parse_distortion(const Json& j, std::size_t alphabet, const std::string& where);
PerceptionMeasure parse_perception(const Json& j, const std::string& where);

Json to_json(const Pmf& p);
Json to_json(const JointPmf& j);
Json to_json(const Kernel& k);
Json to_json(const DistortionMatrix& d);
Json to_json(const RdpResult& r);
Json to_json(const Budgets& b);
Json to_json(const RegionPoint& p);
Json to_json(const RegionFrontier& f);
Json to_json(const CutSetAudit& a);
Json to_json(const CodeSizes& s);
Json to_json(const CodebookAudit& a);
Json to_json(const Codebook& c);
Json to_json(const OmegaMap& m);
Json to_json(const OmegaAudit& a);
Json to_json(const SimReport& r);
Json to_json(const ConvergenceStudy& s);

Codebook codebook_from_json(const Json& j);
OmegaMap omega_from_json(const Json& j);

// Frontier CSV body: R0,R1,R2,D1,D2,P1,P2,seed[,cut_set_pass].
std::string frontier_csv(const RegionFrontier& f, const CutSetAudit* audit);
// One row per (n, branch, position) plus one summary row per report.
std::string simulation_csv(const std::vector<SimReport>& reports);

}  // namespace gwrdp

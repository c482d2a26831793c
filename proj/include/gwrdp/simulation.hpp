#pragma once

// Monte Carlo evaluation of the layered coding scheme at finite blocklength,
// with shared shift seeds or with seeds simulated from extra source symbols.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gwrdp/derandomizer.hpp"
#include "gwrdp/perception.hpp"
#include "gwrdp/prob.hpp"
#include "gwrdp/region.hpp"
#include "gwrdp/typicality.hpp"

namespace gwrdp {

enum class SimMode { CommonRandomness, Deterministic };

std::string mode_name(SimMode m);
SimMode mode_from_name(const std::string& s);

inline constexpr std::uint64_t kDefaultMemoryCap = std::uint64_t{1} << 24;

struct SimConfig {
  JointPmf p_xy;  // axes (X, Y)
  Kernel aux;     // Q_{W|XY}
  Kernel test_x;  // Q_{Xt|XW}
  Kernel test_y;  // Q_{Yt|YW}
  DistortionMatrix delta1;
  DistortionMatrix delta2;
  PerceptionMeasure perception1;
  PerceptionMeasure perception2;
  Budgets budgets;
  std::size_t n = 2;
  double delta = 0.1;
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  SimMode mode = SimMode::CommonRandomness;
  // Deterministic mode: explicit n0, else floor(n * alpha), else the default
  // rule (|X||Y|)^n0 >= n^2.
  std::optional<std::size_t> n0;
  std::optional<double> alpha;
  std::uint64_t memory_cap = kDefaultMemoryCap;  // codeword symbols
  std::size_t threads = 1;                       // 0 uses all hardware threads

  void validate() const;
  // n0 actually used; 0 in common-randomness mode.
  std::size_t resolved_n0() const;
};

// Mean of per-trial values with a normal 95% half-width 1.96 sd / sqrt(T).
struct MeanStat {
  double mean = 0.0;
  double sd = 0.0;
  double half_width = 0.0;
};

// Frequency with its Wilson 95% half-width.
struct Frequency {
  std::size_t count = 0;
  double rate = 0.0;
  double half_width = 0.0;
};

double wilson_half_width(std::size_t count, std::size_t trials, double z = 1.96);

struct PositionStat {
  std::vector<std::size_t> counts;   // reconstruction symbol histogram
  std::vector<double> marginal;      // counts / trials
  std::vector<double> half_widths;   // Wilson per cell
  double perception = 0.0;           // d(P_source, marginal)
  double interval = 0.0;             // sum of cell half-widths
  double excess = 0.0;               // perception - budget
};

struct BranchReport {
  MeanStat distortion;       // over the full emitted block
  MeanStat head_distortion;  // over the first n positions
  double threshold = 0.0;    // E[Delta] + delta/2
  double expected_distortion = 0.0;
  double threshold_excess = 0.0;  // distortion.mean - threshold
  double budget_excess = 0.0;     // distortion.mean - D
  std::vector<PositionStat> positions;
  double max_perception = 0.0;
  double max_perception_excess = 0.0;  // max_t (d_t - P)
  double perception_interval = 0.0;    // interval at the argmax position
  bool perception_pass = false;        // every d_t <= P + interval_t
  double realized_rate = 0.0;
  Frequency threshold_failures;
};

struct SimReport {
  std::size_t n = 0;
  std::size_t n0 = 0;
  double delta = 0.0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  SimMode mode = SimMode::CommonRandomness;
  CodeSizes sizes;
  CodebookAudit codebook_audit;
  Frequency e0;
  BranchReport x;
  BranchReport y;
  double r0 = 0.0;             // realized common rate
  double rate_overhead = 0.0;  // log2(n) / (n + n0) in deterministic mode
  double omega_max_deviation = 0.0;
  double omega_bound = 0.0;
};

// Throws ResourceLimit before generating anything when the codebook exceeds
// the memory cap.
SimReport run_simulation(const SimConfig& config);

struct ConvergenceStudy {
  std::vector<SimReport> rows;
  // Last minus first row.
  double distortion_excess_trend_x = 0.0;
  double distortion_excess_trend_y = 0.0;
  double perception_excess_trend_x = 0.0;
  double perception_excess_trend_y = 0.0;
  bool e0_non_increasing = true;
};

// One simulation per blocklength, all other settings from base.
ConvergenceStudy convergence_study(const SimConfig& base, const std::vector<std::size_t>& n_list,
                                   std::size_t trials);

}  // namespace gwrdp

#pragma once

// Achievable rate-distortion-perception region of the Gray-Wyner network.
// For an auxiliary channel Q_{W|XY}, every triple with
//   R0 >= I(X,Y; W),  R1 >= R_{X|W}(Q_XW, D1, P1),  R2 >= R_{Y|W}(Q_YW, D2, P2)
// is achievable; the region is the union over auxiliary channels.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "gwrdp/perception.hpp"
#include "gwrdp/prob.hpp"
#include "gwrdp/rdp_solver.hpp"

namespace gwrdp {

struct Budgets {
  double d1 = 0.0;
  double d2 = 0.0;
  double p1 = kUnbounded;
  double p2 = kUnbounded;
};

// Source pair with per-branch distortion and perception measures.
struct GrayWynerProblem {
  JointPmf p_xy;  // axes (X, Y)
  DistortionMatrix delta1;
  DistortionMatrix delta2;
  PerceptionMeasure perception1;
  PerceptionMeasure perception2;
  Budgets budgets;

  std::size_t x_size() const { return p_xy.shape()[0]; }
  std::size_t y_size() const { return p_xy.shape()[1]; }
  // Cardinality bound |X||Y| + 2.
  std::size_t max_w_size() const { return x_size() * y_size() + 2; }
  void validate() const;

  // Hamming distortions on both branches.
  static GrayWynerProblem hamming(JointPmf p_xy, const PerceptionMeasure& perception,
                                  Budgets budgets);
};

// Q_{W|XY}; inputs are (x, y) flattened as x * |Y| + y.
struct AuxChannel {
  Kernel kernel;
  std::size_t w_size() const { return kernel.outputs(); }

  static AuxChannel independent(std::size_t xy_size, std::size_t w_size);
  // W = (X, Y) encoded as x * |Y| + y; requires w_size >= |X||Y|.
  static AuxChannel copy(std::size_t xy_size, std::size_t w_size);
};

struct RegionPoint {
  double r0 = 0.0;
  double r1 = 0.0;
  double r2 = 0.0;
  Budgets budgets;
  AuxChannel witness;
  Kernel test_channel_x;  // Q_{Xhat|XW}
  Kernel test_channel_y;  // Q_{Yhat|YW}
  bool converged = true;
  std::uint64_t seed = 0;
  std::size_t candidate = 0;  // position in the search sequence
};

struct RegionFrontier {
  std::vector<RegionPoint> points;  // Pareto-minimal, sorted by (r0, r1, r2)
  std::size_t candidates = 0;       // auxiliary channels evaluated
  std::size_t infeasible = 0;       // candidates rejected by the solver
  std::uint64_t seed = 0;
};

// Options shared by the searches. gap_tolerance controls the inner solves
// used while searching; emitted points are always re-solved at the default
// solver tolerance.
struct SearchOptions {
  std::size_t w_size = 0;  // 0 selects min(|X||Y| + 2, 4)
  std::uint64_t seed = 0;
  std::size_t threads = 1;  // 0 uses all hardware threads
  double search_gap_tolerance = 1e-7;
};

enum class SearchStrategy { Grid, RandomRestart };

struct FrontierOptions : SearchOptions {
  SearchStrategy strategy = SearchStrategy::Grid;
  std::size_t samples = 0;  // candidates beyond the trivial corners
  std::size_t grid_levels = 11;  // mixing levels per deterministic map (grid)
  std::size_t local_sweeps = 2;  // coordinate-descent sweeps (random restart)
};

std::size_t default_w_size(const GrayWynerProblem& problem);

// Builds Q_XYW = P_XY x Q_{W|XY} and solves both conditional problems.
RegionPoint rate_triple_for_aux(const GrayWynerProblem& problem, const AuxChannel& aux,
                                const SolverOptions& options = {});

// Recomputes (r0, r1, r2) of a point from its stored witness and test
// channels without re-solving; returns the largest absolute deviation.
double witness_deviation(const GrayWynerProblem& problem, const RegionPoint& point);

// Candidate sequence: the constant-W corner, the copy corner (when
// w_size >= |X||Y|), then `samples` candidates. Prefixes are stable: the
// frontier for N + M samples is computed from a superset of the candidates
// for N samples.
RegionFrontier compute_frontier(const GrayWynerProblem& problem, const FrontierOptions& options);

// Local minimizer of w0 r0 + w1 r1 + w2 r2. Restart 0 starts from the
// independent channel; later restarts draw Dirichlet(1) rows.
RegionPoint scalarized_search(const GrayWynerProblem& problem, double w0, double w1,
                              double w2, std::size_t restarts, const SearchOptions& options);

// Keeps points not dominated by another (slack 1e-9); among equal points the
// one with the smallest candidate index survives.
std::vector<RegionPoint> pareto_filter(std::vector<RegionPoint> points, double slack = 1e-9);

struct CutSetAudit {
  double rdp_x = 0.0;  // point-to-point R_X(D1, P1)
  double rdp_y = 0.0;
  std::vector<bool> pass;  // one per frontier point
  double worst_slack = 0.0;  // min over points of r0 + r_i - rdp_i
};

// r0 + r1 >= R_X(D1, P1) - tolerance and r0 + r2 >= R_Y(D2, P2) - tolerance.
CutSetAudit cut_set_audit(const GrayWynerProblem& problem, const RegionFrontier& frontier,
                          double tolerance = 1e-3);

}  // namespace gwrdp

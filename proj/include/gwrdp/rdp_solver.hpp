#pragma once

// Conditional rate-distortion-perception function
//
//   R_{X|W}(Q_XW, D, P) = min I(X; Xhat | W)
//       over Q_{Xhat|XW} with E[Delta(X, Xhat)] <= D and d(P_X, Q_Xhat) <= P,
//
// where the perception constraint acts on the global reconstruction marginal
// Q_Xhat = sum_{x,w} Q_XW(x,w) Q_{Xhat|XW}(.|x,w).

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "gwrdp/perception.hpp"
#include "gwrdp/prob.hpp"

namespace gwrdp {

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

struct RdpQuery {
  JointPmf q_xw;  // axes (X, W)
  DistortionMatrix delta;  // |X| x |X|; reconstructions index the source alphabet
  PerceptionMeasure perception;
  double d_budget = 0.0;
  double p_budget = kUnbounded;
  // Allowed reconstruction symbols (subset of the source alphabet). Empty
  // means the whole source alphabet.
  std::vector<std::size_t> reconstruction;

  std::size_t source_size() const { return q_xw.shape()[0]; }
  std::size_t w_size() const { return q_xw.shape()[1]; }
  // Throws InvalidArgument when shapes or budgets are inconsistent.
  void validate() const;
};

struct SolverOptions {
  double gap_tolerance = 1e-10;  // barrier duality gap, bits
  std::size_t max_iterations = 100000;  // Newton steps of the rate minimization
};

struct RdpResult {
  double rate = 0.0;  // bits
  // Q_{Xhat|XW}: inputs are (x, w) flattened as x * |W| + w, outputs the
  // source alphabet (excluded reconstruction symbols carry zero mass).
  Kernel test_channel;
  double achieved_distortion = 0.0;
  double achieved_perception = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
  // Lagrange multipliers at the optimum (bits per unit of budget); zero when
  // the constraint is absent or slack.
  double distortion_multiplier = 0.0;
  double perception_multiplier = 0.0;
};

// Interior-point solution of the convex program above. Throws Infeasible when
// no test channel meets both budgets.
RdpResult conditional_rdp(const RdpQuery& query, const SolverOptions& options = {});

RdpResult rdp_point_to_point(const Pmf& p_x, const DistortionMatrix& delta,
                             const PerceptionMeasure& perception, double d_budget,
                             double p_budget, const SolverOptions& options = {});

// Perception-unconstrained conditional rate-distortion function, computed by
// per-W Blahut-Arimoto iterations sharing one slope, with bisection on the
// slope to meet the distortion budget.
RdpResult conditional_rate_distortion(const JointPmf& q_xw, const DistortionMatrix& delta,
                                      double d_budget,
                                      const std::vector<std::size_t>& reconstruction = {});

// Induced quantities of a test channel, recomputed from scratch.
struct ChannelEvaluation {
  double rate = 0.0;
  double distortion = 0.0;
  double perception = 0.0;
  Pmf reconstruction_marginal;
};
ChannelEvaluation evaluate_test_channel(const RdpQuery& query, const Kernel& channel);

// Exhaustive grid oracle. Each active row of the test channel ranges over the
// simplex lattice with `grid_steps` levels per coordinate; level k of
// G = grid_steps - 1 sits at (1 - cos(pi k / G)) / 2 before the row is
// renormalized, so levels are dense near the simplex faces. Reports the best feasible grid point and the value of the
// mixture closure of the grid: the least average grid rate over mixtures of
// grid channels whose mixed channel meets both budgets. The mixed channel is
// an explicit feasible test channel with rate at most that value. Under TV the
// perception budget applies to the mixed marginal; other measures bound it by
// the average of the per-point divergences.
struct BruteForceResult {
  double rate = 0.0;             // min of the mixture-closure value and channel_rate
  double best_grid_rate = 0.0;   // best single feasible grid point
  Kernel test_channel;           // feasible mixture attaining <= rate
  double channel_rate = 0.0;     // I(X; Xhat | W) of test_channel
  double achieved_distortion = 0.0;
  double achieved_perception = 0.0;
  std::size_t grid_points = 0;
  std::size_t feasible_points = 0;
};

BruteForceResult brute_force_rdp(const RdpQuery& query, std::size_t grid_steps,
                                 std::size_t max_free_parameters = 6);

struct Assumption1Check {
  std::string condition;
  double value = 0.0;
  double bound = 0.0;
  bool satisfied = false;
};

struct Assumption1Report {
  bool finite = false;        // R <= H(X|W) < inf
  bool satisfied = false;     // all checks pass
  double entropy_bound = 0.0; // H(X|W)
  double rate = 0.0;          // solver value, NaN when infeasible
  std::vector<Assumption1Check> checks;
  Kernel witness;
  std::string diagnostic;
};

// Finiteness plus an epsilon-feasible witness for the X branch of the
// boundedness assumption: rate <= R + eps, distortion <= D + eps and
// perception <= P + eps, all re-evaluated from the witness channel.
Assumption1Report check_assumption1(const RdpQuery& query, double epsilon);

}  // namespace gwrdp

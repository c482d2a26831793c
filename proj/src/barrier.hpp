#pragma once

// Log-barrier interior-point method for small dense convex programs
//
//   minimize F(v)  subject to  C v <= d,  phi(v) <= 0 (optional, smooth).
//
// Internal to the solver; equality constraints are removed by the caller
// through a nullspace parameterization.

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <optional>

namespace gwrdp::detail {

struct SmoothEval {
  double value = 0.0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
};

// Returns false when v lies outside the function's domain.
using SmoothFn = std::function<bool(const Eigen::VectorXd& v, SmoothEval& out)>;

struct BarrierOptions {
  double gap_tolerance = 1e-10;
  double t0 = 1.0;
  double growth = 12.0;
  double newton_tolerance = 1e-11;
  std::size_t max_newton_per_center = 200;
  std::size_t max_iterations = 100000;
  // Stop as soon as F(v) < stop_below at the end of a centering step (used by
  // phase I feasibility searches).
  std::optional<double> stop_below;
};

struct BarrierResult {
  Eigen::VectorXd v;
  double value = 0.0;
  double gap = 0.0;  // m / t at exit
  std::size_t iterations = 0;
  bool converged = false;
  Eigen::VectorXd linear_duals;  // 1 / (t * slack) per linear row
  double smooth_dual = 0.0;
};

// v0 must be strictly feasible.
BarrierResult barrier_minimize(const SmoothFn& objective, const Eigen::MatrixXd& C,
                               const Eigen::VectorXd& d, const SmoothFn* smooth,
                               Eigen::VectorXd v0, const BarrierOptions& options);

}  // namespace gwrdp::detail

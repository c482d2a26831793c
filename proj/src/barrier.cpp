#include "barrier.hpp"

#include <cmath>
#include <limits>

namespace gwrdp::detail {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct BarrierState {
  double value = kInf;  // t F + barrier
  double objective = kInf;
};

// Value of t F(v) - sum log(slack) - log(-phi); +inf outside the domain.
BarrierState barrier_value(const SmoothFn& objective, const Eigen::MatrixXd& C,
                           const Eigen::VectorXd& d, const SmoothFn* smooth,
                           const Eigen::VectorXd& v, double t) {
  BarrierState s;
  SmoothEval fe;
  if (!objective(v, fe) || !std::isfinite(fe.value)) return s;
  double b = 0.0;
  if (C.rows() > 0) {
    const Eigen::VectorXd slack = d - C * v;
    for (Eigen::Index i = 0; i < slack.size(); ++i) {
      if (!(slack[i] > 0.0)) return s;
      b -= std::log(slack[i]);
    }
  }
  if (smooth != nullptr) {
    SmoothEval se;
    if (!(*smooth)(v, se) || !(se.value < 0.0)) return s;
    b -= std::log(-se.value);
  }
  s.objective = fe.value;
  s.value = t * fe.value + b;
  return s;
}

}  // namespace

BarrierResult barrier_minimize(const SmoothFn& objective, const Eigen::MatrixXd& C,
                               const Eigen::VectorXd& d, const SmoothFn* smooth,
                               Eigen::VectorXd v0, const BarrierOptions& options) {
  const Eigen::Index K = v0.size();
  const double m = static_cast<double>(C.rows() + (smooth != nullptr ? 1 : 0));
  BarrierResult res;
  res.v = std::move(v0);
  double t = options.t0;

  for (;;) {
    for (std::size_t k = 0; k < options.max_newton_per_center; ++k) {
      if (res.iterations >= options.max_iterations) break;
      SmoothEval fe;
      objective(res.v, fe);
      Eigen::VectorXd grad = t * fe.grad;
      Eigen::MatrixXd H = t * fe.hess;
      if (C.rows() > 0) {
        const Eigen::VectorXd inv = (d - C * res.v).cwiseInverse();
        grad += C.transpose() * inv;
        H += C.transpose() * inv.cwiseAbs2().asDiagonal() * C;
      }
      if (smooth != nullptr) {
        SmoothEval se;
        (*smooth)(res.v, se);
        const double s = -se.value;
        grad += se.grad / s;
        H += (se.grad * se.grad.transpose()) / (s * s) + se.hess / s;
      }
      // Jacobi scaling keeps the factorization usable when slacks span many
      // orders of magnitude.
      Eigen::VectorXd scale(K);
      for (Eigen::Index i = 0; i < K; ++i)
        scale[i] = 1.0 / std::sqrt(std::max(H(i, i), 1e-300));
      const Eigen::MatrixXd Hs = scale.asDiagonal() * H * scale.asDiagonal();
      const Eigen::VectorXd gs = scale.cwiseProduct(grad);
      Eigen::LDLT<Eigen::MatrixXd> ldlt(Hs);
      Eigen::VectorXd step = -ldlt.solve(gs);
      if (ldlt.info() != Eigen::Success || !step.allFinite()) {
        Eigen::MatrixXd R = Hs;
        R.diagonal().array() += 1e-10;
        step = -R.ldlt().solve(gs);
      }
      const Eigen::VectorXd dv = scale.cwiseProduct(step);
      const double decrement = -grad.dot(dv);
      if (!(decrement > 0.0) || decrement / 2.0 <= options.newton_tolerance) break;

      double alpha = 1.0;
      if (C.rows() > 0) {
        const Eigen::VectorXd slack = d - C * res.v;
        const Eigen::VectorXd Cd = C * dv;
        for (Eigen::Index i = 0; i < Cd.size(); ++i)
          if (Cd[i] > 0.0) alpha = std::min(alpha, 0.99 * slack[i] / Cd[i]);
      }
      const BarrierState cur = barrier_value(objective, C, d, smooth, res.v, t);
      const double slop = 1e-13 * std::abs(cur.value);
      bool accepted = false;
      while (alpha > 1e-18) {
        const Eigen::VectorXd vn = res.v + alpha * dv;
        const BarrierState nxt = barrier_value(objective, C, d, smooth, vn, t);
        if (nxt.value <= cur.value - 0.25 * alpha * decrement + slop) {
          res.v = vn;
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      ++res.iterations;
      if (!accepted) break;
    }

    SmoothEval fe;
    objective(res.v, fe);
    res.value = fe.value;
    res.gap = m / t;
    if (options.stop_below && res.value < *options.stop_below) break;
    if (res.gap < options.gap_tolerance) {
      res.converged = true;
      break;
    }
    if (res.iterations >= options.max_iterations) break;
    t *= options.growth;
  }

  if (C.rows() > 0) res.linear_duals = (d - C * res.v).cwiseInverse() / t;
  if (smooth != nullptr) {
    SmoothEval se;
    (*smooth)(res.v, se);
    res.smooth_dual = 1.0 / (t * -se.value);
  }
  return res;
}

}  // namespace gwrdp::detail

#include "gwrdp/rdp_solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "barrier.hpp"
#include "gwrdp/error.hpp"

namespace gwrdp {
namespace {

const double kLn2 = std::log(2.0);

std::vector<std::size_t> reconstruction_or_all(const RdpQuery& q) {
  if (!q.reconstruction.empty()) return q.reconstruction;
  std::vector<std::size_t> all(q.source_size());
  std::iota(all.begin(), all.end(), 0);
  return all;
}

// Variable layout of the convex program: one q variable per (active row,
// allowed reconstruction) plus, for total variation, one slack per
// reconstruction symbol.
struct Program {
  std::size_t nx = 0, nw = 0, nr = 0;
  std::vector<std::size_t> recon;
  std::vector<double> qxw;  // nx * nw
  std::vector<double> qw;
  std::vector<double> px;

  struct Var {
    std::size_t x, w, r;
    double weight;  // Q(x, w)
  };
  std::vector<Var> vars;
  std::vector<std::vector<std::size_t>> rows;   // active row -> var ids
  std::vector<std::size_t> row_x, row_w;
  std::vector<std::vector<std::size_t>> groups;  // (w, r) -> var ids
  std::vector<std::vector<std::size_t>> by_recon;  // r -> var ids
  std::size_t n_slack = 0;

  std::size_t nq() const { return vars.size(); }
  std::size_t n() const { return vars.size() + n_slack; }
};

Program build_program(const RdpQuery& query, bool zero_distortion, bool zero_perception) {
  Program pr;
  pr.nx = query.source_size();
  pr.nw = query.w_size();
  pr.recon = reconstruction_or_all(query);
  pr.nr = pr.recon.size();
  pr.qxw.assign(query.q_xw.probs().begin(), query.q_xw.probs().end());
  pr.qw.assign(pr.nw, 0.0);
  pr.px.assign(pr.nx, 0.0);
  for (std::size_t x = 0; x < pr.nx; ++x)
    for (std::size_t w = 0; w < pr.nw; ++w) {
      pr.qw[w] += pr.qxw[x * pr.nw + w];
      pr.px[x] += pr.qxw[x * pr.nw + w];
    }
  pr.groups.assign(pr.nw * pr.nr, {});
  pr.by_recon.assign(pr.nr, {});
  for (std::size_t x = 0; x < pr.nx; ++x) {
    for (std::size_t w = 0; w < pr.nw; ++w) {
      const double weight = pr.qxw[x * pr.nw + w];
      if (weight <= 0.0) continue;
      std::vector<std::size_t> ids;
      for (std::size_t r = 0; r < pr.nr; ++r) {
        const std::size_t xh = pr.recon[r];
        if (zero_distortion && query.delta(x, xh) > 0.0) continue;
        if (zero_perception && pr.px[xh] <= 0.0) continue;
        const std::size_t id = pr.vars.size();
        pr.vars.push_back({x, w, r, weight});
        ids.push_back(id);
        pr.groups[w * pr.nr + r].push_back(id);
        pr.by_recon[r].push_back(id);
      }
      if (ids.empty()) {
        std::ostringstream os;
        os << "conditional_rdp: source symbol " << x
           << " has no admissible reconstruction"
           << (zero_distortion ? " with zero distortion" : "")
           << " in the reconstruction alphabet";
        throw Infeasible(os.str());
      }
      pr.rows.push_back(std::move(ids));
      pr.row_x.push_back(x);
      pr.row_w.push_back(w);
    }
  }
  return pr;
}

// I(X; Xhat | W) in bits as a function of the q variables.
bool rate_objective(const Program& pr, const Eigen::VectorXd& z, detail::SmoothEval& out,
                    bool with_hessian = true) {
  const std::size_t nq = pr.nq();
  std::vector<double> A(pr.nw * pr.nr, 0.0);
  for (std::size_t j = 0; j < nq; ++j) {
    if (!(z[j] > 0.0)) return false;
    const auto& v = pr.vars[j];
    A[v.w * pr.nr + v.r] += v.weight * z[j];
  }
  out.value = 0.0;
  out.grad = Eigen::VectorXd::Zero(z.size());
  for (std::size_t j = 0; j < nq; ++j) {
    const auto& v = pr.vars[j];
    const double lr = std::log2(z[j] * pr.qw[v.w] / A[v.w * pr.nr + v.r]);
    out.value += v.weight * z[j] * lr;
    out.grad[j] = v.weight * lr;
  }
  if (with_hessian) {
    out.hess = Eigen::MatrixXd::Zero(z.size(), z.size());
    for (std::size_t j = 0; j < nq; ++j) out.hess(j, j) = pr.vars[j].weight / (z[j] * kLn2);
    for (std::size_t g = 0; g < pr.groups.size(); ++g) {
      const auto& ids = pr.groups[g];
      if (ids.empty()) continue;
      const double a = A[g] * kLn2;
      for (auto j : ids)
        for (auto k : ids) out.hess(j, k) -= pr.vars[j].weight * pr.vars[k].weight / a;
    }
  }
  return true;
}

std::vector<double> marginal_from(const Program& pr, const Eigen::VectorXd& z) {
  std::vector<double> m(pr.nr, 0.0);
  for (std::size_t j = 0; j < pr.nq(); ++j) m[pr.vars[j].r] += pr.vars[j].weight * z[j];
  return m;
}

// Nullspace parameterization z = z0 + Z y of A z = b.
struct Affine {
  Eigen::VectorXd z0;
  Eigen::MatrixXd Z;
};

Affine solve_equalities(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, std::size_t n) {
  Affine aff;
  if (A.rows() == 0) {
    aff.z0 = Eigen::VectorXd::Zero(n);
    aff.Z = Eigen::MatrixXd::Identity(n, n);
    return aff;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double tol = 1e-10 * std::max(1.0, sv.size() > 0 ? sv[0] : 1.0);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > tol) ++rank;
  svd.setThreshold(tol / std::max(1.0, sv[0]));
  aff.z0 = svd.solve(b);
  if ((A * aff.z0 - b).norm() > 1e-9)
    throw Infeasible("conditional_rdp: equality constraints are inconsistent");
  aff.Z = svd.matrixV().rightCols(static_cast<Eigen::Index>(n) - rank);
  return aff;
}

}  // namespace

void RdpQuery::validate() const {
  if (q_xw.rank() != 2) throw InvalidArgument("RdpQuery: q_xw must have axes (X, W)");
  const std::size_t nx = source_size();
  if (delta.rows() != nx || delta.cols() != nx)
    throw InvalidArgument("RdpQuery: distortion matrix must be |X| x |X|");
  if (!(d_budget >= 0.0)) throw InvalidArgument("RdpQuery: distortion budget must be >= 0");
  if (!(p_budget >= 0.0)) throw InvalidArgument("RdpQuery: perception budget must be >= 0");
  std::vector<bool> seen(nx, false);
  for (auto r : reconstruction) {
    if (r >= nx)
      throw InvalidArgument("RdpQuery: reconstruction symbol outside the source alphabet");
    if (seen[r]) throw InvalidArgument("RdpQuery: duplicate reconstruction symbol");
    seen[r] = true;
  }
}

ChannelEvaluation evaluate_test_channel(const RdpQuery& query, const Kernel& channel) {
  const JointPmf j = attach(query.q_xw, channel, Role::Xhat);
  ChannelEvaluation ev;
  ev.rate = conditional_mutual_information(j, {0}, {2}, {1});
  ev.distortion = expected_distortion(j.marginal(std::vector<std::size_t>{0, 2}), query.delta);
  ev.reconstruction_marginal = j.marginal(2);
  ev.perception = query.perception(query.q_xw.marginal(0), ev.reconstruction_marginal);
  return ev;
}

RdpResult conditional_rdp(const RdpQuery& query, const SolverOptions& options) {
  query.validate();
  const bool zero_d = query.d_budget == 0.0;
  const bool has_p = std::isfinite(query.p_budget);
  const bool zero_p = has_p && query.p_budget == 0.0;
  const bool tv = query.perception.kind() == PerceptionMeasure::Kind::TotalVariation;
  Program pr = build_program(query, zero_d, zero_p);

  // Perception mass of source symbols that cannot be reconstructed at all.
  std::vector<bool> in_recon(pr.nx, false);
  for (auto r : pr.recon) in_recon[r] = true;
  double offset = 0.0;
  for (std::size_t a = 0; a < pr.nx; ++a)
    if (!in_recon[a]) offset += tv ? pr.px[a] : query.perception.term(pr.px[a], 0.0);
  for (std::size_t r = 0; r < pr.nr; ++r)
    if (pr.by_recon[r].empty() && !tv)
      offset += query.perception.term(pr.px[pr.recon[r]], 0.0);

  if (has_p && offset > query.p_budget)
    throw Infeasible("conditional_rdp: perception budget is below the divergence forced by "
                     "source symbols outside the reconstruction alphabet");

  if (has_p && !zero_p && tv) pr.n_slack = pr.nr;
  const std::size_t N = pr.n();
  const std::size_t nq = pr.nq();

  // Equalities: row sums, plus Q_Xhat = P_X when the perception budget is 0.
  std::vector<Eigen::VectorXd> eq_rows;
  std::vector<double> eq_rhs;
  for (const auto& ids : pr.rows) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(N);
    for (auto j : ids) a[j] = 1.0;
    eq_rows.push_back(a);
    eq_rhs.push_back(1.0);
  }
  if (zero_p) {
    for (std::size_t r = 0; r < pr.nr; ++r) {
      Eigen::VectorXd a = Eigen::VectorXd::Zero(N);
      for (auto j : pr.by_recon[r]) a[j] = pr.vars[j].weight;
      eq_rows.push_back(a);
      eq_rhs.push_back(pr.px[pr.recon[r]]);
    }
  }
  Eigen::MatrixXd A(eq_rows.size(), N);
  Eigen::VectorXd b(eq_rows.size());
  for (std::size_t i = 0; i < eq_rows.size(); ++i) {
    A.row(i) = eq_rows[i].transpose();
    b[i] = eq_rhs[i];
  }
  const Affine aff = solve_equalities(A, b, N);

  // Linear inequalities G z <= h.
  std::vector<Eigen::VectorXd> g_rows;
  std::vector<double> h_vals;
  for (std::size_t j = 0; j < nq; ++j) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(N);
    g[j] = -1.0;
    g_rows.push_back(g);
    h_vals.push_back(0.0);
  }
  std::ptrdiff_t distortion_row = -1;
  if (!zero_d && query.d_budget < query.delta.max_value()) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(N);
    for (std::size_t j = 0; j < nq; ++j)
      g[j] = pr.vars[j].weight * query.delta(pr.vars[j].x, pr.recon[pr.vars[j].r]);
    distortion_row = static_cast<std::ptrdiff_t>(g_rows.size());
    g_rows.push_back(g);
    h_vals.push_back(query.d_budget);
  }
  std::ptrdiff_t tv_row = -1;
  if (pr.n_slack > 0) {
    for (std::size_t r = 0; r < pr.nr; ++r) {
      const double p = pr.px[pr.recon[r]];
      Eigen::VectorXd up = Eigen::VectorXd::Zero(N);
      for (auto j : pr.by_recon[r]) up[j] = pr.vars[j].weight;
      Eigen::VectorXd down = -up;
      up[nq + r] = -1.0;
      down[nq + r] = -1.0;
      g_rows.push_back(up);
      h_vals.push_back(p);
      g_rows.push_back(down);
      h_vals.push_back(-p);
    }
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(N);
    for (std::size_t r = 0; r < pr.nr; ++r) sum[nq + r] = 1.0;
    tv_row = static_cast<std::ptrdiff_t>(g_rows.size());
    g_rows.push_back(sum);
    h_vals.push_back(query.p_budget - offset);
  }
  Eigen::MatrixXd G(g_rows.size(), N);
  Eigen::VectorXd h(g_rows.size());
  for (std::size_t i = 0; i < g_rows.size(); ++i) {
    G.row(i) = g_rows[i].transpose();
    h[i] = h_vals[i];
  }

  const bool smooth_p = has_p && !zero_p && !tv;
  double p_effective = query.p_budget;
  auto perception_fn = [&](const Eigen::VectorXd& z, detail::SmoothEval& out) {
    out.value = offset - p_effective;
    out.grad = Eigen::VectorXd::Zero(z.size());
    out.hess = Eigen::MatrixXd::Zero(z.size(), z.size());
    const auto m = marginal_from(pr, z);
    for (std::size_t r = 0; r < pr.nr; ++r) {
      if (pr.by_recon[r].empty()) continue;
      const double p = pr.px[pr.recon[r]];
      if (!(m[r] > 0.0)) return false;
      out.value += query.perception.term(p, m[r]);
      const double d1 = query.perception.term_d1(p, m[r]);
      const double d2 = query.perception.term_d2(p, m[r]);
      for (auto j : pr.by_recon[r]) {
        out.grad[j] += d1 * pr.vars[j].weight;
        for (auto k : pr.by_recon[r]) out.hess(j, k) += d2 * pr.vars[j].weight * pr.vars[k].weight;
      }
    }
    return std::isfinite(out.value);
  };

  // Feasibility is decided with a fixed budget so that a small
  // max_iterations yields a non-converged result rather than Infeasible.
  constexpr std::size_t kPhaseOneIterations = 5000;
  const Eigen::Index K = aff.Z.cols();
  const Eigen::MatrixXd GZ = G * aff.Z;
  Eigen::VectorXd hd = h - G * aff.z0;
  std::size_t iterations = 0;
  detail::BarrierOptions bopt;
  bopt.gap_tolerance = options.gap_tolerance;
  bopt.max_iterations = options.max_iterations;

  auto z_of = [&](const Eigen::VectorXd& y) -> Eigen::VectorXd {
    return aff.z0 + aff.Z * y.head(K);
  };

  Eigen::VectorXd y = Eigen::VectorXd::Zero(K);

  // Phase I on the linear constraints: minimize s with G z - h <= s.
  if (G.rows() > 0 && K > 0) {
    const double worst = (G * aff.z0 - h).maxCoeff();
    if (!(worst < -1e-12)) {
      Eigen::MatrixXd C1(G.rows(), K + 1);
      C1 << GZ, -Eigen::VectorXd::Ones(G.rows());
      Eigen::VectorXd v0(K + 1);
      v0 << y, worst + 1.0;
      detail::SmoothFn obj = [&](const Eigen::VectorXd& v, detail::SmoothEval& out) {
        out.value = v[K];
        out.grad = Eigen::VectorXd::Zero(K + 1);
        out.grad[K] = 1.0;
        out.hess = Eigen::MatrixXd::Zero(K + 1, K + 1);
        return true;
      };
      auto phase1_opt = bopt;
      phase1_opt.gap_tolerance = 1e-13;
      phase1_opt.max_iterations = kPhaseOneIterations;
      phase1_opt.stop_below = -1e-7;
      const auto r1 = detail::barrier_minimize(obj, C1, hd, nullptr, v0, phase1_opt);
      iterations += r1.iterations;
      const double s = r1.value;
      if (s > 1e-9)
        throw Infeasible("conditional_rdp: no test channel meets the distortion and "
                         "perception budgets");
      y = r1.v.head(K);
      if (s >= -1e-7) hd.array() += std::max(s, 0.0) + 1e-9;  // touching boundary
    }
  } else if (G.rows() > 0 && (G * aff.z0 - h).maxCoeff() > 1e-9) {
    throw Infeasible("conditional_rdp: no test channel meets the distortion and "
                     "perception budgets");
  }

  detail::SmoothFn smooth_reduced = [&](const Eigen::VectorXd& v, detail::SmoothEval& out) {
    detail::SmoothEval full;
    if (!perception_fn(z_of(v), full)) return false;
    out.value = full.value;
    out.grad = aff.Z.transpose() * full.grad;
    out.hess = aff.Z.transpose() * full.hess * aff.Z;
    return true;
  };

  // Phase I on the smooth perception constraint.
  if (smooth_p && K > 0) {
    detail::SmoothEval pe;
    const bool ok = perception_fn(z_of(y), pe);
    if (!ok || !(pe.value < -1e-12)) {
      if (!ok) throw Infeasible("conditional_rdp: perception divergence is infinite");
      Eigen::MatrixXd C1(GZ.rows(), K + 1);
      C1 << GZ, Eigen::VectorXd::Zero(GZ.rows());
      Eigen::VectorXd v0(K + 1);
      v0 << y, pe.value + 1.0;
      detail::SmoothFn obj = [&](const Eigen::VectorXd& v, detail::SmoothEval& out) {
        out.value = v[K];
        out.grad = Eigen::VectorXd::Zero(K + 1);
        out.grad[K] = 1.0;
        out.hess = Eigen::MatrixXd::Zero(K + 1, K + 1);
        return true;
      };
      detail::SmoothFn shifted = [&](const Eigen::VectorXd& v, detail::SmoothEval& out) {
        detail::SmoothEval inner;
        if (!smooth_reduced(v.head(K), inner)) return false;
        out.value = inner.value - v[K];
        out.grad = Eigen::VectorXd::Zero(K + 1);
        out.grad.head(K) = inner.grad;
        out.grad[K] = -1.0;
        out.hess = Eigen::MatrixXd::Zero(K + 1, K + 1);
        out.hess.topLeftCorner(K, K) = inner.hess;
        return true;
      };
      auto phase1_opt = bopt;
      phase1_opt.gap_tolerance = 1e-13;
      phase1_opt.max_iterations = kPhaseOneIterations;
      phase1_opt.stop_below = -1e-7;
      const auto r1 = detail::barrier_minimize(obj, C1, hd, &shifted, v0, phase1_opt);
      iterations += r1.iterations;
      if (r1.value > 1e-9)
        throw Infeasible("conditional_rdp: no test channel meets the distortion and "
                         "perception budgets");
      y = r1.v.head(K);
      if (r1.value >= -1e-7) p_effective += std::max(r1.value, 0.0) + 1e-9;
    }
  } else if (smooth_p) {
    detail::SmoothEval pe;
    if (!perception_fn(aff.z0, pe) || pe.value > 1e-9)
      throw Infeasible("conditional_rdp: perception budget cannot be met");
  }

  // Phase II: minimize the rate.
  RdpResult res;
  Eigen::VectorXd z = aff.z0;
  bool converged = true;
  if (K > 0) {
    detail::SmoothFn obj = [&](const Eigen::VectorXd& v, detail::SmoothEval& out) {
      detail::SmoothEval full;
      if (!rate_objective(pr, z_of(v), full)) return false;
      out.value = full.value;
      out.grad = aff.Z.transpose() * full.grad;
      out.hess = aff.Z.transpose() * full.hess * aff.Z;
      return true;
    };
    const auto r2 = detail::barrier_minimize(obj, GZ, hd, smooth_p ? &smooth_reduced : nullptr,
                                             y, bopt);
    iterations += r2.iterations;
    converged = r2.converged;
    z = z_of(r2.v);
    if (distortion_row >= 0) res.distortion_multiplier = r2.linear_duals[distortion_row];
    if (tv_row >= 0) res.perception_multiplier = r2.linear_duals[tv_row];
    if (smooth_p) res.perception_multiplier = r2.smooth_dual;
  }

  // Assemble the kernel over (x, w) -> source alphabet.
  std::vector<double> probs(pr.nx * pr.nw * pr.nx, 0.0);
  std::vector<bool> active(pr.nx * pr.nw, false);
  for (std::size_t j = 0; j < nq; ++j) {
    const auto& v = pr.vars[j];
    probs[(v.x * pr.nw + v.w) * pr.nx + pr.recon[v.r]] = std::max(z[j], 0.0);
    active[v.x * pr.nw + v.w] = true;
  }
  std::vector<Pmf> rows;
  for (std::size_t i = 0; i < pr.nx * pr.nw; ++i) {
    std::vector<double> row(probs.begin() + i * pr.nx, probs.begin() + (i + 1) * pr.nx);
    if (!active[i])
      for (auto r : pr.recon) row[r] = 1.0;
    rows.push_back(Pmf::from_weights(std::move(row)));
  }
  res.test_channel = Kernel::from_rows(rows);
  const auto ev = evaluate_test_channel(query, res.test_channel);
  res.rate = ev.rate;
  res.achieved_distortion = ev.distortion;
  res.achieved_perception = ev.perception;
  res.iterations = iterations;
  res.converged = converged;
  return res;
}

RdpResult rdp_point_to_point(const Pmf& p_x, const DistortionMatrix& delta,
                             const PerceptionMeasure& perception, double d_budget,
                             double p_budget, const SolverOptions& options) {
  RdpQuery q;
  q.q_xw = JointPmf({p_x.size(), 1}, {p_x.probs().begin(), p_x.probs().end()},
                    {Role::X, Role::W});
  q.delta = delta;
  q.perception = perception;
  q.d_budget = d_budget;
  q.p_budget = p_budget;
  return conditional_rdp(q, options);
}

// ------------------------------------------------------------ Blahut-Arimoto

namespace {

struct BaSolution {
  std::vector<double> channel;  // (x * nw + w) * nx + xh
  std::vector<double> out;      // per w output pmf, w * nx + xh
  double distortion = 0.0;
};

// One fixed point of the slope-s Blahut-Arimoto recursion for every w.
// mask[x * nx + xh] marks admissible pairs.
BaSolution blahut_arimoto(const Program& pr, const DistortionMatrix& delta, double slope,
                          const std::vector<bool>& mask, const std::vector<double>& warm,
                          std::size_t& iterations) {
  const std::size_t nx = pr.nx, nw = pr.nw;
  BaSolution sol;
  sol.channel.assign(nx * nw * nx, 0.0);
  sol.out = warm;
  for (std::size_t w = 0; w < nw; ++w) {
    if (pr.qw[w] <= 0.0) continue;
    std::vector<double> r(sol.out.begin() + w * nx, sol.out.begin() + (w + 1) * nx);
    std::vector<double> q(nx * nx, 0.0);
    for (std::size_t it = 0; it < 200000; ++it) {
      ++iterations;
      for (std::size_t x = 0; x < nx; ++x) {
        if (pr.qxw[x * nw + w] <= 0.0) continue;
        double z = 0.0;
        for (std::size_t xh = 0; xh < nx; ++xh) {
          const double v = mask[x * nx + xh] ? r[xh] * std::exp2(-slope * delta(x, xh)) : 0.0;
          q[x * nx + xh] = v;
          z += v;
        }
        for (std::size_t xh = 0; xh < nx; ++xh) q[x * nx + xh] /= z;
      }
      std::vector<double> rn(nx, 0.0);
      for (std::size_t x = 0; x < nx; ++x)
        for (std::size_t xh = 0; xh < nx; ++xh)
          rn[xh] += pr.qxw[x * nw + w] / pr.qw[w] * q[x * nx + xh];
      double change = 0.0;
      for (std::size_t xh = 0; xh < nx; ++xh) change = std::max(change, std::abs(rn[xh] - r[xh]));
      r = rn;
      if (change < 1e-15) break;
    }
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t xh = 0; xh < nx; ++xh) {
        sol.channel[(x * nw + w) * nx + xh] = q[x * nx + xh];
        sol.distortion += pr.qxw[x * nw + w] * q[x * nx + xh] * delta(x, xh);
      }
    std::copy(r.begin(), r.end(), sol.out.begin() + w * nx);
  }
  return sol;
}

Kernel kernel_from(const Program& pr, const std::vector<double>& channel) {
  std::vector<Pmf> rows;
  for (std::size_t i = 0; i < pr.nx * pr.nw; ++i) {
    std::vector<double> row(channel.begin() + i * pr.nx, channel.begin() + (i + 1) * pr.nx);
    if (std::accumulate(row.begin(), row.end(), 0.0) <= 0.0)
      for (auto r : pr.recon) row[r] = 1.0;
    rows.push_back(Pmf::from_weights(std::move(row)));
  }
  return Kernel::from_rows(rows);
}

}  // namespace

RdpResult conditional_rate_distortion(const JointPmf& q_xw, const DistortionMatrix& delta,
                                      double d_budget,
                                      const std::vector<std::size_t>& reconstruction) {
  RdpQuery query;
  query.q_xw = q_xw;
  query.delta = delta;
  query.d_budget = d_budget;
  query.p_budget = kUnbounded;
  query.reconstruction = reconstruction;
  query.validate();
  const Program pr = build_program(query, false, false);
  const std::size_t nx = pr.nx, nw = pr.nw;

  std::vector<bool> allowed(nx, false);
  for (auto r : pr.recon) allowed[r] = true;

  // Minimum achievable distortion and its admissible pairs.
  std::vector<bool> min_mask(nx * nx, false);
  double d_min = 0.0;
  for (std::size_t x = 0; x < nx; ++x) {
    double best = kUnbounded;
    for (auto r : pr.recon) best = std::min(best, delta(x, r));
    for (auto r : pr.recon) min_mask[x * nx + r] = delta(x, r) == best;
    d_min += pr.px[x] * best;
  }
  if (d_budget < d_min - 1e-15)
    throw Infeasible("conditional_rate_distortion: distortion budget below the minimum "
                     "achievable with the reconstruction alphabet");

  std::vector<bool> full_mask(nx * nx, false);
  for (std::size_t x = 0; x < nx; ++x)
    for (auto r : pr.recon) full_mask[x * nx + r] = true;

  // Zero-rate solution: per w the single best constant reconstruction.
  BaSolution zero;
  zero.channel.assign(nx * nw * nx, 0.0);
  for (std::size_t w = 0; w < nw; ++w) {
    std::size_t best_r = pr.recon.front();
    double best = kUnbounded;
    for (auto r : pr.recon) {
      double e = 0.0;
      for (std::size_t x = 0; x < nx; ++x) e += pr.qxw[x * nw + w] * delta(x, r);
      if (e < best) {
        best = e;
        best_r = r;
      }
    }
    zero.distortion += pr.qw[w] > 0.0 ? best : 0.0;
    for (std::size_t x = 0; x < nx; ++x) zero.channel[(x * nw + w) * nx + best_r] = 1.0;
  }

  RdpResult res;
  res.converged = true;
  auto finish = [&](const std::vector<double>& channel) {
    res.test_channel = kernel_from(pr, channel);
    const auto ev = evaluate_test_channel(query, res.test_channel);
    res.rate = ev.rate;
    res.achieved_distortion = ev.distortion;
    res.achieved_perception = ev.perception;
    return res;
  };
  if (d_budget >= zero.distortion) return finish(zero.channel);

  std::vector<double> uniform_out(nw * nx, 0.0);
  for (std::size_t w = 0; w < nw; ++w)
    for (auto r : pr.recon) uniform_out[w * nx + r] = 1.0 / static_cast<double>(pr.recon.size());

  std::size_t iterations = 0;
  // s -> infinity limit: minimum-distortion pairs only, slope 0 within them.
  BaSolution hi = blahut_arimoto(pr, delta, 0.0, min_mask, uniform_out, iterations);
  hi.distortion = d_min;
  if (d_budget <= d_min) {
    res.iterations = iterations;
    return finish(hi.channel);
  }
  BaSolution lo = zero;
  double log_lo = -12.0, log_hi = 14.0;  // log2 of the slope bracket
  std::vector<double> warm = uniform_out;
  for (int it = 0; it < 120 && log_hi - log_lo > 1e-13; ++it) {
    const double mid = 0.5 * (log_lo + log_hi);
    BaSolution s = blahut_arimoto(pr, delta, std::exp2(mid), full_mask, warm, iterations);
    warm = s.out;
    if (s.distortion > d_budget) {
      lo = std::move(s);
      log_lo = mid;
    } else {
      hi = std::move(s);
      log_hi = mid;
    }
  }
  res.distortion_multiplier = std::exp2(0.5 * (log_lo + log_hi));
  res.iterations = iterations;
  // Time-share the bracket endpoints to hit the budget exactly.
  const double span = lo.distortion - hi.distortion;
  const double theta = span > 0.0 ? (lo.distortion - d_budget) / span : 1.0;
  std::vector<double> mix(hi.channel.size());
  for (std::size_t i = 0; i < mix.size(); ++i)
    mix[i] = theta * hi.channel[i] + (1.0 - theta) * lo.channel[i];
  return finish(mix);
}

// ------------------------------------------------------------ grid oracle

namespace {

// All compositions of `total` into `parts` non-negative integers, in
// lexicographic order.
std::vector<std::vector<int>> compositions(int total, std::size_t parts) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(parts, 0);
  auto rec = [&](auto&& self, std::size_t i, int left) -> void {
    if (i + 1 == parts) {
      cur[i] = left;
      out.push_back(cur);
      return;
    }
    for (int c = 0; c <= left; ++c) {
      cur[i] = c;
      self(self, i + 1, left - c);
    }
  };
  rec(rec, 0, total);
  return out;
}

struct GridEntry {
  double rate = 0.0;
  double distortion = 0.0;
  std::vector<double> marginal;  // over reconstruction slots
  std::vector<std::size_t> comps;  // composition index per active x of this w
};

}  // namespace

BruteForceResult brute_force_rdp(const RdpQuery& query, std::size_t grid_steps,
                                 std::size_t max_free_parameters) {
  query.validate();
  if (grid_steps < 2) throw InvalidArgument("brute_force_rdp: grid_steps must be >= 2");
  const std::vector<std::size_t> recon = reconstruction_or_all(query);
  const std::size_t nx = query.source_size(), nw = query.w_size(), nr = recon.size();
  const auto probs = query.q_xw.probs();

  std::vector<std::vector<std::size_t>> active_x(nw);
  std::vector<double> qw(nw, 0.0);
  std::size_t free_params = 0;
  for (std::size_t w = 0; w < nw; ++w)
    for (std::size_t x = 0; x < nx; ++x)
      if (probs[x * nw + w] > 0.0) {
        active_x[w].push_back(x);
        qw[w] += probs[x * nw + w];
        free_params += nr - 1;
      }
  if (free_params > max_free_parameters) {
    std::ostringstream os;
    os << "brute_force_rdp: " << free_params << " free channel parameters exceed the cap of "
       << max_free_parameters;
    throw ResourceLimit(os.str());
  }

  const int denom = static_cast<int>(grid_steps) - 1;
  const auto comps = compositions(denom, nr);
  // Lattice coordinates t = c/denom placed at Chebyshev-Lobatto points
  // (1 - cos(pi t))/2 and renormalized; this equalizes the chord error of the
  // entropy terms, whose curvature grows like 1/(q(1-q)). Grids nest when the
  // denominators divide.
  std::vector<std::vector<double>> grid_rows(comps.size(), std::vector<double>(nr));
  for (std::size_t c = 0; c < comps.size(); ++c) {
    double total = 0.0;
    for (std::size_t r = 0; r < nr; ++r) {
      const int k = comps[c][r];
      const double v = k == 0 ? 0.0 : k == denom ? 1.0
                     : 0.5 * (1.0 - std::cos(std::numbers::pi * k / static_cast<double>(denom)));
      grid_rows[c][r] = v;
      total += v;
    }
    for (double& v : grid_rows[c]) v /= total;
  }

  // Per-w tables of every row combination.
  std::vector<std::vector<GridEntry>> tables(nw);
  for (std::size_t w = 0; w < nw; ++w) {
    const auto& xs = active_x[w];
    std::vector<std::size_t> idx(xs.size(), 0);
    for (;;) {
      GridEntry e;
      e.marginal.assign(nr, 0.0);
      e.comps = idx;
      for (std::size_t i = 0; i < xs.size(); ++i)
        for (std::size_t r = 0; r < nr; ++r) {
          const double q = grid_rows[idx[i]][r];
          const double wt = probs[xs[i] * nw + w];
          e.marginal[r] += wt * q;
          e.distortion += wt * q * query.delta(xs[i], recon[r]);
        }
      for (std::size_t i = 0; i < xs.size(); ++i)
        for (std::size_t r = 0; r < nr; ++r) {
          const double q = grid_rows[idx[i]][r];
          if (q <= 0.0) continue;
          e.rate += probs[xs[i] * nw + w] * q * std::log2(q * qw[w] / e.marginal[r]);
        }
      tables[w].push_back(std::move(e));
      std::size_t k = 0;
      while (k < idx.size() && ++idx[k] == comps.size()) idx[k++] = 0;
      if (k == idx.size()) break;
    }
  }

  const std::vector<double> px = [&] {
    std::vector<double> v(nx, 0.0);
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t w = 0; w < nw; ++w) v[x] += probs[x * nw + w];
    return v;
  }();
  const bool has_p = std::isfinite(query.p_budget);

  struct Point {
    double rate, distortion, perception;
  };
  std::vector<double> m(nx);
  auto point_at = [&](const std::vector<std::size_t>& sel) {
    Point p{0.0, 0.0, 0.0};
    std::fill(m.begin(), m.end(), 0.0);
    for (std::size_t w = 0; w < nw; ++w) {
      const auto& e = tables[w][sel[w]];
      p.rate += e.rate;
      p.distortion += e.distortion;
      for (std::size_t r = 0; r < nr; ++r) m[recon[r]] += e.marginal[r];
    }
    p.perception = query.perception(px, m);
    return p;
  };
  // Visits every grid point in a fixed order.
  auto for_each_point = [&](auto&& fn) {
    std::vector<std::size_t> sel(nw, 0);
    std::size_t flat = 0;
    for (;;) {
      fn(flat++, sel, point_at(sel));
      std::size_t k = 0;
      while (k < nw && ++sel[k] == tables[k].size()) sel[k++] = 0;
      if (k == nw) break;
    }
  };
  auto unflatten = [&](std::size_t flat) {
    std::vector<std::size_t> sel(nw);
    for (std::size_t w = 0; w < nw; ++w) {
      sel[w] = flat % tables[w].size();
      flat /= tables[w].size();
    }
    return sel;
  };

  constexpr double kSlack = 1e-12;
  BruteForceResult out;
  double best = kUnbounded;
  std::size_t best_flat = 0;
  for_each_point([&](std::size_t flat, const std::vector<std::size_t>&, const Point& p) {
    ++out.grid_points;
    if (p.distortion > query.d_budget + kSlack) return;
    if (has_p && !(p.perception <= query.p_budget + kSlack)) return;
    ++out.feasible_points;
    if (p.rate < best) {
      best = p.rate;
      best_flat = flat;
    }
  });
  out.best_grid_rate = best;

  // Time-sharing closure over grid channels: min sum theta_i rate_i subject to
  // sum theta_i = 1 and sum theta_i d_i <= D. Under TV the mixture's marginal
  // is linear in theta, so the perception constraint is imposed on it exactly
  // (|m(theta) - P_X|_1 <= P through split variables u - v); other measures use
  // the convex upper bound sum theta_i p_i <= P. Revised simplex, big-M start,
  // grid columns priced implicitly by a full pass.
  const bool tv = has_p && query.perception.kind() == PerceptionMeasure::Kind::TotalVariation;
  const int rows = 2 + (has_p ? 1 : 0) + (tv ? static_cast<int>(nx) : 0);
  const int p_row = has_p ? rows - 1 : -1;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(rows);
  rhs[0] = 1.0;
  rhs[1] = std::min(query.d_budget, 1e300);
  if (has_p) rhs[p_row] = query.p_budget;
  if (tv)
    for (std::size_t x = 0; x < nx; ++x) rhs[2 + static_cast<int>(x)] = px[x];

  // Explicit columns: distortion slack, perception slack, and u_x, v_x under TV.
  struct Col {
    std::ptrdiff_t id;  // >= 0 grid point, < 0 explicit or artificial
    Eigen::VectorXd a;
    double cost;
  };
  std::vector<Col> explicit_cols;
  auto unit = [&](int r, double v) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(rows);
    e[r] = v;
    return e;
  };
  explicit_cols.push_back({-1, unit(1, 1.0), 0.0});
  if (has_p) explicit_cols.push_back({-2, unit(p_row, 1.0), 0.0});
  if (tv) {
    for (std::size_t x = 0; x < nx; ++x) {
      Eigen::VectorXd u = unit(2 + static_cast<int>(x), -1.0), v = unit(2 + static_cast<int>(x), 1.0);
      u[p_row] = 1.0;
      v[p_row] = 1.0;
      explicit_cols.push_back({-3, u, 0.0});
      explicit_cols.push_back({-3, v, 0.0});
    }
  }
  auto grid_column = [&](const Point& p) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(rows);
    a[0] = 1.0;
    a[1] = p.distortion;
    if (tv) {
      for (std::size_t x = 0; x < nx; ++x) a[2 + static_cast<int>(x)] = m[x];
    } else if (has_p) {
      a[p_row] = p.perception;
    }
    return a;
  };

  constexpr double kBigM = 1e4;
  std::vector<Col> basis;
  for (int r = 0; r < rows; ++r) basis.push_back({-100 - r, unit(r, 1.0), kBigM});
  auto basis_matrix = [&]() {
    Eigen::MatrixXd B(rows, rows);
    for (int i = 0; i < rows; ++i) B.col(i) = basis[i].a;
    return B;
  };
  Eigen::VectorXd xb;
  for (int iter = 0; iter < 5000; ++iter) {
    const Eigen::MatrixXd B = basis_matrix();
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
    xb = lu.solve(rhs);
    Eigen::VectorXd cb(rows);
    for (int i = 0; i < rows; ++i) cb[i] = basis[i].cost;
    const Eigen::VectorXd pi = B.transpose().partialPivLu().solve(cb);
    double best_rc = -1e-12;
    Col entering{0, Eigen::VectorXd(), 0.0};
    for (const Col& c : explicit_cols) {
      const double rc = c.cost - pi.dot(c.a);
      if (rc < best_rc) {
        best_rc = rc;
        entering = c;
      }
    }
    std::ptrdiff_t grid_pick = -1;
    for_each_point([&](std::size_t flat, const std::vector<std::size_t>&, const Point& p) {
      if (!tv && has_p && !std::isfinite(p.perception)) return;
      double rc = p.rate - pi[0] - pi[1] * p.distortion;
      if (tv) {
        for (std::size_t x = 0; x < nx; ++x) rc -= pi[2 + static_cast<int>(x)] * m[x];
      } else if (has_p) {
        rc -= pi[p_row] * p.perception;
      }
      if (rc < best_rc) {
        best_rc = rc;
        grid_pick = static_cast<std::ptrdiff_t>(flat);
      }
    });
    if (grid_pick >= 0) {
      const Point p = point_at(unflatten(static_cast<std::size_t>(grid_pick)));
      entering = {grid_pick, grid_column(p), p.rate};
    }
    if (entering.a.size() == 0) break;
    const Eigen::VectorXd u = lu.solve(entering.a);
    int leave = -1;
    double ratio = kUnbounded;
    for (int i = 0; i < rows; ++i) {
      if (u[i] > 1e-12) {
        const double r = std::max(xb[i], 0.0) / u[i];
        if (r < ratio) {
          ratio = r;
          leave = i;
        }
      }
    }
    if (leave < 0) break;
    basis[leave] = entering;
  }
  xb = basis_matrix().partialPivLu().solve(rhs);
  for (int i = 0; i < rows; ++i)
    if (basis[i].id <= -100 && xb[i] > 1e-9)
      throw Infeasible("brute_force_rdp: no feasible mixture of grid channels at this resolution");

  out.rate = 0.0;
  std::vector<double> mix(nx * nw * nx, 0.0);
  double mass = 0.0;
  for (int i = 0; i < rows; ++i) {
    if (basis[i].id < 0) continue;
    out.rate += basis[i].cost * xb[i];
    const double theta = std::max(xb[i], 0.0);
    mass += theta;
    const auto sel = unflatten(static_cast<std::size_t>(basis[i].id));
    for (std::size_t w = 0; w < nw; ++w) {
      const auto& e = tables[w][sel[w]];
      for (std::size_t k = 0; k < active_x[w].size(); ++k) {
        const std::size_t x = active_x[w][k];
        for (std::size_t r = 0; r < nr; ++r)
          mix[(x * nw + w) * nx + recon[r]] +=
              theta * grid_rows[e.comps[k]][r];
      }
    }
  }
  out.rate = std::min(out.rate, best);
  std::vector<Pmf> krow;
  for (std::size_t i = 0; i < nx * nw; ++i) {
    std::vector<double> row(mix.begin() + i * nx, mix.begin() + (i + 1) * nx);
    if (std::accumulate(row.begin(), row.end(), 0.0) <= 0.0 || mass <= 0.0)
      for (auto r : recon) row[r] = 1.0;
    krow.push_back(Pmf::from_weights(std::move(row)));
  }
  out.test_channel = Kernel::from_rows(krow);
  const auto ev = evaluate_test_channel(query, out.test_channel);
  out.channel_rate = ev.rate;
  out.achieved_distortion = ev.distortion;
  out.achieved_perception = ev.perception;
  // The mixed channel is itself a feasible grid-derived witness.
  if (ev.distortion <= query.d_budget + 1e-9 && (!has_p || ev.perception <= query.p_budget + 1e-9))
    out.rate = std::min(out.rate, ev.rate);
  return out;
}

// ------------------------------------------------------------ assumption 1

Assumption1Report check_assumption1(const RdpQuery& query, double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidArgument("check_assumption1: epsilon must be positive");
  query.validate();
  Assumption1Report rep;
  const JointPmf& j = query.q_xw;
  rep.entropy_bound = conditional_entropy(j, {0}, {1});
  RdpResult sol;
  try {
    sol = conditional_rdp(query);
  } catch (const Infeasible& e) {
    rep.finite = false;
    rep.satisfied = false;
    rep.rate = std::nan("");
    rep.diagnostic = std::string("rate is infinite (empty constraint set): ") + e.what();
    return rep;
  }
  rep.rate = sol.rate;
  rep.witness = sol.test_channel;
  rep.finite = std::isfinite(sol.rate) && sol.rate <= rep.entropy_bound + 1e-9;
  const auto ev = evaluate_test_channel(query, sol.test_channel);
  rep.checks.push_back({"rate", ev.rate, sol.rate + epsilon, ev.rate <= sol.rate + epsilon});
  rep.checks.push_back({"distortion", ev.distortion, query.d_budget + epsilon,
                        ev.distortion <= query.d_budget + epsilon});
  rep.checks.push_back({"perception", ev.perception, query.p_budget + epsilon,
                        ev.perception <= query.p_budget + epsilon});
  rep.satisfied = rep.finite;
  for (const auto& c : rep.checks) rep.satisfied = rep.satisfied && c.satisfied;
  if (!rep.satisfied) {
    std::ostringstream os;
    os << "violated:";
    if (!rep.finite) os << " rate exceeds H(X|W)";
    for (const auto& c : rep.checks)
      if (!c.satisfied) os << ' ' << c.condition << '=' << c.value << " > " << c.bound;
    rep.diagnostic = os.str();
  }
  return rep;
}

}  // namespace gwrdp

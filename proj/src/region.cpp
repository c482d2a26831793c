#include "gwrdp/region.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "gwrdp/error.hpp"
#include "gwrdp/rng.hpp"
#include "parallel.hpp"

namespace gwrdp {
namespace {

constexpr std::uint64_t kCandidateStream = 1;
constexpr std::uint64_t kScalarStream = 3;

// Restricted growth strings: set partitions of `atoms` elements into at most
// `labels` blocks, in lexicographic order.
std::vector<std::vector<std::size_t>> partitions(std::size_t atoms, std::size_t labels) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur(atoms, 0);
  auto rec = [&](auto&& self, std::size_t i, std::size_t used) -> void {
    if (i == atoms) {
      out.push_back(cur);
      return;
    }
    for (std::size_t v = 0; v <= used && v < labels; ++v) {
      cur[i] = v;
      self(self, i + 1, std::max(used, v + 1));
    }
  };
  if (atoms > 0) {
    cur[0] = 0;
    rec(rec, 1, 1);
  }
  return out;
}

Kernel kernel_from_rows(const std::vector<std::vector<double>>& rows) {
  std::vector<Pmf> pmfs;
  pmfs.reserve(rows.size());
  for (const auto& r : rows) pmfs.push_back(Pmf::from_weights(r));
  return Kernel::from_rows(pmfs);
}

std::vector<std::vector<double>> rows_of(const Kernel& k) {
  std::vector<std::vector<double>> rows(k.inputs());
  for (std::size_t i = 0; i < k.inputs(); ++i)
    for (std::size_t o = 0; o < k.outputs(); ++o) rows[i].push_back(k(i, o));
  return rows;
}

std::vector<double> dirichlet_row(Rng& rng, std::size_t k) {
  std::vector<double> r(k);
  for (auto& v : r) v = rng.exponential() + 1e-300;
  return r;
}

RdpQuery branch_query(const JointPmf& q_aw, const DistortionMatrix& delta,
                      const PerceptionMeasure& perception, double d, double p) {
  RdpQuery q;
  q.q_xw = q_aw;
  q.delta = delta;
  q.perception = perception;
  q.d_budget = d;
  q.p_budget = p;
  return q;
}

struct Weights {
  double w0, w1, w2;
};

// Evaluates the weighted objective, solving only the branches with nonzero
// weight.
double scalar_objective(const GrayWynerProblem& pr, const Kernel& aux, const Weights& wt,
                        const SolverOptions& opts) {
  const JointPmf q = attach(pr.p_xy, aux, Role::W);
  double v = 0.0;
  if (wt.w0 > 0.0) v += wt.w0 * mutual_information(q, {0, 1}, {2});
  if (wt.w1 > 0.0) {
    const auto r = conditional_rdp(branch_query(q.marginal(std::vector<std::size_t>{0, 2}),
                                                pr.delta1, pr.perception1, pr.budgets.d1,
                                                pr.budgets.p1),
                                   opts);
    v += wt.w1 * r.rate;
  }
  if (wt.w2 > 0.0) {
    const auto r = conditional_rdp(branch_query(q.marginal(std::vector<std::size_t>{1, 2}),
                                                pr.delta2, pr.perception2, pr.budgets.d2,
                                                pr.budgets.p2),
                                   opts);
    v += wt.w2 * r.rate;
  }
  return v;
}

// Projected coordinate descent: each row moves along the segment toward a
// simplex vertex or the uniform row, with a golden-section line search.
Kernel local_search(const GrayWynerProblem& pr, Kernel start, const Weights& wt,
                    std::size_t sweeps, const SolverOptions& opts) {
  auto rows = rows_of(start);
  const std::size_t nw = start.outputs();
  double best = scalar_objective(pr, start, wt, opts);
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  for (std::size_t s = 0; s < sweeps; ++s) {
    bool improved = false;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t target = 0; target <= nw; ++target) {
        std::vector<double> goal(nw, target == nw ? 1.0 / static_cast<double>(nw) : 0.0);
        if (target < nw) goal[target] = 1.0;
        const auto base = rows[i];
        auto eval = [&](double t) {
          auto trial = rows;
          for (std::size_t o = 0; o < nw; ++o) trial[i][o] = (1.0 - t) * base[o] + t * goal[o];
          try {
            return scalar_objective(pr, kernel_from_rows(trial), wt, opts);
          } catch (const Infeasible&) {
            return std::numeric_limits<double>::infinity();
          }
        };
        double a = 0.0, b = 1.0;
        double c = b - invphi * (b - a), d = a + invphi * (b - a);
        double fc = eval(c), fd = eval(d);
        double best_t = 0.0, best_f = best;
        auto note = [&](double t, double f) {
          if (f < best_f) {
            best_f = f;
            best_t = t;
          }
        };
        note(c, fc);
        note(d, fd);
        const double f1 = eval(1.0);
        note(1.0, f1);
        for (int it = 0; it < 10; ++it) {
          if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = eval(c);
            note(c, fc);
          } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = eval(d);
            note(d, fd);
          }
        }
        if (best_f < best - 1e-12) {
          for (std::size_t o = 0; o < nw; ++o)
            rows[i][o] = (1.0 - best_t) * base[o] + best_t * goal[o];
          best = best_f;
          improved = true;
        }
      }
    }
    if (!improved) break;
  }
  return kernel_from_rows(rows);
}

bool lex_less(const RegionPoint& a, const RegionPoint& b) {
  if (a.r0 != b.r0) return a.r0 < b.r0;
  if (a.r1 != b.r1) return a.r1 < b.r1;
  if (a.r2 != b.r2) return a.r2 < b.r2;
  return a.candidate < b.candidate;
}

}  // namespace

void GrayWynerProblem::validate() const {
  if (p_xy.rank() != 2) throw InvalidArgument("GrayWynerProblem: p_xy must have axes (X, Y)");
  if (delta1.rows() != x_size() || delta1.cols() != x_size())
    throw InvalidArgument("GrayWynerProblem: delta1 must be |X| x |X|");
  if (delta2.rows() != y_size() || delta2.cols() != y_size())
    throw InvalidArgument("GrayWynerProblem: delta2 must be |Y| x |Y|");
  const auto& b = budgets;
  if (!(b.d1 >= 0.0) || !(b.d2 >= 0.0) || !(b.p1 >= 0.0) || !(b.p2 >= 0.0))
    throw InvalidArgument("GrayWynerProblem: budgets must be non-negative");
}

GrayWynerProblem GrayWynerProblem::hamming(JointPmf p_xy, const PerceptionMeasure& perception,
                                           Budgets budgets) {
  GrayWynerProblem pr;
  pr.delta1 = DistortionMatrix::hamming(p_xy.shape()[0]);
  pr.delta2 = DistortionMatrix::hamming(p_xy.shape()[1]);
  pr.p_xy = std::move(p_xy);
  pr.perception1 = perception;
  pr.perception2 = perception;
  pr.budgets = budgets;
  pr.validate();
  return pr;
}

AuxChannel AuxChannel::independent(std::size_t xy_size, std::size_t w_size) {
  return {Kernel::constant(xy_size, Pmf::point_mass(w_size, 0))};
}

AuxChannel AuxChannel::copy(std::size_t xy_size, std::size_t w_size) {
  if (w_size < xy_size)
    throw InvalidArgument("AuxChannel::copy: w_size must be at least |X||Y|");
  std::vector<Pmf> rows;
  for (std::size_t i = 0; i < xy_size; ++i) rows.push_back(Pmf::point_mass(w_size, i));
  return {Kernel::from_rows(rows)};
}

std::size_t default_w_size(const GrayWynerProblem& problem) {
  return std::min<std::size_t>(problem.max_w_size(), 4);
}

RegionPoint rate_triple_for_aux(const GrayWynerProblem& problem, const AuxChannel& aux,
                                const SolverOptions& options) {
  problem.validate();
  const std::size_t xy = problem.x_size() * problem.y_size();
  if (aux.kernel.inputs() != xy)
    throw InvalidArgument("rate_triple_for_aux: auxiliary channel must have |X||Y| inputs");
  if (aux.w_size() > problem.max_w_size())
    throw InvalidArgument("rate_triple_for_aux: w_size exceeds |X||Y| + 2");
  const JointPmf q = attach(problem.p_xy.with_roles({Role::X, Role::Y}), aux.kernel, Role::W);
  RegionPoint p;
  p.budgets = problem.budgets;
  p.witness = aux;
  p.r0 = std::max(mutual_information(q, {0, 1}, {2}), 0.0);
  const auto rx = conditional_rdp(
      branch_query(q.marginal(std::vector<std::size_t>{0, 2}), problem.delta1,
                   problem.perception1, problem.budgets.d1, problem.budgets.p1),
      options);
  const auto ry = conditional_rdp(
      branch_query(q.marginal(std::vector<std::size_t>{1, 2}), problem.delta2,
                   problem.perception2, problem.budgets.d2, problem.budgets.p2),
      options);
  p.r1 = rx.rate;
  p.r2 = ry.rate;
  p.test_channel_x = rx.test_channel;
  p.test_channel_y = ry.test_channel;
  p.converged = rx.converged && ry.converged;
  return p;
}

double witness_deviation(const GrayWynerProblem& problem, const RegionPoint& point) {
  const JointPmf q = attach(problem.p_xy, point.witness.kernel, Role::W);
  const double r0 = mutual_information(q, {0, 1}, {2});
  const auto ex = evaluate_test_channel(
      branch_query(q.marginal(std::vector<std::size_t>{0, 2}), problem.delta1,
                   problem.perception1, problem.budgets.d1, problem.budgets.p1),
      point.test_channel_x);
  const auto ey = evaluate_test_channel(
      branch_query(q.marginal(std::vector<std::size_t>{1, 2}), problem.delta2,
                   problem.perception2, problem.budgets.d2, problem.budgets.p2),
      point.test_channel_y);
  double dev = std::max({std::abs(r0 - point.r0), std::abs(ex.rate - point.r1),
                         std::abs(ey.rate - point.r2)});
  // A witness whose test channels break the budgets does not certify the point.
  const double tol = 1e-6;
  if (ex.distortion > problem.budgets.d1 + tol || ey.distortion > problem.budgets.d2 + tol ||
      ex.perception > problem.budgets.p1 + tol || ey.perception > problem.budgets.p2 + tol)
    dev = std::numeric_limits<double>::infinity();
  return dev;
}

std::vector<RegionPoint> pareto_filter(std::vector<RegionPoint> points, double slack) {
  std::vector<bool> keep(points.size(), true);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    for (std::size_t j = 0; j < points.size() && keep[i]; ++j) {
      if (i == j) continue;
      const auto& q = points[j];
      const bool no_worse =
          q.r0 <= p.r0 + slack && q.r1 <= p.r1 + slack && q.r2 <= p.r2 + slack;
      if (!no_worse) continue;
      const bool better = q.r0 < p.r0 - slack || q.r1 < p.r1 - slack || q.r2 < p.r2 - slack;
      if (better || q.candidate < p.candidate) keep[i] = false;
    }
  }
  std::vector<RegionPoint> out;
  for (std::size_t i = 0; i < points.size(); ++i)
    if (keep[i]) out.push_back(std::move(points[i]));
  std::sort(out.begin(), out.end(), lex_less);
  return out;
}

RegionFrontier compute_frontier(const GrayWynerProblem& problem, const FrontierOptions& options) {
  problem.validate();
  const std::size_t xy = problem.x_size() * problem.y_size();
  const std::size_t nw = options.w_size == 0 ? default_w_size(problem) : options.w_size;
  if (nw < 1 || nw > problem.max_w_size()) {
    std::ostringstream os;
    os << "compute_frontier: w_size must lie in [1, " << problem.max_w_size() << "]";
    throw InvalidArgument(os.str());
  }

  // Candidate list (lazy for the random strategy).
  std::vector<AuxChannel> fixed{AuxChannel::independent(xy, nw)};
  if (nw >= xy) fixed.push_back(AuxChannel::copy(xy, nw));
  std::vector<std::vector<std::size_t>> maps;
  if (options.strategy == SearchStrategy::Grid) {
    for (auto& m : partitions(xy, nw))
      if (std::any_of(m.begin(), m.end(), [](std::size_t v) { return v != 0; }))
        maps.push_back(std::move(m));
  }
  const std::size_t levels = std::max<std::size_t>(options.grid_levels, 2);
  const std::size_t grid_total = 1 + maps.size() * (levels - 1);
  const std::size_t samples = options.strategy == SearchStrategy::Grid
                                  ? std::min(options.samples, grid_total)
                                  : options.samples;
  const std::size_t total = fixed.size() + samples;

  SolverOptions search_opts;
  search_opts.gap_tolerance = options.search_gap_tolerance;

  auto candidate = [&](std::size_t c) -> AuxChannel {
    if (c < fixed.size()) return fixed[c];
    const std::size_t i = c - fixed.size();
    if (options.strategy == SearchStrategy::Grid) {
      if (i == 0) return AuxChannel::independent(xy, nw);
      const std::size_t level = (i - 1) / maps.size();
      const auto& m = maps[(i - 1) % maps.size()];
      const double a = static_cast<double>(level) / static_cast<double>(levels - 1);
      std::vector<std::vector<double>> rows(xy, std::vector<double>(nw, a / static_cast<double>(nw)));
      for (std::size_t k = 0; k < xy; ++k) rows[k][m[k]] += 1.0 - a;
      return {kernel_from_rows(rows)};
    }
    Rng rng(options.seed, kCandidateStream, i);
    std::vector<std::vector<double>> rows(xy);
    for (auto& r : rows) r = dirichlet_row(rng, nw);
    const auto lw = dirichlet_row(rng, 3);
    const double s = lw[0] + lw[1] + lw[2];
    const Weights wt{lw[0] / s, lw[1] / s, lw[2] / s};
    return {local_search(problem, kernel_from_rows(rows), wt, options.local_sweeps, search_opts)};
  };

  std::vector<std::optional<RegionPoint>> results(total);
  std::vector<char> infeasible(total, 0);
  detail::parallel_for(total, options.threads, [&](std::size_t c) {
    try {
      RegionPoint p = rate_triple_for_aux(problem, candidate(c));
      p.candidate = c;
      p.seed = options.seed;
      results[c] = std::move(p);
    } catch (const Infeasible&) {
      infeasible[c] = 1;
    }
  });

  RegionFrontier f;
  f.seed = options.seed;
  f.candidates = total;
  std::vector<RegionPoint> pts;
  for (std::size_t c = 0; c < total; ++c) {
    if (infeasible[c]) ++f.infeasible;
    if (results[c]) pts.push_back(std::move(*results[c]));
  }
  f.points = pareto_filter(std::move(pts));
  return f;
}

RegionPoint scalarized_search(const GrayWynerProblem& problem, double w0, double w1, double w2,
                              std::size_t restarts, const SearchOptions& options) {
  problem.validate();
  if (!(w0 >= 0.0 && w1 >= 0.0 && w2 >= 0.0) || w0 + w1 + w2 <= 0.0)
    throw InvalidArgument("scalarized_search: weights must be non-negative and not all zero");
  const std::size_t xy = problem.x_size() * problem.y_size();
  const std::size_t nw = options.w_size == 0 ? default_w_size(problem) : options.w_size;
  if (nw < 1 || nw > problem.max_w_size())
    throw InvalidArgument("scalarized_search: w_size out of range");
  restarts = std::max<std::size_t>(restarts, 1);
  const Weights wt{w0, w1, w2};
  SolverOptions search_opts;
  search_opts.gap_tolerance = options.search_gap_tolerance;

  std::vector<RegionPoint> found(restarts);
  std::vector<double> values(restarts);
  detail::parallel_for(restarts, options.threads, [&](std::size_t r) {
    Kernel start;
    if (r == 0) {
      // Independent W spread over every label keeps all rows interior.
      start = Kernel::constant(xy, Pmf::uniform(nw));
    } else {
      Rng rng(options.seed, kScalarStream, r);
      std::vector<std::vector<double>> rows(xy);
      for (auto& row : rows) row = dirichlet_row(rng, nw);
      start = kernel_from_rows(rows);
    }
    const Kernel k = local_search(problem, start, wt, 4, search_opts);
    RegionPoint p = rate_triple_for_aux(problem, {k});
    p.candidate = r;
    p.seed = options.seed;
    values[r] = w0 * p.r0 + w1 * p.r1 + w2 * p.r2;
    found[r] = std::move(p);
  });
  std::size_t best = 0;
  for (std::size_t r = 1; r < restarts; ++r)
    if (values[r] < values[best] - 1e-12) best = r;
  return found[best];
}

CutSetAudit cut_set_audit(const GrayWynerProblem& problem, const RegionFrontier& frontier,
                          double tolerance) {
  CutSetAudit a;
  a.rdp_x = rdp_point_to_point(problem.p_xy.marginal(0), problem.delta1, problem.perception1,
                               problem.budgets.d1, problem.budgets.p1)
                .rate;
  a.rdp_y = rdp_point_to_point(problem.p_xy.marginal(1), problem.delta2, problem.perception2,
                               problem.budgets.d2, problem.budgets.p2)
                .rate;
  a.worst_slack = std::numeric_limits<double>::infinity();
  for (const auto& p : frontier.points) {
    const double sx = p.r0 + p.r1 - a.rdp_x;
    const double sy = p.r0 + p.r2 - a.rdp_y;
    a.worst_slack = std::min({a.worst_slack, sx, sy});
    a.pass.push_back(sx >= -tolerance && sy >= -tolerance);
  }
  return a;
}

}  // namespace gwrdp

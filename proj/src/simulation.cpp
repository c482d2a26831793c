#include "gwrdp/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "gwrdp/error.hpp"
#include "gwrdp/rng.hpp"
#include "parallel.hpp"

namespace gwrdp {
namespace {

constexpr std::uint64_t kTrialStream = 100;

struct TrialOutcome {
  double d1 = 0.0, d2 = 0.0, h1 = 0.0, h2 = 0.0;
  bool e0 = false, e1 = false, e2 = false;
};

MeanStat mean_stat(const std::vector<double>& v) {
  MeanStat s;
  const double t = static_cast<double>(v.size());
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / t;
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.sd = v.size() > 1 ? std::sqrt(ss / (t - 1.0)) : 0.0;
  s.half_width = 1.96 * s.sd / std::sqrt(t);
  return s;
}

Frequency frequency(std::size_t count, std::size_t trials) {
  return {count, static_cast<double>(count) / static_cast<double>(trials),
          wilson_half_width(count, trials)};
}

double head_distortion(std::span<const Symbol> a, std::span<const Symbol> b, std::size_t n,
                       const DistortionMatrix& d) {
  return average_distortion(a.first(n), b.first(n), d);
}

void fill_positions(BranchReport& br, const std::vector<Symbol>& recon, std::size_t trials,
                    std::size_t len, std::size_t alphabet, const Pmf& source,
                    const PerceptionMeasure& measure, double budget) {
  br.positions.assign(len, {});
  br.max_perception = 0.0;
  br.max_perception_excess = -std::numeric_limits<double>::infinity();
  br.perception_pass = true;
  for (std::size_t t = 0; t < len; ++t) {
    PositionStat& p = br.positions[t];
    p.counts.assign(alphabet, 0);
    for (std::size_t tr = 0; tr < trials; ++tr) ++p.counts[recon[tr * len + t]];
    p.interval = 0.0;
    for (std::size_t a = 0; a < alphabet; ++a) {
      p.marginal.push_back(static_cast<double>(p.counts[a]) / static_cast<double>(trials));
      p.half_widths.push_back(wilson_half_width(p.counts[a], trials));
      p.interval += p.half_widths.back();
    }
    p.perception = measure(source.probs(), p.marginal);
    p.excess = p.perception - budget;
    if (p.excess > p.interval) br.perception_pass = false;
    if (t == 0 || p.perception > br.max_perception) {
      br.max_perception = p.perception;
      br.perception_interval = p.interval;
    }
    br.max_perception_excess = std::max(br.max_perception_excess, p.excess);
  }
}

}  // namespace

std::string mode_name(SimMode m) {
  return m == SimMode::CommonRandomness ? "common-randomness" : "deterministic";
}

SimMode mode_from_name(const std::string& s) {
  if (s == "common-randomness") return SimMode::CommonRandomness;
  if (s == "deterministic") return SimMode::Deterministic;
  throw InvalidArgument("unknown simulation mode '" + s +
                        "' (expected common-randomness or deterministic)");
}

double wilson_half_width(std::size_t count, std::size_t trials, double z) {
  const double t = static_cast<double>(trials);
  const double p = static_cast<double>(count) / t;
  const double z2 = z * z;
  return z / (1.0 + z2 / t) * std::sqrt(p * (1.0 - p) / t + z2 / (4.0 * t * t));
}

void SimConfig::validate() const {
  if (p_xy.rank() != 2) throw InvalidArgument("simulation: p_xy must have axes (X, Y)");
  if (trials < 1) throw InvalidArgument("simulation: trials must be >= 1");
  if (n < 2) throw InvalidArgument("simulation: n must be >= 2");
  if (!(delta > 0.0)) throw InvalidArgument("simulation: delta must be positive");
  if (mode == SimMode::Deterministic && resolved_n0() > n)
    throw InvalidArgument("simulation: n0 must not exceed n");
}

std::size_t SimConfig::resolved_n0() const {
  if (mode == SimMode::CommonRandomness) return 0;
  if (n0) return *n0;
  if (alpha) return n0_from_alpha(n, *alpha);
  return default_n0(p_xy.size(), n);
}

SimReport run_simulation(const SimConfig& cfg) {
  cfg.validate();
  const CodingScheme scheme =
      CodingScheme::build(cfg.p_xy, cfg.aux, cfg.test_x, cfg.test_y, cfg.delta1, cfg.delta2);
  const std::size_t n = cfg.n;
  const std::size_t n0 = cfg.resolved_n0();
  const std::size_t len = n + n0;
  const bool det = cfg.mode == SimMode::Deterministic;

  SimReport r;
  r.n = n;
  r.n0 = n0;
  r.delta = cfg.delta;
  r.trials = cfg.trials;
  r.seed = cfg.seed;
  r.mode = cfg.mode;
  r.sizes = compute_code_sizes(scheme, n, cfg.delta);

  OmegaMap omega;
  if (det) {
    omega = build_omega(cfg.p_xy, n0, n);
    const OmegaAudit audit = audit_omega(omega, cfg.p_xy);
    r.omega_max_deviation = audit.max_deviation;
    r.omega_bound = audit.bound;
  }
  const Codebook codebook =
      generate_codebook(scheme, r.sizes, cfg.seed, cfg.memory_cap, cfg.threads);
  r.codebook_audit = audit_codebook(codebook, scheme);

  const std::vector<double> pair_weights(cfg.p_xy.probs().begin(), cfg.p_xy.probs().end());
  const std::size_t ny = scheme.y_size();
  std::vector<TrialOutcome> outcomes(cfg.trials);
  std::vector<Symbol> xhat_all(cfg.trials * len), yhat_all(cfg.trials * len);

  detail::parallel_for(cfg.trials, cfg.threads, [&](std::size_t tr) {
    Rng rng(cfg.seed, kTrialStream, tr);
    Sequence x(len), y(len);
    for (std::size_t t = 0; t < len; ++t) {
      const std::size_t pair = rng.categorical(pair_weights);
      x[t] = static_cast<Symbol>(pair / ny);
      y[t] = static_cast<Symbol>(pair % ny);
    }
    Messages m;
    std::size_t k = 0;
    Sequence xh, yh;
    if (det) {
      const DeterministicMessages dm = deterministic_encode(x, y, codebook, scheme, omega);
      m = dm.messages;
      k = dm.k;
      std::tie(xh, yh) = deterministic_decode(m.s0, m.s1, m.s2, k, codebook, n0);
    } else {
      k = rng.below(n);
      m = encode(x, y, k, codebook, scheme);
      std::tie(xh, yh) = decode(m.s0, m.s1, m.s2, k, codebook);
    }
    TrialOutcome& o = outcomes[tr];
    o.d1 = average_distortion(x, xh, cfg.delta1);
    o.d2 = average_distortion(y, yh, cfg.delta2);
    o.h1 = head_distortion(x, xh, n, cfg.delta1);
    o.h2 = head_distortion(y, yh, n, cfg.delta2);
    o.e0 = m.e0;
    o.e1 = m.e1;
    o.e2 = m.e2;
    std::copy(xh.begin(), xh.end(), xhat_all.begin() + static_cast<std::ptrdiff_t>(tr * len));
    std::copy(yh.begin(), yh.end(), yhat_all.begin() + static_cast<std::ptrdiff_t>(tr * len));
  });

  std::vector<double> d1, d2, h1, h2;
  std::size_t c0 = 0, c1 = 0, c2 = 0;
  for (const auto& o : outcomes) {
    d1.push_back(o.d1);
    d2.push_back(o.d2);
    h1.push_back(o.h1);
    h2.push_back(o.h2);
    c0 += o.e0;
    c1 += o.e1;
    c2 += o.e2;
  }
  r.e0 = frequency(c0, cfg.trials);

  const double overhead = det ? seed_rate_overhead(n, n0) : 0.0;
  r.rate_overhead = overhead;
  auto rate = [&](std::uint64_t m) {
    const double bits = std::log2(static_cast<double>(m));
    return det ? bits / static_cast<double>(len) + overhead : bits / static_cast<double>(n);
  };
  r.r0 = rate(r.sizes.m0);

  auto branch = [&](BranchReport& br, const std::vector<double>& d, const std::vector<double>& h,
                    std::size_t fails, double expected, double budget_d, double budget_p,
                    const std::vector<Symbol>& recon, std::size_t alphabet, const Pmf& source,
                    const PerceptionMeasure& measure, std::uint64_t m) {
    br.distortion = mean_stat(d);
    br.head_distortion = mean_stat(h);
    br.expected_distortion = expected;
    br.threshold = expected + cfg.delta / 2.0;
    br.threshold_excess = br.distortion.mean - br.threshold;
    br.budget_excess = br.distortion.mean - budget_d;
    br.threshold_failures = frequency(fails, cfg.trials);
    br.realized_rate = rate(m);
    fill_positions(br, recon, cfg.trials, len, alphabet, source, measure, budget_p);
  };
  branch(r.x, d1, h1, c1, scheme.expected_d1, cfg.budgets.d1, cfg.budgets.p1, xhat_all,
         scheme.x_size(), cfg.p_xy.marginal(0), cfg.perception1, r.sizes.m1);
  branch(r.y, d2, h2, c2, scheme.expected_d2, cfg.budgets.d2, cfg.budgets.p2, yhat_all,
         scheme.y_size(), cfg.p_xy.marginal(1), cfg.perception2, r.sizes.m2);
  return r;
}

ConvergenceStudy convergence_study(const SimConfig& base, const std::vector<std::size_t>& n_list,
                                   std::size_t trials) {
  if (n_list.empty()) throw InvalidArgument("convergence_study: empty blocklength list");
  ConvergenceStudy s;
  for (std::size_t n : n_list) {
    SimConfig c = base;
    c.n = n;
    c.trials = trials;
    s.rows.push_back(run_simulation(c));
  }
  const SimReport& first = s.rows.front();
  const SimReport& last = s.rows.back();
  s.distortion_excess_trend_x = last.x.budget_excess - first.x.budget_excess;
  s.distortion_excess_trend_y = last.y.budget_excess - first.y.budget_excess;
  s.perception_excess_trend_x = last.x.max_perception_excess - first.x.max_perception_excess;
  s.perception_excess_trend_y = last.y.max_perception_excess - first.y.max_perception_excess;
  for (std::size_t i = 1; i < s.rows.size(); ++i)
    if (s.rows[i].e0.rate > s.rows[i - 1].e0.rate) s.e0_non_increasing = false;
  return s;
}

}  // namespace gwrdp

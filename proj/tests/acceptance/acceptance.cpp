// Acceptance checks. Prints one PASS/FAIL line per criterion; with arguments,
// runs only the listed criterion numbers. Exit status is nonzero on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../support/random_dist.hpp"
#include "gwrdp/app.hpp"
#include "gwrdp/error.hpp"

using namespace gwrdp;
using gwrdp::testing::random_joint;
using gwrdp::testing::random_pmf;

namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void fail(const std::string& why) {
    if (pass) detail << why;
    pass = false;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double h2(double p) {
  if (p <= 0 || p >= 1) return 0.0;
  return -(p * std::log2(p) + (1 - p) * std::log2(1 - p));
}

JointPmf dsbs(double p) {
  return JointPmf({2, 2}, {(1 - p) / 2, p / 2, p / 2, (1 - p) / 2}, {Role::X, Role::Y});
}

// ---------------------------------------------------------------------------
// Independent oracles.

// Blahut-Arimoto for a point-to-point source under a distortion matrix,
// bisecting on the slope until the distortion budget is met.
double ba_oracle(const std::vector<double>& p, const std::vector<std::vector<double>>& d,
                 double budget) {
  const std::size_t nx = p.size(), ny = d[0].size();
  auto at_slope = [&](double s, double& dist) {
    std::vector<double> q(ny, 1.0 / ny), row(ny);
    std::vector<std::vector<double>> cond(nx, std::vector<double>(ny));
    for (int it = 0; it < 20000; ++it) {
      for (std::size_t x = 0; x < nx; ++x) {
        double z = 0;
        for (std::size_t y = 0; y < ny; ++y) z += (cond[x][y] = q[y] * std::exp2(-s * d[x][y]));
        for (std::size_t y = 0; y < ny; ++y) cond[x][y] /= z;
      }
      std::vector<double> next(ny, 0.0);
      for (std::size_t x = 0; x < nx; ++x)
        for (std::size_t y = 0; y < ny; ++y) next[y] += p[x] * cond[x][y];
      double change = 0;
      for (std::size_t y = 0; y < ny; ++y) change = std::max(change, std::abs(next[y] - q[y]));
      q = next;
      if (change < 1e-14) break;
    }
    double rate = 0;
    dist = 0;
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t y = 0; y < ny; ++y)
        if (p[x] > 0 && cond[x][y] > 0) {
          rate += p[x] * cond[x][y] * std::log2(cond[x][y] / q[y]);
          dist += p[x] * cond[x][y] * d[x][y];
        }
    return rate;
  };
  double dist = 0;
  if (at_slope(0.0, dist) >= 0 && dist <= budget) return 0.0;
  double lo = 0, hi = 1;
  while (at_slope(hi, dist), dist > budget) hi *= 2;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    at_slope(mid, dist);
    (dist > budget ? lo : hi) = mid;
  }
  return at_slope(hi, dist);
}

// Regularized upper incomplete gamma Q(a, x).
double gamma_q(double a, double x) {
  if (x <= 0) return 1.0;
  const double lg = std::lgamma(a);
  if (x < a + 1) {
    double sum = 1.0 / a, term = sum;
    for (int k = 1; k < 100000; ++k) {
      term *= x / (a + k);
      sum += term;
      if (term < sum * 1e-16) break;
    }
    return 1.0 - sum * std::exp(-x + a * std::log(x) - lg);
  }
  double b = x + 1 - a, c = 1e300, d = 1 / b, h = d;
  for (int i = 1; i < 100000; ++i) {
    const double an = -i * (i - a);
    b += 2;
    d = an * d + b;
    if (std::abs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::abs(c) < 1e-300) c = 1e-300;
    d = 1 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - lg) * h;
}

// Chi-square p-value of observed counts against the uniform distribution.
double uniform_chi_square_p(const std::map<Sequence, std::size_t>& counts, std::size_t cells,
                            std::size_t draws) {
  const double expected = static_cast<double>(draws) / static_cast<double>(cells);
  double stat = 0;
  std::size_t seen = 0;
  for (const auto& [s, c] : counts) {
    stat += (c - expected) * (c - expected) / expected;
    ++seen;
  }
  stat += static_cast<double>(cells - seen) * expected;
  return gamma_q(0.5 * static_cast<double>(cells - 1), 0.5 * stat);
}

Sequence bits_of(std::size_t v, std::size_t n) {
  Sequence s(n);
  for (std::size_t t = 0; t < n; ++t) s[t] = static_cast<Symbol>((v >> t) & 1);
  return s;
}

// ---------------------------------------------------------------------------

// Constant W with test channels solved at the given budgets.
SimConfig dsbs_witness_config(double d, double p) {
  const auto pr =
      GrayWynerProblem::hamming(dsbs(0.1), PerceptionMeasure::total_variation(), {d, d, p, p});
  const AuxChannel aux{Kernel::constant(4, Pmf({1.0}))};
  const RegionPoint wp = rate_triple_for_aux(pr, aux);
  SimConfig c;
  c.p_xy = pr.p_xy;
  c.aux = aux.kernel;
  c.test_x = wp.test_channel_x;
  c.test_y = wp.test_channel_y;
  c.delta1 = pr.delta1;
  c.delta2 = pr.delta2;
  c.perception1 = pr.perception1;
  c.perception2 = pr.perception2;
  c.budgets = pr.budgets;
  c.delta = 0.15;
  c.seed = 1;
  c.memory_cap = std::uint64_t{1} << 30;
  c.threads = 0;
  return c;
}

void criterion1(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(0, 1);
  double worst = 0;
  for (int i = 0; i < 50; ++i) {
    const std::size_t nw = 1 + i % 2;
    RdpQuery q;
    q.q_xw = random_joint(rng, {2, nw}).with_roles({Role::X, Role::W});
    q.delta = DistortionMatrix::hamming(2);
    q.d_budget = 0.3 * u(rng);
    q.p_budget = 0.3 * u(rng);
    const RdpResult r = conditional_rdp(q);
    const BruteForceResult b = brute_force_rdp(q, 41);
    const double diff = std::abs(r.rate - b.rate);
    worst = std::max(worst, diff);
    if (diff > 5e-3) o.fail("instance " + std::to_string(i) + " differs by " + std::to_string(diff));
  }
  const double t = seconds_since(t0);
  if (t > 300) o.fail("took " + std::to_string(t) + " s");
  o.detail << " worst |diff| " << worst << " bits, " << t << " s";
}

void criterion2(Outcome& o) {
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> u(0, 1);
  const auto tv = PerceptionMeasure::total_variation();
  double worst = 0;
  for (int i = 0; i < 20; ++i) {
    const std::size_t k = 2 + i % 3;
    const Pmf p = random_pmf(rng, k);
    const auto ham = DistortionMatrix::hamming(k);
    const double dmax = 1.0 - *std::max_element(p.probs().begin(), p.probs().end());
    const double d = 0.01 + 0.9 * dmax * u(rng);
    std::vector<std::vector<double>> dm(k, std::vector<double>(k));
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b) dm[a][b] = a == b ? 0.0 : 1.0;
    const double oracle = ba_oracle({p.probs().begin(), p.probs().end()}, dm, d);
    const double got = rdp_point_to_point(p, ham, tv, d, kUnbounded).rate;
    worst = std::max(worst, std::abs(got - oracle));
    if (std::abs(got - oracle) > 1e-3) o.fail("source " + std::to_string(i) + " off by " + std::to_string(got - oracle));
  }
  for (double d : {0.05, 0.1, 0.2}) {
    const double got = rdp_point_to_point(Pmf::uniform(2), DistortionMatrix::hamming(2), tv, d,
                                          kUnbounded).rate;
    worst = std::max(worst, std::abs(got - (1 - h2(d))));
    if (std::abs(got - (1 - h2(d))) > 1e-3) o.fail("closed form at D=" + std::to_string(d));
  }
  o.detail << " worst |diff| " << worst << " bits";
}

void criterion3(Outcome& o) {
  std::mt19937_64 rng(303);
  const double step = 0.05;
  double worst_mono = 0, worst_conv = 0;
  for (int inst = 0; inst < 10; ++inst) {
    RdpQuery q;
    const std::size_t nx = 2 + inst % 2, nw = 1 + (inst / 2) % 2;
    q.q_xw = random_joint(rng, {nx, nw}).with_roles({Role::X, Role::W});
    q.delta = DistortionMatrix::hamming(nx);
    double r[6][6];
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) {
        q.d_budget = step * i;
        q.p_budget = step * j;
        r[i][j] = conditional_rdp(q).rate;
      }
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) {
        if (i + 1 < 6) worst_mono = std::max(worst_mono, r[i + 1][j] - r[i][j]);
        if (j + 1 < 6) worst_mono = std::max(worst_mono, r[i][j + 1] - r[i][j]);
        for (int a = i; a < 6; ++a)
          for (int b = 0; b < 6; ++b) {
            if ((a - i) % 2 || (b - j) % 2 || (a == i && b == j)) continue;
            const double mid = r[(a + i) / 2][(b + j) / 2];
            worst_conv = std::max(worst_conv, mid - 0.5 * (r[i][j] + r[a][b]));
          }
      }
  }
  if (worst_mono > 1e-4) o.fail("monotonicity violated by " + std::to_string(worst_mono));
  if (worst_conv > 2e-4) o.fail("convexity violated by " + std::to_string(worst_conv));
  o.detail << " worst increase " << worst_mono << ", worst midpoint excess " << worst_conv;
}

void criterion4(Outcome& o) {
  const auto tv = PerceptionMeasure::total_variation();
  double worst_wit = 0, worst_slack = 1e300, worst_rd = 0;
  std::size_t points = 0;
  for (double p : {0.1, 0.3, kUnbounded}) {
    const auto pr = GrayWynerProblem::hamming(dsbs(0.1), tv, {0.05, 0.1, p, p});
    FrontierOptions fo;
    fo.samples = 30;
    fo.seed = 4;
    fo.threads = 0;
    const RegionFrontier f = compute_frontier(pr, fo);
    const CutSetAudit audit = cut_set_audit(pr, f, 1e-3);
    worst_slack = std::min(worst_slack, audit.worst_slack);
    for (std::size_t i = 0; i < f.points.size(); ++i) {
      const RegionPoint& pt = f.points[i];
      ++points;
      worst_wit = std::max(worst_wit, witness_deviation(pr, pt));
      if (!audit.pass[i]) o.fail("cut-set check failed");
      if (std::isinf(p)) {
        const JointPmf q = attach(pr.p_xy, pt.witness.kernel, Role::W);
        const JointPmf q_xw = q.marginal(std::vector<std::size_t>{0, 2});
        const double rd = conditional_rate_distortion(q_xw, pr.delta1, pr.budgets.d1).rate;
        worst_rd = std::max(worst_rd, std::abs(rd - pt.r1));
      }
    }
  }
  if (worst_wit > 1e-6) o.fail("witness deviation " + std::to_string(worst_wit));
  if (worst_rd > 1e-3) o.fail("unconstrained r1 off by " + std::to_string(worst_rd));
  o.detail << " " << points << " points, witness " << worst_wit << ", cut-set slack "
           << worst_slack << ", r1 vs rate-distortion " << worst_rd;
}

void criterion5(Outcome& o) {
  double min_p = 1.0;
  std::size_t tests = 0;
  // Unconditional sampler.
  const std::vector<std::pair<Pmf, double>> sources{{Pmf::uniform(2), 0.3}, {Pmf({0.3, 0.7}), 0.2}};
  for (std::size_t n = 4; n <= 12; n += 2) {
    for (const auto& [q, delta] : sources) {
      std::size_t cells = 0;
      for (std::size_t v = 0; v < (std::size_t{1} << n); ++v) cells += is_typical(bits_of(v, n), q, delta);
      const std::size_t draws = 40 * cells;
      const auto samples = sample_uniform_typical({q, delta, n}, draws, 500 + n);
      std::map<Sequence, std::size_t> counts;
      for (const auto& s : samples) {
        if (!is_typical(s, q, delta)) o.fail("sampler returned an atypical sequence");
        ++counts[s];
      }
      const double pv = uniform_chi_square_p(counts, cells, draws);
      min_p = std::min(min_p, pv);
      ++tests;
      if (pv < 0.01) o.fail("chi-square p = " + std::to_string(pv) + " at n = " + std::to_string(n));
    }
  }
  // Conditional sampler.
  const JointPmf q_ac({2, 2}, {0.35, 0.15, 0.1, 0.4});
  for (std::size_t n : {6, 8, 10, 12}) {
    const double delta = 0.5;
    const ConditionalTypicalSampler cs(q_ac, delta, n);
    Sequence w(n, 0);
    for (std::size_t t = 0; t < n / 2; ++t) w[2 * t + 1] = 1;
    std::size_t cells = 0;
    for (std::size_t v = 0; v < (std::size_t{1} << n); ++v) cells += is_cond_typical(bits_of(v, n), w, q_ac, delta);
    const std::size_t draws = 40 * cells;
    Rng rng(900 + n);
    std::map<Sequence, std::size_t> counts;
    for (std::size_t i = 0; i < draws; ++i) {
      const Sequence s = cs(w, rng);
      if (!is_cond_typical(s, w, q_ac, delta)) o.fail("conditional sampler returned an atypical sequence");
      ++counts[s];
    }
    const double pv = uniform_chi_square_p(counts, cells, draws);
    min_p = std::min(min_p, pv);
    ++tests;
    if (pv < 0.01) o.fail("conditional chi-square p = " + std::to_string(pv));
  }

  // Every codeword typical, for a nontrivial auxiliary channel and for the
  // simulation witness.
  std::size_t codewords = 0;
  {
    const Kernel aux(4, 2, {0.9, 0.1, 0.5, 0.5, 0.5, 0.5, 0.1, 0.9});
    const Kernel test(4, 2, {0.85, 0.15, 0.7, 0.3, 0.3, 0.7, 0.15, 0.85});
    const auto scheme = CodingScheme::build(dsbs(0.1), aux, test, test, DistortionMatrix::hamming(2),
                                            DistortionMatrix::hamming(2));
    const CodeSizes sizes = compute_code_sizes(scheme, 10, 0.2);
    const Codebook cb = generate_codebook(scheme, sizes, 7, std::uint64_t{1} << 28, 0);
    const CodebookAudit a = audit_codebook(cb, scheme);
    codewords += sizes.m0 * (1 + sizes.m1 + sizes.m2);
    if (a.w_atypical + a.x_atypical + a.y_atypical != 0) o.fail("atypical codewords");
  }
  const SimConfig sc = dsbs_witness_config(0.3, 0.0);
  const auto scheme =
      CodingScheme::build(sc.p_xy, sc.aux, sc.test_x, sc.test_y, sc.delta1, sc.delta2);
  const CodeSizes sizes = compute_code_sizes(scheme, 16, sc.delta);
  const Codebook cb = generate_codebook(scheme, sizes, 3, sc.memory_cap, 0);
  const CodebookAudit a = audit_codebook(cb, scheme);
  codewords += sizes.m0 * (1 + sizes.m1 + sizes.m2);
  if (a.w_atypical + a.x_atypical + a.y_atypical != 0) o.fail("atypical witness codewords");

  // Shift, distortion and type invariants on randomized cases.
  std::mt19937_64 rng(505);
  std::bernoulli_distribution flip(0.1), coin(0.5);
  const auto ham = DistortionMatrix::hamming(2);
  std::size_t violations = 0;
  for (int c = 0; c < 10000; ++c) {
    Sequence x(16), y(16);
    for (std::size_t t = 0; t < 16; ++t) {
      x[t] = coin(rng);
      y[t] = x[t] ^ flip(rng);
    }
    const std::size_t k = rng() % 16;
    const Sequence xb = inverse_circular_shift(k, x), yb = inverse_circular_shift(k, y);
    bool ok = circular_shift(k, xb) == x && circular_shift(k, yb) == y;
    const Messages m = encode(x, y, k, cb, scheme);
    ok = ok && m == encode_shifted(xb, yb, cb, scheme);
    const auto [xh, yh] = decode(m.s0, m.s1, m.s2, k, cb);
    const auto cx = cb.x(m.s0, m.s1), cy = cb.y(m.s0, m.s2);
    std::size_t e_dec = 0, e_code = 0;
    for (std::size_t t = 0; t < 16; ++t) {
      e_dec += xh[t] != x[t];
      e_code += cx[t] != xb[t];
    }
    ok = ok && e_dec == e_code && average_distortion(x, xh, ham) == average_distortion(xb, cx, ham);
    ok = ok && empirical_type(xh, 2) == empirical_type(cx, 2) &&
         empirical_type(yh, 2) == empirical_type(cy, 2);
    violations += !ok;
  }
  if (violations) o.fail(std::to_string(violations) + " invariant violations");
  o.detail << " " << tests << " chi-square tests, min p " << min_p << "; " << codewords
           << " codewords typical; 10000 invariant cases";
}

void criterion6(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const SimConfig base = dsbs_witness_config(0.3, 0.0);
  const ConvergenceStudy s = convergence_study(base, {16, 24, 32}, 10000);
  for (const SimReport& r : s.rows) {
    for (const BranchReport* b : {&r.x, &r.y}) {
      if (b->threshold_excess > b->distortion.half_width)
        o.fail("distortion above threshold at n = " + std::to_string(r.n));
      o.detail << " n=" << r.n << " excess " << b->threshold_excess << "+-"
               << b->distortion.half_width << ";";
    }
  }
  const SimReport& last = s.rows.back();
  double worst = -1e300;
  for (const BranchReport* b : {&last.x, &last.y})
    for (const PositionStat& p : b->positions) {
      worst = std::max(worst, p.excess - p.interval);
      if (p.excess > 0.05 + p.interval) o.fail("per-position TV excess above 0.05 + interval");
    }
  if (!s.e0_non_increasing) o.fail("E0 frequency increases with n");
  const double t = seconds_since(t0);
  if (t > 900) o.fail("took " + std::to_string(t) + " s");
  o.detail << " n=32 worst TV excess minus interval " << worst << "; E0 ";
  for (const auto& r : s.rows) o.detail << r.e0.rate << " ";
  o.detail << "; " << t << " s";
}

void criterion7(Outcome& o) {
  // Exhaustive audits.
  std::mt19937_64 rng(707);
  std::vector<JointPmf> sources{dsbs(0.1), dsbs(0.3),
                                JointPmf({2, 2}, {0.25, 0.25, 0.25, 0.25}, {Role::X, Role::Y})};
  for (int i = 0; i < 3; ++i) sources.push_back(random_joint(rng, {2, 2}).with_roles({Role::X, Role::Y}));
  sources.push_back(random_joint(rng, {2, 3}).with_roles({Role::X, Role::Y}));
  std::size_t maps = 0;
  for (const JointPmf& p : sources) {
    const std::size_t k = p.size();
    for (std::size_t n : {2, 4, 8, 16, 24, 32}) {
      std::vector<std::size_t> n0s{default_n0(k, n)};
      for (std::size_t e = 1; e <= 10; ++e) n0s.push_back(e);
      for (std::size_t n0 : n0s) {
        if (std::pow(double(k), double(n0)) < n || std::pow(double(k), double(n0)) > 1 << 22) continue;
        const OmegaMap m = build_omega(p, n0, n);
        const OmegaAudit a = audit_omega(m, p);
        double pmax = 0;
        for (double v : p.probs()) pmax = std::max(pmax, v);
        ++maps;
        if (!a.every_atom_assigned || a.max_deviation > std::pow(pmax, double(n0)))
          o.fail("omega bound violated");
      }
    }
  }

  SimConfig cr = dsbs_witness_config(0.3, 0.0);
  cr.n = 16;
  cr.trials = 10000;
  SimConfig det = cr;
  det.mode = SimMode::Deterministic;
  const SimReport a = run_simulation(cr), b = run_simulation(det);
  for (auto [ra, rb] : {std::pair{&a.x, &b.x}, std::pair{&a.y, &b.y}}) {
    const double diff = std::abs(rb->head_distortion.mean - ra->distortion.mean);
    if (diff > 2 * ra->distortion.half_width) o.fail("deterministic distortion mean differs");
    o.detail << " head " << rb->head_distortion.mean << " vs " << ra->distortion.mean << " (+-"
             << ra->distortion.half_width << ");";
  }
  const double expect = std::log2(16.0) / (16.0 + double(b.n0));
  if (b.n0 != default_n0(4, 16) || b.rate_overhead != expect) o.fail("overhead mismatch");
  const double rx = std::log2(double(b.sizes.m1)) / (16.0 + double(b.n0)) + expect;
  if (b.x.realized_rate != rx) o.fail("realized rate lacks the overhead");
  o.detail << " " << maps << " omega maps audited; n0 " << b.n0 << ", overhead " << b.rate_overhead;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void criterion8(Outcome& o) {
  const fs::path dir = fs::temp_directory_path() / "gwrdp_acceptance_c8";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::map<std::string, std::string> configs{
      {"rdp", R"({"q_xw":[[0.3,0.1],[0.15,0.45]],"d_budget":0.08,"p_budget":0.05})"},
      {"region", R"({"p_xy":[[0.45,0.05],[0.05,0.45]],"budgets":{"d1":0.1,"d2":0.1,"p1":0.2,"p2":0.2},"samples":12,"seed":8})"},
      {"simulate", R"({"p_xy":[[0.45,0.05],[0.05,0.45]],"budgets":{"d1":0.3,"d2":0.3,"p1":0,"p2":0},"delta":0.15,"n_list":[12,16],"trials":2000,"seed":8,"mode":"deterministic"})"},
      {"derand-audit", R"({"p_xy":[[0.45,0.05],[0.05,0.45]],"n":16})"}};
  std::size_t files = 0;
  for (const auto& [cmd, body] : configs) {
    const fs::path cfg = dir / (cmd + ".json");
    std::ofstream(cfg) << body;
    std::map<std::string, std::string> runs[2];
    for (int par = 0; par < 2; ++par) {
      const fs::path out = dir / "out";
      fs::remove_all(out);
      const std::string cfg_s = cfg.string(), out_s = out.string();
      const char* argv[] = {"gwrdp", cmd.c_str(), "--config", cfg_s.c_str(), "--out-dir",
                            out_s.c_str(), "--parallel", par ? "8" : "1"};
      std::ostringstream sink;
      const int code = run_cli(8, argv, sink, sink);
      if (code != 0) o.fail(cmd + " exited with " + std::to_string(code));
      for (const auto& e : fs::directory_iterator(out))
        runs[par][e.path().filename().string()] = slurp(e.path());
    }
    files += runs[0].size();
    if (runs[0].empty() || runs[0] != runs[1]) o.fail(cmd + " outputs differ");
  }
  fs::remove_all(dir);
  o.detail << " " << files << " files compared";
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> all{
      {"1 conditional solver matches the grid oracle", criterion1},
      {"2 point-to-point rate-distortion matches Blahut-Arimoto and 1 - h2(D)", criterion2},
      {"3 monotonicity and midpoint convexity", criterion3},
      {"4 frontier witnesses, cut-set bounds and unconstrained r1", criterion4},
      {"5 sampler uniformity, codeword typicality and codec invariants", criterion5},
      {"6 finite-blocklength simulation", criterion6},
      {"7 de-randomization audit, distortion and overhead", criterion7},
      {"8 serial and parallel outputs are byte-identical", criterion8},
  };
  std::vector<int> pick;
  for (int i = 1; i < argc; ++i) pick.push_back(std::atoi(argv[i]));
  int failures = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (!pick.empty() && std::find(pick.begin(), pick.end(), int(i + 1)) == pick.end()) continue;
    Outcome o;
    try {
      all[i].second(o);
    } catch (const std::exception& e) {
      o.fail(std::string("threw: ") + e.what());
    }
    std::printf("%s criterion %s:%s\n", o.pass ? "PASS" : "FAIL", all[i].first, o.detail.str().c_str());
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}

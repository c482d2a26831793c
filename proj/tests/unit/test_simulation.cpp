#include <cmath>

#include "doctest.h"
#include "gwrdp/error.hpp"
#include "gwrdp/simulation.hpp"

using namespace gwrdp;

namespace {

JointPmf dsbs(double p) {
  return JointPmf({2, 2}, {(1 - p) / 2, p / 2, p / 2, (1 - p) / 2}, {Role::X, Role::Y});
}

Kernel bsc(double e) { return Kernel(2, 2, {1 - e, e, e, 1 - e}); }

SimConfig base(std::size_t n, double delta, std::size_t trials) {
  SimConfig c;
  c.p_xy = dsbs(0.1);
  c.aux = Kernel::constant(4, Pmf({1.0}));
  c.test_x = bsc(0.2);
  c.test_y = bsc(0.2);
  c.delta1 = c.delta2 = DistortionMatrix::hamming(2);
  c.budgets = {0.2, 0.2, 0.0, 0.0};
  c.n = n;
  c.delta = delta;
  c.trials = trials;
  c.seed = 17;
  return c;
}

// Exact expectation over all source pairs and all shifts for the codebook the
// simulation draws.
struct Exact {
  double d1 = 0.0, d2 = 0.0;
  std::vector<double> x_one;  // P(Xhat_t = 1)
};

Exact exact_oracle(const SimConfig& c) {
  const CodingScheme scheme =
      CodingScheme::build(c.p_xy, c.aux, c.test_x, c.test_y, c.delta1, c.delta2);
  const CodeSizes sizes = compute_code_sizes(scheme, c.n, c.delta);
  const Codebook cb = generate_codebook(scheme, sizes, c.seed, c.memory_cap);
  const std::size_t n = c.n;
  Exact e;
  e.x_one.assign(n, 0.0);
  Sequence x(n), y(n);
  for (std::size_t a = 0; a < (std::size_t{1} << n); ++a) {
    for (std::size_t b = 0; b < (std::size_t{1} << n); ++b) {
      double p = 1.0;
      for (std::size_t t = 0; t < n; ++t) {
        x[t] = static_cast<Symbol>((a >> t) & 1);
        y[t] = static_cast<Symbol>((b >> t) & 1);
        p *= c.p_xy.probs()[x[t] * 2 + y[t]];
      }
      for (std::size_t k = 0; k < n; ++k) {
        const Messages m = encode(x, y, k, cb, scheme);
        const auto [xh, yh] = decode(m.s0, m.s1, m.s2, k, cb);
        double e1 = 0, e2 = 0;
        for (std::size_t t = 0; t < n; ++t) {
          e1 += xh[t] != x[t];
          e2 += yh[t] != y[t];
          e.x_one[t] += p / n * xh[t];
        }
        e.d1 += p / n * e1 / n;
        e.d2 += p / n * e2 / n;
      }
    }
  }
  return e;
}

}  // namespace

TEST_CASE("simulation agrees with exhaustive enumeration on a small instance") {
  const SimConfig c = base(6, 0.2, 20000);
  const SimReport r = run_simulation(c);
  const Exact e = exact_oracle(c);
  CHECK(std::abs(r.x.distortion.mean - e.d1) <= 4.0 * r.x.distortion.sd / std::sqrt(20000.0));
  CHECK(std::abs(r.y.distortion.mean - e.d2) <= 4.0 * r.y.distortion.sd / std::sqrt(20000.0));
  for (std::size_t t = 0; t < c.n; ++t)
    CHECK(std::abs(r.x.positions[t].marginal[1] - e.x_one[t]) <=
          2.0 * r.x.positions[t].half_widths[1]);
}

TEST_CASE("reports do not depend on the thread count") {
  SimConfig c = base(8, 0.3, 500);
  const SimReport a = run_simulation(c);
  c.threads = 4;
  const SimReport b = run_simulation(c);
  CHECK(a.x.distortion.mean == b.x.distortion.mean);
  CHECK(a.y.max_perception == b.y.max_perception);
  CHECK(a.e0.count == b.e0.count);
  for (std::size_t t = 0; t < 8; ++t) CHECK(a.x.positions[t].counts == b.x.positions[t].counts);
}

TEST_CASE("deterministic mode") {
  SimConfig c = base(8, 0.3, 300);
  c.mode = SimMode::Deterministic;
  const SimReport r = run_simulation(c);
  CHECK(r.n0 == default_n0(4, 8));
  CHECK(r.rate_overhead == seed_rate_overhead(8, r.n0));
  CHECK(r.omega_max_deviation <= r.omega_bound);
  REQUIRE(r.x.positions.size() == 8 + r.n0);
  for (std::size_t j = 0; j < r.n0; ++j)
    CHECK(r.x.positions[8 + j].counts == r.x.positions[j].counts);
}

TEST_CASE("wilson half width") {
  const double z = 1.96, n = 100, p = 0.5;
  const double want = z / (1 + z * z / n) * std::sqrt(p * (1 - p) / n + z * z / (4 * n * n));
  CHECK(std::abs(wilson_half_width(50, 100) - want) < 1e-15);
  CHECK(wilson_half_width(0, 100) > 0.0);
}

TEST_CASE("memory cap is enforced before generation") {
  SimConfig c = base(64, 0.1, 1);
  c.memory_cap = 1000;
  CHECK_THROWS_AS(run_simulation(c), ResourceLimit);
}

TEST_CASE("convergence study rows match individual runs") {
  const SimConfig c = base(6, 0.3, 200);
  const auto s = convergence_study(c, {6, 8}, 200);
  REQUIRE(s.rows.size() == 2);
  SimConfig c8 = c;
  c8.n = 8;
  CHECK(s.rows[1].x.distortion.mean == run_simulation(c8).x.distortion.mean);
}

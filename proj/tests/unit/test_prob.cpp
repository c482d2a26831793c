#include <cmath>
#include <random>

#include "doctest.h"
#include "gwrdp/error.hpp"
#include "gwrdp/prob.hpp"
#include "../support/random_dist.hpp"

using namespace gwrdp;
using gwrdp::testing::random_joint;
using gwrdp::testing::random_pmf;

namespace {

// I(A;B|C) by the defining sum over a 3-axis joint.
double cmi_oracle(const JointPmf& j) {
  const auto& s = j.shape();
  double total = 0.0;
  for (std::size_t c = 0; c < s[2]; ++c) {
    double pc = 0.0;
    std::vector<double> pa(s[0], 0.0), pb(s[1], 0.0);
    for (std::size_t a = 0; a < s[0]; ++a)
      for (std::size_t b = 0; b < s[1]; ++b) {
        pc += j(a, b, c);
        pa[a] += j(a, b, c);
        pb[b] += j(a, b, c);
      }
    for (std::size_t a = 0; a < s[0]; ++a)
      for (std::size_t b = 0; b < s[1]; ++b) {
        const double p = j(a, b, c);
        if (p > 0.0) total += p * std::log2(p * pc / (pa[a] * pb[b]));
      }
  }
  return total;
}

}  // namespace

TEST_CASE("pmf validation") {
  CHECK_THROWS_AS(Pmf({0.5, 0.6}), InvalidArgument);
  CHECK_THROWS_AS(Pmf({-0.1, 1.1}), InvalidArgument);
  CHECK_THROWS_AS(Pmf(std::vector<double>{}), InvalidArgument);
  const Pmf p({0.25, 0.75});
  CHECK(p[1] == 0.75);
  CHECK(Pmf::from_weights({1, 3}) == p);
}

TEST_CASE("entropy examples") {
  CHECK(entropy(Pmf({0.5, 0.5})) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(entropy(Pmf({1.0, 0.0})) == 0.0);
  const double oracle = -(0.1 * std::log(0.1) + 0.9 * std::log(0.9)) / std::log(2.0);
  CHECK(std::abs(entropy(Pmf({0.1, 0.9})) - 0.4690) < 1e-4);
  CHECK(std::abs(entropy(Pmf({0.1, 0.9})) - oracle) < 1e-14);
}

TEST_CASE("mutual information examples") {
  const auto ind = JointPmf::product(Pmf::uniform(2), Pmf::uniform(2));
  CHECK(std::abs(mutual_information(ind)) < 1e-15);
  const JointPmf copy({2, 2}, {0.5, 0, 0, 0.5});
  CHECK(mutual_information(copy) == doctest::Approx(1.0));
  const JointPmf dsbs({2, 2}, {0.45, 0.05, 0.05, 0.45});
  const double h = -(0.1 * std::log2(0.1) + 0.9 * std::log2(0.9));
  CHECK(std::abs(mutual_information(dsbs) - 0.5310) < 1e-3);
  CHECK(std::abs(mutual_information(dsbs) - (1.0 - h)) < 1e-12);
}

TEST_CASE("conditional mutual information examples") {
  std::mt19937_64 rng(7);
  // Conditionally independent: product of per-c marginals.
  std::vector<double> w(8);
  const Pmf pc = random_pmf(rng, 2);
  for (std::size_t c = 0; c < 2; ++c) {
    const Pmf a = random_pmf(rng, 2), b = random_pmf(rng, 2);
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j) w[i * 4 + j * 2 + c] = pc[c] * a[i] * b[j];
  }
  CHECK(std::abs(conditional_mutual_information(JointPmf::from_weights({2, 2, 2}, w))) < 1e-12);

  const JointPmf ab = random_joint(rng, {2, 3});
  std::vector<double> wc(ab.probs().begin(), ab.probs().end());
  const JointPmf abc({2, 3, 1}, wc);
  CHECK(conditional_mutual_information(abc) ==
        doctest::Approx(mutual_information(ab)).epsilon(1e-12));

  for (int i = 0; i < 20; ++i) {
    const JointPmf j = random_joint(rng, {2, 2, 2}, true);
    CHECK(std::abs(conditional_mutual_information(j) - cmi_oracle(j)) < 1e-10);
  }
}

TEST_CASE("tv distance examples and metric properties") {
  CHECK(tv_distance(Pmf({0.5, 0.5}), Pmf({0.5, 0.5})) == 0.0);
  CHECK(tv_distance(Pmf({1, 0}), Pmf({0, 1})) == 2.0);
  CHECK(tv_distance(Pmf({0.7, 0.3}), Pmf({0.5, 0.5})) == doctest::Approx(0.4).epsilon(1e-14));
  CHECK_THROWS_AS(tv_distance(Pmf({1.0}), Pmf({0.5, 0.5})), InvalidArgument);
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const Pmf p = random_pmf(rng, 4, true), q = random_pmf(rng, 4, true),
              r = random_pmf(rng, 4, true);
    CHECK(tv_distance(p, p) == 0.0);
    CHECK(tv_distance(p, q) == tv_distance(q, p));
    CHECK(tv_distance(p, r) <= tv_distance(p, q) + tv_distance(q, r) + 1e-15);
    if (!(p == q)) CHECK(tv_distance(p, q) > 0.0);
  }
}

TEST_CASE("kl divergence conventions") {
  CHECK(std::isinf(kl_divergence(Pmf({0.5, 0.5}), Pmf({1.0, 0.0}))));
  CHECK(kl_divergence(Pmf({1.0, 0.0}), Pmf({0.5, 0.5})) == doctest::Approx(1.0));
}

TEST_CASE("expected distortion examples") {
  const auto ham = DistortionMatrix::hamming(2);
  CHECK(expected_distortion(JointPmf({2, 2}, {0.3, 0, 0, 0.7}), ham) == 0.0);
  CHECK(expected_distortion(JointPmf::product(Pmf::uniform(2), Pmf::uniform(2)), ham) ==
        doctest::Approx(0.5));
  std::mt19937_64 rng(3);
  const DistortionMatrix d(2, 2, {0.0, 1.7, 0.0, 0.3});
  for (int i = 0; i < 10; ++i) {
    const JointPmf j = random_joint(rng, {2, 2});
    double oracle = 0.0;
    for (std::size_t a = 0; a < 2; ++a)
      for (std::size_t b = 0; b < 2; ++b) oracle += j(a, b) * d(a, b);
    CHECK(std::abs(expected_distortion(j, d) - oracle) < 1e-12);
  }
  CHECK_THROWS_AS(expected_distortion(JointPmf::product(Pmf::uniform(3), Pmf::uniform(3)), ham),
                  InvalidArgument);
  CHECK_THROWS_AS(DistortionMatrix(2, 2, {1, 1, 0, 1}), InvalidArgument);
}

TEST_CASE("empirical types") {
  const Sequence s{0, 1, 0, 1};
  CHECK(empirical_type(s, 2).counts == std::vector<std::size_t>{2, 2});
  CHECK(empirical_type(Sequence(5, 0), 2).counts == std::vector<std::size_t>{5, 0});
  CHECK_THROWS_AS(empirical_type(Sequence{0, 2}, 2), InvalidArgument);
  const Sequence t{0, 0, 1, 2, 1, 0};
  for (std::size_t k = 0; k < t.size(); ++k) {
    Sequence r(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) r[i] = t[(i + k) % t.size()];
    CHECK(empirical_type(r, 3) == empirical_type(t, 3));
  }
  const Sequence a{0, 1, 1}, b{1, 1, 0};
  const auto jt = joint_empirical_type({a, b}, {2, 2});
  CHECK(jt.counts == std::vector<std::size_t>{0, 1, 1, 1});
  CHECK(jt.n == 3);
}

TEST_CASE("chain rules and marginalization") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    const JointPmf j = random_joint(rng, {3, 2, 2}, true);
    const double hab = entropy(j.marginal(std::vector<std::size_t>{0, 1}));
    CHECK(std::abs(hab - (entropy(j.marginal(0)) + conditional_entropy(j, {1}, {0}))) < 1e-10);
    CHECK(conditional_mutual_information(j) >= 0.0);
    const double lhs = mutual_information(j, {0, 1}, {2});
    const double rhs = mutual_information(j, {0}, {2}) + conditional_mutual_information(j, {1}, {2}, {0});
    CHECK(std::abs(lhs - rhs) < 1e-10);
    for (std::size_t ax = 0; ax < 3; ++ax) {
      const Pmf m = j.marginal(ax);
      CHECK(Pmf::from_weights({m.probs().begin(), m.probs().end()}).probs().size() == m.size());
      double s = 0.0;
      for (double v : m.probs()) s += v;
      CHECK(std::abs(s - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("kernel and attach") {
  const Kernel k = Kernel::from_rows({Pmf({0.9, 0.1}), Pmf({0.2, 0.8})});
  const JointPmf j = compose(Pmf({0.5, 0.5}), k);
  CHECK(j(1, 1) == doctest::Approx(0.4));
  CHECK_THROWS_AS(Kernel(2, 2, {0.5, 0.5, 0.5, 0.6}), InvalidArgument);
  const JointPmf xy({2, 2}, {0.25, 0.25, 0.25, 0.25});
  const JointPmf xyw = attach(xy, Kernel::identity(4));
  CHECK(xyw.shape() == std::vector<std::size_t>{2, 2, 4});
  CHECK(xyw(1, 0, 2) == 0.25);
}

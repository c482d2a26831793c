#include <cmath>
#include <map>
#include <string>

#include "doctest.h"
#include "gwrdp/error.hpp"
#include "gwrdp/typicality.hpp"

using namespace gwrdp;

namespace {

JointPmf uniform_xy() { return JointPmf({2, 2}, {0.25, 0.25, 0.25, 0.25}, {Role::X, Role::Y}); }

JointPmf dsbs(double p) {
  return JointPmf({2, 2}, {(1 - p) / 2, p / 2, p / 2, (1 - p) / 2}, {Role::X, Role::Y});
}

// Constant W with identity test channels on both branches.
CodingScheme identity_scheme(const JointPmf& p_xy) {
  return CodingScheme::build(p_xy, Kernel::constant(4, Pmf({1.0})), Kernel::identity(2),
                             Kernel::identity(2), DistortionMatrix::hamming(2),
                             DistortionMatrix::hamming(2));
}

}  // namespace

TEST_CASE("theta follows the circular position rule") {
  CHECK(theta(5, 0, 3) == 3);
  CHECK(theta(5, 2, 4) == 1);
  CHECK(theta(4, 3, 2) == 1);
  CHECK_THROWS_AS(theta(4, 4, 1), InvalidArgument);
  CHECK_THROWS_AS(theta(4, 0, 0), InvalidArgument);
  CHECK_THROWS_AS(theta(4, 0, 5), InvalidArgument);
}

TEST_CASE("circular shifts") {
  const Sequence s{0, 1, 2, 3};
  CHECK(circular_shift(0, s) == s);
  CHECK(circular_shift(1, s) == Sequence{1, 2, 3, 0});
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(circular_shift(k, inverse_circular_shift(k, s)) == s);
    const Sequence sh = circular_shift(k, s);
    for (std::size_t t = 1; t <= 4; ++t) CHECK(sh[t - 1] == s[theta(4, k, t) - 1]);
  }
  CHECK_THROWS_AS(circular_shift(4, s), InvalidArgument);
  CHECK_THROWS_AS(circular_shift(1, s, Sequence{0, 1}), InvalidArgument);
}

TEST_CASE("multiplicative typicality") {
  const Pmf u = Pmf::uniform(2);
  CHECK(is_typical(Sequence{1, 1, 1, 1, 1, 0, 0, 0, 0, 0}, u, 0.2));
  CHECK_FALSE(is_typical(Sequence{1, 1, 1, 1, 1, 1, 1, 1, 0, 0}, u, 0.2));
  const Pmf q({0.5, 0.5, 0.0});
  CHECK_FALSE(is_typical(Sequence{0, 1, 2, 0, 1, 0}, q, 10.0));
  CHECK(within_band(0, 7, 0.0, 0.5));
  CHECK_FALSE(within_band(1, 7, 0.0, 100.0));

  const JointPmf q_ac({2, 2}, {0.4, 0.1, 0.1, 0.4});
  const Sequence c{0, 0, 0, 0, 1, 1, 1, 1, 0, 1};
  CHECK(is_cond_typical(Sequence{0, 0, 0, 0, 1, 1, 1, 1, 1, 0}, c, q_ac, 0.01));
  CHECK_FALSE(is_cond_typical(Sequence{0, 0, 0, 0, 1, 1, 1, 1, 0, 1}, c, q_ac, 0.01));
}

TEST_CASE("typical set enumeration reports the offending constraint") {
  const TypeTable t = enumerate_types(Pmf::uniform(2).probs(), 4, 0.0);
  REQUIRE(t.counts.size() == 1);
  CHECK(std::abs(t.log2_total - std::log2(6.0)) < 1e-12);
  try {
    enumerate_types(Pmf({0.3, 0.7}).probs(), 4, 0.0);
    FAIL("expected Infeasible");
  } catch (const Infeasible& e) {
    CHECK(std::string(e.what()).find("symbol 0") != std::string::npos);
  }
}

TEST_CASE("uniform sampler at delta 0 hits the six balanced sequences equally") {
  const auto draws = sample_uniform_typical({Pmf::uniform(2), 0.0, 4}, 100000, 7);
  std::map<Sequence, int> hist;
  for (const auto& s : draws) ++hist[s];
  CHECK(hist.size() == 6);
  for (const auto& [s, c] : hist) {
    CHECK(empirical_type(s, 2).counts == std::vector<std::size_t>{2, 2});
    CHECK(std::abs(c / 100000.0 - 1.0 / 6.0) <= 0.02);
  }
}

TEST_CASE("conditional sampler output is conditionally typical") {
  const JointPmf q_ac({2, 2}, {0.35, 0.1, 0.15, 0.4});
  const ConditionalTypicalSampler sampler(q_ac, 0.3, 20);
  Rng rng(3);
  const Sequence cond{0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1};
  for (int i = 0; i < 200; ++i) CHECK(is_cond_typical(sampler(cond, rng), cond, q_ac, 0.3));
  const TypicalSetSpec spec{Pmf({0.3, 0.7}), 0.2, 20};
  for (int i = 0; i < 50; ++i) CHECK(is_typical(sample_rejection_typical(spec, rng), spec.q, 0.2));
}

TEST_CASE("code sizes") {
  SUBCASE("X copied, W constant: H(Xt|W) = 1") {
    const auto scheme = identity_scheme(uniform_xy());
    const auto sizes = compute_code_sizes(scheme, 10, 0.1);
    CHECK(sizes.m0 == 1);
    CHECK(sizes.m1 == 16384);
    CHECK(sizes.delta_x == doctest::Approx(0.2));
    CHECK(compute_code_sizes(scheme, 10, 0.1) == sizes);
  }
  SUBCASE("copy W on four uniform atoms") {
    const Kernel copy = Kernel::identity(4);
    const Kernel tx = Kernel::constant(8, Pmf::uniform(2));
    const auto scheme = CodingScheme::build(uniform_xy(), copy, tx, tx, DistortionMatrix::hamming(2),
                                            DistortionMatrix::hamming(2));
    const auto sizes = compute_code_sizes(scheme, 8, 0.1);
    // I = 2, H(W) = 2, H(W|XY) = 0.
    const long double e = 8.0L * (2.0L + 2.0L * 0.1L * 2.0L);
    CHECK(sizes.m0 == static_cast<std::uint64_t>(std::floor(std::exp2(e))));
    // I(X; Xt | W) = 0 and H(Xt | W) = 1.
    CHECK(sizes.m1 == static_cast<std::uint64_t>(std::floor(std::exp2(8.0L * 2.0L * 0.1L * 2.0L))));
  }
  SUBCASE("oversized exponent") {
    CHECK_THROWS_AS(floor_exp2(63.5), ResourceLimit);
    CHECK(floor_exp2(12.0) == 4096);
  }
}

TEST_CASE("codebook generation") {
  const auto scheme = CodingScheme::build(
      dsbs(0.1), Kernel::from_rows({Pmf({0.9, 0.1}), Pmf({0.5, 0.5}), Pmf({0.5, 0.5}), Pmf({0.1, 0.9})}),
      Kernel::from_rows({Pmf({0.8, 0.2}), Pmf({0.6, 0.4}), Pmf({0.4, 0.6}), Pmf({0.2, 0.8})}),
      Kernel::from_rows({Pmf({0.8, 0.2}), Pmf({0.6, 0.4}), Pmf({0.4, 0.6}), Pmf({0.2, 0.8})}),
      DistortionMatrix::hamming(2), DistortionMatrix::hamming(2));
  CodeSizes sizes;
  sizes.m0 = 3;
  sizes.m1 = 5;
  sizes.m2 = 4;
  sizes.n = 16;
  sizes.delta = 0.3;
  const Codebook a = generate_codebook(scheme, sizes, 11, 1 << 20, 1);
  const Codebook b = generate_codebook(scheme, sizes, 11, 1 << 20, 4);
  CHECK(a == b);
  const auto audit = audit_codebook(a, scheme);
  CHECK(audit.w_atypical == 0);
  CHECK(audit.x_atypical == 0);
  CHECK(audit.y_atypical == 0);
  CHECK(audit.ok(0.3));
  CHECK(codebook_symbols(sizes, 16) == 16 * (3 + 15 + 12));
  CHECK_THROWS_AS(generate_codebook(scheme, sizes, 11, 100, 1), ResourceLimit);
}

TEST_CASE("self-encoding codebook clears every flag") {
  const auto scheme = identity_scheme(uniform_xy());
  const Sequence x{0, 1, 1, 0, 1, 0, 0, 1};
  const Sequence y{1, 1, 0, 0, 1, 0, 1, 0};
  CodeSizes sizes;
  sizes.n = 8;
  sizes.delta = 0.5;
  for (std::size_t k = 0; k < 8; ++k) {
    const Codebook cb(8, 0.5, 0, sizes, Sequence(8, 0), inverse_circular_shift(k, x),
                      inverse_circular_shift(k, y));
    const Messages m = encode(x, y, k, cb, scheme);
    CHECK_FALSE(m.e0);
    CHECK_FALSE(m.e1);
    CHECK_FALSE(m.e2);
    const auto [xh, yh] = decode(m.s0, m.s1, m.s2, k, cb);
    CHECK(xh == x);
    CHECK(yh == y);
    CHECK(average_distortion(x, xh, scheme.delta1) <= m.threshold1);
  }
}

TEST_CASE("single-codeword book with an atypical source falls back with flags") {
  const auto scheme = identity_scheme(uniform_xy());
  CodeSizes sizes;
  sizes.n = 8;
  sizes.delta = 0.1;
  const Codebook cb(8, 0.1, 0, sizes, Sequence(8, 0), Sequence{0, 1, 0, 1, 0, 1, 0, 1},
                    Sequence{0, 1, 0, 1, 0, 1, 0, 1});
  const Sequence ones(8, 1);
  const Messages m = encode(ones, ones, 3, cb, scheme);
  CHECK(m.e0);
  CHECK(m.s0 == 0);
  CHECK(m.s1 == 0);
  CHECK(m.s2 == 0);
  CHECK_THROWS_AS(decode(0, 1, 0, 0, cb), InvalidArgument);
}

TEST_CASE("encoder depends only on the shifted sequences") {
  const auto scheme = identity_scheme(uniform_xy());
  CodeSizes sizes;
  sizes.m0 = 1;
  sizes.m1 = 6;
  sizes.m2 = 6;
  sizes.n = 12;
  sizes.delta = 0.5;
  const Codebook cb = generate_codebook(scheme, sizes, 5, 1 << 20);
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    Sequence x(12), y(12);
    for (auto& v : x) v = static_cast<Symbol>(rng.below(2));
    for (auto& v : y) v = static_cast<Symbol>(rng.below(2));
    const std::size_t k = rng.below(12), k2 = rng.below(12);
    const Sequence xbar = inverse_circular_shift(k, x), ybar = inverse_circular_shift(k, y);
    const Messages a = encode(x, y, k, cb, scheme);
    const Messages b = encode(circular_shift(k2, xbar), circular_shift(k2, ybar), k2, cb, scheme);
    CHECK(a == b);
  }
}

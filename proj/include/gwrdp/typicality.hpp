#pragma once

// Multiplicative typical sets, exactly uniform sampling from them, circular
// shifts, and the layered Gray-Wyner codec (three encoders, two decoders).
// Message indices are 0-based; index 0 is the fallback when no codeword
// qualifies.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gwrdp/prob.hpp"
#include "gwrdp/rng.hpp"

namespace gwrdp {

// 1-based position rule of the circular shift: ((t + k - 1) mod n) + 1.
std::size_t theta(std::size_t n, std::size_t k, std::size_t t);

// pi_k: output position t holds input position theta_k(t); with 0-based
// storage out[i] = in[(i + k) mod n]. k must lie in [0, n-1].
Sequence circular_shift(std::size_t k, std::span<const Symbol> seq);
std::pair<Sequence, Sequence> circular_shift(std::size_t k, std::span<const Symbol> x,
                                             std::span<const Symbol> y);
// pi_{-k}, i.e. a shift by (n - k) mod n.
Sequence inverse_circular_shift(std::size_t k, std::span<const Symbol> seq);

// |count / n - q| <= delta * q for one cell; q = 0 forces count = 0.
bool within_band(std::size_t count, std::size_t n, double q, double delta);

// Type of seq against Q.
bool is_typical(std::span<const Symbol> seq, const Pmf& q, double delta);
// Joint type of (seq, cond) against q_ac with axes (A, C): membership of seq
// in the conditional typical set T(Q_{A|C} | cond).
bool is_cond_typical(std::span<const Symbol> seq, std::span<const Symbol> cond,
                     const JointPmf& q_ac, double delta);
// Triple type of (x, y, w) against Q_XYW.
bool is_jointly_typical(std::span<const Symbol> x, std::span<const Symbol> y,
                        std::span<const Symbol> w, const JointPmf& q_xyw, double delta);

struct TypicalSetSpec {
  Pmf q;
  double delta = 0.0;
  std::size_t n = 1;
};

// Count vectors of one typical set and their type-class sizes (log2).
struct TypeTable {
  std::vector<std::vector<std::size_t>> counts;
  std::vector<double> log2_sizes;
  double log2_total = 0.0;  // log2 of the set size
};

// Throws Infeasible naming the offending symbol when the set is empty.
TypeTable enumerate_types(std::span<const double> q, std::size_t n, double delta);

// Exactly uniform draws over T_delta(Q): pick a type with probability
// proportional to its class size, then a uniform arrangement of it.
class TypicalSampler {
 public:
  explicit TypicalSampler(const TypicalSetSpec& spec);
  // Uniform over the sequences whose types are listed in table.
  TypicalSampler(std::size_t n, TypeTable table);
  Sequence operator()(Rng& rng) const;
  const TypeTable& table() const { return table_; }

 private:
  std::size_t n_;
  TypeTable table_;
  std::vector<double> weights_;
};

// Exactly uniform draws over T_delta(Q_{A|C} | cond), independently per
// stratum of positions sharing a conditioning symbol. Tables for every
// (conditioning symbol, stratum length) are built once for blocklength n.
class ConditionalTypicalSampler {
 public:
  ConditionalTypicalSampler(const JointPmf& q_ac, double delta, std::size_t n);
  Sequence operator()(std::span<const Symbol> cond, Rng& rng) const;
  // log2 |T_delta(Q_{A|C} | cond)|; throws Infeasible when the set is empty.
  double log2_size(std::span<const Symbol> cond) const;
  // True when every stratum of a conditioning sequence with these symbol
  // counts admits at least one type.
  bool admits(const std::vector<std::size_t>& cond_counts) const;

 private:
  struct Stratum {
    TypeTable table;
    std::vector<double> weights;
    std::string error;  // non-empty when the stratum admits no type
  };
  const Stratum& stratum(std::size_t c, std::size_t length) const;
  std::size_t a_size_ = 0, c_size_ = 0, n_ = 0;
  std::vector<std::vector<Stratum>> strata_;  // [c][length]
};

std::vector<Sequence> sample_uniform_typical(const TypicalSetSpec& spec, std::size_t count,
                                             std::uint64_t seed);
// Cross-check sampler: i.i.d. draws from Q^n until one is typical.
Sequence sample_rejection_typical(const TypicalSetSpec& spec, Rng& rng,
                                  std::size_t max_tries = 1000000);

// Joint law of the scheme: Q_XYW plus the two test channels, with the
// derived quantities the codec needs.
struct CodingScheme {
  JointPmf q_xyw;   // axes (X, Y, W)
  Kernel test_x;    // Q_{Xt|XW}, inputs x * |W| + w, outputs |X|
  Kernel test_y;    // Q_{Yt|YW}
  DistortionMatrix delta1;
  DistortionMatrix delta2;

  JointPmf q_xt_w;  // axes (Xt, W)
  JointPmf q_yt_w;  // axes (Yt, W)
  Pmf q_xt;
  Pmf q_yt;
  double expected_d1 = 0.0;  // E[Delta1(X, Xt)]
  double expected_d2 = 0.0;

  static CodingScheme build(const JointPmf& p_xy, const Kernel& aux, const Kernel& test_x,
                            const Kernel& test_y, const DistortionMatrix& delta1,
                            const DistortionMatrix& delta2);
  std::size_t x_size() const { return q_xyw.shape()[0]; }
  std::size_t y_size() const { return q_xyw.shape()[1]; }
  std::size_t w_size() const { return q_xyw.shape()[2]; }
};

struct CodeSizes {
  std::uint64_t m0 = 1, m1 = 1, m2 = 1;
  double delta1 = 0.0;   // delta (H(W) + H(W|XY))
  double delta_x = 0.0;  // delta (H(Xt|W) + 1)
  double delta_y = 0.0;  // delta (H(Yt|W) + 1)
  double i_xy_w = 0.0;   // I(X,Y; W)
  double i_x = 0.0;      // I(X; Xt | W)
  double i_y = 0.0;      // I(Y; Yt | W)
  std::size_t n = 0;
  double delta = 0.0;
  friend bool operator==(const CodeSizes&, const CodeSizes&) = default;
};

// floor(2^(n (I + 2 slack))) for the three layers. Throws ResourceLimit when a
// size does not fit in 63 bits.
CodeSizes compute_code_sizes(const CodingScheme& scheme, std::size_t n, double delta);
// floor(2^e) with a relative guard so exact powers of two are not lost to
// rounding in the exponent.
std::uint64_t floor_exp2(double e);

// Three-layer codebook with codewords stored contiguously.
class Codebook {
 public:
  Codebook() = default;
  Codebook(std::size_t n, double delta, std::uint64_t seed, CodeSizes sizes,
           std::vector<Symbol> w, std::vector<Symbol> x, std::vector<Symbol> y);

  std::size_t n() const { return n_; }
  double delta() const { return delta_; }
  std::uint64_t seed() const { return seed_; }
  const CodeSizes& sizes() const { return sizes_; }
  std::span<const Symbol> w(std::size_t i) const;
  std::span<const Symbol> x(std::size_t i, std::size_t j) const;
  std::span<const Symbol> y(std::size_t i, std::size_t j) const;
  std::span<const Symbol> w_symbols() const { return w_; }
  std::span<const Symbol> x_symbols() const { return x_; }
  std::span<const Symbol> y_symbols() const { return y_; }

  friend bool operator==(const Codebook&, const Codebook&) = default;

 private:
  std::size_t n_ = 0;
  double delta_ = 0.0;
  std::uint64_t seed_ = 0;
  CodeSizes sizes_;
  std::vector<Symbol> w_, x_, y_;
};

// Total codeword symbols a codebook of these sizes stores.
std::uint64_t codebook_symbols(const CodeSizes& sizes, std::size_t n);

// W codewords are uniform over the typical sequences whose conditional sets
// are nonempty on both branches. Throws ResourceLimit when codebook_symbols
// exceeds memory_cap, before allocating anything.
Codebook generate_codebook(const CodingScheme& scheme, const CodeSizes& sizes,
                           std::uint64_t seed, std::uint64_t memory_cap,
                           std::size_t threads = 1);

struct Messages {
  std::size_t s0 = 0, s1 = 0, s2 = 0;
  bool e0 = false;  // no jointly typical common codeword
  bool e1 = false;  // no private X codeword met the distortion threshold
  bool e2 = false;
  double threshold1 = 0.0;
  double threshold2 = 0.0;
  friend bool operator==(const Messages&, const Messages&) = default;
};

// Encoders f0, f1, f2 applied to pi_{-k}(x, y).
Messages encode(std::span<const Symbol> x, std::span<const Symbol> y, std::size_t k,
                const Codebook& codebook, const CodingScheme& scheme);
// Same rules applied to already shifted sequences.
Messages encode_shifted(std::span<const Symbol> xbar, std::span<const Symbol> ybar,
                        const Codebook& codebook, const CodingScheme& scheme);

// Decoders: (pi_k(xt(s0, s1)), pi_k(yt(s0, s2))).
std::pair<Sequence, Sequence> decode(std::size_t s0, std::size_t s1, std::size_t s2,
                                     std::size_t k, const Codebook& codebook);

struct CodebookAudit {
  std::size_t w_atypical = 0;
  std::size_t x_atypical = 0;
  std::size_t y_atypical = 0;
  double max_tv_x = 0.0;  // max over x-codewords of TV(type, Q_Xt)
  double max_tv_y = 0.0;
  double avg_tv_x = 0.0;  // TV(average codeword type, Q_Xt)
  double avg_tv_y = 0.0;
  bool ok(double delta) const {
    return w_atypical == 0 && x_atypical == 0 && y_atypical == 0 && max_tv_x <= delta &&
           max_tv_y <= delta && avg_tv_x <= delta && avg_tv_y <= delta;
  }
};

// Typicality of every codeword plus the codeword-level perception bound.
CodebookAudit audit_codebook(const Codebook& codebook, const CodingScheme& scheme);

}  // namespace gwrdp

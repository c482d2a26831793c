#pragma once

// Finite-alphabet probability machinery. All information quantities are in
// bits (log base 2); 0 log 0 = 0 and p log(p/0) = +inf.

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace gwrdp {

using Symbol = std::uint8_t;
using Sequence = std::vector<Symbol>;

// Tolerance on |sum - 1| accepted when constructing a distribution.
inline constexpr double kNormTolerance = 1e-12;

// Which random variable an axis of a joint distribution stands for.
enum class Role : std::uint8_t { X, Y, W, Xhat, Yhat, Other };

std::string role_name(Role r);
Role role_from_name(const std::string& s);

class Pmf {
 public:
  Pmf() : probs_{1.0} {}
  // Validates non-negativity and |sum - 1| <= kNormTolerance; values are kept
  // verbatim. Use from_weights after arithmetic to renormalize.
  explicit Pmf(std::vector<double> probs);

  static Pmf from_weights(std::vector<double> weights);
  static Pmf uniform(std::size_t k);
  static Pmf point_mass(std::size_t k, std::size_t at);

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const { return probs_; }

  friend bool operator==(const Pmf&, const Pmf&) = default;

 private:
  std::vector<double> probs_;
};

// Dense joint distribution over a product of finite alphabets, row-major
// (last axis fastest).
class JointPmf {
 public:
  JointPmf() : shape_{1}, roles_{Role::Other}, probs_{1.0} {}
  JointPmf(std::vector<std::size_t> shape, std::vector<double> probs,
           std::vector<Role> roles = {});

  static JointPmf from_weights(std::vector<std::size_t> shape,
                               std::vector<double> weights,
                               std::vector<Role> roles = {});
  static JointPmf product(const Pmf& a, const Pmf& b, Role ra = Role::Other,
                          Role rb = Role::Other);

  std::size_t rank() const { return shape_.size(); }
  const std::vector<std::size_t>& shape() const { return shape_; }
  const std::vector<Role>& roles() const { return roles_; }
  std::span<const double> probs() const { return probs_; }
  std::size_t size() const { return probs_.size(); }

  double operator()(std::size_t i, std::size_t j) const;
  double operator()(std::size_t i, std::size_t j, std::size_t k) const;
  double at(std::span<const std::size_t> index) const;
  std::size_t flat_index(std::span<const std::size_t> index) const;
  std::vector<std::size_t> unflatten(std::size_t flat) const;

  Pmf marginal(std::size_t axis) const;
  // Joint marginal over `keep`, axes reordered as listed.
  JointPmf marginal(const std::vector<std::size_t>& keep) const;
  JointPmf with_roles(std::vector<Role> roles) const;

  friend bool operator==(const JointPmf&, const JointPmf&) = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<Role> roles_;
  std::vector<double> probs_;
};

// Conditional distribution: one output pmf per conditioning index. When the
// conditioning variable is a tuple it is flattened row-major.
class Kernel {
 public:
  Kernel() : inputs_(1), outputs_(1), probs_{1.0} {}
  Kernel(std::size_t inputs, std::size_t outputs, std::vector<double> probs);

  static Kernel from_rows(const std::vector<Pmf>& rows);
  static Kernel identity(std::size_t k);
  // Every input maps to the same output pmf.
  static Kernel constant(std::size_t inputs, const Pmf& out);

  std::size_t inputs() const { return inputs_; }
  std::size_t outputs() const { return outputs_; }
  double operator()(std::size_t in, std::size_t out) const {
    return probs_[in * outputs_ + out];
  }
  Pmf row(std::size_t in) const;
  std::span<const double> probs() const { return probs_; }

  friend bool operator==(const Kernel&, const Kernel&) = default;

 private:
  std::size_t inputs_;
  std::size_t outputs_;
  std::vector<double> probs_;
};

// Q_{A,B} = P_A x Q_{B|A}.
JointPmf compose(const Pmf& input, const Kernel& channel,
                 Role in_role = Role::Other, Role out_role = Role::Other);
// Appends a new last axis: Q(a..., b) = J(a...) K(b | flat(a...)).
JointPmf attach(const JointPmf& joint, const Kernel& channel,
                Role out_role = Role::Other);
// Same as attach, but the kernel conditions only on the listed axes of joint.
JointPmf attach(const JointPmf& joint, const Kernel& channel,
                const std::vector<std::size_t>& cond_axes,
                Role out_role = Role::Other);

struct EmpiricalType {
  std::vector<std::size_t> counts;
  std::size_t n = 0;
  Pmf pmf() const;
  friend bool operator==(const EmpiricalType&, const EmpiricalType&) = default;
};

EmpiricalType empirical_type(std::span<const Symbol> seq, std::size_t alphabet);
// Joint type of equal-length sequences; counts are flattened row-major over
// the product alphabet in the order the sequences are given.
EmpiricalType joint_empirical_type(
    const std::vector<std::span<const Symbol>>& seqs,
    const std::vector<std::size_t>& alphabets);

double entropy(const Pmf& p);
double entropy(std::span<const double> probs);
double entropy(const JointPmf& j);
// H(axes_a | axes_b).
double conditional_entropy(const JointPmf& j, const std::vector<std::size_t>& a,
                           const std::vector<std::size_t>& b);
// I(A;B) for a 2-axis joint.
double mutual_information(const JointPmf& j);
// I(axes_a ; axes_b) for any joint.
double mutual_information(const JointPmf& j, const std::vector<std::size_t>& a,
                          const std::vector<std::size_t>& b);
// I(A;B|C) for a 3-axis joint (A, B, C).
double conditional_mutual_information(const JointPmf& j);
double conditional_mutual_information(const JointPmf& j,
                                      const std::vector<std::size_t>& a,
                                      const std::vector<std::size_t>& b,
                                      const std::vector<std::size_t>& c);

// Sum_x |p(x) - q(x)|, no factor 1/2; range [0, 2].
double tv_distance(const Pmf& p, const Pmf& q);
double tv_distance(std::span<const double> p, std::span<const double> q);
// D(p || q) in bits.
double kl_divergence(const Pmf& p, const Pmf& q);

// Per-letter distortion Delta(x, xhat). Every row must contain a zero.
class DistortionMatrix {
 public:
  DistortionMatrix() = default;
  DistortionMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  static DistortionMatrix hamming(std::size_t k);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t x, std::size_t xh) const {
    return values_[x * cols_ + xh];
  }
  std::span<const double> values() const { return values_; }
  double max_value() const;
  // True when every source symbol has a zero-distortion reconstruction.
  bool has_zero_per_row() const;

  friend bool operator==(const DistortionMatrix&, const DistortionMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

double expected_distortion(const JointPmf& j, const DistortionMatrix& delta);
// Per-letter average distortion between two equal-length sequences.
double average_distortion(std::span<const Symbol> a, std::span<const Symbol> b,
                          const DistortionMatrix& delta);

}  // namespace gwrdp

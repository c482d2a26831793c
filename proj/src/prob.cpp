#include "gwrdp/prob.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "gwrdp/error.hpp"

namespace gwrdp {
namespace {

double checked_sum(const std::vector<double>& v, const char* what) {
  if (v.empty()) throw InvalidArgument(std::string(what) + ": empty alphabet");
  double s = 0.0;
  for (double x : v) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      std::ostringstream os;
      os << what << ": entry " << x << " is not a finite non-negative number";
      throw InvalidArgument(os.str());
    }
    s += x;
  }
  return s;
}

void normalize_in_place(std::vector<double>& v, const char* what, bool strict) {
  const double s = checked_sum(v, what);
  if (strict && std::abs(s - 1.0) > kNormTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << what << ": entries sum to " << s << ", not 1";
    throw InvalidArgument(os.str());
  }
  if (!(s > 0.0)) throw InvalidArgument(std::string(what) + ": zero total mass");
  // Validated inputs are stored verbatim so serialization round-trips exactly.
  if (!strict)
    for (double& x : v) x /= s;
}

double plogp(double p) { return p > 0.0 ? p * std::log2(p) : 0.0; }

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (auto s : shape) n *= s;
  return n;
}

}  // namespace

std::string role_name(Role r) {
  switch (r) {
    case Role::X: return "X";
    case Role::Y: return "Y";
    case Role::W: return "W";
    case Role::Xhat: return "Xhat";
    case Role::Yhat: return "Yhat";
    case Role::Other: return "-";
  }
  return "-";
}

Role role_from_name(const std::string& s) {
  if (s == "X") return Role::X;
  if (s == "Y") return Role::Y;
  if (s == "W") return Role::W;
  if (s == "Xhat") return Role::Xhat;
  if (s == "Yhat") return Role::Yhat;
  return Role::Other;
}

// ---------------------------------------------------------------- Pmf

Pmf::Pmf(std::vector<double> probs) : probs_(std::move(probs)) {
  normalize_in_place(probs_, "Pmf", true);
}

Pmf Pmf::from_weights(std::vector<double> weights) {
  normalize_in_place(weights, "Pmf", false);
  return Pmf(std::move(weights));
}

Pmf Pmf::uniform(std::size_t k) {
  if (k == 0) throw InvalidArgument("Pmf: empty alphabet");
  return Pmf(std::vector<double>(k, 1.0 / static_cast<double>(k)));
}

Pmf Pmf::point_mass(std::size_t k, std::size_t at) {
  if (at >= k) throw InvalidArgument("Pmf: point mass outside alphabet");
  std::vector<double> v(k, 0.0);
  v[at] = 1.0;
  return Pmf(std::move(v));
}

// ---------------------------------------------------------------- JointPmf

JointPmf::JointPmf(std::vector<std::size_t> shape, std::vector<double> probs,
                   std::vector<Role> roles)
    : shape_(std::move(shape)), roles_(std::move(roles)), probs_(std::move(probs)) {
  if (shape_.empty()) throw InvalidArgument("JointPmf: no axes");
  for (auto s : shape_)
    if (s == 0) throw InvalidArgument("JointPmf: empty axis");
  if (shape_product(shape_) != probs_.size())
    throw InvalidArgument("JointPmf: shape does not match number of entries");
  if (roles_.empty()) roles_.assign(shape_.size(), Role::Other);
  if (roles_.size() != shape_.size())
    throw InvalidArgument("JointPmf: one role per axis required");
  normalize_in_place(probs_, "JointPmf", true);
}

JointPmf JointPmf::from_weights(std::vector<std::size_t> shape,
                                std::vector<double> weights,
                                std::vector<Role> roles) {
  normalize_in_place(weights, "JointPmf", false);
  return JointPmf(std::move(shape), std::move(weights), std::move(roles));
}

JointPmf JointPmf::product(const Pmf& a, const Pmf& b, Role ra, Role rb) {
  std::vector<double> v(a.size() * b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) v[i * b.size() + j] = a[i] * b[j];
  return from_weights({a.size(), b.size()}, std::move(v), {ra, rb});
}

double JointPmf::operator()(std::size_t i, std::size_t j) const {
  return probs_[i * shape_[1] + j];
}

double JointPmf::operator()(std::size_t i, std::size_t j, std::size_t k) const {
  return probs_[(i * shape_[1] + j) * shape_[2] + k];
}

std::size_t JointPmf::flat_index(std::span<const std::size_t> index) const {
  if (index.size() != shape_.size())
    throw InvalidArgument("JointPmf: index rank mismatch");
  std::size_t flat = 0;
  for (std::size_t a = 0; a < shape_.size(); ++a) {
    if (index[a] >= shape_[a]) throw InvalidArgument("JointPmf: index out of range");
    flat = flat * shape_[a] + index[a];
  }
  return flat;
}

std::vector<std::size_t> JointPmf::unflatten(std::size_t flat) const {
  std::vector<std::size_t> idx(shape_.size());
  for (std::size_t a = shape_.size(); a-- > 0;) {
    idx[a] = flat % shape_[a];
    flat /= shape_[a];
  }
  return idx;
}

double JointPmf::at(std::span<const std::size_t> index) const {
  return probs_[flat_index(index)];
}

Pmf JointPmf::marginal(std::size_t axis) const {
  if (axis >= rank()) throw InvalidArgument("JointPmf: axis out of range");
  std::vector<double> m(shape_[axis], 0.0);
  for (std::size_t f = 0; f < probs_.size(); ++f) m[unflatten(f)[axis]] += probs_[f];
  return Pmf::from_weights(std::move(m));
}

JointPmf JointPmf::marginal(const std::vector<std::size_t>& keep) const {
  if (keep.empty()) throw InvalidArgument("JointPmf: empty marginal");
  std::vector<std::size_t> shape;
  std::vector<Role> roles;
  for (auto a : keep) {
    if (a >= rank()) throw InvalidArgument("JointPmf: axis out of range");
    shape.push_back(shape_[a]);
    roles.push_back(roles_[a]);
  }
  std::vector<double> m(shape_product(shape), 0.0);
  for (std::size_t f = 0; f < probs_.size(); ++f) {
    if (probs_[f] == 0.0) continue;
    const auto idx = unflatten(f);
    std::size_t g = 0;
    for (std::size_t i = 0; i < keep.size(); ++i) g = g * shape[i] + idx[keep[i]];
    m[g] += probs_[f];
  }
  return from_weights(std::move(shape), std::move(m), std::move(roles));
}

JointPmf JointPmf::with_roles(std::vector<Role> roles) const {
  JointPmf j = *this;
  if (roles.size() != rank()) throw InvalidArgument("JointPmf: one role per axis required");
  j.roles_ = std::move(roles);
  return j;
}

// ---------------------------------------------------------------- Kernel

Kernel::Kernel(std::size_t inputs, std::size_t outputs, std::vector<double> probs)
    : inputs_(inputs), outputs_(outputs), probs_(std::move(probs)) {
  if (inputs_ == 0 || outputs_ == 0) throw InvalidArgument("Kernel: empty alphabet");
  if (probs_.size() != inputs_ * outputs_)
    throw InvalidArgument("Kernel: entry count does not match inputs x outputs");
  for (std::size_t i = 0; i < inputs_; ++i) {
    std::vector<double> row(probs_.begin() + i * outputs_,
                            probs_.begin() + (i + 1) * outputs_);
    normalize_in_place(row, "Kernel row", true);
    std::copy(row.begin(), row.end(), probs_.begin() + i * outputs_);
  }
}

Kernel Kernel::from_rows(const std::vector<Pmf>& rows) {
  if (rows.empty()) throw InvalidArgument("Kernel: no rows");
  const std::size_t out = rows.front().size();
  std::vector<double> v;
  v.reserve(rows.size() * out);
  for (const auto& r : rows) {
    if (r.size() != out) throw InvalidArgument("Kernel: ragged rows");
    v.insert(v.end(), r.probs().begin(), r.probs().end());
  }
  return Kernel(rows.size(), out, std::move(v));
}

Kernel Kernel::identity(std::size_t k) {
  std::vector<double> v(k * k, 0.0);
  for (std::size_t i = 0; i < k; ++i) v[i * k + i] = 1.0;
  return Kernel(k, k, std::move(v));
}

Kernel Kernel::constant(std::size_t inputs, const Pmf& out) {
  return from_rows(std::vector<Pmf>(inputs, out));
}

Pmf Kernel::row(std::size_t in) const {
  if (in >= inputs_) throw InvalidArgument("Kernel: row out of range");
  return Pmf(std::vector<double>(probs_.begin() + in * outputs_,
                                 probs_.begin() + (in + 1) * outputs_));
}

JointPmf compose(const Pmf& input, const Kernel& channel, Role in_role, Role out_role) {
  if (channel.inputs() != input.size())
    throw InvalidArgument("compose: kernel input alphabet does not match pmf");
  std::vector<double> v(input.size() * channel.outputs());
  for (std::size_t a = 0; a < input.size(); ++a)
    for (std::size_t b = 0; b < channel.outputs(); ++b)
      v[a * channel.outputs() + b] = input[a] * channel(a, b);
  return JointPmf::from_weights({input.size(), channel.outputs()}, std::move(v),
                                {in_role, out_role});
}

JointPmf attach(const JointPmf& joint, const Kernel& channel, Role out_role) {
  std::vector<std::size_t> all(joint.rank());
  std::iota(all.begin(), all.end(), 0);
  return attach(joint, channel, all, out_role);
}

JointPmf attach(const JointPmf& joint, const Kernel& channel,
                const std::vector<std::size_t>& cond_axes, Role out_role) {
  std::size_t cond_size = 1;
  for (auto a : cond_axes) {
    if (a >= joint.rank()) throw InvalidArgument("attach: axis out of range");
    cond_size *= joint.shape()[a];
  }
  if (channel.inputs() != cond_size)
    throw InvalidArgument("attach: kernel input alphabet does not match conditioning axes");
  auto shape = joint.shape();
  shape.push_back(channel.outputs());
  auto roles = joint.roles();
  roles.push_back(out_role);
  const std::size_t out = channel.outputs();
  std::vector<double> v(joint.size() * out);
  for (std::size_t f = 0; f < joint.size(); ++f) {
    const auto idx = joint.unflatten(f);
    std::size_t c = 0;
    for (auto a : cond_axes) c = c * joint.shape()[a] + idx[a];
    for (std::size_t b = 0; b < out; ++b) v[f * out + b] = joint.probs()[f] * channel(c, b);
  }
  return JointPmf::from_weights(std::move(shape), std::move(v), std::move(roles));
}

// ---------------------------------------------------------------- types

Pmf EmpiricalType::pmf() const {
  std::vector<double> v(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i)
    v[i] = static_cast<double>(counts[i]) / static_cast<double>(n);
  return Pmf::from_weights(std::move(v));
}

EmpiricalType empirical_type(std::span<const Symbol> seq, std::size_t alphabet) {
  return joint_empirical_type({seq}, {alphabet});
}

EmpiricalType joint_empirical_type(const std::vector<std::span<const Symbol>>& seqs,
                                   const std::vector<std::size_t>& alphabets) {
  if (seqs.empty() || seqs.size() != alphabets.size())
    throw InvalidArgument("empirical_type: one alphabet per sequence required");
  const std::size_t n = seqs.front().size();
  if (n == 0) throw InvalidArgument("empirical_type: empty sequence");
  for (const auto& s : seqs)
    if (s.size() != n) throw InvalidArgument("empirical_type: sequence length mismatch");
  EmpiricalType t;
  t.n = n;
  t.counts.assign(shape_product(alphabets), 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t f = 0;
    for (std::size_t k = 0; k < seqs.size(); ++k) {
      const std::size_t s = seqs[k][i];
      if (s >= alphabets[k]) {
        std::ostringstream os;
        os << "empirical_type: symbol " << s << " at position " << i
           << " outside alphabet of size " << alphabets[k];
        throw InvalidArgument(os.str());
      }
      f = f * alphabets[k] + s;
    }
    ++t.counts[f];
  }
  return t;
}

// ---------------------------------------------------------------- information

double entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs) h -= plogp(p);
  return std::max(h, 0.0);
}

double entropy(const Pmf& p) { return entropy(p.probs()); }
double entropy(const JointPmf& j) { return entropy(j.probs()); }

namespace {

double marginal_entropy(const JointPmf& j, std::vector<std::size_t> axes) {
  if (axes.empty()) return 0.0;
  std::sort(axes.begin(), axes.end());
  axes.erase(std::unique(axes.begin(), axes.end()), axes.end());
  return entropy(j.marginal(axes));
}

std::vector<std::size_t> join(std::vector<std::size_t> a, const std::vector<std::size_t>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

double conditional_entropy(const JointPmf& j, const std::vector<std::size_t>& a,
                           const std::vector<std::size_t>& b) {
  return std::max(0.0, marginal_entropy(j, join(a, b)) - marginal_entropy(j, b));
}

double mutual_information(const JointPmf& j) {
  if (j.rank() != 2) throw InvalidArgument("mutual_information: 2-axis joint required");
  return mutual_information(j, {0}, {1});
}

double mutual_information(const JointPmf& j, const std::vector<std::size_t>& a,
                          const std::vector<std::size_t>& b) {
  const double i = marginal_entropy(j, a) + marginal_entropy(j, b) -
                   marginal_entropy(j, join(a, b));
  return std::max(i, 0.0);
}

double conditional_mutual_information(const JointPmf& j) {
  if (j.rank() != 3)
    throw InvalidArgument("conditional_mutual_information: 3-axis joint required");
  return conditional_mutual_information(j, {0}, {1}, {2});
}

double conditional_mutual_information(const JointPmf& j, const std::vector<std::size_t>& a,
                                      const std::vector<std::size_t>& b,
                                      const std::vector<std::size_t>& c) {
  const double i = marginal_entropy(j, join(a, c)) + marginal_entropy(j, join(b, c)) -
                   marginal_entropy(j, join(join(a, b), c)) - marginal_entropy(j, c);
  return std::max(i, 0.0);
}

double tv_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw InvalidArgument("tv_distance: alphabet size mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) d += std::abs(p[i] - q[i]);
  return d;
}

double tv_distance(const Pmf& p, const Pmf& q) { return tv_distance(p.probs(), q.probs()); }

double kl_divergence(const Pmf& p, const Pmf& q) {
  if (p.size() != q.size()) throw InvalidArgument("kl_divergence: alphabet size mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) return std::numeric_limits<double>::infinity();
    d += p[i] * std::log2(p[i] / q[i]);
  }
  return std::max(d, 0.0);
}

// ---------------------------------------------------------------- distortion

DistortionMatrix::DistortionMatrix(std::size_t rows, std::size_t cols,
                                   std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (rows_ == 0 || cols_ == 0) throw InvalidArgument("DistortionMatrix: empty");
  if (values_.size() != rows_ * cols_)
    throw InvalidArgument("DistortionMatrix: entry count does not match shape");
  for (double v : values_)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw InvalidArgument("DistortionMatrix: entries must be finite and non-negative");
  if (!has_zero_per_row())
    throw InvalidArgument(
        "DistortionMatrix: every source symbol needs a zero-distortion reconstruction");
}

DistortionMatrix DistortionMatrix::hamming(std::size_t k) {
  std::vector<double> v(k * k, 1.0);
  for (std::size_t i = 0; i < k; ++i) v[i * k + i] = 0.0;
  return DistortionMatrix(k, k, std::move(v));
}

double DistortionMatrix::max_value() const {
  return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

bool DistortionMatrix::has_zero_per_row() const {
  for (std::size_t x = 0; x < rows_; ++x) {
    bool found = false;
    for (std::size_t y = 0; y < cols_; ++y) found = found || (*this)(x, y) == 0.0;
    if (!found) return false;
  }
  return true;
}

double expected_distortion(const JointPmf& j, const DistortionMatrix& delta) {
  if (j.rank() != 2 || j.shape()[0] != delta.rows() || j.shape()[1] != delta.cols())
    throw InvalidArgument("expected_distortion: distortion matrix does not match joint");
  double d = 0.0;
  for (std::size_t a = 0; a < delta.rows(); ++a)
    for (std::size_t b = 0; b < delta.cols(); ++b) d += j(a, b) * delta(a, b);
  return d;
}

double average_distortion(std::span<const Symbol> a, std::span<const Symbol> b,
                          const DistortionMatrix& delta) {
  if (a.size() != b.size() || a.empty())
    throw InvalidArgument("average_distortion: sequence length mismatch");
  // Summed through pair counts so the value depends only on the joint type.
  std::vector<std::size_t> counts(delta.rows() * delta.cols(), 0);
  for (std::size_t t = 0; t < a.size(); ++t) {
    if (a[t] >= delta.rows() || b[t] >= delta.cols())
      throw InvalidArgument("average_distortion: symbol outside distortion matrix");
    ++counts[a[t] * delta.cols() + b[t]];
  }
  double s = 0.0;
  for (std::size_t f = 0; f < counts.size(); ++f)
    if (counts[f] != 0) s += static_cast<double>(counts[f]) * delta.values()[f];
  return s / static_cast<double>(a.size());
}

}  // namespace gwrdp

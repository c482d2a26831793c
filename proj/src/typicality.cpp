#include "gwrdp/typicality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "gwrdp/error.hpp"
#include "parallel.hpp"

namespace gwrdp {
namespace {

constexpr std::uint64_t kStreamW = 10;
constexpr std::uint64_t kStreamX = 11;
constexpr std::uint64_t kStreamY = 12;

double log2_factorial(std::size_t k) {
  return std::lgamma(static_cast<double>(k) + 1.0) / std::log(2.0);
}

// Count vectors over `cells` summing to `total`, each entry within the band
// of its cell at blocklength n.
TypeTable enumerate_band(std::span<const double> q, std::size_t total, std::size_t n,
                         double delta, std::string* error) {
  const std::size_t k = q.size();
  TypeTable t;
  std::vector<std::size_t> cur(k, 0);
  auto range = [&](std::size_t a, std::size_t remaining) {
    const double centre = static_cast<double>(n) * q[a];
    const double lo = std::floor(centre * (1.0 - delta)) - 1.0;
    const double hi = std::ceil(centre * (1.0 + delta)) + 1.0;
    const std::size_t l = lo <= 0.0 ? 0 : static_cast<std::size_t>(lo);
    const std::size_t h =
        std::min<double>(hi, static_cast<double>(remaining)) < 0.0
            ? 0
            : static_cast<std::size_t>(std::min<double>(hi, static_cast<double>(remaining)));
    return std::pair<std::size_t, std::size_t>{l, h};
  };
  auto rec = [&](auto&& self, std::size_t a, std::size_t remaining) -> void {
    if (a + 1 == k) {
      if (!within_band(remaining, n, q[a], delta)) return;
      cur[a] = remaining;
      t.counts.push_back(cur);
      return;
    }
    const auto [l, h] = range(a, remaining);
    for (std::size_t c = l; c <= h && c <= remaining; ++c) {
      if (!within_band(c, n, q[a], delta)) continue;
      cur[a] = c;
      self(self, a + 1, remaining - c);
    }
  };
  if (k > 0) rec(rec, 0, total);

  if (t.counts.empty()) {
    std::ostringstream os;
    os << "typical set is empty: ";
    bool named = false;
    for (std::size_t a = 0; a < k && !named; ++a) {
      bool any = false;
      for (std::size_t c = 0; c <= total && !any; ++c) any = within_band(c, n, q[a], delta);
      if (!any) {
        os << "no count of symbol " << a << " (probability " << q[a] << ") satisfies |c/" << n
           << " - q| <= " << delta << " q with c <= " << total;
        named = true;
      }
    }
    if (!named)
      os << "the per-symbol bands |c/" << n << " - q| <= " << delta
         << " q admit no count vector summing to " << total;
    if (error != nullptr) {
      *error = os.str();
      return t;
    }
    throw Infeasible(os.str());
  }
  double lmax = -std::numeric_limits<double>::infinity();
  for (const auto& c : t.counts) {
    double s = log2_factorial(total);
    for (auto v : c) s -= log2_factorial(v);
    t.log2_sizes.push_back(s);
    lmax = std::max(lmax, s);
  }
  double acc = 0.0;
  for (double s : t.log2_sizes) acc += std::exp2(s - lmax);
  t.log2_total = lmax + std::log2(acc);
  return t;
}

std::vector<double> relative_weights(const TypeTable& t) {
  const double lmax = *std::max_element(t.log2_sizes.begin(), t.log2_sizes.end());
  std::vector<double> w;
  w.reserve(t.log2_sizes.size());
  for (double s : t.log2_sizes) w.push_back(std::exp2(s - lmax));
  return w;
}

// Uniform arrangement of the multiset given by counts.
void arrange(const std::vector<std::size_t>& counts, Rng& rng, std::vector<Symbol>& out) {
  out.clear();
  for (std::size_t a = 0; a < counts.size(); ++a)
    out.insert(out.end(), counts[a], static_cast<Symbol>(a));
  rng.shuffle(out);
}

bool band_counts(const std::vector<std::size_t>& counts, std::size_t n,
                 std::span<const double> q, double delta) {
  for (std::size_t f = 0; f < counts.size(); ++f)
    if (!within_band(counts[f], n, q[f], delta)) return false;
  return true;
}

void check_shift(std::size_t k, std::size_t n) {
  if (n == 0) throw InvalidArgument("circular_shift: empty sequence");
  if (k >= n) throw InvalidArgument("circular_shift: seed must lie in [0, n-1]");
}

double fast_average_distortion(std::span<const Symbol> a, std::span<const Symbol> b,
                               const DistortionMatrix& delta, std::vector<std::size_t>& scratch) {
  scratch.assign(delta.rows() * delta.cols(), 0);
  for (std::size_t t = 0; t < a.size(); ++t) ++scratch[a[t] * delta.cols() + b[t]];
  double s = 0.0;
  for (std::size_t f = 0; f < scratch.size(); ++f)
    if (scratch[f] != 0) s += static_cast<double>(scratch[f]) * delta.values()[f];
  return s / static_cast<double>(a.size());
}

}  // namespace

std::size_t theta(std::size_t n, std::size_t k, std::size_t t) {
  if (n == 0 || k >= n || t < 1 || t > n)
    throw InvalidArgument("theta: require 1 <= t <= n and 0 <= k <= n-1");
  return ((t + k - 1) % n) + 1;
}

Sequence circular_shift(std::size_t k, std::span<const Symbol> seq) {
  const std::size_t n = seq.size();
  check_shift(k, n);
  Sequence out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = seq[(i + k) % n];
  return out;
}

std::pair<Sequence, Sequence> circular_shift(std::size_t k, std::span<const Symbol> x,
                                             std::span<const Symbol> y) {
  if (x.size() != y.size()) throw InvalidArgument("circular_shift: length mismatch");
  return {circular_shift(k, x), circular_shift(k, y)};
}

Sequence inverse_circular_shift(std::size_t k, std::span<const Symbol> seq) {
  check_shift(k, seq.size());
  return circular_shift((seq.size() - k) % seq.size(), seq);
}

bool within_band(std::size_t count, std::size_t n, double q, double delta) {
  if (q <= 0.0) return count == 0;
  return std::abs(static_cast<double>(count) / static_cast<double>(n) - q) <= delta * q;
}

bool is_typical(std::span<const Symbol> seq, const Pmf& q, double delta) {
  const auto t = empirical_type(seq, q.size());
  return band_counts(t.counts, t.n, q.probs(), delta);
}

bool is_cond_typical(std::span<const Symbol> seq, std::span<const Symbol> cond,
                     const JointPmf& q_ac, double delta) {
  if (q_ac.rank() != 2) throw InvalidArgument("is_cond_typical: joint must have axes (A, C)");
  const auto t = joint_empirical_type({seq, cond}, {q_ac.shape()[0], q_ac.shape()[1]});
  return band_counts(t.counts, t.n, q_ac.probs(), delta);
}

bool is_jointly_typical(std::span<const Symbol> x, std::span<const Symbol> y,
                        std::span<const Symbol> w, const JointPmf& q_xyw, double delta) {
  if (q_xyw.rank() != 3) throw InvalidArgument("is_jointly_typical: joint must have 3 axes");
  const auto& s = q_xyw.shape();
  const auto t = joint_empirical_type({x, y, w}, {s[0], s[1], s[2]});
  return band_counts(t.counts, t.n, q_xyw.probs(), delta);
}

TypeTable enumerate_types(std::span<const double> q, std::size_t n, double delta) {
  if (n == 0) throw InvalidArgument("enumerate_types: n must be positive");
  if (!(delta >= 0.0)) throw InvalidArgument("enumerate_types: delta must be non-negative");
  return enumerate_band(q, n, n, delta, nullptr);
}

TypicalSampler::TypicalSampler(const TypicalSetSpec& spec)
    : n_(spec.n), table_(enumerate_types(spec.q.probs(), spec.n, spec.delta)) {
  weights_ = relative_weights(table_);
}

TypicalSampler::TypicalSampler(std::size_t n, TypeTable table) : n_(n), table_(std::move(table)) {
  if (table_.counts.empty()) throw Infeasible("TypicalSampler: no admissible type");
  weights_ = relative_weights(table_);
}

Sequence TypicalSampler::operator()(Rng& rng) const {
  Sequence out;
  out.reserve(n_);
  arrange(table_.counts[rng.categorical(weights_)], rng, out);
  return out;
}

ConditionalTypicalSampler::ConditionalTypicalSampler(const JointPmf& q_ac, double delta,
                                                     std::size_t n)
    : a_size_(q_ac.shape()[0]), c_size_(q_ac.rank() == 2 ? q_ac.shape()[1] : 0), n_(n) {
  if (q_ac.rank() != 2)
    throw InvalidArgument("ConditionalTypicalSampler: joint must have axes (A, C)");
  if (n == 0) throw InvalidArgument("ConditionalTypicalSampler: n must be positive");
  strata_.resize(c_size_);
  std::vector<double> cells(a_size_);
  for (std::size_t c = 0; c < c_size_; ++c) {
    for (std::size_t a = 0; a < a_size_; ++a) cells[a] = q_ac(a, c);
    strata_[c].resize(n + 1);
    for (std::size_t len = 0; len <= n; ++len) {
      Stratum& s = strata_[c][len];
      s.table = enumerate_band(cells, len, n, delta, &s.error);
      if (s.error.empty()) s.weights = relative_weights(s.table);
      else {
        std::ostringstream os;
        os << "conditional " << s.error << " (conditioning symbol " << c << " occurring " << len
           << " times)";
        s.error = os.str();
      }
    }
  }
}

const ConditionalTypicalSampler::Stratum& ConditionalTypicalSampler::stratum(
    std::size_t c, std::size_t length) const {
  const Stratum& s = strata_[c][length];
  if (!s.error.empty()) throw Infeasible(s.error);
  return s;
}

Sequence ConditionalTypicalSampler::operator()(std::span<const Symbol> cond, Rng& rng) const {
  if (cond.size() != n_) throw InvalidArgument("ConditionalTypicalSampler: length mismatch");
  std::vector<std::vector<std::size_t>> positions(c_size_);
  for (std::size_t t = 0; t < n_; ++t) {
    if (cond[t] >= c_size_)
      throw InvalidArgument("ConditionalTypicalSampler: conditioning symbol out of range");
    positions[cond[t]].push_back(t);
  }
  for (std::size_t c = 0; c < c_size_; ++c) stratum(c, positions[c].size());
  Sequence out(n_);
  std::vector<Symbol> block;
  for (std::size_t c = 0; c < c_size_; ++c) {
    const Stratum& s = strata_[c][positions[c].size()];
    arrange(s.table.counts[rng.categorical(s.weights)], rng, block);
    for (std::size_t i = 0; i < block.size(); ++i) out[positions[c][i]] = block[i];
  }
  return out;
}

double ConditionalTypicalSampler::log2_size(std::span<const Symbol> cond) const {
  if (cond.size() != n_) throw InvalidArgument("ConditionalTypicalSampler: length mismatch");
  std::vector<std::size_t> counts(c_size_, 0);
  for (auto c : cond) {
    if (c >= c_size_)
      throw InvalidArgument("ConditionalTypicalSampler: conditioning symbol out of range");
    ++counts[c];
  }
  double total = 0.0;
  for (std::size_t c = 0; c < c_size_; ++c) total += stratum(c, counts[c]).table.log2_total;
  return total;
}

bool ConditionalTypicalSampler::admits(const std::vector<std::size_t>& cond_counts) const {
  if (cond_counts.size() != c_size_) return false;
  for (std::size_t c = 0; c < c_size_; ++c)
    if (cond_counts[c] > n_ || !strata_[c][cond_counts[c]].error.empty()) return false;
  return true;
}

std::vector<Sequence> sample_uniform_typical(const TypicalSetSpec& spec, std::size_t count,
                                             std::uint64_t seed) {
  const TypicalSampler sampler(spec);
  Rng rng(seed);
  std::vector<Sequence> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(sampler(rng));
  return out;
}

Sequence sample_rejection_typical(const TypicalSetSpec& spec, Rng& rng, std::size_t max_tries) {
  const std::vector<double> w(spec.q.probs().begin(), spec.q.probs().end());
  Sequence s(spec.n);
  for (std::size_t tries = 0; tries < max_tries; ++tries) {
    for (auto& v : s) v = static_cast<Symbol>(rng.categorical(w));
    if (is_typical(s, spec.q, spec.delta)) return s;
  }
  throw Infeasible("sample_rejection_typical: no typical draw within the try budget");
}

// ---------------------------------------------------------------- scheme

CodingScheme CodingScheme::build(const JointPmf& p_xy, const Kernel& aux, const Kernel& test_x,
                                 const Kernel& test_y, const DistortionMatrix& delta1,
                                 const DistortionMatrix& delta2) {
  if (p_xy.rank() != 2) throw InvalidArgument("CodingScheme: p_xy must have axes (X, Y)");
  const std::size_t nx = p_xy.shape()[0], ny = p_xy.shape()[1];
  if (aux.inputs() != nx * ny)
    throw InvalidArgument("CodingScheme: auxiliary channel must have |X||Y| inputs");
  const std::size_t nw = aux.outputs();
  if (nw > 255 || nx > 255 || ny > 255)
    throw InvalidArgument("CodingScheme: alphabets must fit in one byte");
  if (test_x.inputs() != nx * nw || test_x.outputs() != nx)
    throw InvalidArgument("CodingScheme: X test channel must map (x, w) to the X alphabet");
  if (test_y.inputs() != ny * nw || test_y.outputs() != ny)
    throw InvalidArgument("CodingScheme: Y test channel must map (y, w) to the Y alphabet");
  if (delta1.rows() != nx || delta1.cols() != nx || delta2.rows() != ny || delta2.cols() != ny)
    throw InvalidArgument("CodingScheme: distortion matrices do not match the alphabets");
  CodingScheme s;
  s.q_xyw = attach(p_xy.with_roles({Role::X, Role::Y}), aux, Role::W);
  s.test_x = test_x;
  s.test_y = test_y;
  s.delta1 = delta1;
  s.delta2 = delta2;
  const JointPmf xwt = attach(s.q_xyw.marginal(std::vector<std::size_t>{0, 2}), test_x, Role::Xhat);
  const JointPmf ywt = attach(s.q_xyw.marginal(std::vector<std::size_t>{1, 2}), test_y, Role::Yhat);
  s.q_xt_w = xwt.marginal(std::vector<std::size_t>{2, 1});
  s.q_yt_w = ywt.marginal(std::vector<std::size_t>{2, 1});
  s.q_xt = xwt.marginal(2);
  s.q_yt = ywt.marginal(2);
  s.expected_d1 = expected_distortion(xwt.marginal(std::vector<std::size_t>{0, 2}), delta1);
  s.expected_d2 = expected_distortion(ywt.marginal(std::vector<std::size_t>{0, 2}), delta2);
  return s;
}

std::uint64_t floor_exp2(double e) {
  if (!(e >= 0.0)) throw InvalidArgument("floor_exp2: exponent must be non-negative");
  if (e >= 63.0) {
    std::ostringstream os;
    os << "code size 2^" << e << " does not fit in 63 bits";
    throw ResourceLimit(os.str());
  }
  return static_cast<std::uint64_t>(std::floor(std::exp2(e) * (1.0 + 1e-12)));
}

CodeSizes compute_code_sizes(const CodingScheme& scheme, std::size_t n, double delta) {
  if (n == 0) throw InvalidArgument("compute_code_sizes: n must be positive");
  if (!(delta > 0.0)) throw InvalidArgument("compute_code_sizes: delta must be positive");
  const JointPmf& q = scheme.q_xyw;
  const JointPmf xwt = attach(q.marginal(std::vector<std::size_t>{0, 2}), scheme.test_x);
  const JointPmf ywt = attach(q.marginal(std::vector<std::size_t>{1, 2}), scheme.test_y);
  CodeSizes c;
  c.n = n;
  c.delta = delta;
  c.i_xy_w = std::max(mutual_information(q, {0, 1}, {2}), 0.0);
  c.i_x = std::max(conditional_mutual_information(xwt, {0}, {2}, {1}), 0.0);
  c.i_y = std::max(conditional_mutual_information(ywt, {0}, {2}, {1}), 0.0);
  c.delta1 = delta * (entropy(q.marginal(2)) + conditional_entropy(q, {2}, {0, 1}));
  c.delta_x = delta * (conditional_entropy(xwt, {2}, {1}) + 1.0);
  c.delta_y = delta * (conditional_entropy(ywt, {2}, {1}) + 1.0);
  const double nd = static_cast<double>(n);
  c.m0 = floor_exp2(nd * (c.i_xy_w + 2.0 * c.delta1));
  c.m1 = floor_exp2(nd * (c.i_x + 2.0 * c.delta_x));
  c.m2 = floor_exp2(nd * (c.i_y + 2.0 * c.delta_y));
  return c;
}

std::uint64_t codebook_symbols(const CodeSizes& sizes, std::size_t n) {
  const auto sat_mul = [](std::uint64_t a, std::uint64_t b) -> std::uint64_t {
    if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a)
      return std::numeric_limits<std::uint64_t>::max();
    return a * b;
  };
  const auto sat_add = [](std::uint64_t a, std::uint64_t b) -> std::uint64_t {
    return a > std::numeric_limits<std::uint64_t>::max() - b
               ? std::numeric_limits<std::uint64_t>::max()
               : a + b;
  };
  const std::uint64_t words =
      sat_add(sat_add(sizes.m0, sat_mul(sizes.m0, sizes.m1)), sat_mul(sizes.m0, sizes.m2));
  return sat_mul(words, n);
}

Codebook::Codebook(std::size_t n, double delta, std::uint64_t seed, CodeSizes sizes,
                   std::vector<Symbol> w, std::vector<Symbol> x, std::vector<Symbol> y)
    : n_(n), delta_(delta), seed_(seed), sizes_(sizes), w_(std::move(w)), x_(std::move(x)),
      y_(std::move(y)) {
  if (w_.size() != sizes_.m0 * n_ || x_.size() != sizes_.m0 * sizes_.m1 * n_ ||
      y_.size() != sizes_.m0 * sizes_.m2 * n_)
    throw InvalidArgument("Codebook: symbol arrays do not match the code sizes");
}

std::span<const Symbol> Codebook::w(std::size_t i) const {
  if (i >= sizes_.m0) throw InvalidArgument("Codebook: common index out of range");
  return std::span<const Symbol>(w_).subspan(i * n_, n_);
}

std::span<const Symbol> Codebook::x(std::size_t i, std::size_t j) const {
  if (i >= sizes_.m0 || j >= sizes_.m1) throw InvalidArgument("Codebook: X index out of range");
  return std::span<const Symbol>(x_).subspan((i * sizes_.m1 + j) * n_, n_);
}

std::span<const Symbol> Codebook::y(std::size_t i, std::size_t j) const {
  if (i >= sizes_.m0 || j >= sizes_.m2) throw InvalidArgument("Codebook: Y index out of range");
  return std::span<const Symbol>(y_).subspan((i * sizes_.m2 + j) * n_, n_);
}

Codebook generate_codebook(const CodingScheme& scheme, const CodeSizes& sizes,
                           std::uint64_t seed, std::uint64_t memory_cap, std::size_t threads) {
  const std::size_t n = sizes.n;
  const double delta = sizes.delta;
  const std::uint64_t need = codebook_symbols(sizes, n);
  if (need > memory_cap) {
    std::ostringstream os;
    os << "codebook needs " << need << " codeword symbols, above the memory cap of "
       << memory_cap << " (raise --memory-cap to at least " << need << ")";
    throw ResourceLimit(os.str());
  }
  const ConditionalTypicalSampler x_sampler(scheme.q_xt_w, delta, n);
  const ConditionalTypicalSampler y_sampler(scheme.q_yt_w, delta, n);
  const TypeTable all_w = enumerate_types(scheme.q_xyw.marginal(2).probs(), n, delta);
  TypeTable admissible;
  for (std::size_t f = 0; f < all_w.counts.size(); ++f) {
    if (!x_sampler.admits(all_w.counts[f]) || !y_sampler.admits(all_w.counts[f])) continue;
    admissible.counts.push_back(all_w.counts[f]);
    admissible.log2_sizes.push_back(all_w.log2_sizes[f]);
  }
  if (admissible.counts.empty())
    throw Infeasible(
        "no typical W sequence has nonempty conditional typical sets on both branches; "
        "increase delta or n");
  const TypicalSampler w_sampler(n, std::move(admissible));

  std::vector<Symbol> w(sizes.m0 * n), x(sizes.m0 * sizes.m1 * n), y(sizes.m0 * sizes.m2 * n);
  for (std::size_t i = 0; i < sizes.m0; ++i) {
    Rng rng(seed, kStreamW, i);
    const Sequence s = w_sampler(rng);
    std::copy(s.begin(), s.end(), w.begin() + static_cast<std::ptrdiff_t>(i * n));
  }
  auto fill = [&](const ConditionalTypicalSampler& sampler, std::uint64_t stream,
                  std::uint64_t per_parent, std::vector<Symbol>& out) {
    const std::size_t total = sizes.m0 * per_parent;
    constexpr std::size_t kChunk = 1024;
    const std::size_t chunks = (total + kChunk - 1) / kChunk;
    detail::parallel_for(chunks, threads, [&](std::size_t ch) {
      const std::size_t end = std::min(total, (ch + 1) * kChunk);
      for (std::size_t f = ch * kChunk; f < end; ++f) {
        const std::size_t i = f / per_parent;
        Rng rng(seed, stream, f);
        const Sequence s = sampler(std::span<const Symbol>(w).subspan(i * n, n), rng);
        std::copy(s.begin(), s.end(), out.begin() + static_cast<std::ptrdiff_t>(f * n));
      }
    });
  };
  fill(x_sampler, kStreamX, sizes.m1, x);
  fill(y_sampler, kStreamY, sizes.m2, y);
  return Codebook(n, delta, seed, sizes, std::move(w), std::move(x), std::move(y));
}

Messages encode_shifted(std::span<const Symbol> xbar, std::span<const Symbol> ybar,
                        const Codebook& cb, const CodingScheme& scheme) {
  const std::size_t n = cb.n();
  if (xbar.size() != n || ybar.size() != n)
    throw InvalidArgument("encode: source sequences must have the codebook blocklength");
  const double delta = cb.delta();
  Messages m;
  m.threshold1 = scheme.expected_d1 + delta / 2.0;
  m.threshold2 = scheme.expected_d2 + delta / 2.0;
  m.e0 = true;
  for (std::size_t i = 0; i < cb.sizes().m0; ++i) {
    if (is_jointly_typical(xbar, ybar, cb.w(i), scheme.q_xyw, delta)) {
      m.s0 = i;
      m.e0 = false;
      break;
    }
  }
  std::vector<std::size_t> scratch;
  m.e1 = true;
  for (std::size_t j = 0; j < cb.sizes().m1; ++j) {
    if (fast_average_distortion(xbar, cb.x(m.s0, j), scheme.delta1, scratch) <= m.threshold1) {
      m.s1 = j;
      m.e1 = false;
      break;
    }
  }
  m.e2 = true;
  for (std::size_t j = 0; j < cb.sizes().m2; ++j) {
    if (fast_average_distortion(ybar, cb.y(m.s0, j), scheme.delta2, scratch) <= m.threshold2) {
      m.s2 = j;
      m.e2 = false;
      break;
    }
  }
  return m;
}

Messages encode(std::span<const Symbol> x, std::span<const Symbol> y, std::size_t k,
                const Codebook& codebook, const CodingScheme& scheme) {
  if (x.size() != y.size()) throw InvalidArgument("encode: length mismatch");
  const Sequence xbar = inverse_circular_shift(k, x);
  const Sequence ybar = inverse_circular_shift(k, y);
  return encode_shifted(xbar, ybar, codebook, scheme);
}

std::pair<Sequence, Sequence> decode(std::size_t s0, std::size_t s1, std::size_t s2,
                                     std::size_t k, const Codebook& codebook) {
  return {circular_shift(k, codebook.x(s0, s1)), circular_shift(k, codebook.y(s0, s2))};
}

CodebookAudit audit_codebook(const Codebook& cb, const CodingScheme& scheme) {
  CodebookAudit a;
  const auto& sz = cb.sizes();
  const double delta = cb.delta();
  const Pmf q_w = scheme.q_xyw.marginal(2);
  std::vector<double> avg_x(scheme.x_size(), 0.0), avg_y(scheme.y_size(), 0.0);
  auto check = [&](std::span<const Symbol> cw, std::span<const Symbol> w, const JointPmf& q_aw,
                   const Pmf& q_a, std::size_t& atypical, double& max_tv,
                   std::vector<double>& avg) {
    if (!is_cond_typical(cw, w, q_aw, delta)) ++atypical;
    const Pmf t = empirical_type(cw, q_a.size()).pmf();
    max_tv = std::max(max_tv, tv_distance(t, q_a));
    for (std::size_t s = 0; s < avg.size(); ++s) avg[s] += t[s];
  };
  for (std::size_t i = 0; i < sz.m0; ++i) {
    if (!is_typical(cb.w(i), q_w, delta)) ++a.w_atypical;
    for (std::size_t j = 0; j < sz.m1; ++j)
      check(cb.x(i, j), cb.w(i), scheme.q_xt_w, scheme.q_xt, a.x_atypical, a.max_tv_x, avg_x);
    for (std::size_t j = 0; j < sz.m2; ++j)
      check(cb.y(i, j), cb.w(i), scheme.q_yt_w, scheme.q_yt, a.y_atypical, a.max_tv_y, avg_y);
  }
  for (auto& v : avg_x) v /= static_cast<double>(sz.m0 * sz.m1);
  for (auto& v : avg_y) v /= static_cast<double>(sz.m0 * sz.m2);
  a.avg_tv_x = tv_distance(avg_x, scheme.q_xt.probs());
  a.avg_tv_y = tv_distance(avg_y, scheme.q_yt.probs());
  return a;
}

}  // namespace gwrdp
